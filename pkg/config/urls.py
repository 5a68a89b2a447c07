from django.conf import settings
from django.contrib import admin
from django.urls import path

urlpatterns = [
    # Run ledger browsing, use {% url 'admin:index' %}
    path(settings.ADMIN_URL, admin.site.urls),
]
