# Generated by Django 3.2.16 on 2026-10-17 09:12

from django.db import migrations, models
import django.utils.timezone
import model_utils.fields


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SolveRun',
            fields=[
                ('id', models.AutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created', model_utils.fields.AutoCreatedField(default=django.utils.timezone.now, editable=False, verbose_name='created')),
                ('modified', model_utils.fields.AutoLastModifiedField(default=django.utils.timezone.now, editable=False, verbose_name='modified')),
                ('subcommand', models.CharField(max_length=32, verbose_name='subcommand')),
                ('benchmark', models.CharField(max_length=32, verbose_name='benchmark')),
                ('config_hash', models.CharField(db_index=True, max_length=64, verbose_name='config hash')),
                ('seed', models.BigIntegerField(verbose_name='master seed')),
                ('output_dir', models.CharField(max_length=1024, verbose_name='output directory')),
                ('status', models.CharField(choices=[('running', 'running'), ('succeeded', 'succeeded'), ('failed', 'failed')], default='running', max_length=16, verbose_name='status')),
                ('summary', models.JSONField(blank=True, default=dict, verbose_name='summary')),
                ('error', models.JSONField(blank=True, null=True, verbose_name='error')),
                ('wall_time', models.FloatField(blank=True, null=True, verbose_name='wall time (s)')),
            ],
            options={
                'ordering': ['-created'],
            },
        ),
    ]
