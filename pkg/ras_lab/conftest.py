import pytest

from ras_lab.grids.lattice import DEFAULT_GRIDS, GridSpec
from ras_lab.solvers.config import SolverConfig
from ras_lab.solvers.tabular import build_Hg, solve_H, solve_V, solve_V_RA
from ras_lab.systems.benchmarks import BenchmarkId, CartModel, ChaseModel


@pytest.fixture(autouse=True)
def output_root(settings, tmpdir):
    settings.RAS_OUTPUT_DIR = tmpdir.strpath


@pytest.fixture(scope="session")
def cart() -> CartModel:
    return CartModel()


@pytest.fixture(scope="session")
def chase() -> ChaseModel:
    return ChaseModel()


@pytest.fixture(scope="session")
def coarse_cart_grid() -> GridSpec:
    return GridSpec(lower=(-6.0, -4.0), upper=(6.0, 4.0), counts=(61, 41))


@pytest.fixture(scope="session")
def cart_config(cart: CartModel) -> SolverConfig:
    return SolverConfig.for_model(cart, gamma=0.95, tolerance=1e-5, max_sweeps=5000)


@pytest.fixture(scope="session")
def cart_solutions(cart, coarse_cart_grid, cart_config) -> dict:
    """H, H_g, V and V_RA of the cart on the coarse grid, solved once per session."""
    h_solution = solve_H(cart, coarse_cart_grid, cart_config)
    hg = build_Hg(h_solution.value, cart, slack=cart_config.epsilon(h_solution.value))
    v_solution = solve_V(cart, coarse_cart_grid, hg, cart_config)
    ra_solution = solve_V_RA(cart, coarse_cart_grid, cart_config, warm_start=v_solution.value)
    return {"H": h_solution, "Hg": hg, "V": v_solution, "V_RA": ra_solution}


@pytest.fixture(scope="session")
def default_cart_solutions(cart) -> dict:
    """The cart pipeline on its default grid and solver settings; only slow tests ask for it."""
    spec = DEFAULT_GRIDS[BenchmarkId.CART2D]
    config = SolverConfig.for_model(cart)
    h_solution = solve_H(cart, spec, config)
    hg = build_Hg(h_solution.value, cart, slack=config.epsilon(h_solution.value))
    v_solution = solve_V(cart, spec, hg, config)
    ra_solution = solve_V_RA(cart, spec, config, warm_start=v_solution.value)
    return {"spec": spec, "config": config, "H": h_solution, "Hg": hg, "V": v_solution, "V_RA": ra_solution}
