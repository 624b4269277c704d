import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from seplsd import identity_model, make_measure, mp_density, mp_params, mp_stieltjes, scale_multiple_reduce
from seplsd.closedform import mp_cdf
from seplsd.errors import NonpositiveScale
from seplsd.lsd import invert_density, stieltjes_primary
from seplsd.solver import SolverConfig, residual, solve_hg

# quoted formula evaluated with 40-digit arithmetic, branch with Im s > 0
O_MP = -0.05606646973937297045514237249069609924807 + 0.7407288955208566890781909876474297740019j


def test_params_examples():
    p = mp_params([1.0], [1.0], 0.25)
    assert p.gamma == 1.0 and p.edges == pytest.approx((0.25, 2.25))
    p = mp_params([1.0, 2.0], [1.0, 1.0], 0.25)
    assert p.gamma == 3.0 and p.edges == pytest.approx((0.75, 6.75))
    assert mp_params([2.0], [0.5], 1.0).edges[0] == 0.0
    with pytest.raises(NonpositiveScale):
        mp_params([1.0, -1.0], [1.0, 1.0], 0.5)
    with pytest.raises(NonpositiveScale):
        mp_params([1.0], [1.0], 0.0)


def test_oracle_value():
    assert abs(mp_stieltjes(1 + 1j, mp_params([1.0], [1.0], 0.5)) - O_MP) <= 1e-14


@pytest.mark.parametrize("c", [0.25, 0.5, 1.0, 2.5])
def test_normalization_and_quadratic(c):
    p = mp_params([1.5], [1.0], c)
    y = 1e6
    assert abs(1j * y * mp_stieltjes(1j * y, p) + 1) <= 1e-5
    z = np.array([0.3 + 0.01j, 2 + 1j, -1 + 0.5j, 7 + 3j])
    s = mp_stieltjes(z, p)
    g = p.gamma
    assert np.abs(c * g * z * s**2 + s * (z + (c - 1) * g) + 1).max() <= 1e-12


@settings(max_examples=10_000)
@given(st.floats(-100, 100), st.floats(1e-8, 100), st.floats(0.01, 10), st.floats(0.05, 20))
def test_branch_in_upper_half_plane(x, y, c, g):
    assert mp_stieltjes(complex(x, y), mp_params([g], [1.0], c)).imag > 0


@pytest.mark.parametrize("c", [0.25, 0.5, 2.5])
def test_density_support_and_mass(c):
    p = mp_params([1.0], [1.0], c)
    lo, hi = p.edges
    assert mp_density(lo * 0.5, p) == 0.0 and mp_density(hi * 1.5, p) == 0.0
    mass, _ = quad(lambda t: float(mp_density(t, p)), lo, hi, limit=200)
    assert abs(mass + p.point_mass_zero - 1) <= 1e-6
    assert mp_cdf(hi, p) == 1.0 and mp_cdf(lo * 0.99, p) == pytest.approx(p.point_mass_zero)


def test_density_matches_numeric_inversion():
    p = mp_params([1.0], [1.0], 0.5)
    lo, hi = p.edges
    xs = np.linspace(lo, hi, 102)[1:-1]
    grid = invert_density(identity_model([1.0], [1.0], 0.5), xs, SolverConfig(method="newton", tol=1e-12))
    assert np.abs(grid.densities - mp_density(xs, p)).max() <= 1e-4


def test_density_c1_singularity():
    p = mp_params([1.0], [1.0], 1.0)
    xs = np.geomspace(1e-4, 1e-2, 50)
    d = mp_density(xs, p)
    assert np.all(np.diff(d) < 0)


def test_reduction_identity_case():
    one = make_measure([[1.0]])
    red = scale_multiple_reduce([1.0, 2.0], [0.5, 1.0], one, one, 0.5)
    assert red.gamma == 2.5
    sol = solve_hg(red.reduced, 1 + 1j)
    s = stieltjes_primary(red.reduced, sol)
    assert abs(s - mp_stieltjes(1 + 1j, mp_params([1.0, 2.0], [0.5, 1.0], 0.5))) <= 1e-10
    triv = scale_multiple_reduce([1.0], [1.0], one, one, 0.5)
    assert triv.reduced == triv.full_spec()


def test_reduction_lift_solves_full_system():
    rng = np.random.default_rng(7)
    a, b = rng.uniform(0.5, 2, 3), rng.uniform(0.5, 2, 3)
    H1 = make_measure(rng.uniform(0.2, 3, (5, 1)))
    G1 = make_measure(rng.uniform(0.2, 3, (5, 1)))
    red = scale_multiple_reduce(a, b, H1, G1, 0.8)
    z = 1.3 + 0.4j
    sol = solve_hg(red.reduced, z)
    h, g = red.lift(sol.h, sol.g)
    assert residual(red.full_spec(), z, h, g) <= 1e-9
    full = solve_hg(red.full_spec(), z)
    np.testing.assert_allclose(full.h, h, atol=1e-9)
    with pytest.raises(NonpositiveScale):
        scale_multiple_reduce([0.0], [1.0], H1, G1, 0.5)
