import numpy as np
import pytest

from seplsd import identity_model, make_measure, mp_params, mp_stieltjes
from seplsd.errors import InsufficientRestarts, InvalidModel, NotInUpperHalfPlane
from seplsd.measure import ModelSpec
from seplsd.solver import (
    SolverConfig, default_initial, residual, solve_batch, solve_grid, solve_hg, uniqueness_probe,
)

MP = identity_model([1.0], [1.0], 0.5)
MP_PARAMS = mp_params([1.0], [1.0], 0.5)


def two_atom_model(c=1.0):
    H = make_measure([(1.0, 2.0), (3.0, 1.0)])
    G = make_measure([(0.5, 1.0), (2.0, 0.3)], [0.4, 0.6])
    return ModelSpec(c, H, G)


def test_mp_solution():
    sol = solve_hg(MP, 1 + 1j)
    s = mp_stieltjes(1 + 1j, MP_PARAMS)
    assert sol.converged and sol.residual <= 1e-10
    assert abs(sol.h[0] - s) <= 1e-10
    # for delta_1 scalings g = -1/(z(1 + c h))
    assert abs(sol.g[0] + 1 / ((1 + 1j) * (1 + 0.5 * s))) <= 1e-10


def test_far_imaginary_point_bound():
    spec = two_atom_model()
    sol = solve_hg(spec, 1e6j)
    assert np.all(np.abs(sol.h) <= spec.c0() * 1e-6)
    assert np.all(np.abs(sol.g) <= spec.c0() * 1e-6)


@pytest.mark.parametrize("method", ["picard", "newton"])
def test_methods_agree(method):
    spec = two_atom_model(0.7)
    sol = solve_hg(spec, 0.9 + 0.2j, SolverConfig(method=method))
    ref = solve_hg(spec, 0.9 + 0.2j, SolverConfig(method="picard", tol=1e-14))
    assert sol.converged
    np.testing.assert_allclose(sol.h, ref.h, atol=1e-10)


def test_residual_detects_defects():
    s = mp_stieltjes(1 + 1j, MP_PARAMS)
    z = 1 + 1j
    h = np.array([s])
    g = -1 / (z * (1 + 0.5 * h))
    assert residual(MP, z, h, g) <= 1e-12
    assert residual(MP, z, h + 0.1j, g) > 1e-3
    assert residual(MP, z, np.array([0.3 + 0.2j]), np.array([0.1 + 0.5j])) > 0


def test_uniqueness_probe():
    rep = uniqueness_probe(two_atom_model(), 2j, SolverConfig(n_restarts=10), seed=3)
    assert rep.n_converged == 10 and rep.max_pairwise_distance <= 1e-8
    rep = uniqueness_probe(MP, 1 + 1j, SolverConfig(n_restarts=10))
    assert rep.max_pairwise_distance <= 1e-8
    with pytest.raises(InsufficientRestarts):
        uniqueness_probe(MP, 1j, SolverConfig(n_restarts=1))
    small = uniqueness_probe(identity_model([1.0], [1.0], 1.0), 0.001j,
                             SolverConfig(n_restarts=4, max_iters=200))
    assert 0 <= small.n_converged <= 4 and small.max_pairwise_distance >= 0


def test_grid_single_point_equals_solve_hg():
    cfg = SolverConfig(homotopy=False)
    a = solve_grid(MP, [0.7 + 0.5j], cfg)[0]
    b = solve_hg(MP, 0.7 + 0.5j, cfg)
    np.testing.assert_array_equal(a.h, b.h)
    assert a.iterations == b.iterations


def test_grid_near_axis_matches_closed_form():
    xs = np.linspace(0.02, 3.2, 200)
    zs = xs + 1e-3j
    sol = solve_grid(MP, zs, SolverConfig(method="newton", homotopy=False))
    assert sol.converged.all()
    err = np.abs(sol.h[:, 0] - mp_stieltjes(zs, MP_PARAMS))
    assert err.max() <= 1e-8


def test_parallel_is_bitwise_serial():
    spec = two_atom_model(0.8)
    zs = np.linspace(-1, 5, 60) + 0.3j
    cfg = SolverConfig(homotopy=False)
    a = solve_grid(spec, zs, cfg, workers=1, chunk=16)
    b = solve_grid(spec, zs, cfg, workers=3, chunk=16)
    assert a.residual.tobytes() == b.residual.tobytes()
    assert a.h.tobytes() == b.h.tobytes()


def test_batch_rows_independent_of_batch():
    spec = two_atom_model(0.8)
    zs = np.linspace(0.1, 4, 9) + 0.2j
    cfg = SolverConfig(homotopy=False)
    full = solve_batch(spec, zs, cfg)
    one = solve_batch(spec, zs[4:5], cfg)
    assert full.h[4].tobytes() == one.h[0].tobytes()


def test_invalid_inputs():
    with pytest.raises(InvalidModel):
        solve_hg(ModelSpec(0.5, make_measure([[0.0]]), make_measure([[1.0]])), 1j)
    with pytest.raises(NotInUpperHalfPlane):
        solve_hg(MP, 1.0 + 0j)
    with pytest.raises(ValueError):
        SolverConfig(damping=0)


def test_default_initial_in_half_plane():
    h0 = default_initial(two_atom_model(), [1e-4j + 2, 10j])
    assert h0.shape == (2, 2) and np.all(h0.imag > 0)
