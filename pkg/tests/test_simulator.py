import numpy as np
import pytest

from seplsd.errors import DimensionMismatch
from seplsd.simulator import (
    EigenLaw, InnovationSpec, ScalingEnsembleSpec, Scalings, SpectralSample, esd, haar_unitary,
    householder_reflector, exponential_ensemble, simulate_exponential_study, round_half_away, sample_covariance,
    sample_scalings, stream,
)


def identity_ensemble(K, p, n, basis="identity"):
    laws = tuple(EigenLaw.constant(1.0) for _ in range(K))
    return ScalingEnsembleSpec(K, p, n, laws, laws, basis)


def test_haar_small_and_unitary():
    u = haar_unitary(1, stream(0, 2))
    assert abs(abs(u[0, 0]) - 1) <= 1e-15
    U = haar_unitary(64, stream(1, 2))
    assert np.abs(U.conj().T @ U - np.eye(64)).max() <= 1e-12


def test_haar_entry_moment():
    dim, n = 8, 10_000
    rng = stream(5, 2)
    vals = np.array([abs(haar_unitary(dim, rng)[0, 0]) ** 2 for _ in range(n)])
    # |U_11|^2 ~ Beta(1, dim - 1)
    sd = np.sqrt((dim - 1) / (dim**2 * (dim + 1)))
    assert abs(vals.mean() - 1 / dim) <= 3 * sd / np.sqrt(n)


def test_householder_is_unitary_and_hermitian():
    R = householder_reflector(20, stream(0, 2))
    assert np.abs(R.conj().T @ R - np.eye(20)).max() <= 1e-12
    assert np.abs(R - R.conj().T).max() <= 1e-15


def test_identity_scalings_exact():
    sc = sample_scalings(identity_ensemble(2, 10, 20), 0)
    assert np.array_equal(sc.A(0), np.eye(10))
    assert np.array_equal(sc.B(1), np.eye(20))


def test_shared_basis_commutes():
    ens = exponential_ensemble(0.5, 2, p=60)
    sc = sample_scalings(ens, 3)
    A1, A2 = sc.A(0), sc.A(1)
    assert np.abs(A1 @ A2 - A2 @ A1).max() <= 1e-12
    B1, B2 = sc.B(0), sc.B(1)
    assert np.abs(B1 @ B2 - B2 @ B1).max() <= 1e-12


def test_exponential_means():
    p = 500
    sc = sample_scalings(exponential_ensemble(0.5, 3, p=p), 11)
    for r in range(1, 4):
        assert abs(sc.D[r - 1].mean() - r) <= 5 * r / np.sqrt(p)


def test_trace_identity():
    p = 300
    s = sample_covariance(sample_scalings(identity_ensemble(1, p, p), 0), InnovationSpec(seed=2))
    assert abs(s.eigenvalues.mean() - 1) <= 5 / np.sqrt(p)


def test_lambda_min_edge():
    s = sample_covariance(sample_scalings(identity_ensemble(1, 500, 1000), 0), InnovationSpec(seed=4))
    assert abs(s.eigenvalues.min() - (1 - np.sqrt(0.5)) ** 2) <= 0.1


def test_rank_deficiency_and_esd_at_zero():
    s = sample_covariance(sample_scalings(identity_ensemble(1, 500, 200), 0), InnovationSpec(seed=1))
    assert np.sum(s.eigenvalues < 1e-9) == 300
    assert esd(s)(0.0) == 0.6


def test_esd_examples():
    F = esd(SpectralSample(np.array([3.0, 1.0])))
    assert F(2.0) == 0.5 and F(3.0) == 1.0


def test_exponential_ensemble_sizes():
    ens = exponential_ensemble(0.5, 1)
    assert ens.n == 1000
    assert ens.eig_law_A[0] == EigenLaw.exponential(1) and ens.eig_law_B[0] == EigenLaw.exponential(2)
    assert exponential_ensemble(1.1, 3).n == 455
    assert round_half_away(2.5) == 3 and round_half_away(-2.5) == -3


def test_determinism():
    a, _ = simulate_exponential_study(0.5, 2, 100, seed=9)
    b, _ = simulate_exponential_study(0.5, 2, 100, seed=9)
    c, _ = simulate_exponential_study(0.5, 2, 100, seed=10)
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert not np.array_equal(a.eigenvalues, c.eigenvalues)


def test_svd_and_eigh_routes_agree():
    sc = sample_scalings(exponential_ensemble(1.1, 2, p=80), 1)
    a = sample_covariance(sc, InnovationSpec(seed=1), eig="svd").eigenvalues
    b = sample_covariance(sc, InnovationSpec(seed=1), eig="eigh").eigenvalues
    np.testing.assert_allclose(a, b, atol=1e-10 * a.max())


def test_fast_and_direct_paths_agree_in_distribution():
    # two-sample Kolmogorov distance between pooled spectra of the two paths
    from scipy.stats import ks_2samp

    fast, direct = [], []
    for seed in range(6):
        sc = sample_scalings(exponential_ensemble(0.5, 2, p=100), seed)
        fast.append(sample_covariance(sc, InnovationSpec(seed=seed), path="fast").eigenvalues)
        direct.append(sample_covariance(sc, InnovationSpec(seed=100 + seed), path="direct").eigenvalues)
    assert ks_2samp(np.concatenate(fast), np.concatenate(direct)).statistic <= 0.05


def test_real_field_and_truncation():
    laws = (EigenLaw.constant(1.0),)
    ens = ScalingEnsembleSpec(1, 50, 100, laws, laws, "haar", "real")
    s = sample_covariance(sample_scalings(ens, 0), InnovationSpec("real_gaussian", 0, truncate_a=0.24))
    assert s.p == 50 and np.all(s.eigenvalues >= 0)
    with pytest.raises(ValueError):
        InnovationSpec(truncate_a=0.3)


def test_dimension_mismatch():
    sc = sample_scalings(identity_ensemble(1, 10, 20), 0)
    bad = Scalings(sc.D[:, :5], sc.E, sc.P, sc.Q, sc.spec, 0)
    with pytest.raises(DimensionMismatch):
        sample_covariance(bad)


def test_explicit_law_validation():
    with pytest.raises(ValueError):
        ScalingEnsembleSpec(1, 3, 4, (EigenLaw.explicit([1, 2]),), (EigenLaw.constant(1),), "identity")
