"""Finite-n realizations of ``S = (1/n) X X*`` with ``X = sum_r A_r^{1/2} Z_r B_r^{1/2}``.

Scaling matrices are generated factored: one shared eigenbasis ``P`` for all
``A_r`` and one ``Q`` for all ``B_r``, so the commutativity assumption holds
by construction.  Random streams are keyed by ``(seed, role, component)``
(Philox, counter based), so any block is reproducible on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EigensolveFailure
from .lsd import CdfTable
from .measure import ModelSpec, jesd_from_eigenvalue_tuples

__all__ = [
    "EigenLaw",
    "ScalingEnsembleSpec",
    "InnovationSpec",
    "Scalings",
    "SpectralSample",
    "stream",
    "haar_unitary",
    "householder_reflector",
    "sample_scalings",
    "sample_innovations",
    "sample_covariance",
    "esd",
    "round_half_away",
    "exponential_ensemble",
    "simulate_exponential_study",
]

# stream roles
ROLE_A, ROLE_B, ROLE_P, ROLE_Q, ROLE_Z = range(5)


def stream(seed: int, role: int, r: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, role, component) key."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), role, r])))


@dataclass(frozen=True)
class EigenLaw:
    """Generator for the diagonal of one scaling matrix."""

    kind: str
    value: float | tuple[float, ...] = 1.0

    @classmethod
    def constant(cls, v: float) -> "EigenLaw":
        return cls("constant", float(v))

    @classmethod
    def exponential(cls, scale: float) -> "EigenLaw":
        return cls("exponential", float(scale))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "EigenLaw":
        return cls("explicit", tuple(float(v) for v in values))

    def validate(self, size: int) -> None:
        if self.kind == "constant":
            if self.value < 0:
                raise ValueError("constant eigenvalue must be >= 0")
        elif self.kind == "exponential":
            if not self.value > 0:
                raise ValueError("exponential scale must be > 0")
        elif self.kind == "explicit":
            if len(self.value) != size:
                raise DimensionMismatch(f"explicit list has {len(self.value)} values, expected {size}")
            if min(self.value) < 0:
                raise ValueError("explicit eigenvalues must be >= 0")
        else:
            raise ValueError(f"unknown eigenvalue law {self.kind!r}")

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.value)
        if self.kind == "exponential":
            return rng.exponential(self.value, size)
        return np.asarray(self.value, dtype=float)


@dataclass(frozen=True)
class ScalingEnsembleSpec:
    K: int
    p: int
    n: int
    eig_law_A: tuple[EigenLaw, ...]
    eig_law_B: tuple[EigenLaw, ...]
    basis_mode: str = "haar"
    field: str = "complex"

    def __post_init__(self) -> None:
        if self.p < 2 or self.n < 2:
            raise ValueError("p and n must be >= 2")
        if len(self.eig_law_A) != self.K or len(self.eig_law_B) != self.K:
            raise DimensionMismatch("need one eigenvalue law per component on each side")
        for law in self.eig_law_A:
            law.validate(self.p)
        for law in self.eig_law_B:
            law.validate(self.n)
        if self.basis_mode not in ("identity", "haar", "householder"):
            raise ValueError(f"unknown basis_mode {self.basis_mode!r}")
        if self.field not in ("complex", "real"):
            raise ValueError(f"unknown field {self.field!r}")


@dataclass(frozen=True)
class InnovationSpec:
    """Entry law of the innovation matrices.

    With ``truncate_a`` set, entries of modulus above ``n ** truncate_a`` are
    replaced by 0; ``truncate_a`` must lie in ``(1/(4 + eta0), 1/4)``.
    """

    entry_law: str = "complex_gaussian"
    seed: int = 0
    truncate_a: float | None = None
    eta0: float = 1.0

    def __post_init__(self) -> None:
        if self.entry_law not in ("complex_gaussian", "real_gaussian"):
            raise ValueError(f"unknown entry law {self.entry_law!r}")
        if self.truncate_a is not None and not 1 / (4 + self.eta0) < self.truncate_a < 0.25:
            raise ValueError("truncate_a must lie in (1/(4+eta0), 1/4)")


def haar_unitary(dim: int, rng: np.random.Generator, field: str = "complex") -> np.ndarray:
    """Haar-distributed unitary (or orthogonal) matrix.

    QR of a Ginibre matrix with the phases of ``diag(R)`` moved into ``Q``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if field == "complex":
        G = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    else:
        G = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))[None, :]


def householder_reflector(dim: int, rng: np.random.Generator, field: str = "complex") -> np.ndarray:
    """Single reflector ``I - 2 v v* / (v* v)`` with a Gaussian ``v``."""
    v = rng.standard_normal(dim) + (1j * rng.standard_normal(dim) if field == "complex" else 0)
    return np.eye(dim) - 2.0 * np.outer(v, v.conj()) / np.vdot(v, v).real


@dataclass(frozen=True)
class Scalings:
    """Factored scaling matrices ``A_r = P diag(D[r]) P*`` and ``B_r = Q diag(E[r]) Q*``.

    ``P``/``Q`` are ``None`` for the identity basis.
    """

    D: np.ndarray
    E: np.ndarray
    P: np.ndarray | None
    Q: np.ndarray | None
    spec: ScalingEnsembleSpec
    seed: int

    @staticmethod
    def _build(basis, diag):
        if basis is None:
            return np.diag(diag).astype(complex)
        return (basis * diag[None, :]) @ basis.conj().T

    def A(self, r: int, power: float = 1.0) -> np.ndarray:
        """Materialize ``A_r ** power`` (r is 0-based)."""
        return self._build(self.P, self.D[r] ** power)

    def B(self, r: int, power: float = 1.0) -> np.ndarray:
        return self._build(self.Q, self.E[r] ** power)

    def row_jesd(self):
        return jesd_from_eigenvalue_tuples(self.D.T)

    def col_jesd(self):
        return jesd_from_eigenvalue_tuples(self.E.T)


def _basis(mode: str, dim: int, rng: np.random.Generator, field: str):
    if mode == "identity":
        return None
    if mode == "haar":
        return haar_unitary(dim, rng, field)
    return householder_reflector(dim, rng, field)


def sample_scalings(spec: ScalingEnsembleSpec, seed: int = 0) -> Scalings:
    D = np.array([law.draw(spec.p, stream(seed, ROLE_A, r)) for r, law in enumerate(spec.eig_law_A)])
    E = np.array([law.draw(spec.n, stream(seed, ROLE_B, r)) for r, law in enumerate(spec.eig_law_B)])
    P = _basis(spec.basis_mode, spec.p, stream(seed, ROLE_P), spec.field)
    Q = _basis(spec.basis_mode, spec.n, stream(seed, ROLE_Q), spec.field)
    return Scalings(D, E, P, Q, spec, int(seed))


def sample_innovations(innov: InnovationSpec, p: int, n: int, r: int) -> np.ndarray:
    """Innovation matrix ``Z_r`` with zero-mean, unit-variance entries."""
    rng = stream(innov.seed, ROLE_Z, r)
    if innov.entry_law == "complex_gaussian":
        Z = (rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))) / np.sqrt(2)
    else:
        Z = rng.standard_normal((p, n)).astype(complex)
    if innov.truncate_a is not None:
        Z[np.abs(Z) > n ** innov.truncate_a] = 0
    return Z


@dataclass(frozen=True)
class SpectralSample:
    eigenvalues: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.eigenvalues.shape[0]


def _eigenvalues(X: np.ndarray, n: int, method: str) -> np.ndarray:
    p = X.shape[0]
    try:
        if method == "svd":
            sv = np.linalg.svd(X, compute_uv=False)
            lam = np.zeros(p)
            lam[: sv.size] = sv**2 / n
        else:
            S = X @ X.conj().T / n
            defect = np.abs(S - S.conj().T).max()
            if defect > 1e-12 * max(1.0, np.abs(S).max()):
                raise EigensolveFailure(f"assembled S is not Hermitian (defect {defect:.3g})")
            lam = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    if lam.min(initial=0.0) < -1e-10 * max(1.0, lam.max()):
        raise EigensolveFailure(f"negative eigenvalue {lam.min():.3g}")
    return np.sort(np.clip(lam, 0.0, None))


def sample_covariance(scalings: Scalings, innovations: InnovationSpec = InnovationSpec(),
                      path: str = "auto", eig: str = "svd") -> SpectralSample:
    """Eigenvalues of one realization of ``S``.

    ``path="direct"`` materializes ``A_r^{1/2}`` and ``B_r^{1/2}``.
    ``path="fast"`` uses ``P* Z Q ~ Z`` for Gaussian innovations and works on
    the diagonals only; it agrees with the direct path in distribution, not
    draw by draw.  ``"auto"`` picks the fast path when that identity holds
    (complex Gaussian entries without truncation, or real entries with a real
    basis).  ``eig="svd"`` squares the singular values of ``X / sqrt(n)``,
    which returns exact zeros when ``p > n``; ``eig="eigh"`` diagonalizes
    the assembled Hermitian ``S``.
    """
    spec = scalings.spec
    p, n, K = spec.p, spec.n, spec.K
    if scalings.D.shape != (K, p) or scalings.E.shape != (K, n):
        raise DimensionMismatch("scalings do not match their ensemble spec")
    if path == "auto":
        rotation_ok = innovations.truncate_a is None and (
            innovations.entry_law == "complex_gaussian" or spec.field == "real"
        )
        path = "fast" if rotation_ok or spec.basis_mode == "identity" else "direct"
    if path not in ("fast", "direct"):
        raise ValueError(f"unknown path {path!r}")
    if eig not in ("svd", "eigh"):
        raise ValueError(f"unknown eigensolver {eig!r}")

    X = np.zeros((p, n), dtype=complex)
    for r in range(K):
        Z = sample_innovations(innovations, p, n, r)
        if path == "fast" or spec.basis_mode == "identity":
            X += np.sqrt(scalings.D[r])[:, None] * Z * np.sqrt(scalings.E[r])[None, :]
        else:
            X += scalings.A(r, 0.5) @ Z @ scalings.B(r, 0.5)
    lam = _eigenvalues(X, n, eig)
    meta = {
        "seed": scalings.seed,
        "innovation_seed": innovations.seed,
        "p": p,
        "n": n,
        "c_n": p / n,
        "K": K,
        "path": path,
        "eig": eig,
        "basis_mode": spec.basis_mode,
    }
    return SpectralSample(lam, meta)


def esd(sample: SpectralSample) -> CdfTable:
    """Right-continuous empirical distribution with jumps ``1/p``."""
    lam = np.sort(sample.eigenvalues)
    xs, counts = np.unique(lam, return_counts=True)
    F = np.cumsum(counts) / lam.size
    F[-1] = 1.0
    mass0 = float(F[0]) if xs[0] == 0 else 0.0
    return CdfTable(xs, F, "step", mass0)


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def exponential_ensemble(c: float, K: int, p: int = 500, basis_mode: str = "haar") -> ScalingEnsembleSpec:
    """Row eigenvalues ~ Exp(scale r), column eigenvalues ~ Exp(scale 2r), n = round(p/c)."""
    if not c > 0 or K < 1:
        raise ValueError("need c > 0 and K >= 1")
    n = round_half_away(p / c)
    return ScalingEnsembleSpec(
        K, p, n,
        tuple(EigenLaw.exponential(r) for r in range(1, K + 1)),
        tuple(EigenLaw.exponential(2 * r) for r in range(1, K + 1)),
        basis_mode,
    )


def simulate_exponential_study(c: float, K: int, p: int = 500, seed: int = 0,
                          basis_mode: str = "haar", path: str = "auto",
                          ) -> tuple[SpectralSample, ModelSpec]:
    """Simulate one draw of the exponential-scalings study.

    Returns the sample and the model built from the realized joint empirical
    spectral distributions (with ``c = p/n``), so that predictions refer to
    the same draw.
    """
    ens = exponential_ensemble(c, K, p, basis_mode)
    sc = sample_scalings(ens, seed)
    sample = sample_covariance(sc, InnovationSpec(seed=seed), path=path)
    model = ModelSpec(ens.p / ens.n, sc.row_jesd(), sc.col_jesd())
    return sample, model
