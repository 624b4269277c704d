"""Exact special cases used as oracles.

* Proportional-to-identity scalings ``A_r = a_r I``, ``B_r = b_r I`` give a
  Marchenko-Pastur law with scale ``gamma = a . b``.
* Scale-multiple joint laws (``H`` on the ray ``a * lambda``, ``G`` on
  ``b * theta``) reduce to a one-dimensional system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveScale
from .measure import DiscreteMeasureK, ModelSpec, make_measure

__all__ = [
    "MpParams",
    "mp_params",
    "mp_stieltjes",
    "mp_density",
    "mp_cdf",
    "ReducedSystem",
    "scale_multiple_reduce",
    "identity_model",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MpParams:
    gamma: float
    c: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and self.c > 0):
            raise NonpositiveScale("gamma and c must be > 0")

    @property
    def edges(self) -> tuple[float, float]:
        rc = np.sqrt(self.c)
        return self.gamma * (1 - rc) ** 2, self.gamma * (1 + rc) ** 2

    @property
    def point_mass_zero(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.c)


def mp_params(alpha, beta, c: float) -> MpParams:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if alpha.shape != beta.shape:
        raise ValueError("alpha and beta need the same length")
    if np.any(alpha <= 0) or np.any(beta <= 0) or not c > 0:
        raise NonpositiveScale("scales and c must be > 0")
    return MpParams(float(np.dot(alpha, beta)), float(c))


def identity_model(alpha, beta, c: float) -> ModelSpec:
    """Model whose scaling matrices are multiples of the identity."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return ModelSpec(float(c), make_measure([alpha]), make_measure([beta]))


def mp_stieltjes(z, params: MpParams):
    """Stieltjes transform of the Marchenko-Pastur law with scale ``gamma``.

    The square root is taken as ``sqrt(z - z_+) * sqrt(z - z_-)`` with
    principal branches, which is analytic off the support and behaves like
    ``z`` at infinity.  Both roots of the underlying quadratic are formed
    without cancellation and the one with ``Im s > 0`` is returned.
    """
    z = np.asarray(z, dtype=complex)
    g, c = params.gamma, params.c
    lo, hi = params.edges
    root = np.sqrt(z - hi) * np.sqrt(z - lo)
    b = g * (1 - c) - z
    # stable quadratic roots: the small root comes from the product 1/(c g z)
    big = np.where(np.abs(b + root) >= np.abs(b - root), b + root, b - root) / (2 * c * z * g)
    small = 1.0 / (c * g * z * big)
    s = np.where(big.imag > 0, big, small)
    return s[()] if s.ndim == 0 else s


def mp_density(x, params: MpParams):
    """Density of the continuous part; zero off ``[z_-, z_+]``.

    At ``c = 1`` the density has an integrable ``1/sqrt(x)`` singularity at 0.
    """
    x = np.asarray(x, dtype=float)
    g, c = params.gamma, params.c
    lo, hi = params.edges
    if c == 1 and np.any((x > 0) & (x < 1e-2 * g)):
        log.info("mp_density evaluated near the 1/sqrt(x) singularity at 0 (c = 1)")
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = (x > lo) & (x < hi)
        val = np.sqrt(np.clip((hi - x) * (x - lo), 0, None)) / (2 * np.pi * c * g * x)
    out = np.where(inside, val, 0.0)
    return out[()] if out.ndim == 0 else out


def mp_cdf(x, params: MpParams):
    """Distribution function, including the atom ``max(0, 1 - 1/c)`` at 0."""
    from scipy.integrate import quad

    lo, hi = params.edges
    m0 = params.point_mass_zero

    def one(t: float) -> float:
        if t < 0:
            return 0.0
        if t <= lo:
            return m0
        if t >= hi:
            return 1.0
        pts = [p for p in (lo, t) if p > 0]
        val, _ = quad(lambda u: float(mp_density(u, params)), max(lo, 0.0), t,
                      limit=200, points=pts[:1] if lo > 0 else None)
        return m0 + val

    x = np.asarray(x, dtype=float)
    out = np.vectorize(one, otypes=[float])(x)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ReducedSystem:
    """One-dimensional system equivalent to a scale-multiple model.

    ``reduced`` is a K=1 model ``(c, H1, gamma * G1)``; if ``(h1, g1)`` solves
    it, then ``h_r = a_r h1`` and ``g_r = b_r g1 / gamma`` solve the full
    K-dimensional system of :meth:`full_spec`.
    """

    a: np.ndarray
    b: np.ndarray
    gamma: float
    H1: DiscreteMeasureK
    G1: DiscreteMeasureK
    c: float

    @property
    def reduced(self) -> ModelSpec:
        G_scaled = DiscreteMeasureK(self.G1.atoms * self.gamma, self.G1.weights)
        return ModelSpec(self.c, self.H1, G_scaled)

    def full_spec(self) -> ModelSpec:
        H = DiscreteMeasureK(self.H1.atoms[:, :1] * self.a[None, :], self.H1.weights)
        G = DiscreteMeasureK(self.G1.atoms[:, :1] * self.b[None, :], self.G1.weights)
        return ModelSpec(self.c, H, G)

    def lift(self, h1, g1) -> tuple[np.ndarray, np.ndarray]:
        h1 = np.asarray(h1, dtype=complex).reshape(-1, 1)
        g1 = np.asarray(g1, dtype=complex).reshape(-1, 1)
        h = h1 * self.a[None, :]
        g = g1 * self.b[None, :] / self.gamma
        return h.squeeze(0) if h.shape[0] == 1 else h, g.squeeze(0) if g.shape[0] == 1 else g


def scale_multiple_reduce(a, b, H1: DiscreteMeasureK, G1: DiscreteMeasureK, c: float) -> ReducedSystem:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError("a and b need the same length")
    if np.any(a <= 0) or np.any(b <= 0):
        raise NonpositiveScale("scale vectors must be positive")
    if H1.dim != 1 or G1.dim != 1:
        raise ValueError("H1 and G1 must be one-dimensional")
    return ReducedSystem(a, b, float(a @ b), H1, G1, float(c))
