"""The vector kernel ``O(z, p, mu)`` and the self-maps ``P_z``, ``Q_z``.

For a measure ``mu`` on R_+^K,

    O(z, p, mu)_r = sum_j w_j * l_j[r] / (-z * (1 + l_j . p))

The fixed-point maps of the limiting system are compositions of this kernel:

    P_z(h) = O(z, O(z, c h, G), H)
    Q_z(g) = O(z, c O(z, g, H), G)

All functions accept either a single point (``z`` scalar, ``p`` of shape
``(K,)``) or a batch (``z`` of shape ``(N,)``, ``p`` of shape ``(N, K)``).
Sums over atoms run along a contiguous last axis with ``np.sum`` so that each
batch row is computed independently of the batch size.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotInUpperHalfPlane, SingularDenominator
from .measure import DiscreteMeasureK, ModelSpec

__all__ = [
    "as_upper_point",
    "as_upper_vector",
    "kernel_O",
    "kernel_O_with_jacobian",
    "map_P",
    "map_Q",
]


def as_upper_point(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if not np.all(z.imag > 0):
        raise NotInUpperHalfPlane("z must satisfy Im z > 0")
    return z


def as_upper_vector(v, K: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if K is not None and v.shape[-1] != K:
        raise DimensionMismatch(f"expected {K} components, got {v.shape[-1]}")
    if not np.all(v.imag > 0):
        raise NotInUpperHalfPlane("every component must have positive imaginary part")
    return v


def _denominators(z: np.ndarray, p: np.ndarray, mu: DiscreteMeasureK) -> np.ndarray:
    """``-z (1 + l_j . p)`` for every atom, shape (N, m)."""
    atoms = mu.atoms
    lp = np.zeros((p.shape[0], atoms.shape[0]), dtype=complex)
    for k in range(atoms.shape[1]):
        lp += p[:, k, None] * atoms[None, :, k]
    den = -z[:, None] * (1.0 + lp)
    if np.any(den == 0):
        raise SingularDenominator("1 + l.p vanishes at some atom")
    return den


def _batch(z, p, K: int):
    z = np.asarray(z, dtype=complex)
    p = np.asarray(p, dtype=complex)
    scalar = z.ndim == 0
    zb = np.atleast_1d(z)
    pb = np.broadcast_to(p, (zb.shape[0], p.shape[-1])) if p.ndim == 1 else p
    if pb.shape != (zb.shape[0], K):
        raise DimensionMismatch(f"p has shape {p.shape}, expected (..., {K})")
    return scalar, zb, pb


def kernel_O(z, p, mu: DiscreteMeasureK) -> np.ndarray:
    """Evaluate ``O(z, p, mu)``.

    ``p`` may have nonnegative (not only positive) imaginary parts, so the
    probe ``p = 0`` is allowed.
    """
    scalar, zb, pb = _batch(z, p, mu.dim)
    inv = mu.weights[None, :] / _denominators(zb, pb, mu)
    out = np.empty((zb.shape[0], mu.dim), dtype=complex)
    for r in range(mu.dim):
        out[:, r] = np.sum(inv * mu.atoms[None, :, r], axis=-1)
    return out[0] if scalar else out


def kernel_O_with_jacobian(z, p, mu: DiscreteMeasureK) -> tuple[np.ndarray, np.ndarray]:
    """``O`` together with its holomorphic derivative ``dO_r/dp_s``.

    Returns arrays of shape (N, K) and (N, K, K).
    """
    _, zb, pb = _batch(z, p, mu.dim)
    den = _denominators(zb, pb, mu)
    inv = mu.weights[None, :] / den
    # d/dp_s [w l_r / (-z(1 + l.p))] = w l_r l_s / (z (1 + l.p)^2)
    dinv = inv / den * zb[:, None]
    K = mu.dim
    out = np.empty((zb.shape[0], K), dtype=complex)
    jac = np.empty((zb.shape[0], K, K), dtype=complex)
    for r in range(K):
        lr = mu.atoms[None, :, r]
        out[:, r] = np.sum(inv * lr, axis=-1)
        for s in range(r, K):
            jac[:, r, s] = np.sum(dinv * (lr * mu.atoms[None, :, s]), axis=-1)
            jac[:, s, r] = jac[:, r, s]
    return out, jac


def map_P(h, z, spec: ModelSpec) -> np.ndarray:
    """``P_z(h) = O(z, O(z, c h, G), H)``."""
    z = as_upper_point(z)
    h = as_upper_vector(h, spec.K)
    g = kernel_O(z, spec.c * h, spec.G)
    return kernel_O(z, g, spec.H)


def map_Q(g, z, spec: ModelSpec) -> np.ndarray:
    """``Q_z(g) = O(z, c O(z, g, H), G)``."""
    z = as_upper_point(z)
    g = as_upper_vector(g, spec.K)
    h = kernel_O(z, g, spec.H)
    return kernel_O(z, spec.c * h, spec.G)
