"""Discrete spectral measures on the nonnegative orthant R_+^K.

A :class:`DiscreteMeasureK` is a finite list of weighted atoms.  It is used for
both the limiting joint spectral laws ``H`` (row side) and ``G`` (column side)
and for their finite-sample joint empirical versions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMeasure,
    IndexOutOfRange,
    NegativeCoordinate,
    NonpositiveTau,
    NonpositiveWeight,
)

__all__ = [
    "DiscreteMeasureK",
    "ModelSpec",
    "ValidationReport",
    "make_measure",
    "jesd_from_eigenvalue_tuples",
    "truncate",
    "moment",
    "mass_at_origin",
    "validate_model",
    "measure_from_dict",
    "measure_to_dict",
]

_WEIGHT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteMeasureK:
    """Probability measure with finitely many atoms in R_+^K.

    Attributes
    ----------
    atoms : ndarray, shape (m, K)
        Atom locations, every coordinate nonnegative.
    weights : ndarray, shape (m,)
        Positive weights summing to one.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 2 or atoms.shape[0] == 0 or atoms.shape[1] == 0:
            raise EmptyMeasure("measure needs at least one atom with K >= 1 coordinates")
        if weights.shape != (atoms.shape[0],):
            raise DimensionMismatch("one weight per atom is required")
        if not np.all(np.isfinite(atoms)) or np.any(atoms < 0):
            raise NegativeCoordinate("atom coordinates must be finite and >= 0")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise NonpositiveWeight("weights must be finite and > 0")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise NonpositiveWeight(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "atoms", _frozen(atoms))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    def means(self) -> np.ndarray:
        """First moment of every coordinate, shape (K,)."""
        return np.sum(self.weights[:, None] * self.atoms, axis=0)

    def max_coordinate(self) -> float:
        return float(self.atoms.max())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteMeasureK):
            return NotImplemented
        return (
            self.atoms.shape == other.atoms.shape
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self) -> int:
        return hash((self.atoms.tobytes(), self.weights.tobytes()))

    def __repr__(self) -> str:
        return f"DiscreteMeasureK(dim={self.dim}, size={self.size})"


def _merge(atoms: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exact coordinate equality, first-appearance order
    index: dict[bytes, int] = {}
    keep: list[int] = []
    merged: list[float] = []
    for j in range(atoms.shape[0]):
        key = atoms[j].tobytes()
        if key in index:
            merged[index[key]] += weights[j]
        else:
            index[key] = len(keep)
            keep.append(j)
            merged.append(float(weights[j]))
    return atoms[keep], np.asarray(merged)


def make_measure(atoms: Iterable[Sequence[float]] | np.ndarray,
                 weights: Iterable[float] | np.ndarray | None = None) -> DiscreteMeasureK:
    """Build a measure from raw atoms and (unnormalized) weights.

    Weights default to uniform.  Duplicate atoms are merged and the weights
    renormalized to sum to one.
    """
    a = np.asarray(atoms, dtype=float)
    if a.size == 0:
        raise EmptyMeasure("no atoms given")
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DimensionMismatch("atoms must be a list of K-vectors")
    w = np.ones(a.shape[0]) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise EmptyMeasure("no weights given")
    if w.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"{a.shape[0]} atoms but {w.shape[0]} weights")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise NegativeCoordinate("atom coordinates must be finite and >= 0")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise NonpositiveWeight("weights must be finite and > 0")
    a, w = _merge(a, w)
    return DiscreteMeasureK(a, w / w.sum())


def jesd_from_eigenvalue_tuples(tuples: Iterable[Sequence[float]] | np.ndarray) -> DiscreteMeasureK:
    """Joint empirical spectral distribution of K commuting matrices.

    ``tuples[j]`` holds the K eigenvalues sharing the j-th common eigenvector.
    Each of the ``len(tuples)`` tuples gets mass ``1/len(tuples)``; repeated
    tuples are merged.  The same rule is used on the column side, where the
    count is ``n`` rather than ``p``.
    """
    t = np.asarray(tuples, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if t.size == 0:
        raise EmptyMeasure("no eigenvalue tuples")
    return make_measure(t, np.full(t.shape[0], 1.0 / t.shape[0]))


def truncate(mu: DiscreteMeasureK, tau: float) -> DiscreteMeasureK:
    """Clamp every atom coordinate at ``tau``; weights are left untouched."""
    if not tau > 0:
        raise NonpositiveTau(f"tau must be > 0, got {tau!r}")
    # no merging here: total weight and atom order must be preserved exactly
    return DiscreteMeasureK(np.minimum(mu.atoms, tau), mu.weights)


def moment(mu: DiscreteMeasureK, r: int, order: int) -> float:
    """Weighted sum of ``atom[r] ** order``; ``r`` is 1-based."""
    if not 1 <= r <= mu.dim:
        raise IndexOutOfRange(f"coordinate {r} not in [1, {mu.dim}]")
    if order < 1:
        raise IndexOutOfRange("order must be a positive integer")
    return float(np.sum(mu.weights * mu.atoms[:, r - 1] ** order))


def mass_at_origin(mu: DiscreteMeasureK) -> float:
    at_zero = np.all(mu.atoms == 0.0, axis=1)
    return float(mu.weights[at_zero].sum())


@dataclass(frozen=True)
class ModelSpec:
    """Analytic problem instance: aspect ratio ``c`` and joint laws ``H``, ``G``."""

    c: float
    H: DiscreteMeasureK
    G: DiscreteMeasureK

    @property
    def K(self) -> int:
        return self.H.dim

    def c0(self) -> float:
        """Largest marginal first moment over both measures."""
        return float(max(self.H.means().max(), self.G.means().max()))

    def first_moment(self) -> float:
        """Mean of the limiting spectral law, ``sum_r E_H[l_r] E_G[t_r]``."""
        return float(np.sum(self.H.means() * self.G.means()))

    def digest(self) -> str:
        payload = json.dumps(
            {"c": float(self.c), "H": measure_to_dict(self.H), "G": measure_to_dict(self.G)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def validate_model(spec: ModelSpec) -> ValidationReport:
    """Check aspect ratio, dimensions, non-degeneracy and axis support.

    Axis support is checked as strict positivity of every marginal mean under
    both H and G.
    """
    failures: list[str] = []
    if not (np.isfinite(spec.c) and spec.c > 0):
        failures.append(f"c must be > 0, got {spec.c!r}")
    if spec.H.dim != spec.G.dim:
        failures.append(f"H.dim={spec.H.dim} differs from G.dim={spec.G.dim}")
    for name, mu in (("H", spec.H), ("G", spec.G)):
        if not np.any(mu.atoms > 0):
            failures.append(f"{name} is δ_0")
            continue
        for r, m in enumerate(mu.means(), start=1):
            if not m > 0:
                failures.append(f"{name} has zero mean in coordinate {r}")
    return ValidationReport(not failures, tuple(failures))


def measure_to_dict(mu: DiscreteMeasureK) -> dict:
    return {"dim": mu.dim, "atoms": mu.atoms.tolist(), "weights": mu.weights.tolist()}


def measure_from_dict(d: dict) -> DiscreteMeasureK:
    """Parse ``{"dim": K, "atoms": [[...], ...], "weights": [...]}``."""
    if "atoms" not in d:
        raise EmptyMeasure("measure literal has no 'atoms'")
    atoms = np.asarray(d["atoms"], dtype=float)
    if atoms.ndim == 1:
        atoms = atoms[:, None]
    if "dim" in d and atoms.size and atoms.shape[1] != int(d["dim"]):
        raise DimensionMismatch(f"declared dim {d['dim']} but atoms have {atoms.shape[1]} coordinates")
    return make_measure(atoms, d.get("weights"))
