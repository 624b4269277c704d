"""Stieltjes transform of the limiting law, its inversion, atoms and CDFs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateMeasure, UnconvergedSolution
from .kernel import _denominators, as_upper_point, kernel_O
from .measure import ModelSpec, mass_at_origin
from .solver import BatchSolution, FixedPointSolution, SolverConfig, solve_vertical

__all__ = [
    "DEFAULT_EPS",
    "DensityGrid",
    "CdfTable",
    "stieltjes_primary",
    "stieltjes_alt1",
    "stieltjes_alt2",
    "stieltjes_batch",
    "dual_stieltjes",
    "primal_from_dual",
    "point_mass_zero",
    "grid_range",
    "default_grid",
    "invert_density",
    "cdf_from_density",
]

log = logging.getLogger(__name__)

DEFAULT_EPS = (1e-2, 3e-3, 1e-3, 3e-4)


def _sum_inverse(z: np.ndarray, p: np.ndarray, mu) -> np.ndarray:
    """``sum_j w_j / (-z (1 + l_j . p))`` for every row."""
    return np.sum(mu.weights[None, :] / _denominators(z, p, mu), axis=-1)


def _rows(sol):
    if isinstance(sol, FixedPointSolution):
        if not sol.converged:
            raise UnconvergedSolution(f"solution at z={sol.z} did not converge")
        return np.array([sol.z]), sol.h[None, :], sol.g[None, :], True
    return sol.z, sol.h, sol.g, False


def stieltjes_primary(spec: ModelSpec, sol):
    """``s(z) = sum_H w / (-z (1 + l . O(z, c h, G)))``."""
    z, h, _, single = _rows(sol)
    s = _sum_inverse(z, kernel_O(z, spec.c * h, spec.G), spec.H)
    return complex(s[0]) if single else s


def stieltjes_alt1(sol):
    """``s(z) = -1/z - h . g``."""
    z, h, g, single = _rows(sol)
    s = -1.0 / z - np.sum(h * g, axis=1)
    return complex(s[0]) if single else s


def stieltjes_alt2(spec: ModelSpec, sol):
    """``s(z) = (1/c) sum_G w / (-z (1 + c t . O(z, g, H))) + (1/c - 1)/z``."""
    z, _, g, single = _rows(sol)
    c = spec.c
    s = _sum_inverse(z, c * kernel_O(z, g, spec.H), spec.G) / c + (1.0 / c - 1.0) / z
    return complex(s[0]) if single else s


def stieltjes_batch(spec: ModelSpec, sol: BatchSolution) -> dict[str, np.ndarray]:
    """All three characterizations on a batch; rows are not filtered."""
    return {
        "primary": stieltjes_primary(spec, sol),
        "alt1": stieltjes_alt1(sol),
        "alt2": stieltjes_alt2(spec, sol),
    }


def dual_stieltjes(spec: ModelSpec, s, z):
    """Transform of the LSD of ``X* X / n`` from that of ``X X* / n``.

    Solves ``s = (1 - 1/c)(-1/z) + s_dual / c`` for ``s_dual``.
    """
    z = as_upper_point(z)
    return spec.c * np.asarray(s) + (spec.c - 1.0) / z


def primal_from_dual(spec: ModelSpec, s_dual, z):
    z = as_upper_point(z)
    return (np.asarray(s_dual) - (spec.c - 1.0) / z) / spec.c


def point_mass_zero(spec: ModelSpec) -> float:
    """Atom of the limiting law at 0: ``max(1 - alpha, 1 - beta/c)``.

    ``1 - alpha`` and ``1 - beta`` are the masses that H and G put on the
    origin.
    """
    alpha = 1.0 - mass_at_origin(spec.H)
    beta = 1.0 - mass_at_origin(spec.G)
    if alpha <= 0 or beta <= 0:
        raise DegenerateMeasure("H or G is concentrated at the origin")
    if alpha == 1.0 and beta == 1.0:
        return max(0.0, 1.0 - 1.0 / spec.c)
    return max(1.0 - alpha, 1.0 - beta / spec.c)


def grid_range(spec: ModelSpec, rel_lo: float = 1e-4) -> tuple[float, float]:
    """``(lo, hi)`` covering the support.

    ``hi = 1.2 * 2K * tau_H * tau_G * (1 + sqrt(c))^2`` bounds the largest
    eigenvalue; ``lo`` is ``rel_lo`` times the mean of the law.
    """
    tau_h, tau_g = spec.H.max_coordinate(), spec.G.max_coordinate()
    hi = 1.2 * 2 * spec.K * tau_h * tau_g * (1 + np.sqrt(spec.c)) ** 2
    return rel_lo * spec.first_moment(), hi


def default_grid(spec: ModelSpec, n: int = 2000, rel_lo: float = 1e-4) -> np.ndarray:
    lo, hi = grid_range(spec, rel_lo)
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class DensityGrid:
    xs: np.ndarray
    densities: np.ndarray
    point_mass_zero: float
    epsilons: tuple[float, ...]
    total_mass: float
    clipped: np.ndarray = field(repr=False)
    converged: np.ndarray = field(repr=False)

    @property
    def clipped_fraction(self) -> float:
        return float(np.mean(self.clipped))

    @property
    def nonconverged_fraction(self) -> float:
        return float(np.mean(~self.converged))


@dataclass(frozen=True)
class CdfTable:
    """Distribution function on a table of abscissae.

    ``kind="step"``: right-continuous, ``F(x) = F[i]`` on ``[xs[i], xs[i+1])``.
    ``kind="linear"``: linear interpolation between nodes.  Both are 0 left of
    ``xs[0]`` and ``F[-1]`` right of ``xs[-1]``.
    """

    xs: np.ndarray
    F: np.ndarray
    kind: str = "linear"
    point_mass_zero: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("step", "linear"):
            raise ValueError(f"unknown kind {self.kind!r}")
        xs = np.asarray(self.xs, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if xs.shape != F.shape or xs.ndim != 1 or xs.size == 0:
            raise ValueError("xs and F must be matching nonempty 1-D arrays")
        if np.any(np.diff(xs) < 0):
            raise ValueError("xs must be ascending")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "F", F)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "step":
            i = np.searchsorted(self.xs, x, side="right") - 1
            out = np.where(i >= 0, self.F[np.clip(i, 0, None)], 0.0)
        else:
            out = np.where(x < self.xs[0], 0.0, np.interp(x, self.xs, self.F))
        return out[()] if out.ndim == 0 else out

    def left_limit(self, x):
        """``F(x-)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "step":
            i = np.searchsorted(self.xs, x, side="left") - 1
            out = np.where(i >= 0, self.F[np.clip(i, 0, None)], 0.0)
        else:
            out = np.where(x <= self.xs[0], 0.0, np.interp(x, self.xs, self.F))
        return out[()] if out.ndim == 0 else out


def invert_density(spec: ModelSpec, xs, config: SolverConfig = SolverConfig(),
                   eps_schedule: Sequence[float] = DEFAULT_EPS, scale: float | None = None,
                   ) -> DensityGrid:
    """Recover the density of the limiting law on ``xs`` by Stieltjes inversion.

    ``Im s(x + i eps) / pi`` is computed for every ``eps`` in
    ``scale * eps_schedule`` (``scale`` defaults to the mean of the law) and
    extrapolated linearly to ``eps = 0`` from the two smallest offsets.  The
    known atom at 0 is removed from ``s`` beforehand so that its Cauchy tail
    does not leak into the density near the origin.  Negative extrapolations
    are clipped to 0 and flagged.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs must be a nonempty 1-D array")
    if np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly ascending and positive")
    eps = sorted((float(e) for e in eps_schedule), reverse=True)
    if len(eps) < 2:
        raise ValueError("need at least two offsets to extrapolate")
    if scale is None:
        scale = spec.first_moment()
    levels = [e * scale for e in eps]
    m0 = point_mass_zero(spec)

    sols = solve_vertical(spec, xs, levels, config)
    converged = sols[-1].converged & sols[-2].converged
    im = []
    for sol in sols[-2:]:
        s = stieltjes_primary(spec, sol) + m0 / sol.z
        im.append(s.imag / np.pi)
    e1, e2 = levels[-2], levels[-1]
    f1, f2 = im
    dens = f2 - e2 * (f1 - f2) / (e1 - e2)
    clipped = dens < 0
    if np.any(clipped):
        log.warning("clipped %d negative density values (min %.3g)", int(clipped.sum()), dens.min())
    dens = np.where(clipped, 0.0, dens)
    if np.any(~converged):
        log.warning("%d of %d density points did not converge", int((~converged).sum()), xs.size)
    total = m0 + float(np.trapezoid(dens, xs))
    return DensityGrid(xs, dens, m0, tuple(levels), total, clipped, converged)


def cdf_from_density(grid: DensityGrid) -> CdfTable:
    """Cumulative trapezoid integral of the density, offset by the atom at 0."""
    xs, f = grid.xs, grid.densities
    inc = 0.5 * (f[1:] + f[:-1]) * np.diff(xs)
    F = grid.point_mass_zero + np.concatenate([[0.0], np.cumsum(inc)])
    # monotone by construction; densities are clipped at 0
    return CdfTable(np.concatenate([[0.0], xs]), np.concatenate([[grid.point_mass_zero], F]),
                    "linear", grid.point_mass_zero)
