"""Distances between distribution functions and consistency checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .kernel import as_upper_point
from .lsd import CdfTable, DensityGrid
from .measure import DiscreteMeasureK, ModelSpec
from .solver import SolverConfig, solve_hg

__all__ = [
    "ComparisonReport",
    "ContinuityReport",
    "kolmogorov_distance",
    "levy_bound",
    "mass_check",
    "compare",
    "continuity_probe",
]


def kolmogorov_distance(F: CdfTable, G: CdfTable) -> float:
    """``sup_x |F(x) - G(x)|``.

    Both functions are piecewise linear or constant between the union of
    their nodes, so the supremum is attained at a node, from the right or
    from the left.
    """
    xs = np.union1d(F.xs, G.xs)
    d_right = np.abs(F(xs) - G(xs))
    d_left = np.abs(F.left_limit(xs) - G.left_limit(xs))
    return float(min(1.0, max(d_right.max(), d_left.max())))


def levy_bound(F: CdfTable, G: CdfTable) -> float:
    """Upper bound on the Levy distance: the uniform distance ``||F - G||``."""
    return kolmogorov_distance(F, G)


def mass_check(grid: DensityGrid) -> float:
    """``total_mass - 1``."""
    return grid.total_mass - 1.0


@dataclass(frozen=True)
class ComparisonReport:
    kolmogorov: float
    levy_upper_bound: float
    mass_defect: float
    n_points_compared: int
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def compare(empirical: CdfTable, predicted: CdfTable, grid: DensityGrid | None = None,
            mass_tol: float = 0.01) -> ComparisonReport:
    """Compare an empirical ESD with a predicted distribution function."""
    warnings: list[str] = []
    ks = kolmogorov_distance(empirical, predicted)
    defect = mass_check(grid) if grid is not None else float(predicted.F[-1] - 1.0)
    if abs(defect) > mass_tol:
        warnings.append(f"predicted distribution has mass defect {defect:+.3g}")
    if empirical.xs[-1] > predicted.xs[-1]:
        warnings.append("empirical support extends beyond the predicted table")
    if empirical.xs[0] < predicted.xs[0]:
        warnings.append("empirical support starts below the predicted table")
    if grid is not None and grid.nonconverged_fraction > 0:
        warnings.append(f"{grid.nonconverged_fraction:.2%} of density points did not converge")
    n = np.union1d(empirical.xs, predicted.xs).size
    return ComparisonReport(ks, ks, defect, int(n), warnings)


@dataclass(frozen=True)
class ContinuityReport:
    deltas: tuple[float, ...]
    distances: tuple[float, ...]
    converged: tuple[bool, ...]
    nonincreasing: bool
    strictly_decreasing: bool

    @property
    def passed(self) -> bool:
        return self.nonincreasing


def _shift(mu: DiscreteMeasureK, delta: float) -> DiscreteMeasureK:
    return DiscreteMeasureK(mu.atoms + delta, mu.weights)


def continuity_probe(spec: ModelSpec, delta_schedule: Sequence[float], z: complex = 1 + 1j,
                     config: SolverConfig = SolverConfig()) -> ContinuityReport:
    """Shift every H-atom coordinate by ``+delta`` and measure ``||h - h_delta||_1``.

    Distances are reported along ``delta_schedule`` (expected descending); the
    probe passes when they do not increase along it.
    """
    z = complex(as_upper_point(z))
    base = solve_hg(spec, z, config)
    dists, conv = [], []
    for d in delta_schedule:
        if d == 0:
            dists.append(0.0)
            conv.append(base.converged)
            continue
        sol = solve_hg(ModelSpec(spec.c, _shift(spec.H, float(d)), spec.G), z, config)
        dists.append(float(np.abs(sol.h - base.h).sum()))
        conv.append(bool(sol.converged and base.converged))
    diffs = np.diff(dists)
    return ContinuityReport(
        tuple(float(d) for d in delta_schedule), tuple(dists), tuple(conv),
        bool(np.all(diffs <= 0)), bool(np.all(diffs < 0)),
    )
