"""Fixed-point solver for the coupled system in ``(h, g)``.

At a point ``z`` of the upper half-plane the pair ``(h, g)`` satisfies

    g = O(z, c h, G),    h = O(z, g, H),

i.e. ``h`` is a fixed point of ``P_z`` and ``g`` of ``Q_z``.  The default
scheme is damped Picard on ``h`` with ``g`` recomputed from ``h`` at every
step.  A safeguarded Newton variant is available for large atom counts.

Everything is vectorized over a batch of ``z`` values; each batch row evolves
independently (per-row convergence masks), so results do not depend on how a
grid is chunked.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import InsufficientRestarts, InvalidModel, NotInUpperHalfPlane
from .kernel import as_upper_point, kernel_O, kernel_O_with_jacobian
from .measure import ModelSpec, validate_model

__all__ = [
    "SolverConfig",
    "FixedPointSolution",
    "BatchSolution",
    "UniquenessReport",
    "default_initial",
    "residual",
    "residual_batch",
    "solve_batch",
    "solve_vertical",
    "solve_hg",
    "solve_grid",
    "uniqueness_probe",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    ``method`` is ``"picard"`` (damped fixed-point iteration) or ``"newton"``
    (Newton on ``h - P_z(h)`` falling back to a damped Picard step whenever
    the Newton step leaves the half-plane or fails to reduce the defect).
    ``patience`` stops a row early when its defect has not improved for that
    many iterations; such rows are reported as not converged unless the
    residual target is already met.
    """

    tol: float = 1e-12
    max_iters: int = 50_000
    damping: float = 0.5
    n_restarts: int = 10
    homotopy: bool = True
    method: str = "picard"
    patience: int = 1_000
    homotopy_ratio: float = 0.3
    debug: bool = False

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.n_restarts < 0:
            raise ValueError("n_restarts must be >= 0")
        if self.method not in ("picard", "newton"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.homotopy_ratio < 1:
            raise ValueError("homotopy_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class FixedPointSolution:
    z: complex
    h: np.ndarray
    g: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class BatchSolution:
    """Column-wise solutions for a batch of ``z`` values."""

    z: np.ndarray
    h: np.ndarray
    g: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def __len__(self) -> int:
        return self.z.shape[0]

    def __getitem__(self, i: int) -> FixedPointSolution:
        return FixedPointSolution(
            complex(self.z[i]), self.h[i].copy(), self.g[i].copy(),
            float(self.residual[i]), int(self.iterations[i]), bool(self.converged[i]),
        )

    def solutions(self) -> list[FixedPointSolution]:
        return [self[i] for i in range(len(self))]


def _check_spec(spec: ModelSpec) -> None:
    report = validate_model(spec)
    if not report.ok:
        raise InvalidModel("; ".join(report.failures))


def default_initial(spec: ModelSpec, z) -> np.ndarray:
    """``h0_r = i * min(C0 / Im z, 1)`` for every coordinate, shape (N, K)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    start = 1j * np.minimum(spec.c0() / z.imag, 1.0)
    return np.repeat(start[:, None], spec.K, axis=1)


def residual_batch(spec: ModelSpec, z, h, g) -> np.ndarray:
    """Row-wise max of the four sup-norm defects of the system."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    g_of_h = kernel_O(z, spec.c * h, spec.G)
    h_of_g = kernel_O(z, g, spec.H)
    P_h = kernel_O(z, g_of_h, spec.H)
    Q_g = kernel_O(z, spec.c * h_of_g, spec.G)
    defects = np.stack([
        np.abs(h - P_h).max(axis=1),
        np.abs(g - Q_g).max(axis=1),
        np.abs(g - g_of_h).max(axis=1),
        np.abs(h - h_of_g).max(axis=1),
    ])
    return defects.max(axis=0)


def residual(spec: ModelSpec, z, h, g) -> float:
    return float(residual_batch(spec, z, h, g)[0])


def _newton_step(spec: ModelSpec, z: np.ndarray, h: np.ndarray):
    g, Jg = kernel_O_with_jacobian(z, spec.c * h, spec.G)
    P, Jh = kernel_O_with_jacobian(z, g, spec.H)
    J = spec.c * np.einsum("nrs,nst->nrt", Jh, Jg)
    A = np.eye(spec.K)[None] - J
    F = h - P
    try:
        delta = np.linalg.solve(A, F[..., None])[..., 0]
    except np.linalg.LinAlgError:
        delta = np.full_like(h, np.nan)
        for i in range(h.shape[0]):
            try:
                delta[i] = np.linalg.solve(A[i], F[i])
            except np.linalg.LinAlgError:
                pass
    return P, h - delta


def solve_batch(spec: ModelSpec, z, config: SolverConfig = SolverConfig(),
                initial=None, *, check: bool = True) -> BatchSolution:
    """Solve the system independently at every ``z`` of a batch, no homotopy."""
    if check:
        _check_spec(spec)
    z = as_upper_point(np.atleast_1d(np.asarray(z, dtype=complex)))
    N, K = z.shape[0], spec.K
    if initial is None:
        h = default_initial(spec, z)
    else:
        h = np.array(np.broadcast_to(np.asarray(initial, dtype=complex), (N, K)))
        if not np.all(h.imag > 0):
            raise NotInUpperHalfPlane("initial h must lie in C_+^K")

    omega = config.damping
    best_h = h.copy()
    best_def = np.full(N, np.inf)
    stale = np.zeros(N, dtype=int)
    iters = np.zeros(N, dtype=int)
    done = np.zeros(N, dtype=bool)
    converged = np.zeros(N, dtype=bool)
    res = np.full(N, np.inf)

    for _ in range(config.max_iters):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        za, ha = z[act], h[act]
        if config.method == "newton":
            P, cand = _newton_step(spec, za, ha)
        else:
            P = kernel_O(za, kernel_O(za, spec.c * ha, spec.G), spec.H)
            cand = None
        d = np.abs(P - ha).max(axis=1)
        iters[act] += 1

        improved = d < best_def[act]
        best_def[act] = np.where(improved, d, best_def[act])
        best_h[act[improved]] = ha[improved]
        stale[act] = np.where(improved, 0, stale[act] + 1)

        # candidates for convergence: step defect already at target
        near = d <= config.tol
        if np.any(near):
            idx = act[near]
            gi = kernel_O(z[idx], spec.c * h[idx], spec.G)
            ri = residual_batch(spec, z[idx], h[idx], gi)
            ok = ri <= config.tol
            res[idx] = ri
            converged[idx[ok]] = True
            done[idx[ok]] = True
        gave_up = stale[act] >= config.patience
        done[act[gave_up]] = True

        step = (1 - omega) * ha + omega * P
        if cand is not None:
            fine = np.all(np.isfinite(cand), axis=1) & np.all(cand.imag > 0, axis=1)
            if np.any(fine):
                # accept Newton only where it reduces the defect
                fi = np.flatnonzero(fine)
                Pc = kernel_O(za[fi], kernel_O(za[fi], spec.c * cand[fi], spec.G), spec.H)
                dc = np.abs(Pc - cand[fi]).max(axis=1)
                better = dc < d[fi]
                step[fi[better]] = cand[fi[better]]
        upd = ~done[act]
        h[act[upd]] = step[upd]
        if config.debug and not np.all(h[act].imag > 0):
            raise AssertionError("iterate left the upper half-plane")

    # rows that never met the target keep their best iterate
    bad = ~converged
    h[bad] = best_h[bad]
    g = kernel_O(z, spec.c * h, spec.G)
    res[bad] = residual_batch(spec, z[bad], h[bad], g[bad]) if np.any(bad) else res[bad]
    converged |= res <= config.tol
    if np.any(~converged):
        log.debug("%d of %d points did not converge", int((~converged).sum()), N)
    return BatchSolution(z, h, g, res, iters, converged)


def _levels(target_im: float, start_im: float, ratio: float) -> list[float]:
    levels = []
    im = start_im
    while im > target_im:
        levels.append(im)
        im *= ratio
    return levels


def solve_vertical(spec: ModelSpec, x, eps_levels: Sequence[float],
                   config: SolverConfig = SolverConfig(), start_im: float | None = None,
                   ) -> list[BatchSolution]:
    """Solve along vertical lines ``x + i*eps`` for descending ``eps_levels``.

    Each vertical line is an independent homotopy chain: it starts at
    ``Im z = start_im`` (default: the model's first moment, at least 1),
    steps down geometrically and warm-starts every solve from the previous
    level.  Returns one :class:`BatchSolution` per requested level.
    """
    _check_spec(spec)
    x = np.asarray(x, dtype=float)
    eps_levels = list(eps_levels)
    if any(b >= a for a, b in zip(eps_levels, eps_levels[1:])):
        raise ValueError("eps_levels must be strictly descending")
    if start_im is None:
        start_im = max(1.0, spec.first_moment())
    h = None
    if config.homotopy:
        for im in _levels(eps_levels[0], start_im, config.homotopy_ratio):
            sol = solve_batch(spec, x + 1j * im, config, h, check=False)
            h = sol.h
    out = []
    for eps in eps_levels:
        sol = solve_batch(spec, x + 1j * eps, config, h, check=False)
        out.append(sol)
        h = sol.h
    return out


def solve_hg(spec: ModelSpec, z: complex, config: SolverConfig = SolverConfig(),
             initial=None) -> FixedPointSolution:
    """Solve the system at a single ``z``.

    ``initial`` is an optional starting ``h`` (or ``(h, g)`` pair; only ``h``
    drives the iteration).  Without one and with ``config.homotopy`` on, points
    close to the real axis are reached by stepping down from ``Im z = 1``.
    """
    _check_spec(spec)
    z = complex(as_upper_point(z))
    if isinstance(initial, tuple):
        initial = initial[0]
    if initial is None and config.homotopy and z.imag < 1.0:
        sols = solve_vertical(spec, [z.real], [z.imag], config, start_im=1.0)
        return sols[-1][0]
    return solve_batch(spec, [z], config, initial, check=False)[0]


def solve_grid(spec: ModelSpec, zs, config: SolverConfig = SolverConfig(),
               workers: int | None = None, chunk: int = 256) -> BatchSolution:
    """Solve at every point of ``zs``, results in input order.

    With ``config.homotopy`` the points form one chain: each solve
    warm-starts from the solution at the previous point (so ``zs`` should be
    sorted by decreasing ``Im z``).  Without homotopy the grid is split into
    chunks that may be solved concurrently by ``workers`` threads.
    """
    _check_spec(spec)
    zs = as_upper_point(np.atleast_1d(np.asarray(zs, dtype=complex)))
    if config.homotopy:
        sols = []
        h = None
        for i, z in enumerate(zs):
            s = solve_hg(spec, z, config, h) if i == 0 else solve_batch(spec, [z], config, h, check=False)[0]
            sols.append(s)
            h = s.h
        return BatchSolution(
            zs, np.array([s.h for s in sols]), np.array([s.g for s in sols]),
            np.array([s.residual for s in sols]), np.array([s.iterations for s in sols]),
            np.array([s.converged for s in sols]),
        )
    pieces = [zs[i:i + chunk] for i in range(0, zs.shape[0], chunk)]
    if workers and workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda zc: solve_batch(spec, zc, config, check=False), pieces))
    else:
        parts = [solve_batch(spec, zc, config, check=False) for zc in pieces]
    return BatchSolution(*(np.concatenate([getattr(p, f) for p in parts])
                           for f in ("z", "h", "g", "residual", "iterations", "converged")))


@dataclass(frozen=True)
class UniquenessReport:
    n_restarts: int
    n_converged: int
    max_pairwise_distance: float


def uniqueness_probe(spec: ModelSpec, z: complex, config: SolverConfig = SolverConfig(),
                     seed: int = 0) -> UniquenessReport:
    """Solve from ``config.n_restarts`` random starts and compare the results.

    Starts are drawn uniformly from the box ``Re in [-b, b]``,
    ``Im in (0, b]`` with ``b = C0 / Im z``.  Distance is the sup-norm over
    the concatenated ``(h, g)``.
    """
    if config.n_restarts < 2:
        raise InsufficientRestarts("uniqueness probe needs at least 2 restarts")
    _check_spec(spec)
    z = complex(as_upper_point(z))
    rng = np.random.default_rng(seed)
    b = spec.c0() / z.imag
    n, K = config.n_restarts, spec.K
    starts = rng.uniform(-b, b, (n, K)) + 1j * rng.uniform(1e-3 * b, b, (n, K))
    cfg = replace(config, homotopy=False)
    sols = solve_batch(spec, np.full(n, z), cfg, starts, check=False)
    ok = np.flatnonzero(sols.converged)
    vecs = np.concatenate([sols.h, sols.g], axis=1)[ok]
    dist = max((float(np.abs(a - b_).max()) for a, b_ in combinations(vecs, 2)), default=0.0)
    return UniquenessReport(n, int(ok.size), dist)
