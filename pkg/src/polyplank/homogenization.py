"""Convergence of the homogenised objective to the ball objective.

Lift each ``P_k`` to ``Q_k = homogenize(P_k, delta0)`` and set
``t = sqrt(delta0^2 + R^2 - |z|^2)``.  Then

    log F_delta0(z) = delta0^2 log(t / delta0) + sum_k delta_k^2 log|Q_k(t, z)|

tends to ``log F(z) = (R^2 - |z|^2)/2 + sum_k delta_k^2 log|P_k(z)|`` as
``delta0 -> inf``, with error ``O(delta0^-2)`` on compact sets away from the
zero sets.  Everything is done in the log domain since ``F_delta0`` itself
overflows for large ``delta0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, DomainError, PlankError
from .poly import MultiPoly, homogenize


def _points(polys: Sequence[MultiPoly], z) -> np.ndarray:
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    d = polys[0].dimension
    if Z.shape[1] != d:
        raise DimensionMismatchError(d, Z.shape[1])
    return Z, single


def homogenized_log_objective(polys: Sequence[MultiPoly], deltas, R: float, delta0: float, z) -> np.ndarray | float:
    """``log F_delta0`` at one point or a batch of points (rows)."""
    Z, single = _points(polys, z)
    if not delta0 > 0:
        raise PlankError("delta0 must be positive")
    x = R * R - np.sum(np.abs(Z) ** 2, axis=1)
    if np.any(x < -delta0**2):
        raise DomainError(f"point outside the admissible ball |z|^2 <= R^2 + delta0^2 = {R * R + delta0**2!r}")
    # delta0^2 log(t/delta0) computed as delta0^2/2 log1p(x/delta0^2) to keep precision
    val = 0.5 * delta0**2 * np.log1p(x / delta0**2)
    t = np.sqrt(delta0**2 + x)
    lifted = np.column_stack([t.astype(complex), Z])
    for p, dk in zip(polys, deltas):
        q = homogenize(p.as_complex(), delta0)
        with np.errstate(divide="ignore"):
            val = val + dk**2 * np.log(np.abs(q.evaluate_many(lifted)))
    return float(val[0]) if single else val


def limit_log_objective(polys: Sequence[MultiPoly], deltas, R: float, z) -> np.ndarray | float:
    """``log F(z) = (R^2 - |z|^2)/2 + sum delta_k^2 log|P_k(z)|``."""
    Z, single = _points(polys, z)
    val = 0.5 * (R * R - np.sum(np.abs(Z) ** 2, axis=1))
    for p, dk in zip(polys, deltas):
        with np.errstate(divide="ignore"):
            val = val + dk**2 * np.log(np.abs(p.as_complex().evaluate_many(Z)))
    return float(val[0]) if single else val


def make_grid(polys: Sequence[MultiPoly], R: float, n_points: int = 100, seed: int = 0,
              fraction: float = 0.9, min_abs: float = 1e-6) -> np.ndarray:
    """Uniform random points of the ``fraction * R`` ball with every ``|P_k| >= min_abs``."""
    d = polys[0].dimension
    rng = np.random.default_rng(seed)
    out = []
    while sum(len(b) for b in out) < n_points:
        m = 2 * n_points
        Z = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
        Z *= (fraction * R * rng.random(m) ** (1 / (2 * d)))[:, None]
        keep = np.ones(m, dtype=bool)
        for p in polys:
            keep &= np.abs(p.as_complex().evaluate_many(Z)) >= min_abs
        out.append(Z[keep])
    return np.vstack(out)[:n_points]


def sensitivity(polys: Sequence[MultiPoly], deltas, R: float, grid: np.ndarray) -> float:
    """``1 + max_z sum_k delta_k^2 deg P_k sum_a |c_a z^a| / (R^2 |P_k(z)|)``.

    The leading error term is at most ``(R^4/4 + R^4 (this - 1) / 2) / delta0^2``,
    so ``10 R^4 / delta0^2`` times this value bounds it with room to spare.
    """
    total = np.zeros(len(grid))
    for p, dk in zip(polys, deltas):
        pc = p.as_complex()
        absolute = MultiPoly({e: abs(c) for e, c in pc.terms.items()}, pc.dimension, "real")
        mag = absolute.evaluate_many(np.abs(grid)).real
        total += dk**2 * p.degree * mag / (R * R * np.abs(pc.evaluate_many(grid)))
    return 1.0 + float(np.max(total))


@dataclass
class ConvergenceReport:
    schedule: list[float]
    errors: list[float]
    bounds: list[float]
    scale: float
    grid_size: int
    ratios: list[float] = field(init=False)

    def __post_init__(self):
        self.ratios = [a / b if b > 0 else math.inf for a, b in zip(self.errors, self.errors[1:])]

    @property
    def decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def ratios_within(self, lo: float = 50.0, hi: float = 200.0) -> bool:
        return all(lo <= r <= hi for r in self.ratios)

    @property
    def within_bound(self) -> bool:
        return self.errors[-1] < self.bounds[-1]

    @property
    def passed(self) -> bool:
        return self.decreasing and self.within_bound

    def to_json(self) -> dict:
        return {"schema": 1, "rows": [{"delta0": s, "sup_error": e, "bound": b}
                                      for s, e, b in zip(self.schedule, self.errors, self.bounds)],
                "ratios": self.ratios, "scale": self.scale, "grid_size": self.grid_size,
                "decreasing": self.decreasing, "within_bound": self.within_bound}


def convergence_report(polys: Sequence[MultiPoly], deltas, R: float, schedule: Sequence[float],
                       grid: np.ndarray) -> ConvergenceReport:
    """Sup over ``grid`` of ``|log F_delta0 - log F|`` for each ``delta0`` in ``schedule``."""
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if np.any(np.linalg.norm(grid, axis=1) > R * (1 + 1e-12)):
        raise DomainError("grid points must lie in the ball of radius R")
    base = limit_log_objective(polys, deltas, R, grid)
    if not np.all(np.isfinite(base)):
        raise PlankError("grid touches a zero set; log comparison undefined")
    scale = sensitivity(polys, deltas, R, grid)
    errors, bounds = [], []
    for d0 in schedule:
        err = np.abs(homogenized_log_objective(polys, deltas, R, d0, grid) - base)
        errors.append(float(np.max(err)))
        bounds.append(10 * R**4 / d0**2 * scale)
    return ConvergenceReport([float(s) for s in schedule], errors, bounds, scale, len(grid))
