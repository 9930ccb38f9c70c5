"""Distances from points to zero sets of polynomials.

Fast path
    Seeds are feasible points found as the nearest roots of univariate
    restrictions along lines (or great circles) through the query point.
    The best seeds are refined by exterior-penalty continuation on
    ``|y - p|^2 + mu |P(y)|^2`` and polished with Newton's method on the
    Lagrange system ``y - p = J^T lam, P(y) = 0``.  Every reported distance
    comes with the achieving point ``y`` so ``P(y) ~ 0`` can be checked.

Oracle
    :func:`brute_force_bounds` subdivides a box around the point, discards
    cells that provably contain no zero (second-order Taylor bound with a
    majorant Hessian) and certifies zeros with a Rouche / intermediate value
    test.  It shares no code path with the fast estimator beyond polynomial
    evaluation.

Complex polynomials are handled in real coordinates ``(Re z, Im z)`` with
the two equations ``Re P = Im P = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DimensionMismatchError, DomainError, GridTooLargeError, PlankError, ZeroPolynomialError
from .poly import MultiPoly, TrigPoly, _line_coefficients, random_unit, restrict_to_great_circle


@dataclass(frozen=True)
class DistanceConfig:
    directions: int = 64
    polish: int = 8
    penalties: tuple[float, ...] = (1e2, 1e4, 1e6, 1e8)
    seed: int = 0
    feas_tol: float = 1e-9
    newton_iters: int = 40
    singular_tol: float = 1e-8


@dataclass(frozen=True)
class DistanceEstimate:
    """Upper-bound distance with the point on the zero set that achieves it."""

    distance: float
    point: np.ndarray | None
    residual: float

    def __float__(self) -> float:
        return self.distance


# ---------------------------------------------------------------------------
# real-coordinate equation systems
# ---------------------------------------------------------------------------


class _System:
    """Equations ``g(y) = 0`` in real coordinates for a list of polynomials.

    Complex polynomials contribute ``Re P`` and ``Im P``; coordinates are
    ``y = (Re z, Im z)``.  Each polynomial is scaled by its largest
    coefficient so penalty weights are comparable across inputs.
    """

    def __init__(self, polys: Sequence[MultiPoly], complex_mode: bool, sphere: bool = False):
        self.polys = list(polys)
        self.complex_mode = complex_mode
        self.sphere = sphere
        self.d = self.polys[0].dimension
        self.n = 2 * self.d if complex_mode else self.d
        self.scales = np.array([p.coefficient_scale for p in self.polys])

    def to_real(self, z) -> np.ndarray:
        z = np.asarray(z)
        if self.complex_mode:
            z = z.astype(complex)
            return np.concatenate([z.real, z.imag])
        return np.asarray(z, dtype=float)

    def to_point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.complex_mode:
            return y[: self.d] + 1j * y[self.d:]
        return y

    def residual(self, y) -> np.ndarray:
        z = self.to_point(y)[None, :]
        out = []
        for p, s in zip(self.polys, self.scales):
            v = p.evaluate_many(z)[0] / s
            out.extend([v.real, v.imag] if self.complex_mode else [float(np.real(v))])
        if self.sphere:
            out.append(float(y @ y) - 1.0)
        return np.array(out)

    def jacobian(self, y) -> tuple[np.ndarray, np.ndarray]:
        z = self.to_point(y)[None, :]
        vals, rows = [], []
        for p, s in zip(self.polys, self.scales):
            v, g = p.value_and_grad_many(z)
            v, g = v[0] / s, g[0] / s
            if self.complex_mode:
                vals.extend([v.real, v.imag])
                rows.append(np.concatenate([g.real, -g.imag]))
                rows.append(np.concatenate([g.imag, g.real]))
            else:
                vals.append(float(np.real(v)))
                rows.append(np.real(g))
        if self.sphere:
            vals.append(float(y @ y) - 1.0)
            rows.append(2 * y)
        return np.array(vals), np.array(rows)

    def hessians(self, y) -> np.ndarray:
        z = self.to_point(y)[None, :]
        out = []
        for p, s in zip(self.polys, self.scales):
            h = p.hessian_many(z)[0] / s
            if self.complex_mode:
                hr, hi = h.real, h.imag
                out.append(np.block([[hr, -hi], [-hi, -hr]]))
                out.append(np.block([[hi, hr], [hr, -hi]]))
            else:
                out.append(np.real(h))
        if self.sphere:
            out.append(2 * np.eye(self.n))
        return np.array(out)

    def feasible(self, y, tol: float) -> bool:
        r = self.residual(y)
        bound = tol * (1 + float(np.linalg.norm(y))) ** max(p.degree for p in self.polys)
        return bool(np.all(np.isfinite(r)) and np.max(np.abs(r)) <= bound)

    def residual_norm(self, y) -> float:
        return float(np.max(np.abs(self.residual(y))))


def _project(system: _System, y: np.ndarray, iters: int = 8) -> np.ndarray:
    """Minimum-norm Gauss-Newton steps onto ``g = 0``."""
    for _ in range(iters):
        g, J = system.jacobian(y)
        if not np.all(np.isfinite(J)) or np.max(np.abs(g)) < 1e-16:
            break
        step = np.linalg.lstsq(J, -g, rcond=1e-12)[0]
        y = y + step
        if np.linalg.norm(step) < 1e-15 * (1 + np.linalg.norm(y)):
            break
    return y


def _penalty_path(system: _System, target: np.ndarray, y0: np.ndarray, penalties) -> np.ndarray:
    n = system.n
    y = y0.copy()
    for mu in penalties:
        sq = math.sqrt(mu)

        def fun(v):
            return np.concatenate([v - target, sq * system.residual(v)])

        def jac(v):
            _, J = system.jacobian(v)
            return np.vstack([np.eye(n), sq * J])

        m = n + len(system.residual(y))
        method = "lm" if m >= n else "trf"
        try:
            y = least_squares(fun, y, jac=jac, method=method, xtol=1e-14, ftol=1e-14, gtol=1e-14,
                              max_nfev=200).x
        except (ValueError, np.linalg.LinAlgError):
            break
    return y


def _kkt_polish(system: _System, target: np.ndarray, y: np.ndarray, iters: int, singular_tol: float) -> np.ndarray | None:
    """Newton on ``y - target = J^T lam, g(y) = 0``; None when singular."""
    n = system.n
    g, J = system.jacobian(y)
    if np.max(np.linalg.norm(J, axis=1)) < singular_tol:
        return None
    lam = np.linalg.lstsq(J.T, y - target, rcond=1e-12)[0]
    for _ in range(iters):
        g, J = system.jacobian(y)
        H = system.hessians(y)
        F = np.concatenate([y - target - J.T @ lam, g])
        if not np.all(np.isfinite(F)):
            return None
        if np.linalg.norm(F) < 1e-15 * (1 + np.linalg.norm(y)):
            break
        A = np.block([[np.eye(n) - np.tensordot(lam, H, axes=1), -J.T], [J, np.zeros((len(g), len(g)))]])
        step = np.linalg.lstsq(A, -F, rcond=1e-13)[0]
        y = y + step[:n]
        lam = lam + step[n:]
        if np.linalg.norm(step) < 1e-15 * (1 + np.linalg.norm(y)):
            break
    return y


def _refine(system: _System, target: np.ndarray, seeds: list[np.ndarray], config: DistanceConfig,
            metric) -> tuple[float, np.ndarray | None, float]:
    """Refine seeds and return the best feasible ``(distance, y, residual)``."""
    best = (math.inf, None, math.inf)
    candidates = []
    for y0 in seeds:
        candidates.append(y0)
        y1 = _penalty_path(system, target, y0, config.penalties)
        y1 = _project(system, y1)
        candidates.append(y1)
        y2 = _kkt_polish(system, target, y1, config.newton_iters, config.singular_tol)
        if y2 is not None:
            candidates.append(_project(system, y2, iters=3))
    for y in candidates:
        if not np.all(np.isfinite(y)) or not system.feasible(y, config.feas_tol):
            continue
        dist = metric(y)
        if dist < best[0]:
            best = (dist, y, system.residual_norm(y))
    return best


def _distinct(points: list[tuple[float, np.ndarray]], k: int, tol: float = 1e-6) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for _, y in sorted(points, key=lambda t: t[0]):
        if all(np.linalg.norm(y - o) > tol * (1 + np.linalg.norm(y)) for o in out):
            out.append(y)
        if len(out) >= k:
            break
    return out


# ---------------------------------------------------------------------------
# Euclidean distance to a single zero set
# ---------------------------------------------------------------------------


def _point_array(poly: MultiPoly, point) -> np.ndarray:
    pt = np.asarray(point)
    if pt.ndim != 1 or pt.shape[0] != poly.dimension:
        raise DimensionMismatchError(poly.dimension, pt.shape[-1] if pt.ndim else 0)
    return pt.astype(complex) if poly.field == "complex" else np.real_if_close(pt).astype(float)


def _line_roots(poly: MultiPoly, base: np.ndarray, u: np.ndarray, real: bool) -> np.ndarray:
    coef = np.asarray(_line_coefficients(poly, base, u).coef)
    scale = np.max(np.abs(coef)) if coef.size else 0.0
    if scale == 0:
        return np.zeros(0)
    nz = np.flatnonzero(np.abs(coef) > 1e-14 * scale)
    coef = coef[: nz[-1] + 1]
    if len(coef) < 2:
        return np.zeros(0)
    roots = np.roots(coef[::-1])
    if real:
        roots = roots[np.abs(roots.imag) <= 1e-6 * (1 + np.abs(roots))].real
    return roots


def closest_point(poly: MultiPoly, point, config: DistanceConfig | None = None) -> DistanceEstimate:
    """Nearest point found on ``Z(P)`` and its distance (an upper bound)."""
    config = config or DistanceConfig()
    if poly.is_zero:
        raise ZeroPolynomialError()
    p = _point_array(poly, point)
    cplx = poly.field == "complex"
    scale = poly.coefficient_scale
    v0, g0 = poly.value_and_grad_many(p[None, :])
    v0, g0 = v0[0], g0[0]
    if abs(v0) < 1e-12 * scale:
        return DistanceEstimate(0.0, p.copy(), abs(v0) / scale)
    if poly.degree <= 0:
        return DistanceEstimate(math.inf, None, math.inf)
    if poly.degree == 1:
        a = g0
        na = float(np.linalg.norm(a))
        y = p - v0 * (np.conj(a) if cplx else a) / na**2
        return DistanceEstimate(abs(v0) / na, y, abs(poly(y)) / scale)

    rng = np.random.default_rng(config.seed)
    field = "complex" if cplx else "real"
    dirs = [random_unit(rng, poly.dimension, field) for _ in range(config.directions)]
    gn = float(np.linalg.norm(g0))
    if gn > 0:
        dirs.insert(0, (np.conj(g0) if cplx else np.real(g0)) / gn)
    for i in range(poly.dimension):
        e = np.zeros(poly.dimension, dtype=complex if cplx else float)
        e[i] = 1
        dirs.append(e)

    seeds = []
    for u in dirs:
        roots = _line_roots(poly, p, u, real=not cplx)
        if roots.size == 0:
            continue
        w = roots[np.argmin(np.abs(roots))]
        seeds.append((abs(w), p + w * u))
    if poly.dimension == 1:
        # one variable: the line is the whole space
        if not seeds:
            return DistanceEstimate(math.inf, None, math.inf)
        dist, y = min(seeds, key=lambda t: t[0])
        return DistanceEstimate(float(dist), y, abs(poly(y)) / scale)

    system = _System([poly], cplx)
    target = system.to_real(p)
    if not seeds:
        # no line hit the zero set: try penalty from scattered real starts
        spread = 1 + float(np.linalg.norm(p))
        starts = [target + spread * rng.standard_normal(system.n) for _ in range(8)]
        starts = [_project(system, s, iters=30) for s in starts]
        seed_pts = starts
    else:
        seed_pts = [system.to_real(y) for y in _distinct(seeds, config.polish)]
    dist, y, res = _refine(system, target, seed_pts, config, lambda v: float(np.linalg.norm(v - target)))
    if y is None:
        return DistanceEstimate(math.inf, None, math.inf)
    return DistanceEstimate(dist, system.to_point(y), res)


def distance_to_zero_set(poly: MultiPoly, point, config: DistanceConfig | None = None) -> float:
    return closest_point(poly, point, config).distance


# ---------------------------------------------------------------------------
# angular distance on the real sphere
# ---------------------------------------------------------------------------


def _chord_to_angle(chord: float) -> float:
    return 2 * math.asin(min(1.0, chord / 2))


def _linear_sphere(poly: MultiPoly, p: np.ndarray) -> DistanceEstimate:
    a = np.array([poly.terms.get(tuple(int(i == j) for j in range(poly.dimension)), 0.0)
                  for i in range(poly.dimension)], dtype=float)
    c = float(poly.terms.get((0,) * poly.dimension, 0.0))
    na = float(np.linalg.norm(a))
    nhat = a / na
    h = -c / na
    if abs(h) > 1:
        return DistanceEstimate(math.pi, None, math.inf)
    s = float(p @ nhat)
    perp = p - s * nhat
    pn = float(np.linalg.norm(perp))
    if pn < 1e-15:
        # p is a pole of the section: every point of the circle is equidistant
        rng = np.random.default_rng(0)
        perp = rng.standard_normal(poly.dimension)
        perp -= (perp @ nhat) * nhat
        pn = float(np.linalg.norm(perp))
    v = perp / pn
    y = h * nhat + math.sqrt(max(0.0, 1 - h * h)) * v
    return DistanceEstimate(_chord_to_angle(float(np.linalg.norm(y - p))), y, abs(poly(y)) / poly.coefficient_scale)


def closest_point_on_sphere(poly: MultiPoly, point, config: DistanceConfig | None = None) -> DistanceEstimate:
    """Nearest point of ``Z(P) ∩ S^{d-1}`` in angle; ``pi`` when none is found."""
    config = config or DistanceConfig()
    if poly.field != "real":
        raise DomainError("angular distance needs a real polynomial")
    if poly.is_zero:
        raise ZeroPolynomialError()
    p = _point_array(poly, point)
    if abs(np.linalg.norm(p) - 1) > 1e-9:
        raise DomainError("point must be on the unit sphere")
    p = p / np.linalg.norm(p)
    d = poly.dimension
    scale = poly.coefficient_scale
    if abs(poly(p)) < 1e-12 * scale:
        return DistanceEstimate(0.0, p.copy(), abs(poly(p)) / scale)
    if d == 1:
        q = -p
        if abs(poly(q)) < 1e-12 * scale:
            return DistanceEstimate(math.pi, q, 0.0)
        return DistanceEstimate(math.pi, None, math.inf)
    if poly.degree == 1:
        return _linear_sphere(poly, p)

    rng = np.random.default_rng(config.seed)

    def tangent(u):
        # project twice: one pass loses orthogonality when u is nearly parallel to p
        for _ in range(2):
            u = u - (u @ p) * p
            u = u / np.linalg.norm(u)
        return u

    if d == 2:
        dirs = [np.array([-p[1], p[0]])]
    else:
        dirs = [tangent(rng.standard_normal(d)) for _ in range(config.directions)]
        _, g = poly.value_and_grad_many(p[None, :])
        gt = g[0] - (g[0] @ p) * p
        if np.linalg.norm(gt) > 1e-14:
            dirs.insert(0, tangent(gt))
    seeds = []
    for u in dirs:
        q = restrict_to_great_circle(poly, p, u, tol=1e-9)
        if q.is_zero:
            continue
        for t in q.roots():
            ang = min(t, 2 * math.pi - t)
            y = math.cos(t) * p + math.sin(t) * u
            seeds.append((ang, y))
    if d == 2:
        if not seeds:
            return DistanceEstimate(math.pi, None, math.inf)
        ang, y = min(seeds, key=lambda s: s[0])
        return DistanceEstimate(float(ang), y, abs(poly(y)) / scale)

    system = _System([poly], complex_mode=False, sphere=True)
    if not seeds:
        x = rng.standard_normal((64 * d, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        vals = poly.evaluate_many(x)
        if np.all(vals > 0) or np.all(vals < 0):
            return DistanceEstimate(math.pi, None, math.inf)
        seed_pts = [_project(system, s, iters=30) for s in x[:8]]
    else:
        seed_pts = _distinct(seeds, config.polish)
    chord, y, res = _refine(system, p, seed_pts, config, lambda v: float(np.linalg.norm(v - p)))
    if y is None:
        return DistanceEstimate(math.pi, None, math.inf)
    y = y / np.linalg.norm(y)
    return DistanceEstimate(_chord_to_angle(float(np.linalg.norm(y - p))), y, res)


def angular_distance_on_sphere(poly: MultiPoly, point, config: DistanceConfig | None = None) -> float:
    return closest_point_on_sphere(poly, point, config).distance


# ---------------------------------------------------------------------------
# common zero sets
# ---------------------------------------------------------------------------


def closest_common_point(polys: Sequence[MultiPoly], point, config: DistanceConfig | None = None) -> DistanceEstimate:
    """Nearest point found on ``{P_1 = ... = P_k = 0}``; ``inf`` if none found."""
    config = config or DistanceConfig()
    polys = list(polys)
    if not polys:
        raise PlankError("need at least one polynomial")
    if len(polys) == 1:
        return closest_point(polys[0], point, config)
    cplx = any(p.field == "complex" for p in polys)
    if cplx:
        polys = [p.as_complex() for p in polys]
    p = _point_array(polys[0], point)
    system = _System(polys, cplx)
    target = system.to_real(p)
    if system.feasible(target, 1e-12):
        return DistanceEstimate(0.0, p.copy(), system.residual_norm(target))
    rng = np.random.default_rng(config.seed)
    starts = [target]
    for q in polys:
        est = closest_point(q, p, config)
        if est.point is not None:
            starts.append(system.to_real(est.point))
    spread = 0.5 * (1 + float(np.linalg.norm(p)))
    starts += [target + spread * rng.standard_normal(system.n) for _ in range(config.polish)]
    seeds = []
    for s in starts:
        y = _project(system, s, iters=50)
        if np.all(np.isfinite(y)) and system.feasible(y, config.feas_tol):
            seeds.append((float(np.linalg.norm(y - target)), y))
    if not seeds:
        return DistanceEstimate(math.inf, None, math.inf)
    dist, y, res = _refine(system, target, _distinct(seeds, config.polish), config,
                           lambda v: float(np.linalg.norm(v - target)))
    if y is None:
        return DistanceEstimate(math.inf, None, math.inf)
    return DistanceEstimate(dist, system.to_point(y), res)


def distance_to_common_zero_set(polys: Sequence[MultiPoly], point, config: DistanceConfig | None = None) -> float:
    return closest_common_point(polys, point, config).distance


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleBounds:
    """``lower <= true distance <= upper``; ``distance`` is the reported estimate."""

    lower: float
    upper: float
    resolution: float
    real_dim: int
    cells: int

    @property
    def distance(self) -> float:
        return self.upper if math.isfinite(self.upper) else self.lower

    @property
    def diameter(self) -> float:
        """Diagonal of a finest grid cell."""
        return self.resolution * math.sqrt(self.real_dim)


def _oracle_eval(poly: MultiPoly, centers_real: np.ndarray, cplx: bool):
    d = poly.dimension
    z = centers_real[:, :d] + 1j * centers_real[:, d:] if cplx else centers_real
    v, g = poly.value_and_grad_many(z)
    return z, np.abs(v), np.linalg.norm(g, axis=1)


def brute_force_bounds(poly: MultiPoly, point, resolution: float = 1e-3, max_cells: int = 4_000_000,
                       max_radius: float | None = None) -> OracleBounds:
    """Subdivision oracle for the distance from ``point`` to ``Z(P)``.

    Cells of side ``<= resolution`` survive only if a zero cannot be excluded;
    zeros are certified near cell centres, giving the upper bound.
    """
    if poly.is_zero:
        raise ZeroPolynomialError()
    cplx = poly.field == "complex"
    d = poly.dimension
    n = 2 * d if cplx else d
    if n > 4:
        raise GridTooLargeError(n)
    pt = _point_array(poly, point)
    p = np.concatenate([pt.real, pt.imag]) if cplx else pt.astype(float)
    if abs(poly(pt)) == 0:
        return OracleBounds(0.0, 0.0, resolution, n, 0)
    if max_radius is None:
        max_radius = 1e3 * (1 + float(np.linalg.norm(p)))
    signs = np.array(list(product((-1.0, 1.0), repeat=n)))
    half_box = max(32 * resolution, 0.25)
    total_cells = 0
    while True:
        upper = math.inf
        centers = p[None, :]
        half = half_box
        while True:
            r = half * math.sqrt(n)
            z, absv, gn = _oracle_eval(poly, centers, cplx)
            radii = np.abs(z) + r
            m2 = poly.majorant_hessian_norm(radii)
            keep = absv <= (gn * r + 0.5 * m2 * r * r) * (1 + 1e-9) + 1e-300
            # certificates: a zero within rho of the centre
            with np.errstate(divide="ignore", invalid="ignore"):
                base = absv / gn
            for eps in (1e-3, 1e-2, 1e-1, 1.0):
                rho = base * (1 + eps)
                ok = np.isfinite(rho) & (rho <= 4 * r)
                if not np.any(ok):
                    continue
                m2r = poly.majorant_hessian_norm(np.abs(z[ok]) + rho[ok][:, None])
                cert = gn[ok] * rho[ok] - 0.5 * m2r * rho[ok] ** 2 > absv[ok] * (1 + 1e-9)
                if np.any(cert):
                    cand = np.linalg.norm(centers[ok][cert] - p, axis=1) + rho[ok][cert]
                    upper = min(upper, float(np.min(cand)))
            centers = centers[keep]
            gap = np.maximum(np.abs(centers - p) - half, 0.0)
            cell_dist = np.linalg.norm(gap, axis=1)
            centers = centers[cell_dist <= upper]
            total_cells += len(centers)
            if 2 * half <= resolution or len(centers) == 0:
                break
            if len(centers) * len(signs) > max_cells:
                raise PlankError(f"oracle grid budget exceeded ({len(centers) * len(signs)} cells)")
            centers = (centers[:, None, :] + 0.5 * half * signs[None, :, :]).reshape(-1, n)
            half *= 0.5
        if len(centers):
            gap = np.maximum(np.abs(centers - p) - half, 0.0)
            lower = float(np.min(np.linalg.norm(gap, axis=1)))
        else:
            lower = math.inf
        if upper <= half_box:
            return OracleBounds(min(lower, upper), upper, resolution, n, total_cells)
        if half_box >= max_radius:
            return OracleBounds(lower if math.isfinite(lower) else half_box, upper, resolution, n, total_cells)
        half_box = max(2 * half_box, upper if math.isfinite(upper) else 0.0)


def brute_force_distance(poly: MultiPoly, point, resolution: float = 1e-3) -> float:
    return brute_force_bounds(poly, point, resolution).distance
