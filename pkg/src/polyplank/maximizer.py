"""Multistart projected gradient ascent for log-product objectives.

All starts are advanced together as one batch: each iteration takes a
Barzilai-Borwein trial step per start, backtracks (Armijo, constant 1e-4)
until accepted, then projects onto the feasible set (ball clipping or
sphere normalisation).  Near a maximum, objective differences drop below
round-off; a step is then accepted when the gradient norm decreases, which
lets iterates converge to gradient precision rather than ``sqrt(eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import homogenization
from .distance import DistanceConfig, closest_point, closest_point_on_sphere
from .errors import OptimizationError
from .objective import COMPLEX_BALL, PlankInstance, effective_radius, log_product_batch
from .poly import MultiPoly

CERTIFIED = "certified_margins"
SUSPECT = "optimization_suspect"


@dataclass(frozen=True)
class MaximizerConfig:
    starts: int | None = None  # default 64 * d
    max_iter: int = 2000
    armijo: float = 1e-4
    grad_tol: float = 1e-10
    step_tol: float = 1e-12
    seed: int = 0
    clip: bool = True
    margin_tol: float = 1e-6
    initial_step: float = 1.0
    stall_iter: int = 50
    oracle: bool = False
    oracle_resolution: float = 1e-3

    def __post_init__(self):
        if self.starts is not None and self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iter < 1 or self.stall_iter < 1:
            raise ValueError("iteration limits must be >= 1")
        for name in ("armijo", "grad_tol", "step_tol", "margin_tol", "initial_step", "oracle_resolution"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def n_starts(self, d: int) -> int:
        return self.starts if self.starts is not None else 64 * d


def _rdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.real(np.sum(a * np.conj(b), axis=-1))


def _norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.real(np.sum(a * np.conj(a), axis=-1)))


class _Problem:
    """``[-|z|^2/2] + sum w_k log|P_k|`` on a ball (optionally clipped) or a sphere."""

    def __init__(self, polys: Sequence[MultiPoly], weights, gaussian: bool, domain: str,
                 radius: float | None, field: str):
        self.polys = list(polys)
        self.weights = np.asarray(weights, dtype=float)
        self.gaussian = gaussian
        self.domain = domain
        self.radius = radius
        self.field = field
        self.d = self.polys[0].dimension

    def value_grad(self, Z: np.ndarray):
        f, g = log_product_batch(self.polys, self.weights, Z, self.gaussian)
        if self.domain == "sphere":
            g = g - _rdot(g, Z)[:, None] * Z
        return f, g

    def retract(self, Z: np.ndarray) -> np.ndarray:
        if self.domain == "sphere":
            return Z / _norm(Z)[:, None]
        if self.radius is None:
            return Z
        nrm = _norm(Z)
        scale = np.where(nrm > self.radius, self.radius / np.maximum(nrm, 1e-300), 1.0)
        return Z * scale[:, None]

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        shape = (k, self.d)
        Z = rng.standard_normal(shape)
        if self.field == "complex":
            Z = Z + 1j * rng.standard_normal(shape)
        Z = Z / _norm(Z)[:, None]
        if self.domain == "ball":
            real_dim = 2 * self.d if self.field == "complex" else self.d
            r = (self.radius if self.radius is not None else 1.0) * rng.random(k) ** (1 / real_dim)
            Z = Z * r[:, None]
        return Z


def _sample_starts(problem: _Problem, rng: np.random.Generator, k: int) -> np.ndarray:
    Z = problem.sample(rng, k)
    f, _ = problem.value_grad(Z)
    for _ in range(10):
        bad = ~np.isfinite(f)
        if not np.any(bad):
            break
        Z[bad] = problem.sample(rng, int(bad.sum()))
        f[bad], _ = problem.value_grad(Z[bad])
    return Z


def ascend(problem: _Problem, Z0: np.ndarray, config: MaximizerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Run the batched ascent from every row of ``Z0``; returns final points and values."""
    Z = problem.retract(np.array(Z0))
    f, g = problem.value_grad(Z)
    K = len(Z)
    alpha = np.full(K, config.initial_step)
    active = np.isfinite(f)
    c = config.armijo
    # stall detection: no objective gain and no halving of the best gradient norm
    best_f, best_g = f.copy(), _norm(g)
    stall = np.zeros(K, dtype=int)
    for _ in range(config.max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Zi, fi, gi = Z[idx], f[idx], g[idx]
        ai = alpha[idx].copy()
        Zn, fn, gn = Zi.copy(), fi.copy(), gi.copy()
        pending = np.ones(idx.size, dtype=bool)
        gnorm = _norm(gi)
        for _ in range(60):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            Zt = problem.retract(Zi[p] + ai[p, None] * gi[p])
            ft, gt = problem.value_grad(Zt)
            dec = _rdot(gi[p], Zt - Zi[p])
            finite = np.isfinite(ft)
            ok = finite & (ft >= fi[p] + c * dec)
            noisy = finite & (np.abs(ft - fi[p]) <= 1e-13 * (1 + np.abs(fi[p]))) & (_norm(gt) < gnorm[p])
            ok |= noisy
            acc = p[ok]
            Zn[acc], fn[acc], gn[acc] = Zt[ok], ft[ok], gt[ok]
            pending[acc] = False
            ai[p[~ok]] *= 0.5
        s = Zn - Zi
        step = _norm(s)
        y = gn - gi
        sy = _rdot(s, y)
        ss = _rdot(s, s)
        with np.errstate(divide="ignore", invalid="ignore"):
            bb = np.where(sy < 0, ss / -sy, 2 * ai)
        new_alpha = np.clip(np.nan_to_num(bb, nan=1.0, posinf=1e6), 1e-12, 1e6)
        gn_norm = _norm(gn)
        progress = (fn > best_f[idx] + 1e-12 * (1 + np.abs(fi))) | (gn_norm < 0.5 * best_g[idx])
        best_f[idx] = np.maximum(best_f[idx], fn)
        best_g[idx] = np.where(gn_norm < 0.5 * best_g[idx], gn_norm, best_g[idx])
        stall[idx] = np.where(progress, 0, stall[idx] + 1)
        converged = (pending | (step < config.step_tol) | (step / ai < config.grad_tol) | (gn_norm < config.grad_tol)
                     | (stall[idx] >= config.stall_iter))
        Z[idx], f[idx], g[idx], alpha[idx] = Zn, fn, gn, new_alpha
        active[idx[converged]] = False
    return Z, f


def _real_key(z: np.ndarray) -> tuple:
    if np.iscomplexobj(z):
        return tuple(np.stack([z.real, z.imag], axis=-1).ravel())
    return tuple(z)


def select_best(Z: np.ndarray, f: np.ndarray, tie_tol: float = 1e-10) -> int:
    """Index of the best start; near-ties go to the lexicographically smallest point."""
    finite = np.flatnonzero(np.isfinite(f))
    if finite.size == 0:
        raise OptimizationError("every start landed on a zero set")
    fmax = np.max(f[finite])
    ties = [i for i in finite if f[i] >= fmax - tie_tol * (1 + abs(fmax))]
    return min(ties, key=lambda i: _real_key(Z[i]))


def maximize_log_product(polys: Sequence[MultiPoly], weights, *, domain: str, field: str,
                         gaussian: bool = False, radius: float | None = None,
                         config: MaximizerConfig | None = None, extra_starts=None) -> tuple[np.ndarray, float]:
    """Best point of ``[-|z|^2/2] + sum w_k log|P_k|`` over ``domain`` (``ball``/``sphere``)."""
    config = config or MaximizerConfig()
    problem = _Problem(polys, weights, gaussian, domain, radius, field)
    for attempt in range(2):
        rng = np.random.default_rng([config.seed, attempt])
        Z0 = _sample_starts(problem, rng, config.n_starts(problem.d))
        if extra_starts is not None:
            Z0 = np.vstack([np.asarray(extra_starts, dtype=Z0.dtype).reshape(-1, problem.d), Z0])
        Z, f = ascend(problem, Z0, config)
        if np.any(np.isfinite(f)):
            i = select_best(Z, f)
            return Z[i], float(f[i])
    raise OptimizationError("all starts landed on zero sets twice")


# ---------------------------------------------------------------------------
# witness reports
# ---------------------------------------------------------------------------


@dataclass
class ItemReport:
    delta: float
    distance: float
    nearest: np.ndarray | None
    residual: float
    oracle_distance: float | None = None

    @property
    def margin(self) -> float:
        return self.distance - self.delta


@dataclass
class WitnessReport:
    witness: np.ndarray
    value: float
    items: list[ItemReport]
    status: str
    domain: str
    seed: int
    exploratory: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def margins(self) -> list[float]:
        return [it.margin for it in self.items]

    @property
    def distances(self) -> list[float]:
        return [it.distance for it in self.items]

    def to_json(self) -> dict:
        from .io import encode_vector

        items = []
        for it in self.items:
            entry = {"delta": it.delta, "distance": it.distance, "margin": it.margin,
                     "nearest": encode_vector(it.nearest) if it.nearest is not None else None,
                     "residual": it.residual}
            if it.oracle_distance is not None:
                entry["oracle_distance"] = it.oracle_distance
            items.append(entry)
        out = {"schema": 1, "domain": self.domain, "seed": self.seed, "witness": encode_vector(self.witness),
               "value": self.value, "items": items, "status": self.status, "exploratory": self.exploratory}
        out.update(self.extra)
        return out


def find_witness(instance: PlankInstance, config: MaximizerConfig | None = None,
                 distance_config: DistanceConfig | None = None) -> WitnessReport:
    """Maximise the instance objective and measure distances from the maximiser."""
    config = config or MaximizerConfig()
    distance_config = distance_config or DistanceConfig(seed=config.seed)
    if instance.domain == COMPLEX_BALL:
        r_eff = effective_radius(instance)
        start_radius = r_eff
        problem = _Problem(instance.polys, instance.weights, True, "ball", r_eff if config.clip else None, "complex")
    else:
        start_radius = None
        problem = _Problem(instance.polys, instance.weights, False, "sphere", None, "real")
    for attempt in range(2):
        rng = np.random.default_rng([config.seed, attempt])
        if problem.domain == "ball":
            sampler = _Problem(instance.polys, instance.weights, True, "ball", start_radius, "complex")
            Z0 = _sample_starts(sampler, rng, config.n_starts(instance.dimension))
        else:
            Z0 = _sample_starts(problem, rng, config.n_starts(instance.dimension))
        Z, f = ascend(problem, Z0, config)
        if np.any(np.isfinite(f)):
            break
    else:
        raise OptimizationError("all starts landed on zero sets twice")
    i = select_best(Z, f)
    witness, value = Z[i], float(f[i])
    if problem.domain == "sphere":
        witness = witness / np.linalg.norm(witness)

    items = []
    for k, (p, delta) in enumerate(zip(instance.polys, instance.deltas)):
        if instance.domain == COMPLEX_BALL:
            est = closest_point(p, witness, distance_config)
        else:
            est = closest_point_on_sphere(p, witness, distance_config)
        item = ItemReport(delta, est.distance, est.point, est.residual)
        if config.oracle and instance.domain == COMPLEX_BALL and instance.dimension <= 2:
            from .distance import brute_force_distance

            item.oracle_distance = brute_force_distance(p, witness, config.oracle_resolution)
        items.append(item)
    suspect = any(it.margin < -config.margin_tol for it in items)
    return WitnessReport(witness, value, items, SUSPECT if suspect else CERTIFIED, instance.domain,
                         config.seed, instance.exploratory)
