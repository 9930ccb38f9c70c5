"""Plank instances and their log-domain objectives.

Complex ball mode maximises ``-|z|^2/2 + sum_k delta_k^2 log|P_k(z)|`` over
``C^d``; real sphere mode maximises ``sum_k delta_k log|P_k(x)|`` over the
unit sphere.  Gradients of the complex objective are returned as complex
vectors ``g = d/dx + i d/dy`` (real coordinates ``z = x + iy`` packed into a
complex number), which is the convention used throughout the optimisers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetError, DimensionMismatchError, DomainError, FieldMismatchError, OnVarietyError, PlankError, ZeroPolynomialError
from .poly import MultiPoly

COMPLEX_BALL = "complex_ball"
REAL_SPHERE = "real_sphere"
SPHERE_BUDGET = 1 / math.e
EXPLORATORY_SPHERE_BUDGET = math.pi / 2
BUDGET_SLACK = 1e-12


@dataclass(frozen=True)
class PlankInstance:
    """Polynomials with widths on a complex ball or the real unit sphere.

    ``radius`` is only used in complex ball mode.  Real-field polynomials in
    complex ball mode are promoted to complex coefficients.
    """

    domain: str
    polys: tuple[MultiPoly, ...]
    deltas: tuple[float, ...]
    radius: float | None = None
    exploratory: bool = False
    check_seed: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.domain not in (COMPLEX_BALL, REAL_SPHERE):
            raise DomainError(f"unknown domain {self.domain!r}")
        polys = tuple(self.polys)
        deltas = tuple(float(x) for x in self.deltas)
        if not polys:
            raise PlankError("instance needs at least one polynomial")
        if len(polys) != len(deltas):
            raise PlankError(f"{len(polys)} polynomials but {len(deltas)} widths")
        d = polys[0].dimension
        for k, (p, delta) in enumerate(zip(polys, deltas)):
            if p.dimension != d:
                raise DimensionMismatchError(d, p.dimension, f"item {k} polynomial")
            if p.is_zero:
                raise ZeroPolynomialError(index=k)
            if not (delta > 0 and math.isfinite(delta)):
                raise PlankError(f"item {k}: width must be positive, got {delta!r}")
        if self.domain == COMPLEX_BALL:
            if self.radius is None or not self.radius > 0:
                raise PlankError("complex_ball needs a positive radius R")
            polys = tuple(p.as_complex() for p in polys)
        else:
            for k, p in enumerate(polys):
                if p.field != "real":
                    raise FieldMismatchError(f"item {k}: real_sphere needs real polynomials")
        object.__setattr__(self, "polys", polys)
        object.__setattr__(self, "deltas", deltas)
        self._check_budget()
        if self.domain == REAL_SPHERE:
            self._check_sphere_restrictions()

    # construction ---------------------------------------------------------

    @classmethod
    def complex_ball(cls, polys: Sequence[MultiPoly], deltas: Sequence[float], radius: float,
                     exploratory: bool = False) -> "PlankInstance":
        return cls(COMPLEX_BALL, tuple(polys), tuple(deltas), float(radius), exploratory)

    @classmethod
    def real_sphere(cls, polys: Sequence[MultiPoly], deltas: Sequence[float],
                    exploratory: bool = False) -> "PlankInstance":
        return cls(REAL_SPHERE, tuple(polys), tuple(deltas), None, exploratory)

    # properties -----------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.polys[0].dimension

    @property
    def field(self) -> str:
        return "complex" if self.domain == COMPLEX_BALL else "real"

    @property
    def weights(self) -> np.ndarray:
        """Exponent of each factor: ``delta^2`` (ball) or ``delta`` (sphere)."""
        d = np.array(self.deltas)
        return d * d if self.domain == COMPLEX_BALL else d

    @property
    def budget(self) -> float:
        degs = np.array([p.degree for p in self.polys], dtype=float)
        return float(self.weights @ degs)

    @property
    def budget_limit(self) -> float:
        if self.domain == COMPLEX_BALL:
            return self.radius**2
        return EXPLORATORY_SPHERE_BUDGET if self.exploratory else SPHERE_BUDGET

    def _check_budget(self):
        limit = self.budget_limit
        if self.exploratory and self.domain == COMPLEX_BALL:
            return
        if self.budget > limit + BUDGET_SLACK * max(1.0, limit):
            kind = "sum delta_k^2 deg P_k" if self.domain == COMPLEX_BALL else "sum delta_k deg P_k"
            raise BudgetError(self.budget, limit, kind)

    def _check_sphere_restrictions(self):
        d = self.dimension
        rng = np.random.default_rng(self.check_seed)
        x = rng.standard_normal((64 * d, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        for k, p in enumerate(self.polys):
            vals = np.abs(p.evaluate_many(x))
            if np.all(vals <= 1e-12 * p.coefficient_scale):
                raise ZeroPolynomialError("polynomial vanishes on the unit sphere", index=k)

    # JSON -----------------------------------------------------------------

    def to_json(self) -> dict:
        dom = {"type": self.domain}
        if self.domain == COMPLEX_BALL:
            dom["R"] = self.radius
        return {
            "schema": 1,
            "domain": dom,
            "items": [{"poly": p.to_json(), "delta": dl} for p, dl in zip(self.polys, self.deltas)],
            "exploratory": self.exploratory,
        }

    @classmethod
    def from_json(cls, data: dict, exploratory: bool | None = None) -> "PlankInstance":
        try:
            dom = data["domain"]
            items = data["items"]
        except (KeyError, TypeError) as exc:
            raise PlankError(f"instance JSON missing field {exc}") from exc
        polys, deltas = [], []
        for k, it in enumerate(items):
            try:
                poly = MultiPoly.from_json(it["poly"])
                delta = float(it["delta"])
            except KeyError as exc:
                raise PlankError(f"items[{k}]: missing field {exc}") from exc
            except PlankError as exc:
                raise PlankError(f"items[{k}].poly: {exc}") from exc
            if poly.is_zero:
                raise ZeroPolynomialError(index=k)
            polys.append(poly)
            deltas.append(delta)
        flag = bool(data.get("exploratory", False)) if exploratory is None else exploratory
        kind = dom.get("type") if isinstance(dom, dict) else None
        if kind == COMPLEX_BALL:
            if "R" not in dom:
                raise PlankError("domain.R missing for complex_ball")
            return cls.complex_ball(polys, deltas, float(dom["R"]), flag)
        if kind == REAL_SPHERE:
            return cls.real_sphere(polys, deltas, flag)
        raise DomainError(f"domain.type must be {COMPLEX_BALL!r} or {REAL_SPHERE!r}, got {kind!r}")


# ---------------------------------------------------------------------------
# batched evaluation shared with the maximizer
# ---------------------------------------------------------------------------


def log_product_batch(polys: Sequence[MultiPoly], weights, points: np.ndarray, gaussian: bool,
                      with_grad: bool = True):
    """Values and ambient gradients of ``[-|z|^2/2] + sum w_k log|P_k|`` on a batch.

    Rows where some ``P_k`` vanishes get value ``-inf`` and a NaN gradient.
    """
    pts = np.asarray(points)
    cplx = np.iscomplexobj(pts)
    K = pts.shape[0]
    val = np.zeros(K)
    grad = np.zeros(pts.shape, dtype=pts.dtype) if with_grad else None
    if gaussian:
        val -= 0.5 * np.sum(np.abs(pts) ** 2, axis=1)
        if with_grad:
            grad -= pts
    with np.errstate(divide="ignore", invalid="ignore"):
        for p, w in zip(polys, weights):
            if with_grad:
                v, g = p.value_and_grad_many(pts)
                ratio = g / v[:, None]
                grad += w * (np.conj(ratio) if cplx else ratio.real)
            else:
                v = p.evaluate_many(pts)
            val += w * np.log(np.abs(v))
    return val, grad


def _check_point(instance: PlankInstance, point) -> np.ndarray:
    pt = np.asarray(point)
    if pt.ndim != 1 or pt.shape[0] != instance.dimension:
        raise DimensionMismatchError(instance.dimension, pt.shape[-1] if pt.ndim else 0)
    if instance.domain == REAL_SPHERE:
        if np.iscomplexobj(pt):
            if np.any(pt.imag):
                raise FieldMismatchError("real_sphere points must be real")
            pt = pt.real
        pt = pt.astype(float)
        nrm = np.linalg.norm(pt)
        if abs(nrm - 1) > 1e-9:
            raise DomainError(f"point must lie on the unit sphere, |x| = {nrm!r}")
        return pt
    return pt.astype(complex)


def log_objective(instance: PlankInstance, point) -> float:
    """Log of the theorem objective; ``-inf`` on any zero set."""
    pt = _check_point(instance, point)
    val, _ = log_product_batch(instance.polys, instance.weights, pt[None, :],
                               gaussian=instance.domain == COMPLEX_BALL, with_grad=False)
    return float(val[0])


def log_objective_gradient(instance: PlankInstance, point) -> np.ndarray:
    """Gradient of :func:`log_objective`.

    Complex ball: complex vector ``-z + sum delta^2 conj(grad P / P)`` packing
    the 2d real partial derivatives.  Real sphere: tangential gradient
    ``(I - x x^T) sum delta grad P / P``.
    """
    pt = _check_point(instance, point)
    for k, p in enumerate(instance.polys):
        if p(pt) == 0:
            raise OnVarietyError(k)
    gaussian = instance.domain == COMPLEX_BALL
    _, g = log_product_batch(instance.polys, instance.weights, pt[None, :], gaussian=gaussian)
    g = g[0]
    if instance.domain == REAL_SPHERE:
        g = g - (g @ pt) * pt
    return g


def complex_to_real(v) -> np.ndarray:
    """Interleave ``(Re, Im)`` coordinates: ``C^d -> R^{2d}``."""
    v = np.asarray(v, dtype=complex)
    return np.stack([v.real, v.imag], axis=-1).reshape(v.shape[:-1] + (2 * v.shape[-1],))


def real_to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    pairs = v.reshape(v.shape[:-1] + (v.shape[-1] // 2, 2))
    return pairs[..., 0] + 1j * pairs[..., 1]


def effective_radius(instance: PlankInstance) -> float:
    """``sqrt(sum delta_k^2 deg P_k)``: the ball holding every global maximiser."""
    if instance.domain != COMPLEX_BALL:
        raise DomainError("effective radius is defined for complex_ball instances only")
    return math.sqrt(instance.budget)
