"""Cylinders in ``C^d`` and points of a ball left uncovered by them.

A cylinder ``{z : |<z - y, u>| <= delta}`` is the zero set of the linear
form ``P(z) = <z - y, u>`` thickened by ``delta``.  If the squared widths sum
to less than ``R^2``, widths are inflated until the budget is exactly
``R^2`` and the plank maximiser yields a point outside every cylinder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, PlankError
from .io import decode_vector, encode_vector
from .maximizer import CERTIFIED, MaximizerConfig, WitnessReport, find_witness
from .objective import PlankInstance
from .poly import MultiPoly

NOT_VIOLATED = "budget_not_violated"
UNCOVERED = "uncovered_witness"


@dataclass(frozen=True)
class Cylinder:
    u: np.ndarray
    y: np.ndarray
    delta: float

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=complex))
        y = np.atleast_1d(np.asarray(self.y, dtype=complex))
        if u.shape != y.shape:
            raise DimensionMismatchError(len(u), len(y), "cylinder center")
        if abs(np.linalg.norm(u) - 1) > 1e-12:
            raise PlankError(f"cylinder direction must be a unit vector, |u| = {np.linalg.norm(u)!r}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise PlankError(f"cylinder width must be positive, got {self.delta!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def dimension(self) -> int:
        return len(self.u)

    def linear_form(self) -> MultiPoly:
        """``z -> <z - y, u>``; complex-linear in ``z``."""
        c = np.conj(self.u)
        return MultiPoly.linear(c, -complex(np.dot(self.y, c)), field="complex")

    def to_json(self) -> dict:
        return {"u": encode_vector(self.u), "y": encode_vector(self.y), "delta": self.delta}

    @classmethod
    def from_json(cls, data: dict, where: str = "cylinder") -> "Cylinder":
        try:
            u = decode_vector(data["u"], f"{where}.u")
            y = decode_vector(data["y"], f"{where}.y")
            delta = float(data["delta"])
        except KeyError as exc:
            raise PlankError(f"{where}: missing field {exc}") from exc
        except TypeError as exc:
            raise PlankError(f"{where}: {exc}") from exc
        try:
            return cls(u, y, delta)
        except PlankError as exc:
            raise PlankError(f"{where}: {exc}") from exc


def membership(c: Cylinder, z) -> tuple[float, bool]:
    """``(|<z - y, u>| - delta, inside)``; a negative margin means inside."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != c.u.shape:
        raise DimensionMismatchError(c.dimension, len(z), "point")
    margin = abs(np.vdot(c.u, z - c.y)) - c.delta
    return float(margin), bool(margin <= 0)


@dataclass
class CoveringResult:
    status: str
    radius: float
    width_sq_sum: float
    witness: np.ndarray | None = None
    margins: list[float] = field(default_factory=list)
    inflated: list[float] = field(default_factory=list)
    report: WitnessReport | None = None

    @property
    def found(self) -> bool:
        return self.status == UNCOVERED

    def to_json(self) -> dict:
        out = {"schema": 1, "status": self.status, "radius": self.radius, "width_sq_sum": self.width_sq_sum}
        if self.witness is not None:
            out.update({"witness": encode_vector(self.witness), "norm": float(np.linalg.norm(self.witness)),
                        "margins": self.margins, "inflated_deltas": self.inflated})
        if self.report is not None:
            out["seed"] = self.report.seed
            out["plank_status"] = self.report.status
        return out


def uncovered_witness(cylinders: Sequence[Cylinder], R: float, config: MaximizerConfig | None = None) -> CoveringResult:
    """A point of the closed ``R``-ball outside every cylinder when ``sum delta^2 < R^2``."""
    config = config or MaximizerConfig()
    cylinders = list(cylinders)
    if not cylinders:
        raise PlankError("need at least one cylinder")
    if not R > 0:
        raise PlankError(f"radius must be positive, got {R!r}")
    d = cylinders[0].dimension
    for k, c in enumerate(cylinders):
        if c.dimension != d:
            raise DimensionMismatchError(d, c.dimension, f"cylinder {k}")
    deltas = np.array([c.delta for c in cylinders])
    total = float(np.sum(deltas**2))
    if total >= R * R - 1e-12 * max(1.0, R * R):
        return CoveringResult(NOT_VIOLATED, float(R), total)
    inflated = deltas * (R / math.sqrt(total))
    instance = PlankInstance.complex_ball([c.linear_form() for c in cylinders], inflated, R)
    report = find_witness(instance, config)
    z = report.witness
    margins = [membership(c, z)[0] for c in cylinders]
    ok = report.status == CERTIFIED and min(margins) > 0
    return CoveringResult(UNCOVERED if ok else report.status, float(R), total, z, margins,
                          inflated.tolist(), report)


def grid_uncovered_1d(cylinders: Sequence[Cylinder], R: float, n: int = 1000) -> tuple[np.ndarray, float]:
    """Best point of an ``n x n`` grid over the disk ``|z| <= R`` in ``C^1``; returns (point, min margin)."""
    xs = np.linspace(-R, R, n)
    Z = (xs[:, None] + 1j * xs[None, :]).ravel()
    Z = Z[np.abs(Z) <= R]
    m = np.full(len(Z), np.inf)
    for c in cylinders:
        if c.dimension != 1:
            raise DimensionMismatchError(1, c.dimension, "cylinder")
        m = np.minimum(m, np.abs((Z - c.y[0]) * np.conj(c.u[0])) - c.delta)
    i = int(np.argmax(m))
    return np.array([Z[i]]), float(m[i])
