"""Maximiser location for trigonometric polynomials with a root at 0.

If ``Q`` has degree ``n``, a root of order ``k`` at ``0`` and ``|Q|`` peaks at
``t0``, then ``t0 >= (k!)^(1/k) / n`` and ``t0 >= k / (e n)``.  The first
bound comes from applying Bernstein's inequality ``||Q'|| <= n ||Q||`` k
times; the second is its large-power limit.  This module computes both
bounds and checks them on concrete polynomials.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PlankError, RootOrderError, ZeroPolynomialError
from .poly import TrigPoly, trig_root_order

TWO_PI = 2 * math.pi


def lemma_bounds(n: int, k: int) -> tuple[float, float]:
    """``((k!)^(1/k) / n, k / (e n))`` with the factorial taken through log-gamma."""
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise PlankError("n and k must be integers")
    if n < 1 or not 1 <= k <= n:
        raise PlankError(f"need 1 <= k <= n, got n={n}, k={k}")
    bound_a = math.exp(math.lgamma(k + 1) / k) / n
    bound_b = k / (math.e * n)
    return bound_a, bound_b


def locate_max(q: TrigPoly, samples_per_degree: int = 4096, tie_tol: float = 1e-10) -> tuple[float, float]:
    """Smallest ``t0`` in ``[0, 2pi)`` maximising ``|Q|``, and ``M = |Q(t0)|``.

    Dense scan at ``samples_per_degree * (n + 1)`` points, then Newton on
    ``Q'`` from every local maximum of the scan.
    """
    if q.is_zero:
        raise ZeroPolynomialError("zero trigonometric polynomial")
    n = q.degree
    if n == 0:
        return 0.0, abs(float(q.a[0]))
    m = samples_per_degree * (n + 1)
    ts = np.arange(m) * (TWO_PI / m)
    vals = np.abs(q(ts))
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    peaks = np.flatnonzero((vals >= left) & (vals >= right))
    dq, d2q = q.derivative(), q.derivative(2)
    h = TWO_PI / m
    t = ts[peaks].copy()
    start = t.copy()
    for _ in range(30):
        d2 = d2q(t)
        safe = d2 != 0
        step = np.where(safe, dq(t) / np.where(safe, d2, 1.0), 0.0)
        t_new = t - step
        # stay within two scan cells of the sampled peak
        t = np.where(np.abs(t_new - start) <= 2 * h, t_new, t)
        if np.all(np.abs(step) < 1e-15):
            break
    refined = np.abs(q(t))
    better = refined >= vals[peaks]
    t = np.where(better, t, start)
    refined = np.where(better, refined, vals[peaks])
    t = np.mod(t, TWO_PI)
    t = np.where(t > TWO_PI - 1e-13, 0.0, t)
    M = float(np.max(refined))
    ties = refined >= M - tie_tol * max(M, 1e-300)
    t0 = float(np.min(t[ties]))
    return t0, float(abs(q(t0)))


@dataclass(frozen=True)
class LemmaReport:
    n: int
    k: int
    t0: float
    max_value: float
    bound_a: float
    bound_b: float
    slack_a: float
    slack_b: float
    holds_a: bool
    holds_b: bool

    @property
    def holds(self) -> bool:
        return self.holds_a and self.holds_b

    def to_json(self) -> dict:
        return {"schema": 1, **asdict(self), "holds": self.holds}


def verify_lemma(q: TrigPoly, expected_k: int, tol: float = 1e-8, slack_tol: float = 1e-9) -> LemmaReport:
    """Check both lower bounds on the first maximiser of ``|Q|`` for ``Q`` with a root of order ``k`` at 0."""
    k = trig_root_order(q, 0.0, tol)
    if k != expected_k:
        raise RootOrderError(k, expected_k)
    if k < 1:
        raise RootOrderError(k, expected_k)
    n = q.degree
    bound_a, bound_b = lemma_bounds(n, k)
    t0, M = locate_max(q)
    return LemmaReport(n, k, t0, M, bound_a, bound_b, t0 - bound_a, t0 - bound_b,
                       t0 >= bound_a - slack_tol, t0 >= bound_b - slack_tol)


def bernstein_inequality_check(q: TrigPoly) -> float:
    """``||Q'|| / (n ||Q||)`` in the sup norm; 0.0 for constants (degenerate)."""
    if q.is_zero:
        raise ZeroPolynomialError("zero trigonometric polynomial")
    n = q.degree
    if n == 0:
        return 0.0
    _, m_q = locate_max(q)
    _, m_dq = locate_max(q.derivative())
    return m_dq / (n * m_q)


def sin_power(k: int) -> TrigPoly:
    return TrigPoly([0.0], [0.0, 1.0]) ** k


def forced_root_instance(rng: np.random.Generator, n: int, k: int, min_ratio: float = 0.1) -> TrigPoly:
    """``sin^k(t) R(t)`` with random ``R`` of degree ``n - k`` and ``|R(0)|`` bounded away from 0."""
    if not 1 <= k <= n:
        raise PlankError(f"need 1 <= k <= n, got n={n}, k={k}")
    m = n - k
    while True:
        a = rng.standard_normal(m + 1)
        b = rng.standard_normal(m + 1)
        b[0] = 0.0
        if m > 0 and abs(a[m]) + abs(b[m]) < 1e-3:
            continue
        r = TrigPoly(a, b)
        if abs(r(0.0)) >= min_ratio * r.max_coefficient:
            return sin_power(k) * r
