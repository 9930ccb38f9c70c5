"""Witnesses for unit-vector configurations in ``C^d``.

The Hermitian product is ``<a, b> = sum a_i conj(b_i)``, linear in ``a``.
Every linear form below is complex-linear in the point, so products of them
are holomorphic polynomials handled by the maximizer on the unit sphere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionMismatchError, PlankError, RankDeficientError
from .io import decode_vector, encode_vector
from .maximizer import MaximizerConfig, maximize_log_product
from .poly import MultiPoly

GRAM_CONDITION_LIMIT = 1e12


def hermitian(a, b) -> complex:
    """``<a, b>``, linear in the first argument."""
    return complex(np.vdot(np.asarray(b), np.asarray(a)))


@dataclass(frozen=True)
class VectorConfig:
    vectors: np.ndarray
    shifts: np.ndarray | None = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise PlankError("need at least one vector of dimension >= 1")
        norms = np.linalg.norm(v, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1) > 1e-12)
        if bad.size:
            raise PlankError(f"vector {int(bad[0])} is not a unit vector (|v| = {norms[bad[0]]!r})")
        object.__setattr__(self, "vectors", v)
        if self.shifts is not None:
            s = np.atleast_2d(np.asarray(self.shifts, dtype=complex))
            if s.shape != v.shape:
                raise DimensionMismatchError(v.shape[1], s.shape[-1], "shifts")
            object.__setattr__(self, "shifts", s)

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def from_json(cls, data: dict, normalize: bool = False) -> "VectorConfig":
        try:
            d = int(data["d"])
            vecs = [decode_vector(v, f"vectors[{i}]") for i, v in enumerate(data["vectors"])]
        except (KeyError, TypeError) as exc:
            raise PlankError(f"vector JSON missing field {exc}") from exc
        for i, v in enumerate(vecs):
            if len(v) != d:
                raise DimensionMismatchError(d, len(v), f"vectors[{i}]")
        V = np.array(vecs, dtype=complex)
        if normalize:
            V = V / np.linalg.norm(V, axis=1, keepdims=True)
        shifts = None
        if data.get("shifts") is not None:
            shifts = np.array([decode_vector(s, f"shifts[{i}]") for i, s in enumerate(data["shifts"])], dtype=complex)
        return cls(V, shifts)

    def to_json(self) -> dict:
        out = {"schema": 1, "d": self.d, "vectors": [encode_vector(v.astype(complex)) for v in self.vectors]}
        if self.shifts is not None:
            out["shifts"] = [encode_vector(s.astype(complex)) for s in self.shifts]
        return out


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, VectorConfig):
        return vectors.vectors
    return np.atleast_2d(np.asarray(vectors, dtype=complex))


def _check_independent(V: np.ndarray):
    gram = V @ V.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond >= GRAM_CONDITION_LIMIT:
        rank = int(np.linalg.matrix_rank(V, tol=1e-6 * np.linalg.norm(V, 2)))
        raise RankDeficientError(rank, V.shape[0])


def dual_basis(vectors) -> np.ndarray:
    """Rows ``w_j`` with ``<v_i, w_j> = delta_ij``, i.e. ``W = (V^{-1})^H``."""
    V = _as_matrix(vectors)
    if V.shape[0] != V.shape[1]:
        raise DimensionMismatchError(V.shape[1], V.shape[0], "basis size")
    _check_independent(V)
    return np.linalg.inv(V).conj().T


def _form(coeffs: np.ndarray, constant: complex = 0.0) -> MultiPoly:
    return MultiPoly.linear(np.asarray(coeffs, dtype=complex), complex(constant), field="complex")


def distance_to_span(q, vectors) -> float:
    """Euclidean distance from ``q`` to the complex span of ``vectors``."""
    q = np.asarray(q, dtype=complex)
    A = np.atleast_2d(np.asarray(vectors, dtype=complex)).T
    Q, _ = np.linalg.qr(A)
    return float(np.linalg.norm(q - Q @ (Q.conj().T @ q)))


def distance_to_line(q, v) -> float:
    """``sqrt(1 - |<v, q>|^2)`` for unit ``v`` and ``q``."""
    return math.sqrt(max(0.0, 1.0 - abs(hermitian(v, q)) ** 2))


# ---------------------------------------------------------------------------
# derandomised Steinhaus sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteinhausResult:
    q: np.ndarray
    norm_sq: float
    phases: np.ndarray
    max_inner: float

    def to_json(self) -> dict:
        return {"schema": 1, "q": encode_vector(self.q), "norm_sq": self.norm_sq,
                "phases": encode_vector(self.phases), "max_inner": self.max_inner}


def _phase_sweeps(W: np.ndarray, f: np.ndarray, sweeps: int) -> np.ndarray:
    u = f @ W
    last = np.vdot(u, u).real
    for _ in range(sweeps):
        for i in range(len(f)):
            s = u - f[i] * W[i]
            ip = np.vdot(s, W[i])  # <w_i, s>
            if abs(ip) > 0:
                f[i] = np.conj(ip) / abs(ip)
            u = s + f[i] * W[i]
        cur = np.vdot(u, u).real
        if cur <= last * (1 + 1e-15):
            break
        last = cur
    return f


def steinhaus_witness(vectors, restarts: int = 8, sweeps: int = 100, seed: int = 0) -> SteinhausResult:
    """Unit-modulus phases ``f`` with ``|sum f_i w_i|^2 >= sum |w_i|^2 >= d``.

    The first pass picks each phase to align ``f_i w_i`` with the partial sum
    (conditional expectations), which already meets the mean; coordinate
    sweeps and random restarts then only increase the norm.
    """
    V = _as_matrix(vectors)
    W = dual_basis(V)
    d = len(W)
    f = np.ones(d, dtype=complex)
    u = np.zeros(V.shape[1], dtype=complex)
    for i in range(d):
        ip = np.vdot(u, W[i])
        f[i] = np.conj(ip) / abs(ip) if abs(ip) > 0 else 1.0
        u = u + f[i] * W[i]
    best = _phase_sweeps(W, f, sweeps)
    best_val = np.vdot(best @ W, best @ W).real
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        f = np.exp(2j * np.pi * rng.random(d))
        f = _phase_sweeps(W, f, sweeps)
        val = np.vdot(f @ W, f @ W).real
        if val > best_val:
            best, best_val = f, val
    u = best @ W
    nrm = float(np.linalg.norm(u))
    q = u / nrm
    max_inner = max(abs(hermitian(v, q)) for v in V)
    return SteinhausResult(q, float(best_val), best, max_inner)


# ---------------------------------------------------------------------------
# maximiser-based witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorWitness:
    q: np.ndarray
    min_distance: float
    bound: float
    value: float = float("nan")
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.min_distance >= self.bound - 1e-6

    def to_json(self) -> dict:
        return {"schema": 1, "q": encode_vector(self.q), "min_distance": self.min_distance, "bound": self.bound,
                "margin": self.min_distance - self.bound, "log_value": self.value, "holds": self.holds,
                "note": self.note}


def _sphere_max(forms: list[MultiPoly], weights, config: MaximizerConfig) -> tuple[np.ndarray, float]:
    q, val = maximize_log_product(forms, weights, domain="sphere", field="complex", config=config)
    return q / np.linalg.norm(q), val


def span_avoidance_witness(vectors, k: int, config: MaximizerConfig | None = None) -> VectorWitness:
    """Unit ``q`` far from the span of every ``k`` of the ``d`` vectors (bound ``sqrt((d-k)/d)``)."""
    config = config or MaximizerConfig()
    V = _as_matrix(vectors)
    d = V.shape[1]
    if V.shape[0] != d:
        raise DimensionMismatchError(d, V.shape[0], "number of vectors")
    if d < 2 or not 1 <= k <= d - 1:
        raise PlankError(f"need d >= 2 and 1 <= k <= d-1, got d={d}, k={k}")
    bound = math.sqrt((d - k) / d)
    try:
        W = dual_basis(V)
    except RankDeficientError:
        q = np.linalg.svd(V)[2][-1]
        q = q / np.linalg.norm(q)
        dist = min(distance_to_span(q, V[list(s)]) for s in combinations(range(d), k))
        return VectorWitness(q, dist, bound, note="dependent vectors: q orthogonal to all")
    forms = [_form(np.conj(w)) for w in W]
    q, val = _sphere_max(forms, np.full(d, 1.0 / d), config)
    dist = min(distance_to_span(q, V[list(s)]) for s in combinations(range(d), k))
    return VectorWitness(q, dist, bound, val)


def _general_position(V: np.ndarray) -> bool:
    d = V.shape[1]
    for s in combinations(range(len(V)), d):
        sub = V[list(s)]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv[-1] < 1e-9 * sv[0]:
            return False
    return True


def hyperplane_forms(V: np.ndarray) -> list[MultiPoly]:
    """Linear forms of all hyperplanes spanned by ``d-1`` of the vectors."""
    d = V.shape[1]
    forms = []
    for s in combinations(range(len(V)), d - 1):
        c = np.linalg.svd(V[list(s)])[2][-1].conj()
        forms.append(_form(c / np.linalg.norm(c)))
    return forms


def many_vectors_witness(vectors, config: MaximizerConfig | None = None, max_n: int = 12, max_d: int = 4,
                         seed: int = 0) -> VectorWitness:
    """Unit ``q`` at distance ``>= sqrt((d-1)/n)`` from the line of each of ``n >= d`` vectors."""
    config = config or MaximizerConfig()
    V = _as_matrix(vectors).copy()
    n, d = V.shape
    if d < 2:
        raise PlankError("need d >= 2")
    if n < d:
        raise PlankError(f"need n >= d, got n={n}, d={d}")
    if n > max_n or d > max_d:
        raise PlankError(f"n={n}, d={d} exceeds the configured cap (n <= {max_n}, d <= {max_d})")
    note = ""
    if not _general_position(V):
        warnings.warn("vectors not in general position; perturbing by 1e-9", RuntimeWarning, stacklevel=2)
        rng = np.random.default_rng(seed)
        V = V + 1e-9 * (rng.standard_normal(V.shape) + 1j * rng.standard_normal(V.shape))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        note = "perturbed to general position"
    forms = hyperplane_forms(V)
    q, val = _sphere_max(forms, np.full(len(forms), 1.0 / len(forms)), config)
    V0 = _as_matrix(vectors)
    dist = min(distance_to_line(q, v) for v in V0)
    return VectorWitness(q, dist, math.sqrt((d - 1) / n), val, note)


@dataclass(frozen=True)
class PolarizationResult:
    x: np.ndarray
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value >= self.bound - 1e-9

    def to_json(self) -> dict:
        return {"schema": 1, "x": encode_vector(self.x), "value": self.value, "bound": self.bound,
                "margin": self.value - self.bound, "holds": self.holds}


def polarization_forms(us, ys=None) -> list[MultiPoly]:
    U = _as_matrix(us)
    Y = np.zeros_like(U) if ys is None else _as_matrix(ys)
    return [_form(np.conj(u), -hermitian(y, u)) for u, y in zip(U, Y)]


def polarization_witness(us, ys=None, config: MaximizerConfig | None = None) -> PolarizationResult:
    """Unit ``x`` with ``prod_k |<x - y_k, u_k>| >= d^(-d/2)``."""
    config = config or MaximizerConfig(starts=256)
    U = _as_matrix(us)
    d = U.shape[1]
    if U.shape[0] != d:
        raise DimensionMismatchError(d, U.shape[0], "number of unit vectors")
    forms = polarization_forms(U, ys)
    x, val = maximize_log_product(forms, np.ones(d), domain="sphere", field="complex", config=config)
    x = x / np.linalg.norm(x)
    value = float(np.prod([abs(f(x)) for f in forms]))
    return PolarizationResult(x, value, d ** (-d / 2))
