"""Sparse multivariate polynomials and trigonometric polynomials.

A :class:`MultiPoly` stores a dict ``{exponent tuple: coefficient}`` over a
field tag (``"real"`` or ``"complex"``).  Evaluation, gradients and Hessians
are vectorised over batches of points through a shared power table, which is
what the optimisers and the grid oracle need.

:class:`TrigPoly` is the univariate trigonometric polynomial
``a_0 + sum_j a_j cos(jt) + b_j sin(jt)``.  Products are computed exactly in
the exponential basis (coefficients of ``e^{ijt}``), i.e. by the multi-angle
formulas, so restrictions of polynomials to great circles come out with
exact-in-coefficients root structure.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatchError, FieldMismatchError, FrameError, PlankError, ZeroPolynomialError

FIELDS = ("real", "complex")


class Monomial(NamedTuple):
    exponents: tuple[int, ...]
    coefficient: complex | float


def _power_table(points: np.ndarray, degree: int) -> np.ndarray:
    """``table[k, :, i] = points[:, i] ** k`` for ``k = 0..degree``."""
    table = np.empty((degree + 1,) + points.shape, dtype=points.dtype)
    table[0] = 1
    for k in range(1, degree + 1):
        table[k] = table[k - 1] * points
    return table


def _eval_table(table: np.ndarray, exps: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    if len(coefs) == 0:
        return np.zeros(table.shape[1], dtype=np.result_type(table.dtype, coefs.dtype))
    d = exps.shape[1]
    mono = table[exps[:, 0], :, 0]
    for i in range(1, d):
        mono = mono * table[exps[:, i], :, i]
    return coefs @ mono


class MultiPoly:
    """Sparse polynomial in ``dimension`` variables.

    Zero coefficients are dropped.  Instances are treated as immutable; all
    arithmetic returns new objects.
    """

    def __init__(self, terms: Mapping[Sequence[int], complex] | Iterable, dimension: int, field: str = "real"):
        if field not in FIELDS:
            raise PlankError(f"unknown field {field!r}")
        if dimension < 1:
            raise PlankError("dimension must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, ...], complex] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != dimension:
                raise DimensionMismatchError(dimension, len(exp), "exponent vector")
            if any(e < 0 for e in exp):
                raise PlankError(f"negative exponent in {exp}")
            acc[exp] = acc.get(exp, 0) + c
        cleaned = {}
        for exp, c in acc.items():
            c = complex(c)
            if field == "real":
                if c.imag != 0:
                    raise FieldMismatchError(f"complex coefficient {c} in a real polynomial")
                c = c.real
            if c != 0:
                cleaned[exp] = c
        self._terms = dict(sorted(cleaned.items()))
        self.dimension = dimension
        self.field = field

    # construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, c, dimension: int, field: str = "real") -> "MultiPoly":
        return cls({(0,) * dimension: c}, dimension, field)

    @classmethod
    def variable(cls, i: int, dimension: int, field: str = "real") -> "MultiPoly":
        exp = [0] * dimension
        exp[i] = 1
        return cls({tuple(exp): 1.0}, dimension, field)

    @classmethod
    def linear(cls, coeffs: Sequence[complex], constant: complex = 0.0, field: str | None = None) -> "MultiPoly":
        """``sum_i coeffs[i] z_i + constant``."""
        coeffs = np.asarray(coeffs)
        d = len(coeffs)
        if field is None:
            field = "complex" if np.iscomplexobj(coeffs) or isinstance(constant, complex) else "real"
        terms = {(0,) * d: constant}
        for i, c in enumerate(coeffs):
            e = [0] * d
            e[i] = 1
            terms[tuple(e)] = c
        return cls(terms, d, field)

    # basic properties -----------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def monomials(self) -> Iterator[Monomial]:
        for exp, c in self._terms.items():
            yield Monomial(exp, c)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @cached_property
    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    @cached_property
    def exps(self) -> np.ndarray:
        if not self._terms:
            return np.zeros((0, self.dimension), dtype=np.intp)
        return np.array(list(self._terms), dtype=np.intp)

    @cached_property
    def coefs(self) -> np.ndarray:
        dtype = float if self.field == "real" else complex
        return np.array(list(self._terms.values()), dtype=dtype)

    @cached_property
    def coefficient_scale(self) -> float:
        """Largest coefficient modulus (1.0 for the zero polynomial)."""
        return float(np.max(np.abs(self.coefs))) if self._terms else 1.0

    @property
    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def as_complex(self) -> "MultiPoly":
        if self.field == "complex":
            return self
        return MultiPoly(self._terms, self.dimension, "complex")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.dimension == other.dimension and self._terms == other._terms

    def __hash__(self):
        return hash((self.dimension, tuple(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return f"MultiPoly(0, d={self.dimension})"
        parts = []
        for exp, c in self._terms.items():
            mono = "*".join(f"z{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exp) if e)
            parts.append(f"({c:g})" + (f"*{mono}" if mono else ""))
        return f"MultiPoly({' + '.join(parts)}, d={self.dimension}, {self.field})"

    def allclose(self, other: "MultiPoly", atol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return self.dimension == other.dimension and all(
            abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= atol for k in keys
        )

    # arithmetic -----------------------------------------------------------

    def _join_field(self, other: "MultiPoly") -> str:
        if self.dimension != other.dimension:
            raise DimensionMismatchError(self.dimension, other.dimension, "polynomial")
        return "complex" if "complex" in (self.field, other.field) else "real"

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        field = "complex" if isinstance(other, complex) else self.field
        return MultiPoly.constant(other, self.dimension, field)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        field = self._join_field(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(out, self.dimension, field)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({e: -c for e, c in self._terms.items()}, self.dimension, self.field)

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        field = self._join_field(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(out, self.dimension, field)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise PlankError("negative power")
        result = MultiPoly.constant(1.0, self.dimension, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, i: int) -> "MultiPoly":
        out = {}
        for exp, c in self._terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return MultiPoly(out, self.dimension, self.field)

    def compose_linear(self, matrix, shift=None) -> "MultiPoly":
        """Return ``z -> P(matrix @ z + shift)``."""
        matrix = np.asarray(matrix)
        if matrix.shape != (self.dimension, self.dimension):
            raise DimensionMismatchError(self.dimension, matrix.shape[0], "matrix")
        field = "complex" if (self.field == "complex" or np.iscomplexobj(matrix)
                              or (shift is not None and np.iscomplexobj(shift))) else "real"
        shift = np.zeros(self.dimension) if shift is None else np.asarray(shift)
        forms = [MultiPoly.linear(matrix[i], shift[i], field=field) for i in range(self.dimension)]
        result = MultiPoly({}, self.dimension, field)
        for exp, c in self._terms.items():
            term = MultiPoly.constant(c, self.dimension, field)
            for i, e in enumerate(exp):
                if e:
                    term = term * forms[i] ** e
            result = result + term
        return result

    # evaluation -----------------------------------------------------------

    def _points(self, points) -> np.ndarray:
        pts = np.asarray(points)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dimension:
            raise DimensionMismatchError(self.dimension, pts.shape[-1])
        if self.field == "complex" or np.iscomplexobj(pts):
            return pts.astype(complex)
        return pts.astype(float)

    @cached_property
    def _grad_data(self):
        return [(p.exps, p.coefs) for p in (self.derivative(i) for i in range(self.dimension))]

    @cached_property
    def _hess_data(self):
        out = {}
        for i in range(self.dimension):
            di = self.derivative(i)
            for j in range(i, self.dimension):
                dij = di.derivative(j)
                out[i, j] = (dij.exps, dij.coefs)
        return out

    def evaluate_many(self, points) -> np.ndarray:
        pts = self._points(points)
        table = _power_table(pts, max(self.degree, 0))
        return _eval_table(table, self.exps, self.coefs)

    def __call__(self, point):
        pts = np.asarray(point)
        vals = self.evaluate_many(pts)
        return vals[0] if pts.ndim == 1 else vals

    def value_and_grad_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(K,)`` and holomorphic/real gradients ``(K, d)``."""
        pts = self._points(points)
        table = _power_table(pts, max(self.degree, 0))
        vals = _eval_table(table, self.exps, self.coefs)
        grads = np.empty(pts.shape, dtype=vals.dtype)
        for i, (e, c) in enumerate(self._grad_data):
            grads[:, i] = _eval_table(table, e, c) if len(c) else 0
        return vals, grads

    def hessian_many(self, points) -> np.ndarray:
        pts = self._points(points)
        table = _power_table(pts, max(self.degree, 0))
        d = self.dimension
        out = np.zeros((pts.shape[0], d, d), dtype=pts.dtype if self.field == "complex" else np.result_type(pts.dtype, float))
        for (i, j), (e, c) in self._hess_data.items():
            if len(c):
                v = _eval_table(table, e, c)
                out[:, i, j] = v
                out[:, j, i] = v
        return out

    def majorant_hessian_norm(self, radii) -> np.ndarray:
        """Frobenius bound on the Hessian over polydiscs ``|z_i| <= radii[:, i]``.

        Uses the majorant polynomial with coefficients ``|c|``; valid in both
        fields.
        """
        radii = np.asarray(radii, dtype=float)
        if radii.ndim == 1:
            radii = radii[None, :]
        table = _power_table(radii, max(self.degree, 0))
        total = np.zeros(radii.shape[0])
        for (i, j), (e, c) in self._hess_data.items():
            if len(c):
                v = _eval_table(table, e, np.abs(c))
                total += v * v * (1 if i == j else 2)
        return np.sqrt(total)

    # JSON -----------------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for exp, c in self._terms.items():
            t = {"exp": list(exp), "re": float(np.real(c))}
            if self.field == "complex" and np.imag(c) != 0:
                t["im"] = float(np.imag(c))
            terms.append(t)
        return {"dimension": self.dimension, "field": self.field, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        try:
            d = int(data["dimension"])
            field = data.get("field", "real")
            terms = []
            for t in data["terms"]:
                c = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
                if field == "real" and c.imag != 0:
                    raise FieldMismatchError("nonzero 'im' in a real polynomial")
                terms.append((t["exp"], c))
        except (KeyError, TypeError) as exc:
            raise PlankError(f"malformed polynomial JSON: {exc}") from exc
        return cls(terms, d, field)


def evaluate(poly: MultiPoly, point) -> complex | float:
    """``P(point)``; real points are embedded into complex polynomials."""
    pt = np.asarray(point)
    if pt.ndim != 1 or pt.shape[0] != poly.dimension:
        raise DimensionMismatchError(poly.dimension, pt.shape[-1] if pt.ndim else 0)
    v = poly.evaluate_many(pt[None, :])[0]
    return complex(v) if np.iscomplexobj(v) else float(v)


def gradient(poly: MultiPoly, point) -> np.ndarray:
    pt = np.asarray(point)
    if pt.ndim != 1 or pt.shape[0] != poly.dimension:
        raise DimensionMismatchError(poly.dimension, pt.shape[-1] if pt.ndim else 0)
    return poly.value_and_grad_many(pt[None, :])[1][0]


def homogenize(poly: MultiPoly, delta0: float = 1.0) -> MultiPoly:
    """Homogenise with a new leading variable ``z0`` scaled by ``delta0``.

    Each monomial ``c z^m`` becomes ``c (z0/delta0)^(deg P - |m|) z^m``, so the
    result evaluated at ``z0 = delta0`` is ``P``.
    """
    if poly.is_zero:
        raise ZeroPolynomialError("cannot homogenize the zero polynomial")
    if not delta0 > 0:
        raise PlankError("delta0 must be positive")
    n = poly.degree
    out = {}
    for exp, c in poly._terms.items():
        deficit = n - sum(exp)
        out[(deficit,) + exp] = c / delta0**deficit
    return MultiPoly(out, poly.dimension + 1, poly.field)


# ---------------------------------------------------------------------------
# Trigonometric polynomials
# ---------------------------------------------------------------------------


class TrigPoly:
    """``Q(t) = sum_{j=0}^n a_j cos(jt) + sum_{j=1}^n b_j sin(jt)``.

    ``b[0]`` is stored as 0 so both arrays have length ``n + 1``.  Trailing
    coefficient pairs below ``trim_tol`` times the largest coefficient are
    dropped, so ``degree`` is the true degree up to round-off.
    """

    def __init__(self, a: Sequence[float], b: Sequence[float] | None = None, trim_tol: float = 1e-13):
        a = np.array(a, dtype=float).ravel()
        if b is None:
            b = np.zeros_like(a)
        b = np.array(b, dtype=float).ravel()
        if len(b) == len(a) - 1:
            b = np.concatenate([[0.0], b])
        n = max(len(a), len(b))
        a = np.pad(a, (0, n - len(a)))
        b = np.pad(b, (0, n - len(b)))
        if n == 0:
            a = b = np.zeros(1)
        b[0] = 0.0
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
        cut = trim_tol * scale
        m = len(a)
        while m > 1 and abs(a[m - 1]) <= cut and abs(b[m - 1]) <= cut:
            m -= 1
        self.a = a[:m].copy()
        self.b = b[:m].copy()
        self.a.flags.writeable = False
        self.b.flags.writeable = False

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.a) or np.any(self.b))

    @property
    def max_coefficient(self) -> float:
        return float(max(np.max(np.abs(self.a)), np.max(np.abs(self.b))))

    def __repr__(self) -> str:
        return f"TrigPoly(a={self.a.tolist()}, b={self.b[1:].tolist()})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        j = np.arange(len(self.a))
        jt = np.multiply.outer(t, j)
        return np.cos(jt) @ self.a + np.sin(jt) @ self.b

    def derivative(self, order: int = 1) -> "TrigPoly":
        a, b = self.a, self.b
        j = np.arange(len(a), dtype=float)
        for _ in range(order):
            a, b = j * b, -j * a
        return TrigPoly(a, b, trim_tol=0.0)

    def exp_coefficients(self) -> np.ndarray:
        """Coefficients ``c_{-n..n}`` of ``e^{ijt}`` as a length ``2n+1`` array."""
        n = self.degree
        c = np.zeros(2 * n + 1, dtype=complex)
        c[n] = self.a[0]
        pos = (self.a[1:] - 1j * self.b[1:]) / 2
        c[n + 1:] = pos
        c[:n] = np.conj(pos)[::-1]
        return c

    @classmethod
    def from_exp_coefficients(cls, c: np.ndarray, trim_tol: float = 1e-13) -> "TrigPoly":
        c = np.asarray(c, dtype=complex)
        n = (len(c) - 1) // 2
        a = np.empty(n + 1)
        b = np.zeros(n + 1)
        a[0] = c[n].real
        a[1:] = 2 * c[n + 1:].real
        b[1:] = -2 * c[n + 1:].imag
        return cls(a, b, trim_tol=trim_tol)

    def __mul__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            return TrigPoly(self.a * float(other), self.b * float(other), trim_tol=0.0)
        return TrigPoly.from_exp_coefficients(np.convolve(self.exp_coefficients(), other.exp_coefficients()))

    __rmul__ = __mul__

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        n = max(len(self.a), len(other.a))
        a = np.pad(self.a, (0, n - len(self.a))) + np.pad(other.a, (0, n - len(other.a)))
        b = np.pad(self.b, (0, n - len(self.b))) + np.pad(other.b, (0, n - len(other.b)))
        return TrigPoly(a, b)

    def __pow__(self, k: int) -> "TrigPoly":
        out = TrigPoly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def roots(self, tol: float = 1e-6) -> np.ndarray:
        """Real roots in ``[0, 2pi)``, sorted, from the degree-2n companion polynomial."""
        if self.is_zero:
            raise ZeroPolynomialError("zero trigonometric polynomial has no isolated roots")
        n = self.degree
        if n == 0:
            return np.zeros(0)
        c = self.exp_coefficients()
        # zeta^n Q(t) = sum_k c_{k-n} zeta^k; np.roots wants highest power first
        zs = np.roots(c[::-1])
        zs = zs[np.abs(np.abs(zs) - 1) < tol]
        ts = np.mod(np.angle(zs), 2 * np.pi)
        scale = np.sum(np.abs(self.a)) + np.sum(np.abs(self.b))
        dq = self.derivative()
        out = []
        for t in ts:
            for _ in range(4):
                d = dq(t)
                if d == 0:
                    break
                step = self(t) / d
                if abs(step) > 1e-3:
                    break
                t -= step
            if abs(self(t)) <= 1e-9 * scale:
                out.append(float(np.mod(t, 2 * np.pi)))
        return np.unique(np.round(np.sort(out), 13)) if out else np.zeros(0)


def _linear_trig(p: float, q: float) -> TrigPoly:
    return TrigPoly([0.0, p], [0.0, q], trim_tol=0.0)


def restrict_to_great_circle(poly: MultiPoly, p, q, tol: float = 1e-12) -> TrigPoly:
    """Expand ``t -> P(cos t p + sin t q)`` as a trigonometric polynomial."""
    if poly.field != "real":
        raise FieldMismatchError("great-circle restriction needs a real polynomial")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != (poly.dimension,) or q.shape != (poly.dimension,):
        raise DimensionMismatchError(poly.dimension, p.shape[-1], "frame vector")
    np_, nq, ip = float(np.linalg.norm(p)), float(np.linalg.norm(q)), float(p @ q)
    if abs(np_ - 1) > tol or abs(nq - 1) > tol or abs(ip) > tol:
        raise FrameError(np_, nq, ip)
    forms = [_linear_trig(p[i], q[i]) for i in range(poly.dimension)]
    max_e = max(poly.degree, 0)
    powers = []
    for f in forms:
        pw = [TrigPoly([1.0])]
        for _ in range(max_e):
            pw.append(pw[-1] * f)
        powers.append(pw)
    total = np.zeros(2 * max_e + 1, dtype=complex)
    for exp, c in poly._terms.items():
        term = TrigPoly([c])
        for i, e in enumerate(exp):
            if e:
                term = term * powers[i][e]
        ec = term.exp_coefficients()
        m = (len(ec) - 1) // 2
        total[max_e - m:max_e + m + 1] += ec
    return TrigPoly.from_exp_coefficients(total)


def restrict_to_complex_line(poly: MultiPoly, base, direction, tol: float = 1e-12) -> np.polynomial.Polynomial:
    """Dense polynomial ``w -> P(base + w * direction)`` (ascending coefficients)."""
    base = np.asarray(base, dtype=complex)
    direction = np.asarray(direction, dtype=complex)
    if base.shape != (poly.dimension,) or direction.shape != (poly.dimension,):
        raise DimensionMismatchError(poly.dimension, direction.shape[-1], "line")
    nrm = float(np.linalg.norm(direction))
    if nrm == 0:
        raise PlankError("zero direction")
    if abs(nrm - 1) > tol:
        raise PlankError(f"direction must have unit norm, got {nrm!r}")
    return _line_coefficients(poly, base, direction).trim(0)


def _line_coefficients(poly: MultiPoly, base, direction) -> np.polynomial.Polynomial:
    from numpy.polynomial import polynomial as npp

    n = max(poly.degree, 0)
    powers = []
    for i in range(poly.dimension):
        lin = np.array([base[i], direction[i]])
        pw = [np.array([1.0 + 0j])]
        for _ in range(n):
            pw.append(npp.polymul(pw[-1], lin))
        powers.append(pw)
    total = np.zeros(n + 1, dtype=complex)
    for exp, c in poly._terms.items():
        term = np.array([c], dtype=complex)
        for i, e in enumerate(exp):
            if e:
                term = npp.polymul(term, powers[i][e])
        total[: len(term)] += term
    if poly.field == "real" and not np.any(np.imag(base)) and not np.any(np.imag(direction)):
        total = total.real
    return np.polynomial.Polynomial(total)


def trig_root_order(q: TrigPoly, t: float = 0.0, tol: float = 1e-8) -> int:
    """Multiplicity of the root of ``q`` at ``t``.

    Each derivative is tested against ``tol`` times its own largest
    coefficient, so the growth ``j^k`` of differentiated coefficients does
    not swamp the test.
    """
    if q.is_zero:
        raise ZeroPolynomialError("root order of the zero trigonometric polynomial is undefined")
    k = 0
    cur = q
    limit = 2 * q.degree + 1
    while k <= limit:
        scale = cur.max_coefficient
        if scale == 0 or abs(cur(t)) > tol * scale:
            return k
        k += 1
        cur = cur.derivative()
    return k


def random_unit(rng: np.random.Generator, d: int, field: str = "real", size: int | None = None) -> np.ndarray:
    shape = (d,) if size is None else (size, d)
    v = rng.standard_normal(shape)
    if field == "complex":
        v = v + 1j * rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_poly(rng: np.random.Generator, d: int, degree: int, field: str = "complex",
                density: float = 1.0) -> MultiPoly:
    """Gaussian-coefficient polynomial with exact degree ``degree``."""
    from itertools import product

    exps = [e for e in product(range(degree + 1), repeat=d) if sum(e) <= degree]
    while True:
        terms = {}
        for e in exps:
            if sum(e) == degree or rng.random() < density:
                c = rng.standard_normal()
                if field == "complex":
                    c = complex(c, rng.standard_normal())
                terms[e] = c
        p = MultiPoly(terms, d, field)
        if p.degree == degree:
            return p

