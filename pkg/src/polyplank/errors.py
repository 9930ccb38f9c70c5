"""Exception types raised by polyplank.

Every error derives from :class:`PlankError` (itself a ``ValueError``) and
carries the offending quantities as attributes so callers and the CLI can
report them without parsing messages.
"""

from __future__ import annotations


class PlankError(ValueError):
    """Base class for all input and contract violations."""


class DimensionMismatchError(PlankError):
    def __init__(self, expected: int, got: int, what: str = "point"):
        self.expected = expected
        self.got = got
        self.what = what
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class FieldMismatchError(PlankError):
    pass


class ZeroPolynomialError(PlankError):
    def __init__(self, message: str = "zero polynomial not allowed", index: int | None = None):
        self.index = index
        if index is not None:
            message = f"item {index}: {message}"
        super().__init__(message)


class BudgetError(PlankError):
    """Width budget exceeded for a non-exploratory instance."""

    def __init__(self, budget: float, limit: float, kind: str):
        self.budget = budget
        self.limit = limit
        self.kind = kind
        super().__init__(f"width budget violated: {kind} = {budget!r} > {limit!r}")


class DomainError(PlankError):
    pass


class OnVarietyError(PlankError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"point lies on the zero set of item {index}")


class FrameError(PlankError):
    def __init__(self, norm_p: float, norm_q: float, inner: float):
        self.norm_p = norm_p
        self.norm_q = norm_q
        self.inner = inner
        super().__init__(
            f"frame not orthonormal: |p|={norm_p!r}, |q|={norm_q!r}, p.q={inner!r}"
        )


class RankDeficientError(PlankError):
    def __init__(self, rank: int, size: int):
        self.rank = rank
        self.size = size
        super().__init__(f"vectors are linearly dependent: numerical rank {rank} < {size}")


class RootOrderError(PlankError):
    def __init__(self, detected: int, expected: int):
        self.detected = detected
        self.expected = expected
        super().__init__(f"root order at 0 is {detected}, expected {expected}")


class OptimizationError(PlankError):
    pass


class GridTooLargeError(PlankError):
    def __init__(self, real_dim: int, limit: int = 4):
        self.real_dim = real_dim
        super().__init__(f"brute-force grid needs real dimension <= {limit}, got {real_dim}")
