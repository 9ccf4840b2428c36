"""Fixed-point binary encodings and lowering of quadratic expressions to QUBO.

A bounded real ``x in [lo, hi]`` is written as an affine function of ``bits``
binary variables::

    x = lo + (hi - lo) / (2**bits - 1) * sum_k 2**k b_k

so both endpoints are exactly representable.  Expressions built from these
affine forms (sums, scalar multiples, products of two affine forms) are
lowered into a :class:`~l1qubo.qubo.QuboModel` using ``b**2 == b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, DomainError, UnsupportedDegreeError
from .qubo import QuboBuilder, QuboModel

__all__ = [
    "VarAllocator",
    "FixedPointEncoding",
    "AffineExpr",
    "QuadraticExpr",
    "make_encoding",
    "decode",
    "as_affine",
    "lower_quadratic",
]


class VarAllocator:
    """Hands out dense variable ids ``0, 1, 2, ...``; single owner per build."""

    def __init__(self, start: int = 0):
        self.num_vars = start

    def new(self, count: int = 1) -> tuple[int, ...]:
        if count < 0:
            raise ValueError("count must be non-negative")
        ids = tuple(range(self.num_vars, self.num_vars + count))
        self.num_vars += count
        return ids


def _lookup(a: Sequence[int], i: int) -> int:
    try:
        return int(a[i])
    except IndexError:
        raise DimensionError(f"assignment does not cover variable {i}") from None


@dataclass(frozen=True)
class FixedPointEncoding:
    """Binary block ``var_ids`` (least-significant first) decoding into ``[lo, hi]``."""

    var_ids: tuple[int, ...]
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "var_ids", tuple(int(i) for i in self.var_ids))
        if not self.var_ids:
            raise DomainError("an encoding needs at least one bit")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise DomainError(f"need finite lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def bits(self) -> int:
        return len(self.var_ids)

    @property
    def resolution(self) -> float:
        """Grid spacing ``(hi - lo) / (2**bits - 1)``."""
        return (self.hi - self.lo) / (2**self.bits - 1)

    def weights(self) -> np.ndarray:
        return self.resolution * 2.0 ** np.arange(self.bits)

    def value_of_level(self, k: int) -> float:
        """Decoded value of the integer level ``k`` in ``0 .. 2**bits - 1``."""
        return self.lo + (self.hi - self.lo) * k / (2**self.bits - 1)

    def decode(self, a: Sequence[int]) -> float:
        level = sum(_lookup(a, i) << k for k, i in enumerate(self.var_ids))
        return self.value_of_level(level)

    def nearest_level(self, v: float) -> int:
        k = round((v - self.lo) / self.resolution)
        return int(min(max(k, 0), 2**self.bits - 1))

    def level_bits(self, k: int) -> list[int]:
        return [(k >> b) & 1 for b in range(self.bits)]

    def assign(self, a: np.ndarray, v: float) -> float:
        """Write the grid point nearest ``v`` into ``a`` and return its value."""
        k = self.nearest_level(v)
        for bit, i in zip(self.level_bits(k), self.var_ids):
            a[i] = bit
        return self.value_of_level(k)

    def on_grid(self, v: float, tol: float = 1e-9) -> bool:
        k = (v - self.lo) / self.resolution
        return -tol <= k <= 2**self.bits - 1 + tol and abs(k - round(k)) <= tol

    def to_json(self) -> dict:
        return {"var_ids": list(self.var_ids), "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, obj: Mapping) -> "FixedPointEncoding":
        return cls(tuple(obj["var_ids"]), float(obj["lo"]), float(obj["hi"]))


def make_encoding(lo: float, hi: float, bits: int, alloc: VarAllocator) -> FixedPointEncoding:
    if bits < 1:
        raise DomainError("bits must be at least 1")
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    return FixedPointEncoding(alloc.new(bits), float(lo), float(hi))


def decode(enc: FixedPointEncoding, a: Sequence[int]) -> float:
    return enc.decode(a)


def as_affine(enc: FixedPointEncoding) -> "AffineExpr":
    span = enc.hi - enc.lo
    denom = 2**enc.bits - 1
    return AffineExpr({i: span * 2**k / denom for k, i in enumerate(enc.var_ids)}, enc.lo)


def _merge(a: Mapping, b: Mapping, scale: float = 1.0) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + scale * v
    return out


@dataclass(frozen=True)
class AffineExpr:
    """``constant + sum_i terms[i] * b_i`` over binary variables."""

    terms: Mapping[int, float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", MappingProxyType({int(i): float(v) for i, v in self.terms.items()}))
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def const(cls, c: float) -> "AffineExpr":
        return cls({}, c)

    @property
    def is_constant(self) -> bool:
        return all(v == 0.0 for v in self.terms.values())

    def evaluate(self, a: Sequence[int]) -> float:
        total = self.constant
        for i in sorted(self.terms):
            if _lookup(a, i):
                total += self.terms[i]
        return total

    def bounds(self) -> tuple[float, float]:
        """Smallest and largest value over all binary assignments."""
        neg = sum(v for v in self.terms.values() if v < 0)
        pos = sum(v for v in self.terms.values() if v > 0)
        return self.constant + neg, self.constant + pos

    def _coerce(self, other):
        if isinstance(other, AffineExpr):
            return other
        if isinstance(other, Real):
            return AffineExpr.const(other)
        return None

    def __add__(self, other):
        if isinstance(other, QuadraticExpr):
            return other + self
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AffineExpr(_merge(self.terms, o.terms), self.constant + o.constant)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Real):
            return AffineExpr({i: other * v for i, v in self.terms.items()}, other * self.constant)
        if isinstance(other, AffineExpr):
            return QuadraticExpr.from_affine(self) * other
        if isinstance(other, QuadraticExpr):
            return other * self
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, p):
        if p == 2:
            return self * self
        if p == 1:
            return self
        raise UnsupportedDegreeError(f"power {p} not supported")

    def to_json(self) -> dict:
        return {"terms": [[i, v] for i, v in sorted(self.terms.items())], "constant": self.constant}

    @classmethod
    def from_json(cls, obj: Mapping) -> "AffineExpr":
        return cls({int(i): float(v) for i, v in obj["terms"]}, float(obj["constant"]))


@dataclass(frozen=True)
class QuadraticExpr:
    """Degree-two polynomial in binary variables; ``quadratic`` keys have ``i <= j``.

    Diagonal keys ``(i, i)`` are kept as written so numeric evaluation stays
    independent of the ``b**2 == b`` folding done by :func:`lower_quadratic`.
    """

    constant: float = 0.0
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def from_affine(cls, e: AffineExpr) -> "QuadraticExpr":
        return cls(e.constant, dict(e.terms), {})

    @property
    def degree(self) -> int:
        if any(v != 0.0 for v in self.quadratic.values()):
            return 2
        if any(v != 0.0 for v in self.linear.values()):
            return 1
        return 0

    def _coerce(self, other):
        if isinstance(other, QuadraticExpr):
            return other
        if isinstance(other, AffineExpr):
            return QuadraticExpr.from_affine(other)
        if isinstance(other, Real):
            return QuadraticExpr(float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticExpr(
            self.constant + o.constant, _merge(self.linear, o.linear), _merge(self.quadratic, o.quadratic)
        )

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Real):
            return QuadraticExpr(
                other * self.constant,
                {i: other * v for i, v in self.linear.items()},
                {k: other * v for k, v in self.quadratic.items()},
            )
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.degree + o.degree > 2:
            raise UnsupportedDegreeError("product would have degree three or more")
        # at most one side carries degree-one terms here, unless both are affine
        quad: dict[tuple[int, int], float] = {}
        for i, u in self.linear.items():
            for j, v in o.linear.items():
                k = (i, j) if i <= j else (j, i)
                quad[k] = quad.get(k, 0.0) + u * v
        lin = _merge({i: o.constant * v for i, v in self.linear.items()}, {i: self.constant * v for i, v in o.linear.items()})
        quad = _merge(quad, {k: o.constant * v for k, v in self.quadratic.items()})
        quad = _merge(quad, {k: self.constant * v for k, v in o.quadratic.items()})
        return QuadraticExpr(self.constant * o.constant, lin, quad)

    __rmul__ = __mul__

    def evaluate(self, a: Sequence[int]) -> float:
        total = self.constant
        for i, v in self.linear.items():
            total += v * _lookup(a, i)
        for (i, j), v in self.quadratic.items():
            total += v * _lookup(a, i) * _lookup(a, j)
        return total

    def max_var(self) -> int:
        idx = list(self.linear) + [j for _, j in self.quadratic]
        return max(idx, default=-1)


def lower_quadratic(expr, num_vars: int | None = None) -> QuboModel:
    """Lower a constant, :class:`AffineExpr` or :class:`QuadraticExpr` to a QUBO.

    Squared bits fold into the linear term; ``num_vars`` defaults to one past
    the largest variable id referenced.
    """
    if isinstance(expr, Real):
        expr = QuadraticExpr(float(expr))
    elif isinstance(expr, AffineExpr):
        expr = QuadraticExpr.from_affine(expr)
    elif not isinstance(expr, QuadraticExpr):
        raise TypeError(f"cannot lower {type(expr).__name__}")
    n = expr.max_var() + 1 if num_vars is None else num_vars
    b = QuboBuilder(n)
    b.add_offset(expr.constant)
    for i, v in expr.linear.items():
        b.add_linear(i, v)
    for (i, j), v in expr.quadratic.items():
        if i == j:
            b.add_linear(i, v)
        else:
            b.add_quadratic(i, j, v)
    return b.build(drop_zeros=True)
