"""QUBO and Ising energy models, evaluation and spin/binary conversion.

Both models are stored sparsely in minimization form::

    E(q) = sum_{i<j} Q_ij q_i q_j + sum_i b_i q_i + offset        q_i in {0, 1}
    H(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i + offset       s_i in {-1, +1}

The substitution ``s = 2q - 1`` maps one onto the other; the constant it
produces is carried in ``offset`` so energies (not just minimizers) agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "QuboModel",
    "IsingModel",
    "QuboBuilder",
    "evaluate_qubo",
    "evaluate_ising",
    "ising_to_qubo",
    "qubo_to_ising",
]


def _normalize_pairs(pairs: Mapping, n: int, what: str) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for key, value in pairs.items():
        i, j = (int(k) for k in key)
        if i == j:
            raise ValueError(f"{what} key ({i}, {j}) is a self-pair; fold it into the linear term")
        if i > j:
            i, j = j, i
        if (i, j) in out:
            raise ValueError(f"{what} key ({i}, {j}) given twice")
        _check_index(j, n)
        _check_index(i, n)
        out[(i, j)] = _finite(value)
    return out


def _normalize_singles(singles: Mapping, n: int) -> dict[int, float]:
    out = {}
    for i, value in singles.items():
        i = int(i)
        _check_index(i, n)
        out[i] = _finite(value)
    return out


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise DimensionError(f"variable index {i} outside 0..{n - 1}")


def _finite(value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"non-finite coefficient {value!r}")
    return value


def _as_vector(a: Sequence, n: int, allowed: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise DimensionError(f"assignment has shape {arr.shape}, model expects ({n},)")
    if n and not np.isin(arr, allowed).all():
        raise DomainError(f"assignment entries must be in {allowed}")
    return arr.astype(np.int64)


@dataclass(frozen=True)
class QuboModel:
    """Immutable sparse QUBO energy ``sum Q_ij q_i q_j + sum b_i q_i + offset``.

    Quadratic keys are normalized to ``i < j`` on construction; self-pairs are
    rejected because ``q_i**2 == q_i`` makes them linear terms.
    """

    num_vars: int = 0
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.num_vars < 0:
            raise DimensionError("num_vars must be non-negative")
        object.__setattr__(self, "linear", MappingProxyType(_normalize_singles(self.linear, self.num_vars)))
        object.__setattr__(
            self, "quadratic", MappingProxyType(_normalize_pairs(self.quadratic, self.num_vars, "quadratic"))
        )
        object.__setattr__(self, "offset", _finite(self.offset))

    def energy(self, a: Sequence[int]) -> float:
        return evaluate_qubo(self, a)

    def __add__(self, other: "QuboModel") -> "QuboModel":
        if not isinstance(other, QuboModel):
            return NotImplemented
        b = QuboBuilder(max(self.num_vars, other.num_vars))
        b.add_model(self)
        b.add_model(other)
        return b.build()

    def shifted(self, c: float) -> "QuboModel":
        """Same model with ``c`` added to the offset."""
        return QuboModel(self.num_vars, dict(self.linear), dict(self.quadratic), self.offset + c)

    def scaled(self, factor: float) -> "QuboModel":
        return QuboModel(
            self.num_vars,
            {i: factor * v for i, v in self.linear.items()},
            {k: factor * v for k, v in self.quadratic.items()},
            factor * self.offset,
        )

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(upper, linear)`` with ``upper`` strictly upper triangular."""
        upper = np.zeros((self.num_vars, self.num_vars))
        lin = np.zeros(self.num_vars)
        for (i, j), v in self.quadratic.items():
            upper[i, j] = v
        for i, v in self.linear.items():
            lin[i] = v
        return upper, lin

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Vectorized energy for a ``(k, num_vars)`` array of binary rows."""
        states = np.asarray(states, dtype=float)
        upper, lin = self.to_dense()
        return np.einsum("ki,ij,kj->k", states, upper, states) + states @ lin + self.offset

    def equals(self, other: "QuboModel", tol: float = 0.0) -> bool:
        """Coefficient-wise comparison, treating absent keys as zero."""
        if self.num_vars != other.num_vars or abs(self.offset - other.offset) > tol:
            return False
        for mine, theirs in ((self.linear, other.linear), (self.quadratic, other.quadratic)):
            for k in set(mine) | set(theirs):
                if abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) > tol:
                    return False
        return True


@dataclass(frozen=True)
class IsingModel:
    """Immutable sparse Ising Hamiltonian ``-sum J s_i s_j - sum h s_i + offset``."""

    num_spins: int = 0
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    fields: Mapping[int, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.num_spins < 0:
            raise DimensionError("num_spins must be non-negative")
        object.__setattr__(
            self, "couplings", MappingProxyType(_normalize_pairs(self.couplings, self.num_spins, "coupling"))
        )
        object.__setattr__(self, "fields", MappingProxyType(_normalize_singles(self.fields, self.num_spins)))
        object.__setattr__(self, "offset", _finite(self.offset))

    def energy(self, s: Sequence[int]) -> float:
        return evaluate_ising(self, s)


class QuboBuilder:
    """Mutable accumulator that finalizes into a :class:`QuboModel`.

    ``set_*`` overwrites an existing coefficient, ``add_*`` accumulates.
    The variable count grows to cover every index touched.
    """

    def __init__(self, num_vars: int = 0):
        self.num_vars = num_vars
        self.linear: dict[int, float] = {}
        self.quadratic: dict[tuple[int, int], float] = {}
        self.offset = 0.0

    def _touch(self, *idx: int) -> None:
        for i in idx:
            if i < 0:
                raise DimensionError(f"negative variable index {i}")
            self.num_vars = max(self.num_vars, i + 1)

    @staticmethod
    def _key(i: int, j: int) -> tuple[int, int]:
        if i == j:
            raise ValueError("quadratic self-pair; use the linear term")
        return (i, j) if i < j else (j, i)

    def set_linear(self, i: int, value: float) -> None:
        self._touch(i)
        self.linear[i] = float(value)

    def add_linear(self, i: int, value: float) -> None:
        self._touch(i)
        self.linear[i] = self.linear.get(i, 0.0) + value

    def set_quadratic(self, i: int, j: int, value: float) -> None:
        self._touch(i, j)
        self.quadratic[self._key(i, j)] = float(value)

    def add_quadratic(self, i: int, j: int, value: float) -> None:
        self._touch(i, j)
        k = self._key(i, j)
        self.quadratic[k] = self.quadratic.get(k, 0.0) + value

    def add_offset(self, value: float) -> None:
        self.offset += value

    def add_model(self, model: QuboModel, scale: float = 1.0) -> None:
        self.num_vars = max(self.num_vars, model.num_vars)
        for i, v in model.linear.items():
            self.add_linear(i, scale * v)
        for (i, j), v in model.quadratic.items():
            self.add_quadratic(i, j, scale * v)
        self.offset += scale * model.offset

    def build(self, drop_zeros: bool = False) -> QuboModel:
        lin = self.linear
        quad = self.quadratic
        if drop_zeros:
            lin = {i: v for i, v in lin.items() if v != 0.0}
            quad = {k: v for k, v in quad.items() if v != 0.0}
        return QuboModel(self.num_vars, dict(lin), dict(quad), self.offset)


def evaluate_qubo(model: QuboModel, a: Sequence[int]) -> float:
    """Energy of a binary assignment, summed in ascending index order."""
    q = _as_vector(a, model.num_vars, (0, 1))
    energy = 0.0
    for i, j in sorted(model.quadratic):
        if q[i] and q[j]:
            energy += model.quadratic[(i, j)]
    for i in sorted(model.linear):
        if q[i]:
            energy += model.linear[i]
    return energy + model.offset


def evaluate_ising(model: IsingModel, s: Sequence[int]) -> float:
    spins = _as_vector(s, model.num_spins, (-1, 1))
    energy = 0.0
    for i, j in sorted(model.couplings):
        energy -= model.couplings[(i, j)] * spins[i] * spins[j]
    for i in sorted(model.fields):
        energy -= model.fields[i] * spins[i]
    return energy + model.offset


def ising_to_qubo(model: IsingModel) -> QuboModel:
    """Substitute ``s = 2q - 1``."""
    b = QuboBuilder(model.num_spins)
    b.add_offset(model.offset)
    for (i, j), J in model.couplings.items():
        # -J (2q_i - 1)(2q_j - 1)
        b.add_quadratic(i, j, -4.0 * J)
        b.add_linear(i, 2.0 * J)
        b.add_linear(j, 2.0 * J)
        b.add_offset(-J)
    for i, h in model.fields.items():
        b.add_linear(i, -2.0 * h)
        b.add_offset(h)
    return b.build()


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute ``q = (s + 1) / 2``."""
    J: dict[tuple[int, int], float] = {}
    h: dict[int, float] = {}
    offset = model.offset
    for (i, j), a in model.quadratic.items():
        # a/4 (s_i s_j + s_i + s_j + 1) with H's leading minus signs
        J[(i, j)] = J.get((i, j), 0.0) - a / 4.0
        h[i] = h.get(i, 0.0) - a / 4.0
        h[j] = h.get(j, 0.0) - a / 4.0
        offset += a / 4.0
    for i, b in model.linear.items():
        h[i] = h.get(i, 0.0) - b / 2.0
        offset += b / 2.0
    return IsingModel(model.num_vars, J, h, offset)


def all_states(n: int, spins: bool = False) -> Iterable[np.ndarray]:
    """Yield every assignment of length ``n`` in lexicographic order."""
    for k in range(2**n):
        bits = np.array([(k >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int64)
        yield 2 * bits - 1 if spins else bits
