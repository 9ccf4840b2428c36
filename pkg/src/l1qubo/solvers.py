"""Exhaustive, discrete-annealing and continuous-annealing minimizers.

Every annealing chain owns a generator seeded with its own integer seed, so a
chain's trajectory does not depend on which other chains run beside it.  The
discrete chain is a compiled loop over pre-drawn random numbers; continuous
chains run side by side with numpy and draw their numbers in fixed blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .errors import DimensionError, DomainError, SizeError
from .qubo import QuboModel, evaluate_qubo

__all__ = [
    "AnnealSchedule",
    "ProposalConfig",
    "SolveResult",
    "brute_force",
    "metropolis_accept",
    "anneal_discrete",
    "anneal_discrete_many",
    "anneal_continuous",
    "anneal_continuous_many",
    "DEFAULT_BRUTE_FORCE_CAP",
]

DEFAULT_BRUTE_FORCE_CAP = 24
_BLOCK = 4096


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling ``T_{n+1} = ratio * T_n`` from ``t_initial`` until below ``t_stop``."""

    t_initial: float = 1000.0
    ratio: float = 0.9999
    t_stop: float = 1e-3

    def __post_init__(self):
        if not (self.t_initial > self.t_stop > 0):
            raise DomainError("need t_initial > t_stop > 0")
        if not 0 < self.ratio < 1:
            raise DomainError("need 0 < ratio < 1")

    @property
    def steps(self) -> int:
        return math.ceil(math.log(self.t_stop / self.t_initial) / math.log(self.ratio))

    def temperatures(self) -> np.ndarray:
        temps = np.empty(self.steps)
        t = self.t_initial
        for n in range(self.steps):
            temps[n] = t
            t *= self.ratio
        return temps


@dataclass(frozen=True)
class ProposalConfig:
    """Each variable moves by ``+step`` or ``-step`` with equal probability.

    A joint proposal that leaves any ``[lo, hi]`` box is rejected outright.
    """

    domains: tuple[tuple[float, float], ...]
    step: float = 0.001

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple((float(lo), float(hi)) for lo, hi in self.domains))
        if not self.step > 0:
            raise DomainError("step must be positive")
        for lo, hi in self.domains:
            if not lo <= hi:
                raise DomainError(f"empty domain [{lo}, {hi}]")

    @property
    def lo(self) -> np.ndarray:
        return np.array([d[0] for d in self.domains])

    @property
    def hi(self) -> np.ndarray:
        return np.array([d[1] for d in self.domains])


@dataclass
class SolveResult:
    best_state: np.ndarray
    best_energy: float
    steps_taken: int
    seed: int | None = None
    best_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def best_assignment(self) -> np.ndarray:
        return self.best_state

    @property
    def best_point(self) -> np.ndarray:
        return self.best_state


def _lex_states(n: int) -> np.ndarray:
    """All ``2**n`` binary rows, first column most significant."""
    k = np.arange(2**n, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
    return ((k >> shifts) & 1).astype(float)


def brute_force(model: QuboModel, max_vars: int = DEFAULT_BRUTE_FORCE_CAP) -> SolveResult:
    """Global minimum by enumerating every assignment.

    Ties go to the lexicographically smallest bitstring ``(b_0, b_1, ...)``.
    Energies are computed blockwise as ``E_hi + E_lo + x_hi^T C x_lo`` so the
    inner product is one dense matrix multiply per block.
    """
    n = model.num_vars
    if n > max_vars:
        raise SizeError(f"{n} variables exceed the brute-force cap of {max_vars}")
    if n == 0:
        return SolveResult(np.zeros(0, dtype=np.int64), model.offset, 1)
    upper, lin = model.to_dense()
    n_lo = min(n, 12)
    n_hi = n - n_lo
    xl = _lex_states(n_lo)
    u_ll = upper[n_hi:, n_hi:]
    e_lo = np.einsum("ki,ij,kj->k", xl, u_ll, xl) + xl @ lin[n_hi:] + model.offset
    cross = upper[:n_hi, n_hi:]
    u_hh = upper[:n_hi, :n_hi]
    rows = max(1, 2**20 >> n_lo)

    best_k, best_e = -1, math.inf
    for start in range(0, 2**n_hi, rows):
        stop = min(start + rows, 2**n_hi)
        kh = np.arange(start, stop, dtype=np.int64)[:, None]
        xh = ((kh >> np.arange(n_hi - 1, -1, -1, dtype=np.int64)[None, :]) & 1).astype(float)
        e_hi = np.einsum("ki,ij,kj->k", xh, u_hh, xh) + xh @ lin[:n_hi]
        energies = e_hi[:, None] + e_lo[None, :] + (xh @ cross) @ xl.T
        flat = int(np.argmin(energies))
        e = energies.flat[flat]
        if e < best_e:
            best_e = e
            best_k = start * 2**n_lo + flat
    bits = np.array([(best_k >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int64)
    return SolveResult(bits, evaluate_qubo(model, bits), 2**n)


def metropolis_accept(delta_e: float, temperature: float, u: float) -> bool:
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    if delta_e <= 0:
        return True
    return u < math.exp(-delta_e / temperature)


def _accept(delta: np.ndarray, temperature: float, u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return (delta <= 0) | (u < np.exp(-np.maximum(delta, 0.0) / temperature))


@njit(cache=True)
def _flip_chain(sym, lin, x, idx, u, temps, trace):
    n = x.shape[0]
    energy = 0.0
    for i in range(n):
        if x[i]:
            energy += lin[i]
            for j in range(i + 1, n):
                if x[j]:
                    energy += sym[i, j]
    best_x = x.copy()
    best_e = energy
    for k in range(temps.shape[0]):
        i = idx[k]
        local = lin[i]
        for j in range(n):
            if x[j]:
                local += sym[i, j]
        delta = local if x[i] == 0 else -local
        if delta <= 0.0 or u[k] < np.exp(-delta / temps[k]):
            x[i] = 1 - x[i]
            energy += delta
            if energy < best_e:
                best_e = energy
                best_x[:] = x
        if trace.shape[0]:
            trace[k] = best_e
    return best_x


def anneal_discrete_many(
    model: QuboModel,
    schedule: AnnealSchedule = AnnealSchedule(),
    seeds: Sequence[int] = (0,),
    record_trace: bool = False,
) -> list[SolveResult]:
    """Single-bit-flip Metropolis chains, one per seed; returns best-seen states.

    A chain starts from uniform random bits and at each temperature proposes
    flipping one uniformly chosen bit.
    """
    n = model.num_vars
    steps = schedule.steps
    if n == 0:
        return [SolveResult(np.zeros(0, dtype=np.int64), model.offset, steps, int(s)) for s in seeds]
    upper, lin = model.to_dense()
    sym = upper + upper.T
    temps = schedule.temperatures()
    out = []
    for s in seeds:
        rng = np.random.default_rng(int(s))
        x = rng.integers(0, 2, n).astype(np.int64)
        idx = rng.integers(0, n, steps)
        u = rng.random(steps)
        trace = np.empty(steps if record_trace else 0)
        bits = _flip_chain(sym, lin, x, idx, u, temps, trace)
        trace += model.offset
        out.append(SolveResult(bits, evaluate_qubo(model, bits), steps, int(s), trace if record_trace else None))
    return out


def anneal_discrete(
    model: QuboModel, schedule: AnnealSchedule = AnnealSchedule(), seed: int = 0, record_trace: bool = False
) -> SolveResult:
    return anneal_discrete_many(model, schedule, [seed], record_trace)[0]


def anneal_continuous_many(
    objective: Callable[[np.ndarray], np.ndarray],
    inits: np.ndarray,
    proposal: ProposalConfig,
    schedule: AnnealSchedule = AnnealSchedule(),
    seeds: Sequence[int] = (0,),
    record_trace: bool = False,
) -> list[SolveResult]:
    """Metropolis chains over a box, one per row of ``inits``.

    ``objective`` maps a ``(chains, dim)`` array to ``(chains,)`` energies.
    Every iteration moves all coordinates by ``+-step`` at once and accepts or
    rejects the joint move; the temperature then drops by one schedule step.
    """
    x = np.array(inits, dtype=float, copy=True)
    if x.ndim != 2:
        raise DimensionError("inits must be a (chains, dim) array")
    c, d = x.shape
    seeds = [int(s) for s in seeds]
    if len(seeds) != c:
        raise DimensionError(f"{len(seeds)} seeds for {c} chains")
    if len(proposal.domains) != d:
        raise DimensionError(f"{len(proposal.domains)} domains for {d} variables")
    lo, hi = proposal.lo, proposal.hi
    if not ((x >= lo) & (x <= hi)).all():
        raise DomainError("initial point outside the proposal domain")

    rngs = [np.random.default_rng(s) for s in seeds]
    energy = np.asarray(objective(x), dtype=float)
    best_x = x.copy()
    best_e = energy.copy()
    steps = schedule.steps
    temps = schedule.temperatures()
    trace = np.empty((steps, c)) if record_trace else None
    step = proposal.step

    for b0 in range(0, steps, _BLOCK):
        b1 = min(b0 + _BLOCK, steps)
        moves = np.stack([r.integers(0, 2, (b1 - b0, d)) for r in rngs], axis=1) * (2.0 * step) - step
        u_block = np.stack([r.random(b1 - b0) for r in rngs], axis=1)
        for k in range(b1 - b0):
            cand = x + moves[k]
            inside = ((cand >= lo) & (cand <= hi)).all(axis=1)
            cand[~inside] = x[~inside]
            new_e = np.asarray(objective(cand), dtype=float)
            acc = inside & _accept(new_e - energy, temps[b0 + k], u_block[k])
            x[acc] = cand[acc]
            energy[acc] = new_e[acc]
            improved = energy < best_e
            if improved.any():
                best_e[improved] = energy[improved]
                best_x[improved] = x[improved]
            if trace is not None:
                trace[b0 + k] = best_e

    final = np.asarray(objective(best_x), dtype=float)
    return [
        SolveResult(best_x[ci].copy(), float(final[ci]), steps, s, None if trace is None else trace[:, ci].copy())
        for ci, s in enumerate(seeds)
    ]


def anneal_continuous(
    objective: Callable,
    init: Sequence[float],
    proposal: ProposalConfig,
    schedule: AnnealSchedule = AnnealSchedule(),
    seed: int = 0,
    vectorized: bool = False,
    record_trace: bool = False,
) -> SolveResult:
    """Single-chain continuous annealing.

    With ``vectorized=False`` the objective takes one point (a 1-D array) and
    returns a float.
    """
    if vectorized:
        f = objective
    else:

        def f(points):
            return np.array([objective(p) for p in points], dtype=float)

    init = np.asarray(init, dtype=float)[None, :]
    return anneal_continuous_many(f, init, proposal, schedule, [seed], record_trace)[0]
