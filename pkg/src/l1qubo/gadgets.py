"""Reference functions and their QUBO gadgets.

A gadget realizes a non-smooth function ``g(m)`` as a quadratic form
``G(m, aux)`` such that ``min_aux G(m, aux) == g(m)``.  The l1 gadgets come
from a Legendre conjugate followed by Wolfe duality, with the resulting
stationarity constraint ``-m - z1 + z2 = 0`` moved into a squared penalty::

    naive   : m t + z1 (t + 1) - z2 (t - 1) + M (-m - z1 + z2)**2
    reduced : z1 + z2 + M (-m - z1 + z2)**2

On the constraint surface the naive form collapses to ``2 z1 + m``, which no
longer depends on ``t``; eliminating ``t`` gives the reduced form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .encoding import AffineExpr, FixedPointEncoding, VarAllocator, as_affine, lower_quadratic, make_encoding
from .errors import DomainError, InfeasibleGadgetError
from .qubo import QuboBuilder, QuboModel

__all__ = [
    "PenaltyConfig",
    "QLossParams",
    "GadgetExpansion",
    "RegularizedLS",
    "VARIANTS",
    "abs_reference",
    "relu_reference",
    "qloss_reference",
    "qloss_objective",
    "l1_naive_objective",
    "l1_reduced_objective",
    "relu_wolfe_objective",
    "legendre_conjugate_numeric",
    "penalize_equality",
    "default_penalty",
    "soft_threshold",
    "qloss_t_range",
    "build_l1_gadget",
    "build_relu_gadget",
    "build_qloss_gadget",
    "build_regularized_ls",
]

VARIANTS = ("l1_naive", "l1_reduced", "relu_wolfe", "qloss")


@dataclass(frozen=True)
class PenaltyConfig:
    """Weight ``M`` on a squared equality residual."""

    M: float

    def __post_init__(self):
        if not (math.isfinite(self.M) and self.M > 0):
            raise DomainError(f"penalty M must be positive and finite, got {self.M}")


@dataclass(frozen=True)
class QLossParams:
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and self.q <= 0):
            raise DomainError(f"q-loss parameter must satisfy q <= 0, got {self.q}")


def _M(pc) -> float:
    return pc.M if isinstance(pc, PenaltyConfig) else PenaltyConfig(float(pc)).M


def _q(p) -> float:
    return p.q if isinstance(p, QLossParams) else QLossParams(float(p)).q


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _require(cond, msg: str) -> None:
    if not np.all(cond):
        raise DomainError(msg)


# --- reference evaluators -------------------------------------------------


def abs_reference(m):
    """``-min(-m, m)``, i.e. ``|m|``."""
    m = np.asarray(m, dtype=float)
    return _out(-np.minimum(-m, m))


def relu_reference(m):
    """``-min(0, m)``; the ordinary ReLU after ``m -> -m``."""
    m = np.asarray(m, dtype=float)
    return _out(-np.minimum(0.0, m))


def qloss_reference(m, p):
    q = _q(p)
    m = np.asarray(m, dtype=float)
    return _out(np.minimum((1.0 - q) ** 2, np.maximum(0.0, 1.0 - m) ** 2))


def sign_plus(x):
    """Sign function with ``sign(0) = +1``."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def qloss_objective(m, t, p):
    """``(m - t)**2 + (1 - q)**2 (1 - sign(t - 1)) / 2``; minimize over ``t``."""
    q = _q(p)
    m = np.asarray(m, dtype=float)
    t = np.asarray(t, dtype=float)
    return _out((m - t) ** 2 + (1.0 - q) ** 2 * (1.0 - sign_plus(t - 1.0)) / 2.0)


def l1_naive_objective(m, t, z1, z2, pc):
    M = _M(pc)
    m, t, z1, z2 = (np.asarray(v, dtype=float) for v in (m, t, z1, z2))
    _require((t >= -1) & (t <= 1), "t must lie in [-1, 1]")
    _require((z1 >= 0) & (z2 >= 0), "z1 and z2 must be non-negative")
    return _out(m * t + z1 * (t + 1) - z2 * (t - 1) + M * (-m - z1 + z2) ** 2)


def l1_reduced_objective(m, z1, z2, pc):
    M = _M(pc)
    m, z1, z2 = (np.asarray(v, dtype=float) for v in (m, z1, z2))
    _require((z1 >= 0) & (z2 >= 0), "z1 and z2 must be non-negative")
    return _out(z1 + z2 + M * (-m - z1 + z2) ** 2)


def relu_wolfe_objective(m, t, z1, z2, pc):
    """Wolfe/penalty form of the ReLU-type function.

    The penalty enters with a plus sign: a negative multiple of a square is
    unbounded below under minimization.
    """
    M = _M(pc)
    m, t, z1, z2 = (np.asarray(v, dtype=float) for v in (m, t, z1, z2))
    _require((t >= -1) & (t <= 0), "t must lie in [-1, 0]")
    _require((z1 >= 0) & (z2 >= 0), "z1 and z2 must be non-negative")
    return _out(m * t + z1 * (t + 1) - z2 * t + M * (-m - z1 + z2) ** 2)


def legendre_conjugate_numeric(f: Callable | Sequence[float], grid: Sequence[float], t):
    """Grid approximation of ``sup_x {t x - f(x)}``.

    ``f`` is either a callable applied to ``grid`` or the sampled values.
    ``t`` may be a scalar or an array.
    """
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise DomainError("empty grid")
    fx = np.asarray(f(x) if callable(f) else f, dtype=float)
    if fx.shape != x.shape:
        raise DomainError("sampled values do not match the grid")
    t = np.asarray(t, dtype=float)
    return _out(np.max(t[..., None] * x - fx, axis=-1))


def soft_threshold(a, kappa):
    """``sign(a) max(|a| - kappa, 0)``, the minimizer of ``(m - a)**2 + 2 kappa |m|``."""
    a = np.asarray(a, dtype=float)
    return _out(np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0))


# --- QUBO construction ----------------------------------------------------


def penalize_equality(residual: AffineExpr, pc, num_vars: int | None = None) -> QuboModel:
    """QUBO equal to ``M * residual**2`` on every assignment."""
    return lower_quadratic(_M(pc) * (residual * residual), num_vars)


def default_penalty(z_hi: float, resolution: float) -> PenaltyConfig:
    """``M = 10 max(1, z_hi) / resolution``.

    A residual of one grid step then costs far more than the largest change
    the linear part can make over the whole z range.
    """
    return PenaltyConfig(10.0 * max(1.0, z_hi) / resolution)


@dataclass(frozen=True)
class GadgetExpansion:
    """QUBO fragment whose minimum over ``aux`` bits reproduces a reference function."""

    model_fragment: QuboModel
    input: AffineExpr
    aux: Mapping[str, FixedPointEncoding]
    penalty: PenaltyConfig | None
    variant: str
    residual: AffineExpr | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    def reference(self, m):
        if self.variant in ("l1_naive", "l1_reduced"):
            return abs_reference(m)
        if self.variant == "relu_wolfe":
            return relu_reference(m)
        return qloss_reference(m, self.params["q"])

    def decode_aux(self, a: Sequence[int]) -> dict[str, float]:
        return {name: enc.decode(a) for name, enc in self.aux.items()}

    def residual_value(self, a: Sequence[int]) -> float | None:
        return None if self.residual is None else self.residual.evaluate(a)

    @property
    def aux_var_ids(self) -> list[int]:
        ids = {i for enc in self.aux.values() for i in enc.var_ids}
        return sorted(ids)


def _as_input(m) -> AffineExpr:
    return m if isinstance(m, AffineExpr) else AffineExpr.const(float(m))


def _allocator(m: AffineExpr, alloc: VarAllocator | None) -> VarAllocator:
    if alloc is not None:
        return alloc
    return VarAllocator(max(m.terms, default=-1) + 1)


def _check_z_range(m: AffineExpr, z_hi: float) -> None:
    if not z_hi > 0:
        raise DomainError("z_hi must be positive")
    lo, hi = m.bounds()
    worst = max(abs(lo), abs(hi))
    if worst > z_hi * (1 + 1e-12):
        raise InfeasibleGadgetError(f"input magnitude {worst:g} exceeds z_hi = {z_hi:g}")


def build_l1_gadget(
    input,
    z_hi: float,
    bits: int = 10,
    pc: PenaltyConfig | float | None = None,
    variant: str = "l1_reduced",
    alloc: VarAllocator | None = None,
    t_bits: int = 8,
) -> GadgetExpansion:
    """Build the naive (t, z1, z2) or reduced (z1, z2) l1 gadget for ``input``.

    ``input`` is a constant or an :class:`AffineExpr` over bits already owned
    by ``alloc``.  Its magnitude must not exceed ``z_hi``.
    """
    if variant not in ("l1_naive", "l1_reduced"):
        raise ValueError(f"unknown l1 variant {variant!r}")
    m = _as_input(input)
    _check_z_range(m, z_hi)
    alloc = _allocator(m, alloc)

    aux = {}
    if variant == "l1_naive":
        aux["t"] = make_encoding(-1.0, 1.0, t_bits, alloc)
    aux["z1"] = make_encoding(0.0, z_hi, bits, alloc)
    aux["z2"] = make_encoding(0.0, z_hi, bits, alloc)
    penalty = default_penalty(z_hi, aux["z1"].resolution) if pc is None else PenaltyConfig(_M(pc))

    z1, z2 = as_affine(aux["z1"]), as_affine(aux["z2"])
    residual = -m - z1 + z2
    if variant == "l1_naive":
        t = as_affine(aux["t"])
        body = m * t + z1 * (t + 1) - z2 * (t - 1)
    else:
        body = z1 + z2
    b = QuboBuilder(alloc.num_vars)
    b.add_model(lower_quadratic(body, alloc.num_vars))
    b.add_model(penalize_equality(residual, penalty, alloc.num_vars))
    return GadgetExpansion(b.build(drop_zeros=True), m, aux, penalty, variant, residual)


def build_relu_gadget(
    input,
    z_hi: float,
    bits: int = 10,
    pc: PenaltyConfig | float | None = None,
    alloc: VarAllocator | None = None,
    t_bits: int = 2,
) -> GadgetExpansion:
    """ReLU-type gadget ``m t + z1 (t + 1) - z2 t + M (-m - z1 + z2)**2``, ``t in [-1, 0]``.

    The form is linear in ``t`` so the optimum sits at ``t = -1`` or ``t = 0``;
    any ``t_bits >= 1`` grid contains both.
    """
    m = _as_input(input)
    _check_z_range(m, z_hi)
    alloc = _allocator(m, alloc)
    aux = {
        "t": make_encoding(-1.0, 0.0, t_bits, alloc),
        "z1": make_encoding(0.0, z_hi, bits, alloc),
        "z2": make_encoding(0.0, z_hi, bits, alloc),
    }
    penalty = default_penalty(z_hi, aux["z1"].resolution) if pc is None else PenaltyConfig(_M(pc))
    t, z1, z2 = (as_affine(aux[k]) for k in ("t", "z1", "z2"))
    residual = -m - z1 + z2
    b = QuboBuilder(alloc.num_vars)
    b.add_model(lower_quadratic(m * t + z1 * (t + 1) - z2 * t, alloc.num_vars))
    b.add_model(penalize_equality(residual, penalty, alloc.num_vars))
    return GadgetExpansion(b.build(drop_zeros=True), m, aux, penalty, "relu_wolfe", residual)


def qloss_t_range(t_lo: float, bits: int) -> tuple[float, float]:
    """``(t_lo, t_hi)`` such that the most significant bit of ``t`` is set iff ``t >= 1``."""
    if not t_lo < 1:
        raise DomainError("t_lo must be below the threshold 1")
    if bits < 2:
        raise DomainError("need at least two bits to place the threshold")
    step = (1.0 - t_lo) / 2 ** (bits - 1)
    return t_lo, t_lo + step * (2**bits - 1)


def build_qloss_gadget(
    input,
    p: QLossParams | float,
    t_spec: tuple[float, float, int] | None = None,
    alloc: VarAllocator | None = None,
) -> GadgetExpansion:
    """q-loss gadget ``(m - t)**2 + (1 - q)**2 (1 - s)``.

    ``s`` is the most significant bit of the ``t`` encoding.  The range is
    required to put ``t = 1`` exactly on the boundary where that bit turns on,
    so ``s == [t >= 1]`` holds on every assignment and the sign term is a
    single one-body coefficient; no extra penalty is needed.
    """
    q = _q(p)
    m = _as_input(input)
    m_lo, m_hi = m.bounds()
    if t_spec is None:
        t_lo = math.floor(min(q, m_lo, -1.0))
        bits = 6
        t_lo, t_hi = qloss_t_range(t_lo, bits)
    else:
        t_lo, t_hi, bits = t_spec
    alloc = _allocator(m, alloc)
    enc = make_encoding(t_lo, t_hi, bits, alloc)
    msb_level = 2 ** (bits - 1)
    if bits < 2 or not (
        math.isclose(enc.value_of_level(msb_level), 1.0, abs_tol=1e-12) and enc.value_of_level(msb_level - 1) < 1.0
    ):
        raise InfeasibleGadgetError(
            f"t range [{t_lo:g}, {t_hi:g}] with {bits} bits does not place t = 1 at the top-bit boundary"
        )
    if m_lo < t_lo - 1e-12 or m_hi > t_hi + 1e-12:
        raise InfeasibleGadgetError(f"input range [{m_lo:g}, {m_hi:g}] not covered by t range [{t_lo:g}, {t_hi:g}]")
    s_id = enc.var_ids[-1]
    t = as_affine(enc)
    s = AffineExpr({s_id: 1.0})
    expr = (m - t) * (m - t) + (1.0 - q) ** 2 * (1.0 - s)
    fragment = lower_quadratic(expr, alloc.num_vars)
    aux = {"t": enc, "s": FixedPointEncoding((s_id,), 0.0, 1.0)}
    return GadgetExpansion(fragment, m, aux, None, "qloss", None, {"q": q})


@dataclass(frozen=True)
class RegularizedLS:
    """``sum_k (m_k - a_k)**2 + lam_k |m_k|`` with each ``|m_k|`` realized by a gadget."""

    model: QuboModel
    m_encodings: tuple[FixedPointEncoding, ...]
    gadgets: tuple[GadgetExpansion | None, ...]
    targets: tuple[tuple[float, float], ...]

    def decode(self, a: Sequence[int]) -> list[float]:
        return [enc.decode(a) for enc in self.m_encodings]

    def expected(self) -> list[float]:
        return [soft_threshold(a, lam / 2.0) for a, lam in self.targets]


def build_regularized_ls(
    targets: Sequence[tuple[float, float]],
    m_hi: float,
    m_bits: int = 7,
    z_bits: int | None = None,
    pc: PenaltyConfig | float | None = None,
    variant: str = "l1_reduced",
    t_bits: int = 8,
) -> RegularizedLS:
    """Sum of per-coefficient squared errors plus weighted l1 gadgets.

    Each ``m_k`` lives on ``[-m_hi, m_hi]``.  The z encodings use ``[0, m_hi]``
    with ``z_bits`` bits (default ``m_bits``), which puts every ``|m_k|`` grid
    value exactly on the z grid.  Terms with ``lam == 0`` get no gadget.
    """
    alloc = VarAllocator()
    z_bits = m_bits if z_bits is None else z_bits
    b = QuboBuilder()
    encs, gadgets = [], []
    for a, lam in targets:
        if lam < 0:
            raise DomainError("regularization weight must be non-negative")
        enc = make_encoding(-m_hi, m_hi, m_bits, alloc)
        mk = as_affine(enc)
        b.add_model(lower_quadratic((mk - a) * (mk - a)))
        g = None
        if lam > 0:
            g = build_l1_gadget(mk, m_hi, z_bits, pc, variant, alloc, t_bits)
            b.add_model(g.model_fragment, scale=lam)
        encs.append(enc)
        gadgets.append(g)
    b.num_vars = max(b.num_vars, alloc.num_vars)
    targets = tuple((float(a), float(lam)) for a, lam in targets)
    return RegularizedLS(b.build(drop_zeros=True), tuple(encs), tuple(gadgets), targets)
