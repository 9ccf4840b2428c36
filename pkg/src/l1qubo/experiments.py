"""Experiment runners: continuous annealing sweeps, gadget verification, LASSO demo."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .gadgets import (
    GadgetExpansion,
    build_l1_gadget,
    build_qloss_gadget,
    build_regularized_ls,
    build_relu_gadget,
    l1_naive_objective,
    l1_reduced_objective,
    qloss_t_range,
    soft_threshold,
)
from .solvers import AnnealSchedule, ProposalConfig, anneal_continuous_many, anneal_discrete_many, brute_force

__all__ = [
    "ExperimentConfig",
    "SampleRecord",
    "run_fig2",
    "run_reduced",
    "run_continuous",
    "run_discrete_verification",
    "run_lasso_demo",
    "records_to_csv",
    "summarize",
    "DEFAULT_LASSO_PAIRS",
]

CONTINUOUS_M = 10.0
DISCRETE_M = 10.0
Z_INIT_RANGE = (0.0, 10.0)
DEFAULT_LASSO_PAIRS = tuple((a, lam) for lam in (0.0, 1.0, 2.0, 4.0) for a in (-5.0, -2.5, 1.0, 2.5, 5.0))

_VARIANTS = ("l1_naive", "l1_reduced", "relu", "qloss")
_SOLVERS = ("continuous", "discrete", "brute")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by every runner.

    ``M=None`` picks the runner's default: 10 for the annealers and the
    dominance rule of :func:`~l1qubo.gadgets.default_penalty` for brute force.
    """

    variant: str = "l1_naive"
    n_samples: int = 200
    m_lo: float = -10.0
    m_hi: float = 10.0
    M: float | None = None
    seed: int = 0
    solver: str = "continuous"
    bits_z: int = 10
    z_hi: float = 10.23
    t_bits: int = 8
    q: float = -1.0
    t1: float = 1000.0
    ratio: float = 0.9999
    t_stop: float = 1e-3
    step: float = 0.001
    reads: int = 10
    tolerance: float | None = None
    min_fraction: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise DomainError(f"variant must be one of {_VARIANTS}")
        if self.solver not in _SOLVERS:
            raise DomainError(f"solver must be one of {_SOLVERS}")
        if self.n_samples < 0:
            raise DomainError("n_samples must be non-negative")
        if not self.m_lo <= self.m_hi:
            raise DomainError("m_lo must not exceed m_hi")
        if self.M is not None and not (math.isfinite(self.M) and self.M > 0):
            raise DomainError("M must be positive")
        if self.reads < 1:
            raise DomainError("reads must be at least 1")
        # validates the schedule eagerly
        self.schedule

    @property
    def schedule(self) -> AnnealSchedule:
        return AnnealSchedule(self.t1, self.ratio, self.t_stop)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class SampleRecord:
    m: float
    f_value: float
    t: float | None
    z1: float
    z2: float
    energy_gap_vs_reference: float
    seed: int


def _draw_samples(cfg: ExperimentConfig):
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_samples
    m = rng.uniform(cfg.m_lo, cfg.m_hi, n)
    t0 = rng.uniform(-1.0, 1.0, n)
    z0 = rng.uniform(*Z_INIT_RANGE, (n, 2))
    seeds = rng.integers(0, 2**31 - 1, n)
    return m, t0, z0, seeds


def run_continuous(cfg: ExperimentConfig) -> list[SampleRecord]:
    """Anneal the l1 objective directly in continuous variables, one chain per sampled m.

    ``m`` is drawn uniformly from ``[m_lo, m_hi]``; ``t`` starts uniform on
    ``[-1, 1]`` and ``z1, z2`` on ``[0, 10]``.  Both variants consume the same
    random draws, so for equal seeds they see identical ``m`` and ``z`` starts.
    """
    if cfg.variant not in ("l1_naive", "l1_reduced"):
        raise DomainError("continuous annealing supports l1_naive and l1_reduced")
    M = CONTINUOUS_M if cfg.M is None else cfg.M
    m, t0, z0, seeds = _draw_samples(cfg)
    if cfg.n_samples == 0:
        return []
    naive = cfg.variant == "l1_naive"
    if naive:

        def objective(x):
            return l1_naive_objective(m, x[:, 0], x[:, 1], x[:, 2], M)

        inits = np.column_stack([t0, z0])
        domains = ((-1.0, 1.0), (0.0, math.inf), (0.0, math.inf))
    else:

        def objective(x):
            return l1_reduced_objective(m, x[:, 0], x[:, 1], M)

        inits = z0
        domains = ((0.0, math.inf), (0.0, math.inf))

    results = anneal_continuous_many(objective, inits, ProposalConfig(domains, cfg.step), cfg.schedule, seeds)
    records = []
    for mk, res in zip(m, results):
        x = res.best_point
        t = float(x[0]) if naive else None
        z1, z2 = (float(v) for v in x[-2:])
        records.append(SampleRecord(float(mk), res.best_energy, t, z1, z2, res.best_energy - abs(mk), res.seed))
    records.sort(key=lambda r: r.m)
    return records


def run_fig2(cfg: ExperimentConfig) -> list[SampleRecord]:
    return run_continuous(dataclasses.replace(cfg, variant="l1_naive", solver="continuous"))


def run_reduced(cfg: ExperimentConfig) -> list[SampleRecord]:
    return run_continuous(dataclasses.replace(cfg, variant="l1_reduced", solver="continuous"))


def record_objective(r: SampleRecord, M: float) -> float:
    """Re-evaluate the annealed objective at a record's reported point."""
    if r.t is None:
        return l1_reduced_objective(r.m, r.z1, r.z2, M)
    return l1_naive_objective(r.m, r.t, r.z1, r.z2, M)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def records_to_csv(records: Sequence[SampleRecord], with_t: bool) -> str:
    header = ["m", "f", "t", "z1", "z2", "gap", "seed"] if with_t else ["m", "f", "z1", "z2", "gap", "seed"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in records:
        row = [r.m, r.f_value] + ([r.t] if with_t else []) + [r.z1, r.z2, r.energy_gap_vs_reference, r.seed]
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def summarize(records: Sequence[SampleRecord], cfg: ExperimentConfig, variant: str) -> dict:
    dev = np.array([abs(r.energy_gap_vs_reference) for r in records])
    z_ok = np.array(
        [abs(r.z1 - max(-r.m, 0.0)) <= 0.1 and abs(r.z2 - max(r.m, 0.0)) <= 0.1 for r in records], dtype=bool
    )
    n = len(records)
    return {
        "variant": variant,
        "n_samples": n,
        "max_abs_dev": float(dev.max()) if n else 0.0,
        "mean_abs_dev": float(dev.mean()) if n else 0.0,
        "frac_within_0_1": float(np.mean(dev <= 0.1)) if n else 1.0,
        "frac_z_within_0_1": float(np.mean(z_ok)) if n else 1.0,
        "seed": cfg.seed,
        "config": cfg.to_json(),
    }


def _grid_points(cfg: ExperimentConfig, step: float, lo: float = 0.0) -> list[float]:
    if cfg.n_samples == 0:
        return []
    raw = np.linspace(cfg.m_lo, cfg.m_hi, cfg.n_samples)
    snapped = [lo + round((v - lo) / step) * step for v in raw]
    return [0.0 if abs(v) < 1e-12 else float(v) for v in snapped]


def build_verification_gadget(cfg: ExperimentConfig, m: float, M) -> GadgetExpansion:
    if cfg.variant in ("l1_naive", "l1_reduced"):
        return build_l1_gadget(m, cfg.z_hi, cfg.bits_z, M, cfg.variant, t_bits=cfg.t_bits)
    if cfg.variant == "relu":
        return build_relu_gadget(m, cfg.z_hi, cfg.bits_z, M, t_bits=min(cfg.t_bits, 2))
    return build_qloss_gadget(m, cfg.q, _qloss_spec(cfg))


def _qloss_spec(cfg: ExperimentConfig) -> tuple[float, float, int]:
    lo, hi = qloss_t_range(math.floor(min(cfg.q, cfg.m_lo, -1.0)), cfg.t_bits)
    return lo, hi, cfg.t_bits


def verification_penalty(cfg: ExperimentConfig) -> float | None:
    """``None`` means the builder's dominance-rule default."""
    if cfg.M is not None:
        return cfg.M
    return None if cfg.solver == "brute" else DISCRETE_M


def verification_points(cfg: ExperimentConfig) -> list[float]:
    """``n_samples`` evenly spaced m values snapped onto the relevant encoding grid."""
    if cfg.variant == "qloss":
        lo, hi, bits = _qloss_spec(cfg)
        return _grid_points(cfg, (hi - lo) / (2**bits - 1), lo)
    return _grid_points(cfg, cfg.z_hi / (2**cfg.bits_z - 1))


def run_discrete_verification(cfg: ExperimentConfig) -> dict:
    """Build the gadget QUBO for grid-aligned m values and minimize it over the aux bits.

    Brute force reports the exact gadget minimum; the discrete annealer runs
    ``reads`` seeded chains per m.  A penalty violation is an optimum whose
    equality residual is non-zero.
    """
    if cfg.solver not in ("brute", "discrete"):
        raise DomainError("verification needs solver 'brute' or 'discrete'")
    brute = cfg.solver == "brute"
    M = verification_penalty(cfg)
    tol = cfg.tolerance if cfg.tolerance is not None else (0.02 if brute else 0.05)
    min_frac = cfg.min_fraction if cfg.min_fraction is not None else (1.0 if brute else 0.9)

    ms = verification_points(cfg)
    rng = np.random.default_rng(cfg.seed)

    rows = []
    for m in ms:
        g = build_verification_gadget(cfg, m, M)
        ref = float(g.reference(m))
        if brute:
            results = [brute_force(g.model_fragment)]
        else:
            seeds = rng.integers(0, 2**31 - 1, cfg.reads)
            results = anneal_discrete_many(g.model_fragment, cfg.schedule, seeds)
        for res in results:
            residual = g.residual_value(res.best_state)
            rows.append(
                {
                    "m": m,
                    "f": res.best_energy,
                    "reference": ref,
                    "dev": abs(res.best_energy - ref),
                    "residual": residual,
                    "aux": g.decode_aux(res.best_state),
                    "seed": res.seed,
                }
            )
    devs = np.array([r["dev"] for r in rows])
    violations = sum(1 for r in rows if r["residual"] is not None and abs(r["residual"]) > 1e-9)
    n = len(rows)
    frac_tol = float(np.mean(devs <= tol)) if n else 1.0
    passed = frac_tol >= min_frac and (not brute or violations == 0)
    return {
        "variant": cfg.variant,
        "solver": cfg.solver,
        "n_samples": len(ms),
        "n_runs": n,
        "M": None if not rows else (g.penalty.M if g.penalty is not None else None),
        "max_abs_dev": float(devs.max()) if n else 0.0,
        "frac_within_0_1": float(np.mean(devs <= 0.1)) if n else 1.0,
        "tolerance": tol,
        "frac_within_tolerance": frac_tol,
        "min_fraction": min_frac,
        "penalty_violations": violations,
        "passed": bool(passed),
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "records": rows,
    }


def run_lasso_demo(
    pairs: Iterable[tuple[float, float]] = DEFAULT_LASSO_PAIRS,
    cfg: ExperimentConfig | None = None,
    m_hi: float = 6.35,
    m_bits: int = 7,
) -> dict:
    """Minimize ``(m - a)**2 + lam |m|`` through the QUBO for each pair.

    Each pair is an independent block, so each is solved on its own model.
    The QUBO minimizer is compared with the soft threshold at ``lam / 2``.
    """
    cfg = cfg or ExperimentConfig(variant="l1_reduced", solver="brute")
    if cfg.solver not in ("brute", "discrete"):
        raise DomainError("lasso demo needs solver 'brute' or 'discrete'")
    variant = cfg.variant if cfg.variant in ("l1_naive", "l1_reduced") else "l1_reduced"
    resolution = 2 * m_hi / (2**m_bits - 1)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for a, lam in pairs:
        problem = build_regularized_ls([(a, lam)], m_hi, m_bits, pc=cfg.M, variant=variant, t_bits=cfg.t_bits)
        if cfg.solver == "brute":
            res = brute_force(problem.model)
        else:
            seeds = rng.integers(0, 2**31 - 1, cfg.reads)
            res = min(anneal_discrete_many(problem.model, cfg.schedule, seeds), key=lambda r: r.best_energy)
        m_star = problem.decode(res.best_state)[0]
        expected = float(soft_threshold(a, lam / 2.0))
        err = abs(m_star - expected)
        rows.append(
            {
                "a": float(a),
                "lam": float(lam),
                "m_star": m_star,
                "expected": expected,
                "abs_err": err,
                "energy": res.best_energy,
                "within": bool(err <= 2 * resolution),
            }
        )
    return {
        "variant": variant,
        "solver": cfg.solver,
        "m_hi": m_hi,
        "m_bits": m_bits,
        "m_resolution": resolution,
        "max_abs_err": max((r["abs_err"] for r in rows), default=0.0),
        "all_within": all(r["within"] for r in rows),
        "seed": cfg.seed,
        "pairs": rows,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
