"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 ``verify``
threshold not met.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as model_io
from .errors import ParseError, QuboError
from .experiments import (
    DEFAULT_LASSO_PAIRS,
    ExperimentConfig,
    dumps,
    records_to_csv,
    run_discrete_verification,
    run_fig2,
    run_lasso_demo,
    run_reduced,
    summarize,
    verification_penalty,
    verification_points,
    build_verification_gadget,
)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_THRESHOLD = 0, 1, 2, 3

# flag dest -> ExperimentConfig field
_FIELD_FLAGS = {
    "samples": "n_samples",
    "m_lo": "m_lo",
    "m_hi": "m_hi",
    "penalty_M": "M",
    "bits_z": "bits_z",
    "z_hi": "z_hi",
    "t_bits": "t_bits",
    "t1": "t1",
    "ratio": "ratio",
    "t_stop": "t_stop",
    "step": "step",
    "seed": "seed",
    "solver": "solver",
    "variant": "variant",
    "q": "q",
    "reads": "reads",
    "tolerance": "tolerance",
    "min_fraction": "min_fraction",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--penalty-M", dest="penalty_M", type=float)
    p.add_argument("--t1", type=float, help="initial temperature (default 1000)")
    p.add_argument("--ratio", type=float, help="cooling factor per iteration (default 0.9999)")
    p.add_argument("--t-stop", dest="t_stop", type=float, help="stop below this temperature (default 1e-3)")
    p.add_argument("--out", type=Path, help="output file (default stdout)")


def _sweep(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int)
    p.add_argument("--m-lo", dest="m_lo", type=float)
    p.add_argument("--m-hi", dest="m_hi", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l1qubo", description="QUBO gadgets for l1, ReLU-type and q-loss functions")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (
        ("fig2", "anneal the naive (t, z1, z2) l1 objective for random m; CSV out"),
        ("reduced", "same sweep with the reduced (z1, z2) objective"),
    ):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _sweep(p)
        p.add_argument("--step", type=float, help="proposal step per variable (default 0.001)")
        p.add_argument("--summary", type=Path, help="also write a JSON summary here")

    p = sub.add_parser("verify", help="minimize gadget QUBOs on grid-aligned m and compare with the reference")
    _common(p)
    _sweep(p)
    p.add_argument("--variant", choices=("l1_naive", "l1_reduced", "relu", "qloss"), default="l1_reduced")
    p.add_argument("--solver", choices=("brute", "discrete"), default="brute")
    p.add_argument("--bits-z", dest="bits_z", type=int)
    p.add_argument("--z-hi", dest="z_hi", type=float)
    p.add_argument("--t-bits", dest="t_bits", type=int)
    p.add_argument("--q", type=float, help="q-loss parameter (q <= 0)")
    p.add_argument("--reads", type=int, help="annealing chains per m (discrete solver)")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--min-fraction", dest="min_fraction", type=float)
    p.add_argument("--emit-models", dest="emit_models", type=Path, help="write each gadget model + metadata here")

    p = sub.add_parser("lasso", help="soft-thresholding demo: (m - a)^2 + lam |m| through the QUBO")
    _common(p)
    p.add_argument("--pairs", help="comma-separated a:lam list (default: 20-point sweep)")
    p.add_argument("--m-hi", dest="lasso_m_hi", type=float, default=6.35, help="m encoded on [-m_hi, m_hi]")
    p.add_argument("--bits-m", dest="bits_m", type=int, default=7)
    p.add_argument("--variant", choices=("l1_naive", "l1_reduced"), default="l1_reduced")
    p.add_argument("--solver", choices=("brute", "discrete"), default="brute")
    p.add_argument("--reads", type=int)

    p = sub.add_parser("convert", help="convert a model between JSON and coordinate text formats")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    return parser


def _config(args, **defaults) -> ExperimentConfig:
    values = dict(defaults)
    if getattr(args, "config", None):
        values.update(json.loads(args.config.read_text()))
    for flag, name in _FIELD_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return ExperimentConfig.from_json(values)


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with path.open("w", newline="\n") as fh:
            fh.write(text)


def _parse_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(","):
        a, lam = chunk.split(":")
        pairs.append((float(a), float(lam)))
    return pairs


def _run(args) -> int:
    if args.command in ("fig2", "reduced"):
        cfg = _config(args, variant="l1_naive" if args.command == "fig2" else "l1_reduced")
        records = run_fig2(cfg) if args.command == "fig2" else run_reduced(cfg)
        _emit(records_to_csv(records, with_t=args.command == "fig2"), args.out)
        summary = summarize(records, cfg, cfg.variant)
        if args.summary:
            _emit(dumps(summary), args.summary)
        print(
            f"{cfg.variant}: {summary['n_samples']} samples, "
            f"{summary['frac_within_0_1']:.3f} within 0.1 of |m|, "
            f"{summary['frac_z_within_0_1']:.3f} with z within 0.1",
            file=sys.stderr,
        )
        return EXIT_OK

    if args.command == "verify":
        defaults = {"n_samples": 21, "variant": args.variant, "solver": args.solver}
        cfg = _config(args, **defaults)
        report = run_discrete_verification(cfg)
        if args.emit_models:
            _emit_models(cfg, args.emit_models)
        _emit(dumps(report), args.out)
        print(
            f"verify {cfg.variant}/{cfg.solver}: max |dev| {report['max_abs_dev']:.6g}, "
            f"violations {report['penalty_violations']}, passed={report['passed']}",
            file=sys.stderr,
        )
        return EXIT_OK if report["passed"] else EXIT_THRESHOLD

    if args.command == "lasso":
        cfg = _config(args, variant=args.variant, solver=args.solver)
        pairs = _parse_pairs(args.pairs) if args.pairs else DEFAULT_LASSO_PAIRS
        report = run_lasso_demo(pairs, cfg, m_hi=args.lasso_m_hi, m_bits=args.bits_m)
        _emit(dumps(report), args.out)
        return EXIT_OK

    if args.command == "convert":
        model_io.write_model(model_io.read_model(args.input), args.output)
        return EXIT_OK
    raise AssertionError(args.command)


def _emit_models(cfg: ExperimentConfig, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    M = verification_penalty(cfg)
    for k, m in enumerate(verification_points(cfg)):
        g = build_verification_gadget(cfg, m, M)
        model_io.write_model(g.model_fragment, directory / f"gadget_{k:03d}.json")
        _emit(dumps(model_io.gadget_metadata(g)), directory / f"gadget_{k:03d}.meta.json")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QuboError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
