"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 checks or reference comparison failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from .config import ExperimentConfig, load_config
from .core import ConfigurationError, DataError
from .integrator import IntegrationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPT = 0, 2, 3, 4
log = logging.getLogger("yeastmc")

_ALIASES = {"rx.": "params.receiver_overrides.", "tx.": "params.transmitter_overrides."}


def _apply_globals(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out_dir is not None:
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, dir=args.out_dir))
    sv = {}
    if args.rtol is not None:
        sv["rtol"] = args.rtol
    if args.atol is not None:
        sv["atol"] = args.atol
    if sv:
        cfg = dataclasses.replace(cfg, solver=dataclasses.replace(cfg.solver, **sv))
    return cfg


def _set_param(cfg: ExperimentConfig, key: str, value: str) -> ExperimentConfig:
    for short, full in _ALIASES.items():
        if key.startswith(short):
            key = full + key[len(short):]
    return cfg.replace_path(key, yaml.safe_load(value))


def _run_and_emit(cfg: ExperimentConfig):
    from .experiment import run_experiment
    from .outputs import emit_outputs
    res = run_experiment(cfg)
    emit_outputs(res)
    return res


def _summary(res) -> str:
    lines = []
    for c in res.checks:
        lines.append(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: {c.value} (target {c.target})")
    if res.events is not None:
        lines.append(f"  events: {res.events.event_count} at {list(round(t, 1) for t in res.events.event_times)} min, "
                     f"{res.events.rate_per_hour:.3f}/h")
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    cfg = _apply_globals(load_config(args.config), args)
    res = _run_and_emit(cfg)
    print(f"{cfg.scenario} ({cfg.strain}) -> {cfg.output.dir}")
    print(_summary(res))
    return EXIT_OK


def _sweep_one(cfg):
    res = _run_and_emit(cfg)
    return {c.name: c.value for c in res.checks}, res.passed, (
        res.events.event_count if res.events is not None else None)


def cmd_sweep(args) -> int:
    base = _apply_globals(load_config(args.config), args)
    variants = []
    for i, v in enumerate(args.values):
        cfg = _set_param(base, args.param, v)
        out = Path(base.output.dir) / f"sweep_{i:03d}"
        variants.append(dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, dir=str(out))))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_one, variants))
    else:
        results = [_sweep_one(c) for c in variants]
    Path(base.output.dir).mkdir(parents=True, exist_ok=True)
    rows = ["index,param,value,events,all_checks_passed"]
    for i, (v, (_, ok, nev)) in enumerate(zip(args.values, results)):
        rows.append(f"{i},{args.param},{v},{'' if nev is None else nev},{ok}")
        print(f"  {args.param}={v}: events={nev} checks={'PASS' if ok else 'FAIL'}")
    (Path(base.output.dir) / "sweep_summary.csv").write_text("\n".join(rows) + "\n", encoding="ascii")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .experiment import run_experiment
    from .outputs import _write_rows, emit_outputs
    from .reference import ReferenceCurve, compare_reference
    cfg = _apply_globals(load_config(args.config), args)
    res = run_experiment(cfg)
    emit_outputs(res)
    ok = res.passed
    print(_summary(res))
    if args.reference:
        ref = ReferenceCurve.from_csv(args.reference)
        fc = res.trajectories.get("fold_change")
        if fc is None:
            raise DataError("scenario produced no fold-change trajectory to compare")
        rep = compare_reference(fc, args.species, ref, args.peak_tol, args.nrmse_tol)
        _write_rows(Path(cfg.output.dir) / "comparison_report.csv", [rep.as_row()])
        print(f"  reference: peak-time error {rep.peak_time_error:.2f} min, NRMSE {rep.nrmse:.3f}, "
              f"amplitude ratio {rep.amplitude_ratio:.3g} -> {'PASS' if rep.passed else 'FAIL'}")
        ok = ok and rep.passed
    return EXIT_OK if ok else EXIT_ACCEPT


def cmd_mc_oracle(args) -> int:
    cfg = _apply_globals(load_config(args.config), args)
    if cfg.scenario != "mc_oracle":
        cfg = dataclasses.replace(cfg, scenario="mc_oracle")
    mc = cfg.mc
    kw = {}
    if args.n_particles is not None:
        kw["n_particles"] = args.n_particles
    if args.dt is not None:
        kw["dt_s"] = args.dt
    if args.workers is not None:
        kw["workers"] = args.workers
    if kw:
        cfg = dataclasses.replace(cfg, mc=dataclasses.replace(mc, **kw))
    res = _run_and_emit(cfg)
    print(_summary(res))
    return EXIT_OK if res.passed else EXIT_ACCEPT


def build_parser() -> argparse.ArgumentParser:
    def common(suppress: bool) -> argparse.ArgumentParser:
        c = argparse.ArgumentParser(add_help=False)
        kw = {"default": argparse.SUPPRESS} if suppress else {}
        c.add_argument("--seed", type=int, help="master seed (overrides config)", **kw)
        c.add_argument("--out-dir", help="output directory (overrides config)", **kw)
        c.add_argument("--rtol", type=float, help="solver relative tolerance", **kw)
        c.add_argument("--atol", type=float, help="solver absolute tolerance (nM)", **kw)
        c.add_argument("-v", "--verbose", action="store_true", **kw)
        return c

    # global flags are accepted before or after the subcommand
    ap = argparse.ArgumentParser(prog="yeastmc", description="Yeast molecular-communication link simulator",
                                 parents=[common(False)])
    shared = common(True)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[shared], help="run one experiment")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[shared], help="rerun an experiment over values of one parameter")
    s.add_argument("config")
    s.add_argument("--param", required=True,
                   help="dotted config path; rx.<name> and tx.<name> address model constants")
    s.add_argument("--values", nargs="+", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("validate", parents=[shared], help="run and check against the built-in criteria and a reference")
    s.add_argument("config")
    s.add_argument("--reference", help="reference CSV (time_min,fold_change,stderr)")
    s.add_argument("--species", default="Fus1")
    s.add_argument("--peak-tol", type=float, default=15.0, help="allowed peak-time error (min)")
    s.add_argument("--nrmse-tol", type=float, default=0.25)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("mc-oracle", parents=[shared], help="Monte Carlo versus analytic channel check")
    s.add_argument("config")
    s.add_argument("--n-particles", type=int)
    s.add_argument("--dt", type=float, help="Monte Carlo time step (s)")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_mc_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # calibration failures and friends
        from .receiver import CalibrationError
        if isinstance(exc, CalibrationError):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise


if __name__ == "__main__":
    sys.exit(main())
