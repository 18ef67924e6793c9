"""Command line entry point: ``hopfcert {search,validate,orbit,fixtures}``.

Exit codes: 0 when every attempted validation succeeded, 1 when any failed,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .hopf import HopfCandidate
from .models import FIXTURE_4D_M0, make_field
from .pipeline import (
    ConfigError,
    PairResult,
    RunConfig,
    RunReport,
    analyse_candidate,
    config_from_dict,
    emit_certificates,
    emit_diagram,
    integrate_orbit,
    orbit_csv,
    orbit_initial_condition,
    read_toml,
    run_search,
    _write,
)

# flag -> (section, key, type)
_OVERRIDES = {
    "kind": ("family", "kind", str),
    "n": ("family", "n", int),
    "seed": ("family", "seed", int),
    "amplitude": ("family", "amplitude", float),
    "coupling": ("family", "coupling", str),
    "layers": ("family", "layers", int),
    "k": ("family", "k", int),
    "i": ("family", "i", int),
    "j": ("family", "j", int),
    "gamma0": ("family", "gamma0", float),
    "a": ("family", "a", float),
    "newton_tol": ("solver", "newton_tol", float),
    "max_iter": ("solver", "max_iter", int),
    "R_cap": ("solver", "R_cap", float),
    "R_max": ("solver", "R_max", float),
    "output_dir": (None, "output_dir", str),
    "workers": (None, "workers", int),
}


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML run configuration")
    for name, (_sec, _key, typ) in _OVERRIDES.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    p.add_argument("--pairs", default=None, help='"all" or comma-separated pair indices')


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config:
        data = read_toml(args.config)
    for name, (sec, key, _typ) in _OVERRIDES.items():
        val = getattr(args, name, None)
        if val is None:
            continue
        if sec is None:
            data[key] = val
        else:
            data.setdefault(sec, {})[key] = val
    if getattr(args, "pairs", None) is not None:
        if args.pairs == "all":
            data["pairs"] = "all"
        else:
            try:
                data["pairs"] = [int(p) for p in args.pairs.split(",") if p]
            except ValueError as exc:
                raise ConfigError(f"bad --pairs value {args.pairs!r}") from exc
    return config_from_dict(data)


def _summary(report: RunReport) -> str:
    lines = []
    for r in report.results:
        g = f"{r.candidate.gamma:+.12f}" if r.found else "-"
        sign = r.lyapunov.sign.value if r.lyapunov is not None else "-"
        gap = "-" if r.spectrum is None else ("pass" if r.spectrum.passed else "fail")
        lines.append(f"pair {r.pair_index:3d}  gamma {g}  {r.status:13s} gap {gap:4s} l1 {sign:12s} {r.message}")
    c = report.counts()
    lines.append(
        f"found {c['found']}  validated {c['validated']}  gap {c['gap_passed']}  "
        f"non-degenerate {c['nondegenerate']}  ({report.timing:.2f}s)"
    )
    return "\n".join(lines)


def cmd_search(args) -> int:
    cfg = resolve_config(args)
    report = run_search(cfg)
    emit_certificates(report, cfg.output_dir)
    emit_diagram(report, cfg.output_dir)
    print(_summary(report))
    return 0 if report.all_succeeded else 1


def cmd_validate(args) -> int:
    cfg = resolve_config(args)
    try:
        rec = json.loads(Path(args.certificate).read_text())
        c = rec["candidate"]
        cand = HopfCandidate(
            x=np.array([float(v) for v in c["x"]]),
            gamma=float(c["gamma"]),
            lambda_i=float(c["lambda_i"]),
            v_r=np.array([float(v) for v in c["v_r"]]),
            v_i=np.array([float(v) for v in c["v_i"]]),
            phi=np.array([float(v) for v in c["phi"]]),
        )
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{args.certificate}: cannot read candidate ({exc})") from exc
    vf = make_field(cfg.family.structure())
    if cand.n != vf.n:
        raise ConfigError(f"candidate has dimension {cand.n}, family has {vf.n}")
    result = analyse_candidate(vf, cand, cfg.solver, PairResult(int(rec.get("pair_index", 0)), stage="newton"))
    report = RunReport(cfg, [result])
    print(_summary(report))
    return 0 if result.nondegenerate else 1


def cmd_orbit(args) -> int:
    cfg = resolve_config(args)
    report = run_search(cfg)
    vf = make_field(cfg.family.structure())
    start = orbit_initial_condition(vf, report, cfg.orbit)
    if start is None:
        print("no validated Hopf point; nothing to integrate", file=sys.stderr)
        return 1
    gamma, x0 = start
    o = cfg.orbit
    ts, xs = integrate_orbit(vf, gamma, x0, o.step, o.horizon, o.sample_every)
    path = Path(cfg.output_dir) / f"orbit_{o.mode}.csv"
    _write(path, orbit_csv(ts, xs, o.coords))
    print(f"gamma {gamma!r}  wrote {path}")
    return 0


def fixture_toml() -> str:
    rows = "\n".join("#   " + "  ".join(f"{v:>8s}" for v in row) for row in FIXTURE_4D_M0)
    return (
        "# x' = -tanh((M0 + 0.1*gamma*Id) x) with\n"
        f"{rows}\n"
        'name = "fixture4d"\n'
        'output_dir = "out/fixture4d"\n\n'
        "[family]\n"
        'kind = "fixture4d"\n'
    )


def cmd_fixtures(args) -> int:
    text = fixture_toml()
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopfcert", description="Find and certify Hopf bifurcations in RNN vector fields.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("search", help="run the full pipeline over all eigenvalue pairs")
    _add_config_flags(p)
    p.set_defaults(func=cmd_search)
    p = sub.add_parser("validate", help="re-validate one candidate from a certificate file")
    _add_config_flags(p)
    p.add_argument("certificate", help="certificate JSON written by 'search'")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("orbit", help="export a (non-rigorous) transient orbit near the last Hopf point")
    _add_config_flags(p)
    p.set_defaults(func=cmd_orbit)
    p = sub.add_parser("fixtures", help="write the 4D benchmark configuration")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
