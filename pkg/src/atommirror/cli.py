"""Command-line interface.

Subcommands
-----------
spectrum <config>      engine sweeps -> CSV spectra + JSON envelope
eigen <config>         collective-mode table of the configured chain
band --kd X | --d X    infinite-chain band-gap report
window <config>        ultrahigh-reflection window extraction
zeros <config>         reflection zeros and their phase jumps
optimize --n N         separation maximizing the window width
dissipation <config>   minimum reflectivity in the lossless window vs loss
reproduce <figure_id>  data files behind one published figure panel

Configs are JSON (see README).  Exit codes: 0 success, 2 config error,
3 numerical error, 4 failed --check comparison.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .core import K0
from .eigen import bandgap
from .errors import (
    AtomMirrorError,
    ConfigError,
    InvalidParameterError,
    ResonantDivergenceError,
    SingularMatrixError,
    UnknownFigureError,
)
from .figures import FIGURE_IDS, reproduce
from .io import (
    ResultEnvelope,
    ScenarioConfig,
    atomic_write,
    eigen_report,
    parse_config,
    run_scenario,
    table_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


def _load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path!r}: {exc}"])
    cfg = parse_config(text)
    if overrides:
        doc = cfg.to_dict()
        for dotted, value in overrides.items():
            node = doc
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        cfg = parse_config(json.dumps(doc))
    return cfg


def _cmd_spectrum(args) -> int:
    config = _load_config(args.config)
    envelope = run_scenario(config, outdir=args.outdir)
    engines = envelope.results.get("engines", {})
    for name, summary in engines.items():
        print(f"{name}: {summary['points']} points, max R = {summary['max_R']:.6f}")
    for name, dev in envelope.results.get("cross_engine", {}).items():
        print(f"cross-engine {name}: max|dr| = {dev['max_abs_dr']:.3e}, max|dt| = {dev['max_abs_dt']:.3e}")
    return EXIT_OK


def _cmd_eigen(args) -> int:
    config = _load_config(args.config)
    envelope = eigen_report(config, outdir=args.outdir)
    print(json.dumps(envelope.results["eigen"], default=str, indent=2))
    return EXIT_OK


def _cmd_band(args) -> int:
    if (args.kd is None) == (args.d is None):
        raise ConfigError(["band: exactly one of --kd or --d is required"])
    kd = args.kd if args.kd is not None else K0 * args.d
    gap = bandgap(kd)
    body = {
        "kd": gap.kd,
        "edge_lower": gap.edge_lower,
        "edge_upper": gap.edge_upper,
        "width": gap.width,
    }
    print(json.dumps(body, indent=2))
    if args.out:
        atomic_write(Path(args.out), json.dumps(body, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_window(args) -> int:
    config = _load_config(args.config, {"analysis.window": True})
    envelope = run_scenario(config, outdir=args.outdir)
    report = envelope.results["window"]
    print(
        json.dumps(
            {
                "threshold": report.threshold,
                "lo": report.lo,
                "hi": report.hi,
                "width": report.width,
                "min_r_inside": report.min_r_inside,
                "dip_count": report.dip_count,
            },
            indent=2,
        )
    )
    return EXIT_OK


def _cmd_zeros(args) -> int:
    config = _load_config(args.config, {"analysis.zeros": True})
    envelope = run_scenario(config, outdir=args.outdir)
    zeros = envelope.results["zeros"]
    print(f"{zeros['count']} zeros")
    for z in zeros["crossings"]:
        print(
            f"  delta_omega = {z.delta_omega:+.6f}, |r| = {z.residual_r:.2e}, "
            f"phase jump = {z.phase_jump:.4f} rad"
        )
    return EXIT_OK


def _cmd_optimize(args) -> int:
    from .analysis import optimize_separation

    result = optimize_separation(
        args.n, threshold=args.threshold, d_range=(args.d_min, args.d_max)
    )
    body = {
        "n": result.n,
        "d_star": result.d_star,
        "width_star": result.width_star,
        "evaluations": result.evaluations,
    }
    print(json.dumps(body, indent=2))
    if args.out:
        atomic_write(Path(args.out), json.dumps(body, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_dissipation(args) -> int:
    overrides: dict = {}
    config = _load_config(args.config, overrides)
    if config.dissipation_gammas is None:
        doc = config.to_dict()
        doc["analysis"]["dissipation"] = [0.0, 0.01, 0.1]
        config = parse_config(json.dumps(doc))
    envelope = run_scenario(config, outdir=args.outdir)
    for row in envelope.results["dissipation"]:
        print(
            f"gamma_ext = {row.gamma_ext:g}: min R = {row.min_reflectivity:.6f} "
            f"in [{row.window_lo:.4f}, {row.window_hi:.4f}]"
        )
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    envelope, failures = reproduce(args.figure_id, args.outdir, check=args.check)
    for row in envelope.results.get("checks", []):
        status = "pass" if row["passed"] else "FAIL"
        print(f"[{status}] {row['name']}: {row['detail']}")
    print(f"files written to {Path(args.outdir).resolve()}")
    if args.check and failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atommirror",
        description="Single-photon reflection off an atom chain coupled to a 1D waveguide",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("spectrum", _cmd_spectrum),
        ("eigen", _cmd_eigen),
        ("window", _cmd_window),
        ("zeros", _cmd_zeros),
        ("dissipation", _cmd_dissipation),
    ):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON scenario config")
        p.add_argument("--outdir", default=None, help="output directory (default: config's output.dir)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("band", help="infinite-chain band gap")
    p.add_argument("--kd", type=float, default=None, help="spatial phase k*d in radians")
    p.add_argument("--d", type=float, default=None, help="separation in wavelength units")
    p.add_argument("--out", default=None, help="optional JSON output path")
    p.set_defaults(fn=_cmd_band)

    p = sub.add_parser("optimize", help="separation maximizing the window width")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--threshold", type=float, default=0.99)
    p.add_argument("--d-min", type=float, default=0.001)
    p.add_argument("--d-max", type=float, default=0.5)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_optimize)

    p = sub.add_parser("reproduce", help="emit the data behind one figure panel")
    p.add_argument("figure_id", help=f"one of: {', '.join(FIGURE_IDS)}")
    p.add_argument("--outdir", default=".")
    p.add_argument("--check", action="store_true", help="verify quoted headline numbers")
    p.set_defaults(fn=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except UnknownFigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, ResonantDivergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AtomMirrorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
