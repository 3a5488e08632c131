"""Command-line entry point: ``qrekit <subcommand> ...``.

Each subcommand builds an :class:`~qrekit.harness.ExperimentConfig`, runs
it, prints one line per assertion and optionally writes the JSON report.
The exit code is 0 iff every assertion passed (2 for bad input).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import harness
from ._accel import configure_threads
from .kernels import BACKEND

def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _common(p: argparse.ArgumentParser, seed_default: int | None = 0) -> None:
    p.add_argument("--seed", type=int, default=seed_default, help="64-bit master seed")
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-tc", help="BB84 energy-test verification with a trusted center")
    p.add_argument("--spec", help="Hamiltonian spec JSON file")
    p.add_argument("--instance", action="append", help="library instance name (repeatable)")
    p.add_argument("--strategy", action="append", help="honest | uniform | wrong-basis | fixed:XBITS,ZBITS")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    _common(p)

    p = sub.add_parser("verify-qre", help="two-round protocol compiled through a randomized encoding")
    p.add_argument("--scheme", default="noisy", help="scheme name or JSON file")
    p.add_argument("--spec", help="Hamiltonian spec JSON file")
    p.add_argument("--instance", action="append")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    _common(p)

    p = sub.add_parser("noclone", help="cloner bounds for classical encodings")
    p.add_argument("--scheme", action="append", help="scheme name or JSON file (repeatable)")
    p.add_argument("--k", type=_int_list, default=[1, 2, 3], help="copy counts, e.g. '1,2,3'")
    p.add_argument("--a-grid", type=_float_list, help="threshold grid, e.g. '0.01,0.1'")
    p.add_argument("--csv", help="also write the bound sweep as CSV")
    _common(p)

    p = sub.add_parser("blind-attack", help="key-release attack on blind computing")
    p.add_argument("--backend", choices=("bfk", "mf"), action="append")
    p.add_argument("--xi", type=float, default=math.pi / 2, help="attack angle in radians")
    p.add_argument("--trials", type=int, default=20)
    _common(p)

    p = sub.add_parser("bfk-demo", help="one BFK run with its transcript")
    p.add_argument("--angles", type=_int_list, default=[2, 5], help="octant angles kπ/8, e.g. '2,5'")
    p.add_argument("--n", type=int, help="wire length (default: one more than the number of angles)")
    p.add_argument("--xi", type=float, default=0.0)
    _common(p)

    p = sub.add_parser("run", help="run a suite from flags or a config file")
    p.add_argument("--suite", choices=harness.SUITES)
    p.add_argument("--config", help="ExperimentConfig JSON file")
    _common(p, seed_default=None)
    return parser


def _config(args) -> harness.ExperimentConfig:
    cmd = args.command
    params: dict = {}
    if cmd == "run":
        base = harness.ExperimentConfig.load(args.config).to_dict() if args.config else {}
        suite = args.suite or base.get("suite")
        seed = args.seed if args.seed is not None else base.get("seed")
        out = args.out or base.get("output_path")
        if suite is None:
            raise harness.ConfigError("missing required field 'suite'")
        return harness.ExperimentConfig.from_dict(
            {"suite": suite, "seed": seed, "parameters": base.get("parameters", {}), "output_path": out})
    if cmd in ("verify-tc", "verify-qre"):
        if args.spec:
            params["spec-path"] = args.spec
        if args.instance:
            params["instances"] = args.instance
        params.update(mode=args.mode, trials=args.trials)
        if cmd == "verify-tc" and args.strategy:
            params["strategies"] = args.strategy
        if cmd == "verify-qre":
            params["scheme"] = args.scheme
    elif cmd == "noclone":
        if args.scheme:
            params["schemes"] = args.scheme
        params["k"] = args.k
        if args.a_grid:
            params["a-grid"] = args.a_grid
    elif cmd == "blind-attack":
        params.update(xi=args.xi, trials=args.trials)
        if args.backend:
            params["backends"] = args.backend
    elif cmd == "bfk-demo":
        params.update(angles=args.angles, xi=args.xi)
        if args.n is not None:
            params["n"] = args.n
    return harness.ExperimentConfig(cmd, args.seed, params, args.out)


def _print_report(report: harness.ExperimentReport, command: str) -> None:
    if command == "bfk-demo":
        r = report.results
        t = r["transcript"]
        print(f"angles (octants): {r['angles']}  n={r['n']}  xi={r['xi']:g}")
        if "theta" in t:
            print(f"theta:    {t['theta']} (output {t['theta_out']})")
            print(f"r:        {t['r']}")
            print(f"delta:    {t['delta']}")
        print(f"outcomes: {t['outcomes']}")
        print(f"key:      x={t['key']['x']} z={t['key']['z']}")
        print(f"fidelity: {r['fidelity_to_intended']:.12f}")
    for a in report.assertions:
        status = "PASS" if a.passed else "FAIL"
        print(f"{status}  {a.name}  measured={a.measured:.10g} bound={a.bound:.10g} margin={a.margin:.3g}")
    print(f"{len(report.assertions) - len(report.failures)}/{len(report.assertions)} assertions passed "
          f"in {report.wall_time:.2f}s (kernels: {BACKEND})")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("-h", "--help"):
        argv = ["run"] + argv
    args = build_parser().parse_args(argv)
    configure_threads()
    try:
        config = _config(args)
        report = harness.run_suite(config)
        if args.command == "noclone" and args.csv:
            _write_sweep_csv(report, args.csv)
    except (harness.ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_report(report, args.command)
    return 0 if report.passed else 1


def _write_sweep_csv(report: harness.ExperimentReport, path: str) -> None:
    rows = []
    for entry in report.results.values():
        for rep in entry["reports"]:
            worst = max(rep["lhs"])
            for a, rs, rc in zip(rep["a_grid"], rep["rhs_statistical"], rep["rhs_computational"]):
                rows.append({"scheme": rep["scheme"], "k": rep["k"], "a": a, "max_lhs": worst,
                             "rhs_statistical": rs, "rhs_computational": rc, "margin": rs - worst})
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["scheme"])
        writer.writeheader()
        writer.writerows(rows)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
