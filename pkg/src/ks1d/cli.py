"""Command-line front end.

Subcommands:
    ks1d run --config <path> [--out <dir>]
    ks1d certify (--alpha <a> | --table <csv>) --q <q>
                 (--mass <M> | --search <min>:<max>) [--n <cells>] [--out <dir>]
    ks1d inequalities [--suite <name>[,<name>...]] [--delta <d>] [--seed <n>]
                      [--samples <k>] [--out <dir>]
    ks1d sweep --config <path> --axis <key>=<v1,v2,...> [--jobs <n>] [--out <dir>]

Exit codes: 0 clean, 2 when invariant monitors flag violations,
1 on operational errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ScenarioConfig, load_config
from .errors import KS1DError
from .scenarios import run_scenario, run_sweep

_SUITES = ("exp-embedding", "sobolev", "llogl", "counterexample",
           "critical-mass")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ks1d",
        description="1D chemotaxis lab: simulation, blowup certificates, "
                    "and functional-inequality checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--out", type=Path, default=None,
                       help="output directory (overrides config out_dir)")

    p_cert = sub.add_parser("certify", help="evaluate the blowup certificate")
    model = p_cert.add_mutually_exclusive_group(required=True)
    model.add_argument("--alpha", type=float)
    model.add_argument("--table", type=Path)
    p_cert.add_argument("--q", type=float, required=True)
    target = p_cert.add_mutually_exclusive_group(required=True)
    target.add_argument("--mass", type=float)
    target.add_argument("--search", metavar="MIN:MAX",
                        help="bisect the certified-mass threshold")
    p_cert.add_argument("--eps", type=float, default=None,
                        help="relaxation parameter (default mass**(1-q))")
    p_cert.add_argument("--n", type=int, default=512, dest="n_cells")
    p_cert.add_argument("--out", type=Path, default=Path("ks1d_out"))

    p_ineq = sub.add_parser("inequalities",
                            help="randomized inequality checks")
    p_ineq.add_argument("--suite", default=None,
                        help=f"comma-separated subset of {', '.join(_SUITES)}"
                             " (default: all)")
    p_ineq.add_argument("--delta", type=float, default=1.0 / 24.0)
    p_ineq.add_argument("--seed", type=int, default=0)
    p_ineq.add_argument("--samples", type=int, default=200)
    p_ineq.add_argument("--nu", type=float, default=1.0)
    p_ineq.add_argument("--n", type=int, default=2048, dest="n_cells")
    p_ineq.add_argument("--out", type=Path, default=Path("ks1d_out"))

    p_sweep = sub.add_parser("sweep", help="run a config across an axis")
    p_sweep.add_argument("--config", required=True, type=Path)
    p_sweep.add_argument("--axis", required=True, metavar="KEY=V1,V2,...")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", type=Path, default=None)
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    code = run_scenario(config, out_dir=args.out)
    out = Path(args.out if args.out is not None else config.out_dir)
    print(f"[ks1d] scenario={config.scenario} exit={code} artifacts={out}")
    return code


def _cmd_certify(args) -> int:
    config = ScenarioConfig(scenario="certificate", n_cells=args.n_cells,
                            q=args.q, out_dir=str(args.out))
    if args.table is not None:
        config.diffusion_table = str(args.table)
    else:
        config.alpha = args.alpha
    if args.eps is not None:
        config.cert_eps = args.eps
    if args.search is not None:
        lo, sep, hi = args.search.partition(":")
        if not sep:
            raise KS1DError("--search expects MIN:MAX")
        config.scenario = "threshold-scan"
        config.m_lo, config.m_hi = float(lo), float(hi)
    else:
        config.mass = args.mass
    code = run_scenario(config)
    name = ("threshold.json" if config.scenario == "threshold-scan"
            else "certificate.json")
    print(f"[ks1d] certificate exit={code} report={Path(config.out_dir) / name}")
    return code


def _cmd_inequalities(args) -> int:
    config = ScenarioConfig(scenario="inequalities", n_cells=args.n_cells,
                            seed=args.seed, samples=args.samples,
                            nu=args.nu, delta=args.delta,
                            out_dir=str(args.out))
    suites = None
    if args.suite:
        suites = tuple(s.strip() for s in args.suite.split(",") if s.strip())
    code = run_scenario(config, suites=suites)
    print(f"[ks1d] inequalities exit={code} "
          f"report={Path(config.out_dir) / 'inequalities.json'}")
    return code


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    key, sep, raw = args.axis.partition("=")
    if not sep or not key:
        raise KS1DError("--axis expects KEY=V1,V2,...")
    values = [float(v) for v in raw.split(",") if v.strip()]
    out = args.out if args.out is not None else config.out_dir
    code = run_sweep(config, key.strip(), values, out_dir=out,
                     jobs=args.jobs)
    print(f"[ks1d] sweep axis={key} runs={len(values)} exit={code} "
          f"index={Path(out) / 'index.json'}")
    return code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "certify": _cmd_certify,
                "inequalities": _cmd_inequalities, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except KS1DError as exc:
        print(f"[ks1d] error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"[ks1d] error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
