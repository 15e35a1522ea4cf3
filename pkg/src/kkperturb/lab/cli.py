"""Command line entry point: ``kkperturb <command> [options]``."""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional, Sequence

from .report import OUT_ENV, DeterminismError, ReportIOError, emit_report
from . import suites as S


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _k_spec(text: str) -> dict:
    """``"0,0=2;1,0=0.5;-1,0=0.5"`` -> ``{(0,0): 2, (1,0): .5, (-1,0): .5}``."""
    out = {}
    try:
        for term in text.split(";"):
            if not term.strip():
                continue
            key, val = term.split("=")
            p, r = (int(x) for x in key.split(","))
            out[(p, r)] = _complex(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --k term in {text!r}; use 'p,r=coef;...'")
    return out


def _generators(text: str) -> List[tuple]:
    """``"1,0,0;0,0,-1"`` or ``"all"``."""
    if text == "all":
        from ..heisenberg import GENERATORS
        return list(GENERATORS)
    try:
        gens = [tuple(int(x) for x in t.split(",")) for t in text.split(";") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad generator list {text!r}")
    if any(len(g) != 3 for g in gens):
        raise argparse.ArgumentTypeError("generators are triples a,b,c")
    return gens


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kkperturb",
        description="Reproducible verification runs for conformal perturbations of "
                    "spectral triples.")
    p.add_argument("--out", default=None,
                   help=f"output directory (default: ${OUT_ENV} or ./kkperturb-out)")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", metavar="command")

    v = sub.add_parser("verify", help="randomized operator inequality suites")
    v.add_argument("suite", choices=sorted(S.VERIFY_SUITES))
    v.add_argument("--seed", type=int, default=None, dest="sub_seed")
    v.add_argument("--draws", type=int, default=None)

    t = sub.add_parser("torus", help="conformal sweep on the noncommutative torus")
    t.add_argument("--theta", type=float, default=None)
    t.add_argument("--tau", type=_complex, default=1j)
    t.add_argument("--n-list", type=_int_list, default=[8, 12, 16, 20, 24])
    t.add_argument("--beta", type=float, default=0.5)
    t.add_argument("--k", type=_k_spec, default=None,
                   help="Laurent coefficients 'p,r=coef;...' of k in U, V")

    q = sub.add_parser("podles", help="quantum sphere checks and sweeps")
    q.add_argument("--q", type=float, default=0.5)
    q.add_argument("--l-max", type=float, default=3.0,
                   help="truncation spin for checks; largest spin for the twisted sweep")
    q.add_argument("--suite", choices=S.PODLES_SUITES, default="relations")

    h = sub.add_parser("heisenberg", help="commutator bounds on the Heisenberg lattice")
    h.add_argument("--radii", type=_int_list, default=[10, 20, 40, 80])
    h.add_argument("--generators", type=_generators, default=None)

    d = sub.add_parser("log-dampen", help="log-transform difference under D -> kappa D")
    d.add_argument("--kappa", type=float, default=2.0)
    d.add_argument("--n-list", type=_int_list, default=[64, 128, 256, 512])
    return p


def run(args: argparse.Namespace) -> S.SuiteResult:
    seed = args.seed
    if args.command == "verify":
        if args.sub_seed is not None:
            seed = args.sub_seed
        kw = {"seed": seed}
        if args.draws is not None:
            if args.suite == "quadrature":
                raise SystemExit("kkperturb verify quadrature: --draws is not supported")
            kw["draws"] = args.draws
        return S.VERIFY_SUITES[args.suite](**kw)
    if args.command == "torus":
        return S.torus_suite(args.theta, args.tau, args.n_list, args.beta, args.k, seed)
    if args.command == "podles":
        if args.suite == "twisted":
            top = int(round(2 * args.l_max))
            l_list = [k / 2 for k in range(3, top + 1, 2)]
            return S.podles_suite(args.q, suite="twisted", l_list=l_list, seed=seed)
        return S.podles_suite(args.q, args.l_max, args.suite, seed=seed)
    if args.command == "heisenberg":
        return S.heisenberg_suite(args.radii, args.generators, seed=seed)
    if args.command == "log-dampen":
        return S.log_dampen_suite(args.kappa, args.n_list, seed=seed)
    raise ValueError(args.command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        result = run(args)
    except (ValueError, SystemExit) as exc:
        print(f"kkperturb: {exc}", file=sys.stderr)
        return 2
    for line in result.summary_lines():
        print(line)
    out = result.config.out_dir() if args.out is None else args.out
    from pathlib import Path
    path = Path(out) / f"{result.suite}-{result.config.config_hash[:12]}.json"
    try:
        emit_report(result.sweeps, path, suite=result.suite, checks=result.checks,
                    config=result.config)
    except (DeterminismError, ReportIOError) as exc:
        print(f"kkperturb: {exc}", file=sys.stderr)
        return 1
    print(f"report: {path}")
    bad = result.failures()
    if bad:
        print("FAILED: " + ", ".join(bad), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
