"""Command-line front end.

Subcommands: fiber, certify, measure, minvset, cantor, periodic, threshold.
Exit codes: 0 success, 1 computational failure (failed certificate, no
escape radius, budget exhausted), 2 usage error.  Data goes to files under
--out (or stdout for fiber/threshold); diagnostics go to stderr.  A JSON
config file can be merged under the flags (flags win).  Identical config,
seed, and inputs produce byte-identical outputs for any --threads value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from ._backend import BACKEND
from ._parallel import default_threads
from .algebra import INFINITY, parse_poly
from .correspondence import Correspondence, FamilySpec, certify
from .diffop import build_Tn, hutchinson_threshold, parse_operator
from .errors import CorrdynError
from .invset import cantor_diagnostics, find_periodic_points, min_invariant_set
from .measure import (
    convergence_report,
    exact_pushforward,
    max_affordable_depth,
    measure_distance,
    moment_dictionary,
    sample_orbit_measure,
)
from .serialize import dumps, fmt_float, write_atomic

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _parse_complex(text: str) -> complex:
    p = parse_poly(text)
    if p.deg_w > 0 or p.deg_z > 0:
        raise UsageError(f"--at/--a expects a complex constant, got {text!r}")
    return p.coeff(0, 0)


def _load_family(arg: str) -> FamilySpec:
    text = arg
    if not arg.lstrip().startswith("{"):
        with open(arg) as fh:
            text = fh.read()
    return FamilySpec.from_jsonable(json.loads(text))


def _build_correspondence(args) -> Correspondence:
    sources = [s for s in ("curve", "family", "op") if getattr(args, s, None)]
    if len(sources) != 1:
        raise UsageError("exactly one of --curve, --family, --op is required")
    if args.curve:
        return Correspondence(parse_poly(args.curve))
    if args.family:
        from .correspondence import build_family

        return build_family(_load_family(args.family))
    if args.n is None:
        raise UsageError("--op requires --n")
    return build_Tn(parse_operator(args.op), args.n).correspondence


def _get_family(args) -> FamilySpec:
    if getattr(args, "family", None):
        return _load_family(args.family)
    if getattr(args, "op", None):
        if args.n is None:
            raise UsageError("--op requires --n")
        build = build_Tn(parse_operator(args.op), args.n)
        if build.family is None:
            raise UsageError(f"no family form for this operator: {build.warnings}")
        return build.family
    raise UsageError("one of --family, --op is required")


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _fmt_point(p) -> str:
    if p is INFINITY:
        return "inf"
    if p.imag == 0.0:
        return fmt_float(p.real)
    sign = "+" if p.imag >= 0 else "-"
    return f"{fmt_float(p.real)}{sign}{fmt_float(abs(p.imag))}i"


def cmd_fiber(args) -> int:
    C = _build_correspondence(args)
    rm = C.fiber(_parse_complex(args.at))
    for v, m in rm.entries:
        line = _fmt_point(v)
        if m > 1:
            line += f" (multiplicity {m})"
        print(line)
    return EXIT_OK


def cmd_certify(args) -> int:
    spec = _get_family(args)
    cert = certify(spec, samples_per_disk=args.samples, threads=args.threads)
    write_atomic(_out_path(args, "certificate.json"), dumps(cert.to_jsonable()))
    print(_out_path(args, "certificate.json"))
    if not cert.passed:
        print(f"certificate failed ({cert.n_violations} violations)", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def cmd_measure(args) -> int:
    C = _build_correspondence(args)
    a = _parse_complex(args.a)
    radius = 2.0 * max(4.0, args.window)
    test_dict = moment_dictionary(4, radius)
    wrote = []
    if args.kind in ("exact", "both"):
        m = args.m if args.m is not None else max_affordable_depth(C.d, args.budget)
        report, mu = convergence_report(
            C, a, m, grid_eps=args.grid_eps, window_radius=args.window,
            test_dict=test_dict, budget=args.budget, threads=args.threads)
        write_atomic(_out_path(args, "measure_exact.json"), dumps(mu.to_jsonable()))
        write_atomic(_out_path(args, "convergence.csv"), report.to_csv())
        wrote += ["measure_exact.json", "convergence.csv"]
    if args.kind in ("mc", "both"):
        mc = sample_orbit_measure(C, a, burn_in=args.burn_in, samples=args.samples,
                                  seed=args.seed, threads=args.threads)
        write_atomic(_out_path(args, "measure_mc.json"), dumps(mc.to_jsonable()))
        wrote.append("measure_mc.json")
    if args.kind == "both":
        mu_exact = exact_pushforward(
            C, a, args.m if args.m is not None else max_affordable_depth(C.d, args.budget),
            budget=args.budget, threads=args.threads)
        gd = measure_distance(mu_exact, mc, args.grid_eps, args.window)
        write_atomic(_out_path(args, "agreement.json"),
                     dumps({"tv": gd.tv, "moment_diff": gd.moment_diff}))
        wrote.append("agreement.json")
    for name in wrote:
        print(_out_path(args, name))
    return EXIT_OK


def cmd_minvset(args) -> int:
    T = parse_operator(args.op)
    S = min_invariant_set(T, args.n, args.eps, max_atoms=args.max_atoms,
                          threads=args.threads,
                          allow_uncertified=args.allow_uncertified)
    write_atomic(_out_path(args, "cellset.json"), dumps(S.to_jsonable()))
    print(_out_path(args, "cellset.json"))
    if args.format == "ppm":
        write_atomic(_out_path(args, "cellset.ppm"), S.to_ppm())
        print(_out_path(args, "cellset.ppm"))
    if not S.certified:
        print("warning: UNCERTIFIED output (contraction certificate failed)",
              file=sys.stderr)
    if S.truncated:
        print("warning: expansion truncated at max-atoms", file=sys.stderr)
    return EXIT_OK


def cmd_cantor(args) -> int:
    T = parse_operator(args.op)
    eps_list = [float(t) for t in args.eps_list.split(",")]
    report = cantor_diagnostics(T, args.n, eps_list, max_atoms=args.max_atoms,
                                threads=args.threads)
    write_atomic(_out_path(args, "cantor.csv"), report.to_csv())
    print(_out_path(args, "cantor.csv"))
    print(
        f"totally_disconnected_trend={report.totally_disconnected_trend} "
        f"perfect_trend={report.perfect_trend}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_periodic(args) -> int:
    T = parse_operator(args.op)
    orbits = find_periodic_points(T, args.n, max_len=args.max_len,
                                  count=args.count, tol=args.tol,
                                  threads=args.threads)
    write_atomic(_out_path(args, "periodic.json"),
                 dumps([o.to_jsonable() for o in orbits]))
    print(_out_path(args, "periodic.json"))
    return EXIT_OK


def cmd_threshold(args) -> int:
    T = parse_operator(args.op)
    N = hutchinson_threshold(T, n_max=args.n_max, threads=args.threads)
    if N is None:
        print(f"no certified n up to {args.n_max}", file=sys.stderr)
        return EXIT_COMPUTE
    print(N)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: CORRDYN_THREADS or cpu count)")
    p.add_argument("--config", default=None, help="JSON config merged under flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="corrdyn",
        description="Iterate holomorphic correspondences, estimate their "
                    "equidistribution measures, and compute minimal "
                    "Hutchinson invariant sets.",
    )
    ap.add_argument("--version", action="version",
                    version=f"corrdyn {__version__} ({BACKEND} backend)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fiber", help="print the fiber of a point")
    p.add_argument("--curve", default=None, help="curve polynomial in z, w")
    p.add_argument("--family", default=None, help="family spec JSON (path or inline)")
    p.add_argument("--op", default=None, help="operator literal, e.g. (w^2-1)*D^2 + D")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--at", required=True, help="complex point, e.g. 4 or 0.5+2i")
    _add_common(p)
    p.set_defaults(fn=cmd_fiber)

    p = sub.add_parser("certify", help="emit the contraction certificate")
    p.add_argument("--family", default=None)
    p.add_argument("--op", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--samples", type=int, default=256, help="samples per circle")
    _add_common(p)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("measure", help="equidistribution pipeline")
    p.add_argument("--curve", default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--op", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--a", required=True, help="seed point")
    p.add_argument("--m", type=int, default=None, help="depth (default: budget-limited)")
    p.add_argument("--kind", choices=("exact", "mc", "both"), default="exact")
    p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo samples")
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--grid-eps", type=float, default=0.1)
    p.add_argument("--window", type=float, default=8.0)
    _add_common(p)
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("minvset", help="minimal invariant set covering")
    p.add_argument("--op", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-atoms", type=int, default=200_000)
    p.add_argument("--format", choices=("json", "ppm"), default="json")
    p.add_argument("--allow-uncertified", action="store_true",
                   help="run on a failing certificate; output labeled")
    _add_common(p)
    p.set_defaults(fn=cmd_minvset)

    p = sub.add_parser("cantor", help="structure diagnostics across resolutions")
    p.add_argument("--op", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps-list", required=True, help="comma-separated eps values")
    p.add_argument("--max-atoms", type=int, default=200_000)
    _add_common(p)
    p.set_defaults(fn=cmd_cantor)

    p = sub.add_parser("periodic", help="attracting periodic orbits")
    p.add_argument("--op", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--count", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(fn=cmd_periodic)

    p = sub.add_parser("threshold", help="smallest certified degree n")
    p.add_argument("--op", required=True)
    p.add_argument("--n-max", type=int, default=2 ** 20)
    _add_common(p)
    p.set_defaults(fn=cmd_threshold)

    return ap


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser,
                  argv: list[str]) -> None:
    """Config file values fill in flags the user did not pass."""
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    passed = {t.split("=")[0].lstrip("-").replace("-", "_")
              for t in argv if t.startswith("--")}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"unknown config field {key!r}")
        if attr not in passed:
            setattr(args, attr, value)


def _validate(args: argparse.Namespace) -> None:
    for field in ("eps", "tol", "grid_eps", "window"):
        v = getattr(args, field, None)
        if v is not None and v <= 0:
            raise UsageError(f"{field} must be positive, got {v}")
    for field in ("n", "m", "max_atoms", "budget", "samples", "count",
                  "max_len", "n_max", "burn_in"):
        v = getattr(args, field, None)
        if v is not None and v < 0:
            raise UsageError(f"{field} must be nonnegative, got {v}")
    if getattr(args, "threads", None) is None:
        args.threads = default_threads()
    if args.threads < 1:
        raise UsageError(f"threads must be >= 1, got {args.threads}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args, parser, argv)
        _validate(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorrdynError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    raise SystemExit(main())
