"""Command line entry point: ``asnfit <command> [options]``.

Output goes to stdout only after the whole command has succeeded. Failures
print one JSON object ``{"error": kind, "message": ...}`` on stderr and exit
with 2 (usage), 3 (data) or 4 (convergence).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import distribution as dist
from .data import load_csv, log_transform, pooled_values, summarize, write_csv
from .distribution import AsnParams
from .errors import ConvergenceError, DataError, DegenerateDataError, DomainError
from .estimators import Method, fit
from .gof import ks_test
from .montecarlo import SimConfig, run_study

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _methods(text):
    try:
        return [Method.parse(x) for x in text.split(",") if x.strip()]
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_params(p):
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)


def _add_input(p):
    p.add_argument("--input", required=True, help="CSV file of monthly fluxes")
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("--strict", action="store_true",
                   help="reject the file when more than half the rows are malformed")
    p.add_argument("--station", default=None, help="fit one station instead of the pooled data")
    p.add_argument("--log", action="store_true", help="fit the natural log of the positive fluxes")


def _params(args) -> AsnParams:
    return AsnParams(args.mu, args.sigma, args.alpha)


def _sample_from_input(args):
    coll = load_csv(args.input, args.layout, strict=args.strict)
    info = {"malformed_rows": len(coll.errors)}
    if args.log:
        ls = log_transform(coll, args.station)
        info.update(ls.to_dict())
        return ls.sample, info
    s = pooled_values(coll, args.station)
    info["n_used"] = s.n
    return s, info


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def cmd_fit(args) -> str:
    sample, info = _sample_from_input(args)
    methods = list(Method) if args.all_methods else [args.method]
    results = [fit(sample, m) for m in methods]
    failed = [r.method.value for r in results if not r.converged]
    if failed and not args.allow_nonconverged:
        raise ConvergenceError(f"optimiser did not converge for {','.join(failed)}")
    if args.table:
        lines = [f"{'method':<6} {'mu':>12} {'sigma':>12} {'alpha':>12} {'objective':>14} conv"]
        for r in results:
            p = r.params
            lines.append(f"{r.method.value:<6} {p.mu:>12.6g} {p.sigma:>12.6g} {p.alpha:>12.6g} "
                         f"{r.objective:>14.8g} {'yes' if r.converged else 'no'}")
        return "\n".join(lines) + "\n"
    if args.all_methods:
        return _json({"data": info, "fits": [r.to_dict() for r in results]})
    out = results[0].to_dict()
    out["data"] = info
    return _json(out)


def cmd_gof(args) -> str:
    sample, info = _sample_from_input(args)
    res = fit(sample, args.method)
    if not res.converged:
        raise ConvergenceError(f"optimiser did not converge for {res.method.value}")
    report = ks_test(sample, res.params, res.method)
    out = report.to_dict()
    out["params"] = res.params.to_dict()
    out["data"] = info
    return _json(out)


def cmd_simulate(args) -> str:
    config = SimConfig(
        truth=_params(args),
        n_grid=tuple(args.n_grid),
        replications=args.reps,
        methods=tuple(args.methods),
        master_seed=args.seed,
        init=args.init,
    )
    text = run_study(config, workers=args.workers).to_csv()
    if args.out:
        try:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc}") from exc
        return ""
    return text


def cmd_sample(args) -> str:
    x = dist.sample(_params(args), args.n, args.seed)
    return "".join(f"{v!r}\n" for v in x.tolist())


def cmd_quantile(args) -> str:
    q = dist.quantile(_params(args), np.asarray(args.p, dtype=float))
    if args.exp:
        q = np.exp(q)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "flux" if args.exp else "quantile"])
    for p, v in zip(args.p, q.tolist()):
        w.writerow([repr(p), repr(v)])
    return buf.getvalue()


def cmd_curve(args) -> str:
    if args.points < 2:
        raise DomainError("--points must be >= 2")
    if not args.to > args.from_:
        raise DomainError("--to must exceed --from")
    params = _params(args)
    t = np.linspace(args.from_, args.to, args.points)
    f = dist.pdf(params, t)
    F = dist.cdf(params, t)
    lines = ["t,pdf,cdf"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), f.tolist(), F.tolist())]
    return "\n".join(lines) + "\n"


def cmd_summarize(args) -> str:
    coll = load_csv(args.input, args.layout, strict=args.strict)
    rows = summarize(coll)
    if args.json:
        return _json([r.to_dict() for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["month", "min", "q1", "median", "mean", "q3", "max", "na"])
    for r in rows:
        w.writerow([r.month] + ["NA" if v is None else f"{v:.6g}" for v in
                               (r.min, r.q1, r.median, r.mean, r.q3, r.max)] + [r.na_count])
    return buf.getvalue()


def cmd_convert(args) -> str:
    coll = load_csv(args.input, args.layout, strict=args.strict)
    return write_csv(coll, layout=args.to_layout)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asnfit", description="Alpha-skew-normal fitting and simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit ASN parameters to a flux file")
    _add_input(p)
    p.add_argument("--method", type=Method.parse, default=Method.ADE)
    p.add_argument("--all-methods", action="store_true")
    p.add_argument("--table", action="store_true", help="plain-text table instead of JSON")
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="Kolmogorov-Smirnov test of a fit")
    _add_input(p)
    p.add_argument("--method", type=Method.parse, default=Method.ADE)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("simulate", help="Monte Carlo bias/MSE study")
    _add_params(p)
    p.add_argument("--n-grid", type=_ints, default=[40, 100, 200])
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--methods", type=_methods, default=list(Method))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--init", choices=("data", "truth"), default="data")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="draw variates, one per line")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("quantile", help="quantile table")
    _add_params(p)
    p.add_argument("--p", type=_floats, default=[0.01, 0.1, 0.5, 0.99, 0.9999])
    p.add_argument("--exp", action="store_true", help="exponentiate (log-scale fit to flux scale)")
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("curve", help="pdf and cdf on a grid, as CSV")
    _add_params(p)
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--points", type=int, default=401)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("summarize", help="per-month summary statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("convert", help="rewrite a flux file in the other layout")
    p.add_argument("--input", required=True)
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("--to-layout", choices=("long", "wide"), required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_convert)

    return parser


def _fail(kind: str, message: str, code: int) -> int:
    line = json.dumps({"error": kind, "message": " ".join(str(message).split())})
    sys.stderr.write(line + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except (DataError, DegenerateDataError) as exc:
        return _fail("data", exc, EXIT_DATA)
    except ConvergenceError as exc:
        return _fail("convergence", exc, EXIT_CONVERGENCE)
    except DomainError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
