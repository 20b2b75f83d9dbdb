"""Command-line driver: ``splitmin {solve,check,oracle,cover,verify}``.

Exit codes: 0 success, 1 usage or malformed input, 2 runtime failure
(infinite message, state space over the cap, certificate failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .beliefs import check_admissible, check_min_consistent, compute_beliefs, extract_estimate
from .covers import CertificateError, build_two_cover_certificate
from .engine import RunReport, Schedule, Status, run
from .fgm import FormatError, parse_model, parse_params, trmp_params_from_text
from .graph import DEFAULT_STATE_CAP, FactorGraph, GraphError, StateSpaceTooLarge, brute_force_minimize
from .messages import MessageState
from .params import Optimality, ParamsError, SplitParams, classify_params, make_uniform_params

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(v: float) -> str:
    return f"{v:.12g}"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_model(path: str) -> FactorGraph:
    try:
        return parse_model(_read(path))
    except FormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_params(source: str, g: FactorGraph) -> SplitParams:
    if source == "ones":
        return SplitParams.ones(g)
    if source == "uniform":
        return make_uniform_params(g)
    kind, _, path = source.partition(":")
    if kind in ("trmp", "file") and path:
        text = _read(path)
        try:
            return trmp_params_from_text(text, g) if kind == "trmp" else parse_params(text, g)
        except FormatError as exc:
            raise UsageError(f"{path}: {exc}") from None
    raise UsageError(f"unknown params source {source!r} (ones, uniform, trmp:<path>, file:<path>)")


def _schedule(args) -> Schedule:
    try:
        return Schedule.parse(args.schedule, args.order)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def format_report(g: FactorGraph, c: SplitParams, rep: RunReport) -> str:
    cls = classify_params(c, g)
    lines = [
        f"status {rep.status.value}",
        f"sweeps {rep.sweeps}",
        f"final_delta {_num(rep.final_delta)}",
        f"class {cls.kind.value}",
    ]
    if rep.error:
        lines.append(f"error {rep.error}")
    if rep.estimate is not None:
        if rep.estimate.unique:
            x = rep.estimate.assignment
            lines.append("estimate " + " ".join(map(str, x)))
            lines.append(f"objective {_num(g.evaluate(x))}")
        else:
            lines.append("estimate none")
            sets = (",".join(map(str, s)) for s in rep.estimate.argmin_sets)
            lines.append("argmin_sets " + " ".join("{" + s + "}" for s in sets))
    if rep.lb_trace:
        lines.append(f"lower_bound {_num(rep.lb_trace[-1])}")
    return "\n".join(lines) + "\n"


def trace_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sweep", "lb", "max_belief_delta"])
    for s, d in enumerate(rep.delta_trace, start=1):
        lb = _num(rep.lb_trace[s]) if rep.lb_trace is not None else ""
        w.writerow([s, lb, _num(d)])
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _solve(args, g: FactorGraph, c: SplitParams) -> RunReport:
    try:
        return run(
            g, c, _schedule(args), tol=args.tol, max_sweeps=args.max_sweeps, damping=args.damping
        )
    except (ValueError, ParamsError) as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args, out) -> int:
    g = load_model(args.model)
    c = load_params(args.params, g)
    rep = _solve(args, g, c)
    text = format_report(g, c, rep)
    out.write(text)
    if args.report:
        _write(args.report, text)
    if args.trace:
        _write(args.trace, trace_csv(rep))
    if args.save_state and rep.state is not None:
        _write(args.save_state, json.dumps(rep.state.to_json(), indent=1) + "\n")
    if args.figure:
        from .plotting import plot_trace

        plot_trace(rep, args.figure)
    return EXIT_RUNTIME if rep.status is Status.INFINITE_MESSAGE else EXIT_OK


def cmd_check(args, out) -> int:
    g = load_model(args.model)
    c = load_params(args.params, g)
    cls = classify_params(c, g)
    head = cls.kind.value
    if cls.kind is not Optimality.GLOBAL_SIGN:
        head += f"; GlobalSign FAILED at {cls.failures['GlobalSign'][0]}"
    out.write(head + "\n")
    for name in ("GlobalSign", "GlobalConical", "LocalOnly"):
        fails = cls.failures[name]
        out.write(f"{name}: {'holds' if not fails else 'FAILED'}\n")
        for f in fails:
            out.write(f"  {f}\n")
    out.write(f"async_convergent: {str(cls.async_convergent).lower()}\n")
    out.write(f"standard_minsum: {str(cls.standard_minsum).lower()}\n")
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    g = load_model(args.model)
    value, xs = brute_force_minimize(g, args.cap)
    out.write(f"min {_num(value)}, {len(xs)} minimizer{'s' if len(xs) != 1 else ''}\n")
    for x in xs[: args.show]:
        out.write(" ".join(map(str, x)) + "\n")
    if len(xs) > args.show:
        out.write(f"... {len(xs) - args.show} more\n")
    return EXIT_OK


def cmd_cover(args, out) -> int:
    g = load_model(args.model)
    if not (g.is_pairwise() and g.is_binary()):
        raise UsageError("cover needs a pairwise binary model")
    c = load_params(args.params, g)
    rep = _solve(args, g, c)
    out.write(format_report(g, c, rep))
    if rep.status is not Status.CONVERGED:
        out.write("no certificate: run did not converge\n")
        return EXIT_RUNTIME
    cert = build_two_cover_certificate(g, rep.beliefs)
    out.write(cert.dump() + "\n")
    g_min, _ = brute_force_minimize(g, args.cap)
    h_min, _ = brute_force_minimize(cert.cover.cover, args.cap)
    out.write(f"cover_min {_num(h_min)}\n")
    out.write(f"base_min {_num(g_min)}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    g = load_model(args.model)
    c = load_params(args.params, g)
    try:
        state = MessageState.from_json(json.loads(_read(args.state)), g)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.state}: bad message state ({exc})") from None
    if not state.is_finite():
        raise UsageError(f"{args.state}: message state is not finite")
    b = compute_beliefs(g, c, state)
    out.write(f"admissibility_residual {_num(check_admissible(g, c, b, args.cap))}\n")
    out.write(f"min_consistency_residual {_num(check_min_consistent(g, b))}\n")
    est = extract_estimate(b)
    out.write("estimate " + (" ".join(map(str, est.assignment)) if est.unique else "none") + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splitmin", description="Splitting min-sum solver and verification tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def params_opt(sp):
        sp.add_argument("--params", default="ones", help="ones | uniform | trmp:<path> | file:<path>")

    def solve_opts(sp, default_schedule):
        params_opt(sp)
        sp.add_argument("--schedule", choices=("sync", "async"), default=default_schedule)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--max-sweeps", type=int, default=1000)
        sp.add_argument("--damping", type=float, default=0.0)
        sp.add_argument("--order", default="natural", help="natural | random:<seed>")

    def cap_opt(sp):
        sp.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP, help="joint-state limit")

    s = sub.add_parser("solve", help="run message passing and report")
    s.add_argument("model")
    solve_opts(s, "sync")
    s.add_argument("--trace", help="CSV of sweep,lb,max_belief_delta")
    s.add_argument("--report", help="also write the text report here")
    s.add_argument("--figure", help="convergence plot (png, pdf, svg)")
    s.add_argument("--save-state", help="JSON of the final messages")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check", help="classify splitting parameters")
    s.add_argument("model")
    params_opt(s)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("oracle", help="brute-force minimum")
    s.add_argument("model")
    cap_opt(s)
    s.add_argument("--show", type=int, default=20, help="minimizers to list")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("cover", help="solve, then build a 2-cover certificate")
    s.add_argument("model")
    solve_opts(s, "async")
    cap_opt(s)
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("verify", help="residuals of a saved message state")
    s.add_argument("model")
    s.add_argument("state")
    params_opt(s)
    cap_opt(s)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"splitmin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateSpaceTooLarge, CertificateError, GraphError, ParamsError, ValueError) as exc:
        print(f"splitmin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
