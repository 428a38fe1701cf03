"""Command line front-end: ``lpext {solve,verify,sweep} CONFIG``.

Exit status: 0 success, 1 a ledger check failed, 2 usage or config error,
3 a solver failed.  Reports go to ``--out``, else to
``$LPEXT_OUTPUT_DIR/<name>.<command>.<format>``, else to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .config import ConfigError, build_instance, load_config
from .errors import ConfigurationError, ConvergenceError, LpExtError
from .irls import IrlsSchedule, fixed_point_residual, irls_solve
from .lp_solver import DescentOptions, default_starts, objective, solve_lp_direct
from .report import RunReport, SolverOutput, sweep_csv
from .verifier import run_ledger

__all__ = ["main", "cmd_solve", "cmd_verify", "cmd_sweep", "OUTPUT_ENV"]

OUTPUT_ENV = "LPEXT_OUTPUT_DIR"
EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("lpext")


class UsageError(Exception):
    pass


def _destination(args, command, fmt):
    if args.out:
        return Path(args.out)
    root = os.environ.get(OUTPUT_ENV)
    if root:
        return Path(root) / f"{args.name}.{command}.{fmt}"
    return None


def _emit(text, dest):
    if dest is None:
        sys.stdout.write(text)
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text)
    log.info("wrote %s", dest)


def _schedule(cfg):
    return IrlsSchedule(eps0=cfg.irls_eps0, factor=cfg.irls_factor, max_iter=cfg.irls_max_iter)


def _energy(F, prob):
    # m_p is reported for the unsmoothed energy
    return objective(F.coeffs, prob, 0.0)


def _solve(inst, method):
    cfg, prob = inst.config, inst.problem
    outputs, F_d = [], None
    if method in ("direct", "both"):
        F_d, cert = solve_lp_direct(prob, default_starts(prob, cfg.starts, cfg.seed),
                                    DescentOptions(max_iter=cfg.max_iter))
        trace = [row for s in cert.starts if s.index == cert.selected for row in s.trace]
        summary = {k: v for k, v in asdict(cert).items() if k != "starts"}
        outputs.append(SolverOutput.build("direct", F_d, _energy(F_d, prob), trace, summary))
    if method in ("irls", "both"):
        F_i, icert, trace = irls_solve(prob, schedule=_schedule(cfg), reference=F_d,
                                       cross_check=False)
        outputs.append(SolverOutput.build("irls", F_i, _energy(F_i, prob), trace, icert))
    return outputs


def _report(inst, outputs, ledger, t0):
    cfg = inst.config
    return RunReport(cfg.fingerprint(), cfg.to_dict(), list(inst.basis), outputs, ledger,
                     time.perf_counter() - t0)


def _render(report, fmt):
    return report.to_json() + "\n" if fmt == "json" else report.to_csv()


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    inst = build_instance(load_config(args.config))
    args.name = inst.config.name
    outputs = _solve(inst, args.method)
    report = _report(inst, outputs, None, t0)
    _emit(_render(report, args.format), _destination(args, "solve", args.format))
    for o in outputs:
        log.info("%s: m_p = %.12g", o.method, o.objective)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    inst = build_instance(load_config(args.config))
    args.name = inst.config.name
    keep = {}
    ledger = run_ledger(inst, keep=keep)
    outputs = []
    prob = inst.problem
    if "direct" in keep:
        summary = {k: v for k, v in asdict(keep["direct_certificate"]).items() if k != "starts"}
        outputs.append(SolverOutput.build("direct", keep["direct"],
                                          _energy(keep["direct"], prob), (), summary))
    if "irls" in keep:
        outputs.append(SolverOutput.build("irls", keep["irls"], _energy(keep["irls"], prob),
                                          keep["irls_trace"], keep["irls_certificate"]))
    report = _report(inst, outputs, ledger, t0)
    _emit(_render(report, args.format), _destination(args, "verify", args.format))
    print(ledger.summary(), file=sys.stderr)
    solver_failed = any(c.status == "fail" and c.name in ("direct_solve", "irls_solve")
                        and c.residual == float("inf") for c in ledger.checks)
    if solver_failed:
        return EXIT_SOLVER
    return EXIT_OK if ledger.passed else EXIT_CHECK


def _float_list(values, flag):
    out = []
    for v in values or ():
        out.extend(x for x in v.replace(",", " ").split())
    if not out:
        raise UsageError(f"{flag} needs at least one value")
    try:
        return [float(x) for x in out]
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def cmd_sweep(args) -> int:
    ps = _float_list(args.p, "--p")
    Ds = _float_list(args.D, "--D")
    if any(not 0 < p < 2 for p in ps):
        raise UsageError("--p values must lie in (0, 2)")
    if any(D != int(D) or D < 0 for D in Ds):
        raise UsageError("--D values must be integers >= 0")
    cfg = load_config(args.config)
    args.name = cfg.name
    rows = []
    for p in sorted(set(ps)):
        for D in sorted(set(int(D) for D in Ds)):
            inst = build_instance(cfg, p=p, degree=D)
            prob = inst.problem
            F_d, cert = solve_lp_direct(prob, default_starts(prob, cfg.starts, cfg.seed),
                                        DescentOptions(max_iter=cfg.max_iter))
            F_i, icert, _ = irls_solve(prob, schedule=_schedule(cfg), reference=F_d,
                                       cross_check=False)
            rows.append({"p": p, "D": D, "m_p_direct": _energy(F_d, prob),
                         "m_p_irls": _energy(F_i, prob),
                         "fixed_point_residual": fixed_point_residual(F_d, prob),
                         "iterations": icert.iterations, "dispersion": cert.dispersion})
            log.info("p=%g D=%d m_p=%.12g", p, D, rows[-1]["m_p_direct"])
    _emit(sweep_csv(rows), _destination(args, "sweep", "csv"))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="lpext", description="Minimal weighted L^p holomorphic "
                                 "extensions: solve, verify, sweep.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats=True):
        p.add_argument("config", help="instance config file")
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                       help="log progress to stderr")
        p.add_argument("--out", help="output path (default: $%s or stdout)" % OUTPUT_ENV)
        if formats:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    s = sub.add_parser("solve", help="run the solvers and write a report")
    common(s)
    s.add_argument("--method", choices=("direct", "irls", "both"), default="both")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run the residual ledger")
    common(v)
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="solve over a grid of p and degree caps, write CSV")
    common(w, formats=False)
    w.add_argument("--p", nargs="*", help="values of p in (0, 2), comma or space separated")
    w.add_argument("--D", nargs="*", help="degree caps, comma or space separated")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ConfigurationError) as exc:
        print(f"lpext: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"lpext: solver failed: {exc}", file=sys.stderr)
        rows = [asdict(r) if not isinstance(r, dict) else r for r in exc.trace]
        print(json.dumps({"error": str(exc), "trace": rows}, default=str), file=sys.stderr)
        return EXIT_SOLVER
    except LpExtError as exc:
        print(f"lpext: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
