"""Command-line entry point: ``ramsey-locc <group> <command> ...``.

Every command builds a JSON-able report dict; ``--json`` prints it verbatim
(sorted keys, so identical inputs give identical bytes), otherwise the same
dict is rendered as indented text. Exit codes: 0 success, 1 a verification
failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .cliques import orthogonality_summary
from .errors import RamseyLoccError, UsageError
from .protocol.plan import plan_distinguish, plan_to_json, strategy_from_plan
from .protocol.schedule import bound_report, epsilon_schedule
from .protocol.synthesis import greedy_exclusion, synthesize_exclusion
from .protocol.tree import ProtocolTree
from .ramsey import LEDGER_ENV, brute_force_ramsey, default_ledger, normalize_query
from .simulate import run_trace, verify_exclusion, verify_identification
from .states import (EdgeColoring, ProductStateSet, ZERO_TOL, GAP_TOL, extract_coloring, random_coloring,
                     realize, validate)

SCHEMAS = f"""\
file schemas:
  STATES    {{"parties": r, "dims": [d_1..d_r], "zero_tol": x, "gap_tol": y,
             "states": [{{"parts": [[re, im, re, im, ...] per subsystem]}}, ...]}}
  COLORING  {{"n": N, "r": r, "edges": [{{"u": u, "v": v, "colors": [1-based subsystems]}}, ...]}}
  TREE      {{"candidates": [...], "target": k, "source": s, "copies_used": c,
             "root": node}}  node = {{"copy", "subsystem", "projectors": [...],
             "children": {{"<index>": node, "REST": node}}}} or {{"survivors": [...]}}
  PLAN      {{"n", "r", "worst_case_copies", "stages": [...], "exclusion_stages":
             [{{"threshold", "exclusion", "source", "m"}}], "ledger_version"}}
  LEDGER    {{"version": v, "entries": [{{"targets": [...], "lower", "upper", "exact", "source"}}]}}
states are 0-based, subsystems 1-based. ${LEDGER_ENV} overrides the shipped ledger.
exit codes: 0 ok, 1 verification failed, 2 usage or validation error.
"""


class VerificationFailed(Exception):
    def __init__(self, report: dict):
        self.report = report


# -- rendering -------------------------------------------------------------

def _render(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)) and val and not _flat(val):
                lines.append(f"{pad}{key}:")
                lines.extend(_render(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(val)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                lines.extend(_render(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _flat(val) -> bool:
    if isinstance(val, list):
        return all(not isinstance(x, (dict, list)) for x in val)
    return False


def _scalar(val) -> str:
    if val is None:
        return "-"
    if isinstance(val, bool):
        return "yes" if val else "no"
    if isinstance(val, list):
        return "[" + ", ".join(_scalar(x) for x in val) + "]"
    if isinstance(val, dict):
        return "{}"
    return str(val)


def emit(report: dict, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(_render(report)) + "\n")


# -- input helpers ---------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(path: str, data: dict) -> None:
    try:
        with open(path, "w") as f:
            json.dump(data, f, sort_keys=True, indent=2)
            f.write("\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _states(args) -> ProductStateSet:
    s = ProductStateSet.from_json(_load_json(args.states))
    return s.with_tolerances(args.zero_tol, args.gap_tol)


def _tolerances(s: ProductStateSet) -> dict:
    return {"zero_tol": s.zero_tol, "gap_tol": s.gap_tol}


def _ledger_version() -> str:
    return default_ledger().version


# -- commands --------------------------------------------------------------

def cmd_ramsey_query(args) -> dict:
    ledger = default_ledger()
    q, _ = normalize_query(args.targets)
    b = ledger.derive_bounds(args.targets)
    return {"query": "R(" + ",".join(map(str, sorted(args.targets, reverse=True))) + ")",
            "normalized": str(q), "bounds": b.to_dict(), "summary": str(b), "ledger_version": ledger.version}


def cmd_ramsey_check(args) -> dict:
    ledger = default_ledger()
    v = ledger.check_exclusion_conditions(args.r, args.m, args.k)
    out = v.to_dict()
    out["lines"] = [str(line) for line in v.witness]
    out["ledger_version"] = ledger.version
    return out


def cmd_ramsey_brute(args) -> dict:
    value = brute_force_ramsey(args.targets, args.max_n, prune=args.prune)
    return {"targets": sorted(args.targets, reverse=True), "max_n": args.max_n, "prune": args.prune,
            "value": value, "found": value is not None}


def cmd_states_validate(args) -> dict:
    s = _states(args)
    findings = [f.to_dict() for f in validate(s)]
    report = {"n": s.n, "parties": s.parties, "dims": s.dims, "findings": findings, "valid": not findings,
              **_tolerances(s)}
    if findings:
        raise UsageError("state set failed validation:\n" + "\n".join(_render(report)))
    return report


def cmd_states_extract(args) -> dict:
    s = _states(args)
    c = extract_coloring(s).to_json()
    if args.output:
        _write_json(args.output, c)
        return {"wrote": args.output, "n": s.n, "r": s.parties, **_tolerances(s)}
    return c


def cmd_states_realize(args) -> dict:
    c = EdgeColoring.from_json(_load_json(args.coloring))
    dims = args.dims
    s = realize(c, dims, seed=args.seed, zero_tol=args.zero_tol or ZERO_TOL, gap_tol=args.gap_tol or GAP_TOL)
    data = s.to_json()
    if args.output:
        _write_json(args.output, data)
        return {"wrote": args.output, "n": s.n, "r": s.parties, "dims": s.dims, "seed": args.seed,
                **_tolerances(s)}
    return data


def cmd_states_random(args) -> dict:
    c = random_coloring(args.n, args.r, args.seed).to_json()
    if args.output:
        _write_json(args.output, c)
        return {"wrote": args.output, "n": args.n, "r": args.r, "seed": args.seed}
    return c


def cmd_cliques_summary(args) -> dict:
    data = _load_json(args.input)
    if "edges" in data:
        c = EdgeColoring.from_json(data)
    else:
        s = ProductStateSet.from_json(data).with_tolerances(args.zero_tol, args.gap_tol)
        c = extract_coloring(s)
    out = orthogonality_summary(c).to_dict()
    out.update(n=c.n, r=c.r)
    return out


def _certificate(r: int, k: int, n: int, m: int | None):
    ledger = default_ledger()
    ms = [m] if m is not None else range(2, k + 1)
    for mm in ms:
        v = ledger.check_exclusion_conditions(r, mm, k)
        if v.certified and v.certified_threshold <= n:
            return v
    raise UsageError(f"no certified exclusion of k={k} for N={n}, r={r}"
                     + (f", m={m}" if m is not None else "") + " from the ledger in use")


def cmd_protocol_synthesize(args) -> dict:
    s = _states(args)
    if args.greedy:
        tree = greedy_exclusion(s)
    else:
        if args.k is None:
            raise UsageError("--k is required unless --greedy is given")
        tree = synthesize_exclusion(s, args.k, _certificate(s.parties, args.k, s.n, args.m))
    data = tree.to_json()
    if args.output:
        _write_json(args.output, data)
        return {"wrote": args.output, "target": tree.target, "source": tree.source, "depth": tree.depth(),
                "leaves": len(tree.leaves()), "ledger_version": _ledger_version(), **_tolerances(s)}
    return data


def cmd_protocol_plan(args) -> dict:
    s = _states(args)
    schedule, _ = plan_distinguish(s)
    data = plan_to_json(schedule)
    if args.output:
        _write_json(args.output, data)
        return {"wrote": args.output, "worst_case_copies": schedule.worst_case_copies,
                "ledger_version": data["ledger_version"], **_tolerances(s)}
    data.update(_tolerances(s))
    return data


def cmd_protocol_bounds(args) -> dict:
    out = bound_report(args.n, args.r).to_dict()
    out["ledger_version"] = _ledger_version()
    out["note"] = ("scheduler = copies guaranteed by the implemented certified stages; "
                   "the ceil(N/6)+2 bound relies on an exclude-4-from-7 routine that is not implemented")
    return out


def cmd_protocol_epsilon(args) -> dict:
    out = epsilon_schedule(args.eps, args.r, scan_max=args.scan_max).to_dict()
    out["ledger_version"] = _ledger_version()
    return out


def cmd_simulate_exclusion(args) -> dict:
    s = _states(args)
    tree = ProtocolTree.from_json(_load_json(args.tree))
    out = verify_exclusion(tree, s, args.k).to_dict()
    out.update(_tolerances(s))
    if not out["pass"]:
        raise VerificationFailed(out)
    return out


def cmd_simulate_identify(args) -> dict:
    s = _states(args)
    strategy = strategy_from_plan(s, _load_json(args.plan))
    out = verify_identification(strategy, s).to_dict()
    out.update(_tolerances(s), ledger_version=_ledger_version())
    if not out["pass"]:
        raise VerificationFailed(out)
    return out


def cmd_simulate_trace(args) -> dict:
    s = _states(args)
    strategy = strategy_from_plan(s, _load_json(args.plan))
    out = run_trace(strategy, s, args.truth, args.seed).to_dict()
    out.update(_tolerances(s))
    return out


def end_to_end(n: int, r: int, seed: int) -> dict:
    """Random coloring, realization, plan and identification check for one seed."""
    if n < 2 or r < 2:
        raise UsageError("e2e needs N >= 2 and r >= 2")
    s = realize(random_coloring(n, r, seed), seed=seed)
    schedule, strategy = plan_distinguish(s)
    rep = verify_identification(strategy, s)
    bounds = bound_report(n, r).to_dict()
    return {"n": n, "r": r, "seed": seed, "pass": rep.passed, "copies_used": rep.max_copies,
            "worst_case_copies": schedule.worst_case_copies, "bounds": bounds,
            "counterexample": rep.counterexample, "ledger_version": _ledger_version(), **_tolerances(s)}


def cmd_e2e(args) -> dict:
    out = end_to_end(args.n, args.r, args.seed)
    if not out["pass"]:
        raise VerificationFailed(out)
    return out


# -- parser ----------------------------------------------------------------

def _targets(p):
    p.add_argument("targets", nargs="+", type=int, metavar="T", help="clique sizes i_1 .. i_r")


def _state_input(p):
    p.add_argument("states", metavar="STATES", help="state-set JSON file")
    p.add_argument("--zero-tol", type=float, default=None, help="override the file's zero tolerance")
    p.add_argument("--gap-tol", type=float, default=None, help="override the file's gap tolerance")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print the report as JSON")
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="ramsey-locc", parents=[common], formatter_class=fmt, epilog=SCHEMAS,
                                     description="Ramsey-number bounds and LOCC distinguishing protocols "
                                                 "for orthogonal product states.")
    groups = parser.add_subparsers(dest="group", required=True)

    def sub(group, name, func, help_text):
        p = group.add_parser(name, parents=[common], help=help_text, description=help_text,
                             formatter_class=fmt, epilog=SCHEMAS)
        p.set_defaults(func=func)
        return p

    g = groups.add_parser("ramsey", help="ledger queries and certification").add_subparsers(dest="cmd", required=True)
    p = sub(g, "query", cmd_ramsey_query, "certified interval for R(i_1..i_r)")
    _targets(p)
    p = sub(g, "check", cmd_ramsey_check, "check the single-copy exclusion conditions for (r, m, k)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p = sub(g, "brute", cmd_ramsey_brute, "exact Ramsey number by exhaustive search")
    _targets(p)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--prune", action="store_true", help="backtracking search, lifts the size guard")

    g = groups.add_parser("states", help="state sets and colorings").add_subparsers(dest="cmd", required=True)
    p = sub(g, "validate", cmd_states_validate, "check norms, orthogonality and the tolerance gap")
    _state_input(p)
    p = sub(g, "extract", cmd_states_extract, "orthogonality coloring of a state set")
    _state_input(p)
    p.add_argument("-o", "--output")
    p = sub(g, "realize", cmd_states_realize, "product states whose orthogonality coloring is COLORING")
    p.add_argument("coloring", metavar="COLORING")
    p.add_argument("--dims", type=int, nargs="+", default=None, help="subsystem dimensions (default N each)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-tol", type=float, default=None)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("-o", "--output")
    p = sub(g, "random-coloring", cmd_states_random, "uniformly random r-coloring of K_N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")

    g = groups.add_parser("cliques", help="monochromatic cliques").add_subparsers(dest="cmd", required=True)
    p = sub(g, "summary", cmd_cliques_summary, "maximum clique per color of a coloring or state set")
    p.add_argument("input", metavar="COLORING_OR_STATES")
    p.add_argument("--zero-tol", type=float, default=None)
    p.add_argument("--gap-tol", type=float, default=None)

    g = groups.add_parser("protocol", help="synthesis, planning and copy bounds").add_subparsers(
        dest="cmd", required=True)
    p = sub(g, "synthesize", cmd_protocol_synthesize, "one-copy exclusion tree")
    _state_input(p)
    p.add_argument("--k", type=int, default=None, help="exclusion target")
    p.add_argument("--m", type=int, default=None, help="base clique size of the certificate (default: search)")
    p.add_argument("--greedy", action="store_true", help="largest-clique tree, no certificate needed")
    p.add_argument("-o", "--output")
    p = sub(g, "plan", cmd_protocol_plan, "multi-copy identification plan")
    _state_input(p)
    p.add_argument("-o", "--output")
    p = sub(g, "bounds", cmd_protocol_bounds, "every available upper bound on the copy count")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p = sub(g, "epsilon", cmd_protocol_epsilon, "copy bound ceil(eps N) and the N from which it holds")
    p.add_argument("--eps", type=str, required=True, help="epsilon, decimal or fraction such as 1/5")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--scan-max", type=int, default=10 ** 4)

    g = groups.add_parser("simulate", help="exhaustive verification and traces").add_subparsers(
        dest="cmd", required=True)
    p = sub(g, "verify-exclusion", cmd_simulate_exclusion, "check a tree excludes k on every reachable leaf")
    _state_input(p)
    p.add_argument("tree", metavar="TREE")
    p.add_argument("--k", type=int, required=True)
    p = sub(g, "verify-identify", cmd_simulate_identify, "check a plan identifies every truth")
    _state_input(p)
    p.add_argument("plan", metavar="PLAN")
    p = sub(g, "trace", cmd_simulate_trace, "sample one execution of a plan")
    _state_input(p)
    p.add_argument("plan", metavar="PLAN")
    p.add_argument("--truth", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = groups.add_parser("e2e", parents=[common], help="random coloring to verified identification",
                          formatter_class=fmt, epilog=SCHEMAS)
    p.set_defaults(func=cmd_e2e)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.json = getattr(args, "json", False)
    try:
        report = args.func(args)
    except VerificationFailed as exc:
        emit(exc.report, args.json)
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RamseyLoccError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    emit(report, args.json)
    return 0


if __name__ == "__main__":
    sys.exit(main())
