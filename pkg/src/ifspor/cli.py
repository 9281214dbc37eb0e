"""Command-line interface: ``ifspor {gen,explore,verify,bench,debug}``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 resource
limit or inconclusive verdict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from .explorer import (
    CSV_FIELDS,
    PRESETS,
    TREE_EXACT,
    ExploreStats,
    count_full_paths,
    explore,
    export_dot,
    export_stats,
    preset,
)
from .fastreach import StateLimitExceeded
from .generators import (
    DimacsError,
    builtin_model,
    gen_boolean_gates,
    gen_lowerbound,
    gen_multilocks,
    gen_philosophers,
    gen_sat_ifs,
    parse_dimacs,
)
from .heuristics import build_index, closure_trace, fixpoint_trace
from .model import ModelError, System, format_system, parse_system
from .verifier import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    Verdict,
    build_full_ts,
    check_completeness,
    check_soundness,
    check_trace_optimality,
    combine,
    first_sets_bottom_up,
    report_json,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


class InputError(Exception):
    pass


def load_model(ref: str) -> System:
    path = Path(ref)
    if path.is_file():
        try:
            return parse_system(path.read_text())
        except ModelError as exc:
            raise InputError(f"{ref}: {exc}") from None
    try:
        return builtin_model(ref)
    except (ModelError, ValueError) as exc:
        raise InputError(f"{ref}: not a file and {exc}") from None


def parse_order(sys_: System, value: str | None) -> tuple[str, ...] | None:
    """``--order`` takes a file or an inline list (commas or spaces)."""
    if value is None:
        return None
    path = Path(value)
    text = path.read_text() if path.is_file() else value
    words = [w for w in text.replace(",", " ").split() if w != "order"]
    if sorted(words) != sorted(sys_.action_names):
        raise InputError("--order must list every action of the model exactly once")
    return tuple(words)


def _emit(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


# -- gen -----------------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    if args.family == "dp":
        model = gen_philosophers(args.n, args.meals)
    elif args.family == "multilocks":
        model = gen_multilocks(args.clients, args.locks, args.k, args.seed)
    elif args.family == "bg":
        model = gen_boolean_gates(args.height)
    else:
        if not args.dimacs:
            raise InputError(f"gen {args.family} needs --dimacs FILE")
        try:
            cnf = parse_dimacs(Path(args.dimacs).read_text())
        except (OSError, DimacsError) as exc:
            raise InputError(str(exc)) from None
        if args.family == "lowerbound":
            model = gen_lowerbound(cnf)
        else:
            model, (state, B) = gen_sat_ifs(cnf)
            if args.out:
                query = {"state": [model.processes[p].states[x] for p, x in enumerate(state)],
                         "B": model.names(B)}
                Path(args.out + ".query.json").write_text(json.dumps(query, indent=2) + "\n")
    _emit(format_system(model), args.out)
    return EXIT_OK


# -- explore -------------------------------------------------------------------------------


def _config(args: argparse.Namespace, model: System):
    cfg = TREE_EXACT if getattr(args, "tree", False) else preset(args.preset)
    return replace(
        cfg,
        order=parse_order(model, args.order),
        node_limit=args.node_limit,
        time_limit=args.time_limit,
    )


def cmd_explore(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    cfg = _config(args, model)
    res = explore(model, cfg)
    stats = res.stats
    stats.model = args.model if not Path(args.model).is_file() else model.name
    if stats.status == "ok" and args.paths:
        stats.full_paths = count_full_paths(res.ts if res.ts is not None else res.graph)
    if args.dot:
        if res.ts is None:
            raise InputError("graph too large to materialise for --dot")
        Path(args.dot).write_text(export_dot(res.ts))
    sys.stdout.write(export_stats(stats, args.stats))
    if stats.status != "ok":
        print(f"exploration stopped: {stats.status}", file=sys.stderr)
        return EXIT_LIMIT
    return EXIT_OK


# -- verify --------------------------------------------------------------------------------


def _inject_fault(ts) -> None:
    """Test hook: relabel the first edge with another enabled-or-not action."""
    if not ts.edges:
        return
    src, a, dst = ts.edges[0]
    ts.edges[0] = (src, (a + 1) % ts.sys.num_actions, dst)


def cmd_verify(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    cfg = _config(args, model)
    res = explore(model, cfg)
    verdicts: list[Verdict] = []
    if res.ts is None or res.stats.status != "ok":
        verdicts.append(Verdict("explore", INCONCLUSIVE, f"exploration stopped: {res.stats.status}"))
    else:
        ts = res.ts
        if args.inject_fault:
            _inject_fault(ts)
        try:
            full = build_full_ts(ts.sys, args.node_limit)
            fams = first_sets_bottom_up(full, args.family_cap)
            verdicts.append(check_soundness(ts.sys, ts, fams))
            verdicts.append(check_completeness(ts.sys, ts, fams, filtered=not args.unfiltered))
        except StateLimitExceeded as exc:
            verdicts.append(Verdict("full-ts", INCONCLUSIVE, str(exc)))
        if args.tree:
            verdicts.append(check_trace_optimality(ts.sys, ts))
    report = report_json(verdicts)
    _emit(report, args.json)
    if args.json:
        for v in verdicts:
            print(f"{v.check}: {v.status} {v.message}".rstrip())
    status = combine(verdicts)
    return {PASS: EXIT_OK, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_LIMIT}[status]


# -- bench ---------------------------------------------------------------------------------


BENCH_FIELDS = CSV_FIELDS + ("status",)


def _bench_models(cell: dict) -> list[tuple[str, System]]:
    kind = cell["model"]
    params = dict(cell.get("params", {}))
    seeds = cell.get("seeds")
    if kind == "dp":
        return [(f"dp{params['n']}", gen_philosophers(params["n"], params.get("meals", 1)))]
    if kind == "bg":
        return [(f"bg{params['height']}", gen_boolean_gates(params["height"]))]
    if kind == "multilocks":
        out = []
        for seed in seeds if seeds is not None else [params.get("seed", 0)]:
            m = gen_multilocks(params["clients"], params["locks"], params["k"], seed)
            out.append((m.name, m))
        return out
    return [(kind, load_model(kind))]


def _bench_row(label: str, name: str, st: ExploreStats) -> dict:
    st.model, st.algo = label, name
    row = next(csv.DictReader(io.StringIO(export_stats(st, "csv"))))
    row["status"] = "timeout" if st.status == "time-limit" else st.status
    return row


def run_bench(matrix: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for cell in matrix.get("cells", []):
        timeout = cell.get("timeout")
        node_limit = cell.get("node_limit")
        names = cell.get("presets", list(PRESETS))
        # failures are recorded per cell, never fatal
        try:
            models = _bench_models(cell)
        except Exception as exc:
            for name in names:
                w.writerow(_bench_row(str(cell.get("model")), name, ExploreStats(status=f"error: {exc}")))
            continue
        for label, model in models:
            for name in names:
                start = time.perf_counter()
                try:
                    res = explore(model, preset(name, time_limit=timeout, node_limit=node_limit))
                    st = res.stats
                    if st.status == "ok" and cell.get("paths"):
                        st.full_paths = count_full_paths(res.ts if res.ts is not None else res.graph)
                except Exception as exc:
                    st = ExploreStats(status=f"error: {exc}", wall_time=time.perf_counter() - start)
                w.writerow(_bench_row(label, name, st))
    return buf.getvalue()


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        matrix = json.loads(Path(args.matrix).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.matrix}: {exc}") from None
    _emit(run_bench(matrix), args.out)
    return EXIT_OK


# -- debug ---------------------------------------------------------------------------------


def cmd_debug(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    try:
        s = model.run(model.initial_state(), model.parse_word(args.at or ""))
        idx = build_index(model)
        if args.what == "closure":
            if not args.action:
                raise InputError("debug closure needs --action")
            lines = closure_trace(idx, s, model.action(args.action))
        else:
            B = model.actions(n for n in (args.set or "").replace(",", " ").split())
            lines = fixpoint_trace(idx, s, B, guarded=args.what == "pifs")
    except ModelError as exc:
        raise InputError(str(exc)) from None
    print(f"state: {model.format_state(s)}")
    print("\n".join(lines))
    return EXIT_OK


# -- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ifspor", description="Partial-order reduction for client/server systems")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a model file")
    g.add_argument("family", choices=["dp", "multilocks", "bg", "satifs", "lowerbound"])
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--meals", type=int, default=1)
    g.add_argument("--clients", type=int, default=4)
    g.add_argument("--locks", type=int, default=10)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--height", type=int, default=2)
    g.add_argument("--dimacs")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_gen)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("model", help="model file or built-in name (fig1, dp10, bg3, ...)")
        p.add_argument("--preset", default="reach", choices=list(PRESETS))
        p.add_argument("--tree", action="store_true", help="exact-oracle tree exploration")
        p.add_argument("--order", help="action order: file or inline list")
        p.add_argument("--node-limit", type=int)
        p.add_argument("--time-limit", type=float)
        p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; explorations are deterministic")

    e = sub.add_parser("explore", help="explore a model and print statistics")
    common(e)
    e.add_argument("--dot")
    e.add_argument("--paths", action="store_true")
    e.add_argument("--stats", choices=["csv", "json"], default="csv")
    e.set_defaults(func=cmd_explore)

    v = sub.add_parser("verify", help="explore, then check soundness and completeness")
    common(v)
    v.add_argument("--family-cap", type=int, default=100_000)
    v.add_argument("--unfiltered", action="store_true", help="ignore sleep sets in the completeness check")
    v.add_argument("--json", help="write the JSON report here instead of stdout")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a JSON benchmark matrix")
    b.add_argument("matrix")
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("debug", help="print heuristic fixpoint traces")
    d.add_argument("what", choices=["pifs", "rpifs", "closure"])
    d.add_argument("model")
    d.add_argument("--at", help="word leading from the initial state to the state of interest")
    d.add_argument("--set", help="action set B for pifs/rpifs")
    d.add_argument("--action", help="action b for closure")
    d.set_defaults(func=cmd_debug)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
