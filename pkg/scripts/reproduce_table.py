"""Node counts of all six presets on a set of built-in models, as a
markdown table (one row per model, ``N`` per preset plus full+sleep paths).

    python3 scripts/reproduce_table.py dp4 dp6 bg2 ml6_10_3s7 --time-limit 120
"""

from __future__ import annotations

import argparse
import sys

from ifspor.explorer import PRESETS, count_full_paths, explore, preset
from ifspor.generators import builtin_model

DEFAULT_MODELS = ["fig6_4", "dp4", "dp6", "dp8", "bg2", "bg3", "ml6_10_3s7"]


def cell(model, name: str, time_limit: float | None, want_paths: bool) -> tuple[str, str]:
    res = explore(model, preset(name, time_limit=time_limit))
    if res.stats.status != "ok":
        return "timeout", ""
    paths = ""
    if want_paths:
        paths = str(count_full_paths(res.ts if res.ts is not None else res.graph))
    return str(res.stats.nodes), paths


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("models", nargs="*", default=DEFAULT_MODELS)
    ap.add_argument("--time-limit", type=float, default=300.0)
    args = ap.parse_args(argv)

    names = list(PRESETS)
    header = ["model", "#C", "#S"] + names + ["full+sleep paths"]
    print("| " + " | ".join(header) + " |")
    print("|" + "---|" * len(header))
    for ref in args.models:
        model = builtin_model(ref)
        clients = sum(p.is_client for p in model.processes)
        row = [ref, str(clients), str(model.num_processes - clients)]
        paths = ""
        for name in names:
            n, p = cell(model, name, args.time_limit, name == "full+sleep")
            row.append(n)
            paths = p or paths
        row.append(paths)
        print("| " + " | ".join(row) + " |", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
