"""Regenerate the model corpus in ``models/`` and its golden counts.

Counts come from the generic DFS explorer (not the vectorised engine the
tests use), so the golden file doubles as a cross-check between the two.

    python3 scripts/make_models.py [--check]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ifspor.explorer import count_full_paths, explore, preset
from ifspor.generators import builtin_model
from ifspor.model import format_system

CORPUS = ["fig1", "fig4", "fig5", "fig6_3", "fig6alpha_3", "dp3", "dp3m2", "bg1", "bg2", "ml4_6_2s1", "ml5_8_3s7"]
ROOT = Path(__file__).resolve().parent.parent / "models"


def golden(name: str) -> dict:
    ts, st = explore(builtin_model(name), preset("reach", fast_reach=False))
    return {"nodes": st.nodes, "edges": st.edges, "paths": count_full_paths(ts)}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare instead of writing")
    args = ap.parse_args()
    counts = {}
    stale = []
    for name in CORPUS:
        text = format_system(builtin_model(name))
        path = ROOT / f"{name}.model"
        counts[name] = golden(name)
        if args.check:
            if not path.is_file() or path.read_text() != text:
                stale.append(path.name)
        else:
            path.write_text(text)
    blob = json.dumps(counts, indent=2, sort_keys=True) + "\n"
    gpath = ROOT / "golden.json"
    if args.check:
        if not gpath.is_file() or gpath.read_text() != blob:
            stale.append(gpath.name)
        for s in stale:
            print(f"stale: {s}")
        return 1 if stale else 0
    gpath.write_text(blob)
    print(f"wrote {len(CORPUS)} models and golden.json to {ROOT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
