"""Exploration engines producing reduced transition systems.

One depth-first engine covers all configurations: a tree exploration
(subsumption off), graph exploration with state or sleep-set subsumption,
and the combinations of oracles, source sets and action choosers named in
:data:`PRESETS`.  The ``reach`` preset is served by the vectorised engine of
:mod:`ifspor.fastreach` unless ``fast_reach`` is switched off.
"""

from __future__ import annotations

import hashlib
import io
import csv
import json
import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import asdict, dataclass, replace

from .bits import iter_bits
from .fastreach import ReachGraph, StateLimitExceeded, reach_graph
from .heuristics import (
    HeuristicIndex,
    build_index,
    choose_action,
    lex_closure,
    min_closure,
    min_pset,
    pifs,
    rpifs,
)
from .model import GlobalState, System
from .traces import DEFAULT_SEARCH_LIMIT, ifs_exact

ORACLES = ("always-true", "exact-ifs", "pifs", "rpifs")
SOURCES = ("enabled", "min-closure", "lex-closure", "p-set")
CHOOSERS = ("lex", "apifs")
SUBSUMPTIONS = ("off", "state-equality", "sleep-subset")

TREE = "tree"
SUBSUMPTION = "subsumption"


@dataclass(frozen=True)
class ExploreConfig:
    oracle: str = "always-true"
    source: str = "enabled"
    chooser: str = "lex"
    sleep: bool = False
    subsumption: str = "state-equality"
    order: tuple[str, ...] | None = None
    node_limit: int | None = None
    time_limit: float | None = None
    oracle_limit: int = DEFAULT_SEARCH_LIMIT
    fast_reach: bool = True
    # the vectorised engine only materialises node/edge lists below this size
    materialize_limit: int = 2_000_000
    name: str = "custom"

    def __post_init__(self) -> None:
        for value, allowed, what in (
            (self.oracle, ORACLES, "oracle"),
            (self.source, SOURCES, "source"),
            (self.chooser, CHOOSERS, "chooser"),
            (self.subsumption, SUBSUMPTIONS, "subsumption"),
        ):
            if value not in allowed:
                raise ValueError(f"unknown {what} {value!r}; expected one of {allowed}")

    @property
    def is_plain_reach(self) -> bool:
        return (
            self.oracle == "always-true"
            and self.source == "enabled"
            and not self.sleep
            and self.subsumption == "state-equality"
        )


PRESETS: dict[str, ExploreConfig] = {
    "reach": ExploreConfig("always-true", "enabled", "lex", False, "state-equality", name="reach"),
    "pset+sleep": ExploreConfig("always-true", "p-set", "lex", True, "sleep-subset", name="pset+sleep"),
    "minclosure+sleep": ExploreConfig(
        "always-true", "min-closure", "lex", True, "sleep-subset", name="minclosure+sleep"
    ),
    "apifs+sleep": ExploreConfig("pifs", "enabled", "apifs", True, "sleep-subset", name="apifs+sleep"),
    "full-sleep": ExploreConfig("pifs", "min-closure", "apifs", False, "state-equality", name="full-sleep"),
    "full+sleep": ExploreConfig("pifs", "min-closure", "apifs", True, "sleep-subset", name="full+sleep"),
}

TREE_EXACT = ExploreConfig("exact-ifs", "enabled", "lex", True, "off", name="tree-exact")


def preset(name: str, **overrides) -> ExploreConfig:
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {list(PRESETS)}") from None
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class ReducedTS:
    """Output graph: node ``i`` carries ``states[i]`` and ``sleeps[i]``;
    ``edges[k] = (src, action, dst)`` with ``flags[k]`` in {tree, subsumption}."""

    sys: System
    states: list[GlobalState]
    sleeps: list[int]
    edges: list[tuple[int, int, int]]
    flags: list[str]
    root: int = 0
    partial: bool = False

    @property
    def num_nodes(self) -> int:
        return len(self.states)

    def out_edges(self) -> list[list[tuple[int, int]]]:
        """Per node, ``(action, dst)`` pairs in insertion order."""
        out: list[list[tuple[int, int]]] = [[] for _ in self.states]
        for src, a, dst in self.edges:
            out[src].append((a, dst))
        return out

    def full_runs(self, limit: int | None = None) -> Iterator[tuple[int, ...]]:
        """Action sequences of all root-to-sink paths."""
        out = self.out_edges()
        count = 0
        stack: list[tuple[int, tuple[int, ...]]] = [(self.root, ())]
        while stack:
            n, word = stack.pop()
            if not out[n]:
                count += 1
                if limit is not None and count > limit:
                    raise OverflowError(f"more than {limit} full runs")
                yield word
                continue
            for a, m in reversed(out[n]):
                stack.append((m, word + (a,)))

    @classmethod
    def from_reach_graph(cls, g: ReachGraph) -> ReducedTS:
        states = [g.codec.decode(int(c)) for c in g.codes]
        edges = g.edges()
        return cls(g.sys, states, [0] * len(states), edges, [TREE] * len(edges), g.root)


@dataclass
class ExploreStats:
    model: str = ""
    algo: str = ""
    order: str = "default"
    nodes: int = 0
    edges: int = 0
    subsumption_edges: int = 0
    oracle_calls: int = 0
    oracle_true: int = 0
    wall_time: float = 0.0
    full_paths: int | None = None
    status: str = "ok"


@dataclass
class Exploration:
    """Result of :func:`explore`.  ``ts`` is ``None`` only when the vectorised
    reach engine found more nodes than ``materialize_limit``; ``graph`` then
    still answers node, edge and path queries."""

    ts: ReducedTS | None
    stats: ExploreStats
    graph: ReachGraph | None = None

    def __iter__(self):
        yield self.ts
        yield self.stats


def order_digest(sys: System) -> str:
    """Short hash of the action order, for telling runs apart in tables."""
    text = " ".join(sys.action_names[a] for a in sys.order)
    return hashlib.sha1(text.encode()).hexdigest()[:10]


class ExploredStore:
    """Per state, an antichain of the ``⊆``-minimal sleep sets of explored
    nodes.  ``exact=True`` turns lookup into sleep-set equality."""

    def __init__(self, exact: bool = False):
        self.exact = exact
        self._entries: dict[GlobalState, list[tuple[int, int]]] = {}

    def lookup(self, s: GlobalState, sleep: int) -> int | None:
        for stored, node in self._entries.get(s, ()):
            if stored == sleep or (not self.exact and stored & ~sleep == 0):
                return node
        return None

    def insert(self, s: GlobalState, sleep: int, node: int) -> None:
        entries = self._entries.setdefault(s, [])
        if self.exact:
            if all(stored != sleep for stored, _ in entries):
                entries.append((sleep, node))
            return
        if any(stored & ~sleep == 0 for stored, _ in entries):
            return
        entries[:] = [(st, n) for st, n in entries if sleep & ~st != 0]
        entries.append((sleep, node))

    def __len__(self) -> int:
        return sum(len(v) for v in self._entries.values())


def _digest(sys: System, config: ExploreConfig) -> str:
    # the model's own order is the default; only overrides get a hash
    return order_digest(sys) if config.order else "default"


def _apply_order(sys: System, order: Sequence[str] | None) -> System:
    return sys.with_order(list(order)) if order else sys


def explore(sys: System, config: ExploreConfig | str = "reach") -> Exploration:
    """Run one exploration.  Limits yield a partial result with
    ``stats.status`` set to ``"node-limit"`` or ``"time-limit"``."""
    if isinstance(config, str):
        config = preset(config)
    sys = _apply_order(sys, config.order)
    if config.is_plain_reach and config.fast_reach:
        return _explore_reach_fast(sys, config)
    return _explore_dfs(sys, config)


def explore_tree(sys: System, config: ExploreConfig = TREE_EXACT) -> Exploration:
    """Tree exploration (no subsumption); every full run of the result is a
    separate branch."""
    if config.subsumption != "off":
        raise ValueError("explore_tree needs subsumption='off'")
    return explore(sys, config)


def _explore_reach_fast(sys: System, config: ExploreConfig) -> Exploration:
    stats = ExploreStats(model=sys.name, algo=config.name, order=_digest(sys, config))
    try:
        g = reach_graph(sys, config.node_limit, config.time_limit)
    except StateLimitExceeded as exc:
        stats.nodes = exc.found
        stats.status = "node-limit"
        return Exploration(None, stats)
    except TimeoutError:
        stats.status = "time-limit"
        return Exploration(None, stats)
    stats.nodes = g.num_nodes
    stats.edges = g.num_edges
    stats.wall_time = g.wall_time
    ts = ReducedTS.from_reach_graph(g) if g.num_nodes <= config.materialize_limit else None
    return Exploration(ts, stats, g)


def _make_oracle(sys: System, config: ExploreConfig, idx: HeuristicIndex | None):
    if config.oracle == "always-true":
        return None
    if config.oracle == "exact-ifs":
        limit = config.oracle_limit
        return lambda s, B: ifs_exact(sys, s, B, limit)
    if config.oracle == "pifs":
        return lambda s, B: pifs(idx, s, B)
    return lambda s, B: rpifs(idx, s, B)


def _make_source(sys: System, config: ExploreConfig, idx: HeuristicIndex | None):
    if config.source == "enabled":
        return lambda s, sleep: sys.enabled(s) & ~sleep
    if config.source == "min-closure":
        return lambda s, sleep: min_closure(idx, s, sleep)
    if config.source == "lex-closure":
        return lambda s, sleep: lex_closure(idx, s, sleep)
    return lambda s, sleep: min_pset(idx, s, sleep)


def _explore_dfs(sys: System, config: ExploreConfig) -> Exploration:
    start = time.perf_counter()
    needs_index = config.oracle in ("pifs", "rpifs") or config.source != "enabled" or config.chooser == "apifs"
    idx = build_index(sys) if needs_index else None
    oracle = _make_oracle(sys, config, idx)
    source = _make_source(sys, config, idx)
    rank = sys.rank
    if config.chooser == "apifs":
        choose: Callable[[GlobalState, int], int] = lambda s, A: choose_action(idx, s, A)
    else:
        choose = lambda s, A: min(iter_bits(A), key=rank.__getitem__)
    dependents = sys.dependents
    use_sleep = config.sleep
    store = None if config.subsumption == "off" else ExploredStore(
        exact=config.subsumption == "state-equality"
    )

    stats = ExploreStats(model=sys.name, algo=config.name, order=_digest(sys, config))
    states: list[GlobalState] = [sys.initial_state()]
    sleeps: list[int] = [0]
    edges: list[tuple[int, int, int]] = []
    flags: list[str] = []
    # frame: [node, state, running sleep set, source set]
    root_state = states[0]
    stack = [[0, root_state, 0, source(root_state, 0)]]
    node_limit = config.node_limit
    time_limit = config.time_limit
    ticks = 0
    while stack:
        frame = stack[-1]
        node, s, Sl, C = frame
        todo = C & ~Sl
        if not todo:
            stack.pop()
            if store is not None:
                store.insert(s, sleeps[node], node)
            continue
        ticks += 1
        if time_limit is not None and ticks % 256 == 0 and time.perf_counter() - start > time_limit:
            stats.status = "time-limit"
            break
        a = choose(s, todo)
        s2 = sys.step(s, a)
        sl2 = Sl & ~dependents[a] if use_sleep else 0
        hit = store.lookup(s2, sl2) if store is not None else None
        if hit is not None:
            edges.append((node, a, hit))
            flags.append(SUBSUMPTION)
        else:
            ok = True
            if oracle is not None:
                stats.oracle_calls += 1
                ok = oracle(s2, sys.enabled(s2) & ~sl2)
                stats.oracle_true += ok
            if ok:
                child = len(states)
                states.append(s2)
                sleeps.append(sl2)
                edges.append((node, a, child))
                flags.append(TREE)
                frame[2] = Sl | (1 << a)
                if node_limit is not None and len(states) > node_limit:
                    stats.status = "node-limit"
                    break
                stack.append([child, s2, sl2, source(s2, sl2)])
                continue
        frame[2] = Sl | (1 << a)

    stats.nodes = len(states)
    stats.edges = len(edges)
    stats.subsumption_edges = flags.count(SUBSUMPTION)
    stats.wall_time = time.perf_counter() - start
    ts = ReducedTS(sys, states, sleeps, edges, flags, 0, partial=stats.status != "ok")
    return Exploration(ts, stats)


# -- path counting and export --------------------------------------------------------


def count_full_paths(ts: ReducedTS | ReachGraph) -> int:
    """Number of root-to-sink paths, by dynamic programming over a
    topological order.  Raises ``ValueError`` on a cyclic graph."""
    if isinstance(ts, ReachGraph):
        return ts.count_paths()
    n = ts.num_nodes
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for src, _a, dst in ts.edges:
        succ[src].append(dst)
        indeg[dst] += 1
    order = [v for v in range(n) if indeg[v] == 0]
    i = 0
    while i < len(order):
        for w in succ[order[i]]:
            indeg[w] -= 1
            if indeg[w] == 0:
                order.append(w)
        i += 1
    if len(order) != n:
        raise ValueError("graph has a cycle")
    paths = [0] * n
    for v in reversed(order):
        paths[v] = sum(paths[w] for w in succ[v]) if succ[v] else 1
    return paths[ts.root]


def export_dot(ts: ReducedTS) -> str:
    sys = ts.sys
    lines = [f'digraph "{sys.name}" {{', "  node [shape=box, fontsize=10];"]
    for i, (s, sl) in enumerate(zip(ts.states, ts.sleeps)):
        label = f"{i}: {sys.format_state(s)}"
        if sl:
            label += "\\nsleep={" + ",".join(sys.names(sl)) + "}"
        shape = ", peripheries=2" if i == ts.root else ""
        lines.append(f'  n{i} [label="{label}"{shape}];')
    for (src, a, dst), flag in zip(ts.edges, ts.flags):
        style = ", style=dashed" if flag == SUBSUMPTION else ""
        lines.append(f'  n{src} -> n{dst} [label="{sys.action_names[a]}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


CSV_FIELDS = ("model", "algo", "order", "nodes", "edges", "subs_edges", "paths", "oracle_calls", "time_ms")


def _row(st: ExploreStats) -> dict:
    return {
        "model": st.model,
        "algo": st.algo,
        "order": st.order,
        "nodes": st.nodes,
        "edges": st.edges,
        "subs_edges": st.subsumption_edges,
        "paths": "" if st.full_paths is None else st.full_paths,
        "oracle_calls": st.oracle_calls,
        "time_ms": round(st.wall_time * 1000),
    }


def export_stats(stats: ExploreStats | Sequence[ExploreStats], fmt: str = "csv") -> str:
    rows = [stats] if isinstance(stats, ExploreStats) else list(stats)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for st in rows:
            w.writerow(_row(st))
        return buf.getvalue()
    if fmt == "json":
        out = []
        for st in rows:
            d = asdict(st)
            if d["full_paths"] is not None:
                # keep big integers exact in JSON consumers that use doubles
                d["full_paths"] = str(d["full_paths"])
            out.append(d)
        return json.dumps(out if not isinstance(stats, ExploreStats) else out[0], indent=2) + "\n"
    raise ValueError(f"unknown stats format {fmt!r}")
