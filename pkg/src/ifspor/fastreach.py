"""Vectorised reachable-state enumeration.

Global states are packed into ``int64`` codes (see :class:`StateCodec`), and
the product is explored one BFS level at a time with numpy: for every action,
the successors of a whole frontier are computed by table lookups on the two
local states the action touches.  This is what makes the full product of the
larger benchmarks (millions of states) tractable.

Node ids of a :class:`ReachGraph` are positions in the sorted code array.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import GlobalState, StateCodec, System


class StateLimitExceeded(Exception):
    def __init__(self, limit: int, found: int):
        self.limit = limit
        self.found = found
        super().__init__(f"more than {limit} reachable states (found {found} so far)")


class _ActionTables:
    """Per action: the two processes it touches and their local successor
    arrays (``-1`` where the action is not locally enabled)."""

    def __init__(self, sys: System, codec: StateCodec):
        self.procs = []
        for a in range(sys.num_actions):
            entries = []
            for p in sys.action_procs[a]:
                table = np.full(codec.sizes[p], -1, dtype=np.int64)
                for x, succ in enumerate(sys.succ[p]):
                    if a in succ:
                        table[x] = succ[a]
                entries.append((p, int(codec.radix[p]), codec.sizes[p], table))
            self.procs.append(entries)

    def successors(self, codes: np.ndarray, a: int) -> tuple[np.ndarray, np.ndarray]:
        """Positions in ``codes`` where ``a`` is enabled, and the successor codes."""
        ok = np.ones(len(codes), dtype=bool)
        delta = np.zeros(len(codes), dtype=np.int64)
        for _p, radix, size, table in self.procs[a]:
            local = (codes // radix) % size
            nxt = table[local]
            ok &= nxt >= 0
            delta += (nxt - local) * radix
        idx = np.flatnonzero(ok)
        return idx, codes[idx] + delta[idx]


def _merge_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Union of two sorted, duplicate-free arrays with no common elements."""
    if len(b) == 0:
        return a
    out = np.concatenate([a, b])
    out.sort(kind="mergesort")
    return out


def _contains(sorted_arr: np.ndarray, values: np.ndarray) -> np.ndarray:
    if len(sorted_arr) == 0:
        return np.zeros(len(values), dtype=bool)
    pos = np.searchsorted(sorted_arr, values)
    pos[pos == len(sorted_arr)] = 0
    return sorted_arr[pos] == values


@dataclass
class ReachGraph:
    sys: System
    codec: StateCodec
    codes: np.ndarray
    root: int
    num_edges: int
    levels: int
    wall_time: float
    tables: _ActionTables | None = field(default=None, repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.codes)

    def state(self, i: int) -> GlobalState:
        return self.codec.decode(int(self.codes[i]))

    def index_of(self, s: GlobalState) -> int:
        code = self.codec.encode(s)
        i = int(np.searchsorted(self.codes, code))
        if i == len(self.codes) or self.codes[i] != code:
            raise KeyError(s)
        return i

    def action_edges(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        """(source ids, target ids) of all ``a``-labelled edges."""
        if self.tables is None:
            self.tables = _ActionTables(self.sys, self.codec)
        src, dst_codes = self.tables.successors(self.codes, a)
        return src, np.searchsorted(self.codes, dst_codes)

    def edges(self) -> list[tuple[int, int, int]]:
        """All edges ``(src, action, dst)`` sorted by source, then action order."""
        rank = self.sys.rank
        out = []
        for a in range(self.sys.num_actions):
            src, dst = self.action_edges(a)
            out.extend(zip(src.tolist(), [a] * len(src), dst.tolist()))
        out.sort(key=lambda e: (e[0], rank[e[1]]))
        return out

    def terminal_mask(self) -> np.ndarray:
        has_succ = np.zeros(self.num_nodes, dtype=bool)
        for a in range(self.sys.num_actions):
            src, _ = self.action_edges(a)
            has_succ[src] = True
        return ~has_succ

    def count_paths(self) -> int:
        """Number of maximal paths from the root (arbitrary precision).

        Nodes are processed by decreasing potential (sum of client
        topological ranks), which strictly increases along every edge.
        """
        ranks = self.sys.client_rank()
        pot = np.zeros(self.num_nodes, dtype=np.int64)
        for p, proc in enumerate(self.sys.processes):
            if proc.is_client:
                r = np.asarray(ranks[p], dtype=np.int64)
                pot += r[(self.codes // self.codec.radix[p]) % self.codec.sizes[p]]
        edges = [self.action_edges(a) for a in range(self.sys.num_actions)]
        paths = np.zeros(self.num_nodes, dtype=object)
        terminal = self.terminal_mask()
        paths[terminal] = 1
        paths[~terminal] = 0
        for level in np.unique(pot)[::-1]:
            at = pot == level
            for src, dst in edges:
                sel = at[src]
                if sel.any():
                    s, d = src[sel], dst[sel]
                    paths[s] = paths[s] + paths[d]
        return int(paths[self.root])


def reach_graph(
    sys: System, node_limit: int | None = None, time_limit: float | None = None
) -> ReachGraph:
    """Enumerate all reachable states of ``sys``.

    Raises :class:`StateLimitExceeded` past ``node_limit`` states and
    ``TimeoutError`` past ``time_limit`` seconds.
    """
    codec = StateCodec(sys)
    if not codec.fits_int64:
        raise OverflowError("global state space too large for int64 codes")
    tables = _ActionTables(sys, codec)
    start = time.perf_counter()
    init = codec.encode(sys.initial_state())
    visited = np.array([init], dtype=np.int64)
    frontier = visited.copy()
    n_edges = 0
    levels = 0
    while len(frontier):
        levels += 1
        found = []
        for a in range(sys.num_actions):
            _, nxt = tables.successors(frontier, a)
            n_edges += len(nxt)
            if len(nxt):
                found.append(np.unique(nxt))
        if not found:
            break
        new = np.unique(np.concatenate(found))
        new = new[~_contains(visited, new)]
        visited = _merge_sorted(visited, new)
        frontier = new
        if node_limit is not None and len(visited) > node_limit:
            raise StateLimitExceeded(node_limit, len(visited))
        if time_limit is not None and time.perf_counter() - start > time_limit:
            raise TimeoutError(f"reachability exceeded {time_limit}s")
    graph = ReachGraph(
        sys,
        codec,
        visited,
        int(np.searchsorted(visited, init)),
        n_edges,
        levels,
        time.perf_counter() - start,
        tables,
    )
    return graph
