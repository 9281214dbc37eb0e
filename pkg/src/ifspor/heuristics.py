"""Polynomial heuristics built on per-process local reachability.

``pifs``/``rpifs`` over-approximate the includes-first-set test (they answer
yes whenever the exact test does).  ``closure`` and ``p_set`` produce covering
source sets.  All of them only look at the local transition systems of the
processes, through the tables of :class:`HeuristicIndex`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bits import bit_tuple, iter_bits, popcount
from .model import GlobalState, System, dom_of_mask


class TripleBudgetExceeded(Exception):
    pass


DEFAULT_MAX_TRIPLES = 200_000


@dataclass
class HeuristicIndex:
    """Precomputed local reachability tables for one system.

    * ``reach_any[p][x]``: actions occurring on some local path from ``x``.
    * ``reach_dom[p][x]``: union of the domains of ``reach_any[p][x]``.
    * ``first_to[p][x][b]``: actions ``c`` with ``x -c-> y`` and ``b``
      occurring on some path from ``y``.
    * ``guarded[p][x][b]``: the inclusion-minimal process sets ``R`` such that
      some local path ``x -w-> z`` with ``dom(w) <= R`` reaches a state ``z``
      enabling ``b``.  ``None`` for a process whose antichains blew the budget;
      queries on it fall back to a bounded search.
    """

    sys: System
    reach_any: list[list[int]]
    reach_dom: list[list[int]]
    first_to: list[list[dict[int, int]]]
    guarded: list[list[dict[int, list[int]]] | None]
    triples: int = 0
    fallback: list[int] = field(default_factory=list)

    def guarded_reach(self, p: int, x: int, R: int, b: int) -> bool:
        """Is there a local path from ``x`` over actions with domain inside
        ``R`` to a state enabling ``b``?"""
        table = self.guarded[p]
        if table is not None:
            for m in table[x].get(b, ()):
                if m & ~R == 0:
                    return True
            return False
        return _search_guarded(self.sys, p, x, R, b)


def build_index(
    sys: System, max_triples: int = DEFAULT_MAX_TRIPLES, fallback: bool = True
) -> HeuristicIndex:
    """Build all tables.  Past ``max_triples`` stored guarded sets, raise
    :class:`TripleBudgetExceeded` unless ``fallback`` allows switching the
    offending process to on-the-fly search."""
    reach_any = []
    reach_dom = []
    first_to = []
    guarded: list[list[dict[int, list[int]]] | None] = []
    total = 0
    fell_back = []
    for p in sys.processes:
        n = len(p.states)
        reach = [0] * n
        changed = True
        while changed:
            changed = False
            for src, a, dst in p.transitions:
                new = reach[src] | (1 << a) | reach[dst]
                if new != reach[src]:
                    reach[src] = new
                    changed = True
        reach_any.append(reach)
        reach_dom.append([dom_of_mask(sys, m) for m in reach])
        ft: list[dict[int, int]] = [{} for _ in range(n)]
        for src, c, dst in p.transitions:
            for b in iter_bits(reach[dst]):
                ft[src][b] = ft[src].get(b, 0) | (1 << c)
        first_to.append(ft)
        try:
            table, count = _guarded_tables(sys, p.index, max_triples - total)
            guarded.append(table)
            total += count
        except TripleBudgetExceeded:
            if not fallback:
                raise
            guarded.append(None)
            fell_back.append(p.index)
    return HeuristicIndex(sys, reach_any, reach_dom, first_to, guarded, total, fell_back)


def _guarded_tables(sys: System, p: int, budget: int) -> tuple[list[dict[int, list[int]]], int]:
    proc = sys.processes[p]
    n = len(proc.states)
    local_en = sys.local_enabled[p]
    dom = sys.dom
    table: list[dict[int, list[int]]] = [{} for _ in range(n)]
    count = 0
    for b in iter_bits(sys.alphabet[p]):
        sets: list[list[int]] = [[0] if (local_en[x] >> b) & 1 else [] for x in range(n)]
        changed = True
        while changed:
            changed = False
            for src, a, dst in proc.transitions:
                if sets[src] == [0]:
                    continue
                for R in sets[dst]:
                    cand = R | dom[a]
                    cur = sets[src]
                    if any(m & ~cand == 0 for m in cur):
                        continue
                    cur[:] = [m for m in cur if cand & ~m != 0]
                    cur.append(cand)
                    changed = True
        for x in range(n):
            if sets[x]:
                table[x][b] = sorted(sets[x])
                count += len(sets[x])
        if count > budget:
            raise TripleBudgetExceeded(f"process {proc.name}: more than {budget} triples")
    return table, count


def _search_guarded(sys: System, p: int, x: int, R: int, b: int) -> bool:
    succ = sys.succ[p]
    dom = sys.dom
    local_en = sys.local_enabled[p]
    seen = {x}
    stack = [x]
    while stack:
        y = stack.pop()
        if (local_en[y] >> b) & 1:
            return True
        for a, z in succ[y].items():
            if dom[a] & ~R == 0 and z not in seen:
                seen.add(z)
                stack.append(z)
    return False


# -- the includes-first-set approximations ----------------------------------


def wraps(sys: System, R: int, s: GlobalState) -> bool:
    """Does the process set ``R`` meet the domain of every enabled action?"""
    dom = sys.dom
    return all(dom[e] & R for e in iter_bits(sys.enabled(s)))


def _fixpoint(
    idx: HeuristicIndex, s: GlobalState, B: int, guarded: bool, trace: list | None = None
) -> tuple[bool, int]:
    sys = idx.sys
    dom = sys.dom
    local_en = sys.local_enabled
    succ = sys.succ
    first_to = idx.first_to
    action_procs = sys.action_procs
    en_doms = [dom[e] for e in bit_tuple(sys.enabled(s))]
    loc = [local_en[q][x] for q, x in enumerate(s)]
    loc_any = 0
    for m in loc:
        loc_any |= m

    domB = dom_of_mask(sys, B)
    done = 0
    rnd = 0
    while B & ~done and not all(d & domB for d in en_doms):
        done = B
        dom_done = domB
        added = 0
        for c in bit_tuple(loc_any & ~B):
            x1, x2 = action_procs[c]
            for q, p in ((x1, x2), (x2, x1)):
                if not (loc[q] >> c) & 1:
                    continue
                sp = s[p]
                cands = first_to[p][sp].get(c, 0) & done & loc[p]
                if not cands:
                    continue
                if not guarded or any(
                    idx.guarded_reach(p, succ[p][sp][d], dom_done, c) for d in bit_tuple(cands)
                ):
                    added |= 1 << c
                    break
        B |= added
        domB |= dom_of_mask(sys, added)
        rnd += 1
        if trace is not None:
            trace.append((rnd, added, B, all(d & domB for d in en_doms)))
    return all(d & domB for d in en_doms), B


def pifs(idx: HeuristicIndex, s: GlobalState, B: int) -> bool:
    return _fixpoint(idx, s, B, guarded=True)[0]


def rpifs(idx: HeuristicIndex, s: GlobalState, B: int) -> bool:
    return _fixpoint(idx, s, B, guarded=False)[0]


def apifs(idx: HeuristicIndex, s: GlobalState, B: int) -> tuple[bool, int]:
    """``pifs`` that also returns the accumulated action set."""
    return _fixpoint(idx, s, B, guarded=True)


def fixpoint_trace(idx: HeuristicIndex, s: GlobalState, B: int, guarded: bool = True) -> list[str]:
    """Human-readable round-by-round trace of the pifs (or rpifs) fixpoint."""
    sys = idx.sys
    rounds: list = []
    ok, final = _fixpoint(idx, s, B, guarded, rounds)
    lines = [f"round 0: B={{{','.join(sys.names(B))}}} wraps={wraps(sys, dom_of_mask(sys, B), s)}"]
    for rnd, added, acc, w in rounds:
        lines.append(
            f"round {rnd}: added={{{','.join(sys.names(added))}}} "
            f"B={{{','.join(sys.names(acc))}}} wraps={w}"
        )
    lines.append(f"result: {ok}")
    return lines


# -- covering source sets ---------------------------------------------------------


def closure(idx: HeuristicIndex, s: GlobalState, b: int, trace: list | None = None) -> int:
    """Least action set containing everything locally enabled at the
    processes of ``b``, and closed under: if ``b'`` is in the set and
    enabled at one of its processes ``p`` but not yet at the other ``q``,
    add every first action of a local path of ``q`` leading to ``b'``."""
    sys = idx.sys
    local_en = sys.local_enabled
    first_to = idx.first_to
    C = 0
    for p in sys.action_procs[b]:
        C |= local_en[p][s[p]]
    work = list(iter_bits(C))
    if trace is not None:
        trace.append(("seed", C))
    while work:
        b2 = work.pop()
        procs = sys.action_procs[b2]
        for p in procs:
            if not (local_en[p][s[p]] >> b2) & 1:
                continue
            for q in procs:
                if q == p:
                    continue
                new = first_to[q][s[q]].get(b2, 0) & ~C
                if new:
                    C |= new
                    work.extend(iter_bits(new))
                    if trace is not None:
                        trace.append((b2, new))
    return C


def closure_trace(idx: HeuristicIndex, s: GlobalState, b: int) -> list[str]:
    sys = idx.sys
    steps: list = []
    C = closure(idx, s, b, steps)
    lines = []
    for i, (why, added) in enumerate(steps):
        label = "seed" if why == "seed" else f"via {sys.action_names[why]}"
        lines.append(f"round {i}: {label} added={{{','.join(sys.names(added))}}}")
    lines.append(f"result: {{{','.join(sys.names(C))}}}")
    return lines


def p_closure(idx: HeuristicIndex, s: GlobalState, b: int) -> int:
    """Least process set containing ``dom(b)`` and, for each member ``p``, the
    domains of all actions ``p`` can still perform locally."""
    R = idx.sys.dom[b]
    work = list(iter_bits(R))
    while work:
        p = work.pop()
        new = idx.reach_dom[p][s[p]] & ~R
        if new:
            R |= new
            work.extend(iter_bits(new))
    return R


def p_set(idx: HeuristicIndex, s: GlobalState, b: int) -> int:
    sys = idx.sys
    R = p_closure(idx, s, b)
    dom = sys.dom
    out = 0
    for a in iter_bits(sys.enabled(s)):
        if dom[a] & ~R == 0:
            out |= 1 << a
    return out


def min_closure(idx: HeuristicIndex, s: GlobalState, sleep: int = 0) -> int:
    """Smallest ``closure(s, b)`` restricted to enabled, non-sleeping actions,
    over non-sleeping enabled ``b`` (ties: order-least ``b``)."""
    sys = idx.sys
    avail = sys.enabled(s) & ~sleep
    best = avail
    size = popcount(avail)
    for b in sys.sorted_actions(avail):
        C = closure(idx, s, b) & avail
        n = popcount(C)
        if n < size:
            best, size = C, n
    return best


def lex_closure(idx: HeuristicIndex, s: GlobalState, sleep: int = 0) -> int:
    """``closure`` of the order-least enabled action, restricted to enabled,
    non-sleeping actions."""
    sys = idx.sys
    en = sys.enabled(s)
    if not en:
        return 0
    return closure(idx, s, sys.least(en)) & en & ~sleep


def min_pset(idx: HeuristicIndex, s: GlobalState, sleep: int = 0) -> int:
    """Smallest ``p_set(s, b)`` restricted to non-sleeping actions, chosen the
    same way as :func:`min_closure`."""
    sys = idx.sys
    avail = sys.enabled(s) & ~sleep
    best = avail
    size = popcount(avail)
    for b in sys.sorted_actions(avail):
        C = p_set(idx, s, b) & avail
        n = popcount(C)
        if n < size:
            best, size = C, n
    return best


class EmptyCandidates(ValueError):
    pass


def choose_action(idx: HeuristicIndex, s: GlobalState, A: int) -> int:
    """First ``b`` of ``A`` (in action order) for which ``apifs(s, {b})``
    succeeds; otherwise the one with the largest accumulated set."""
    if not A:
        raise EmptyCandidates("choose_action needs a non-empty candidate set")
    sys = idx.sys
    best = -1
    best_size = 0
    for b in sys.sorted_actions(A):
        ok, acc = _fixpoint(idx, s, 1 << b, guarded=True)
        if ok:
            return b
        n = popcount(acc)
        if n > best_size:
            best, best_size = b, n
    return best
