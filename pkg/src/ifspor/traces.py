"""Mazurkiewicz traces over a client/server system, plus exact (exponential)
oracles: first sets, lexicographic normal forms, maximal-run enumeration,
``First(s)`` families, covering checks and the includes-first-set test.

Two actions are independent when their domains are disjoint.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from .bits import iter_bits
from .model import GlobalState, System


class OracleLimitExceeded(Exception):
    """A brute-force oracle ran past its budget; its answer is unknown."""

    def __init__(self, what: str, limit: int):
        self.limit = limit
        super().__init__(f"{what} exceeded limit {limit}")


DEFAULT_RUN_LIMIT = 100_000
DEFAULT_SEARCH_LIMIT = 2_000_000


@dataclass(frozen=True)
class Run:
    origin: GlobalState
    actions: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.actions)


def first_set(sys: System, u: Sequence[int]) -> int:
    """Positions of ``u`` independent of every earlier letter, as an action set."""
    touched = 0
    out = 0
    dom = sys.dom
    for a in u:
        if not dom[a] & touched:
            out |= 1 << a
        touched |= dom[a]
    return out


def lex_normal_form(sys: System, u: Sequence[int]) -> tuple[int, ...]:
    """Least word (under the system's action order) trace-equivalent to ``u``.

    Greedy: repeatedly emit the order-least remaining position that is
    minimal, i.e. independent of every remaining earlier position.
    """
    dom = sys.dom
    rank = sys.rank
    remaining = list(u)
    out = []
    while remaining:
        touched = 0
        best = -1
        for i, a in enumerate(remaining):
            if not dom[a] & touched and (best < 0 or rank[a] < rank[remaining[best]]):
                best = i
            touched |= dom[a]
        out.append(remaining.pop(best))
    return tuple(out)


def trace_equivalent(sys: System, u: Sequence[int], v: Sequence[int]) -> bool:
    return len(u) == len(v) and lex_normal_form(sys, u) == lex_normal_form(sys, v)


def enumerate_maximal_runs(
    sys: System, s: GlobalState, limit: int = DEFAULT_RUN_LIMIT
) -> Iterator[Run]:
    """Depth-first, action-order enumeration of maximal runs from ``s``.

    Raises :class:`OracleLimitExceeded` when more than ``limit`` runs exist.
    """
    count = 0
    path: list[int] = []
    # frames: (state, remaining enabled actions in order)
    stack = [(s, sys.sorted_actions(sys.enabled(s)))]
    if not stack[0][1]:
        yield Run(s, ())
        return
    while stack:
        state, todo = stack[-1]
        if not todo:
            stack.pop()
            if path:
                path.pop()
            continue
        a = todo.pop(0)
        nxt = sys.step(state, a)
        path.append(a)
        en = sys.enabled(nxt)
        if en:
            stack.append((nxt, sys.sorted_actions(en)))
        else:
            count += 1
            if count > limit:
                raise OracleLimitExceeded("maximal-run enumeration", limit)
            yield Run(s, tuple(path))
            path.pop()


def first_family(sys: System, s: GlobalState, limit: int = DEFAULT_RUN_LIMIT) -> frozenset[int]:
    """``First(s)``: the distinct first sets of all maximal runs from ``s``."""
    return frozenset(first_set(sys, r.actions) for r in enumerate_maximal_runs(sys, s, limit))


def is_covering(sys: System, s: GlobalState, B: int, limit: int = DEFAULT_RUN_LIMIT) -> bool:
    """Does ``B`` meet every member of ``First(s)``?  Terminal states impose
    no constraint."""
    if sys.enabled(s) == 0:
        return True
    return all(F & B for F in first_family(sys, s, limit))


def ifs_bruteforce(sys: System, s: GlobalState, B: int, limit: int = DEFAULT_RUN_LIMIT) -> bool:
    """Is there a maximal run from ``s`` whose first set is inside ``B``?

    Plain enumeration of maximal runs; see :func:`ifs_exact` for the
    memoised search used by the explorer.
    """
    return any(first_set(sys, r.actions) & ~B == 0 for r in enumerate_maximal_runs(sys, s, limit))


def ifs_exact(sys: System, s: GlobalState, B: int, limit: int = DEFAULT_SEARCH_LIMIT) -> bool:
    """Exact includes-first-set test.

    A run's first set is the set of its letters whose domain is disjoint from
    the processes touched before them.  We search over pairs (state, touched
    processes), allowing a letter with a fresh domain only if it is in ``B``.
    Once the touched processes meet the domain of every action enabled at
    ``s``, no later letter can have a fresh domain (it would have been
    enabled at ``s`` already), so any maximal continuation works.
    """
    dom = sys.dom
    en0 = sys.enabled(s)
    if en0 == 0:
        return True
    wrap_targets = [dom[e] for e in iter_bits(en0)]
    seen: set[tuple[GlobalState, int]] = set()
    stack = [(s, 0)]
    while stack:
        state, touched = stack.pop()
        if all(d & touched for d in wrap_targets):
            return True
        en = sys.enabled(state)
        if en == 0:
            return True
        for a in iter_bits(en):
            fresh = not dom[a] & touched
            if fresh and not (B >> a) & 1:
                continue
            key = (sys.step(state, a), touched | dom[a])
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > limit:
                raise OracleLimitExceeded("IFS search", limit)
            stack.append(key)
    return False



def is_persistent(sys: System, s: GlobalState, P: int, max_len: int = 8) -> bool:
    """Bounded check that every run from ``s`` avoiding ``P`` uses only
    actions independent of all of ``P`` (runs up to ``max_len`` letters)."""
    dom_p = 0
    for a in iter_bits(P):
        dom_p |= sys.dom[a]
    dom = sys.dom
    stack = [(s, 0)]
    seen = {(s, 0)}
    while stack:
        state, depth = stack.pop()
        if depth == max_len:
            continue
        for a in iter_bits(sys.enabled(state) & ~P):
            if dom[a] & dom_p:
                return False
            nxt = (sys.step(state, a), depth + 1)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True
