"""Benchmark families and the two SAT gadgets.

All generators are pure functions of their arguments.  Lock-style servers
have the two states ``a`` (available) and ``t`` (taken); since every action
synchronises one client with one server, each client gets its own take and
release actions on a shared lock, named ``<client>.<lock>.up`` and
``<client>.<lock>.dn``.
"""

from __future__ import annotations

import itertools
import random
import re
from collections.abc import Sequence
from dataclasses import dataclass

from .figures import builtin_figures, fig1, fig3, fig4, fig5, fig6  # noqa: F401 (re-export)
from .model import GlobalState, ModelError, System, SystemBuilder


@dataclass(frozen=True)
class Cnf:
    """A 3-CNF formula.  Literals are non-zero ints: ``i`` is ``x_i`` and
    ``-i`` its negation, for ``1 <= i <= num_vars``."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        for cl in self.clauses:
            if len(cl) != 3:
                raise ValueError(f"clause {cl} does not have exactly 3 literals")
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @classmethod
    def of(cls, num_vars: int, clauses: Sequence[Sequence[int]]) -> Cnf:
        """Build a formula, padding short clauses by repeating their last literal."""
        return cls(num_vars, tuple(_pad(cl) for cl in clauses))

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        """``assignment[i-1]`` is the value of ``x_i``."""
        return all(
            any(assignment[abs(l) - 1] == (l > 0) for l in cl) for cl in self.clauses
        )


class DimacsError(ValueError):
    pass


def _pad(clause: Sequence[int]) -> tuple[int, int, int]:
    lits = list(clause)
    if not lits:
        raise ValueError("empty clause")
    if len(lits) > 3:
        raise ValueError(f"clause {lits} has more than 3 literals")
    while len(lits) < 3:
        lits.append(lits[-1])
    return tuple(lits)  # type: ignore[return-value]


def parse_dimacs(text: str) -> Cnf:
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: bad header {line!r}") from None
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > header[0]:
                    raise DimacsError(f"line {lineno}: literal {lit} exceeds {header[0]} variables")
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise DimacsError(f"header declares {header[1]} clauses, found {len(clauses)}")
    try:
        return Cnf.of(header[0], clauses)
    except ValueError as exc:
        raise DimacsError(str(exc)) from None


def format_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines += [" ".join(map(str, cl)) + " 0" for cl in cnf.clauses]
    return "\n".join(lines) + "\n"


def _lock(b: SystemBuilder, name: str, taken: bool = False) -> None:
    b.server(name, "t" if taken else "a")


def _take(b: SystemBuilder, client: str, lock: str, src: str, dst: str) -> None:
    act = f"{client}.{lock}.up"
    b.trans(client, src, act, dst)
    b.trans(lock, "a", act, "t")


def _release(b: SystemBuilder, client: str, lock: str, src: str, dst: str) -> None:
    act = f"{client}.{lock}.dn"
    b.trans(client, src, act, dst)
    b.trans(lock, "t", act, "a")


# -- benchmark families ---------------------------------------------------------------


def gen_philosophers(n: int, meals: int = 1) -> System:
    """Dining philosophers over ``n`` fork locks.

    Philosopher ``i`` uses forks ``i`` (left) and ``i+1 mod n`` (right).  In
    each meal it takes both forks in either order, then releases the left
    fork, then the right one.  Meals are unfolded so the clients are
    acyclic.  With ``meals=1`` the product has ``5**n - 1`` reachable states.
    """
    if n < 2 or meals < 1:
        raise ValueError("need n >= 2 and meals >= 1")
    b = SystemBuilder(f"dp{n}" if meals == 1 else f"dp{n}_m{meals}")
    for i in range(n):
        b.client(f"P{i}", "m0")
    for j in range(n):
        _lock(b, f"F{j}")
    for i in range(n):
        p, left, right = f"P{i}", f"F{i}", f"F{(i + 1) % n}"
        for m in range(meals):
            s, nxt = f"m{m}", f"m{m + 1}"
            _take(b, p, left, s, f"{s}L")
            _take(b, p, right, s, f"{s}R")
            _take(b, p, right, f"{s}L", f"{s}LR")
            _take(b, p, left, f"{s}R", f"{s}LR")
            _release(b, p, left, f"{s}LR", f"{s}r")
            _release(b, p, right, f"{s}r", nxt)
    return b.build()


def gen_multilocks(n_clients: int, n_locks: int, k: int, seed: int) -> System:
    """Each client takes ``k`` distinct random locks in increasing lock order,
    then releases them in reverse order."""
    if not 1 <= k <= n_locks:
        raise ValueError("need 1 <= k <= n_locks")
    rng = random.Random(seed)
    b = SystemBuilder(f"ml_{n_clients}_{n_locks}_{k}_s{seed}")
    choices = [sorted(rng.sample(range(n_locks), k)) for _ in range(n_clients)]
    for i in range(n_clients):
        b.client(f"C{i}", "0")
    for j in range(n_locks):
        _lock(b, f"L{j}")
    for i, locks in enumerate(choices):
        c = f"C{i}"
        step = 0
        for j in locks:
            _take(b, c, f"L{j}", str(step), str(step + 1))
            step += 1
        for j in reversed(locks):
            _release(b, c, f"L{j}", str(step), str(step + 1))
            step += 1
    return b.build()


def gen_boolean_gates(height: int) -> System:
    """A complete binary tree of NAND gates of the given height.

    There are ``2**(height+1) - 1`` gate clients (heap numbering, gate ``g``
    has inputs from gates ``2g+1`` and ``2g+2``) and one wire server per
    non-root gate.  A wire starts unset (``u``); its gate writes 0 or 1 once,
    after which the parent may read the value.  Leaf gates write an arbitrary
    value; inner gates read their left wire, then their right wire, then
    write the NAND of the two.  The root has no output wire.
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    n = 2 ** (height + 1) - 1
    first_leaf = 2**height - 1
    b = SystemBuilder(f"bg{height}")
    for g in range(n):
        b.client(f"G{g}", "0")
    for g in range(1, n):
        b.server(f"W{g}", "u")
    for g in range(n):
        gate = f"G{g}"
        if g >= first_leaf:
            for v in (0, 1):
                _write(b, g, v, "0", "1")
            continue
        left, right = 2 * g + 1, 2 * g + 2
        for lv in (0, 1):
            _read(b, g, left, lv, "0", f"l{lv}")
            for rv in (0, 1):
                out = 1 - (lv & rv)
                _read(b, g, right, rv, f"l{lv}", f"o{out}")
        if g > 0:
            for out in (0, 1):
                _write(b, g, out, f"o{out}", "done")
    return b.build()


def _write(b: SystemBuilder, g: int, v: int, src: str, dst: str) -> None:
    act = f"G{g}.w{v}"
    b.trans(f"G{g}", src, act, dst)
    b.trans(f"W{g}", "u", act, str(v))


def _read(b: SystemBuilder, g: int, wire: int, v: int, src: str, dst: str) -> None:
    act = f"G{g}.r{wire}_{v}"
    b.trans(f"G{g}", src, act, dst)
    b.trans(f"W{wire}", str(v), act, str(v))


# -- SAT gadgets -------------------------------------------------------------------------


def _lit_name(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"nx{-lit}"


def gen_sat_ifs(cnf: Cnf) -> tuple[System, tuple[GlobalState, int]]:
    """Lock system whose includes-first-set query encodes satisfiability.

    Returns the system and the query ``(s, B)``: ``s`` is the initial state
    (literal and clause locks start taken) and ``B`` is every action except
    ``F``'s take of lock ``f``.  A maximal run from ``s`` with first set
    inside ``B`` exists iff ``cnf`` is satisfiable.
    """
    b = SystemBuilder(f"satifs_{cnf.num_vars}_{len(cnf.clauses)}")
    n, m = cnf.num_vars, len(cnf.clauses)
    for i in range(1, n + 1):
        b.client(f"P0_{i}", "0")
        b.client(f"P1_{i}", "0")
    for j in range(1, m + 1):
        for k in range(1, 4):
            b.client(f"C{k}_{j}", "0")
    b.client("D", "0")
    b.client("F", "0")
    for i in range(1, n + 1):
        _lock(b, f"x{i}", taken=True)
        _lock(b, f"nx{i}", taken=True)
    for j in range(1, m + 1):
        _lock(b, f"c{j}", taken=True)
    for i in range(1, n + 1):
        _lock(b, f"e{i}")
    _lock(b, "f")
    for i in range(1, n + 1):
        # P0 sets x_i false (frees the negative literal), P1 sets it true
        _take(b, f"P0_{i}", f"e{i}", "0", "1")
        _release(b, f"P0_{i}", f"nx{i}", "1", "2")
        _take(b, f"P1_{i}", f"e{i}", "0", "1")
        _release(b, f"P1_{i}", f"x{i}", "1", "2")
    for j, clause in enumerate(cnf.clauses, 1):
        for k, lit in enumerate(clause, 1):
            c, lock = f"C{k}_{j}", _lit_name(lit)
            _take(b, c, lock, "0", "1")
            _release(b, c, lock, "1", "2")
            _release(b, c, f"c{j}", "2", "3")
    for j in range(1, m + 1):
        _take(b, "D", f"c{j}", str(j - 1), str(j))
    _take(b, "D", "f", str(m), str(m + 1))
    _take(b, "F", "f", "0", "1")
    sys = b.build()
    B = sys.all_actions & ~(1 << sys.action("F.f.up"))
    return sys, (sys.initial_state(), B)


def gen_lowerbound(cnf: Cnf) -> System:
    """The two-server construction in which an unsatisfiable formula forces
    ``e`` into the first set of every full run.

    Client ``C_i`` (``Cn_i`` for the negative literal) moves from top to
    bottom on ``th_i`` (with ``S_r``) or ``la_i`` (with ``S_l``), then may
    perform its literal action with ``S_r``.  The literal action is
    unfolded once per clause containing the literal, which is as many times
    as ``S_r`` can ever use it; a literal absent from every clause gets no
    literal action at all.
    """
    b = SystemBuilder(f"lb_{cnf.num_vars}_{len(cnf.clauses)}")
    n = cnf.num_vars
    occurrences: dict[int, int] = {}
    for cl in cnf.clauses:
        for lit in set(cl):
            occurrences[lit] = occurrences.get(lit, 0) + 1
    for i in range(1, n + 1):
        for lit, cname, th, la in (
            (i, f"C_{i}", f"th_{i}", f"la_{i}"),
            (-i, f"Cn_{i}", f"thn_{i}", f"lan_{i}"),
        ):
            b.client(cname, "top")
            b.trans(cname, "top", th, "bot0")
            b.trans(cname, "top", la, "bot0")
            for u in range(occurrences.get(lit, 0)):
                b.trans(cname, f"bot{u}", _lit_name(lit), f"bot{u + 1}")
    b.client("Cstar", "0").trans("Cstar", "0", "e", "1")
    b.client("Cbar", "0").path("Cbar", "0", "b", "1", "ebar", "2")
    b.server("S_l", "0")
    b.trans("S_l", "0", "e", "1").trans("S_l", "0", "ebar", "1")
    for i in range(1, n + 1):
        b.trans("S_l", str(i), f"la_{i}", str(i + 1))
        b.trans("S_l", str(i), f"lan_{i}", str(i + 1))
    b.server("S_r", "0")
    for i in range(1, n + 1):
        b.trans("S_r", str(i - 1), f"th_{i}", str(i))
        b.trans("S_r", str(i - 1), f"thn_{i}", str(i))
    for j, cl in enumerate(cnf.clauses):
        src, dst = str(n + j), str(n + j + 1)
        for lit in dict.fromkeys(cl):
            b.trans("S_r", src, _lit_name(lit), dst)
    end = len(cnf.clauses) + n
    b.trans("S_r", str(end), "b", str(end + 1))
    return b.build()


def all_cnfs(num_vars: int, max_clauses: int) -> list[Cnf]:
    """Every formula with up to ``max_clauses`` distinct clauses over
    ``num_vars`` variables, clauses drawn from sorted literal multisets."""
    lits = [v for i in range(1, num_vars + 1) for v in (i, -i)]
    clause_pool = sorted({tuple(sorted(c, key=abs)) for c in itertools.combinations_with_replacement(lits, 3)})
    out = []
    for m in range(1, max_clauses + 1):
        for combo in itertools.combinations(clause_pool, m):
            out.append(Cnf(num_vars, combo))
    return out


def random_cnf(num_vars: int, num_clauses: int, rng: random.Random) -> Cnf:
    clauses = []
    for _ in range(num_clauses):
        clauses.append(
            tuple(rng.choice((1, -1)) * rng.randint(1, num_vars) for _ in range(3))
        )
    return Cnf(num_vars, tuple(clauses))


GENERATORS = {
    "dp": gen_philosophers,
    "multilocks": gen_multilocks,
    "bg": gen_boolean_gates,
}


def builtin_model(name: str) -> System:
    """Resolve short names such as ``fig1``, ``fig6_5``, ``dp10``, ``dp4m2``,
    ``bg3`` or ``ml6_10_3s7``."""
    figs = {"fig1": fig1, "fig3": fig3, "fig4": fig4, "fig5": fig5}
    if name in figs:
        return figs[name]()
    patterns = [
        (r"fig6(?:_(\d+))?", lambda g: fig6(int(g[0] or 4))),
        (r"fig6alpha(?:_(\d+))?", lambda g: fig6(int(g[0] or 4), order="alpha")),
        (r"dp(\d+)(?:m(\d+))?", lambda g: gen_philosophers(int(g[0]), int(g[1] or 1))),
        (r"bg(\d+)", lambda g: gen_boolean_gates(int(g[0]))),
        (r"ml(\d+)_(\d+)_(\d+)s(\d+)", lambda g: gen_multilocks(*map(int, g))),
    ]
    for pat, make in patterns:
        match = re.fullmatch(pat, name)
        if match:
            return make(match.groups())
    raise ModelError(f"unknown built-in model {name!r}")
