"""Client/server systems: representation, parsing, validation and product semantics.

A system is a family of per-process labelled transition systems.  Every
action synchronises exactly one client with one server; clients must be
acyclic, so the product is acyclic as well.

Actions, processes and local states are dense integers assigned in
declaration order.  Sets of actions and sets of processes are int bit masks
(see :mod:`ifspor.bits`).  A global state is a tuple of local state indices,
one per process.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .bits import iter_bits, mask_of

CLIENT = "client"
SERVER = "server"

GlobalState = tuple[int, ...]

NAME_RE = re.compile(r"^[A-Za-z0-9_.!^v-]+$")


class ModelError(Exception):
    """Base class for problems with a model document or system."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class ValidationError(ModelError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class ActionNotEnabled(ModelError):
    pass


@dataclass(frozen=True)
class Process:
    index: int
    name: str
    kind: str
    states: tuple[str, ...]
    initial: int
    transitions: tuple[tuple[int, int, int], ...]

    @property
    def is_client(self) -> bool:
        return self.kind == CLIENT


@dataclass(eq=False)
class System:
    """An immutable client/server system with precomputed lookup tables.

    ``order`` lists action indices from smallest to largest; ``rank[a]`` is
    the position of action ``a`` in that order.
    """

    name: str
    processes: tuple[Process, ...]
    action_names: tuple[str, ...]
    order: tuple[int, ...] = ()

    # derived tables, filled in __post_init__
    action_index: dict[str, int] = field(init=False, repr=False)
    rank: tuple[int, ...] = field(init=False, repr=False)
    action_procs: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    dom: tuple[int, ...] = field(init=False, repr=False)
    dependents: tuple[int, ...] = field(init=False, repr=False)
    alphabet: tuple[int, ...] = field(init=False, repr=False)
    succ: tuple[tuple[dict[int, int], ...], ...] = field(init=False, repr=False)
    local_enabled: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n_act = len(self.action_names)
        if not self.order:
            self.order = tuple(range(n_act))
        if sorted(self.order) != list(range(n_act)):
            raise ModelError("action order must be a permutation of all actions")
        self.action_index = {name: i for i, name in enumerate(self.action_names)}
        rank = [0] * n_act
        for pos, a in enumerate(self.order):
            rank[a] = pos
        self.rank = tuple(rank)

        procs_of: list[list[int]] = [[] for _ in range(n_act)]
        alphabet = []
        succ = []
        local_en = []
        for p in self.processes:
            alph = 0
            table: list[dict[int, int]] = [{} for _ in p.states]
            for src, a, dst in p.transitions:
                alph |= 1 << a
                # first transition wins; duplicates are reported by validate_system
                table[src].setdefault(a, dst)
            for a in iter_bits(alph):
                procs_of[a].append(p.index)
            alphabet.append(alph)
            succ.append(tuple(table))
            local_en.append(tuple(mask_of(t) for t in table))
        self.action_procs = tuple(tuple(ps) for ps in procs_of)
        self.dom = tuple(mask_of(ps) for ps in procs_of)
        self.alphabet = tuple(alphabet)
        self.succ = tuple(succ)
        self.local_enabled = tuple(local_en)
        self.dependents = tuple(
            mask_of(b for b in range(n_act) if self.dom[a] & self.dom[b]) | (1 << a)
            for a in range(n_act)
        )
        full = (1 << n_act) - 1
        # local_enabled plus every action outside the alphabet: AND-ing these
        # over all processes yields the globally enabled set
        self._en_or_foreign = tuple(
            tuple(m | (full & ~alphabet[p.index]) for m in local_en[p.index])
            for p in self.processes
        )
        self._full = full

    # -- naming -----------------------------------------------------------

    @property
    def num_actions(self) -> int:
        return len(self.action_names)

    @property
    def num_processes(self) -> int:
        return len(self.processes)

    @property
    def all_actions(self) -> int:
        return self._full

    @property
    def all_processes(self) -> int:
        return (1 << len(self.processes)) - 1

    def action(self, name: str) -> int:
        try:
            return self.action_index[name]
        except KeyError:
            raise ModelError(f"unknown action {name!r}") from None

    def actions(self, names: Iterable[str]) -> int:
        """Action set (bit mask) for the given action names."""
        return mask_of(self.action(n) for n in names)

    def process(self, name: str) -> int:
        for p in self.processes:
            if p.name == name:
                return p.index
        raise ModelError(f"unknown process {name!r}")

    def names(self, mask: int) -> list[str]:
        """Action names of a mask, listed in action order."""
        return [self.action_names[a] for a in self.sorted_actions(mask)]

    def process_names(self, mask: int) -> list[str]:
        return [self.processes[p].name for p in iter_bits(mask)]

    def sorted_actions(self, mask: int) -> list[int]:
        rank = self.rank
        return sorted(iter_bits(mask), key=rank.__getitem__)

    def least(self, mask: int) -> int:
        """The action-order-least member of a non-empty action set."""
        rank = self.rank
        return min(iter_bits(mask), key=rank.__getitem__)

    def word(self, seq: Sequence[int]) -> str:
        return " ".join(self.action_names[a] for a in seq)

    def parse_word(self, text: str) -> list[int]:
        return [self.action(t) for t in text.split()]

    def with_order(self, order: Sequence[int | str]) -> System:
        idx = [self.action(a) if isinstance(a, str) else a for a in order]
        return System(self.name, self.processes, self.action_names, tuple(idx))

    # -- semantics ----------------------------------------------------------

    def initial_state(self) -> GlobalState:
        return tuple(p.initial for p in self.processes)

    def enabled(self, s: GlobalState) -> int:
        en = self._full
        for table, x in zip(self._en_or_foreign, s):
            en &= table[x]
        return en

    def step(self, s: GlobalState, a: int) -> GlobalState:
        out = list(s)
        succ = self.succ
        for p in self.action_procs[a]:
            t = succ[p][s[p]].get(a)
            if t is None:
                raise ActionNotEnabled(
                    f"action {self.action_names[a]} not enabled in {self.format_state(s)}"
                )
            out[p] = t
        return tuple(out)

    def run(self, s: GlobalState, seq: Iterable[int]) -> GlobalState:
        for a in seq:
            s = self.step(s, a)
        return s

    def is_terminal(self, s: GlobalState) -> bool:
        return self.enabled(s) == 0

    def format_state(self, s: GlobalState) -> str:
        return "(" + ", ".join(
            f"{p.name}={p.states[x]}" for p, x in zip(self.processes, s)
        ) + ")"

    def locally_enables(self, p: int, x: int, a: int) -> bool:
        return (self.local_enabled[p][x] >> a) & 1 == 1

    def other_process(self, a: int, p: int) -> int:
        """The partner of ``p`` in the two-process domain of ``a``."""
        x, y = self.action_procs[a]
        return y if x == p else x

    def client_rank(self) -> list[list[int]]:
        """Topological rank of every client state (servers get zeros).

        The sum of these ranks over a global state strictly increases along
        every product transition, which gives a topological order of the
        product without exploring it.
        """
        out = []
        for p in self.processes:
            if not p.is_client:
                out.append([0] * len(p.states))
                continue
            order = _topological_order(len(p.states), p.transitions)
            if order is None:
                raise ModelError(f"client {p.name} not acyclic")
            r = [0] * len(p.states)
            for i, x in enumerate(order):
                r[x] = i
            out.append(r)
        return out


def _topological_order(n: int, transitions: Iterable[tuple[int, int, int]]) -> list[int] | None:
    indeg = [0] * n
    adj: list[list[int]] = [[] for _ in range(n)]
    for src, _, dst in transitions:
        adj[src].append(dst)
        indeg[dst] += 1
    ready = [x for x in range(n) if indeg[x] == 0]
    out = []
    while ready:
        x = ready.pop()
        out.append(x)
        for y in adj[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
    return out if len(out) == n else None


# -- module-level API ---------------------------------------------------------


def initial_state(sys: System) -> GlobalState:
    return sys.initial_state()


def enabled(sys: System, s: GlobalState) -> int:
    return sys.enabled(s)


def step(sys: System, s: GlobalState, a: int) -> GlobalState:
    return sys.step(s, a)


def dependent(sys: System, a: int, b: int) -> bool:
    return sys.dom[a] & sys.dom[b] != 0


def dependents_of(sys: System, a: int) -> int:
    return sys.dependents[a]


def dom_of(sys: System, actions: int | Iterable[int]) -> int:
    """Union of domains.  An int is read as a single action index."""
    if isinstance(actions, int):
        return sys.dom[actions]
    out = 0
    for a in actions:
        out |= sys.dom[a]
    return out


def dom_of_mask(sys: System, mask: int) -> int:
    out = 0
    dom = sys.dom
    for a in iter_bits(mask):
        out |= dom[a]
    return out


def sticks_from(sys: System, s: GlobalState, procs: int) -> int:
    """Actions ``c`` with ``dom(c) = {p, q}``, ``p`` in ``procs``, ``q`` outside,
    and ``c`` locally enabled at ``q``."""
    out = 0
    for q, x in enumerate(s):
        if (procs >> q) & 1:
            continue
        for c in iter_bits(sys.local_enabled[q][x]):
            if sys.dom[c] & procs:
                out |= 1 << c
    return out


def validate_system(sys: System) -> list[str]:
    violations = []
    for p in sys.processes:
        seen: set[tuple[int, int]] = set()
        for src, a, _ in p.transitions:
            if (src, a) in seen:
                violations.append(
                    f"process {p.name} not action-deterministic at state "
                    f"{p.states[src]} on {sys.action_names[a]}"
                )
            seen.add((src, a))
    for a, procs in enumerate(sys.action_procs):
        kinds = sorted(sys.processes[p].kind for p in procs)
        if kinds != [CLIENT, SERVER]:
            who = ", ".join(sys.processes[p].name for p in procs) or "no process"
            violations.append(
                f"action {sys.action_names[a]} must have one client and one server "
                f"in its domain, has {{{who}}}"
            )
    for p in sys.processes:
        if p.is_client and _topological_order(len(p.states), p.transitions) is None:
            violations.append(f"client {p.name} not acyclic")
    return violations


# -- building -------------------------------------------------------------------


class SystemBuilder:
    """Incremental construction of a :class:`System` by names.

    States and actions get dense indices in order of first mention.
    """

    def __init__(self, name: str = "system"):
        self.name = name
        self._procs: list[dict] = []
        self._actions: dict[str, int] = {}

    def _proc(self, kind: str, name: str, init: str | None) -> dict:
        if any(p["name"] == name for p in self._procs):
            raise ModelError(f"duplicate process name {name!r}")
        proc = {"name": name, "kind": kind, "states": {}, "init": None, "trans": []}
        self._procs.append(proc)
        if init is not None:
            self.init(name, init)
        return proc

    def client(self, name: str, init: str | None = None) -> SystemBuilder:
        self._proc(CLIENT, name, init)
        return self

    def server(self, name: str, init: str | None = None) -> SystemBuilder:
        self._proc(SERVER, name, init)
        return self

    def _get(self, name: str) -> dict:
        for p in self._procs:
            if p["name"] == name:
                return p
        raise ModelError(f"unknown process {name!r}")

    @staticmethod
    def _state(proc: dict, name: str) -> int:
        return proc["states"].setdefault(name, len(proc["states"]))

    def init(self, proc: str, state: str) -> SystemBuilder:
        p = self._get(proc)
        if p["init"] is not None:
            raise ModelError(f"duplicate init for process {proc!r}")
        p["init"] = self._state(p, state)
        return self

    def action_id(self, name: str) -> int:
        return self._actions.setdefault(name, len(self._actions))

    def trans(self, proc: str, src: str, action: str, dst: str) -> SystemBuilder:
        p = self._get(proc)
        s = self._state(p, src)
        a = self.action_id(action)
        d = self._state(p, dst)
        # repeating an identical transition is harmless; keep one copy
        if (s, a, d) not in p["trans"]:
            p["trans"].append((s, a, d))
        return self

    def path(self, proc: str, *items: str) -> SystemBuilder:
        """``path(p, s0, a, s1, b, s2)`` adds ``s0 -a-> s1 -b-> s2``."""
        for i in range(0, len(items) - 2, 2):
            self.trans(proc, items[i], items[i + 1], items[i + 2])
        return self

    def build(self, order: Sequence[str] | None = None, validate: bool = True) -> System:
        if not self._procs:
            raise ModelError("no processes")
        # actions are numbered by first appearance in process/transition
        # order, which is also how a serialised document reads back
        renumber: dict[int, int] = {}
        for p in self._procs:
            for _, a, _ in p["trans"]:
                renumber.setdefault(a, len(renumber))
        for a in sorted(self._actions.values()):
            renumber.setdefault(a, len(renumber))
        self._actions = {name: renumber[a] for name, a in self._actions.items()}
        for p in self._procs:
            p["trans"] = [(s, renumber[a], d) for s, a, d in p["trans"]]
        procs = []
        for i, p in enumerate(self._procs):
            if p["init"] is None:
                if not p["states"]:
                    self._state(p, "init")
                p["init"] = 0
            names = sorted(p["states"], key=p["states"].__getitem__)
            procs.append(Process(i, p["name"], p["kind"], tuple(names), p["init"], tuple(p["trans"])))
        action_names = tuple(sorted(self._actions, key=self._actions.__getitem__))
        order_idx: tuple[int, ...] = ()
        if order is not None:
            if sorted(order) != sorted(action_names):
                missing = set(action_names) - set(order)
                extra = [a for a in order if a not in self._actions]
                if extra:
                    raise ModelError(f"unknown action {extra[0]!r} in order")
                raise ModelError(
                    "order must list every action exactly once"
                    + (f" (missing {sorted(missing)})" if missing else "")
                )
            order_idx = tuple(self._actions[a] for a in order)
        sys = System(self.name, tuple(procs), action_names, order_idx)
        if validate:
            violations = validate_system(sys)
            if violations:
                raise ValidationError(violations)
        return sys


# -- text format ------------------------------------------------------------------


def parse_system(text: str, validate: bool = True) -> System:
    """Parse a model document.

    Grammar (line oriented, ``#`` starts a comment)::

        system <name>
        client <pname> | server <pname>
          init <state>
          <state> <action> <state>
        order <a1> ... <ak>
    """
    builder: SystemBuilder | None = None
    current: str | None = None
    order: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokens(line, lineno)
        if not tokens:
            continue
        head = tokens[0][1]
        col = tokens[0][0]
        words = [t for _, t in tokens]
        try:
            if head == "system":
                if builder is not None:
                    raise ModelSyntaxError("duplicate system header", lineno, col)
                _arity(words, 2, lineno, col)
                builder = SystemBuilder(words[1])
            elif head in (CLIENT, SERVER):
                _arity(words, 2, lineno, col)
                if builder is None:
                    builder = SystemBuilder("system")
                builder._proc(head, words[1], None)
                current = words[1]
            elif head == "init":
                _arity(words, 2, lineno, col)
                if current is None:
                    raise ModelSyntaxError("init outside a process", lineno, col)
                assert builder is not None
                builder.init(current, words[1])
            elif head == "order":
                if order is not None:
                    raise ModelSyntaxError("duplicate order directive", lineno, col)
                order = words[1:]
            else:
                if len(words) != 3:
                    raise ModelSyntaxError(
                        f"expected '<state> <action> <state>', got {len(words)} tokens",
                        lineno,
                        col,
                    )
                if current is None:
                    raise ModelSyntaxError("transition outside a process", lineno, col)
                assert builder is not None
                builder.trans(current, *words)
        except ModelSyntaxError:
            raise
        except ModelError as exc:
            raise ModelSyntaxError(str(exc), lineno, col) from None
    if builder is None or not builder._procs:
        raise ModelSyntaxError("no processes")
    if order is not None:
        unknown = [a for a in order if a not in builder._actions]
        if unknown:
            raise ModelError(f"unknown action {unknown[0]!r} in order")
    return builder.build(order=order, validate=validate)


def _tokens(line: str, lineno: int) -> list[tuple[int, str]]:
    out = []
    for m in re.finditer(r"\S+", line):
        tok = m.group(0)
        if not NAME_RE.match(tok):
            raise ModelSyntaxError(f"invalid token {tok!r}", lineno, m.start() + 1)
        out.append((m.start() + 1, tok))
    return out


def _arity(words: list[str], n: int, lineno: int, col: int) -> None:
    if len(words) != n:
        raise ModelSyntaxError(f"'{words[0]}' expects {n - 1} argument(s)", lineno, col)


def format_system(sys: System, with_order: bool | None = None) -> str:
    """Serialise to the model format.  ``parse_system`` of the result gives
    back the same indices and order.

    The order directive is written when it differs from declaration order,
    or always when ``with_order`` is true.
    """
    lines = [f"system {sys.name}"]
    for p in sys.processes:
        lines.append(f"{p.kind} {p.name}")
        lines.append(f"  init {p.states[p.initial]}")
        for src, a, dst in p.transitions:
            lines.append(f"  {p.states[src]} {sys.action_names[a]} {p.states[dst]}")
    if with_order is None:
        with_order = list(sys.order) != list(range(sys.num_actions))
    if with_order:
        lines.append("order " + " ".join(sys.action_names[a] for a in sys.order))
    return "\n".join(lines) + "\n"


def same_system(a: System, b: System) -> bool:
    """Structural equality (names, indices, transitions, order)."""
    return (
        a.name == b.name
        and a.processes == b.processes
        and a.action_names == b.action_names
        and a.order == b.order
    )


class StateCodec:
    """Mixed-radix encoding of global states as integers."""

    def __init__(self, sys: System):
        self.sizes = [len(p.states) for p in sys.processes]
        self.radix = []
        r = 1
        for n in self.sizes:
            self.radix.append(r)
            r *= n
        self.capacity = r

    @property
    def fits_int64(self) -> bool:
        return self.capacity < 2**62

    def encode(self, s: GlobalState) -> int:
        return sum(x * r for x, r in zip(s, self.radix))

    def decode(self, code: int) -> GlobalState:
        out = []
        for n in self.sizes:
            code, x = divmod(code, n)
            out.append(x)
        return tuple(out)
