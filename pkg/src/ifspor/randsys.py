"""Seeded random client/server systems for property testing."""

from __future__ import annotations

import random

from .model import System, SystemBuilder


def random_system(
    rng: random.Random,
    max_processes: int = 4,
    max_states: int = 4,
    max_actions: int = 6,
    name: str = "rand",
    dense: bool = False,
) -> System:
    """A valid random system.

    Clients number their states ``0..k-1`` and only move forward, so they
    are acyclic.  Servers get arbitrary transitions.  Every action has one
    client and one server and one or two transitions in each of them.
    ``dense`` uses the maximal process, state and action counts, which
    yields larger products.
    """
    n_proc = max_processes if dense else rng.randint(2, max_processes)
    n_clients = rng.randint(1, n_proc - 1)
    clients = [f"C{i}" for i in range(n_clients)]
    servers = [f"S{i}" for i in range(n_proc - n_clients)]
    low = max_states if dense else 1
    sizes = {p: rng.randint(max(2, low), max_states) if p in clients else rng.randint(low, max_states)
             for p in clients + servers}
    b = SystemBuilder(name)
    for c in clients:
        b.client(c, "0")
    for s in servers:
        b.server(s, "0")
    for k in range(max_actions if dense else rng.randint(1, max_actions)):
        act = f"a{k}"
        c, s = rng.choice(clients), rng.choice(servers)
        for src in rng.sample(range(sizes[c] - 1), min(rng.randint(1, 2), sizes[c] - 1)):
            b.trans(c, str(src), act, str(rng.randint(src + 1, sizes[c] - 1)))
        n_src = rng.randint(2, sizes[s]) if dense and sizes[s] > 1 else rng.randint(1, 2)
        for src in rng.sample(range(sizes[s]), min(n_src, sizes[s])):
            b.trans(s, str(src), act, str(rng.randrange(sizes[s])))
    return b.build()


def corpus(n: int, seed: int = 0, **kwargs) -> list[System]:
    rng = random.Random(seed)
    return [random_system(rng, name=f"rand{i}", **kwargs) for i in range(n)]
