"""Small hand-written systems used throughout the tests and docs."""

from __future__ import annotations

from .model import System, SystemBuilder


def fig1() -> System:
    """Two clients ``P_b``, ``P_ce`` and three servers; runs eab, eb, be, bc, cb."""
    b = SystemBuilder("fig1")
    b.client("P_b", "0").path("P_b", "0", "b", "1")
    b.client("P_ce", "0")
    b.path("P_ce", "0", "e", "1", "a", "3")
    b.trans("P_ce", "0", "c", "2")
    b.server("S_ab", "0")
    b.trans("S_ab", "0", "b", "1")
    b.path("S_ab", "0", "a", "2", "b", "3")
    b.server("S_e", "0").trans("S_e", "0", "e", "1")
    b.server("S_c", "0").trans("S_c", "0", "c", "1")
    return b.build(order=["a", "b", "c", "e"])


def fig3() -> System:
    """Client ``C_b`` loops on ``b``; deliberately invalid."""
    b = SystemBuilder("fig3")
    b.client("C_a", "0").trans("C_a", "0", "a", "1")
    b.server("S_a", "0").trans("S_a", "0", "a", "0")
    b.client("C_b", "0").trans("C_b", "0", "b", "0")
    b.server("S_b", "0").trans("S_b", "0", "b", "0")
    return b.build(order=["a", "b"], validate=False)


def fig4() -> System:
    """Runs ac, ca, b: ``{a, b}`` covers but is not persistent."""
    b = SystemBuilder("fig4")
    b.client("C_a", "0").trans("C_a", "0", "a", "1")
    b.server("S_ab", "0")
    b.trans("S_ab", "0", "a", "1").trans("S_ab", "0", "b", "2")
    b.client("C_bc", "0")
    b.trans("C_bc", "0", "b", "1").trans("C_bc", "0", "c", "2")
    b.server("S_c", "0").trans("S_c", "0", "c", "1")
    return b.build(order=["a", "b", "c"])


def fig5() -> System:
    """Needs sleep sets for trace-optimality."""
    b = SystemBuilder("fig5")
    b.client("P_ac", "0")
    b.trans("P_ac", "0", "a", "1").trans("P_ac", "0", "c", "2")
    b.server("S_ac", "0")
    b.trans("S_ac", "0", "a", "0").trans("S_ac", "0", "c", "0")
    b.client("P_b", "0").trans("P_b", "0", "b", "1")
    b.server("S_b", "0").trans("S_b", "0", "b", "0")
    return b.build(order=["a", "b", "c"])


def fig6(n: int, order: str = "process") -> System:
    """``n`` independent diamonds ``a_i c_i | b_i d_i``.

    ``order="process"`` puts all actions of ``P_i`` before those of ``P_j``
    for ``i < j``; ``order="alpha"`` sorts ``a_* < b_* < c_* < d_*``.
    """
    b = SystemBuilder(f"fig6_{n}")
    for i in range(1, n + 1):
        p, s = f"P_{i}", f"S_{i}"
        b.client(p, "0")
        b.path(p, "0", f"a_{i}", "1", f"c_{i}", "3")
        b.path(p, "0", f"b_{i}", "2", f"d_{i}", "3")
        b.server(s, "0")
        for x in "abcd":
            b.trans(s, "0", f"{x}_{i}", "0")
    if order == "process":
        names = [f"{x}_{i}" for i in range(1, n + 1) for x in "abcd"]
    elif order == "alpha":
        names = [f"{x}_{i}" for x in "abcd" for i in range(1, n + 1)]
    else:
        raise ValueError(f"unknown fig6 order {order!r}")
    return b.build(order=names)


def builtin_figures(n6: int = 4) -> dict[str, System]:
    """The valid figures; ``fig3`` is left out since it fails validation."""
    return {
        "fig1": fig1(),
        "fig4": fig4(),
        "fig5": fig5(),
        "fig6": fig6(n6),
    }
