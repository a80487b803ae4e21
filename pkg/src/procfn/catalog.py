"""Named binary processes used in documentation, demos and tests."""
from __future__ import annotations

from procfn.core import ProcessShape, ProcessTable


def _not(v):
    return 1 - v


def cyclic_four() -> ProcessTable:
    """Four regions; the outputs of any two set the signalling direction of the other two.

    a1 = x4 (x2+1)(x3+1), a2 = x1 (x4+1)(x3+1), a3 = x2 (x1+1)(x4+1),
    a4 = x3 (x2+1)(x1+1), with + taken mod 2.
    """
    return ProcessTable.from_callables(ProcessShape.binary(4), [
        lambda x: x[3] * _not(x[1]) * _not(x[2]),
        lambda x: x[0] * _not(x[3]) * _not(x[2]),
        lambda x: x[1] * _not(x[0]) * _not(x[3]),
        lambda x: x[2] * _not(x[1]) * _not(x[0]),
    ])


def asymmetric_four() -> ProcessTable:
    """A second non-causal four-region process, inequivalent to :func:`cyclic_four`.

    a1 = x2 (x3 + x4), a2 = x3 (x4 (x1+1) + 1), a3 = x4 (x1+1)(x2+1),
    a4 = x1 (x2+1)(x3+1).
    """
    return ProcessTable.from_callables(ProcessShape.binary(4), [
        lambda x: x[1] * (x[2] ^ x[3]),
        lambda x: x[2] * ((x[3] * _not(x[0])) ^ 1),
        lambda x: x[3] * _not(x[0]) * _not(x[1]),
        lambda x: x[0] * _not(x[1]) * _not(x[2]),
    ])


def cyclic_three() -> ProcessTable:
    """The binary tripartite non-causal process: a1 = ~x2 & x3, a2 = ~x3 & x1, a3 = ~x1 & x2."""
    return ProcessTable.from_callables(ProcessShape.binary(3), [
        lambda x: _not(x[1]) & x[2],
        lambda x: _not(x[2]) & x[0],
        lambda x: _not(x[0]) & x[1],
    ])


def causal_chain() -> ProcessTable:
    """Regions ordered 1 < 2 < 3: a1 = 0, a2 = x1, a3 = x1 + x2."""
    return ProcessTable.from_callables(ProcessShape.binary(3), [
        lambda x: 0,
        lambda x: x[0],
        lambda x: x[0] ^ x[1],
    ])


def two_way_pair() -> ProcessTable:
    """Invalid bipartite candidate where each region copies the other's output."""
    return ProcessTable(ProcessShape.binary(2), ((0, 1), (0, 1)))


def copy_cycle_three() -> ProcessTable:
    """Invalid tripartite candidate a1 = x2, a2 = x3, a3 = x1.

    Freezing any one output leaves a one-way bipartite process, yet identity
    operations everywhere give two consistent histories.
    """
    return ProcessTable.from_callables(ProcessShape.binary(3), [
        lambda x: x[1],
        lambda x: x[2],
        lambda x: x[0],
    ])
