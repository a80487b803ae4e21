"""Signalling relations, conditional signalling tables and causal diagnosis."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from procfn.core import ProcessTable, ShapeMismatchError, all_tuples, operations_for
from procfn.validate import operation_reduce, reduction_validate, restrictions

Direction = tuple[int, int]
"""(sender, receiver)."""


class TwoWaySignallingError(ValueError):
    """Both regions of a pair signal to each other under one freeze.

    This cannot happen for a valid process function, so it indicates that an
    invalid table was analysed as if it were valid.
    """


class InvalidProcessError(ValueError):
    pass


@dataclass(frozen=True)
class SignallingDigraph:
    n_regions: int
    edges: frozenset[Direction]

    def senders(self, i: int) -> set[int]:
        return {j for j, k in self.edges if k == i}

    def receivers(self, j: int) -> set[int]:
        return {k for s, k in self.edges if s == j}


@dataclass(frozen=True)
class SignallingRow:
    freeze: tuple[int, ...]
    first: tuple[int, ...]
    second: tuple[int, ...]
    direction: Direction | None


@dataclass(frozen=True)
class ConditionalSignallingTable:
    """One row per assignment to the outputs of ``frozen``, in rank order.

    ``row.first`` is the input of ``pair[0]`` as a function of the output of
    ``pair[1]``; ``row.second`` is the converse.
    """

    pair: tuple[int, int]
    frozen: tuple[int, ...]
    rows: tuple[SignallingRow, ...]


@dataclass(frozen=True)
class CausalDiagnosis:
    fixed_order: tuple[int, ...] | None
    dynamically_causal: bool
    first_regions: frozenset[int]
    last_regions: frozenset[int]
    genuinely_non_causal: bool


def can_signal(w: ProcessTable, j: int, i: int) -> bool:
    """True iff changing the output of ``j`` can change the input of ``i``."""
    shape = w.shape
    shape.check_region(i)
    shape.check_region(j)
    if i == j:
        raise ValueError("a region cannot signal to itself; own output is never read")
    tens = np.asarray(w.components[i]).reshape(shape.component_sizes(i))
    axis = shape.others(i).index(j)
    return bool(np.any(tens != np.take(tens, [0], axis=axis)))


def signalling_digraph(w: ProcessTable) -> SignallingDigraph:
    n = w.n_regions
    edges = frozenset((j, i) for i in range(n) for j in range(n) if i != j and can_signal(w, j, i))
    return SignallingDigraph(n, edges)


def _constant(values) -> bool:
    return all(v == values[0] for v in values)


def _direction(l: int, j: int, r_l, r_j) -> Direction | None:
    l_hears = not _constant(r_l)
    j_hears = not _constant(r_j)
    if l_hears and j_hears:
        raise TwoWaySignallingError(f"regions {l} and {j} signal both ways")
    if l_hears:
        return (j, l)
    if j_hears:
        return (l, j)
    return None


def conditional_signalling(w: ProcessTable, pair: tuple[int, int],
                           freeze: Mapping[int, int]) -> Direction | None:
    """Direction of signalling within ``pair`` once every other output is frozen."""
    l, j = pair
    if l == j:
        raise ValueError("pair must name two distinct regions")
    expected = set(range(w.n_regions)) - {l, j}
    if set(freeze) != expected:
        raise ShapeMismatchError(f"freeze must cover exactly regions {sorted(expected)}")
    r_l, r_j = restrictions(w, l, j, freeze)
    return _direction(l, j, r_l, r_j)


def signalling_table(w: ProcessTable, pair: tuple[int, int]) -> ConditionalSignallingTable:
    l, j = pair
    shape = w.shape
    if shape.n_regions < 3:
        raise ShapeMismatchError("conditional signalling tables need at least 3 regions")
    shape.check_region(l)
    shape.check_region(j)
    if l == j:
        raise ValueError("pair must name two distinct regions")
    frozen = tuple(k for k in range(shape.n_regions) if k not in (l, j))
    rows = []
    for values in all_tuples([shape.out_sizes[k] for k in frozen]):
        r_l, r_j = restrictions(w, l, j, dict(zip(frozen, values)))
        rows.append(SignallingRow(values, r_l, r_j, _direction(l, j, r_l, r_j)))
    return ConditionalSignallingTable((l, j), frozen, tuple(rows))


def topological_order(n: int, edges) -> tuple[int, ...] | None:
    """Smallest-index-first topological order, or None if the digraph has a cycle."""
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for s, r in edges:
        succ[s].append(r)
        indeg[r] += 1
    ready = [k for k in range(n) if indeg[k] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        k = heapq.heappop(ready)
        order.append(k)
        for r in succ[k]:
            indeg[r] -= 1
            if indeg[r] == 0:
                heapq.heappush(ready, r)
    return tuple(order) if len(order) == n else None


def is_dynamically_causal(w: ProcessTable) -> bool:
    """Some region reads a constant, and wiring in any of its operations leaves a causal rest."""
    if w.n_regions == 1:
        return True
    shape = w.shape
    for i in range(shape.n_regions):
        if not w.is_constant(i):
            continue
        ops = operations_for(shape.in_sizes[i], shape.out_sizes[i])
        if all(is_dynamically_causal(operation_reduce(w, i, op).process) for op in ops):
            return True
    return False


def causal_diagnosis(w: ProcessTable) -> CausalDiagnosis:
    verdict = reduction_validate(w)
    if not verdict.valid:
        raise InvalidProcessError("causal diagnosis needs a valid process function")
    graph = signalling_digraph(w)
    n = w.n_regions
    order = topological_order(n, graph.edges)
    dynamic = is_dynamically_causal(w)
    first = frozenset(k for k in range(n) if not graph.senders(k))
    last = frozenset(k for k in range(n) if not graph.receivers(k))
    genuine = not dynamic and not first and not last
    return CausalDiagnosis(order, dynamic, first, last, genuine)
