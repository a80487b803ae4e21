"""Exhaustive enumeration of valid binary process functions on up to four regions.

Every valid process satisfies a pairwise constraint: with all other outputs
frozen, each pair of regions signals at most one way.  For each pair of
regions we precompute which pairs of candidate component tables are
compatible, store each row as an integer bitset, and run a depth-first search
over regions that intersects the rows of the components chosen so far.

The pairwise constraint is necessary but not sufficient (a three-region
signalling cycle satisfies it), so by default the survivors are passed
through an exact packed validity check before being emitted.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from procfn.core import ProcessShape, ProcessTable, ShapeMismatchError, all_tuples
from procfn.equivalence import ClassInventory, classify_codes
from procfn.validate import reduction_valid_codes

MAX_REGIONS = 4
EMIT_MODES = ("count", "tables", "keys")

Progress = Callable[[int, float, int], None]


@dataclass(frozen=True)
class PairCompatibilityRelation:
    """``mask[u, v]`` is set iff candidate ``u`` for region ``pair[0]`` and
    candidate ``v`` for region ``pair[1]`` never signal both ways.

    ``rows[u]`` is row ``u`` of the mask packed into an integer bitset.
    """

    pair: tuple[int, int]
    mask: np.ndarray
    rows: tuple[int, ...]


@dataclass(frozen=True)
class SearchPlan:
    n_regions: int
    shard_count: int = 1
    shard_index: int = 0
    emit: str = "count"
    exact: bool = True

    def __post_init__(self):
        if not 1 <= self.n_regions <= MAX_REGIONS:
            raise ShapeMismatchError(f"search supports 1..{MAX_REGIONS} binary regions")
        if self.shard_count < 1 or not 0 <= self.shard_index < self.shard_count:
            raise ValueError(f"shard index {self.shard_index} not in range(0, {self.shard_count})")
        if self.emit not in EMIT_MODES:
            raise ValueError(f"emit mode must be one of {EMIT_MODES}")

    @property
    def shape(self) -> ProcessShape:
        return ProcessShape.binary(self.n_regions)


def _check_shape(shape: ProcessShape) -> None:
    if not shape.is_binary or shape.n_regions > MAX_REGIONS:
        raise ShapeMismatchError(f"pairwise masks need a binary shape with at most {MAX_REGIONS} regions")


def candidate_tables(shape: ProcessShape, i: int) -> np.ndarray:
    """Bits of every candidate table for region ``i``; row ``u`` is the table of rank ``u``."""
    m = shape.component_length(i)
    u = np.arange(1 << m)[:, None]
    return (u >> (m - 1 - np.arange(m))[None, :]) & 1


def _hears(shape: ProcessShape, l: int, j: int) -> np.ndarray:
    """hears[u, f]: candidate u for ``l`` depends on x_j under freeze number f."""
    tables = candidate_tables(shape, l)
    others = shape.others(l)
    rest = [k for k in others if k != j]
    cols = []
    for values in all_tuples([2] * len(rest)):
        x = dict(zip(rest, values))
        pos = []
        for xj in (0, 1):
            x[j] = xj
            r = 0
            for k in others:
                r = 2 * r + x[k]
            pos.append(r)
        cols.append(tables[:, pos[0]] != tables[:, pos[1]])
    return np.stack(cols, axis=1)


def pair_compatibility(shape: ProcessShape, l: int, j: int) -> PairCompatibilityRelation:
    _check_shape(shape)
    shape.check_region(l)
    shape.check_region(j)
    if l == j:
        raise ValueError("pair must name two distinct regions")
    a, b = _hears(shape, l, j), _hears(shape, j, l)
    mask = ~np.any(a[:, None, :] & b[None, :, :], axis=2)
    weights = [1 << v for v in range(mask.shape[1])]
    rows = tuple(sum(w for w, bit in zip(weights, row) if bit) for row in mask.tolist())
    mask.setflags(write=False)
    return PairCompatibilityRelation((l, j), mask, rows)


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _Search:
    def __init__(self, plan: SearchPlan):
        self.plan = plan
        shape = plan.shape
        self.n = n = shape.n_regions
        self.m = shape.component_length(0)
        self.rows = {(l, j): pair_compatibility(shape, l, j).rows
                     for l, j in itertools.combinations(range(n), 2)}

    def first_candidates(self) -> list[int]:
        p = self.plan
        return list(range(p.shard_index, 1 << self.m, p.shard_count))

    def _descend(self, level: int, chosen: list[int], allowed: list[int], out, count_only: bool):
        n = self.n
        if level == n - 1:
            if count_only:
                out.append(allowed[level].bit_count())
                return
            prefix = 0
            for u in chosen:
                prefix = (prefix << self.m) | u
            prefix <<= self.m
            out.extend(prefix | u for u in _bits(allowed[level]))
            return
        for u in _bits(allowed[level]):
            nxt = list(allowed)
            for k in range(level + 1, n):
                nxt[k] &= self.rows[level, k][u]
            chosen.append(u)
            self._descend(level + 1, chosen, nxt, out, count_only)
            chosen.pop()

    def run(self, count_only: bool, progress: Progress | None):
        firsts = self.first_candidates()
        out: list[int] = []
        found = 0
        for done, u in enumerate(firsts, start=1):
            before = len(out)
            if self.n == 1:
                out.append(1 if count_only else u)
            else:
                allowed = [0] + [self.rows[0, k][u] for k in range(1, self.n)]
                self._descend(1, [u], allowed, out, count_only)
            found += sum(out[before:]) if count_only else len(out) - before
            if progress is not None:
                progress(self.plan.shard_index, done / len(firsts), found)
        return found if count_only else out


def count_processes(plan: SearchPlan, progress: Progress | None = None) -> int:
    if plan.exact:
        return len(enumerate_codes(plan, progress))
    return _Search(plan).run(True, progress)


def pairwise_codes(plan: SearchPlan, progress: Progress | None = None) -> np.ndarray:
    """Packed codes of every table in this shard meeting the pairwise constraint."""
    return np.array(_Search(plan).run(False, progress), dtype=np.uint64)


def enumerate_codes(plan: SearchPlan, progress: Progress | None = None) -> np.ndarray:
    """Packed codes of every emitted table in this shard, in ascending order."""
    codes = pairwise_codes(plan, progress)
    if plan.exact:
        codes = codes[reduction_valid_codes(plan.shape, codes)]
    return codes


def enumerate_processes(plan: SearchPlan, progress: Progress | None = None) -> Iterator[ProcessTable]:
    shape = plan.shape
    for code in enumerate_codes(plan, progress):
        yield ProcessTable.from_code(shape, int(code))


def enumerate_and_classify(plan: SearchPlan, progress: Progress | None = None) -> ClassInventory:
    return classify_codes(plan.shape, enumerate_codes(plan, progress))


def stderr_progress(every: float = 0.1) -> Progress:
    """Progress printer writing ``shard s: explored p%, found k`` to standard error."""
    state = {"next": 0.0}

    def report(shard: int, fraction: float, found: int) -> None:
        if fraction >= state["next"] or fraction >= 1.0:
            print(f"shard {shard}: explored {100 * fraction:.0f}%, found {found}", file=sys.stderr)
            state["next"] = fraction + every

    return report
