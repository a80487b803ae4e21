"""Relabelling of parties and states, canonical forms and classification.

A relabelling ``g = (sigma, alpha, xi)`` gives new region ``k`` the role of
old region ``sigma[k]``, renames old region ``q``'s input states by the
bijection ``alpha[q]`` and its output states by ``xi[q]``.  The relabelled
process is

    w'_k(x') = alpha[sigma[k]]( w_{sigma[k]}(x) ),  x_{sigma[m]} = xi[sigma[m]]^-1(x'_m),

which is exactly what makes the relabelled operations
``xi[sigma[k]] o f_{sigma[k]} o alpha[sigma[k]]^-1`` reproduce relabelled histories.

The canonical form of a process is the member of its orbit with the
lexicographically smallest concatenated component tables.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from procfn.analysis import CausalDiagnosis, InvalidProcessError, causal_diagnosis
from procfn.core import ProcessShape, ProcessTable, ShapeMismatchError, all_tuples, rank
from procfn.pfn import InventoryLine, serialize_pfn

log = logging.getLogger(__name__)

DEFAULT_GROUP_BOUND = 10**7
MAX_PACKED_BITS = 63

Perm = tuple[int, ...]


class GroupTooLarge(RuntimeError):
    """Full orbit enumeration refused because the relabelling group is too big."""


def _check_perm(p: Sequence[int], size: int, what: str) -> Perm:
    p = tuple(int(v) for v in p)
    if sorted(p) != list(range(size)):
        raise ValueError(f"{what} {p} is not a permutation of range({size})")
    return p


def _invert(p: Perm) -> Perm:
    inv = [0] * len(p)
    for k, v in enumerate(p):
        inv[v] = k
    return tuple(inv)


@dataclass(frozen=True)
class RelabellingElement:
    party_perm: Perm
    in_maps: tuple[Perm, ...]
    out_maps: tuple[Perm, ...]

    @classmethod
    def identity(cls, shape: ProcessShape) -> RelabellingElement:
        return cls(tuple(range(shape.n_regions)),
                   tuple(tuple(range(s)) for s in shape.in_sizes),
                   tuple(tuple(range(s)) for s in shape.out_sizes))

    @classmethod
    def parties(cls, shape: ProcessShape, perm: Sequence[int]) -> RelabellingElement:
        """A pure party permutation."""
        ident = cls.identity(shape)
        return cls(tuple(perm), ident.in_maps, ident.out_maps)

    def check(self, shape: ProcessShape) -> None:
        n = shape.n_regions
        sigma = _check_perm(self.party_perm, n, "party permutation")
        if len(self.in_maps) != n or len(self.out_maps) != n:
            raise ShapeMismatchError("need one input and one output bijection per region")
        for k in range(n):
            if (shape.in_sizes[sigma[k]] != shape.in_sizes[k]
                    or shape.out_sizes[sigma[k]] != shape.out_sizes[k]):
                raise ShapeMismatchError(
                    f"party permutation moves region {sigma[k]} onto region {k} of a different size")
            _check_perm(self.in_maps[k], shape.in_sizes[k], "input bijection")
            _check_perm(self.out_maps[k], shape.out_sizes[k], "output bijection")

    def inverse(self) -> RelabellingElement:
        sigma = self.party_perm
        inv = _invert(sigma)
        return RelabellingElement(
            inv,
            tuple(_invert(self.in_maps[sigma[p]]) for p in range(len(sigma))),
            tuple(_invert(self.out_maps[sigma[p]]) for p in range(len(sigma))),
        )


def compose(g2: RelabellingElement, g1: RelabellingElement) -> RelabellingElement:
    """The element acting as ``g1`` followed by ``g2``."""
    s1, s2 = g1.party_perm, g2.party_perm
    inv1 = _invert(s1)
    n = len(s1)
    sigma = tuple(s1[s2[k]] for k in range(n))
    alpha = tuple(tuple(g2.in_maps[inv1[q]][v] for v in g1.in_maps[q]) for q in range(n))
    xi = tuple(tuple(g2.out_maps[inv1[q]][v] for v in g1.out_maps[q]) for q in range(n))
    return RelabellingElement(sigma, alpha, xi)


def shape_preserving_perms(shape: ProcessShape) -> list[Perm]:
    pairs = list(zip(shape.in_sizes, shape.out_sizes))
    return [p for p in itertools.permutations(range(shape.n_regions))
            if all(pairs[p[k]] == pairs[k] for k in range(shape.n_regions))]


def group_order(shape: ProcessShape) -> int:
    return (len(shape_preserving_perms(shape))
            * math.prod(math.factorial(s) for s in shape.in_sizes)
            * math.prod(math.factorial(s) for s in shape.out_sizes))


def group_elements(shape: ProcessShape) -> Iterator[RelabellingElement]:
    ins = [list(itertools.permutations(range(s))) for s in shape.in_sizes]
    outs = [list(itertools.permutations(range(s))) for s in shape.out_sizes]
    for sigma in shape_preserving_perms(shape):
        for xi in itertools.product(*outs):
            for alpha in itertools.product(*ins):
                yield RelabellingElement(sigma, alpha, xi)


@lru_cache(maxsize=4096)
def _index_map(shape: ProcessShape, sigma: Perm, xi: tuple[Perm, ...]) -> tuple[tuple[int, ...], ...]:
    """For each new component k, the old table index read at each new index."""
    n = shape.n_regions
    xi_inv = [_invert(m) for m in xi]
    maps = []
    for k in range(n):
        old = sigma[k]
        old_others = shape.others(old)
        old_sizes = shape.component_sizes(old)
        new_others = shape.others(k)
        idx = []
        x = [0] * n
        for xs in all_tuples(shape.component_sizes(k)):
            for m, v in zip(new_others, xs):
                x[sigma[m]] = xi_inv[sigma[m]][v]
            idx.append(rank([x[q] for q in old_others], old_sizes))
        maps.append(tuple(idx))
    return tuple(maps)


def apply_relabelling(w: ProcessTable, g: RelabellingElement) -> ProcessTable:
    g.check(w.shape)
    maps = _index_map(w.shape, g.party_perm, g.out_maps)
    comps = []
    for k, idx in enumerate(maps):
        old = g.party_perm[k]
        alpha, table = g.in_maps[old], w.components[old]
        comps.append(tuple(alpha[table[r]] for r in idx))
    return ProcessTable(w.shape, tuple(comps))


def permute_parties(w: ProcessTable, perm: Sequence[int]) -> ProcessTable:
    """Reorder regions without the same-size constraint; new region k is old ``perm[k]``."""
    shape = w.shape
    perm = _check_perm(perm, shape.n_regions, "party permutation")
    new_shape = ProcessShape([shape.in_sizes[p] for p in perm], [shape.out_sizes[p] for p in perm])
    comps = []
    for k in range(shape.n_regions):
        old = perm[k]
        table = []
        x = [0] * shape.n_regions
        for xs in all_tuples(new_shape.component_sizes(k)):
            for m, v in zip(new_shape.others(k), xs):
                x[perm[m]] = v
            table.append(w.component(old, x))
        comps.append(tuple(table))
    return ProcessTable(new_shape, tuple(comps))


def canonical_key_of(rep: ProcessTable) -> bytes:
    """Key bytes for an orbit representative: its ``.pfn`` serialization."""
    return serialize_pfn(rep).encode("ascii")


def canonical_representative(w: ProcessTable, bound: int = DEFAULT_GROUP_BOUND) -> ProcessTable:
    """Orbit member with the smallest concatenated tables, by full orbit enumeration."""
    order = group_order(w.shape)
    if order > bound:
        raise GroupTooLarge(f"relabelling group has {order} elements, bound is {bound}")
    if packable(w.shape):
        return ProcessTable.from_code(w.shape, PackedGroup.for_shape(w.shape).canonical_code(w.to_code()))
    return generic_canonical_representative(w)


def generic_canonical_representative(w: ProcessTable) -> ProcessTable:
    best = None
    for g in group_elements(w.shape):
        image = apply_relabelling(w, g)
        if best is None or image.digits() < best.digits():
            best = image
    return best


def canonical_form(w: ProcessTable, bound: int = DEFAULT_GROUP_BOUND) -> bytes:
    return canonical_key_of(canonical_representative(w, bound))


def are_equivalent(w1: ProcessTable, w2: ProcessTable) -> bool:
    s1, s2 = w1.shape, w2.shape
    if s1 != s2:
        pairs1 = list(zip(s1.in_sizes, s1.out_sizes))
        pairs2 = list(zip(s2.in_sizes, s2.out_sizes))
        if sorted(pairs1) != sorted(pairs2):
            log.info("incomparable shapes %s and %s", s1, s2)
            return False
        # any size-matching reordering will do; the group covers the rest
        used: set[int] = set()
        perm = []
        for pair in pairs1:
            k = next(k for k, p in enumerate(pairs2) if p == pair and k not in used)
            used.add(k)
            perm.append(k)
        w2 = permute_parties(w2, perm)
    return canonical_form(w1) == canonical_form(w2)


# -- packed binary path ---------------------------------------------------------

def packable(shape: ProcessShape) -> bool:
    return shape.is_binary and shape.n_regions * (1 << (shape.n_regions - 1)) <= MAX_PACKED_BITS


class PackedGroup:
    """The relabelling group of a binary shape as bit permutations plus XOR masks.

    ``images(code)`` maps a packed table through every group element at once.
    """

    _cache: dict = {}

    def __init__(self, shape: ProcessShape):
        if not packable(shape):
            raise ShapeMismatchError(f"shape {shape} has no packed representation")
        self.shape = shape
        n = shape.n_regions
        m = 1 << (n - 1)
        self.nbits = nbits = n * m
        self.elements = list(group_elements(shape))
        src = np.empty((len(self.elements), nbits), dtype=np.uint64)
        xor = np.zeros(len(self.elements), dtype=np.uint64)
        for e, g in enumerate(self.elements):
            maps = _index_map(shape, g.party_perm, g.out_maps)
            mask = 0
            for k, idx in enumerate(maps):
                old = g.party_perm[k]
                for r_new, r_old in enumerate(idx):
                    src[e, k * m + r_new] = nbits - 1 - (old * m + r_old)
                if g.in_maps[old] == (1, 0):
                    mask |= ((1 << m) - 1) << (nbits - (k + 1) * m)
            xor[e] = mask
        self.src = src
        self.xor = xor
        self.dest = np.array([nbits - 1 - p for p in range(nbits)], dtype=np.uint64)

    @classmethod
    def for_shape(cls, shape: ProcessShape) -> PackedGroup:
        if shape not in cls._cache:
            cls._cache[shape] = cls(shape)
        return cls._cache[shape]

    def images(self, code: int) -> np.ndarray:
        bits = (np.uint64(code) >> self.src) & np.uint64(1)
        return (bits << self.dest).sum(axis=1, dtype=np.uint64) ^ self.xor

    def image(self, code: int, g: RelabellingElement) -> int:
        return int(self.images(code)[self.elements.index(g)])

    def canonical_code(self, code: int) -> int:
        return int(self.images(code).min())


# -- classification -------------------------------------------------------------

@dataclass(frozen=True)
class ClassRecord:
    key: bytes
    representative: ProcessTable
    count: int
    diagnosis: CausalDiagnosis | None

    @property
    def flags(self) -> frozenset[str]:
        d = self.diagnosis
        if d is None:
            return frozenset()
        out = set()
        if d.fixed_order is not None:
            out.add("causal-fixed")
        if d.dynamically_causal:
            out.add("causal-dynamic")
        if d.genuinely_non_causal:
            out.add("genuine-noncausal")
        return frozenset(out)

    def inventory_line(self) -> InventoryLine:
        return InventoryLine(self.key, self.count, self.flags, self.diagnosis is None)


@dataclass
class ClassInventory:
    shape: ProcessShape | None
    classes: dict[bytes, ClassRecord]

    def __len__(self):
        return len(self.classes)

    @property
    def total(self) -> int:
        return sum(c.count for c in self.classes.values())

    def genuinely_non_causal(self) -> list[ClassRecord]:
        return [c for c in self.records() if c.diagnosis is not None and c.diagnosis.genuinely_non_causal]

    def records(self) -> list[ClassRecord]:
        return [self.classes[k] for k in sorted(self.classes)]

    def merge(self, other: ClassInventory) -> ClassInventory:
        if self.shape is not None and other.shape is not None and self.shape != other.shape:
            raise ShapeMismatchError("cannot merge inventories of different shapes")
        merged = dict(self.classes)
        for key, rec in other.classes.items():
            if key in merged:
                old = merged[key]
                merged[key] = ClassRecord(key, old.representative, old.count + rec.count, old.diagnosis)
            else:
                merged[key] = rec
        return ClassInventory(self.shape or other.shape, merged)

    def lines(self) -> list[InventoryLine]:
        return [c.inventory_line() for c in self.records()]


def _record(rep: ProcessTable, count: int, diagnose: bool) -> ClassRecord:
    diagnosis = None
    if diagnose:
        try:
            diagnosis = causal_diagnosis(rep)
        except InvalidProcessError:
            diagnosis = None
    return ClassRecord(canonical_key_of(rep), rep, count, diagnosis)


def classify_codes(shape: ProcessShape, codes, diagnose: bool = True) -> ClassInventory:
    """Classify packed binary tables by walking each orbit once.

    Every orbit member present in ``codes`` is marked in one pass, so the cost
    is one orbit expansion per class rather than per table.
    """
    group = PackedGroup.for_shape(shape)
    uniq, counts = np.unique(np.asarray(codes, dtype=np.uint64), return_counts=True)
    seen = np.zeros(len(uniq), dtype=bool)
    classes = {}
    for pos in range(len(uniq)):
        if seen[pos]:
            continue
        orbit = np.unique(group.images(int(uniq[pos])))
        where = np.searchsorted(uniq, orbit)
        inside = where < len(uniq)
        where = where[inside]
        hit = where[uniq[where] == orbit[inside]]
        seen[hit] = True
        rep = ProcessTable.from_code(shape, int(orbit[0]))
        rec = _record(rep, int(counts[hit].sum()), diagnose)
        classes[rec.key] = rec
    return ClassInventory(shape, classes)


def classify(stream: Iterable[ProcessTable], diagnose: bool = True) -> ClassInventory:
    """Group tables into relabelling classes with per-class counts and causal flags."""
    tables = list(stream)
    if not tables:
        return ClassInventory(None, {})
    shape = tables[0].shape
    if any(w.shape != shape for w in tables):
        raise ShapeMismatchError("classify needs tables of a single shape")
    if packable(shape):
        return classify_codes(shape, [w.to_code() for w in tables], diagnose)
    counts: dict[bytes, int] = {}
    reps: dict[bytes, ProcessTable] = {}
    for w in tables:
        rep = canonical_representative(w)
        key = canonical_key_of(rep)
        counts[key] = counts.get(key, 0) + 1
        reps[key] = rep
    return ClassInventory(shape, {k: _record(reps[k], counts[k], diagnose) for k in counts})
