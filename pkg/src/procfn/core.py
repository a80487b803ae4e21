"""Shapes, mixed-radix encodings and evaluation of process functions.

Region indices are 0-based throughout the Python API.  Tuples of digits are
ranked in mixed radix with the lowest region index most significant, so the
rank of ``(0, 1, 1)`` over sizes ``(2, 2, 2)`` is 3.

A process function is stored as one component table per region.  Component
``i`` is indexed by the outputs of every region *except* ``i``, which makes
dependence on a region's own output unrepresentable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

# Products of alphabet sizes must fit a signed 64-bit index.
MAX_STATE_COUNT = 2**63 - 1


class MalformedStateError(ValueError):
    """A digit tuple does not fit the alphabet sizes it is ranked against."""


class ShapeMismatchError(ValueError):
    """Arguments disagree about the number of regions or alphabet sizes."""


class OwnOutputDependenceError(ValueError):
    """A derived function lets some region's input depend on its own output."""

    def __init__(self, region: int, message: str | None = None):
        self.region = region
        super().__init__(message or f"component {region} depends on its own output")


def rank(digits: Sequence[int], sizes: Sequence[int]) -> int:
    if len(digits) != len(sizes):
        raise MalformedStateError(f"expected {len(sizes)} digits, got {len(digits)}")
    r = 0
    for pos, (d, s) in enumerate(zip(digits, sizes)):
        if not 0 <= d < s:
            raise MalformedStateError(f"digit {d} at position {pos} not in range(0, {s})")
        r = r * s + d
    return r


def unrank(index: int, sizes: Sequence[int]) -> tuple[int, ...]:
    total = math.prod(sizes)
    if not 0 <= index < total:
        raise MalformedStateError(f"rank {index} not in range(0, {total})")
    out = []
    for s in reversed(sizes):
        index, d = divmod(index, s)
        out.append(d)
    return tuple(reversed(out))


def all_tuples(sizes: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Every digit tuple over ``sizes``, in rank order."""
    return itertools.product(*(range(s) for s in sizes))


@dataclass(frozen=True)
class ProcessShape:
    """Number of regions plus input (past) and output (future) alphabet sizes."""

    in_sizes: tuple[int, ...]
    out_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "in_sizes", tuple(int(s) for s in self.in_sizes))
        object.__setattr__(self, "out_sizes", tuple(int(s) for s in self.out_sizes))
        if len(self.in_sizes) == 0:
            raise ShapeMismatchError("a process needs at least one region")
        if len(self.in_sizes) != len(self.out_sizes):
            raise ShapeMismatchError("in_sizes and out_sizes differ in length")
        if any(s < 1 for s in self.in_sizes + self.out_sizes):
            raise ShapeMismatchError("alphabet sizes must be positive")
        for sizes in (self.in_sizes, self.out_sizes):
            if math.prod(sizes) > MAX_STATE_COUNT:
                raise ShapeMismatchError(f"state count of {sizes} overflows 64-bit ranks")

    @classmethod
    def binary(cls, n_regions: int) -> ProcessShape:
        return cls((2,) * n_regions, (2,) * n_regions)

    @property
    def n_regions(self) -> int:
        return len(self.in_sizes)

    @property
    def is_binary(self) -> bool:
        return all(s == 2 for s in self.in_sizes + self.out_sizes)

    @property
    def input_count(self) -> int:
        return math.prod(self.in_sizes)

    @property
    def output_count(self) -> int:
        return math.prod(self.out_sizes)

    def others(self, i: int) -> tuple[int, ...]:
        return tuple(k for k in range(self.n_regions) if k != i)

    def component_sizes(self, i: int) -> tuple[int, ...]:
        """Output sizes of the regions component ``i`` reads."""
        return tuple(self.out_sizes[k] for k in self.others(i))

    def component_length(self, i: int) -> int:
        return math.prod(self.component_sizes(i))

    def check_region(self, i: int) -> None:
        if not 0 <= i < self.n_regions:
            raise ShapeMismatchError(f"region {i} not in range(0, {self.n_regions})")

    def drop(self, i: int) -> ProcessShape:
        """The shape with region ``i`` deleted."""
        self.check_region(i)
        keep = self.others(i)
        return ProcessShape(
            tuple(self.in_sizes[k] for k in keep), tuple(self.out_sizes[k] for k in keep)
        )


Operation = tuple[int, ...]
"""A local operation f_i: A_i -> X_i, stored as its value table."""

OperationTuple = tuple[Operation, ...]


def operations_for(in_size: int, out_size: int) -> list[Operation]:
    """All maps from an alphabet of ``in_size`` to one of ``out_size``, lexicographically."""
    return list(itertools.product(range(out_size), repeat=in_size))


def binary_operation(name: str) -> Operation:
    try:
        return {"const0": (0, 0), "const1": (1, 1), "id": (0, 1), "not": (1, 0)}[name]
    except KeyError:
        raise ValueError(f"unknown binary operation {name!r}") from None


def check_operations(shape: ProcessShape, ops: Sequence[Sequence[int]]) -> OperationTuple:
    if len(ops) != shape.n_regions:
        raise ShapeMismatchError(f"expected {shape.n_regions} operations, got {len(ops)}")
    out = []
    for i, op in enumerate(ops):
        op = tuple(int(v) for v in op)
        if len(op) != shape.in_sizes[i]:
            raise ShapeMismatchError(
                f"operation {i} has {len(op)} entries, region input alphabet has {shape.in_sizes[i]}"
            )
        if any(not 0 <= v < shape.out_sizes[i] for v in op):
            raise ShapeMismatchError(f"operation {i} maps outside output alphabet of size {shape.out_sizes[i]}")
        out.append(op)
    return tuple(out)


@dataclass(frozen=True)
class ProcessTable:
    """Candidate process function w: X -> A as per-region component tables.

    ``components[i][r]`` is the input of region ``i`` when the outputs of the
    other regions have rank ``r``.  Validity under the fixed-point law is not
    checked here.
    """

    shape: ProcessShape
    components: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(int(v) for v in c) for c in self.components)
        object.__setattr__(self, "components", comps)
        shape = self.shape
        if len(comps) != shape.n_regions:
            raise ShapeMismatchError(f"expected {shape.n_regions} components, got {len(comps)}")
        for i, comp in enumerate(comps):
            m = shape.component_length(i)
            if len(comp) != m:
                raise ShapeMismatchError(f"component {i}: expected {m} values, got {len(comp)}")
            bad = [v for v in comp if not 0 <= v < shape.in_sizes[i]]
            if bad:
                raise ShapeMismatchError(
                    f"component {i}: value {bad[0]} outside input alphabet of size {shape.in_sizes[i]}"
                )

    @classmethod
    def from_callables(cls, shape: ProcessShape, funcs: Sequence[Callable]) -> ProcessTable:
        """Tabulate ``funcs[i](x)`` over all outputs of the other regions.

        Each callable receives the full output tuple with its own slot set to
        ``None``, so reading it fails loudly.
        """
        if len(funcs) != shape.n_regions:
            raise ShapeMismatchError(f"expected {shape.n_regions} callables, got {len(funcs)}")
        comps = []
        for i, fn in enumerate(funcs):
            others = shape.others(i)
            table = []
            for xs in all_tuples(shape.component_sizes(i)):
                x: list = [None] * shape.n_regions
                for k, v in zip(others, xs):
                    x[k] = v
                table.append(int(fn(tuple(x))))
            comps.append(table)
        return cls(shape, tuple(comps))

    @classmethod
    def constant(cls, shape: ProcessShape, values: Sequence[int]) -> ProcessTable:
        return cls(shape, tuple((values[i],) * shape.component_length(i) for i in range(shape.n_regions)))

    @property
    def n_regions(self) -> int:
        return self.shape.n_regions

    def component(self, i: int, x: Sequence[int]) -> int:
        """Input of region ``i`` given a full output tuple (``x[i]`` is ignored)."""
        others = self.shape.others(i)
        return self.components[i][rank([x[k] for k in others], self.shape.component_sizes(i))]

    def is_constant(self, i: int) -> bool:
        comp = self.components[i]
        return all(v == comp[0] for v in comp)

    def digits(self) -> tuple[int, ...]:
        """All component values concatenated; this order defines canonical minima."""
        return tuple(v for comp in self.components for v in comp)

    def to_code(self) -> int:
        """Pack a binary table into an integer, first entry of component 0 most significant."""
        if not self.shape.is_binary:
            raise ShapeMismatchError("packed codes exist only for binary shapes")
        code = 0
        for v in self.digits():
            code = (code << 1) | v
        return code

    @classmethod
    def from_code(cls, shape: ProcessShape, code: int) -> ProcessTable:
        if not shape.is_binary:
            raise ShapeMismatchError("packed codes exist only for binary shapes")
        lengths = [shape.component_length(i) for i in range(shape.n_regions)]
        nbits = sum(lengths)
        code = int(code)
        if not 0 <= code < 1 << nbits:
            raise ShapeMismatchError(f"code {code} does not fit {nbits} bits")
        bits = [(code >> (nbits - 1 - p)) & 1 for p in range(nbits)]
        comps, start = [], 0
        for m in lengths:
            comps.append(tuple(bits[start:start + m]))
            start += m
        return cls(shape, tuple(comps))


def apply(w: ProcessTable, x: Sequence[int]) -> tuple[int, ...]:
    """Evaluate w(x)."""
    shape = w.shape
    if len(x) != shape.n_regions:
        raise ShapeMismatchError(f"output tuple has {len(x)} entries, process has {shape.n_regions} regions")
    for k, (v, s) in enumerate(zip(x, shape.out_sizes)):
        if not 0 <= v < s:
            raise MalformedStateError(f"output {v} of region {k} not in range(0, {s})")
    return tuple(w.component(i, x) for i in range(shape.n_regions))


def loop_map(w: ProcessTable, ops: Sequence[Operation], a: Sequence[int]) -> tuple[int, ...]:
    """Evaluate (w o f)(a): run each local operation, then the process."""
    shape = w.shape
    if len(ops) != shape.n_regions or len(a) != shape.n_regions:
        raise ShapeMismatchError("operations and input tuple must cover every region")
    for k, (v, s) in enumerate(zip(a, shape.in_sizes)):
        if not 0 <= v < s:
            raise MalformedStateError(f"input {v} of region {k} not in range(0, {s})")
    return apply(w, tuple(op[v] for op, v in zip(ops, a)))


def fixed_points(w: ProcessTable, ops: Sequence[Operation]) -> list[tuple[int, ...]]:
    """Every a with (w o f)(a) = a, in rank order."""
    return [a for a in all_tuples(w.shape.in_sizes) if loop_map(w, ops, a) == a]


def packed_apply(shape: ProcessShape, code: int, x: Sequence[int]) -> tuple[int, ...]:
    """apply() on a packed binary code, without unpacking into tables."""
    n = shape.n_regions
    m = 1 << (n - 1)
    nbits = n * m
    out = []
    for i in range(n):
        r = 0
        for k in range(n):
            if k != i:
                r = (r << 1) | x[k]
        out.append((code >> (nbits - 1 - (i * m + r))) & 1)
    return tuple(out)


@lru_cache(maxsize=64)
def output_grid(shape: ProcessShape) -> np.ndarray:
    """Output digits for every output rank, shape (|X|, N), read-only."""
    idx = np.arange(shape.output_count)
    grid = np.stack(np.unravel_index(idx, shape.out_sizes), axis=1)
    grid.setflags(write=False)
    return grid


class DenseFunction:
    """An arbitrary function X -> A tabulated over every output tuple.

    Unlike :class:`ProcessTable` this may let a region's input depend on its
    own output, which is what composing an invalid candidate with a local
    operation can produce.  ``values[r, i]`` is a_i at output rank ``r``.
    """

    def __init__(self, shape: ProcessShape, values: np.ndarray):
        values = np.asarray(values, dtype=np.int64)
        if values.shape != (shape.output_count, shape.n_regions):
            raise ShapeMismatchError(f"dense table has shape {values.shape}")
        self.shape = shape
        self.values = values
        self.values.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, DenseFunction):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"DenseFunction({self.shape}, {self.values.tolist()})"

    @classmethod
    def from_process(cls, w: ProcessTable) -> DenseFunction:
        shape = w.shape
        grid = output_grid(shape)
        cols = []
        for i in range(shape.n_regions):
            others = list(shape.others(i))
            if others:
                r = np.ravel_multi_index(tuple(grid[:, others].T), shape.component_sizes(i))
            else:
                r = np.zeros(len(grid), dtype=np.int64)
            cols.append(np.asarray(w.components[i])[r])
        return cls(shape, np.stack(cols, axis=1))

    def freeze(self, i: int, value: int) -> DenseFunction:
        """Fix the output of region ``i`` and drop its component."""
        shape = self.shape
        shape.check_region(i)
        if not 0 <= value < shape.out_sizes[i]:
            raise MalformedStateError(f"output {value} of region {i} not in range(0, {shape.out_sizes[i]})")
        keep = list(shape.others(i))
        grid = output_grid(shape)
        rows = self.values[grid[:, i] == value]
        return DenseFunction(shape.drop(i), rows[:, keep])

    def compose(self, i: int, op: Sequence[int]) -> DenseFunction:
        """Hard-wire operation ``op`` into region ``i``.

        New a_j(x without x_i) = a_j(x with x_i = op(a_i(x without x_i))).
        """
        shape = self.shape
        shape.check_region(i)
        op = np.asarray(check_operations(
            ProcessShape((shape.in_sizes[i],), (shape.out_sizes[i],)), [op])[0])
        keep = list(shape.others(i))
        small = shape.drop(i)
        grid = output_grid(small)
        if i in self.own_output_dependent():
            raise OwnOutputDependenceError(i, f"cannot wire an operation into region {i}: "
                                              "its input depends on its own output")
        full = np.zeros((len(grid), shape.n_regions), dtype=np.int64)
        full[:, keep] = grid
        a_i = self.values[np.ravel_multi_index(tuple(full.T), shape.out_sizes), i]
        full[:, i] = op[a_i]
        rows = self.values[np.ravel_multi_index(tuple(full.T), shape.out_sizes)]
        return DenseFunction(small, rows[:, keep])

    def own_output_dependent(self) -> list[int]:
        """Regions whose input changes with their own output."""
        shape = self.shape
        tens = self.values.reshape(shape.out_sizes + (shape.n_regions,))
        bad = []
        for i in range(shape.n_regions):
            col = tens[..., i]
            first = np.take(col, [0], axis=i)
            if not np.all(col == first):
                bad.append(i)
        return bad

    def to_process(self) -> ProcessTable:
        """Convert to a ProcessTable, or raise if any component reads its own output."""
        bad = self.own_output_dependent()
        if bad:
            raise OwnOutputDependenceError(bad[0])
        shape = self.shape
        tens = self.values.reshape(shape.out_sizes + (shape.n_regions,))
        comps = []
        for i in range(shape.n_regions):
            comps.append(np.take(tens[..., i], 0, axis=i).ravel().tolist())
        return ProcessTable(shape, tuple(comps))
