"""Decide whether a candidate table is a process function.

Four deciders are provided:

* :func:`brute_force_validate` counts fixed points of w o f for every tuple of
  local operations.
* :func:`pairwise_validate` freezes all outputs but two and requires the
  remaining pair to signal at most one way.
* :func:`recursive_validate` freezes one output at a time and recurses down
  to the one- and two-region characterisations.
* :func:`reduction_validate` wires every local operation into one region and
  recurses on the resulting (N-1)-region function.

Freezing outputs is necessary but not sufficient for validity once N >= 3:
the three-region cycle a1 = x2, a2 = x3, a3 = x1 passes both the pairwise
and the recursive output-freezing checks, yet w o f has two fixed points when
every region applies the identity.  ``brute`` and ``reduction`` are exact;
``pairwise`` and ``recursive`` are kept as the cheap necessary conditions.

Every invalid verdict carries a tuple of local operations whose loop map has
zero or several fixed points, so the verdict can be re-checked by hand.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from procfn.core import (
    DenseFunction,
    MalformedStateError,
    OperationTuple,
    OwnOutputDependenceError,
    ProcessShape,
    ProcessTable,
    ShapeMismatchError,
    all_tuples,
    check_operations,
    fixed_points,
    operations_for,
)

DEFAULT_BRUTE_BOUND = 10**7
METHODS = ("brute", "pairwise", "recursive", "reduction")
EXACT_METHODS = ("brute", "reduction")


class SearchSpaceTooLarge(RuntimeError):
    """Brute-force validation refused because too many operation tuples exist."""


@dataclass(frozen=True)
class Witness:
    """Local operations under which w o f does not have exactly one fixed point.

    For the pairwise and recursive deciders ``pair``, ``freeze`` and
    ``restrictions`` say where the two-way signalling was found:
    ``restrictions[0]`` is the first region's input as a function of the
    second region's output and vice versa.
    """

    operations: OperationTuple
    fixed_points: tuple[tuple[int, ...], ...]
    pair: tuple[int, int] | None = None
    freeze: tuple[tuple[int, int], ...] = ()
    restrictions: tuple[tuple[int, ...], tuple[int, ...]] | None = None


@dataclass(frozen=True)
class Verdict:
    valid: bool
    method: str
    witness: Witness | None = None

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class ReducedProcess:
    """A process on N-1 regions with region ``removed`` wired in.

    Exactly one of ``operation`` (a hard-wired local operation) and ``output``
    (a frozen output value) is set.  ``kept`` lists the parent's region
    indices in the order they appear in ``process``.
    """

    process: ProcessTable
    removed: int
    kept: tuple[int, ...]
    operation: tuple[int, ...] | None = None
    output: int | None = None


def brute_bound() -> int:
    env = os.environ.get("PFN_BRUTE_BOUND")
    return int(env) if env else DEFAULT_BRUTE_BOUND


def operation_tuple_count(shape: ProcessShape) -> int:
    return math.prod(x ** a for a, x in zip(shape.in_sizes, shape.out_sizes))


# -- reductions ---------------------------------------------------------------

def freeze_outputs(w: ProcessTable, assignment: Mapping[int, int]) -> ProcessTable:
    """Fix the outputs of the regions in ``assignment``; keep the rest in index order."""
    shape = w.shape
    for k, v in assignment.items():
        shape.check_region(k)
        if not 0 <= v < shape.out_sizes[k]:
            raise MalformedStateError(f"output {v} of region {k} not in range(0, {shape.out_sizes[k]})")
    keep = [k for k in range(shape.n_regions) if k not in assignment]
    if not keep:
        raise ShapeMismatchError("cannot freeze every region")
    comps = []
    x = [0] * shape.n_regions
    for k, v in assignment.items():
        x[k] = v
    for i in keep:
        readers = [k for k in keep if k != i]
        table = []
        for xs in all_tuples([shape.out_sizes[k] for k in readers]):
            for k, v in zip(readers, xs):
                x[k] = v
            table.append(w.component(i, x))
        comps.append(table)
    new_shape = ProcessShape([shape.in_sizes[k] for k in keep], [shape.out_sizes[k] for k in keep])
    return ProcessTable(new_shape, tuple(comps))


def output_reduce(w: ProcessTable, i: int, value: int) -> ReducedProcess:
    """Freeze the output of region ``i`` to ``value``."""
    return ReducedProcess(freeze_outputs(w, {i: value}), i, w.shape.others(i), output=value)


def operation_reduce(w: ProcessTable, i: int, op: Sequence[int]) -> ReducedProcess:
    """Wire local operation ``op`` into region ``i``.

    Raises :class:`~procfn.core.OwnOutputDependenceError` when the result lets
    some remaining region read its own output; that never happens for a valid
    ``w``, and such a result is never a process function.
    """
    op = tuple(op)
    reduced = DenseFunction.from_process(w).compose(i, op).to_process()
    return ReducedProcess(reduced, i, w.shape.others(i), operation=op)


# -- witnesses ----------------------------------------------------------------

def restrictions(w: ProcessTable, l: int, j: int, freeze: Mapping[int, int]):
    """Inputs of ``l`` and ``j`` as functions of each other's output, other outputs frozen."""
    shape = w.shape
    x = [0] * shape.n_regions
    for k, v in freeze.items():
        x[k] = v
    r_l, r_j = [], []
    for v in range(shape.out_sizes[j]):
        x[j] = v
        r_l.append(w.component(l, x))
    x[j] = 0
    for v in range(shape.out_sizes[l]):
        x[l] = v
        r_j.append(w.component(j, x))
    return tuple(r_l), tuple(r_j)


def _is_constant(values) -> bool:
    return all(v == values[0] for v in values)


def _two_fixed_point_ops(r_l, r_j, in_l, in_j):
    """Operations for a two-way pair that make both branches self-consistent."""
    p = 0
    q = next(k for k, v in enumerate(r_l) if v != r_l[p])
    pp = 0
    qq = next(k for k, v in enumerate(r_j) if v != r_j[pp])
    s, t = r_l[p], r_l[q]
    ss, tt = r_j[pp], r_j[qq]
    f_l = [pp] * in_l
    f_l[s], f_l[t] = pp, qq
    f_j = [p] * in_j
    f_j[ss], f_j[tt] = p, q
    return tuple(f_l), tuple(f_j)


def pair_witness(w: ProcessTable, l: int, j: int, freeze: Mapping[int, int]) -> Witness:
    """Build a re-checkable witness from two-way signalling between ``l`` and ``j``."""
    shape = w.shape
    r_l, r_j = restrictions(w, l, j, freeze)
    if _is_constant(r_l) or _is_constant(r_j):
        raise ValueError(f"regions {l} and {j} do not signal both ways under {dict(freeze)}")
    f_l, f_j = _two_fixed_point_ops(r_l, r_j, shape.in_sizes[l], shape.in_sizes[j])
    ops = []
    for k in range(shape.n_regions):
        if k == l:
            ops.append(f_l)
        elif k == j:
            ops.append(f_j)
        else:
            ops.append((freeze[k],) * shape.in_sizes[k])
    ops = check_operations(shape, ops)
    return Witness(ops, tuple(fixed_points(w, ops)), (l, j),
                   tuple(sorted(freeze.items())), (r_l, r_j))


# -- direct characterisations --------------------------------------------------

def check_single_region(w: ProcessTable) -> Verdict:
    """One region: valid iff constant, which the table layout already guarantees."""
    if w.n_regions != 1:
        raise ShapeMismatchError(f"expected 1 region, got {w.n_regions}")
    return Verdict(w.is_constant(0), "direct")


def check_bipartite(w: ProcessTable) -> Verdict:
    """Two regions: valid iff at least one component is constant."""
    if w.n_regions != 2:
        raise ShapeMismatchError(f"expected 2 regions, got {w.n_regions}")
    if w.is_constant(0) or w.is_constant(1):
        return Verdict(True, "direct")
    return Verdict(False, "direct", pair_witness(w, 0, 1, {}))


def _direct(w: ProcessTable, method: str) -> Verdict:
    v = check_single_region(w) if w.n_regions == 1 else check_bipartite(w)
    return Verdict(v.valid, method, v.witness)


# -- deciders -----------------------------------------------------------------

def _operation_tables(shape: ProcessShape):
    return [np.array(operations_for(a, x), dtype=np.int64).reshape(x ** a, a)
            for a, x in zip(shape.in_sizes, shape.out_sizes)]


def _tuple_outputs(shape: ProcessShape, op_tables, start: int, stop: int) -> np.ndarray:
    """Output rank f(a) for operation tuples ``start..stop`` and every input rank a."""
    a_grid = np.stack(np.unravel_index(np.arange(shape.input_count), shape.in_sizes), axis=1)
    t = np.arange(start, stop)
    digits = np.unravel_index(t, [len(tab) for tab in op_tables])
    xr = np.zeros((len(t), shape.input_count), dtype=np.int64)
    for i, tab in enumerate(op_tables):
        xr = xr * shape.out_sizes[i] + tab[digits[i]][:, a_grid[:, i]]
    return xr


def _loop_table(w: ProcessTable) -> np.ndarray:
    """Input rank w(x) for every output rank x."""
    dense = DenseFunction.from_process(w)
    return np.ravel_multi_index(tuple(dense.values.T), w.shape.in_sizes)


def brute_force_validate(w: ProcessTable, bound: int | None = None) -> Verdict:
    """Check the unique-fixed-point law directly over every operation tuple.

    Operation tuples are visited lexicographically (region 0's table first),
    so the witness is the first failing tuple in that order.
    """
    shape = w.shape
    bound = brute_bound() if bound is None else bound
    total = operation_tuple_count(shape)
    if total > bound:
        raise SearchSpaceTooLarge(
            f"{total} operation tuples exceed the brute-force bound {bound}; use pairwise_validate"
        )
    loop = _loop_table(w)
    op_tables = _operation_tables(shape)
    ident = np.arange(shape.input_count)
    chunk = max(1, (1 << 20) // shape.input_count)
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        xr = _tuple_outputs(shape, op_tables, start, stop)
        counts = (loop[xr] == ident).sum(axis=1)
        bad = np.flatnonzero(counts != 1)
        if len(bad):
            t = start + int(bad[0])
            digits = np.unravel_index(t, [len(tab) for tab in op_tables])
            ops = tuple(tuple(int(v) for v in tab[d]) for tab, d in zip(op_tables, digits))
            return Verdict(False, "brute", Witness(ops, tuple(fixed_points(w, ops))))
    return Verdict(True, "brute")


def pairwise_validate(w: ProcessTable) -> Verdict:
    """Every pair, with all other outputs frozen, must signal at most one way."""
    shape = w.shape
    n = shape.n_regions
    if n <= 2:
        return _direct(w, "pairwise")
    for l in range(n):
        for j in range(l + 1, n):
            rest = [k for k in range(n) if k not in (l, j)]
            for values in all_tuples([shape.out_sizes[k] for k in rest]):
                freeze = dict(zip(rest, values))
                r_l, r_j = restrictions(w, l, j, freeze)
                if not _is_constant(r_l) and not _is_constant(r_j):
                    return Verdict(False, "pairwise", pair_witness(w, l, j, freeze))
    return Verdict(True, "pairwise")


def _recursive_failure(w: ProcessTable, labels: tuple[int, ...], frozen: dict[int, int]):
    n = w.n_regions
    if n == 1:
        return None
    if n == 2:
        if w.is_constant(0) or w.is_constant(1):
            return None
        return labels[0], labels[1], frozen
    for i in range(n):
        for v in range(w.shape.out_sizes[i]):
            sub = output_reduce(w, i, v).process
            found = _recursive_failure(
                sub, labels[:i] + labels[i + 1:], {**frozen, labels[i]: v})
            if found:
                return found
    return None


def recursive_validate(w: ProcessTable) -> Verdict:
    """Valid iff freezing any single output leaves a valid process on the rest."""
    if w.n_regions <= 2:
        return _direct(w, "recursive")
    found = _recursive_failure(w, tuple(range(w.n_regions)), {})
    if found is None:
        return Verdict(True, "recursive")
    l, j, frozen = found
    return Verdict(False, "recursive", pair_witness(w, l, j, frozen))


def _reduction_failure(w: ProcessTable, applied: tuple) -> tuple | None:
    """Operations wired into region 0 at each level until something breaks."""
    if w.n_regions == 1:
        return None
    shape = w.shape
    for op in operations_for(shape.in_sizes[0], shape.out_sizes[0]):
        try:
            sub = operation_reduce(w, 0, op).process
        except OwnOutputDependenceError:
            return applied + (op,)
        found = _reduction_failure(sub, applied + (op,))
        if found is not None:
            return found
    return None


def _witness_from_wired(w: ProcessTable, wired: tuple) -> Witness:
    """Extend operations wired into regions 0, 1, ... to a full failing tuple."""
    shape = w.shape
    rest = range(len(wired), shape.n_regions)
    for tail in itertools.product(*(operations_for(shape.in_sizes[k], shape.out_sizes[k]) for k in rest)):
        ops = check_operations(shape, wired + tail)
        fps = fixed_points(w, ops)
        if len(fps) != 1:
            return Witness(ops, tuple(fps))
    raise AssertionError("reduction failure without a failing operation tuple")


def reduction_validate(w: ProcessTable) -> Verdict:
    """Exact: valid iff wiring any operation into region 0 leaves a valid process.

    A reduction that lets a region read its own output is never valid.
    """
    if w.n_regions == 1:
        return _direct(w, "reduction")
    found = _reduction_failure(w, ())
    if found is None:
        return Verdict(True, "reduction")
    return Verdict(False, "reduction", _witness_from_wired(w, found))


def validate(w: ProcessTable, method: str = "reduction") -> Verdict:
    try:
        fn = {"brute": brute_force_validate, "pairwise": pairwise_validate,
              "recursive": recursive_validate, "reduction": reduction_validate}[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    return fn(w)


def is_valid(w: ProcessTable) -> bool:
    return reduction_validate(w).valid


def witness_is_violation(w: ProcessTable, witness: Witness) -> bool:
    """Re-check a witness by direct evaluation of the loop map."""
    return len(fixed_points(w, witness.operations)) != 1


# -- packed batch oracle ------------------------------------------------------

def brute_force_valid_codes(shape: ProcessShape, codes, batch: int = 2048) -> np.ndarray:
    """Brute-force validity of many packed binary tables at once."""
    if not shape.is_binary:
        raise ShapeMismatchError("packed codes exist only for binary shapes")
    n = shape.n_regions
    m = 1 << (n - 1)
    nbits = n * m
    if nbits > 63:
        raise ShapeMismatchError("packed batch validation supports at most 63 table bits")
    total = operation_tuple_count(shape)
    if total > brute_bound():
        raise SearchSpaceTooLarge(f"{total} operation tuples exceed the brute-force bound")
    codes = np.asarray(codes, dtype=np.uint64)
    shift = _packed_shifts(shape)
    xr = _tuple_outputs(shape, _operation_tables(shape), 0, total)
    ident = np.arange(shape.input_count)
    weights = np.array([1 << (n - 1 - i) for i in range(n)], dtype=np.uint64)
    out = np.empty(len(codes), dtype=bool)
    for start in range(0, len(codes), batch):
        c = codes[start:start + batch]
        bits = (c[:, None, None] >> shift[None]) & np.uint64(1)
        loop = (bits * weights).sum(axis=2).astype(np.int64)
        counts = (loop[:, xr] == ident).sum(axis=2)
        out[start:start + batch] = np.all(counts == 1, axis=1)
    return out


def _packed_shifts(shape: ProcessShape) -> np.ndarray:
    """shift[x, i]: bit offset, counted from the low end, of w_i at output rank x."""
    n = shape.n_regions
    m = 1 << (n - 1)
    nbits = n * m
    x_grid = np.stack(np.unravel_index(np.arange(shape.output_count), shape.out_sizes), axis=1)
    shift = np.zeros((shape.output_count, n), dtype=np.uint64)
    for i in range(n):
        others = list(shape.others(i))
        r = np.ravel_multi_index(tuple(x_grid[:, others].T), (2,) * (n - 1)) if others else 0
        shift[:, i] = nbits - 1 - (i * m + r)
    return shift


@lru_cache(maxsize=None)
def _valid_table(n: int) -> np.ndarray:
    """Exact validity of every packed binary table on ``n`` <= 3 regions."""
    if n == 1:
        return np.ones(2, dtype=bool)
    shape = ProcessShape.binary(n)
    codes = np.arange(1 << (n << (n - 1)), dtype=np.uint64)
    table = brute_force_valid_codes(shape, codes)
    table.setflags(write=False)
    return table


def reduction_valid_codes(shape: ProcessShape, codes, batch: int = 1 << 16) -> np.ndarray:
    """Exact validity of packed binary tables via one level of operation wiring.

    Each table is reduced by the four binary operations of region 0; the
    reduced three-or-fewer-region tables are looked up in a brute-force table.
    """
    if not shape.is_binary or shape.n_regions > 4:
        raise ShapeMismatchError("packed reduction supports binary shapes with at most 4 regions")
    codes = np.asarray(codes, dtype=np.uint64)
    n = shape.n_regions
    if n == 1:
        return np.ones(len(codes), dtype=bool)
    sub_valid = _valid_table(n - 1)
    shift = _packed_shifts(shape)
    half = 1 << (n - 1)
    sub_m = 1 << (n - 2)
    rest_rank = np.arange(half)
    out = np.empty(len(codes), dtype=bool)
    for start in range(0, len(codes), batch):
        c = codes[start:start + batch]
        dense = ((c[:, None, None] >> shift[None]) & np.uint64(1)).astype(np.int64)
        ok = np.ones(len(c), dtype=bool)
        for op in ((0, 0), (1, 1), (0, 1), (1, 0)):
            a0 = dense[:, rest_rank, 0]
            x0 = np.asarray(op)[a0]
            reduced = dense[np.arange(len(c))[:, None], x0 * half + rest_rank[None, :]]
            sub_code = np.zeros(len(c), dtype=np.int64)
            for j in range(1, n):
                weight = 1 << (n - 1 - j)
                idx0 = rest_rank[(rest_rank & weight) == 0]
                lo = reduced[:, idx0, j]
                hi = reduced[:, idx0 + weight, j]
                ok &= np.all(lo == hi, axis=1)
                for bit in range(sub_m):
                    sub_code = (sub_code << 1) | lo[:, bit]
            ok &= sub_valid[sub_code]
        out[start:start + batch] = ok
    return out
