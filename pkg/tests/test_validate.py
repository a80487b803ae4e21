import itertools

import numpy as np
import pytest

import oracle
from procfn.catalog import asymmetric_four, causal_chain, copy_cycle_three, cyclic_four, cyclic_three, two_way_pair
from procfn.core import (DenseFunction, OwnOutputDependenceError, ProcessShape, ProcessTable,
                         ShapeMismatchError, all_tuples, binary_operation, fixed_points, loop_map,
                         operations_for)
from procfn.equivalence import PackedGroup
from procfn.validate import (SearchSpaceTooLarge, brute_force_valid_codes, brute_force_validate,
                             check_bipartite, check_single_region, freeze_outputs, operation_reduce,
                             output_reduce, pair_witness, pairwise_validate, recursive_validate,
                             reduction_valid_codes, reduction_validate, validate, witness_is_violation)

ID, NOT, C0, C1 = (binary_operation(k) for k in ("id", "not", "const0", "const1"))
B1, B2, B3 = (ProcessShape.binary(n) for n in (1, 2, 3))
ALL3 = [ProcessTable.from_code(B3, c) for c in range(4096)]


def pair(w1, w2):
    return ProcessTable(B2, (w1, w2))


def cyclic_four_with_parity():
    """cyclic_four with a3 replaced by x4 + x2 (mod 2)."""
    w = cyclic_four()
    comps = list(w.components)
    comps[2] = ProcessTable.from_callables(ProcessShape.binary(4), [
        lambda x: 0, lambda x: 0, lambda x: x[3] ^ x[1], lambda x: 0]).components[2]
    return ProcessTable(w.shape, tuple(comps))


# -- direct characterisations --------------------------------------------------

def test_single_region():
    assert check_single_region(ProcessTable(B1, ((0,),))).valid
    assert check_single_region(ProcessTable(B1, ((1,),))).valid
    with pytest.raises(ShapeMismatchError):
        check_single_region(cyclic_three())


def test_bipartite_examples():
    assert check_bipartite(pair((0, 0), (0, 1))).valid
    assert check_bipartite(pair((1, 1), (0, 0))).valid
    bad = check_bipartite(two_way_pair())
    assert not bad.valid and witness_is_violation(two_way_pair(), bad.witness)
    with pytest.raises(ShapeMismatchError):
        check_bipartite(cyclic_three())


def test_bipartite_rule_matches_oracle():
    for code in range(16):
        assert check_bipartite(ProcessTable.from_code(B2, code)).valid == oracle.is_valid(code, 2)


# -- reductions -----------------------------------------------------------------

def test_output_reduce_cyclic_four():
    w = cyclic_four()
    r = output_reduce(output_reduce(w, 0, 0).process, 0, 0)
    assert r.process.components == ((0, 0), (0, 1))
    r = output_reduce(output_reduce(w, 0, 1).process, 0, 0)
    assert r.process.components == ((0, 0), (0, 0))
    assert output_reduce(w, 1, 0).kept == (0, 2, 3)


def test_freezing_commutes():
    rng = np.random.default_rng(2)
    shape = ProcessShape.binary(4)
    for code in rng.integers(0, 2 ** 32, 30, dtype=np.uint64):
        w = ProcessTable.from_code(shape, int(code))
        for i, j in itertools.permutations(range(4), 2):
            for v, u in itertools.product((0, 1), repeat=2):
                one = output_reduce(output_reduce(w, i, v).process, j - (j > i), u).process
                two = output_reduce(output_reduce(w, j, u).process, i - (i > j), v).process
                assert one == two == freeze_outputs(w, {i: v, j: u})


def test_output_reduce_range():
    with pytest.raises(Exception):
        output_reduce(cyclic_four(), 4, 0)
    with pytest.raises(Exception):
        output_reduce(cyclic_four(), 0, 2)


def test_operation_reduce_cyclic_four_constant():
    r = operation_reduce(cyclic_four(), 0, C0)
    expected = ProcessTable.from_callables(B3, [
        lambda x: 0,                          # a2 with x1 = 0
        lambda x: x[0] * (1 - x[2]),          # a3 = x2 (x4 + 1)
        lambda x: x[1] * (1 - x[0]),          # a4 = x3 (x2 + 1)
    ])
    assert r.process == expected
    assert r.removed == 0 and r.kept == (1, 2, 3) and r.operation == C0


def test_operation_reduce_tripartite_example():
    r = operation_reduce(cyclic_three(), 2, C0).process
    assert r.components == ((0, 0), (0, 1))
    assert check_bipartite(r).valid


def test_operation_reduce_matches_definition():
    """Entrywise: w^{f_i}_j(x) = w_j(x, f_i(w_i(x)))."""
    rng = np.random.default_rng(3)
    shape = ProcessShape.binary(4)
    for code in rng.integers(0, 2 ** 32, 40, dtype=np.uint64):
        w = ProcessTable.from_code(shape, int(code))
        for i in range(4):
            for op in operations_for(2, 2):
                try:
                    r = operation_reduce(w, i, op).process
                except OwnOutputDependenceError:
                    continue
                for rest in all_tuples((2, 2, 2)):
                    x = list(rest[:i]) + [0] + list(rest[i:])
                    x[i] = op[w.component(i, x)]
                    expected = [w.component(j, x) for j in range(4) if j != i]
                    got = [r.component(k, rest) for k in range(3)]
                    assert got == expected


def test_operation_reduce_reports_own_output_dependence():
    with pytest.raises(OwnOutputDependenceError):
        operation_reduce(ProcessTable(B3, ((0, 0, 1, 1), (0, 0, 1, 1), (0, 0, 0, 0))), 0, ID)


def test_reduction_commutation_sampled():
    rng = np.random.default_rng(4)
    shape = ProcessShape.binary(4)
    for code in rng.integers(0, 2 ** 32, 300, dtype=np.uint64):
        d = DenseFunction.from_process(ProcessTable.from_code(shape, int(code)))
        for op in operations_for(2, 2):
            wired = d.compose(0, op)
            for i in (1, 2, 3):
                for v in (0, 1):
                    assert d.freeze(i, v).compose(0, op) == wired.freeze(i - 1, v)


# -- brute force ----------------------------------------------------------------

def test_brute_force_named_examples():
    for w in (cyclic_four(), asymmetric_four()):
        v = brute_force_validate(w)
        assert v.valid and v.witness is None and v.method == "brute"


def test_brute_force_two_way_witness():
    v = brute_force_validate(two_way_pair())
    assert not v.valid
    assert v.witness.operations == (ID, ID) or witness_is_violation(two_way_pair(), v.witness)
    assert v.witness.fixed_points == tuple(fixed_points(two_way_pair(), v.witness.operations))


def test_brute_force_witness_is_lexicographically_first():
    w = two_way_pair()
    first = next(ops for ops in itertools.product(operations_for(2, 2), repeat=2)
                 if len(fixed_points(w, ops)) != 1)
    assert brute_force_validate(w).witness.operations == first


def test_brute_force_refuses_large_spaces(monkeypatch):
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_validate(cyclic_four(), bound=100)
    monkeypatch.setenv("PFN_BRUTE_BOUND", "10")
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_validate(cyclic_three())


def test_brute_force_non_binary():
    shape = ProcessShape((3, 2), (2, 3))
    ok = ProcessTable(shape, ((1, 1, 1), (0, 1)))
    bad = ProcessTable(shape, ((0, 1, 1), (0, 1)))
    assert brute_force_validate(ok).valid
    v = brute_force_validate(bad)
    assert not v.valid and witness_is_violation(bad, v.witness)
    assert reduction_validate(ok).valid and not reduction_validate(bad).valid


# -- pairwise and recursive -----------------------------------------------------

def test_pairwise_named_examples():
    assert pairwise_validate(cyclic_four()).valid
    assert pairwise_validate(asymmetric_four()).valid
    assert pairwise_validate(cyclic_three()).valid


def test_pairwise_cyclic_four_with_parity():
    w = cyclic_four_with_parity()
    v = pairwise_validate(w)
    assert not v.valid
    assert witness_is_violation(w, v.witness)
    # pairs are scanned in lexicographic order: regions 2, 3 fail before 3, 4
    assert v.witness.pair == (1, 2)
    assert v.witness.freeze == ((0, 1), (3, 0))
    # the violation built into regions 3, 4 with x1 = x2 = 0 is also present
    constructed = pair_witness(w, 2, 3, {0: 0, 1: 0})
    assert witness_is_violation(w, constructed)
    assert not brute_force_validate(w).valid


def test_recursive_examples():
    assert recursive_validate(cyclic_four()).valid
    assert recursive_validate(causal_chain()).valid
    assert not recursive_validate(two_way_pair()).valid
    v = recursive_validate(cyclic_four_with_parity())
    assert not v.valid and witness_is_violation(cyclic_four_with_parity(), v.witness)


def test_small_methods_delegate():
    for method in ("pairwise", "recursive", "reduction"):
        assert validate(ProcessTable(B1, ((1,),)), method).method == method
        assert not validate(two_way_pair(), method).valid
    with pytest.raises(ValueError):
        validate(cyclic_three(), "guess")


# -- cross-oracle sweeps ----------------------------------------------------------

def test_exact_deciders_match_oracle_n2():
    for code in range(16):
        w = ProcessTable.from_code(B2, code)
        expected = oracle.is_valid(code, 2)
        for method in ("brute", "pairwise", "recursive", "reduction"):
            assert validate(w, method).valid == expected


def test_exact_deciders_match_oracle_n3(oracle_valid3):
    brute = brute_force_valid_codes(B3, np.arange(4096))
    assert set(np.flatnonzero(brute).tolist()) == oracle_valid3
    reduction = reduction_valid_codes(B3, np.arange(4096))
    assert set(np.flatnonzero(reduction).tolist()) == oracle_valid3
    for w in ALL3:
        assert reduction_validate(w).valid == (w.to_code() in oracle_valid3)


def test_per_table_brute_matches_oracle_sample(oracle_valid3):
    for w in ALL3[::7]:
        assert brute_force_validate(w).valid == (w.to_code() in oracle_valid3)


def test_pairwise_and_recursive_are_necessary_not_sufficient(oracle_valid3):
    """Both accept every valid table, and additionally exactly the copy-cycle class."""
    pair_ok = {w.to_code() for w in ALL3 if pairwise_validate(w).valid}
    rec_ok = {w.to_code() for w in ALL3 if recursive_validate(w).valid}
    assert pair_ok == rec_ok
    assert oracle_valid3 <= pair_ok
    extra = pair_ok - oracle_valid3
    cycle_orbit = set(PackedGroup.for_shape(B3).images(copy_cycle_three().to_code()).tolist())
    assert extra == cycle_orbit
    assert len(extra) == 16


def test_copy_cycle_counterexample():
    w = copy_cycle_three()
    assert pairwise_validate(w).valid and recursive_validate(w).valid
    assert len(fixed_points(w, (ID, ID, ID))) == 2
    assert len(fixed_points(w, (NOT, NOT, NOT))) == 0
    v = reduction_validate(w)
    assert not v.valid and witness_is_violation(w, v.witness)


def test_reduction_valid_codes_n4_sample():
    rng = np.random.default_rng(5)
    shape = ProcessShape.binary(4)
    codes = rng.integers(0, 2 ** 32, 3000, dtype=np.uint64)
    # bias towards valid tables: clear most bits
    codes &= rng.integers(0, 2 ** 32, 3000, dtype=np.uint64) & rng.integers(0, 2 ** 32, 3000, dtype=np.uint64)
    exact = reduction_valid_codes(shape, codes)
    assert np.array_equal(exact, brute_force_valid_codes(shape, codes))
    assert exact.any() and not exact.all()
    for code, ok in list(zip(codes.tolist(), exact.tolist()))[:200]:
        assert reduction_validate(ProcessTable.from_code(shape, code)).valid == ok


def test_witness_soundness_n3():
    for w in ALL3[::5]:
        for method in ("brute", "pairwise", "recursive", "reduction"):
            v = validate(w, method)
            assert (v.witness is None) == v.valid
            if not v.valid:
                assert witness_is_violation(w, v.witness)


# -- wiring one region -----------------------------------------------------------------

def _reduces_validly(w, i):
    for op in operations_for(2, 2):
        try:
            r = operation_reduce(w, i, op).process
        except OwnOutputDependenceError:
            return False
        if not check_bipartite(r).valid:
            return False
    return True


def test_valid_processes_reduce_to_valid(oracle_valid3):
    for code in sorted(oracle_valid3):
        w = ALL3[code]
        for i in range(3):
            assert _reduces_validly(w, i)


def test_valid_reductions_over_one_region_imply_validity(oracle_valid3):
    for w in ALL3:
        for i in range(3):
            if _reduces_validly(w, i):
                assert w.to_code() in oracle_valid3


def test_unique_fixed_point_is_consistent_history():
    w = cyclic_four()
    for ops in itertools.product(operations_for(2, 2), repeat=4):
        (a,) = fixed_points(w, ops)
        assert loop_map(w, ops, a) == a
