import numpy as np
import pytest

from app.services.bitsets import mask_of
from app.services.matroids import (
    CapacityError,
    ExplicitMatroid,
    MatroidError,
    check_rank_axioms,
    circuits,
    closure,
    complete_graph_edges,
    dual,
    equal_matroids,
    explicit,
    free,
    graphic,
    is_lift_of,
    is_quotient,
    isomorphic,
    materialize,
    rank_zero,
    restrict,
    summarize,
    table_hash,
    truncate,
    uniform,
    verify_rank_axioms,
)


def test_uniform_ranks_and_circuits():
    m = uniform(2, 4)
    assert m.r == 2
    assert m.corank == 2
    assert m.rank(mask_of([0, 1, 2])) == 2
    assert m.is_independent(mask_of([1, 3]))
    assert circuits(m).as_lists() == [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]


def test_uniform_rejects_rank_above_size():
    with pytest.raises(MatroidError, match="r > n"):
        uniform(5, 3)


def test_graphic_multigraph_has_parallel_circuit():
    m = graphic([(1, 2), (1, 2), (1, 3)])
    assert m.r == 2
    assert circuits(m).as_lists() == [[0, 1]]
    assert m.is_circuit(mask_of([0, 1]))


def test_complete_graph_k4():
    m = graphic(complete_graph_edges(4))
    assert m.size == 6
    assert m.r == 3
    family = circuits(m)
    assert len(family) == 7
    assert sorted(len(c) for c in family.as_lists()) == [3, 3, 3, 3, 4, 4, 4]


def test_dual_truncate_restrict():
    assert equal_matroids(dual(uniform(2, 4)), uniform(2, 4)).passed
    assert equal_matroids(dual(free(3)), rank_zero(3)).passed
    assert equal_matroids(truncate(free(3), 1), uniform(2, 3)).passed
    with pytest.raises(MatroidError):
        truncate(uniform(1, 3), 2)
    part = restrict(uniform(2, 4), mask_of([1, 2, 3]))
    assert part.elements == [1, 2, 3]
    assert equal_matroids(part, uniform(2, 3)).passed


def test_closure():
    m = uniform(2, 4)
    assert closure(m, 0b0001) == 0b0001
    assert closure(m, 0b0011) == 0b1111


def test_check_rank_axioms_reports_unit_increase():
    bad = ExplicitMatroid(2, np.array([0, 1, 1, 3]))
    verdict = check_rank_axioms(bad)
    assert not verdict.passed
    assert verdict.witness["axiom"] == "unit_increase"
    assert check_rank_axioms(materialize(uniform(2, 5))).passed


@pytest.mark.parametrize(
    "table, axiom",
    [
        ([1, 1, 1, 2], "normalization"),
        ([0, 0, 0, 1], "submodularity"),
    ],
)
def test_check_rank_axioms_reports_failures(table, axiom):
    verdict = check_rank_axioms(ExplicitMatroid(2, np.array(table)))
    assert not verdict.passed
    assert verdict.witness["axiom"] == axiom
    assert not verify_rank_axioms(ExplicitMatroid(2, np.array(table))).passed


def test_verify_rank_axioms_samples_large_ground():
    verdict = verify_rank_axioms(uniform(3, 14))
    assert verdict.passed
    assert "sampled" in verdict.detail


def test_explicit_rejects_exchange_violation():
    with pytest.raises(MatroidError, match="exchange"):
        explicit(4, [[0, 1], [2, 3]])
    m = explicit(3, [[0, 1], [0, 2], [1, 2]])
    assert equal_matroids(m, uniform(2, 3)).passed


def test_quotient_and_lift():
    assert is_quotient(uniform(1, 3), free(3)).passed
    assert is_lift_of(free(3), uniform(1, 3)).passed
    verdict = is_quotient(free(3), uniform(1, 3))
    assert not verdict.passed
    assert verdict.check == "quotient"


def test_isomorphism():
    perm = isomorphic(uniform(2, 3), graphic(complete_graph_edges(3)))
    assert perm is not None
    assert sorted(perm) == [0, 1, 2]
    assert isomorphic(uniform(1, 3), uniform(2, 3)) is None


def test_capacity_is_enforced():
    with pytest.raises(CapacityError):
        circuits(free(25))


def test_summary_is_deterministic():
    first = summarize(uniform(2, 4))
    second = summarize(uniform(2, 4))
    assert first == second
    assert first.table_hash == table_hash(uniform(2, 4))
    assert first.rank == 2
