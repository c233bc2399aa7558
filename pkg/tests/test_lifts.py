import pytest

from app.services.bitsets import mask_of
from app.services.lifts import (
    LinearClass,
    LinearClassError,
    StarConditionError,
    brylawski,
    brylawski_formula,
    elementary_lift_class,
    enumerate_perfect,
    free_N,
    fundamental_circuits,
    independence_by_collections,
    is_linear_class,
    is_perfect,
    lift,
    lift_report,
    pairs_graphic_N,
    rank3_N,
    satisfies_star,
    uniform_N,
    zero_N,
)
from app.services.matroids import (
    MatroidError,
    circuits,
    complete_graph_edges,
    equal_matroids,
    free,
    graphic,
    isomorphic,
    materialize,
    uniform,
)


def test_complete_graph_on_pairs_lifts_to_free():
    for n in (3, 4, 5):
        base = uniform(1, n)
        lifted = lift(base, pairs_graphic_N(circuits(base)))
        assert lifted.r == n
        assert isomorphic(lifted, free(n)) is not None


def test_free_N_on_u13_violates_star_with_canonical_witness():
    base = uniform(1, 3)
    verdict = satisfies_star(base, free_N(circuits(base)))
    assert not verdict.passed
    assert verdict.witness["collection"] == [[0, 1], [0, 2]]
    assert verdict.witness["circuit"] == [1, 2]
    assert verdict.witness["circuit_index"] == 2
    with pytest.raises(StarConditionError):
        lift(base, free_N(circuits(base)))


def test_zero_N_gives_back_M():
    base = graphic(complete_graph_edges(4))
    lifted = lift(base, zero_N(circuits(base)))
    assert equal_matroids(lifted, base).passed


def test_perfect_collections_of_u13():
    family = circuits(uniform(1, 3))
    perfect = enumerate_perfect(family)
    assert [p.members for p in perfect] == [0, 1, 2, 3, 4, 5, 6]
    assert not is_perfect(family, 0b111)
    assert perfect[3].as_lists() == [[0, 1], [0, 2]]


def test_fundamental_circuits_are_perfect():
    base = graphic(complete_graph_edges(4))
    collection = fundamental_circuits(base, mask_of([0, 1, 2]))
    assert len(collection) == base.corank
    assert is_perfect(collection.family, collection.members)
    with pytest.raises(MatroidError):
        fundamental_circuits(base, mask_of([0, 1]))


def test_uniform_rank_two_N_on_u24_gives_free():
    base = uniform(2, 4)
    lifted = lift(base, uniform_N(circuits(base), 2))
    assert equal_matroids(lifted, free(4)).passed


@pytest.mark.parametrize(
    "base,builder",
    [
        (uniform(1, 4), rank3_N),
        (uniform(2, 5), rank3_N),
        (uniform(1, 4), lambda m: pairs_graphic_N(circuits(m))),
        (graphic(complete_graph_edges(4)), lambda m: uniform_N(circuits(m), 2)),
    ],
)
def test_lift_report_passes(base, builder):
    space = builder(base)
    assert satisfies_star(base, space).passed
    verdicts = lift_report(base, space)
    assert [v.check for v in verdicts] == [
        "rank_axioms",
        "rank_sum",
        "quotient",
        "independence_characterization",
        "loops_are_kept_circuits",
        "circuits_are_unions",
    ]
    assert all(v.passed for v in verdicts)


def test_rank3_needs_corank_three():
    with pytest.raises(MatroidError, match="corank"):
        rank3_N(uniform(1, 3))


def test_rank3_on_u14_lifts_to_free():
    base = uniform(1, 4)
    space = rank3_N(base)
    assert space.r == 3
    assert equal_matroids(lift(base, space), free(4)).passed


def test_linear_class_checks():
    family = circuits(uniform(2, 4))
    verdict = is_linear_class(family, 0b0011)
    assert not verdict.passed
    assert verdict.witness == {"c1": [0, 1, 2], "c2": [0, 1, 3], "c": [0, 2, 3]}
    assert is_linear_class(family, 0b1111).passed
    assert is_linear_class(family, 0b0001).passed
    with pytest.raises(LinearClassError):
        brylawski(uniform(2, 4), LinearClass(family, 0b0011))


def test_brylawski_matches_formula():
    base = graphic(complete_graph_edges(4))
    family = circuits(base)
    avoiding = mask_of(i for i, c in enumerate(family) if not c & 1)
    for members in (0, family.full, avoiding):
        linear_class = LinearClass(family, members)
        lifted = materialize(brylawski(base, linear_class))
        assert all(
            lifted.rank(X) == brylawski_formula(base, linear_class, X) for X in range(1 << base.size)
        )
        assert elementary_lift_class(base, lifted, family) == members


def test_empty_class_on_u24_is_u34():
    base = uniform(2, 4)
    lifted = brylawski(base, LinearClass(circuits(base), 0))
    assert equal_matroids(lifted, uniform(3, 4)).passed


def test_independence_by_collections():
    base = uniform(1, 4)
    space = pairs_graphic_N(circuits(base))
    lifted = materialize(lift(base, space))
    for X in range(1 << base.size):
        assert independence_by_collections(base, space, X) == lifted.is_independent(X)
