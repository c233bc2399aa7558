import pytest

from app.services.lifts import StarConditionError
from app.services.matroids import (
    complete_graph_edges,
    equal_matroids,
    graphic,
    uniform,
)
from app.services.projections import (
    crapo,
    crapo_formula,
    dual_star_equivalence,
    duality_bridge,
    hyperplanes,
    is_linear_subclass,
    is_perfect_hyperplanes,
    project,
    projection_report,
    satisfies_dual_star,
    subclass_through,
    uniform_hyperplane_N,
)
from app.specs import parse_spec


def test_hyperplanes_of_u24_are_points():
    family = hyperplanes(uniform(2, 4))
    assert family.as_lists() == [[0], [1], [2], [3]]
    assert len(family.cocircuits) == 4


def test_projection_by_rank_one_uniform():
    base = uniform(2, 4)
    space = uniform_hyperplane_N(hyperplanes(base), 1)
    assert satisfies_dual_star(base, space).passed
    assert equal_matroids(project(base, space), uniform(1, 4)).passed
    assert all(v.passed for v in projection_report(base, space))
    assert duality_bridge(base, space).passed
    assert dual_star_equivalence(base, space).passed


def test_dual_star_failure_has_witness():
    base = uniform(2, 3)
    family = hyperplanes(base)
    space = uniform_hyperplane_N(family, 3)
    assert is_perfect_hyperplanes(family, 0b011)
    verdict = satisfies_dual_star(base, space)
    assert not verdict.passed
    assert verdict.witness["collection"] == [[0], [1]]
    assert verdict.witness["hyperplane"] == [2]
    assert verdict.witness["hyperplane_index"] == 2
    assert dual_star_equivalence(base, space).passed
    with pytest.raises(StarConditionError):
        project(base, space)


@pytest.mark.parametrize("base", [graphic(complete_graph_edges(4)), uniform(2, 5)])
def test_crapo_matches_formula(base):
    family = hyperplanes(base)
    members = subclass_through(family, 0)
    assert is_linear_subclass(family, members).passed
    projected = crapo(base, family, members)
    for X in range(1 << base.size):
        assert projected.rank(X) == crapo_formula(base, family, members, X)


def test_crapo_trivial_subclasses():
    base = graphic(complete_graph_edges(4))
    family = hyperplanes(base)
    kept = crapo(base, family, family.full)
    truncated = crapo(base, family, 0)
    assert kept.r == base.r
    assert truncated.r == base.r - 1
    for X in range(1 << base.size):
        assert kept.rank(X) == base.rank(X) == crapo_formula(base, family, family.full, X)
        assert truncated.rank(X) == crapo_formula(base, family, 0, X)
    assert crapo_formula(base, family, family.full, 0) == 0


def test_hyperplanes_of_a_parsed_spec():
    base = parse_spec("uniform r=3 n=4")
    assert len(hyperplanes(base)) == 6
