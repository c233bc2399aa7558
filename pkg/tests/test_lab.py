import numpy as np
import pytest

from app.services.lab import (
    PUBLISHED_COUNTS,
    catalog_counts,
    witness_search,
    intermediate_lift_family,
    hyperplane_family_check,
    enumerate_matroids,
    independence_verdict,
    intermediate_matroids,
)
from app.services.matroids import (
    CapacityError,
    MatroidError,
    complete_graph_edges,
    free,
    graphic,
    isomorphic,
    uniform,
)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_catalog_matches_published_counts(m):
    assert sum(catalog_counts(m).values()) == PUBLISHED_COUNTS[m]


def test_catalog_by_rank():
    assert catalog_counts(3) == {0: 1, 1: 7, 2: 7, 3: 1}


def test_free_family_on_u14_is_confirmed():
    report = intermediate_lift_family(uniform(1, 4), free(4))
    assert report.status == "CONFIRMED"
    assert report.is_matroid.passed
    assert report.star.passed
    assert report.n_rank == 3
    assert report.isomorphic


def test_witness_search_on_u13():
    report = witness_search(uniform(1, 3), free(3))
    assert report.status == "CONFIRMED"
    assert report.n_rank == 2
    witness = enumerate_matroids(3, 2)[report.witnesses[0]["candidate"]]
    assert isomorphic(witness, graphic(complete_graph_edges(3))) is not None


def test_witness_search_is_bounded():
    with pytest.raises(CapacityError):
        witness_search(uniform(2, 5), free(5))


def test_hyperplane_form_through_duality():
    report = hyperplane_family_check(uniform(2, 3), uniform(1, 3))
    assert report.conjecture == "dual-c82"
    assert report.status == "CONFIRMED"
    assert report.witnesses[-1] == {"check": "direct_hyperplane_family", "passed": True}


def test_independence_verdict_reports_hereditary_witness():
    verdict = independence_verdict(np.array([True, False, True, True]), 2)
    assert not verdict.passed
    assert verdict.witness == {"axiom": "hereditary", "member": [0, 1], "missing": [0]}


def test_intermediate_matroids():
    assert len(intermediate_matroids(free(3), uniform(1, 3))) == 6
    with pytest.raises(MatroidError):
        intermediate_matroids(uniform(1, 3), free(3))
