import pytest

from app.services.derived import (
    derived_matroid,
    lift_by_derived,
    representable_rank_k_N,
    representation_from_matrix,
)
from app.services.fields import FieldMatrix, galois_field
from app.services.lifts import lift, satisfies_star
from app.services.matroids import (
    MatroidError,
    complete_graph_edges,
    equal_matroids,
    free,
    graphic,
    isomorphic,
    uniform,
)


def _rep(p, k, rows, name="rep"):
    return representation_from_matrix(FieldMatrix.from_rows(galois_field(p, k), rows), name=name)


def test_derived_of_parallel_class_is_a_triangle():
    derived = derived_matroid(_rep(2, 1, [[1, 1, 1]]))
    assert derived.vectors == ((1, 1, 0), (1, 0, 1), (0, 1, 1))
    assert derived.matroid.r == 2
    assert isomorphic(derived.matroid, graphic(complete_graph_edges(3))) is not None


@pytest.mark.parametrize(
    "p,k,rows",
    [
        (2, 1, [[1, 0, 1, 1], [0, 1, 1, 0]]),
        (3, 1, [[1, 0, 1, 1], [0, 1, 1, 2]]),
        (2, 2, [[1, 0, 1, 2], [0, 1, 3, 1]]),
    ],
)
def test_derived_rank_is_corank_and_lift_is_free(p, k, rows):
    rep = _rep(p, k, rows)
    derived = derived_matroid(rep)
    assert derived.matroid.r == rep.matroid.corank
    lifted = lift_by_derived(rep)
    assert equal_matroids(lifted, free(rep.matroid.size)).passed


def test_truncated_derived_matroids():
    rep = _rep(3, 1, [[1, 1, 1, 1]])
    assert rep.matroid.corank == 3
    for k in (1, 2, 3):
        space = representable_rank_k_N(rep, k)
        assert space.r == k
        assert satisfies_star(rep.matroid, space).passed
        assert lift(rep.matroid, space).r == 1 + k
    with pytest.raises(MatroidError):
        representable_rank_k_N(rep, 4)


def test_declared_matroid_must_match_the_matrix():
    matrix = FieldMatrix.from_rows(galois_field(2), [[1, 1, 1]])
    assert representation_from_matrix(matrix, declared=uniform(1, 3)).name == "U1,3"
    with pytest.raises(MatroidError):
        representation_from_matrix(matrix, declared=uniform(2, 3))
