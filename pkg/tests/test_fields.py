import pytest

from app.services.bitsets import mask_of
from app.services.fields import (
    FieldError,
    FieldMatrix,
    galois_field,
    matrix_rank,
    normalize,
    nullspace_vector,
    projective_points,
    verify_field,
    verify_projective_points,
)
from app.services.matroids import CapacityError, circuits, projective_geometry


def test_gf4_multiplication_follows_least_modulus():
    gf = galois_field(2, 2)
    assert gf.order == 4
    assert gf.mul(2, 2) == 3
    assert gf.mul(2, 3) == 1
    assert gf.inv(3) == 2
    assert gf.label(3) == "x+1"


@pytest.mark.parametrize("p,k", [(2, 1), (3, 1), (2, 3), (3, 2), (5, 1)])
def test_field_axioms(p, k):
    assert verify_field(galois_field(p, k)).passed


def test_field_errors():
    with pytest.raises(FieldError):
        galois_field(4)
    with pytest.raises(FieldError):
        galois_field(3).inv(0)
    with pytest.raises(CapacityError):
        galois_field(2, 11)


def test_projective_line_over_gf2():
    points = projective_points(2, galois_field(2))
    assert points.entries.T.tolist() == [[1, 0], [0, 1], [1, 1]]
    assert verify_projective_points(points).passed


def test_fano_plane():
    fano = projective_geometry(3, galois_field(2))
    assert fano.size == 7
    assert fano.r == 3
    lines = [c for c in circuits(fano).as_lists() if len(c) == 3]
    assert len(lines) == 7


def test_projective_points_over_gf3():
    points = projective_points(3, galois_field(3))
    assert points.cols == 13
    assert verify_projective_points(points).passed


def test_matrix_rank_and_kernel():
    gf = galois_field(2)
    matrix = FieldMatrix.from_rows(gf, [[1, 1, 1]])
    assert matrix_rank(matrix, mask_of([0, 1, 2])) == 1
    assert nullspace_vector(matrix, mask_of([0, 1])) == (1, 1, 0)
    assert nullspace_vector(matrix, mask_of([0])) is None


def test_kernel_vector_is_scaled_to_leading_one():
    gf = galois_field(3)
    matrix = FieldMatrix.from_rows(gf, [[1, 0, 1, 1], [0, 1, 1, 2]])
    vector = nullspace_vector(matrix, mask_of([0, 1, 2]))
    assert vector == (1, 1, 2, 0)
    assert normalize(gf, [2, 2, 1]) == (1, 1, 2)


def test_matrix_entries_must_lie_in_field():
    with pytest.raises(FieldError):
        FieldMatrix.from_rows(galois_field(2), [[0, 2]])
