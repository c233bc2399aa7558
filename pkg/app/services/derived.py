"""Derived matroids of represented matroids.

Each circuit C of the column matroid of A gets the kernel vector of A
supported exactly on C, scaled so its first nonzero entry is 1; the derived
matroid is the column matroid of those vectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from app.config import get_settings
from app.services.fields import FieldMatrix, nullspace_vector
from app.services.lifts import CircuitSpaceMatroid, LiftedMatroid, lift, satisfies_star
from app.services.matroids import (
    CircuitFamily,
    InvariantViolation,
    Matroid,
    MatroidError,
    circuits,
    ensure_capacity,
    equal_matroids,
    linear,
    materialize,
    truncate,
)
from app.services.workers import chunk, map_shards

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Representation:
    matrix: FieldMatrix
    matroid: Matroid

    @property
    def name(self) -> str:
        return self.matroid.name


def representation_from_matrix(
    matrix: FieldMatrix, declared: Optional[Matroid] = None, name: str = "rep"
) -> Representation:
    column_matroid = linear(matrix, name=name)
    if declared is not None:
        if declared.size != column_matroid.size:
            raise MatroidError(f"matrix has {column_matroid.size} columns but M has {declared.size} elements")
        verdict = equal_matroids(materialize(declared), materialize(column_matroid))
        if not verdict.passed:
            raise MatroidError(f"matrix does not represent {declared.name}: {verdict.witness}")
        column_matroid.name = declared.name
    return Representation(matrix, column_matroid)


@dataclass(frozen=True, eq=False)
class DerivedMatroid:
    representation: Representation
    family: CircuitFamily
    vectors: Tuple[Tuple[int, ...], ...]
    matrix: FieldMatrix
    space: CircuitSpaceMatroid

    @property
    def matroid(self) -> Matroid:
        return self.space.matroid


def derived_matroid(representation: Representation) -> DerivedMatroid:
    base = representation.matroid
    matrix = representation.matrix
    family = circuits(base)
    ensure_capacity(len(family), get_settings().max_circuits, "circuit family")

    blocks = map_shards(
        lambda block: [nullspace_vector(matrix, c) for c in block],
        chunk(list(family), get_settings().workers),
    )
    vectors: List[Tuple[int, ...]] = [v for block in blocks for v in block]
    for c, vector in zip(family, vectors):
        if vector is None:
            raise InvariantViolation(f"circuit {c:b} has no kernel vector")

    entries = np.array(vectors, dtype=np.int64).T.reshape(matrix.cols, len(vectors))
    derived_matrix = FieldMatrix(matrix.field, entries)
    derived = linear(derived_matrix, name=f"derived({base.name})")

    if derived.r != base.corank:
        raise InvariantViolation(f"derived rank {derived.r} differs from corank {base.corank}")
    if any(derived.rank(1 << i) == 0 for i in range(len(family))):
        raise InvariantViolation("derived matroid has a loop")
    logger.info("%s: %d circuits, rank %d", derived.name, len(family), derived.r)
    return DerivedMatroid(representation, family, tuple(vectors), derived_matrix, CircuitSpaceMatroid(family, derived))


def lift_by_derived(representation: Representation) -> LiftedMatroid:
    """Lift by the derived matroid; the result must be free."""
    base = representation.matroid
    derived = derived_matroid(representation)
    verdict = satisfies_star(base, derived.space)
    if not verdict.passed:
        raise InvariantViolation(f"derived matroid violates the star condition: {verdict.witness}")
    lifted = lift(base, derived.space, check=False)
    if lifted.r != base.size:
        raise InvariantViolation(f"lift by the derived matroid has rank {lifted.r}, not {base.size}")
    return lifted


def representable_rank_k_N(representation: Representation, k: int) -> CircuitSpaceMatroid:
    derived = derived_matroid(representation)
    corank = representation.matroid.corank
    if not 1 <= k <= corank:
        raise MatroidError(f"k must lie in 1..{corank}, got {k}")
    return derived.space.with_matroid(truncate(derived.matroid, corank - k))
