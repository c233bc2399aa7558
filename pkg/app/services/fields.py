"""Finite fields GF(p^k) and linear algebra over them.

An element of GF(p^k) is an int in ``range(p**k)`` whose base-p digits are
the coefficients of a polynomial in x (digit t is the coefficient of x^t),
reduced modulo a fixed monic irreducible polynomial. Arithmetic is done by
table lookup, so vectors and matrices are plain numpy integer arrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.schemas import Verdict
from app.services.bitsets import to_list
from app.services.matroids import CapacityError, InvariantViolation

logger = logging.getLogger(__name__)

MAX_KERNEL_SEARCH = 65536


class FieldError(ValueError):
    """Raised for invalid field parameters or arithmetic."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def _digits(value: int, base: int, length: int) -> List[int]:
    out = []
    for _ in range(length):
        value, digit = divmod(value, base)
        out.append(digit)
    return out


def _encode(digits: Sequence[int], base: int) -> int:
    return sum(int(d) * base**t for t, d in enumerate(digits))


def _poly_mod(poly: List[int], modulus: Sequence[int], p: int) -> List[int]:
    """Remainder of ``poly`` by a monic ``modulus`` (coefficients low to high)."""
    poly = list(poly)
    degree = len(modulus) - 1
    for top in range(len(poly) - 1, degree - 1, -1):
        lead = poly[top] % p
        if lead:
            shift = top - degree
            for t, c in enumerate(modulus):
                poly[shift + t] = (poly[shift + t] - lead * c) % p
    return [c % p for c in poly[:degree]] + [0] * max(0, degree - len(poly))


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _is_irreducible(modulus: Sequence[int], p: int) -> bool:
    degree = len(modulus) - 1
    for d in range(1, degree // 2 + 1):
        for low in range(p**d):
            divisor = _digits(low, p, d) + [1]
            if not any(_poly_mod(list(modulus), divisor, p)):
                return False
    return True


def least_irreducible(p: int, k: int) -> Tuple[int, ...]:
    """Monic irreducible of degree k whose lower coefficients encode the least integer."""
    for low in range(p**k):
        candidate = _digits(low, p, k) + [1]
        if _is_irreducible(candidate, p):
            return tuple(candidate)
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class FiniteField:
    p: int
    k: int
    modulus: Tuple[int, ...]
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.p**self.k

    @property
    def name(self) -> str:
        return f"GF({self.order})"

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def inv(self, a: int) -> int:
        if a % self.order == 0:
            raise FieldError("inversion of zero")
        return int(self.inv_table[a])

    def label(self, a: int) -> str:
        if self.k == 1:
            return str(a)
        terms = []
        for t, c in reversed(list(enumerate(_digits(a, self.p, self.k)))):
            if not c:
                continue
            mono = "" if t == 0 else ("x" if t == 1 else f"x^{t}")
            coefficient = "" if c == 1 and t else str(c)
            terms.append(f"{coefficient}{mono}")
        return "+".join(terms) or "0"


@lru_cache(maxsize=None)
def galois_field(p: int, k: int = 1) -> FiniteField:
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if k < 1:
        raise FieldError("extension degree must be at least 1")
    q = p**k
    limit = get_settings().max_field_order
    if q > limit:
        raise CapacityError(f"field order {q} exceeds capacity {limit}")
    modulus = least_irreducible(p, k)

    digits = np.array([_digits(a, p, k) for a in range(q)], dtype=np.int64)
    weights = np.array([p**t for t in range(k)], dtype=np.int64)
    add_table = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    neg_table = ((-digits) % p) @ weights

    def multiply(a: int, b: int) -> int:
        return _encode(_poly_mod(_poly_mul(digits[a].tolist(), digits[b].tolist(), p), modulus, p), p)

    # exp/log tables from a primitive element
    exp = None
    for generator in range(1, q):
        powers = [1]
        for _ in range(q - 2):
            powers.append(multiply(powers[-1], generator))
        if len(set(powers)) == q - 1:
            exp = np.array(powers, dtype=np.int64)
            break
    if exp is None:  # pragma: no cover
        raise InvariantViolation(f"GF({q}) has no primitive element")
    log = np.zeros(q, dtype=np.int64)
    log[exp] = np.arange(q - 1)
    mul_table = np.zeros((q, q), dtype=np.int64)
    mul_table[1:, 1:] = exp[(log[1:, None] + log[None, 1:]) % (q - 1)]
    inv_table = np.zeros(q, dtype=np.int64)
    inv_table[1:] = exp[(-log[1:]) % (q - 1)]

    logger.debug("built GF(%d) with modulus %s", q, modulus)
    return FiniteField(p, k, modulus, add_table, mul_table, neg_table, inv_table)


def verify_field(gf: FiniteField, samples: int = 2000) -> Verdict:
    """Field axioms, exhaustive for order at most 256 and sampled above."""
    q = gf.order
    add, mul = gf.add_table, gf.mul_table
    if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
        return Verdict.fail("field_axioms", "commutativity")
    if np.any(add[np.arange(q), gf.neg_table] != 0):
        return Verdict.fail("field_axioms", "additive inverses")
    if np.any(mul[np.arange(1, q), gf.inv_table[1:]] != 1):
        return Verdict.fail("field_axioms", "multiplicative inverses")
    if q <= 256:
        b = np.arange(q)[:, None]
        c = np.arange(q)[None, :]
        triples = ((a, b, c) for a in range(q))
    else:
        rng = np.random.default_rng(get_settings().seed)
        triples = [tuple(rng.integers(0, q, size=samples) for _ in range(3))]
    for a, b, c in triples:
        if np.any(add[add[a, b], c] != add[a, add[b, c]]):
            return Verdict.fail("field_axioms", "additive associativity")
        if np.any(mul[mul[a, b], c] != mul[a, mul[b, c]]):
            return Verdict.fail("field_axioms", "multiplicative associativity")
        if np.any(mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]):
            return Verdict.fail("field_axioms", "distributivity")
    return Verdict.ok("field_axioms", f"GF({q})")


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    field: FiniteField
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.atleast_2d(np.asarray(self.entries, dtype=np.int64))
        if entries.ndim != 2:
            raise FieldError("a field matrix must be two-dimensional")
        if entries.size and (entries.min() < 0 or entries.max() >= self.field.order):
            raise FieldError(f"entries must lie in range({self.field.order})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, gf: FiniteField, rows: Sequence[Sequence[int]]) -> "FieldMatrix":
        return cls(gf, np.array(rows, dtype=np.int64).reshape(len(rows), -1))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def columns(self, cols: Sequence[int]) -> np.ndarray:
        return self.entries[:, list(cols)]


def row_reduce(gf: FiniteField, entries: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form and pivot columns."""
    A = np.array(entries, dtype=np.int64, copy=True)
    rows, cols = A.shape
    pivots: List[int] = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        nonzero = np.flatnonzero(A[row:, col])
        if not nonzero.size:
            continue
        pick = row + int(nonzero[0])
        if pick != row:
            A[[row, pick]] = A[[pick, row]]
        A[row] = gf.mul_table[gf.inv_table[A[row, col]], A[row]]
        for other in range(rows):
            factor = A[other, col]
            if other != row and factor:
                A[other] = gf.add_table[A[other], gf.neg_table[gf.mul_table[factor, A[row]]]]
        pivots.append(col)
        row += 1
    return A, pivots


def matrix_rank(matrix: FieldMatrix, cols: int) -> int:
    chosen = to_list(cols)
    if not chosen or matrix.rows == 0:
        return 0
    if chosen[-1] >= matrix.cols:
        raise FieldError(f"column {chosen[-1]} out of range for {matrix.cols} columns")
    _, pivots = row_reduce(matrix.field, matrix.columns(chosen))
    return len(pivots)


def kernel_basis(gf: FiniteField, entries: np.ndarray) -> List[np.ndarray]:
    rref, pivots = row_reduce(gf, entries)
    cols = entries.shape[1]
    basis = []
    for free_col in (c for c in range(cols) if c not in pivots):
        vector = np.zeros(cols, dtype=np.int64)
        vector[free_col] = 1
        for i, pivot in enumerate(pivots):
            vector[pivot] = gf.neg_table[rref[i, free_col]]
        basis.append(vector)
    return basis


def apply(matrix: FieldMatrix, vector: np.ndarray) -> np.ndarray:
    gf = matrix.field
    products = gf.mul_table[matrix.entries, np.asarray(vector, dtype=np.int64)[None, :]]
    if products.shape[1] == 0:
        return np.zeros(matrix.rows, dtype=np.int64)
    return reduce(lambda acc, col: gf.add_table[acc, col], products.T)


def normalize(gf: FiniteField, vector: Sequence[int]) -> Tuple[int, ...]:
    """Scale so that the lowest-index nonzero entry is 1."""
    vector = np.asarray(vector, dtype=np.int64)
    nonzero = np.flatnonzero(vector)
    if not nonzero.size:
        raise FieldError("the zero vector has no projective point")
    scale = gf.inv_table[vector[nonzero[0]]]
    return tuple(int(v) for v in gf.mul_table[scale, vector])


def nullspace_vector(matrix: FieldMatrix, support: int) -> Optional[Tuple[int, ...]]:
    """Kernel vector with nonzero entries exactly on ``support``, or None."""
    chosen = to_list(support)
    if not chosen:
        raise FieldError("support must be nonempty")
    if chosen[-1] >= matrix.cols:
        raise FieldError(f"support column {chosen[-1]} out of range for {matrix.cols} columns")
    gf = matrix.field
    basis = kernel_basis(gf, matrix.columns(chosen))
    if not basis:
        return None
    if gf.order ** len(basis) > MAX_KERNEL_SEARCH:
        raise CapacityError(f"kernel of dimension {len(basis)} over {gf.name} is too large to search")
    found = None
    for coefficients in product(range(gf.order), repeat=len(basis)):
        lead = next((c for c in coefficients if c), 0)
        if lead != 1:
            continue
        combo = np.zeros(len(chosen), dtype=np.int64)
        for c, vector in zip(coefficients, basis):
            if c:
                combo = gf.add_table[combo, gf.mul_table[c, vector]]
        if np.all(combo != 0):
            found = combo
            break
    if found is None:
        return None
    full_vector = np.zeros(matrix.cols, dtype=np.int64)
    full_vector[chosen] = normalize(gf, found)
    result = tuple(int(v) for v in full_vector)
    if np.any(apply(matrix, full_vector) != 0) or [i for i, v in enumerate(result) if v] != chosen:
        raise InvariantViolation(f"kernel vector {result} failed re-verification")
    return result


def projective_points(dimension: int, gf: FiniteField) -> FieldMatrix:
    """Canonical representatives of the points of PG(dimension - 1, q) as columns.

    Vectors are listed in ascending order of their little-endian base-q
    encoding, keeping those whose lowest-index nonzero coordinate is 1.
    """
    if dimension < 1:
        raise FieldError("projective points need dimension at least 1")
    q = gf.order
    total = q**dimension
    if total > 1 << 20:
        raise CapacityError(f"GF({q})^{dimension} has too many vectors")
    points = []
    for value in range(1, total):
        vector = _digits(value, q, dimension)
        if next(c for c in vector if c) == 1:
            points.append(vector)
    return FieldMatrix(gf, np.array(points, dtype=np.int64).T.reshape(dimension, len(points)))


def verify_projective_points(points: FieldMatrix) -> Verdict:
    """Every nonzero vector is a multiple of exactly one listed point."""
    gf = points.field
    q, dimension = gf.order, points.rows
    if q**dimension > 4096:
        return Verdict.ok("projective_points", "skipped above 4096 vectors")
    listed = {tuple(int(v) for v in points.entries[:, j]): j for j in range(points.cols)}
    if len(listed) != points.cols:
        return Verdict.fail("projective_points", "duplicate point")
    hits = [0] * points.cols
    for value in range(1, q**dimension):
        vector = _digits(value, q, dimension)
        j = listed.get(normalize(gf, vector))
        if j is None:
            return Verdict.fail("projective_points", "vector not covered", vector=vector)
        hits[j] += 1
    if any(h != q - 1 for h in hits):
        return Verdict.fail("projective_points", "uneven scalar classes")
    return Verdict.ok("projective_points", f"PG({dimension - 1},{q})")
