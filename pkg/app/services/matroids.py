"""Oracle matroids on ground sets ``{0, ..., n-1}``.

Subsets are Python ints used as bitsets. A :class:`Matroid` wraps a rank
function and memoizes it; :class:`ExplicitMatroid` carries the full table of
``2**n`` ranks as a numpy array and is the target of every exhaustive check.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from networkx.utils import UnionFind

from app.config import get_settings
from app.schemas import MatroidSummary, Verdict
from app.services.bitsets import (
    bits,
    full,
    highest,
    mask_of,
    popcount,
    popcount_table,
    subsets_of_size,
    to_list,
)

logger = logging.getLogger(__name__)

RankFunction = Callable[[int], int]


class MatroidError(ValueError):
    """Raised for invalid matroid input or parameters."""


class CapacityError(MatroidError):
    """Raised when an instance exceeds a configured capacity."""


class InvariantViolation(AssertionError):
    """A computation contradicted a proved property; must not occur."""


def ensure_capacity(size: int, limit: Optional[int] = None, what: str = "ground set") -> None:
    if limit is None:
        limit = get_settings().max_ground
    if size > limit:
        raise CapacityError(f"{what} of size {size} exceeds capacity {limit}")


class Matroid:
    """A ground set of ``size`` elements plus a deterministic rank oracle.

    The memo table is a plain dict. Concurrent workers may race on the same
    key but always write the same value.
    """

    def __init__(self, size: int, rank_fn: RankFunction, name: str = "matroid") -> None:
        if size < 0:
            raise MatroidError("ground size must be non-negative")
        self.size = size
        self.name = name
        self._rank_fn = rank_fn
        self._memo: Dict[int, int] = {}

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.name!r}, size={self.size})"

    @property
    def full(self) -> int:
        return full(self.size)

    def _check(self, subset: int) -> None:
        if subset < 0 or subset >> self.size:
            raise MatroidError(f"subset {bin(subset)} has elements outside ground of size {self.size}")

    def rank(self, subset: Optional[int] = None) -> int:
        if subset is None:
            subset = self.full
        cached = self._memo.get(subset)
        if cached is not None:
            return cached
        self._check(subset)
        value = self._rank_fn(subset)
        self._memo[subset] = value
        return value

    @property
    def r(self) -> int:
        return self.rank(self.full)

    @property
    def corank(self) -> int:
        return self.size - self.r

    def nullity(self, subset: int) -> int:
        return popcount(subset) - self.rank(subset)

    def is_independent(self, subset: int) -> bool:
        return self.rank(subset) == popcount(subset)

    def is_circuit(self, subset: int) -> bool:
        size = popcount(subset)
        if size == 0 or self.rank(subset) != size - 1:
            return False
        return all(self.rank(subset ^ (1 << e)) == size - 1 for e in bits(subset))

    def closure(self, subset: int) -> int:
        return closure(self, subset)


class ExplicitMatroid(Matroid):
    """Matroid given by its full rank table (index = subset bitset)."""

    def __init__(self, size: int, table: np.ndarray, name: str = "explicit") -> None:
        ensure_capacity(size)
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (1 << size,):
            raise MatroidError(f"rank table must have {1 << size} entries, got {table.shape}")
        self.table = table
        self._values = table.tolist()
        super().__init__(size, self._values.__getitem__, name=name)

    def rank(self, subset: Optional[int] = None) -> int:
        if subset is None:
            subset = self.full
        self._check(subset)
        return self._values[subset]


@dataclass(eq=False)
class CircuitFamily:
    """Complete list of circuits of ``base`` in ascending bitset order."""

    base: Matroid
    circuits: Tuple[int, ...]
    _index: Dict[int, int] = field(init=False, repr=False)
    _by_top: Dict[int, List[Tuple[int, int]]] = field(init=False, repr=False)
    # filled by the lift engine on first use
    perfect_cache: Optional[list] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {c: i for i, c in enumerate(self.circuits)}
        self._by_top = {}
        for i, c in enumerate(self.circuits):
            self._by_top.setdefault(highest(c), []).append((i, c))

    def __len__(self) -> int:
        return len(self.circuits)

    def __iter__(self):
        return iter(self.circuits)

    def __getitem__(self, index: int) -> int:
        return self.circuits[index]

    @property
    def full(self) -> int:
        return full(len(self.circuits))

    def index(self, circuit: int) -> int:
        try:
            return self._index[circuit]
        except KeyError:
            raise MatroidError(f"{to_list(circuit)} is not a circuit of {self.base.name}") from None

    def union(self, members: int) -> int:
        result = 0
        for i in bits(members):
            result |= self.circuits[i]
        return result

    def inside(self, subset: int) -> int:
        """Index mask of the circuits contained in ``subset``."""
        found = 0
        outside = ~subset
        for e in bits(subset):
            for i, c in self._by_top.get(e, ()):
                if not c & outside:
                    found |= 1 << i
        return found

    def as_lists(self, members: Optional[int] = None) -> List[List[int]]:
        chosen = range(len(self.circuits)) if members is None else bits(members)
        return [to_list(self.circuits[i]) for i in chosen]


# constructors


def uniform(rank: int, size: int) -> Matroid:
    if rank < 0 or size < 0:
        raise MatroidError("uniform matroid parameters must be non-negative")
    if rank > size:
        raise MatroidError(f"r > n: cannot build U_{{{rank},{size}}}")
    return Matroid(size, lambda X: min(popcount(X), rank), name=f"U{rank},{size}")


def free(size: int) -> Matroid:
    return Matroid(size, popcount, name=f"free{size}")


def rank_zero(size: int) -> Matroid:
    return Matroid(size, lambda X: 0, name=f"zero{size}")


def graphic(edges: Sequence[Tuple[object, object]], name: str = "graphic") -> Matroid:
    """Cycle matroid of a multigraph; parallel edges and loops are allowed."""
    edge_list = [tuple(edge) for edge in edges]
    for edge in edge_list:
        if len(edge) != 2:
            raise MatroidError(f"edge {edge} must have two endpoints")

    def rank(subset: int) -> int:
        forest = UnionFind()
        value = 0
        for i in bits(subset):
            u, v = edge_list[i]
            if forest[u] != forest[v]:
                forest.union(u, v)
                value += 1
        return value

    matroid = Matroid(len(edge_list), rank, name=name)
    matroid.edges = edge_list
    return matroid


def complete_graph_edges(vertices: int) -> List[Tuple[int, int]]:
    return list(combinations(range(1, vertices + 1), 2))


def linear(matrix, name: str = "linear") -> Matroid:
    """Column matroid of a :class:`~app.services.fields.FieldMatrix`."""
    from app.services.fields import matrix_rank

    matroid = Matroid(matrix.cols, lambda X: matrix_rank(matrix, X), name=name)
    matroid.matrix = matrix
    return matroid


def projective_geometry(dimension: int, field_) -> Matroid:
    """PG(dimension - 1, q) as the linear matroid of its canonical points."""
    from app.services.fields import projective_points

    points = projective_points(dimension, field_)
    return linear(points, name=f"PG({dimension - 1},{field_.order})")


def table_from_bases(size: int, bases: Iterable[int]) -> np.ndarray:
    counts = popcount_table(size)
    index = np.arange(1 << size, dtype=np.int64)
    table = np.zeros(1 << size, dtype=np.uint8)
    for basis in bases:
        np.maximum(table, counts[index & basis], out=table)
    return table


def exchange_violation(bases: Sequence[int]) -> Optional[Tuple[int, int, int]]:
    family = set(bases)
    for b1 in bases:
        for b2 in bases:
            for x in bits(b1 & ~b2):
                if not any((b1 ^ (1 << x)) | (1 << y) in family for y in bits(b2 & ~b1)):
                    return b1, b2, x
    return None


def explicit(size: int, bases: Iterable[Iterable[int] | int], name: str = "bases") -> ExplicitMatroid:
    masks = sorted({b if isinstance(b, int) else mask_of(b) for b in bases})
    if not masks:
        raise MatroidError("a matroid needs at least one basis")
    if any(b >> size for b in masks):
        raise MatroidError("basis element outside the ground set")
    sizes = {popcount(b) for b in masks}
    if len(sizes) != 1:
        raise MatroidError(f"bases have different sizes {sorted(sizes)}")
    violation = exchange_violation(masks)
    if violation is not None:
        b1, b2, x = violation
        raise MatroidError(
            f"basis exchange fails for B1={to_list(b1)}, B2={to_list(b2)}, x={x}"
        )
    return ExplicitMatroid(size, table_from_bases(size, masks), name=name)


# operations


def materialize(matroid: Matroid) -> ExplicitMatroid:
    if isinstance(matroid, ExplicitMatroid):
        return matroid
    ensure_capacity(matroid.size)
    count = 1 << matroid.size
    table = np.fromiter((matroid.rank(X) for X in range(count)), dtype=np.uint8, count=count)
    return ExplicitMatroid(matroid.size, table, name=matroid.name)


def circuits(matroid: Matroid) -> CircuitFamily:
    """Minimal dependent sets, searched level by level over independent sets."""
    ensure_capacity(matroid.size)
    found: List[int] = []
    level = {0}
    while level:
        next_level = set()
        for independent in level:
            for e in range(highest(independent) + 1, matroid.size):
                candidate = independent | (1 << e)
                if any(candidate ^ (1 << f) not in level for f in bits(independent)):
                    continue
                if matroid.rank(candidate) == popcount(candidate):
                    next_level.add(candidate)
                else:
                    found.append(candidate)
        level = next_level
    found.sort()
    logger.debug("%s has %d circuits", matroid.name, len(found))
    return CircuitFamily(matroid, tuple(found))


def closure(matroid: Matroid, subset: int) -> int:
    base = matroid.rank(subset)
    result = subset
    for e in range(matroid.size):
        bit = 1 << e
        if not subset & bit and matroid.rank(subset | bit) == base:
            result |= bit
    return result


def dual(matroid: Matroid) -> Matroid:
    total = matroid.r
    ground = matroid.full
    inner = matroid
    result = Matroid(
        matroid.size,
        lambda X: popcount(X) + inner.rank(ground ^ X) - total,
        name=f"dual({matroid.name})",
    )
    result.primal = matroid
    return result


def truncate(matroid: Matroid, t: int) -> Matroid:
    total = matroid.r
    if t < 0 or t > total:
        raise MatroidError(f"cannot truncate rank-{total} matroid {t} times")
    if t == 0:
        return matroid
    cap = total - t
    return Matroid(
        matroid.size,
        lambda X: min(matroid.rank(X), cap),
        name=f"trunc{t}({matroid.name})",
    )


def restrict(matroid: Matroid, subset: int) -> Matroid:
    matroid._check(subset)
    elements = to_list(subset)

    def rank(X: int) -> int:
        image = 0
        for i in bits(X):
            image |= 1 << elements[i]
        return matroid.rank(image)

    result = Matroid(len(elements), rank, name=f"{matroid.name}|{elements}")
    result.elements = elements
    return result


def _axiom_witness(table: np.ndarray, size: int) -> Optional[Verdict]:
    t = table.astype(np.int16)
    index = np.arange(1 << size, dtype=np.int64)
    if t[0] != 0:
        return Verdict.fail("rank_axioms", "normalization", axiom="normalization", subset=[])
    for e in range(size):
        bit = 1 << e
        base = index[(index & bit) == 0]
        step = t[base | bit] - t[base]
        bad = np.flatnonzero((step < 0) | (step > 1))
        if bad.size:
            X = int(base[bad[0]])
            return Verdict.fail(
                "rank_axioms", "unit increase", axiom="unit_increase", subset=to_list(X), element=e
            )
    for e, f in combinations(range(size), 2):
        pair = (1 << e) | (1 << f)
        base = index[(index & pair) == 0]
        lhs = t[base | (1 << e)] + t[base | (1 << f)]
        rhs = t[base | pair] + t[base]
        bad = np.flatnonzero(lhs < rhs)
        if bad.size:
            X = int(base[bad[0]])
            return Verdict.fail(
                "rank_axioms",
                "submodularity",
                axiom="submodularity",
                x=to_list(X | (1 << e)),
                y=to_list(X | (1 << f)),
            )
    return None


def check_rank_axioms(matroid: ExplicitMatroid) -> Verdict:
    """Exhaustive check of normalization, unit increase and submodularity.

    The local forms checked here imply the global axioms; a failure is
    reported with the pair of subsets that violates them.
    """
    witness = _axiom_witness(matroid.table, matroid.size)
    if witness is not None:
        return witness
    return Verdict.ok("rank_axioms", f"exhaustive over {1 << matroid.size} subsets")


def verify_rank_axioms(matroid: Matroid, samples: Optional[int] = None) -> Verdict:
    settings = get_settings()
    if matroid.size <= settings.exhaustive_axiom_ground or isinstance(matroid, ExplicitMatroid):
        return check_rank_axioms(materialize(matroid))

    samples = samples or settings.axiom_samples
    rng = np.random.default_rng(settings.seed)
    if matroid.rank(0) != 0:
        return Verdict.fail("rank_axioms", "normalization", axiom="normalization", subset=[])
    for _ in range(samples):
        chosen = rng.integers(0, 2, size=matroid.size)
        e, f = (int(v) for v in rng.choice(matroid.size, size=2, replace=False))
        X = mask_of(np.flatnonzero(chosen).tolist()) & ~((1 << e) | (1 << f))
        rx = matroid.rank(X)
        re, rf = matroid.rank(X | (1 << e)), matroid.rank(X | (1 << f))
        ref = matroid.rank(X | (1 << e) | (1 << f))
        if not (0 <= re - rx <= 1):
            return Verdict.fail(
                "rank_axioms", "unit increase", axiom="unit_increase", subset=to_list(X), element=e
            )
        if re + rf < ref + rx:
            return Verdict.fail(
                "rank_axioms",
                "submodularity",
                axiom="submodularity",
                x=to_list(X | (1 << e)),
                y=to_list(X | (1 << f)),
            )
    return Verdict.ok("rank_axioms", f"sampled {samples} local configurations (seed {settings.seed})")


def is_quotient(quotient: Matroid, matroid: Matroid) -> Verdict:
    """PASS iff cl_K(X) is contained in cl_Q(X) for every X."""
    if quotient.size != matroid.size:
        raise MatroidError(
            f"ground sets differ: {quotient.size} vs {matroid.size} elements"
        )
    size = matroid.size
    tq = materialize(quotient).table.astype(np.int16)
    tk = materialize(matroid).table.astype(np.int16)
    index = np.arange(1 << size, dtype=np.int64)
    for e in range(size):
        bit = 1 << e
        base = index[(index & bit) == 0]
        spanned_in_k = tk[base | bit] == tk[base]
        spanned_in_q = tq[base | bit] == tq[base]
        bad = np.flatnonzero(spanned_in_k & ~spanned_in_q)
        if bad.size:
            X = int(base[bad[0]])
            return Verdict.fail(
                "quotient",
                f"element {e} is in cl_K(X) but not in the closure of the quotient",
                subset=to_list(X),
                element=e,
            )
    return Verdict.ok("quotient")


def is_lift_of(lifted: Matroid, matroid: Matroid) -> Verdict:
    return is_quotient(matroid, lifted)


def equal_matroids(first: Matroid, second: Matroid) -> Verdict:
    """Rank-function equality.

    Two matroids of rank at most ``r`` agree everywhere as soon as they agree
    on independence of all sets with at most ``r + 1`` elements.
    """
    if first.size != second.size:
        return Verdict.fail("equal", "ground sizes differ", sizes=[first.size, second.size])
    if isinstance(first, ExplicitMatroid) and isinstance(second, ExplicitMatroid):
        diff = np.flatnonzero(first.table != second.table)
        if diff.size:
            X = int(diff[0])
            return Verdict.fail(
                "equal", "rank tables differ", subset=to_list(X), ranks=[first.rank(X), second.rank(X)]
            )
        return Verdict.ok("equal")
    if first.r != second.r:
        return Verdict.fail(
            "equal", "ranks differ", subset=to_list(first.full), ranks=[first.r, second.r]
        )
    for k in range(min(first.size, first.r + 1) + 1):
        for X in subsets_of_size(first.full, k):
            if first.is_independent(X) != second.is_independent(X):
                return Verdict.fail(
                    "equal",
                    "independence differs",
                    subset=to_list(X),
                    ranks=[first.rank(X), second.rank(X)],
                )
    return Verdict.ok("equal")


def _element_signatures(table: np.ndarray, size: int, family: CircuitFamily) -> List[tuple]:
    counts = popcount_table(size).astype(np.int64)
    t = table.astype(np.int64)
    index = np.arange(1 << size, dtype=np.int64)
    total = int(t[-1])
    signatures = []
    for e in range(size):
        bit = 1 << e
        base = index[(index & bit) == 0]
        step = t[base | bit] - t[base]
        key = (counts[base] * (size + 1) + t[base]) * 2 + step
        histogram = np.bincount(key, minlength=(size + 1) * (size + 1) * 2)
        degree = [0] * (size + 2)
        for c in family:
            if c & bit:
                degree[popcount(c)] += 1
        is_loop = int(t[bit]) == 0
        is_coloop = int(t[full(size) ^ bit]) < total
        signatures.append((is_loop, is_coloop, tuple(degree), histogram.tobytes()))
    return signatures


def isomorphic(first: Matroid, second: Matroid) -> Optional[List[int]]:
    """Rank-preserving bijection ``perm`` (``perm[e]`` in ``second``) or None."""
    limit = get_settings().max_isomorphism_ground
    ensure_capacity(max(first.size, second.size), limit, "isomorphism instance")
    if first.size != second.size:
        return None
    size = first.size
    t1 = materialize(first).table
    t2 = materialize(second).table
    if int(t1[-1]) != int(t2[-1]):
        return None
    counts = popcount_table(size).astype(np.int64)
    key1 = np.bincount(counts * (size + 1) + t1, minlength=(size + 1) ** 2)
    key2 = np.bincount(counts * (size + 1) + t2, minlength=(size + 1) ** 2)
    if not np.array_equal(key1, key2):
        return None

    sig1 = _element_signatures(t1, size, circuits(ExplicitMatroid(size, t1)))
    sig2 = _element_signatures(t2, size, circuits(ExplicitMatroid(size, t2)))
    if sorted(sig1) != sorted(sig2):
        return None

    candidates = [[b for b in range(size) if sig2[b] == sig1[a]] for a in range(size)]
    order = sorted(range(size), key=lambda a: (len(candidates[a]), a))
    r1, r2 = t1.tolist(), t2.tolist()
    image = [-1] * size
    used = [False] * size

    def extend(depth: int, pairs: List[Tuple[int, int]]) -> bool:
        if depth == size:
            return True
        a = order[depth]
        for b in candidates[a]:
            if used[b]:
                continue
            added = [(s | (1 << a), t | (1 << b)) for s, t in pairs]
            if all(r1[s] == r2[t] for s, t in added):
                image[a], used[b] = b, True
                if extend(depth + 1, pairs + added):
                    return True
                image[a], used[b] = -1, False
        return False

    if extend(0, [(0, 0)]):
        return image
    return None


def table_hash(matroid: Matroid) -> str:
    table = materialize(matroid).table
    return hashlib.sha256(table.astype("<u1").tobytes()).hexdigest()


def summarize(matroid: Matroid, name: Optional[str] = None) -> MatroidSummary:
    family = circuits(matroid)
    digest = table_hash(matroid) if matroid.size <= 12 else None
    return MatroidSummary(
        name=name or matroid.name,
        ground=matroid.size,
        rank=matroid.r,
        circuits=family.as_lists(),
        table_hash=digest,
    )
