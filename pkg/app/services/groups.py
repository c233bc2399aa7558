"""Finite groups as multiplication tables over element indices ``0..m-1``.

Index 0 is always the identity. Abelian groups are direct sums of cyclic
groups whose elements are coordinate tuples in ``itertools.product`` order;
other groups come from Cayley tables.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.services.matroids import CapacityError

logger = logging.getLogger(__name__)


class GroupError(ValueError):
    """Raised when a group table violates the group axioms."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    table: np.ndarray = field(repr=False)
    labels: Tuple[str, ...] = field(repr=False)
    # cyclic orders for groups built as direct sums
    factors: Optional[Tuple[int, ...]] = None
    inverse_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", table)
        validate_table(table)
        inverses = np.argmin(table, axis=1)
        object.__setattr__(self, "inverse_table", inverses)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def identity(self) -> int:
        return 0

    @property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    @property
    def elements(self) -> range:
        return range(self.order)

    def compose(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inverse_table[a])

    def power(self, a: int, exponent: int) -> int:
        base = a if exponent >= 0 else self.inverse(a)
        result = 0
        for _ in range(abs(exponent)):
            result = self.compose(result, base)
        return result

    def element_order(self, a: int) -> int:
        current, steps = a, 1
        while current != 0:
            current = self.compose(current, a)
            steps += 1
        return steps

    def label(self, a: int) -> str:
        return self.labels[a]

    @cached_property
    def _tuples(self) -> List[Tuple[int, ...]]:
        return list(product(*(range(d) for d in self.factors or ())))

    def coordinates(self, a: int) -> Tuple[int, ...]:
        if self.factors is None:
            raise GroupError(f"{self.name} is not a direct sum of cyclic groups")
        return self._tuples[a]

    def index_of(self, coordinates: Sequence[int]) -> int:
        if self.factors is None:
            raise GroupError(f"{self.name} is not a direct sum of cyclic groups")
        index = 0
        for value, d in zip(coordinates, self.factors):
            index = index * d + value % d
        return index

    def generated_subgroup(self, generators: Iterable[int]) -> FrozenSet[int]:
        """Closure of the generators and the identity under products and inverses."""
        found = {0}
        queue = deque([0])
        generators = list(generators)
        steps = generators + [self.inverse(g) for g in generators]
        while queue:
            current = queue.popleft()
            for g in steps:
                nxt = self.compose(current, g)
                if nxt not in found:
                    found.add(nxt)
                    queue.append(nxt)
        return frozenset(found)

    def is_subgroup(self, subset: Iterable[int]) -> bool:
        subset = frozenset(subset)
        return 0 in subset and all(
            self.compose(a, self.inverse(b)) in subset for a in subset for b in subset
        )


def validate_table(table: np.ndarray) -> None:
    """Latin square, identity at index 0, associativity (exhaustive)."""
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise GroupError("a group table must be a non-empty square")
    m = table.shape[0]
    limit = get_settings().max_group_order
    if m > limit:
        raise CapacityError(f"group order {m} exceeds capacity {limit}")
    if table.min() < 0 or table.max() >= m:
        raise GroupError(f"table entries must lie in range({m})")
    expected = np.arange(m)
    if not (np.array_equal(table[0], expected) and np.array_equal(table[:, 0], expected)):
        raise GroupError("index 0 must be the identity")
    if np.any(np.sort(table, axis=1) != expected) or np.any(np.sort(table, axis=0) != expected[:, None]):
        raise GroupError("table is not a Latin square")
    left = table[table]
    right = table[np.arange(m)[:, None, None], table[None, :, :]]
    bad = np.argwhere(left != right)
    if bad.size:
        a, b, c = (int(v) for v in bad[0])
        raise GroupError(f"associativity fails for ({a}, {b}, {c})")


def abelian_group(factors: Sequence[int]) -> FiniteGroup:
    factors = tuple(int(d) for d in factors)
    if any(d < 2 for d in factors):
        raise GroupError("cyclic factors must have order at least 2")
    elements = list(product(*(range(d) for d in factors)))
    index = {e: i for i, e in enumerate(elements)}
    m = len(elements)
    table = np.zeros((m, m), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[tuple((x + y) % d for x, y, d in zip(a, b, factors))]
    if len(factors) == 1:
        labels = tuple(str(e[0]) for e in elements)
    else:
        labels = tuple("(" + ",".join(map(str, e)) + ")" for e in elements)
    name = "x".join(f"Z{d}" for d in factors) or "trivial"
    return FiniteGroup(name, table, labels, factors)


def elementary_abelian(p: int, j: int) -> FiniteGroup:
    return abelian_group([p] * j)


def cayley_group(name: str, table: Sequence[Sequence[int]]) -> FiniteGroup:
    table = np.asarray(table, dtype=np.int64)
    labels = tuple(str(i) for i in range(table.shape[0]))
    group = FiniteGroup(name, table, labels)
    logger.debug("loaded Cayley group %s of order %d", name, group.order)
    return group


def symmetric_group(k: int) -> FiniteGroup:
    """S_k with composition (a*b)(x) = a(b(x)); permutations in lexicographic order."""
    if k < 1 or k > 4:
        raise GroupError("symmetric groups are supported for 1 <= k <= 4")
    perms: List[Tuple[int, ...]] = list(permutations(range(k)))
    index = {perm: i for i, perm in enumerate(perms)}
    table = [[index[tuple(a[b[x]] for x in range(k))] for b in perms] for a in perms]
    labels = tuple("".join(str(v) for v in perm) for perm in perms)
    return FiniteGroup(f"S{k}", np.array(table, dtype=np.int64), labels)


def elementary_abelian_exponent(group: FiniteGroup) -> Optional[Tuple[int, int]]:
    """(p, j) when the group is isomorphic to Z_p^j, else None."""
    orders = {group.element_order(a) for a in group.elements if a}
    if not group.is_abelian or len(orders) != 1:
        return None
    (p,) = orders
    if any(p % d == 0 for d in range(2, p)):
        return None
    j, size = 0, 1
    while size < group.order:
        size *= p
        j += 1
    return (p, j) if size == group.order else None
