"""Projections of a matroid K built from a matroid N on the hyperplanes of K.

The projected rank of X is ``r_K(X) - r(N) + r_N(hyperplanes containing X)``.
Everything here mirrors the lift engine under the bijection sending a
hyperplane H to the cocircuit E - H.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import get_settings
from app.schemas import Verdict
from app.services.bitsets import bits, lowest, mask_of, popcount, to_list
from app.services.lifts import (
    CircuitSpaceMatroid,
    LinearClassError,
    StarConditionError,
    is_perfect,
    lift,
    satisfies_star,
)
from app.services.matroids import (
    CapacityError,
    CircuitFamily,
    InvariantViolation,
    Matroid,
    MatroidError,
    check_rank_axioms,
    circuits,
    dual,
    ensure_capacity,
    equal_matroids,
    is_quotient,
    materialize,
)
from app.services.workers import chunk, map_shards

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class HyperplaneFamily:
    """Hyperplanes of ``base`` in ascending bitset order."""

    base: Matroid
    hyperplanes: Tuple[int, ...]
    _index: Dict[int, int] = field(init=False, repr=False)
    perfect_cache: Optional[list] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {h: i for i, h in enumerate(self.hyperplanes)}

    def __len__(self) -> int:
        return len(self.hyperplanes)

    def __iter__(self):
        return iter(self.hyperplanes)

    def __getitem__(self, index: int) -> int:
        return self.hyperplanes[index]

    @property
    def full(self) -> int:
        return (1 << len(self.hyperplanes)) - 1

    def index(self, hyperplane: int) -> int:
        try:
            return self._index[hyperplane]
        except KeyError:
            raise MatroidError(f"{to_list(hyperplane)} is not a hyperplane of {self.base.name}") from None

    def intersection(self, members: int) -> int:
        result = self.base.full
        for i in bits(members):
            result &= self.hyperplanes[i]
        return result

    def containing(self, subset: int) -> int:
        """Index mask of the hyperplanes that contain ``subset``."""
        return mask_of(i for i, h in enumerate(self.hyperplanes) if h & subset == subset)

    def as_lists(self, members: Optional[int] = None) -> List[List[int]]:
        chosen = range(len(self.hyperplanes)) if members is None else bits(members)
        return [to_list(self.hyperplanes[i]) for i in chosen]

    @cached_property
    def cocircuits(self) -> CircuitFamily:
        """Circuits of the dual, as complements, in their own canonical order."""
        ground = self.base.full
        return CircuitFamily(dual(self.base), tuple(sorted(ground ^ h for h in self.hyperplanes)))

    @cached_property
    def _to_dual(self) -> List[int]:
        ground = self.base.full
        return [self.cocircuits.index(ground ^ h) for h in self.hyperplanes]

    def to_dual(self, members: int) -> int:
        return mask_of(self._to_dual[i] for i in bits(members))

    def from_dual(self, members: int) -> int:
        back = {d: i for i, d in enumerate(self._to_dual)}
        return mask_of(back[d] for d in bits(members))


@dataclass(eq=False)
class HyperplaneSpaceMatroid:
    family: HyperplaneFamily
    matroid: Matroid

    def __post_init__(self) -> None:
        if self.matroid.size != len(self.family):
            raise MatroidError(
                f"N has {self.matroid.size} elements but K has {len(self.family)} hyperplanes"
            )

    @property
    def name(self) -> str:
        return self.matroid.name

    @property
    def r(self) -> int:
        return self.matroid.r

    def rank(self, members: int) -> int:
        return self.matroid.rank(members)


def hyperplanes(matroid: Matroid, cross_check: bool = True) -> HyperplaneFamily:
    ensure_capacity(matroid.size)
    size, total = matroid.size, matroid.r
    if total == 0:
        found: List[int] = []
    else:
        table = materialize(matroid).table.astype(np.int16)
        index = np.arange(1 << size, dtype=np.int64)
        closed = table == total - 1
        for e in range(size):
            bit = 1 << e
            closed &= ((index & bit) != 0) | (table[index | bit] != table)
        found = [int(h) for h in np.flatnonzero(closed)]
    family = HyperplaneFamily(matroid, tuple(found))
    if cross_check:
        expected = circuits(dual(matroid)).circuits
        if family.cocircuits.circuits != expected:
            raise InvariantViolation(f"hyperplanes of {matroid.name} do not complement the dual circuits")
    logger.debug("%s has %d hyperplanes", matroid.name, len(found))
    return family


# hyperplane-space builders


def zero_hyperplane_N(family: HyperplaneFamily) -> HyperplaneSpaceMatroid:
    return HyperplaneSpaceMatroid(family, Matroid(len(family), lambda S: 0, name="zero"))


def uniform_hyperplane_N(family: HyperplaneFamily, rank: int) -> HyperplaneSpaceMatroid:
    if rank < 0 or rank > len(family):
        raise MatroidError(f"no rank-{rank} uniform matroid on {len(family)} hyperplanes")
    return HyperplaneSpaceMatroid(
        family, Matroid(len(family), lambda S: min(popcount(S), rank), name=f"U{rank},{len(family)}")
    )


def rank_one_hyperplane_N(family: HyperplaneFamily, loops: int) -> HyperplaneSpaceMatroid:
    live = family.full & ~loops
    return HyperplaneSpaceMatroid(family, Matroid(len(family), lambda S: 1 if S & live else 0, name="rank1"))


def subclass_through(family: HyperplaneFamily, element: int) -> int:
    """The hyperplanes containing ``element``."""
    if not 0 <= element < family.base.size:
        raise MatroidError(f"element {element} is outside the ground set")
    return family.containing(1 << element)


# perfect hyperplane collections


def is_perfect_hyperplanes(family: HyperplaneFamily, members: int) -> bool:
    base = family.base
    meet = family.intersection(members)
    result = base.rank(meet) == base.r - popcount(members) and all(
        family.intersection(members ^ (1 << i)) & ~family[i] for i in bits(members)
    )
    if result != is_perfect(family.cocircuits, family.to_dual(members)):
        raise InvariantViolation(f"perfection of {to_list(members)} disagrees with the dual circuits")
    return result


def _perfect_from_root(family: HyperplaneFamily, root: int, limit: int) -> List[Tuple[int, int]]:
    base = family.base
    total = base.r
    planes = family.hyperplanes
    found: List[Tuple[int, int]] = []

    def grow(members: int, meet: int, privates: List[int], start: int, size: int) -> None:
        for j in range(start, len(planes)):
            h = planes[j]
            fresh = meet & ~h
            if not fresh:
                continue
            if any(not p & h for p in privates):
                continue
            new_meet = meet & h
            if base.rank(new_meet) != total - size - 1:
                continue
            new_members = members | (1 << j)
            found.append((new_members, new_meet))
            if len(found) > limit:
                raise CapacityError(f"more than {limit} perfect hyperplane collections")
            grow(new_members, new_meet, [p & h for p in privates] + [fresh], j + 1, size + 1)

    h = planes[root]
    first = base.full & ~h
    found.append((1 << root, h))
    grow(1 << root, h, [first], root + 1, 1)
    return found


def perfect_hyperplane_entries(family: HyperplaneFamily) -> List[Tuple[int, int, int]]:
    """(members, intersection, hyperplanes containing it), ascending by members."""
    if family.perfect_cache is not None:
        return family.perfect_cache
    settings = get_settings()
    ensure_capacity(len(family), settings.max_circuits, "hyperplane family")
    limit = settings.max_perfect_collections
    shards = map_shards(lambda root: _perfect_from_root(family, root, limit), list(range(len(family))))
    found = [(0, family.base.full)] + [pair for shard in shards for pair in shard]
    found.sort()
    family.perfect_cache = [(members, meet, family.containing(meet)) for members, meet in found]
    return family.perfect_cache


def satisfies_dual_star(base: Matroid, space: HyperplaneSpaceMatroid) -> Verdict:
    family = space.family
    if family.base.size != base.size:
        raise MatroidError("N is defined on the hyperplanes of a different matroid")
    entries = perfect_hyperplane_entries(family)

    def scan(block) -> Optional[Tuple[int, int]]:
        for members, _, above in block:
            extra = above & ~members
            if not extra:
                continue
            current = space.rank(members)
            for i in bits(extra):
                if space.rank(members | (1 << i)) != current:
                    return members, i
        return None

    workers = get_settings().workers
    results = map_shards(scan, chunk(entries, workers * 4 if workers > 1 else 1))
    violation = next((r for r in results if r is not None), None)
    if violation is None:
        return Verdict.ok("dual_star", f"{len(entries)} perfect hyperplane collections")
    members, i = violation
    return Verdict.fail(
        "dual_star",
        "hyperplane containing the intersection is not in the N-closure",
        collection=family.as_lists(members),
        collection_indices=to_list(members),
        hyperplane=to_list(family[i]),
        hyperplane_index=i,
    )


class ProjectedMatroid(Matroid):
    def __init__(self, base: Matroid, space: HyperplaneSpaceMatroid, name: Optional[str] = None) -> None:
        self.base = base
        self.space = space
        drop = space.r
        family = space.family
        super().__init__(
            base.size,
            lambda X: base.rank(X) - drop + space.rank(family.containing(X)),
            name=name or f"{base.name}_{space.name}",
        )


def project(base: Matroid, space: HyperplaneSpaceMatroid, check: bool = True) -> ProjectedMatroid:
    if space.family.base.size != base.size:
        raise MatroidError("N is defined on the hyperplanes of a different matroid")
    if check:
        verdict = satisfies_dual_star(base, space)
        if not verdict.passed:
            raise StarConditionError(verdict)
    projected = ProjectedMatroid(base, space)
    logger.info("built projection %s of rank %d", projected.name, projected.r)
    return projected


# linear subclasses and the rank-1 case


def is_linear_subclass(family: HyperplaneFamily, members: int) -> Verdict:
    base = family.base
    for a, b in combinations(to_list(members), 2):
        meet = family[a] & family[b]
        if base.rank(meet) != base.r - 2:
            continue
        missing = family.containing(meet) & ~members
        if missing:
            return Verdict.fail(
                "linear_subclass",
                "a hyperplane through a corank-2 intersection of members is missing",
                h1=to_list(family[a]),
                h2=to_list(family[b]),
                h=to_list(family[lowest(missing)]),
            )
    return Verdict.ok("linear_subclass")


def crapo(base: Matroid, family: HyperplaneFamily, members: int) -> ProjectedMatroid:
    verdict = is_linear_subclass(family, members)
    if not verdict.passed:
        raise LinearClassError(verdict)
    return project(base, rank_one_hyperplane_N(family, members), check=False)


def crapo_formula(base: Matroid, family: HyperplaneFamily, members: int, subset: int) -> int:
    """Drop the rank by one exactly when every hyperplane through X is in the subclass.

    The full class gives a rank-0 N and the trivial quotient.
    """
    if members == family.full:
        return base.rank(subset)
    through = [i for i, h in enumerate(family.hyperplanes) if h & subset == subset]
    inside = all(members >> i & 1 for i in through)
    return base.rank(subset) - (1 if inside else 0)


# duality


def dual_circuit_N(space: HyperplaneSpaceMatroid) -> CircuitSpaceMatroid:
    """N transported to the circuits of the dual by H -> E - H."""
    family = space.family
    cocircuits = family.cocircuits
    return CircuitSpaceMatroid(
        cocircuits,
        Matroid(len(cocircuits), lambda S: space.rank(family.from_dual(S)), name=f"{space.name}'"),
    )


def duality_bridge(base: Matroid, space: HyperplaneSpaceMatroid) -> Verdict:
    """Compare the projection with the dual of the lift of the dual."""
    ensure_capacity(base.size)
    transported = dual_circuit_N(space)
    bridged = dual(lift(transported.family.base, transported, check=False))
    direct = project(base, space, check=False)
    verdict = equal_matroids(materialize(direct), materialize(bridged))
    if verdict.passed:
        return Verdict.ok("duality_bridge", f"{1 << base.size} subsets")
    return Verdict.fail("duality_bridge", "projection differs from the dualized lift", **(verdict.witness or {}))


def dual_star_equivalence(base: Matroid, space: HyperplaneSpaceMatroid) -> Verdict:
    direct = satisfies_dual_star(base, space)
    transported = dual_circuit_N(space)
    primal = satisfies_star(transported.family.base, transported)
    if direct.passed == primal.passed:
        return Verdict.ok("dual_star_equivalence", f"both {'pass' if direct.passed else 'fail'}")
    return Verdict.fail(
        "dual_star_equivalence",
        "hyperplane condition and dual circuit condition disagree",
        hyperplane_side=direct.passed,
        circuit_side=primal.passed,
    )


def projection_report(base: Matroid, space: HyperplaneSpaceMatroid) -> List[Verdict]:
    projected = materialize(project(base, space, check=False))
    verdicts = [check_rank_axioms(projected)]
    expected = base.r - space.r
    if projected.r == expected:
        verdicts.append(Verdict.ok("rank_drop"))
    else:
        verdicts.append(Verdict.fail("rank_drop", f"r = {projected.r}, expected {expected}"))
    verdicts.append(is_quotient(projected, base))
    verdicts.append(duality_bridge(base, space))
    return verdicts
