"""Lifts of a matroid M built from a matroid N on the circuits of M.

The lifted rank of a set X is ``r_M(X) + r_N(circuits of M|X)``. It is a
matroid whenever N satisfies the star condition: for every perfect
collection of circuits, each circuit inside its union lies in the N-closure
of the collection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Tuple

from app.config import get_settings
from app.schemas import Verdict
from app.services.bitsets import bits, lowest, mask_of, popcount, to_list
from app.services.matroids import (
    CapacityError,
    CircuitFamily,
    Matroid,
    MatroidError,
    check_rank_axioms,
    circuits,
    ensure_capacity,
    graphic,
    is_quotient,
    materialize,
    restrict,
)
from app.services.workers import chunk, map_shards

logger = logging.getLogger(__name__)

# (members, union of members, circuits contained in the union)
PerfectEntry = Tuple[int, int, int]


class StarConditionError(MatroidError):
    def __init__(self, verdict: Verdict) -> None:
        super().__init__(f"star condition fails: {verdict.witness}")
        self.verdict = verdict


class LinearClassError(MatroidError):
    def __init__(self, verdict: Verdict) -> None:
        super().__init__(f"not a linear class: {verdict.witness}")
        self.verdict = verdict


@dataclass(eq=False)
class CircuitSpaceMatroid:
    """A matroid N whose element i is circuit i of ``family``."""

    family: CircuitFamily
    matroid: Matroid

    def __post_init__(self) -> None:
        if self.matroid.size != len(self.family):
            raise MatroidError(
                f"N has {self.matroid.size} elements but M has {len(self.family)} circuits"
            )

    @property
    def name(self) -> str:
        return self.matroid.name

    @property
    def r(self) -> int:
        return self.matroid.r

    def rank(self, members: int) -> int:
        return self.matroid.rank(members)

    def with_matroid(self, matroid: Matroid) -> "CircuitSpaceMatroid":
        return CircuitSpaceMatroid(self.family, matroid)


@dataclass(frozen=True)
class PerfectCollection:
    family: CircuitFamily
    members: int
    union: int

    def __len__(self) -> int:
        return popcount(self.members)

    def as_lists(self) -> List[List[int]]:
        return self.family.as_lists(self.members)


@dataclass(frozen=True)
class LinearClass:
    family: CircuitFamily
    members: int


class LiftedMatroid(Matroid):
    def __init__(self, base: Matroid, space: CircuitSpaceMatroid, name: Optional[str] = None) -> None:
        self.base = base
        self.space = space
        self._restriction_circuits: Dict[int, int] = {}
        super().__init__(
            base.size,
            lambda X: base.rank(X) + space.rank(self.circuits_of_restriction(X)),
            name=name or f"{base.name}^{space.name}",
        )

    def circuits_of_restriction(self, subset: int) -> int:
        found = self._restriction_circuits.get(subset)
        if found is None:
            found = self.space.family.inside(subset)
            self._restriction_circuits[subset] = found
        return found


# circuit-space builders


def zero_N(family: CircuitFamily) -> CircuitSpaceMatroid:
    return CircuitSpaceMatroid(family, Matroid(len(family), lambda S: 0, name="zero"))


def free_N(family: CircuitFamily) -> CircuitSpaceMatroid:
    return CircuitSpaceMatroid(family, Matroid(len(family), popcount, name="free"))


def uniform_N(family: CircuitFamily, rank: int) -> CircuitSpaceMatroid:
    if rank < 0 or rank > len(family):
        raise MatroidError(f"no rank-{rank} uniform matroid on {len(family)} circuits")
    return CircuitSpaceMatroid(
        family, Matroid(len(family), lambda S: min(popcount(S), rank), name=f"U{rank},{len(family)}")
    )


def rank_one_N(family: CircuitFamily, loops: int) -> CircuitSpaceMatroid:
    """Rank-1 N whose loops are ``loops``; all other circuits are parallel."""
    live = family.full & ~loops
    return CircuitSpaceMatroid(
        family, Matroid(len(family), lambda S: 1 if S & live else 0, name="rank1")
    )


def pairs_graphic_N(family: CircuitFamily) -> CircuitSpaceMatroid:
    """Graphic matroid whose edges are the 2-element circuits."""
    edges = []
    for c in family:
        if popcount(c) != 2:
            raise MatroidError(f"circuit {to_list(c)} is not a 2-element set")
        edges.append(tuple(to_list(c)))
    return CircuitSpaceMatroid(family, graphic(edges, name=f"M(K{family.base.size})"))


def rank3_N(base: Matroid, family: Optional[CircuitFamily] = None) -> CircuitSpaceMatroid:
    """Rank-3 N: at most three circuits, every subfamily within the nullity of its union."""
    if base.corank < 3:
        raise MatroidError(f"rank3_N needs corank at least 3, {base.name} has corank {base.corank}")
    family = family or circuits(base)
    count = len(family)
    triples = [
        mask_of(combo)
        for combo in combinations(range(count), 3)
        if base.nullity(family.union(mask_of(combo))) >= 3
    ]
    triple_set = set(triples)

    def rank(members: int) -> int:
        size = popcount(members)
        if size < 3:
            return size
        if comb(size, 3) <= len(triples):
            found = any(mask_of(c) in triple_set for c in combinations(to_list(members), 3))
        else:
            found = any(t & members == t for t in triples)
        return 3 if found else 2

    matroid = Matroid(count, rank, name="rank3")
    singles = [1 << i for i in range(count)]
    pairs = [mask_of(c) for c in combinations(range(count), 2)]
    matroid.independent_family = [0] + singles + pairs + triples
    return CircuitSpaceMatroid(family, matroid)


# perfect collections


def is_perfect(family: CircuitFamily, members: int) -> bool:
    base = family.base
    union = family.union(members)
    if base.nullity(union) != popcount(members):
        return False
    for i in bits(members):
        if not family[i] & ~family.union(members ^ (1 << i)):
            return False
    return True


def fundamental_circuits(base: Matroid, basis: int, family: Optional[CircuitFamily] = None) -> PerfectCollection:
    if not (base.rank(basis) == popcount(basis) == base.r):
        raise MatroidError(f"{to_list(basis)} is not a basis of {base.name}")
    family = family or circuits(base)
    members = 0
    for e in bits(base.full & ~basis):
        grown = basis | (1 << e)
        total = base.rank(grown)
        circuit = mask_of(f for f in bits(grown) if base.rank(grown ^ (1 << f)) == total)
        members |= 1 << family.index(circuit)
    return PerfectCollection(family, members, family.union(members))


def _perfect_from_root(family: CircuitFamily, root: int, limit: int) -> List[Tuple[int, int]]:
    """Perfect collections whose least member is ``root``.

    Perfection is hereditary: a member keeps its private element in every
    subfamily, and each private element raises the nullity by at least one.
    So the search only grows collections that are already perfect.
    """
    base = family.base
    circs = family.circuits
    count = len(circs)
    found: List[Tuple[int, int]] = []

    def grow(members: int, union: int, privates: List[int], start: int, size: int) -> None:
        for j in range(start, count):
            c = circs[j]
            fresh = c & ~union
            if not fresh:
                continue
            if any(not p & ~c for p in privates):
                continue
            new_union = union | c
            if base.nullity(new_union) != size + 1:
                continue
            new_members = members | (1 << j)
            found.append((new_members, new_union))
            if len(found) > limit:
                raise CapacityError(f"more than {limit} perfect collections")
            grow(new_members, new_union, [p & ~c for p in privates] + [fresh], j + 1, size + 1)

    c = circs[root]
    found.append((1 << root, c))
    grow(1 << root, c, [c], root + 1, 1)
    return found


def perfect_entries(family: CircuitFamily) -> List[PerfectEntry]:
    """All perfect collections in ascending member-mask order, cached on the family."""
    if family.perfect_cache is not None:
        return family.perfect_cache
    settings = get_settings()
    ensure_capacity(len(family), settings.max_circuits, "circuit family")
    limit = settings.max_perfect_collections
    shards = map_shards(lambda root: _perfect_from_root(family, root, limit), list(range(len(family))))
    found = [(0, 0)] + [pair for shard in shards for pair in shard]
    if len(found) > limit:
        raise CapacityError(f"more than {limit} perfect collections")
    found.sort()
    entries = [(members, union, family.inside(union)) for members, union in found]
    logger.debug("%s: %d perfect collections", family.base.name, len(entries))
    family.perfect_cache = entries
    return entries


def enumerate_perfect(family: CircuitFamily) -> List[PerfectCollection]:
    return [PerfectCollection(family, members, union) for members, union, _ in perfect_entries(family)]


def satisfies_star(base: Matroid, space: CircuitSpaceMatroid) -> Verdict:
    family = space.family
    if family.base.size != base.size:
        raise MatroidError("N is defined on the circuits of a different matroid")
    entries = perfect_entries(family)

    def scan(block) -> Optional[Tuple[int, int]]:
        for members, _, inside in block:
            extra = inside & ~members
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
        return Verdict.ok("star", f"{len(entries)} perfect collections")
    members, i = violation
    return Verdict.fail(
        "star",
        "circuit inside the union of a perfect collection is not in its N-closure",
        collection=family.as_lists(members),
        collection_indices=to_list(members),
        circuit=to_list(family[i]),
        circuit_index=i,
    )


def lift(base: Matroid, space: CircuitSpaceMatroid, check: bool = True) -> LiftedMatroid:
    if space.family.base.size != base.size:
        raise MatroidError("N is defined on the circuits of a different matroid")
    if check:
        verdict = satisfies_star(base, space)
        if not verdict.passed:
            raise StarConditionError(verdict)
    lifted = LiftedMatroid(base, space)
    logger.info("built lift %s of rank %d", lifted.name, lifted.r)
    return lifted


# linear classes and the rank-1 case


def is_linear_class(family: CircuitFamily, members: int) -> Verdict:
    base = family.base
    for a, b in combinations(to_list(members), 2):
        union = family[a] | family[b]
        if base.nullity(union) != 2:
            continue
        missing = family.inside(union) & ~members
        if missing:
            c = lowest(missing)
            return Verdict.fail(
                "linear_class",
                "a circuit inside a corank-2 union of members is missing",
                c1=to_list(family[a]),
                c2=to_list(family[b]),
                c=to_list(family[c]),
            )
    return Verdict.ok("linear_class")


def brylawski(base: Matroid, linear_class: LinearClass, check: bool = False) -> LiftedMatroid:
    verdict = is_linear_class(linear_class.family, linear_class.members)
    if not verdict.passed:
        raise LinearClassError(verdict)
    space = rank_one_N(linear_class.family, linear_class.members)
    return lift(base, space, check=check)


def restriction_circuits(base: Matroid, subset: int) -> List[int]:
    """Circuits of M|X computed from scratch on the restriction."""
    restricted = restrict(base, subset)
    elements = restricted.elements
    return [mask_of(elements[i] for i in bits(c)) for c in circuits(restricted)]


def brylawski_formula(base: Matroid, linear_class: LinearClass, subset: int) -> int:
    """Elementary-lift rank: add one unless every circuit of M|X is in the class."""
    family = linear_class.family
    inside = restriction_circuits(base, subset)
    in_class = all(linear_class.members >> family.index(c) & 1 for c in inside)
    return base.rank(subset) + (0 if in_class else 1)


def independence_by_collections(base: Matroid, space: CircuitSpaceMatroid, subset: int) -> bool:
    """X is independent iff some N-independent set of nullity(X) circuits of M|X exists."""
    family = space.family
    need = base.nullity(subset)
    if need == 0:
        return True
    available = [family.index(c) for c in restriction_circuits(base, subset)]
    return any(
        space.rank(mask_of(combo)) == need for combo in combinations(available, need)
    )


def elementary_lift_class(base: Matroid, lifted: Matroid, family: Optional[CircuitFamily] = None) -> int:
    """Circuits of M that are still circuits of the lift."""
    family = family or circuits(base)
    return mask_of(i for i, c in enumerate(family) if lifted.is_circuit(c))


def lift_report(base: Matroid, space: CircuitSpaceMatroid) -> List[Verdict]:
    """Every property a star-satisfying lift must have, checked exhaustively."""
    lifted = lift(base, space, check=False)
    table = materialize(lifted)
    family = space.family
    verdicts = [check_rank_axioms(table)]

    expected = base.r + space.r
    if lifted.r == expected:
        verdicts.append(Verdict.ok("rank_sum"))
    else:
        verdicts.append(Verdict.fail("rank_sum", f"r = {lifted.r}, expected {expected}"))

    verdicts.append(is_quotient(base, table))

    mismatch = next(
        (X for X in range(1 << base.size)
         if table.is_independent(X) != independence_by_collections(base, space, X)),
        None,
    )
    if mismatch is None:
        verdicts.append(Verdict.ok("independence_characterization"))
    else:
        verdicts.append(
            Verdict.fail("independence_characterization", "rank formula disagrees", subset=to_list(mismatch))
        )

    loops = mask_of(i for i in range(len(family)) if space.rank(1 << i) == 0)
    kept = elementary_lift_class(base, table, family)
    if loops == kept:
        verdicts.append(Verdict.ok("loops_are_kept_circuits"))
    else:
        verdicts.append(
            Verdict.fail("loops_are_kept_circuits", "loops of N differ from surviving circuits",
                         loops=to_list(loops), kept=to_list(kept))
        )

    bad = next((d for d in circuits(table) if family.union(family.inside(d)) != d), None)
    if bad is None:
        verdicts.append(Verdict.ok("circuits_are_unions"))
    else:
        verdicts.append(Verdict.fail("circuits_are_unions", "lift circuit is not a union", circuit=to_list(bad)))
    return verdicts
