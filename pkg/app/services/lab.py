"""Exhaustive experiments on matroids with at most six elements.

The catalog lists every labelled matroid on ``{0..m-1}``; the searches test
whether a lift K of M arises from some N on the circuits of M.
"""

from __future__ import annotations

import logging
import time
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.schemas import LabReport, Verdict
from app.services.bitsets import bits, full, highest, mask_of, popcount, popcount_table, to_list
from app.services.lifts import CircuitSpaceMatroid, lift, satisfies_star
from app.services.matroids import (
    ExplicitMatroid,
    Matroid,
    MatroidError,
    circuits,
    dual,
    ensure_capacity,
    is_quotient,
    isomorphic,
    materialize,
    table_from_bases,
)
from app.services.projections import HyperplaneSpaceMatroid, hyperplanes, project, satisfies_dual_star
from app.services.workers import map_shards

logger = logging.getLogger(__name__)

# labelled matroids on m elements, m = 0..6
PUBLISHED_COUNTS = (1, 2, 5, 16, 68, 406, 3807)

MAX_FAMILY_CIRCUITS = 16
PREFIX_DEPTH = 4

Constraint = Tuple[int, int, int]


def _exchange_constraints(sets: Sequence[int]) -> Dict[int, List[Constraint]]:
    """Exchange requirements keyed by the last position they mention.

    ``(a, b, candidates)``: if sets a and b are both bases, one of the
    positions in ``candidates`` must be a basis too.
    """
    position = {s: t for t, s in enumerate(sets)}
    due: Dict[int, List[Constraint]] = {}
    for a, first in enumerate(sets):
        for b, second in enumerate(sets):
            if a == b:
                continue
            for x in bits(first & ~second):
                candidates = mask_of(
                    position[(first ^ (1 << x)) | (1 << y)] for y in bits(second & ~first)
                )
                step = max(a, b, highest(candidates))
                due.setdefault(step, []).append((a, b, candidates))
    return due


def _allowed(chosen: int, constraints: Sequence[Constraint]) -> bool:
    for a, b, candidates in constraints:
        if chosen >> a & 1 and chosen >> b & 1 and not chosen & candidates:
            return False
    return True


def _complete(count: int, due: Dict[int, List[Constraint]], depth: int, chosen: int) -> List[int]:
    found: List[int] = []

    def visit(t: int, current: int) -> None:
        if t == count:
            if current:
                found.append(current)
            return
        for nxt in (current, current | (1 << t)):
            if _allowed(nxt, due.get(t, ())):
                visit(t + 1, nxt)

    visit(depth, chosen)
    return found


@lru_cache(maxsize=None)
def _basis_families(m: int, r: int) -> Tuple[Tuple[int, ...], ...]:
    sets = [mask_of(c) for c in combinations(range(m), r)]
    count = len(sets)
    due = _exchange_constraints(sets)
    depth = min(count, PREFIX_DEPTH)
    prefixes = [0]
    for t in range(depth):
        prefixes = [nxt for p in prefixes for nxt in (p, p | (1 << t)) if _allowed(nxt, due.get(t, ()))]
    shards = map_shards(lambda prefix: _complete(count, due, depth, prefix), prefixes)
    chosen = sorted(c for shard in shards for c in shard)
    return tuple(tuple(sets[t] for t in bits(c)) for c in chosen)


def enumerate_matroids(m: int, r: int) -> List[ExplicitMatroid]:
    ensure_capacity(m, get_settings().max_lab_ground, "lab ground set")
    if not 0 <= r <= m:
        raise MatroidError(f"no rank-{r} matroids on {m} elements")
    families = _basis_families(m, r)
    logger.debug("%d matroids of rank %d on %d elements", len(families), r, m)
    return [
        ExplicitMatroid(m, table_from_bases(m, bases), name=f"M{m}r{r}#{k}")
        for k, bases in enumerate(families)
    ]


def catalog(m: int) -> List[ExplicitMatroid]:
    return [matroid for r in range(m + 1) for matroid in enumerate_matroids(m, r)]


def catalog_counts(m: int) -> Dict[int, int]:
    return {r: len(_basis_families(m, r)) for r in range(m + 1)}


def intermediate_matroids(lifted: Matroid, base: Matroid) -> List[ExplicitMatroid]:
    """Catalog matroids that are projections of ``lifted`` and lifts of ``base``."""
    ensure_capacity(lifted.size, get_settings().max_lab_ground, "lab ground set")
    verdict = is_quotient(base, lifted)
    if not verdict.passed:
        raise MatroidError(f"{base.name} is not a quotient of {lifted.name}: {verdict.witness}")
    found = []
    for r in range(base.r, lifted.r + 1):
        for candidate in enumerate_matroids(lifted.size, r):
            if is_quotient(candidate, lifted).passed and is_quotient(base, candidate).passed:
                found.append(candidate)
    return found


# independence families


def _family_ranks(independent: np.ndarray, count: int) -> np.ndarray:
    """Largest member of the family inside every subset."""
    counts = popcount_table(count).astype(np.int16)
    ranks = np.where(independent, counts, 0).astype(np.int16)
    index = np.arange(1 << count, dtype=np.int64)
    for e in range(count):
        bit = 1 << e
        has = (index & bit) != 0
        ranks[has] = np.maximum(ranks[has], ranks[index[has] ^ bit])
    return ranks


def independence_verdict(independent: np.ndarray, count: int) -> Verdict:
    """Hereditary and augmentation axioms, exhaustively."""
    index = np.arange(1 << count, dtype=np.int64)
    counts = popcount_table(count).astype(np.int16)
    if not independent[0]:
        return Verdict.fail("independence_axioms", "the empty set is missing", axiom="nonempty")
    for e in range(count):
        bit = 1 << e
        broken = independent & ((index & bit) != 0) & ~independent[index & ~bit]
        hits = np.flatnonzero(broken)
        if hits.size:
            member = int(hits[0])
            return Verdict.fail(
                "independence_axioms", "not hereditary", axiom="hereditary",
                member=to_list(member), missing=to_list(member ^ bit),
            )

    ranks = _family_ranks(independent, count)
    extendable = np.zeros(1 << count, dtype=np.int64)
    for e in range(count):
        bit = 1 << e
        grows = ((index & bit) == 0) & independent[index | bit]
        extendable |= np.where(grows, bit, 0)
    stuck = (full(count) & ~extendable)
    broken = independent & (ranks[stuck] > counts)
    hits = np.flatnonzero(broken)
    if hits.size:
        small = int(hits[0])
        region = int(stuck[small])
        target = int(ranks[region])
        large = next(
            T for T in range(1 << count)
            if T & region == T and independent[T] and popcount(T) == target
        )
        return Verdict.fail(
            "independence_axioms", "augmentation fails", axiom="augmentation",
            smaller=to_list(small), larger=to_list(large),
        )
    return Verdict.ok("independence_axioms", f"{int(independent.sum())} members")


def _recheck(independent: np.ndarray, verdict: Verdict) -> bool:
    """Confirm an axiom failure directly from its witness."""
    witness = verdict.witness or {}
    if witness.get("axiom") == "hereditary":
        return bool(independent[mask_of(witness["member"])]) and not independent[mask_of(witness["missing"])]
    if witness.get("axiom") == "augmentation":
        small, large = mask_of(witness["smaller"]), mask_of(witness["larger"])
        if not (independent[small] and independent[large]) or len(witness["larger"]) <= len(witness["smaller"]):
            return False
        return not any(independent[small | (1 << x)] for x in bits(large & ~small))
    return witness.get("axiom") == "nonempty" and not independent[0]


def _exclusion(count: int, blockers: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Members of the candidate family: subsets not blocked by any (mask, deficit)."""
    index = np.arange(1 << count, dtype=np.int64)
    sizes = popcount_table(count).astype(np.int64)
    blocked = np.zeros(1 << count, dtype=bool)
    for member_mask, deficit in blockers:
        blocked |= ((index & ~member_mask) == 0) & (sizes > deficit)
    return ~blocked


def _start(m: int) -> None:
    ensure_capacity(m, get_settings().max_lab_ground, "lab ground set")


def intermediate_lift_family(base: Matroid, lifted: Matroid, instance: Optional[str] = None) -> LabReport:
    _start(base.size)
    timings: Dict[str, float] = {}
    clock = time.perf_counter()
    base_t, lifted_t = materialize(base), materialize(lifted)
    family = circuits(base_t)
    count = len(family)
    ensure_capacity(count, MAX_FAMILY_CIRCUITS, "circuit family")

    middles = intermediate_matroids(lifted_t, base_t)
    blockers = []
    for middle in middles:
        kept = mask_of(i for i, c in enumerate(family) if middle.is_circuit(c))
        blockers.append((kept, lifted_t.r - middle.r))
    independent = _exclusion(count, blockers)
    timings["family"] = time.perf_counter() - clock

    members = [int(S) for S in np.flatnonzero(independent)]
    report = dict(
        instance=instance or f"{base.name} -> {lifted.name}",
        conjecture="c73",
        circuit_count=count,
        family_size=len(members),
        family=[to_list(S) for S in members],
    )
    verdict = independence_verdict(independent, count)
    report["is_matroid"] = verdict
    if not verdict.passed:
        status = "COUNTEREXAMPLE-CANDIDATE" if _recheck(independent, verdict) else "NO_WITNESS_WITHIN_CAPACITY"
        timings["total"] = time.perf_counter() - clock
        return LabReport(status=status, runtimes=timings, witnesses=[verdict.witness or {}], **report)

    ranks = _family_ranks(independent, count).astype(np.uint8)
    N = ExplicitMatroid(count, ranks, name="N(I)")
    space = CircuitSpaceMatroid(family, N)
    star = satisfies_star(base_t, space)
    report.update(star=star, n_rank=N.r)
    timings["star"] = time.perf_counter() - clock
    if not star.passed:
        timings["total"] = time.perf_counter() - clock
        return LabReport(status="NO_WITNESS_WITHIN_CAPACITY", runtimes=timings, **report)

    permutation = isomorphic(lift(base_t, space, check=False), lifted_t)
    timings["total"] = time.perf_counter() - clock
    status = "CONFIRMED" if permutation is not None else "NO_WITNESS_WITHIN_CAPACITY"
    logger.info("c73 on %s: %s", report["instance"], status)
    return LabReport(
        status=status,
        isomorphic=permutation is not None,
        permutation=permutation,
        runtimes=timings,
        **report,
    )


def witness_search(base: Matroid, lifted: Matroid, instance: Optional[str] = None) -> LabReport:
    _start(base.size)
    clock = time.perf_counter()
    base_t, lifted_t = materialize(base), materialize(lifted)
    family = circuits(base_t)
    ensure_capacity(len(family), get_settings().max_lab_circuits, "circuit family")
    target = lifted_t.r - base_t.r
    if target < 0:
        raise MatroidError(f"{lifted.name} has smaller rank than {base.name}")

    witnesses = []
    for k, candidate in enumerate(enumerate_matroids(len(family), target)):
        space = CircuitSpaceMatroid(family, candidate)
        if not satisfies_star(base_t, space).passed:
            continue
        permutation = isomorphic(lift(base_t, space, check=False), lifted_t)
        if permutation is not None:
            bases = [to_list(B) for B in range(1 << len(family))
                     if candidate.rank(B) == target == popcount(B)]
            witnesses.append({"candidate": k, "n_bases": bases, "permutation": permutation})
    status = "CONFIRMED" if witnesses else "NO_WITNESS_WITHIN_CAPACITY"
    return LabReport(
        instance=instance or f"{base.name} -> {lifted.name}",
        conjecture="c72",
        status=status,
        circuit_count=len(family),
        n_rank=target,
        isomorphic=bool(witnesses),
        witnesses=witnesses,
        runtimes={"total": time.perf_counter() - clock},
    )


def _direct_hyperplane_family(top: ExplicitMatroid, bottom: ExplicitMatroid, planes) -> np.ndarray:
    count = len(planes)
    blockers = []
    for middle in intermediate_matroids(top, bottom):
        own = set(hyperplanes(middle, cross_check=False).hyperplanes)
        kept = mask_of(i for i, h in enumerate(planes) if h in own)
        blockers.append((kept, middle.r - bottom.r))
    return _exclusion(count, blockers)


def hyperplane_family_check(lifted: Matroid, base: Matroid, instance: Optional[str] = None) -> LabReport:
    """The hyperplane form, run through duality and checked against a direct computation."""
    _start(lifted.size)
    clock = time.perf_counter()
    top, bottom = materialize(lifted), materialize(base)
    verdict = is_quotient(bottom, top)
    if not verdict.passed:
        raise MatroidError(f"{base.name} is not a projection of {lifted.name}: {verdict.witness}")

    primal = intermediate_lift_family(materialize(dual(top)), materialize(dual(bottom)))
    planes = hyperplanes(top)
    name = instance or f"{lifted.name} -> {base.name}"
    report = primal.model_dump()
    report.update(instance=name, conjecture="dual-c82", witnesses=list(primal.witnesses))

    transported = np.zeros(1 << len(planes), dtype=bool)
    for members in primal.family or []:
        transported[planes.from_dual(mask_of(members))] = True
    direct = _direct_hyperplane_family(top, bottom, planes.hyperplanes)
    agrees = bool(np.array_equal(direct, transported))
    report["witnesses"].append({"check": "direct_hyperplane_family", "passed": agrees})
    report["family"] = [to_list(S) for S in np.flatnonzero(transported).tolist()]

    if primal.status != "CONFIRMED":
        report["runtimes"] = {**primal.runtimes, "total": time.perf_counter() - clock}
        return LabReport(**report)

    ranks = _family_ranks(transported, len(planes)).astype(np.uint8)
    space = HyperplaneSpaceMatroid(planes, ExplicitMatroid(len(planes), ranks, name="N(I)"))
    star = satisfies_dual_star(top, space)
    permutation = isomorphic(project(top, space, check=False), bottom) if star.passed else None
    report.update(
        star=star,
        isomorphic=permutation is not None,
        permutation=permutation,
        status="CONFIRMED" if permutation is not None and agrees else "NO_WITNESS_WITHIN_CAPACITY",
        runtimes={**primal.runtimes, "total": time.perf_counter() - clock},
    )
    return LabReport(**report)
