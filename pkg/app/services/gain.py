"""Group-labelled complete graphs K_n^G and the matroids built on them.

Edges are triples ``(i, j, a)`` with ``1 <= i < j <= n`` oriented from i to
j and labelled by group element index ``a``; edge indices run
lexicographically over ``(i, j, a)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Dict, FrozenSet, List, Sequence, Tuple

import networkx as nx

from app.config import get_settings
from app.schemas import CycleOut, TildeReport, Verdict
from app.services.bitsets import bits, lowest, mask_of, popcount, to_list
from app.services.fields import FiniteField, FieldMatrix, galois_field, normalize, projective_points
from app.services.groups import FiniteGroup, elementary_abelian, elementary_abelian_exponent
from app.services.lifts import (
    CircuitSpaceMatroid,
    LiftedMatroid,
    LinearClass,
    brylawski,
    lift,
)
from app.services.matroids import (
    CapacityError,
    CircuitFamily,
    InvariantViolation,
    Matroid,
    MatroidError,
    circuits,
    closure,
    ensure_capacity,
    equal_matroids,
    graphic,
    is_quotient,
    projective_geometry,
    truncate,
)

logger = logging.getLogger(__name__)


class GainGraphError(ValueError):
    """Raised for invalid gain-graph parameters or preconditions."""


@dataclass(frozen=True)
class Cycle:
    index: int
    mask: int
    # vertices in traversal order; walk[t] joins vertices[t] and vertices[t + 1]
    vertices: Tuple[int, ...]
    walk: Tuple[int, ...]

    @property
    def edges(self) -> List[int]:
        return to_list(self.mask)

    def __len__(self) -> int:
        return len(self.walk)


@dataclass(frozen=True)
class CycleValue:
    cycle: Cycle
    values: FrozenSet[int]

    @property
    def balanced(self) -> bool:
        return 0 in self.values


@dataclass(frozen=True, eq=False)
class GainGraph:
    n: int
    group: FiniteGroup
    edges: Tuple[Tuple[int, int, int], ...] = field(init=False, repr=False)
    matroid: Matroid = field(init=False, repr=False)
    _pairs: Dict[Tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        pairs = list(combinations(range(1, self.n + 1), 2))
        edges = tuple((i, j, a) for i, j in pairs for a in self.group.elements)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_pairs", {pair: k for k, pair in enumerate(pairs)})
        object.__setattr__(
            self,
            "matroid",
            graphic([(i, j) for i, j, _ in edges], name=f"M(K{self.n}^{self.group.name})"),
        )

    @property
    def name(self) -> str:
        return f"K{self.n}^{self.group.name}"

    @property
    def size(self) -> int:
        return len(self.edges)

    def edge_index(self, i: int, j: int, label: int) -> int:
        if i > j:
            i, j = j, i
        return self._pairs[(i, j)] * self.group.order + label

    def edge_label(self, e: int) -> str:
        i, j, a = self.edges[e]
        return f"{self.group.label(a)}_{i}{j}"

    @cached_property
    def cycles(self) -> List[Cycle]:
        return enumerate_cycles(self)

    @cached_property
    def values(self) -> List[CycleValue]:
        return [phi(self, c) for c in self.cycles]

    @cached_property
    def family(self) -> CircuitFamily:
        return CircuitFamily(self.matroid, tuple(c.mask for c in self.cycles))

    @cached_property
    def balanced_mask(self) -> int:
        """Index mask of the balanced cycles."""
        return mask_of(v.cycle.index for v in self.values if v.balanced)


def build_gain_graph(n: int, group: FiniteGroup) -> GainGraph:
    if n < 3:
        raise GainGraphError("a gain graph needs at least 3 vertices")
    graph = GainGraph(n, group)
    logger.debug("built %s with %d edges", graph.name, graph.size)
    return graph


def _canonical_rotation(vertices: Sequence[int]) -> Tuple[int, ...]:
    k = len(vertices)
    start = vertices.index(min(vertices))
    turned = [vertices[(start + t) % k] for t in range(k)]
    if turned[1] > turned[-1]:
        turned = [turned[0]] + turned[:0:-1]
    return tuple(turned)


def enumerate_cycles(graph: GainGraph) -> List[Cycle]:
    settings = get_settings()
    if graph.n > settings.max_gain_vertices:
        raise CapacityError(f"{graph.n} vertices exceeds capacity {settings.max_gain_vertices}")
    if graph.group.order > settings.max_gain_group_order:
        raise CapacityError(
            f"group order {graph.group.order} exceeds capacity {settings.max_gain_group_order}"
        )
    order = graph.group.order
    found: List[Tuple[int, Tuple[int, ...], Tuple[int, ...]]] = []

    for i, j in combinations(range(1, graph.n + 1), 2):
        for a, b in combinations(range(order), 2):
            walk = (graph.edge_index(i, j, a), graph.edge_index(i, j, b))
            found.append((mask_of(walk), (i, j), walk))

    for ring in nx.simple_cycles(nx.complete_graph(range(1, graph.n + 1))):
        vertices = _canonical_rotation(ring)
        k = len(vertices)
        steps = [(vertices[t], vertices[(t + 1) % k]) for t in range(k)]
        for labels in product(range(order), repeat=k):
            walk = tuple(graph.edge_index(u, v, a) for (u, v), a in zip(steps, labels))
            found.append((mask_of(walk), vertices, walk))

    found.sort()
    cycles = [Cycle(index, mask, vertices, walk) for index, (mask, vertices, walk) in enumerate(found)]
    logger.debug("%s has %d cycles", graph.name, len(cycles))
    return cycles


def verify_cycles(graph: GainGraph) -> Verdict:
    """Compare the cycle list with the circuits of the graphic matroid."""
    ensure_capacity(graph.size)
    expected = circuits(graph.matroid).circuits
    listed = tuple(c.mask for c in graph.cycles)
    if listed == expected:
        return Verdict.ok("cycles", f"{len(listed)} cycles")
    missing = sorted(set(expected) - set(listed))
    extra = sorted(set(listed) - set(expected))
    return Verdict.fail(
        "cycles",
        "cycle list differs from graphic circuits",
        missing=[to_list(c) for c in missing[:5]],
        extra=[to_list(c) for c in extra[:5]],
    )


def phi(graph: GainGraph, cycle: Cycle) -> CycleValue:
    """Values of all simple closed walks around ``cycle``, both directions."""
    group = graph.group
    k = len(cycle.walk)
    steps = []
    for t, e in enumerate(cycle.walk):
        i, j, a = graph.edges[e]
        forward = cycle.vertices[t] == i and cycle.vertices[(t + 1) % k] == j
        steps.append(a if forward else group.inverse(a))
    backwards = [group.inverse(s) for s in steps]

    values = set()
    for start in range(k):
        value = 0
        for s in range(k):
            value = group.compose(value, steps[(start + s) % k])
        values.add(value)
        value = 0
        for s in range(k):
            value = group.compose(value, backwards[(start - s) % k])
        values.add(value)
    return CycleValue(cycle, frozenset(values))


def is_balanced(graph: GainGraph, cycle: Cycle) -> bool:
    return phi(graph, cycle).balanced


def cycle_rows(graph: GainGraph) -> List[CycleOut]:
    return [
        CycleOut(
            index=v.cycle.index,
            edges=v.cycle.edges,
            vertices=list(v.cycle.vertices),
            values=sorted(graph.group.label(a) for a in v.values),
            balanced=v.balanced,
        )
        for v in graph.values
    ]


def check_phi_values(graph: GainGraph) -> Verdict:
    group = graph.group
    for v in graph.values:
        if any(group.inverse(a) not in v.values for a in v.values):
            return Verdict.fail("phi", "value set not closed under inverses", cycle=v.cycle.edges)
        if group.is_abelian and len(v.values) > 2:
            return Verdict.fail("phi", "more than two values in an abelian group", cycle=v.cycle.edges)
    return Verdict.ok("phi")


def theta_pairs(graph: GainGraph) -> List[Tuple[int, int, int]]:
    """Triples of cycle indices forming theta subgraphs, each listed once."""
    by_mask = {c.mask: c.index for c in graph.cycles}
    base = graph.matroid
    thetas = []
    cycles = graph.cycles
    for first, second in combinations(cycles, 2):
        if not first.mask & second.mask:
            continue
        third = by_mask.get(first.mask ^ second.mask)
        if third is None or third < second.index:
            continue
        if base.nullity(first.mask | second.mask) == 2:
            thetas.append((first.index, second.index, third))
    return thetas


def check_theta_property(graph: GainGraph) -> Verdict:
    balanced = graph.balanced_mask
    thetas = theta_pairs(graph)
    for triple in thetas:
        if sum(balanced >> c & 1 for c in triple) == 2:
            return Verdict.fail(
                "theta",
                "theta subgraph with exactly two balanced cycles",
                cycles=[graph.cycles[c].edges for c in triple],
            )
    return Verdict.ok("theta", f"{len(thetas)} theta subgraphs")


def _direct_lift_matroid(graph: GainGraph) -> Matroid:
    base = graph.matroid
    balanced = {graph.cycles[i].mask for i in bits(graph.balanced_mask)}

    def independent(subset: int) -> bool:
        extra = base.nullity(subset)
        if extra == 0:
            return True
        if extra > 1:
            return False
        total = base.rank(subset)
        cycle = mask_of(e for e in bits(subset) if base.rank(subset ^ (1 << e)) == total)
        return cycle not in balanced

    def rank(subset: int) -> int:
        chosen = 0
        for e in bits(subset):
            if independent(chosen | (1 << e)):
                chosen |= 1 << e
        return popcount(chosen)

    return Matroid(graph.size, rank, name=f"LG({graph.n},{graph.group.name}) direct")


def lift_matroid_LG(graph: GainGraph) -> LiftedMatroid:
    """Lift matroid of the balanced cycles, built two ways and compared."""
    ensure_capacity(graph.size)
    balanced_class = LinearClass(graph.family, graph.balanced_mask)
    result = brylawski(graph.matroid, balanced_class)
    result.name = f"LG({graph.n},{graph.group.name})"
    direct = _direct_lift_matroid(graph)
    verdict = equal_matroids(direct, result)
    if not verdict.passed:
        raise InvariantViolation(f"lift matroid constructions disagree: {verdict.witness}")
    if result.r != graph.n:
        raise InvariantViolation(f"{result.name} has rank {result.r}, expected {graph.n}")
    result.graph = graph
    return result


@dataclass(frozen=True, eq=False)
class LabelProjection:
    """Z_p^j onto the points of PG(j/i - 1, p^i) by consecutive coordinate blocks."""

    p: int
    j: int
    i: int
    gf: FiniteField = field(repr=False)
    points: FieldMatrix = field(repr=False)
    lookup: Dict[Tuple[int, ...], int] = field(repr=False)

    @property
    def blocks(self) -> int:
        return self.j // self.i

    def vector(self, coordinates: Sequence[int]) -> Tuple[int, ...]:
        if len(coordinates) != self.j:
            raise GainGraphError(f"expected {self.j} coordinates, got {len(coordinates)}")
        return tuple(
            sum(int(c) * self.p**t for t, c in enumerate(coordinates[b * self.i:(b + 1) * self.i]))
            for b in range(self.blocks)
        )

    def point_of(self, coordinates: Sequence[int]) -> int:
        vector = self.vector(coordinates)
        if not any(vector):
            raise GainGraphError("the identity has no projective point")
        return self.lookup[normalize(self.gf, vector)]


def label_projection(p: int, j: int, i: int) -> LabelProjection:
    if i < 1 or j < 1 or j % i:
        raise GainGraphError(f"{i} does not divide {j}")
    gf = galois_field(p, i)
    points = projective_points(j // i, gf)
    lookup = {tuple(int(v) for v in points.entries[:, k]): k for k in range(points.cols)}
    return LabelProjection(p, j, i, gf, points, lookup)


def verify_label_projection(projection: LabelProjection) -> Verdict:
    """The block map is an additive bijection onto GF(p^i)^(j/i)."""
    p, j = projection.p, projection.j
    if p**j > 4096:
        return Verdict.ok("label_projection", "skipped above 4096 elements")
    gf = projection.gf
    elements = list(product(range(p), repeat=j))
    images = {projection.vector(a) for a in elements}
    if len(images) != len(elements):
        return Verdict.fail("label_projection", "block map is not injective")
    for a, b in combinations(elements, 2):
        total = tuple((x + y) % p for x, y in zip(a, b))
        summed = tuple(gf.add(x, y) for x, y in zip(projection.vector(a), projection.vector(b)))
        if projection.vector(total) != summed:
            return Verdict.fail("label_projection", "block map is not additive", a=list(a), b=list(b))
    return Verdict.ok("label_projection", f"Z{p}^{j} onto GF({gf.order})^{projection.blocks}")


def _require_elementary(graph: GainGraph, projection: LabelProjection) -> None:
    if graph.group.factors != (projection.p,) * projection.j:
        raise GainGraphError(f"{graph.group.name} is not Z{projection.p}^{projection.j}")


def g_i(graph: GainGraph, cycle: Cycle, projection: LabelProjection) -> int:
    """Projective point of an unbalanced cycle; both walk values must agree."""
    _require_elementary(graph, projection)
    value = phi(graph, cycle)
    if value.balanced:
        raise GainGraphError(f"cycle {cycle.edges} is balanced")
    hits = {projection.point_of(graph.group.coordinates(a)) for a in value.values}
    if len(hits) != 1:
        raise InvariantViolation(f"cycle {cycle.edges} maps to points {sorted(hits)}")
    return hits.pop()


def build_N(graph: GainGraph, projection: LabelProjection, points_matroid: Matroid) -> CircuitSpaceMatroid:
    """Rank of a cycle set is the rank of the points hit by its unbalanced members."""
    _require_elementary(graph, projection)
    if points_matroid.size != projection.points.cols:
        raise MatroidError(
            f"K has {points_matroid.size} elements but the geometry has {projection.points.cols} points"
        )
    point_bits = [
        0 if v.balanced else 1 << g_i(graph, v.cycle, projection) for v in graph.values
    ]

    def rank(members: int) -> int:
        image = 0
        for c in bits(members):
            image |= point_bits[c]
        return points_matroid.rank(image)

    name = f"N({graph.n},{projection.j},{projection.p},{points_matroid.name})"
    return CircuitSpaceMatroid(graph.family, Matroid(len(graph.cycles), rank, name=name))


def _lift_limits(n: int, order: int) -> None:
    settings = get_settings()
    if n > settings.max_lift_vertices:
        raise CapacityError(f"{n} vertices exceeds lift capacity {settings.max_lift_vertices}")
    if order > settings.max_lift_group_order:
        raise CapacityError(f"group order {order} exceeds lift capacity {settings.max_lift_group_order}")


def circuit_trace(matroid: Matroid, graph: GainGraph) -> Verdict:
    """Cycles that are circuits of ``matroid`` must be exactly the balanced ones."""
    for v in graph.values:
        if matroid.is_circuit(v.cycle.mask) != v.balanced:
            return Verdict.fail(
                "circuit_trace",
                "balanced cycle is not a circuit" if v.balanced else "unbalanced cycle is a circuit",
                cycle=v.cycle.edges,
            )
    return Verdict.ok("circuit_trace")


def divisor_lift(n: int, p: int, j: int, i: int, t: int = 0, check: bool = True) -> LiftedMatroid:
    """Lift of M(K_n^{Z_p^j}) by the t-th truncation of PG(j/i - 1, p^i)."""
    _lift_limits(n, p**j)
    projection = label_projection(p, j, i)
    graph = build_gain_graph(n, elementary_abelian(p, j))
    points = truncate(projective_geometry(projection.blocks, projection.gf), t)
    space = build_N(graph, projection, points)
    result = lift(graph.matroid, space, check=check)
    result.graph = graph
    return result


def projective_lift(n: int, p: int, j: int, i: int, check: bool = True) -> LiftedMatroid:
    """Rank-i lift of M(K_n^{Z_p^j}) whose circuits among cycles are the balanced ones."""
    if not 1 <= i <= j:
        raise GainGraphError(f"need 1 <= i <= j, got i={i}, j={j}")
    result = divisor_lift(n, p, j, 1, t=j - i, check=check)
    result.name = f"T({n},{p},{j},{i})"
    if result.r != n - 1 + i:
        raise InvariantViolation(f"{result.name} has rank {result.r}, expected {n - 1 + i}")
    trace = circuit_trace(result, result.graph)
    if not trace.passed:
        raise InvariantViolation(f"{result.name}: {trace.detail} {trace.witness}")
    logger.info("built %s of rank %d", result.name, result.r)
    return result


def edge_subset(graph: GainGraph, labels) -> int:
    wanted = set(labels)
    return mask_of(e for e, (_, _, a) in enumerate(graph.edges) if a in wanted)


def class_membership(matroid: Matroid, graph: GainGraph) -> Verdict:
    if matroid.size != graph.size:
        raise MatroidError(f"ground sets differ: {matroid.size} vs {graph.size} elements")
    quotient = is_quotient(graph.matroid, matroid)
    if not quotient.passed:
        return Verdict.fail("class_membership", "not a lift of the graphic matroid", **(quotient.witness or {}))
    trace = circuit_trace(matroid, graph)
    if not trace.passed:
        return Verdict.fail("class_membership", trace.detail, **(trace.witness or {}))
    return Verdict.ok("class_membership")


def tilde_relation(matroid: Matroid, graph: GainGraph) -> TildeReport:
    membership = class_membership(matroid, graph)
    if not membership.passed:
        raise GainGraphError(f"{matroid.name} is not in the class of {graph.name}: {membership.witness}")
    group = graph.group
    n = graph.n
    others = list(range(1, group.order))

    def spans(labels) -> bool:
        return matroid.rank(edge_subset(graph, labels)) == n

    verdicts: List[Verdict] = []

    identity_closure = closure(matroid, edge_subset(graph, {0}))
    single_label = Verdict.ok("single_label_spans")
    for a in others:
        if not spans({a, 0}):
            single_label = Verdict.fail("single_label_spans", "E_{a,e} does not span", label=group.label(a))
            break
        if edge_subset(graph, {a}) & identity_closure:
            single_label = Verdict.fail(
                "single_label_spans", "E_a meets the closure of E_e", label=group.label(a)
            )
            break
    verdicts.append(single_label)

    subgroup_closure = Verdict.ok("generated_closure")
    for size in (1, 2):
        for chosen in combinations(others, size):
            generated = edge_subset(graph, group.generated_subgroup(chosen))
            spanned = closure(matroid, edge_subset(graph, set(chosen) | {0}))
            if generated & ~spanned:
                subgroup_closure = Verdict.fail(
                    "generated_closure",
                    "subgroup edges escape the closure",
                    labels=[group.label(a) for a in chosen],
                    edge=lowest(generated & ~spanned),
                )
                break
        if not subgroup_closure.passed:
            break
    verdicts.append(subgroup_closure)

    related = {(a, b): spans({a, b, 0}) for a in others for b in others}
    relation = Verdict.ok("equivalence")
    for a, b, c in product(others, repeat=3):
        if not related[(a, a)]:
            relation = Verdict.fail("equivalence", "not reflexive", a=group.label(a))
        elif related[(a, b)] != related[(b, a)]:
            relation = Verdict.fail("equivalence", "not symmetric", a=group.label(a), b=group.label(b))
        elif related[(a, b)] and related[(b, c)] and not related[(a, c)]:
            relation = Verdict.fail(
                "equivalence", "not transitive", a=group.label(a), b=group.label(b), c=group.label(c)
            )
        if not relation.passed:
            break
    verdicts.append(relation)

    links = nx.Graph()
    links.add_nodes_from(others)
    links.add_edges_from((a, b) for (a, b), ok in related.items() if ok and a < b)
    classes = sorted(sorted(component) for component in nx.connected_components(links))

    spanning = Verdict.ok("class_spans")
    subgroup = Verdict.ok("class_subgroup")
    for members in classes:
        labels = [group.label(a) for a in members]
        if spanning.passed and not spans(set(members) | {0}):
            spanning = Verdict.fail("class_spans", "class with identity does not span", labels=labels)
        if subgroup.passed and not group.is_subgroup(set(members) | {0}):
            subgroup = Verdict.fail("class_subgroup", "class with identity is not a subgroup", labels=labels)
    verdicts.extend([spanning, subgroup])
    verdicts.append(elementary_abelian_verdict(matroid, graph))

    return TildeReport(classes=[[group.label(a) for a in members] for members in classes], verdicts=verdicts)


def elementary_abelian_verdict(matroid: Matroid, graph: GainGraph) -> Verdict:
    """Lifts of rank at least two over abelian groups force Z_p^j with j >= 2."""
    group = graph.group
    if matroid.r - graph.matroid.r < 2 or not group.is_abelian:
        return Verdict.ok("elementary_abelian", "not applicable")
    exponent = elementary_abelian_exponent(group)
    if exponent is None or exponent[1] < 2:
        return Verdict.fail("elementary_abelian", f"{group.name} is not Z_p^j with j >= 2", group=group.name)
    p, j = exponent
    return Verdict.ok("elementary_abelian", f"{group.name} is Z{p}^{j}")
