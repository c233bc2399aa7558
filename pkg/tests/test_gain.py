import dataclasses

import pytest

from app.services.gain import (
    GainGraphError,
    LabelProjection,
    build_gain_graph,
    check_phi_values,
    check_theta_property,
    circuit_trace,
    cycle_rows,
    divisor_lift,
    label_projection,
    lift_matroid_LG,
    projective_lift,
    tilde_relation,
    verify_cycles,
    verify_label_projection,
)
from app.services.groups import abelian_group, symmetric_group
from app.services.matroids import CapacityError


def test_k3_over_z2_cycles():
    graph = build_gain_graph(3, abelian_group([2]))
    assert graph.size == 6
    assert len(graph.cycles) == 11
    assert sum(v.balanced for v in graph.values) == 4
    assert verify_cycles(graph).passed
    assert check_theta_property(graph).passed

    rows = cycle_rows(graph)
    digon = rows[0]
    assert digon.edges == [0, 1]
    assert digon.values == ["1"]
    assert not digon.balanced


def test_k3_over_klein_group_has_82_cycles():
    graph = build_gain_graph(3, abelian_group([2, 2]))
    assert len(graph.cycles) == 82
    assert verify_cycles(graph).passed


def test_nonabelian_labels():
    graph = build_gain_graph(3, symmetric_group(3))
    assert len(graph.cycles) == 3 * 15 + 6**3
    assert check_phi_values(graph).passed
    assert check_theta_property(graph).passed


def test_gain_graph_needs_three_vertices():
    with pytest.raises(GainGraphError):
        build_gain_graph(2, abelian_group([2]))


def test_cycle_enumeration_is_bounded():
    with pytest.raises(CapacityError):
        build_gain_graph(6, abelian_group([2])).cycles


@pytest.mark.parametrize("factors", [[2], [3], [2, 2]])
def test_lift_matroid_has_rank_n(factors):
    graph = build_gain_graph(3, abelian_group(factors))
    lifted = lift_matroid_LG(graph)
    assert lifted.r == 3
    assert circuit_trace(lifted, graph).passed


def test_label_projection():
    projection = label_projection(2, 2, 1)
    assert projection.points.cols == 3
    assert verify_label_projection(projection).passed
    assert verify_label_projection(label_projection(2, 2, 2)).passed
    with pytest.raises(GainGraphError):
        projection.point_of((0, 0))
    with pytest.raises(GainGraphError):
        label_projection(2, 3, 2)


def test_label_projection_dataclass_fields():
    names = [f.name for f in dataclasses.fields(LabelProjection)]
    assert names == ["p", "j", "i", "gf", "points", "lookup"]
    assert label_projection(2, 2, 2).gf.order == 4
    assert "gf" not in repr(label_projection(2, 2, 1))


def test_divisor_lift_over_gf4_is_elementary():
    lifted = divisor_lift(3, 2, 2, 2)
    assert lifted.r == 3
    assert circuit_trace(lifted, lifted.graph).passed


def test_rank_two_lift_and_its_label_classes():
    lifted = projective_lift(3, 2, 2, 2)
    assert lifted.r == 4
    report = tilde_relation(lifted, lifted.graph)
    assert report.classes == [["(0,1)"], ["(1,0)"], ["(1,1)"]]
    assert report.passed


def test_cyclic_labels_form_one_class():
    lifted = lift_matroid_LG(build_gain_graph(3, abelian_group([4])))
    report = tilde_relation(lifted, lifted.graph)
    assert report.classes == [["1", "2", "3"]]
    assert report.passed


def test_tilde_relation_rejects_non_members():
    graph = build_gain_graph(3, abelian_group([2]))
    with pytest.raises(GainGraphError):
        tilde_relation(graph.matroid, graph)
