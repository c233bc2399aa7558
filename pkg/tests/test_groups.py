import pytest

from app.services.groups import (
    GroupError,
    abelian_group,
    cayley_group,
    elementary_abelian,
    elementary_abelian_exponent,
    symmetric_group,
)


def test_klein_four_group():
    group = abelian_group([2, 2])
    assert group.name == "Z2xZ2"
    assert group.order == 4
    assert [group.label(a) for a in group.elements] == ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]
    assert group.compose(1, 2) == 3
    assert all(group.inverse(a) == a for a in group.elements)
    assert group.is_abelian


def test_cyclic_group_powers_and_orders():
    group = abelian_group([4])
    assert group.label(3) == "3"
    assert group.inverse(1) == 3
    assert group.element_order(2) == 2
    assert group.power(1, 3) == 3
    assert sorted(group.generated_subgroup([2])) == [0, 2]
    assert group.is_subgroup({0, 2})
    assert not group.is_subgroup({0, 1})


def test_symmetric_group_is_not_abelian():
    group = symmetric_group(3)
    assert group.order == 6
    assert not group.is_abelian
    assert group.identity == 0
    copy = cayley_group("S3", group.table.tolist())
    assert copy.order == 6
    assert not copy.is_abelian


def test_cayley_table_is_validated():
    with pytest.raises(GroupError):
        cayley_group("bad", [[0, 1], [0, 1]])


def test_elementary_abelian_exponent():
    assert elementary_abelian_exponent(elementary_abelian(2, 2)) == (2, 2)
    assert elementary_abelian_exponent(elementary_abelian(3, 1)) == (3, 1)
    assert elementary_abelian_exponent(abelian_group([4])) is None
    assert elementary_abelian_exponent(symmetric_group(3)) is None
