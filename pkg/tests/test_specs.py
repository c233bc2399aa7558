import pytest

from app.services.matroids import CapacityError, circuits, equal_matroids, uniform
from app.specs import (
    SpecError,
    parse_class,
    parse_group,
    parse_representation,
    parse_spec,
    resolve_circuit_N,
    resolve_hyperplane_N,
)
from app.services.projections import hyperplanes


def test_inline_spec_with_transforms():
    matroid = parse_spec("matroid T; uniform r=2 n=4; truncate t=1")
    assert matroid.name == "T"
    assert equal_matroids(matroid, uniform(1, 4)).passed


def test_spec_file(tmp_path):
    path = tmp_path / "k4.txt"
    path.write_text(
        "# complete graph\nmatroid K4\ngraphic n=4 edges=1-2,1-3,1-4,2-3,2-4,3-4\ndual\n",
        encoding="utf-8",
    )
    matroid = parse_spec(str(path))
    assert matroid.name == "K4"
    assert matroid.size == 6
    assert matroid.r == 3


def test_bases_and_restrict():
    matroid = parse_spec("bases rank=2 sets={0,1},{0,2},{1,2}; restrict elements=0,1")
    assert matroid.size == 2
    assert matroid.r == 2


def test_raw_rank_table():
    matroid = parse_spec("matroid R; ranks n=2 values=0,1,1,1")
    assert matroid.name == "R"
    assert equal_matroids(matroid, uniform(1, 2)).passed
    loose = parse_spec("ranks n=2 values=1,1,1,2")
    assert loose.rank(0) == 1


@pytest.mark.parametrize(
    "text,line",
    [
        ("uniform r=3 n=2", 1),
        ("uniform r=2", 1),
        ("uniform r=x n=4", 1),
        ("matroid A\nuniform r=1 n=3\nflip", 3),
        ("graphic n=3 edges=1-4", 1),
        ("bases rank=2 sets={0,1},{2}", 1),
        ("bases rank=2 sets={0,1},{2,3}", 1),
        ("linear p=2 rows=1 cols=3 data=1,1", 1),
        ("linear p=4 rows=1 cols=1 data=1", 1),
        ("ranks n=2 values=0,1,1", 1),
        ("ranks n=1 values=0,2", 1),
    ],
)
def test_bad_specs_report_a_line(text, line):
    with pytest.raises(SpecError) as caught:
        parse_spec(text)
    assert caught.value.line == line
    assert str(caught.value).startswith(f"line {line}: ")


def test_capacity_errors_pass_through():
    with pytest.raises(CapacityError):
        parse_spec("free n=30")
    with pytest.raises(CapacityError):
        parse_spec("ranks n=30 values=0")


def test_empty_spec():
    with pytest.raises(SpecError):
        parse_spec("# nothing here")


def test_representation_needs_linear():
    rep = parse_representation("linear p=3 rows=1 cols=4 data=1,1,1,1")
    assert rep.matrix.cols == 4
    assert rep.matroid.corank == 3
    with pytest.raises(SpecError):
        parse_representation("uniform r=1 n=3")


def test_groups():
    assert parse_group("Z2xZ2").order == 4
    assert parse_group("Z4").name == "Z4"
    assert parse_group("S3").order == 6
    assert parse_group("trivial").order == 1
    with pytest.raises(SpecError):
        parse_group("Z1xZ3")
    with pytest.raises(SpecError):
        parse_group("Q8")


def test_cayley_file(tmp_path):
    path = tmp_path / "z3.txt"
    path.write_text("group C3\norder 3\ntable\n0 1 2\n1 2 0\n2 0 1\n", encoding="utf-8")
    group = parse_group(str(path))
    assert group.name == "C3"
    assert group.compose(1, 2) == 0
    path.write_text("group bad\norder 2\ntable\n0 1\n0 1\n", encoding="utf-8")
    with pytest.raises(SpecError):
        parse_group(str(path))


def test_circuit_space_builtins():
    base = uniform(1, 3)
    family = circuits(base)
    assert resolve_circuit_N("zero", base, family).r == 0
    assert resolve_circuit_N("free", base, family).r == 3
    assert resolve_circuit_N("uniform:2", base, family).r == 2
    assert resolve_circuit_N("pairs-graphic", base, family).r == 2
    assert resolve_circuit_N("uniform r=2 n=3", base, family).r == 2
    with pytest.raises(SpecError):
        resolve_circuit_N("uniform r=2 n=4", base, family)
    with pytest.raises(SpecError):
        resolve_circuit_N("derived", base, family)
    linear_base = parse_spec("linear p=2 rows=1 cols=3 data=1,1,1")
    assert resolve_circuit_N("derived", linear_base, circuits(linear_base)).r == 2


def test_hyperplane_space_builtins():
    family = hyperplanes(uniform(2, 4))
    assert resolve_hyperplane_N("uniform:1", family).r == 1
    assert resolve_hyperplane_N("subclass:0", family).rank(0b0001) == 0
    assert resolve_hyperplane_N("zero", family).r == 0


def test_parse_class():
    family = circuits(uniform(2, 4))
    assert parse_class("all", family) == 0b1111
    assert parse_class("none", family) == 0
    assert parse_class("0,2", family) == 0b0101
    with pytest.raises(SpecError):
        parse_class("4", family)
