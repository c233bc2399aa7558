"""Text formats for matroids, groups and circuit-space matroids.

A matroid spec is a file or an inline string (``;`` separates lines)::

    matroid U24
    uniform r=2 n=4
    truncate t=1

``ranks n=<k> values=<2^k integers>`` gives a raw rank table indexed by
subset bitset and is not checked; use it with ``verify axioms``.

The constructor line may be followed by any number of ``dual``,
``truncate t=<k>`` and ``restrict elements=<i,j,...>`` lines.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.services.bitsets import full, mask_of
from app.services.derived import Representation, derived_matroid, representation_from_matrix
from app.services.fields import FieldError, FieldMatrix, galois_field
from app.services.groups import FiniteGroup, GroupError, abelian_group, cayley_group, symmetric_group
from app.services.lifts import (
    CircuitSpaceMatroid,
    free_N,
    pairs_graphic_N,
    rank3_N,
    uniform_N,
    zero_N,
)
from app.services.matroids import (
    CapacityError,
    CircuitFamily,
    ExplicitMatroid,
    Matroid,
    MatroidError,
    dual,
    ensure_capacity,
    explicit,
    free,
    graphic,
    linear,
    rank_zero,
    restrict,
    truncate,
    uniform,
)
from app.services.projections import (
    HyperplaneFamily,
    HyperplaneSpaceMatroid,
    rank_one_hyperplane_N,
    subclass_through,
    uniform_hyperplane_N,
    zero_hyperplane_N,
)

logger = logging.getLogger(__name__)

_PAIR = re.compile(r"(\w+)=(\S+)")
_SET = re.compile(r"\{([^}]*)\}")
_CYCLIC = re.compile(r"Z(\d+)")


class SpecError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _read(source: str) -> List[Tuple[int, str]]:
    path = Path(source)
    try:
        is_file = "\n" not in source and path.is_file()
    except OSError:
        is_file = False
    text = path.read_text(encoding="utf-8") if is_file else source.replace(";", "\n")
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    if not lines:
        raise SpecError("empty specification")
    return lines


def _require(values: Dict[str, str], line: int, kind: str, *required: str) -> None:
    missing = [key for key in required if key not in values]
    if missing:
        raise SpecError(f"{kind} needs " + " ".join(f"{key}=" for key in missing), line)


def _int(values: Dict[str, str], key: str, line: int) -> int:
    try:
        return int(values[key])
    except ValueError:
        raise SpecError(f"{key} must be an integer, got {values[key]!r}", line) from None


def _ints(text: str, line: int) -> List[int]:
    try:
        return [int(v) for v in re.split(r"[,\s]+", text.strip()) if v]
    except ValueError:
        raise SpecError(f"expected integers, got {text!r}", line) from None


def _construct(kind: str, values: Dict[str, str], line: int, name: str) -> Matroid:
    if kind == "uniform":
        _require(values, line, kind, "r", "n")
        matroid = uniform(_int(values, "r", line), _int(values, "n", line))
    elif kind == "free":
        _require(values, line, kind, "n")
        matroid = free(_int(values, "n", line))
    elif kind == "zero":
        _require(values, line, kind, "n")
        matroid = rank_zero(_int(values, "n", line))
    elif kind == "graphic":
        _require(values, line, kind, "n", "edges")
        vertices = _int(values, "n", line)
        edges = []
        for token in values["edges"].split(","):
            ends = token.split("-")
            if len(ends) != 2 or not all(e.isdigit() for e in ends):
                raise SpecError(f"bad edge {token!r}", line)
            u, v = int(ends[0]), int(ends[1])
            if not (1 <= u <= vertices and 1 <= v <= vertices):
                raise SpecError(f"edge {token} uses a vertex outside 1..{vertices}", line)
            edges.append((u, v))
        matroid = graphic(edges)
    elif kind == "linear":
        matroid = _linear(values, line)
    elif kind == "bases":
        _require(values, line, kind, "rank", "sets")
        rank = _int(values, "rank", line)
        sets = [_ints(body, line) for body in _SET.findall(values["sets"])]
        if not sets:
            raise SpecError("bases needs at least one set", line)
        if any(len(s) != rank for s in sets):
            raise SpecError(f"every basis must have {rank} elements", line)
        size = _int(values, "n", line) if "n" in values else max((max(s) for s in sets if s), default=-1) + 1
        matroid = explicit(size, sets)
    elif kind == "ranks":
        _require(values, line, kind, "n", "values")
        size = _int(values, "n", line)
        ensure_capacity(size)
        ranks = _ints(values["values"], line)
        if size < 0 or len(ranks) != 1 << size:
            raise SpecError(f"ranks n={size} needs {1 << max(size, 0)} values, got {len(ranks)}", line)
        if any(v < 0 or v > size for v in ranks):
            raise SpecError(f"rank values must lie in 0..{size}", line)
        matroid = ExplicitMatroid(size, np.array(ranks))
    else:
        raise SpecError(f"unknown constructor {kind!r}", line)
    matroid.name = name
    return matroid


def _linear(values: Dict[str, str], line: int) -> Matroid:
    _require(values, line, "linear", "p", "rows", "cols", "data")
    p, rows, cols = _int(values, "p", line), _int(values, "rows", line), _int(values, "cols", line)
    k = _int(values, "k", line) if "k" in values else 1
    data = _ints(values["data"], line)
    if len(data) != rows * cols:
        raise SpecError(f"data has {len(data)} entries, expected {rows * cols}", line)
    try:
        gf = galois_field(p, k)
        matrix = FieldMatrix.from_rows(gf, [data[r * cols:(r + 1) * cols] for r in range(rows)])
    except FieldError as exc:
        raise SpecError(str(exc), line) from None
    return linear(matrix)


def _transform(matroid: Matroid, kind: str, values: Dict[str, str], line: int) -> Matroid:
    if kind == "dual":
        return dual(matroid)
    if kind == "truncate":
        _require(values, line, kind, "t")
        return truncate(matroid, _int(values, "t", line))
    if kind == "restrict":
        _require(values, line, kind, "elements")
        return restrict(matroid, mask_of(_ints(values["elements"], line)))
    raise SpecError(f"unknown transform {kind!r}", line)


def parse_spec(source: str) -> Matroid:
    lines = _read(source)
    name = None
    if lines[0][1].split()[0] == "matroid":
        parts = lines[0][1].split(maxsplit=1)
        name = parts[1] if len(parts) > 1 else None
        lines = lines[1:]
        if not lines:
            raise SpecError("missing constructor line")
    number, text = lines[0]
    kind = text.split()[0]
    try:
        matroid = _construct(kind, dict(_PAIR.findall(text)), number, name or kind)
        ensure_capacity(matroid.size)
        for number, text in lines[1:]:
            matroid = _transform(matroid, text.split()[0], dict(_PAIR.findall(text)), number)
    except CapacityError:
        raise
    except MatroidError as exc:
        raise SpecError(str(exc), number) from None
    if name:
        matroid.name = name
    logger.debug("parsed %s on %d elements", matroid.name, matroid.size)
    return matroid


def parse_representation(source: str) -> Representation:
    matroid = parse_spec(source)
    matrix = getattr(matroid, "matrix", None)
    if matrix is None:
        raise SpecError("a representation needs a single linear constructor line")
    return representation_from_matrix(matrix, name=matroid.name)


def parse_group(source: str) -> FiniteGroup:
    """``Z2``, ``Z2xZ4``, ``S3``, ``trivial`` or a Cayley table file."""
    token = source.strip()
    if token in ("trivial", "Z1"):
        return abelian_group([])
    if re.fullmatch(r"S\d", token):
        try:
            return symmetric_group(int(token[1:]))
        except GroupError as exc:
            raise SpecError(str(exc)) from None
    parts = token.split("x")
    if all(_CYCLIC.fullmatch(p) for p in parts):
        try:
            return abelian_group([int(p[1:]) for p in parts])
        except GroupError as exc:
            raise SpecError(str(exc)) from None
    lines = _read(source)
    header = lines[0][1].split(maxsplit=1)
    if header[0] != "group":
        raise SpecError(f"unknown group {token!r}", lines[0][0])
    name = header[1] if len(header) > 1 else "G"
    if len(lines) < 3 or not lines[1][1].startswith("order"):
        raise SpecError("expected 'order m'", lines[1][0] if len(lines) > 1 else 1)
    order = _ints(lines[1][1][len("order"):], lines[1][0])
    if len(order) != 1:
        raise SpecError("expected 'order m'", lines[1][0])
    m = order[0]
    if lines[2][1] != "table":
        raise SpecError("expected 'table'", lines[2][0])
    rows = lines[3:]
    if len(rows) != m:
        raise SpecError(f"expected {m} table rows, got {len(rows)}", lines[2][0])
    table = []
    for number, text in rows:
        row = _ints(text, number)
        if len(row) != m:
            raise SpecError(f"row has {len(row)} entries, expected {m}", number)
        table.append(row)
    try:
        return cayley_group(name, table)
    except GroupError as exc:
        raise SpecError(str(exc)) from None


# circuit-space and hyperplane-space matroids


def _parameter(name: str, prefix: str) -> int:
    try:
        return int(name[len(prefix):])
    except ValueError:
        raise SpecError(f"bad builtin {name!r}") from None


def resolve_circuit_N(name: str, base: Matroid, family: CircuitFamily) -> CircuitSpaceMatroid:
    """Builtin name (``zero``, ``free``, ``uniform:<r>``, ``rank3``,
    ``pairs-graphic``, ``derived``) or a matroid spec on the circuits."""
    if name == "zero":
        return zero_N(family)
    if name == "free":
        return free_N(family)
    if name.startswith("uniform:"):
        return uniform_N(family, _parameter(name, "uniform:"))
    if name == "rank3":
        return rank3_N(base, family)
    if name == "pairs-graphic":
        return pairs_graphic_N(family)
    if name == "derived":
        matrix = getattr(base, "matrix", None)
        if matrix is None:
            raise SpecError("the derived builtin needs a linear M")
        derived = derived_matroid(representation_from_matrix(matrix, name=base.name))
        return CircuitSpaceMatroid(family, derived.matroid)
    matroid = parse_spec(name)
    if matroid.size != len(family):
        raise SpecError(f"N has {matroid.size} elements but M has {len(family)} circuits")
    return CircuitSpaceMatroid(family, matroid)


def resolve_hyperplane_N(name: str, family: HyperplaneFamily) -> HyperplaneSpaceMatroid:
    """Builtin name (``zero``, ``uniform:<r>``, ``subclass:<element>``) or a spec."""
    if name == "zero":
        return zero_hyperplane_N(family)
    if name.startswith("uniform:"):
        return uniform_hyperplane_N(family, _parameter(name, "uniform:"))
    if name.startswith("subclass:"):
        return rank_one_hyperplane_N(family, subclass_through(family, _parameter(name, "subclass:")))
    matroid = parse_spec(name)
    if matroid.size != len(family):
        raise SpecError(f"N has {matroid.size} elements but K has {len(family)} hyperplanes")
    return HyperplaneSpaceMatroid(family, matroid)


def parse_class(text: str, family: CircuitFamily) -> int:
    """``all``, ``none`` or a comma-separated list of circuit indices."""
    if text == "all":
        return full(len(family))
    if text == "none":
        return 0
    indices = _ints(text, None)
    bad = [i for i in indices if not 0 <= i < len(family)]
    if bad:
        raise SpecError(f"circuit indices out of range: {bad}")
    return mask_of(indices)
