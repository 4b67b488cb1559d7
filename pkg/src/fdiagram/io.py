"""JSON file formats for systems, abstract models, graphs and second-law configs,
plus structured (CSV/JSON) diagram output that parses back to the same values.

System::

    {"variables": [{"name": "X1", "labels": [0, 1]}, ...],
     "outcomes": [[0, 0], [0, 1], ...],
     "P": [0.25, ...], "Q": [...]}          # Q optional

Abstract model::

    {"monoid_table": [[...]], "identity": 1, "group_factors": [2],
     "action_table": [[g, ...], ...],       # row x lists x.g for g in group order
     "variables": [0, 0, 0],
     "cocycle": [g, ...]  |  "psi_generator": g}

Group elements are integers for a single cyclic factor, lists of residues
otherwise; group order is lexicographic over the residue tuples.

Graph::

    {"n": 3, "edges": [[1, 2], [2, 3]]}

Second-law config::

    {"n": 4, "P1": [1, 0], "Q1": [0.5, 0.5], "T": [[0.9, 0.1], [0.1, 0.9]]}

``"transitions"`` (a list of ``n - 1`` matrices) may replace ``"T"``.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Any

from . import subsets as ss
from .abstract import (
    AbstractBackend,
    AbstractModel,
    Cocycle,
    FiniteAbelianGroup,
    FiniteMonoid,
    psi,
)
from .core import ConditionalPartition, Diagram, RealGroup
from .graphs import Graph
from .prob import DiscreteSystem


class SchemaError(ValueError):
    """Input file does not follow the documented schema."""


def read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return doc


def _field(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field '{key}'")
    return doc[key]


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list")
    return value


def _label(v):
    # JSON lists are unhashable; labels are scalars
    if isinstance(v, (list, dict)):
        raise TypeError
    return v


# ---------------------------------------------------------------------------
# systems


def system_from_dict(doc: dict, where: str = "system") -> DiscreteSystem:
    variables = _list(_field(doc, "variables", where), f"{where}.variables")
    names, labels = [], []
    for k, var in enumerate(variables):
        w = f"{where}.variables[{k}]"
        if not isinstance(var, dict):
            raise SchemaError(f"{w}: expected an object with 'name' and 'labels'")
        names.append(str(var.get("name", f"X{k + 1}")))
        labs = _list(_field(var, "labels", w), f"{w}.labels")
        if len(set(map(repr, labs))) != len(labs):
            raise SchemaError(f"{w}.labels: duplicate label")
        labels.append(labs)
    outcomes = _list(_field(doc, "outcomes", where), f"{where}.outcomes")
    index = [{repr(lab): c for c, lab in enumerate(labs)} for labs in labels]
    codes = []
    for w_i, row in enumerate(outcomes):
        w = f"{where}.outcomes[{w_i}]"
        row = _list(row, w)
        if len(row) != len(labels):
            raise SchemaError(f"{w}: expected {len(labels)} labels, got {len(row)}")
        try:
            codes.append([index[i][repr(_label(v))] for i, v in enumerate(row)])
        except (KeyError, TypeError):
            raise SchemaError(f"{w}: label not declared for its variable") from None
    dists = [_list(_field(doc, "P", where), f"{where}.P")]
    if doc.get("Q") is not None:
        dists.append(_list(doc["Q"], f"{where}.Q"))
    for key, d in zip("PQ", dists):
        if len(d) != len(outcomes):
            raise SchemaError(f"{where}.{key}: {len(d)} probabilities for {len(outcomes)} outcomes")
    try:
        return DiscreteSystem(codes, labels, dists, names=names)
    except ValueError as e:
        # absolute-continuity and normalization errors keep their type
        if type(e) is ValueError:
            raise SchemaError(f"{where}: {e}") from None
        raise


def system_to_dict(system: DiscreteSystem) -> dict:
    doc: dict[str, Any] = {
        "variables": [
            {"name": name, "labels": list(labs)} for name, labs in zip(system.names, system.labels)
        ],
        "outcomes": [list(system.outcome_labels(w)) for w in range(system.m)],
        "P": [float(x) for x in system.dists[0]],
    }
    if system.r == 1:
        doc["Q"] = [float(x) for x in system.dists[1]]
    return doc


def load_system(path) -> DiscreteSystem:
    return system_from_dict(read_json(path), where=str(path))


# ---------------------------------------------------------------------------
# abstract models


def _group_element(group: FiniteAbelianGroup, v, where: str):
    try:
        return group.coerce(v)
    except (ValueError, TypeError) as e:
        raise SchemaError(f"{where}: {e}") from None


def model_from_dict(doc: dict, where: str = "model"):
    """Returns ``(backend, model, cocycle)``."""
    try:
        monoid = FiniteMonoid(_field(doc, "monoid_table", where), _field(doc, "identity", where))
        group = FiniteAbelianGroup(_field(doc, "group_factors", where))
        rows = _list(_field(doc, "action_table", where), f"{where}.action_table")
        action = []
        for x, row in enumerate(rows):
            row = _list(row, f"{where}.action_table[{x}]")
            action.append(
                [group.index(_group_element(group, v, f"{where}.action_table[{x}]")) for v in row]
            )
        model = AbstractModel(monoid, group, action)
        variables = _list(_field(doc, "variables", where), f"{where}.variables")
        if "cocycle" in doc:
            F = Cocycle(model, [_group_element(group, v, f"{where}.cocycle") for v in doc["cocycle"]])
        elif "psi_generator" in doc:
            F = psi(model, _group_element(group, doc["psi_generator"], f"{where}.psi_generator"))
        else:
            raise SchemaError(f"{where}: need 'cocycle' or 'psi_generator'")
        return AbstractBackend(model, F, variables), model, F
    except SchemaError:
        raise
    except ValueError as e:
        raise SchemaError(f"{where}: {e}") from None


def load_model(path):
    return model_from_dict(read_json(path), where=str(path))


def group_value_to_json(v):
    return v[0] if len(v) == 1 else list(v)


# ---------------------------------------------------------------------------
# graphs and partitions


def graph_from_dict(doc: dict, where: str = "graph") -> Graph:
    n = _field(doc, "n", where)
    edges = _list(doc.get("edges", []), f"{where}.edges")
    pairs = []
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2 or not all(isinstance(v, int) for v in e):
            raise SchemaError(f"{where}.edges[{k}]: expected a pair of vertex numbers")
        pairs.append(tuple(e))
    try:
        return Graph(n, frozenset(pairs))
    except ValueError as e:
        raise SchemaError(f"{where}: {e}") from None


def graph_to_dict(G: Graph) -> dict:
    return {"n": G.n, "edges": [list(e) for e in G.sorted_edges()]}


def load_graph(path) -> Graph:
    return graph_from_dict(read_json(path), where=str(path))


def graph_to_dot(G: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in ss.to_indices(G.vertices)]
    lines += [f"  {i} -- {j};" for i, j in G.sorted_edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_partition(text: str, n: int) -> ConditionalPartition:
    """``"J|L1|L2|..."``, e.g. ``"4|1|2,3"``; an empty ``J`` is written ``"|1|2"``."""
    blocks = text.split("|")
    if len(blocks) < 3:
        raise SchemaError(f"partition {text!r}: need J and at least two blocks, as 'J|L1|L2'")
    try:
        sets = [ss.parse_set(b) for b in blocks]
        return ConditionalPartition(n, sets[0], tuple(sets[1:]))
    except ValueError as e:
        raise SchemaError(f"partition {text!r}: {e}") from None


# ---------------------------------------------------------------------------
# second-law configs


def second_law_config(doc: dict, where: str = "config"):
    P1 = _list(_field(doc, "P1", where), f"{where}.P1")
    Q1 = _list(_field(doc, "Q1", where), f"{where}.Q1")
    if "transitions" in doc:
        Ts = _list(doc["transitions"], f"{where}.transitions")
        n = len(Ts) + 1
    else:
        n = _field(doc, "n", where)
        if not isinstance(n, int) or n < 1:
            raise SchemaError(f"{where}.n: expected a positive integer")
        Ts = [_field(doc, "T", where)] * (n - 1)
    sizes = [len(P1)] + [len(T[0]) if T else 0 for T in Ts]
    return sizes, P1, Q1, Ts


# ---------------------------------------------------------------------------
# diagram output


def value_to_json(v, diagram: Diagram):
    return float(v) if isinstance(diagram.group, RealGroup) else group_value_to_json(v)


def diagram_rows(diagram: Diagram) -> list[dict]:
    return [
        {"atom": ss.format_set(I), "value": value_to_json(v, diagram), "zero": diagram.is_zero_atom(I)}
        for I, v in diagram.items()
    ]


def diagram_to_json(diagram: Diagram, functional: str) -> str:
    doc = {
        "n": diagram.n,
        "functional": functional,
        "atoms": diagram_rows(diagram),
        "total": value_to_json(diagram.total(), diagram),
    }
    return json.dumps(doc, indent=2) + "\n"


def diagram_to_csv(diagram: Diagram) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["atom", "value", "zero"])
    for row in diagram_rows(diagram):
        v = row["value"]
        w.writerow([row["atom"], _csv_value(v), int(row["zero"])])
    w.writerow(["total", _csv_value(value_to_json(diagram.total(), diagram)), ""])
    return buf.getvalue()


def _csv_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return str(v)


def parse_diagram_json(text: str) -> dict[int, Any]:
    doc = json.loads(text)
    return {ss.parse_set(row["atom"]): _from_json_value(row["value"]) for row in doc["atoms"]}


def _from_json_value(v):
    if isinstance(v, list):
        return tuple(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return (v,)
    return float(v)


def parse_diagram_csv(text: str, exact: bool = False) -> dict[int, Any]:
    rows = list(csv.DictReader(_io.StringIO(text)))
    out = {}
    for row in rows:
        if row["atom"] == "total":
            continue
        raw = row["value"]
        val = tuple(int(x) for x in raw.split()) if exact else float(raw)
        out[ss.parse_set(row["atom"])] = val
    return out
