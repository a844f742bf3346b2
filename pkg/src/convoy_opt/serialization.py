"""JSON (de)serialization for instances and solutions.

One canonical schema version ("convoy-opt/1"); unknown fields are
rejected so fixtures cannot silently drift.  Node and arc ids may be
strings on input and are remapped to dense integers in sorted order;
emission always writes the canonical integer form.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import SchemaError
from .graph import Arc, ArcPath, Digraph
from .tmo import ConvoyRouting, TmoInstance, TrainPlan, TrainRouting

FORMAT = "convoy-opt/1"


def _require(doc: dict, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    keys = set(doc)
    missing = required - keys
    if missing:
        raise SchemaError(f"missing fields: {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise SchemaError(f"unknown fields rejected: {sorted(unknown)}")
    if doc.get("format") != FORMAT:
        raise SchemaError(f'format must be "{FORMAT}"')


def _int_field(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{what} must be an integer, got {value!r}")
    return value


def emit_instance(obj: Digraph | TmoInstance) -> dict:
    g = obj.graph if isinstance(obj, TmoInstance) else obj
    doc: dict[str, Any] = {
        "format": FORMAT,
        "nodes": list(g.nodes),
        "arcs": [
            {"id": a.id, "tail": a.tail, "head": a.head, "tau": a.tau} for a in g.arcs
        ],
        "source": g.source,
        "sink": g.sink,
    }
    if isinstance(obj, TmoInstance):
        doc["delta"] = obj.delta
        doc["trains"] = obj.trains
    return doc


def parse_instance(doc: dict) -> Digraph | TmoInstance:
    _require(
        doc,
        {"format", "nodes", "arcs", "source", "sink"},
        {"delta", "trains"},
    )
    raw_nodes = doc["nodes"]
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise SchemaError("nodes must be a non-empty list")
    if any(isinstance(v, str) for v in raw_nodes):
        if not all(isinstance(v, str) for v in raw_nodes):
            raise SchemaError("node ids must be all strings or all integers")
        node_map = {name: i for i, name in enumerate(sorted(raw_nodes))}
    else:
        node_map = {_int_field(v, "node id"): _int_field(v, "node id") for v in raw_nodes}
    raw_arcs = doc["arcs"]
    if not isinstance(raw_arcs, list):
        raise SchemaError("arcs must be a list")
    raw_ids = []
    for a in raw_arcs:
        _require_arc(a)
        raw_ids.append(a["id"])
    if any(isinstance(i, str) for i in raw_ids):
        if not all(isinstance(i, str) for i in raw_ids):
            raise SchemaError("arc ids must be all strings or all integers")
        arc_map = {name: i for i, name in enumerate(sorted(raw_ids))}
    else:
        arc_map = {i: i for i in raw_ids}
    try:
        arcs = [
            Arc(
                arc_map[a["id"]],
                node_map[a["tail"]],
                node_map[a["head"]],
                _int_field(a["tau"], "tau"),
            )
            for a in raw_arcs
        ]
        g = Digraph(
            node_map.values(), arcs, node_map[doc["source"]], node_map[doc["sink"]]
        )
    except KeyError as e:
        raise SchemaError(f"undeclared id referenced: {e}") from e
    has_delta = "delta" in doc
    has_trains = "trains" in doc
    if has_delta != has_trains:
        raise SchemaError("delta and trains must be given together")
    if has_delta:
        return TmoInstance(g, _int_field(doc["delta"], "delta"), _int_field(doc["trains"], "trains"))
    return g


def _require_arc(a: Any) -> None:
    if not isinstance(a, dict):
        raise SchemaError("each arc must be an object")
    keys = set(a)
    if keys != {"id", "tail", "head", "tau"}:
        raise SchemaError(f"arc fields must be id/tail/head/tau, got {sorted(keys)}")


def emit_convoy(c: ConvoyRouting) -> dict:
    return {
        "format": FORMAT,
        "paths": [list(p.arcs) for p in c.paths],
        "sigma": list(c.sigma),
    }


def parse_convoy(doc: dict) -> ConvoyRouting:
    _require(doc, {"format", "paths", "sigma"})
    paths = doc["paths"]
    sigma = doc["sigma"]
    if not isinstance(paths, list) or not isinstance(sigma, list):
        raise SchemaError("paths and sigma must be lists")
    return ConvoyRouting(
        [ArcPath(_int_field(a, "arc id") for a in p) for p in paths],
        [_int_field(s, "sigma") for s in sigma],
    )


def emit_routing(r: TrainRouting) -> dict:
    return {
        "format": FORMAT,
        "trains": [
            {
                "path": list(plan.path.arcs),
                "entry": {str(a): t for a, t in sorted(plan.entry.items())},
            }
            for plan in r.trains
        ],
    }


def parse_routing(doc: dict) -> TrainRouting:
    _require(doc, {"format", "trains"})
    trains = doc["trains"]
    if not isinstance(trains, list):
        raise SchemaError("trains must be a list")
    plans = []
    for item in trains:
        if not isinstance(item, dict) or set(item) != {"path", "entry"}:
            raise SchemaError("each train must have exactly path and entry")
        path = ArcPath(_int_field(a, "arc id") for a in item["path"])
        entry = {}
        for key, t in item["entry"].items():
            try:
                arc_id = int(key)
            except ValueError:
                raise SchemaError(f"entry key {key!r} is not an arc id") from None
            entry[arc_id] = _int_field(t, "entry time")
        plans.append(TrainPlan(path, entry))
    return TrainRouting(plans)


def dumps(doc: dict) -> str:
    """Canonical byte-stable JSON text."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
