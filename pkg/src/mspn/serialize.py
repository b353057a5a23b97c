"""Model persistence: canonical JSON with byte-stable round trips.

The emitter sorts object keys and prints every float with 17 significant
digits, which round-trips IEEE doubles exactly. Serializing a model twice,
or serializing a deserialized model, therefore produces identical bytes,
and two learning runs with the same seed produce identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .data import Schema
from .errors import FormatError, MspnError, VersionError
from .leaves import HistogramLeaf, PiecewiseLinearLeaf
from .structure import LearnConfig, Mspn, ProductNode, SumNode, iter_nodes

FORMAT_VERSION = 1


def _format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise FormatError("non-finite numbers cannot be serialized")
    return format(x, ".17g")


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise FormatError("object keys must be strings")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise FormatError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, 17-significant-digit floats."""
    out: list = []
    _emit(obj, out)
    return "".join(out)


def _node_to_dict(node) -> dict:
    if isinstance(node, SumNode):
        return {
            "kind": "sum",
            "scope": [int(v) for v in node.scope],
            "weights": [float(w) for w in node.weights],
            "children": [_node_to_dict(c) for c in node.children],
        }
    if isinstance(node, ProductNode):
        return {
            "kind": "product",
            "scope": [int(v) for v in node.scope],
            "children": [_node_to_dict(c) for c in node.children],
        }
    if isinstance(node, HistogramLeaf):
        return {
            "kind": "histogram",
            "variable": int(node.variable),
            "domain": node.domain,
            "edges": [float(e) for e in node.edges],
            "masses": [float(m) for m in node.masses],
            "smoothing": float(node.smoothing),
            "unseen_mass": float(node.unseen_mass),
        }
    if isinstance(node, PiecewiseLinearLeaf):
        return {
            "kind": "piecewise_linear",
            "variable": int(node.variable),
            "domain": node.domain,
            "knots_x": [float(x) for x in node.knots_x],
            "knots_y": [float(y) for y in node.knots_y],
            "mode_index": int(node.mode_index),
        }
    raise FormatError(f"cannot serialize node type {type(node).__name__}")


def _node_from_dict(obj) -> object:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormatError("every node needs a 'kind' tag")
    kind = obj["kind"]
    try:
        if kind == "sum":
            children = tuple(_node_from_dict(c) for c in obj["children"])
            return SumNode(tuple(obj["scope"]), np.asarray(obj["weights"], dtype=np.float64),
                           children)
        if kind == "product":
            children = tuple(_node_from_dict(c) for c in obj["children"])
            return ProductNode(tuple(obj["scope"]), children)
        if kind == "histogram":
            return HistogramLeaf(
                int(obj["variable"]),
                str(obj["domain"]),
                np.asarray(obj["edges"], dtype=np.float64),
                np.asarray(obj["masses"], dtype=np.float64),
                float(obj["smoothing"]),
                float(obj["unseen_mass"]),
            )
        if kind == "piecewise_linear":
            return PiecewiseLinearLeaf(
                int(obj["variable"]),
                str(obj["domain"]),
                np.asarray(obj["knots_x"], dtype=np.float64),
                np.asarray(obj["knots_y"], dtype=np.float64),
                int(obj["mode_index"]),
            )
    except VersionError:
        raise
    except (MspnError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad {kind} node: {exc}") from exc
    raise FormatError(f"unknown node kind {kind!r}")


def serialize(mspn: Mspn) -> bytes:
    """Canonical JSON bytes for a model."""
    payload = {
        "format_version": FORMAT_VERSION,
        "seed": int(mspn.seed),
        "config": mspn.config.to_dict(),
        "schema": mspn.schema.to_json_dict(),
        "node_count": mspn.node_count,
        "root": _node_to_dict(mspn.root),
    }
    return (canonical_json(payload) + "\n").encode("utf-8")


def deserialize(data: bytes | str) -> Mspn:
    """Rebuild a model from its serialized form.

    Raises :class:`VersionError` for unsupported ``format_version`` values
    and :class:`FormatError` for anything else wrong with the payload,
    including reconstructed nodes that fail their own validation.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid json: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("model file must hold a json object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"unsupported format_version {version!r}; this build reads {FORMAT_VERSION}"
        )
    try:
        schema = Schema.from_json_dict(obj["schema"])
        config = LearnConfig.from_dict(obj["config"])
        root = _node_from_dict(obj["root"])
        declared_count = int(obj["node_count"])
        declared_seed = int(obj["seed"])
    except VersionError:
        raise
    except FormatError:
        raise
    except (MspnError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model file: {exc}") from exc

    if declared_seed != config.seed:
        raise FormatError("seed field disagrees with the config snapshot")
    model = Mspn(root, schema, config)
    actual = sum(1 for _ in iter_nodes(root))
    if actual != declared_count:
        raise FormatError(
            f"node_count says {declared_count} but the tree has {actual} nodes"
        )
    return model


def save_model(mspn: Mspn, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(mspn))


def load_model(path) -> Mspn:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read model file: {exc}") from exc
    return deserialize(data)
