"""JSON schemas for every CLI document, keyed by command name."""

from __future__ import annotations

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+/[0-9]+$"}
INTEGER_STR = {"type": "string", "pattern": r"^-?[0-9]+$"}
DECIMAL_STR = {"type": "string", "pattern": r"^-?[0-9.]+(e[-+]?[0-9]+)?$"}
VERTICES = {"type": "array", "items": {"type": "integer", "minimum": 0}}
PARTITION = {
    "type": "object",
    "required": ["A", "B"],
    "properties": {"A": {"type": "array", "items": {"type": "integer"}}, "B": {"type": "array", "items": {"type": "integer"}}},
}
REPORTED = {"type": "object"}
ASSERTED = {"type": "object", "additionalProperties": {"type": ["boolean", "null"]}}


def _doc(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "required": sorted(required), "properties": props}


SCHEMAS: dict[str, dict] = {
    "graph info": _doc(
        {
            "d": {"type": "integer"},
            "N": {"type": "integer"},
            "edges": {"type": "integer"},
            "regular": {"type": "integer"},
            "connected": {"type": "boolean"},
            "v_star": {"type": "integer"},
        }
    ),
    "iso check": _doc(
        {
            "size": {"type": "integer"},
            "neighborhood_size": {"type": "integer"},
            "clause_i_holds": {"type": "boolean"},
            "clause_ii_holds": {"type": "boolean"},
            "lovasz_bound": {"type": ["number", "null"]},
        }
    ),
    "count exact": _doc({"d": {"type": "integer"}, "q": {"type": "integer"}, "c_q": INTEGER_STR}, {"brute_force": INTEGER_STR}),
    "flaw analyze": _doc(
        {
            "partition": PARTITION,
            "flaw": VERTICES,
            "flaw_size": {"type": "integer"},
            "components": {"type": "array", "items": VERTICES},
            "max_component_size": {"type": "integer"},
        }
    ),
    "polymers enumerate": _doc({"count": {"type": "integer"}, "census": {"type": "object"}}, {"polymers": {"type": "array"}}),
    "polymers weight": _doc({"vertices": VERTICES, "weight": RATIONAL, "partition": PARTITION}),
    "xi compute": _doc(
        {"xi": RATIONAL, "family_count": {"type": "integer"}, "polymer_count": {"type": "integer"}, "partition": PARTITION}
    ),
    "capture check": _doc(
        {"captured": INTEGER_STR, "total": INTEGER_STR, "partition": PARTITION},
        {"brute_force_captured": INTEGER_STR, "asserted": ASSERTED},
    ),
    "clusters lk": _doc({"k": {"type": "integer"}, "L_k": RATIONAL, "cluster_count": {"type": "integer"}}, {"closed_form": RATIONAL}),
    "expansion approx": _doc(
        {
            "exponent": RATIONAL,
            "value": DECIMAL_STR,
            "value_interval": {"type": "array", "items": DECIMAL_STR, "minItems": 2, "maxItems": 2},
            "partitions": {"type": "integer"},
            "reported": REPORTED,
            "asserted": ASSERTED,
        }
    ),
    "expansion compare": _doc({"exact": INTEGER_STR, "approx": DECIMAL_STR, "reported": REPORTED, "asserted": ASSERTED}),
    "expansion logcheck": _doc({"K": {"type": "integer"}, "terms": {"type": "array"}, "all_match": {"type": "boolean"}}),
    "kp check": _doc(
        {
            "vertex": {"type": "integer"},
            "lhs_interval": {"type": "array", "items": DECIMAL_STR, "minItems": 2, "maxItems": 2},
            "threshold": RATIONAL,
            "reported": REPORTED,
            "asserted": ASSERTED,
        }
    ),
    "containers cover": _doc({"size": {"type": "integer"}, "bound": {"type": "number"}, "asserted": ASSERTED}),
    "containers pair": _doc({"ok": {"type": "boolean"}, "rounds": {"type": "integer"}}, {"pair": {"type": "object"}}),
    "containers verify": _doc(
        {"psi": {"type": "integer"}, "full": ASSERTED, "layers": {"type": "array"}, "valid": {"type": "boolean"}}
    ),
    "sample stats": _doc({"samples": {"type": "integer"}, "N": {"type": "integer"}, "reported": REPORTED, "asserted": ASSERTED}),
    "sample record": _doc(
        {
            "index": {"type": "integer"},
            "partition": PARTITION,
            "family": {"type": "array", "items": VERTICES},
            "lambda_size": {"type": "integer"},
            "coloring": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "flaw_size": {"type": "integer"},
            "nearest_partition": PARTITION,
            "max_margin": RATIONAL,
        }
    ),
    "error": _doc({"error": {"type": "string"}, "kind": {"type": "string"}}),
}
