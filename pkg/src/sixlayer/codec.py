"""Canonical text serialization for scenarios, plus the static/dynamic split.

The on-disk form is UTF-8 JSON in one canonical layout: object keys sorted,
entities sorted by (layer, id), properties by name, floats in their shortest
round-trippable decimal form, newline-terminated.  Two serializations of
equal values are byte-identical, which makes file diffs meaningful.

A scenario can also be carried as two documents: a static one holding the
spatial layers 1-3 (reusable across recordings of one location) and a
dynamic one holding layers 4-6 with a reference back to the static header.
``merge(*split(s))`` reproduces ``s`` exactly.

Parsing is strict about structure (unknown keys are rejected) but open
about vocabulary: property names are free, and influence or ``modifies``
targets that do not resolve are accepted here and reported by the rule
engine, because layer projections legitimately leave such links dangling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ModelError, ParseError, SchemaError
from .layers import Layer, SPATIAL_LAYERS
from .model import (
    Annotation,
    Entity,
    EnumToken,
    Influence,
    Polygon,
    Property,
    PropertyValue,
    Quantity,
    Scenario,
    TimeSeries,
    Vector,
)

FORMAT_VERSION = "1.0"

SCENARIO_EXTENSION = ".6lm.json"
STATIC_EXTENSION = ".6lm-static.json"
DYNAMIC_EXTENSION = ".6lm-dyn.json"


# ---------------------------------------------------------------------------
# value encoding

def encode_value(value: PropertyValue):
    """Canonical JSON encoding of a plain property value."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, Quantity):
        return {"num": value.value, "unit": value.unit}
    if isinstance(value, EnumToken):
        return {"enum": value.token}
    if isinstance(value, Vector):
        return {"vec": list(value.components)}
    if isinstance(value, Polygon):
        return {"polygon": [list(v) for v in value.vertices]}
    raise ModelError(f"cannot encode value {value!r}")


def decode_value(raw, where: str) -> PropertyValue:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict):
        keys = set(raw)
        try:
            if keys == {"num", "unit"}:
                return Quantity(float(raw["num"]), raw["unit"])
            if keys == {"enum"}:
                return EnumToken(raw["enum"])
            if keys == {"vec"}:
                return Vector(tuple(float(c) for c in raw["vec"]))
            if keys == {"polygon"}:
                return Polygon(tuple((float(x), float(y)) for x, y in raw["polygon"]))
        except (ModelError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: bad value: {exc}") from None
        raise SchemaError(f"{where}: unknown value shape with keys {sorted(keys)}")
    raise SchemaError(f"{where}: unsupported JSON value {raw!r}")


# ---------------------------------------------------------------------------
# entity encoding

def _entity_to_json(entity: Entity) -> dict:
    doc: dict = {
        "id": entity.id,
        "category": entity.category,
        "layer": entity.layer.value,
        "influences": [{"target": i.target, "label": i.label} for i in entity.influences],
        "properties": [],
        "annotations": [{"key": a.key, "value": a.value} for a in entity.annotations],
    }
    if entity.lifespan is not None:
        doc["lifespan_s"] = list(entity.lifespan)
    if entity.modifies is not None:
        doc["modifies"] = entity.modifies
    for prop in entity.properties:
        if isinstance(prop.value, TimeSeries):
            doc["properties"].append(
                {
                    "name": prop.name,
                    "series": {
                        "interpolation": prop.value.interpolation,
                        "samples": [[t, encode_value(v)] for t, v in prop.value.samples],
                    },
                }
            )
        else:
            doc["properties"].append({"name": prop.name, "value": encode_value(prop.value)})
    return doc


def _require_keys(obj: dict, required: set, optional: set, where: str) -> None:
    keys = set(obj)
    missing = required - keys
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")


def _entity_from_json(raw, index: int) -> Entity:
    where = f"entities[{index}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object")
    eid = raw.get("id")
    if isinstance(eid, str):
        where = f"{where} (id {eid!r})"
    _require_keys(
        raw,
        required={"id", "category", "layer", "influences", "properties", "annotations"},
        optional={"lifespan_s", "modifies"},
        where=where,
    )
    layer = raw["layer"]
    if not isinstance(layer, int) or isinstance(layer, bool) or not 1 <= layer <= 6:
        raise SchemaError(f"{where}: layer out of range: {layer!r}")

    properties = []
    if not isinstance(raw["properties"], list):
        raise SchemaError(f"{where}: 'properties' must be an array")
    for pidx, praw in enumerate(raw["properties"]):
        pwhere = f"{where}.properties[{pidx}]"
        if not isinstance(praw, dict):
            raise SchemaError(f"{pwhere}: expected an object")
        if set(praw) == {"name", "value"}:
            value = decode_value(praw["value"], pwhere)
        elif set(praw) == {"name", "series"}:
            sraw = praw["series"]
            if not isinstance(sraw, dict):
                raise SchemaError(f"{pwhere}: 'series' must be an object")
            _require_keys(sraw, {"interpolation", "samples"}, set(), pwhere)
            if not isinstance(sraw["samples"], list):
                raise SchemaError(f"{pwhere}: 'samples' must be an array")
            samples = []
            for sidx, pair in enumerate(sraw["samples"]):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise SchemaError(f"{pwhere}.samples[{sidx}]: expected [t, value]")
                t = pair[0]
                if not isinstance(t, (int, float)) or isinstance(t, bool):
                    raise SchemaError(f"{pwhere}.samples[{sidx}]: bad timestamp {t!r}")
                samples.append((float(t), decode_value(pair[1], f"{pwhere}.samples[{sidx}]")))
            try:
                value = TimeSeries(tuple(samples), interpolation=sraw["interpolation"])
            except ModelError as exc:
                raise SchemaError(f"{pwhere}: {exc}") from None
        else:
            raise SchemaError(
                f"{pwhere}: expected keys {{name, value}} or {{name, series}}, "
                f"got {sorted(praw)}"
            )
        name = praw["name"]
        if not isinstance(name, str):
            raise SchemaError(f"{pwhere}: 'name' must be a string")
        try:
            properties.append(Property(name, value))
        except ModelError as exc:
            raise SchemaError(f"{pwhere}: {exc}") from None

    annotations = []
    if not isinstance(raw["annotations"], list):
        raise SchemaError(f"{where}: 'annotations' must be an array")
    for aidx, araw in enumerate(raw["annotations"]):
        awhere = f"{where}.annotations[{aidx}]"
        if not isinstance(araw, dict):
            raise SchemaError(f"{awhere}: expected an object")
        _require_keys(araw, {"key", "value"}, set(), awhere)
        try:
            annotations.append(Annotation(araw["key"], araw["value"]))
        except ModelError as exc:
            raise SchemaError(f"{awhere}: {exc}") from None

    influences = []
    if not isinstance(raw["influences"], list):
        raise SchemaError(f"{where}: 'influences' must be an array")
    for iidx, iraw in enumerate(raw["influences"]):
        iwhere = f"{where}.influences[{iidx}]"
        if not isinstance(iraw, dict):
            raise SchemaError(f"{iwhere}: expected an object")
        _require_keys(iraw, {"target", "label"}, set(), iwhere)
        try:
            influences.append(Influence(iraw["target"], iraw["label"]))
        except ModelError as exc:
            raise SchemaError(f"{iwhere}: {exc}") from None

    lifespan = None
    if "lifespan_s" in raw:
        lraw = raw["lifespan_s"]
        if (
            not isinstance(lraw, list)
            or len(lraw) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in lraw)
        ):
            raise SchemaError(f"{where}: 'lifespan_s' must be [start, end]")
        lifespan = (float(lraw[0]), float(lraw[1]))
    modifies = raw.get("modifies")
    if modifies is not None and not isinstance(modifies, str):
        raise SchemaError(f"{where}: 'modifies' must be a string")

    try:
        return Entity(
            id=raw["id"],
            category=raw["category"],
            layer=layer,
            properties=tuple(properties),
            annotations=tuple(annotations),
            influences=tuple(influences),
            lifespan=lifespan,
            modifies=modifies,
        )
    except ModelError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _dump(doc: dict) -> str:
    return (
        json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    )


def _loads(text: str, what: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise SchemaError(f"{what}: top level must be a JSON object")
    return raw


def _check_header(raw: dict, what: str) -> None:
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"{what}: unsupported format_version {version!r}")


def _scenario_header_from_json(raw, what: str) -> tuple[str, float, dict]:
    if not isinstance(raw, dict):
        raise SchemaError(f"{what}: 'scenario' must be an object")
    _require_keys(raw, {"id", "duration_s", "metadata"}, set(), f"{what}.scenario")
    duration = raw["duration_s"]
    if not isinstance(duration, (int, float)) or isinstance(duration, bool):
        raise SchemaError(f"{what}.scenario: bad duration_s {duration!r}")
    metadata = raw["metadata"]
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise SchemaError(f"{what}.scenario: 'metadata' must be a string map")
    return raw["id"], float(duration), dict(metadata)


def _entities_from_json(raw, what: str) -> list[Entity]:
    if not isinstance(raw, list):
        raise SchemaError(f"{what}: 'entities' must be an array")
    entities = [_entity_from_json(item, index) for index, item in enumerate(raw)]
    seen: set[str] = set()
    for entity in entities:
        if entity.id in seen:
            raise SchemaError(f"{what}: duplicate entity id {entity.id!r}")
        seen.add(entity.id)
    return entities


# ---------------------------------------------------------------------------
# combined scenario document

def serialize_scenario(scenario: Scenario) -> str:
    """Canonical document text for a scenario."""
    doc = {
        "format_version": FORMAT_VERSION,
        "scenario": {
            "id": scenario.id,
            "duration_s": scenario.duration,
            "metadata": dict(scenario.metadata),
        },
        "entities": [_entity_to_json(e) for e in scenario.entities],
    }
    return _dump(doc)


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario document, rejecting on the first violation.

    Raises :class:`ParseError` with line/column for malformed JSON and
    :class:`SchemaError` with entity context for schema and structural
    problems.
    """
    raw = _loads(text, "scenario document")
    _require_keys(raw, {"format_version", "scenario", "entities"}, set(), "scenario document")
    _check_header(raw, "scenario document")
    sid, duration, metadata = _scenario_header_from_json(raw["scenario"], "scenario document")
    entities = _entities_from_json(raw["entities"], "scenario document")
    try:
        return Scenario(id=sid, duration=duration, entities=tuple(entities), metadata=metadata)
    except ModelError as exc:
        raise SchemaError(f"scenario document: {exc}") from None


# ---------------------------------------------------------------------------
# static/dynamic split

@dataclass(frozen=True)
class StaticDocument:
    """Spatial half of a scenario: header plus the layer 1-3 entities."""

    scenario_id: str
    duration: float
    metadata: dict[str, str]
    entities: tuple[Entity, ...]

    def __post_init__(self):
        for entity in self.entities:
            if entity.layer not in SPATIAL_LAYERS:
                raise ModelError(
                    f"static document entity {entity.id!r} is on layer {entity.layer.value}"
                )
            if entity.has_time_series():
                raise ModelError(
                    f"static document entity {entity.id!r} carries a time series"
                )


@dataclass(frozen=True)
class DynamicDocument:
    """Temporal half of a scenario: layer 4-6 entities plus the back-reference."""

    static_id: str
    entities: tuple[Entity, ...]

    def __post_init__(self):
        for entity in self.entities:
            if entity.layer in SPATIAL_LAYERS:
                raise ModelError(
                    f"dynamic document entity {entity.id!r} is on layer {entity.layer.value}"
                )


def split(scenario: Scenario) -> tuple[StaticDocument, DynamicDocument]:
    """Partition a scenario into its static (L1-3) and dynamic (L4-6) halves.

    Refuses if any spatial-layer entity carries a time series: that scenario
    first needs fixing, not silently relocated data.
    """
    for entity in scenario.entities:
        if entity.layer in SPATIAL_LAYERS and entity.has_time_series():
            raise ModelError(
                f"cannot split: entity {entity.id!r} on layer {entity.layer.value} "
                "carries a time series (rule G1); fix the scenario first"
            )
    static_entities = tuple(e for e in scenario.entities if e.layer in SPATIAL_LAYERS)
    dynamic_entities = tuple(e for e in scenario.entities if e.layer not in SPATIAL_LAYERS)
    return (
        StaticDocument(
            scenario_id=scenario.id,
            duration=scenario.duration,
            metadata=dict(scenario.metadata),
            entities=static_entities,
        ),
        DynamicDocument(static_id=scenario.id, entities=dynamic_entities),
    )


def merge(static: StaticDocument, dynamic: DynamicDocument) -> Scenario:
    """Recombine a split pair into one scenario."""
    if dynamic.static_id != static.scenario_id:
        raise ModelError(
            f"dynamic document references {dynamic.static_id!r}, "
            f"static document is {static.scenario_id!r}"
        )
    static_ids = {e.id for e in static.entities}
    collisions = sorted(static_ids & {e.id for e in dynamic.entities})
    if collisions:
        raise ModelError(f"entity ids present in both documents: {collisions}")
    return Scenario(
        id=static.scenario_id,
        duration=static.duration,
        entities=tuple(static.entities) + tuple(dynamic.entities),
        metadata=dict(static.metadata),
    )


def serialize_static(doc: StaticDocument) -> str:
    return _dump(
        {
            "format_version": FORMAT_VERSION,
            "document": "static",
            "scenario": {
                "id": doc.scenario_id,
                "duration_s": doc.duration,
                "metadata": dict(doc.metadata),
            },
            "entities": [_entity_to_json(e) for e in doc.entities],
        }
    )


def serialize_dynamic(doc: DynamicDocument) -> str:
    return _dump(
        {
            "format_version": FORMAT_VERSION,
            "document": "dynamic",
            "static_id": doc.static_id,
            "entities": [_entity_to_json(e) for e in doc.entities],
        }
    )


def parse_static(text: str) -> StaticDocument:
    raw = _loads(text, "static document")
    _require_keys(
        raw, {"format_version", "document", "scenario", "entities"}, set(), "static document"
    )
    _check_header(raw, "static document")
    if raw["document"] != "static":
        raise SchemaError(f"static document: 'document' is {raw['document']!r}")
    sid, duration, metadata = _scenario_header_from_json(raw["scenario"], "static document")
    entities = _entities_from_json(raw["entities"], "static document")
    try:
        return StaticDocument(
            scenario_id=sid, duration=duration, metadata=metadata, entities=tuple(entities)
        )
    except ModelError as exc:
        raise SchemaError(f"static document: {exc}") from None


def parse_dynamic(text: str) -> DynamicDocument:
    raw = _loads(text, "dynamic document")
    _require_keys(
        raw, {"format_version", "document", "static_id", "entities"}, set(), "dynamic document"
    )
    _check_header(raw, "dynamic document")
    if raw["document"] != "dynamic":
        raise SchemaError(f"dynamic document: 'document' is {raw['document']!r}")
    if not isinstance(raw["static_id"], str):
        raise SchemaError("dynamic document: 'static_id' must be a string")
    entities = _entities_from_json(raw["entities"], "dynamic document")
    try:
        return DynamicDocument(static_id=raw["static_id"], entities=tuple(entities))
    except ModelError as exc:
        raise SchemaError(f"dynamic document: {exc}") from None
