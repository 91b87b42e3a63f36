"""Instance data model: scenarios, entities, properties, and time evaluation.

A :class:`Scenario` spans a duration in seconds and owns entities, each
assigned to one layer.  Properties hold either a plain value (constant for
the whole scenario) or a :class:`TimeSeries`; evaluating an entity at a
timestamp collapses every series to a plain value, which is exactly what a
scene snapshot is.

Structural rules (value shapes, bounds, uniqueness) are enforced here, at
construction time.  Conformance with the layer-model guidelines is *not* --
that is the job of :mod:`sixlayer.rules`, so that non-conforming scenarios
can be represented, inspected, and diagnosed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

from . import taxonomy as taxonomy_mod
from .errors import ModelError
from .geometry import is_simple_polygon
from .layers import Layer, coerce_layer

STEP = "step"
LINEAR = "linear"

#: Annotation values allowed for the reserved ``periodic_state`` key.
PERIODIC_STATES = ("flashing", "oscillating")


def _finite(x: float, what: str) -> float:
    value = float(x)
    if not math.isfinite(value):
        raise ModelError(f"{what} must be finite, got {x!r}")
    return value


@dataclass(frozen=True)
class Quantity:
    """A number carrying a unit string (unitless numbers are plain floats)."""

    value: float
    unit: str

    def __post_init__(self):
        object.__setattr__(self, "value", _finite(self.value, "quantity value"))
        if not self.unit:
            raise ModelError("quantity unit must be a non-empty string; use a plain float otherwise")


@dataclass(frozen=True)
class EnumToken:
    """A symbolic state value such as ``dry`` or ``red``."""

    token: str

    def __post_init__(self):
        if not self.token:
            raise ModelError("enum token must be non-empty")


@dataclass(frozen=True)
class Vector:
    """2D or 3D vector; meters for positions, m/s for velocities."""

    components: tuple[float, ...]

    def __post_init__(self):
        comps = tuple(_finite(c, "vector component") for c in self.components)
        if len(comps) not in (2, 3):
            raise ModelError(f"vector must have 2 or 3 components, got {len(comps)}")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class Polygon:
    """Simple 2D polygon, ordered vertex ring in meters."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple(
            (_finite(x, "polygon x"), _finite(y, "polygon y")) for x, y in self.vertices
        )
        if len(verts) < 3:
            raise ModelError("polygon needs at least 3 vertices")
        if not is_simple_polygon(verts):
            raise ModelError("polygon must be simple (non-self-intersecting)")
        object.__setattr__(self, "vertices", verts)


PropertyValue = Union[float, bool, str, Quantity, EnumToken, Vector, Polygon]

_LINEAR_KINDS = ("number", "vector")


def normalize_value(value) -> PropertyValue:
    """Coerce a raw input into a canonical property value (ints to floats)."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return _finite(value, "number value")
    if isinstance(value, (str, Quantity, EnumToken, Vector, Polygon)):
        return value
    raise ModelError(f"unsupported property value {value!r}")


def value_kind(value: PropertyValue) -> tuple:
    """Kind tag used for series consistency checks.

    Numbers include their unit (a unitless float and a quantity in meters
    are different kinds); vectors include their dimension.
    """
    if isinstance(value, bool):
        return ("boolean",)
    if isinstance(value, float):
        return ("number", None)
    if isinstance(value, Quantity):
        return ("number", value.unit)
    if isinstance(value, str):
        return ("text",)
    if isinstance(value, EnumToken):
        return ("enum",)
    if isinstance(value, Vector):
        return ("vector", len(value.components))
    if isinstance(value, Polygon):
        return ("polygon",)
    raise ModelError(f"unsupported property value {value!r}")


@dataclass(frozen=True)
class TimeSeries:
    """Sampled time-varying value over the scenario timeline.

    Samples are (t, value) pairs with strictly increasing timestamps.  A
    series must actually vary: single-sample or all-equal series are
    rejected because a constant belongs in a plain property.
    """

    samples: tuple[tuple[float, PropertyValue], ...]
    interpolation: str = STEP

    def __post_init__(self):
        if self.interpolation not in (STEP, LINEAR):
            raise ModelError(f"unknown interpolation {self.interpolation!r}")
        normalized = tuple(
            (_finite(t, "sample time"), normalize_value(v)) for t, v in self.samples
        )
        object.__setattr__(self, "samples", normalized)
        if len(normalized) < 2:
            raise ModelError("time series needs at least 2 samples")
        times = [t for t, _ in normalized]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ModelError("sample timestamps must be strictly increasing")
        if times[0] < 0:
            raise ModelError("sample timestamps must be non-negative")
        kinds = {value_kind(v) for _, v in normalized}
        if len(kinds) != 1:
            raise ModelError(f"series mixes value kinds: {sorted(kinds)}")
        if all(v == normalized[0][1] for _, v in normalized):
            raise ModelError("series values are all equal; use a constant property")
        if self.interpolation == LINEAR and next(iter(kinds))[0] not in _LINEAR_KINDS:
            raise ModelError("linear interpolation requires numeric or vector values")

    @property
    def kind(self) -> tuple:
        return value_kind(self.samples[0][1])


@dataclass(frozen=True)
class Property:
    name: str
    value: PropertyValue | TimeSeries

    def __post_init__(self):
        if not self.name or any(c.isspace() for c in self.name):
            raise ModelError(f"bad property name {self.name!r}")
        if not isinstance(self.value, TimeSeries):
            object.__setattr__(self, "value", normalize_value(self.value))

    @property
    def is_series(self) -> bool:
        return isinstance(self.value, TimeSeries)


@dataclass(frozen=True)
class Annotation:
    """Lightweight key/value note on an entity."""

    key: str
    value: str

    def __post_init__(self):
        if not self.key or any(c.isspace() for c in self.key):
            raise ModelError(f"bad annotation key {self.key!r}")
        if not isinstance(self.value, str):
            raise ModelError(f"annotation value must be text, got {self.value!r}")
        if self.key == "periodic_state" and self.value not in PERIODIC_STATES:
            raise ModelError(
                f"periodic_state must be one of {PERIODIC_STATES}, got {self.value!r}"
            )


@dataclass(frozen=True)
class Influence:
    """Directed influence link to another entity, with a free-text label."""

    target: str
    label: str

    def __post_init__(self):
        if not self.target:
            raise ModelError("influence target must be non-empty")
        if not self.label:
            raise ModelError("influence label must be non-empty")


@dataclass(frozen=True)
class Entity:
    """One entity of a scenario, placed on exactly one layer.

    ``modifies`` names the L1/L2 entity a temporary modification replaces or
    covers; it is only meaningful (and only allowed) on layer 3.
    ``lifespan`` bounds the entity's existence inside the scenario; absent
    means the whole duration.
    """

    id: str
    category: str
    layer: Layer
    properties: tuple[Property, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    influences: tuple[Influence, ...] = ()
    lifespan: tuple[float, float] | None = None
    modifies: str | None = None

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise ModelError(f"bad entity id {self.id!r}")
        if not self.category:
            raise ModelError(f"entity {self.id!r}: empty category")
        object.__setattr__(self, "layer", coerce_layer(self.layer))
        props = tuple(sorted(self.properties, key=lambda p: p.name))
        names = [p.name for p in props]
        if len(set(names)) != len(names):
            raise ModelError(f"entity {self.id!r}: duplicate property names")
        object.__setattr__(self, "properties", props)
        annos = tuple(sorted(self.annotations, key=lambda a: a.key))
        keys = [a.key for a in annos]
        if len(set(keys)) != len(keys):
            raise ModelError(f"entity {self.id!r}: duplicate annotation keys")
        object.__setattr__(self, "annotations", annos)
        object.__setattr__(
            self, "influences", tuple(sorted(self.influences, key=lambda i: (i.target, i.label)))
        )
        if self.lifespan is not None:
            start, end = (
                _finite(self.lifespan[0], "lifespan start"),
                _finite(self.lifespan[1], "lifespan end"),
            )
            if not 0 <= start < end:
                raise ModelError(
                    f"entity {self.id!r}: lifespan must satisfy 0 <= start < end"
                )
            object.__setattr__(self, "lifespan", (start, end))
        if self.modifies is not None and self.layer != Layer.TEMPORARY_MODIFICATIONS:
            raise ModelError(
                f"entity {self.id!r}: 'modifies' is only allowed on layer 3"
            )

    def property_map(self) -> dict[str, Property]:
        return {p.name: p for p in self.properties}

    def annotation_map(self) -> dict[str, str]:
        return {a.key: a.value for a in self.annotations}

    def has_time_series(self) -> bool:
        return any(p.is_series for p in self.properties)


@dataclass(frozen=True)
class Scenario:
    """Immutable scenario: header plus entities, normalized to canonical order.

    Entities are stored sorted by (layer, id).  Construction checks local
    structure (bounds against the duration, unique ids); reference targets
    are checked by the authoring paths (:class:`ScenarioBuilder`,
    :func:`sixlayer.codec.merge`) and reported by the rule engine otherwise.
    """

    id: str
    duration: float
    entities: tuple[Entity, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise ModelError(f"bad scenario id {self.id!r}")
        duration = _finite(self.duration, "duration")
        if duration <= 0:
            raise ModelError(f"duration must be > 0, got {duration!r}")
        object.__setattr__(self, "duration", duration)
        ordered = tuple(sorted(self.entities, key=lambda e: (e.layer.value, e.id)))
        object.__setattr__(self, "entities", ordered)
        ids = [e.id for e in ordered]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ModelError(f"duplicate entity ids: {dupes}")
        for entity in ordered:
            _check_entity_bounds(entity, duration)
        if not isinstance(self.metadata, dict):
            raise ModelError("metadata must be a string map")
        for k, v in self.metadata.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ModelError("metadata keys and values must be strings")
        object.__setattr__(self, "metadata", dict(self.metadata))

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise ModelError(f"no entity {entity_id!r} in scenario {self.id!r}")

    def entity_map(self) -> dict[str, Entity]:
        return {e.id: e for e in self.entities}


def _check_entity_bounds(entity: Entity, duration: float) -> None:
    if entity.lifespan is not None and entity.lifespan[1] > duration:
        raise ModelError(
            f"entity {entity.id!r}: lifespan end {entity.lifespan[1]} exceeds "
            f"duration {duration}"
        )
    for prop in entity.properties:
        if prop.is_series:
            last_t = prop.value.samples[-1][0]
            if last_t > duration:
                raise ModelError(
                    f"entity {entity.id!r}: sample at t={last_t} outside "
                    f"[0, {duration}] in property {prop.name!r}"
                )


@dataclass(frozen=True)
class SceneEntity:
    """An entity as it appears in a snapshot: every property evaluated."""

    id: str
    category: str
    layer: Layer
    properties: dict[str, PropertyValue]
    annotations: dict[str, str]


@dataclass(frozen=True)
class Scene:
    """Snapshot of a scenario at one timestamp; no time series remain."""

    scenario_id: str
    timestamp: float
    entities: tuple[SceneEntity, ...]


class ScenarioBuilder:
    """Single-owner, mutable assembly of a scenario.

    ``finish`` performs the checks that need the complete picture: influence
    and ``modifies`` targets must resolve, categories must exist in the
    taxonomy given at construction (the built-in catalog by default).
    """

    def __init__(self, scenario_id: str, duration: float, taxonomy=None):
        duration = _finite(duration, "duration")
        if duration <= 0:
            raise ModelError(f"duration must be > 0, got {duration!r}")
        self.id = scenario_id
        self.duration = duration
        self.taxonomy = taxonomy if taxonomy is not None else taxonomy_mod.default_taxonomy()
        self.metadata: dict[str, str] = {}
        self._entities: list[Entity] = []
        self._ids: set[str] = set()

    def add_entity(self, entity: Entity) -> "ScenarioBuilder":
        if entity.id in self._ids:
            raise ModelError(f"duplicate entity id {entity.id!r}")
        if entity.category not in self.taxonomy:
            raise ModelError(f"entity {entity.id!r}: unknown category {entity.category!r}")
        _check_entity_bounds(entity, self.duration)
        self._entities.append(entity)
        self._ids.add(entity.id)
        return self

    def set_metadata(self, key: str, value: str) -> "ScenarioBuilder":
        self.metadata[key] = value
        return self

    def finish(self) -> Scenario:
        for entity in self._entities:
            if entity.modifies is not None and entity.modifies not in self._ids:
                raise ModelError(
                    f"entity {entity.id!r}: modifies target {entity.modifies!r} not found"
                )
            for link in entity.influences:
                if link.target not in self._ids:
                    raise ModelError(
                        f"entity {entity.id!r}: influence target {link.target!r} not found"
                    )
        return Scenario(
            id=self.id,
            duration=self.duration,
            entities=tuple(self._entities),
            metadata=dict(self.metadata),
        )


def new_scenario(scenario_id: str, duration: float, taxonomy=None) -> ScenarioBuilder:
    """Start building a scenario of the given duration (seconds, > 0)."""
    return ScenarioBuilder(scenario_id, duration, taxonomy)


def entity_exists_at(entity: Entity, t: float, duration: float) -> bool:
    """Whether the entity exists at time ``t`` (closed lifespan interval)."""
    if not 0 <= t <= duration:
        raise ModelError(f"t={t} outside scenario range [0, {duration}]")
    if entity.lifespan is None:
        return True
    return entity.lifespan[0] <= t <= entity.lifespan[1]


def _lerp_value(v0: PropertyValue, v1: PropertyValue, u: float) -> PropertyValue:
    if isinstance(v0, float):
        return v0 + u * (v1 - v0)
    if isinstance(v0, Quantity):
        return Quantity(v0.value + u * (v1.value - v0.value), v0.unit)
    if isinstance(v0, Vector):
        return Vector(
            tuple(a + u * (b - a) for a, b in zip(v0.components, v1.components))
        )
    raise ModelError(f"cannot interpolate value kind {value_kind(v0)}")


def evaluate_series(series: TimeSeries, t: float) -> PropertyValue:
    """Series value at time ``t``.

    Step series hold the latest sample at or before ``t`` (the first sample
    before that).  Linear series interpolate componentwise between the
    bracketing samples and clamp outside the sampled range.
    """
    samples = series.samples
    if t <= samples[0][0]:
        return samples[0][1]
    if t >= samples[-1][0]:
        return samples[-1][1]
    # Invariant above guarantees a bracketing pair exists.
    for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
        if t0 <= t < t1:
            if series.interpolation == STEP:
                return v0
            return _lerp_value(v0, v1, (t - t0) / (t1 - t0))
    raise AssertionError("unreachable: sorted samples bracket t")


def evaluate_property(entity: Entity, name: str, t: float) -> PropertyValue:
    """Plain value of the named property at time ``t``.

    Constants are time-invariant; series are evaluated per their
    interpolation mode.  ``t`` must fall inside the entity's lifespan.
    """
    if entity.lifespan is not None and not (entity.lifespan[0] <= t <= entity.lifespan[1]):
        raise ModelError(
            f"t={t} outside lifespan {list(entity.lifespan)} of entity {entity.id!r}"
        )
    for prop in entity.properties:
        if prop.name == name:
            if isinstance(prop.value, TimeSeries):
                return evaluate_series(prop.value, t)
            return prop.value
    raise ModelError(f"entity {entity.id!r} has no property {name!r}")


def with_entities(scenario: Scenario, entities: tuple[Entity, ...]) -> Scenario:
    """Copy of the scenario with a different entity tuple (internal helper
    for projection and diff tooling; performs the same local checks)."""
    return replace(scenario, entities=entities)
