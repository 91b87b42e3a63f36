"""Catalog of traffic-entity categories and the layers they may live on.

A :class:`Taxonomy` is a tree of :class:`EntityCategory` nodes rooted at the
single category ``entity``.  Categories are layer-independent classes of
things ("traffic sign", "tree", "vehicle"); a scenario entity carries the
category id together with the layer the instance actually occupies.  Each
category declares the set of layers its instances may be placed on, and the
tree obeys one relaxation rule: a child may always add layer 3, because any
road-network or roadside object can be instantiated as a temporary
modification.

The built-in catalog from :func:`default_taxonomy` covers the standard
entity inventory of the six layers; projects extend it through the JSON
taxonomy file format (:func:`load_taxonomy` / :func:`serialize_taxonomy`).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .errors import ParseError, TaxonomyError
from .layers import Layer, LayerSet

ROOT_CATEGORY_ID = "entity"

_ID_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)*$")


class CategoryFlag(str, Enum):
    """Behavioral markers attached to categories."""

    GUIDANCE_OBJECT = "guidance_object"
    ROADSIDE_STRUCTURE = "roadside_structure"
    MOVABLE = "movable"
    ENVIRONMENTAL_CONDITION = "environmental_condition"
    DIGITAL_INFORMATION = "digital_information"
    TEMPORARY_ONLY = "temporary_only"
    SUPPORTS_PERIODIC_STATE = "supports_periodic_state"


# Flag consistency: carrying the flag requires the layer to be admissible.
_FLAG_REQUIRES_LAYER = {
    CategoryFlag.ENVIRONMENTAL_CONDITION: Layer.ENVIRONMENTAL_CONDITIONS,
    CategoryFlag.DIGITAL_INFORMATION: Layer.DIGITAL_INFORMATION,
    CategoryFlag.MOVABLE: Layer.DYNAMIC_OBJECTS,
}


@dataclass(frozen=True)
class EntityCategory:
    """One node of the category tree.

    ``admissible_layers`` lists where instances of this category may be
    placed.  ``flags`` apply to the category itself; lookups that should
    honor inherited flags go through :meth:`Taxonomy.has_flag`.
    """

    id: str
    display_name: str
    admissible_layers: LayerSet
    parent: str | None = None
    flags: frozenset[CategoryFlag] = frozenset()

    def __post_init__(self):
        if not _ID_RE.match(self.id):
            raise TaxonomyError(f"category id {self.id!r} is not a lowercase dotted path")
        object.__setattr__(
            self, "admissible_layers", frozenset(Layer(l) for l in self.admissible_layers)
        )
        object.__setattr__(self, "flags", frozenset(CategoryFlag(f) for f in self.flags))
        if not self.admissible_layers:
            raise TaxonomyError(f"category {self.id!r} has empty admissible_layers")
        for flag, layer in _FLAG_REQUIRES_LAYER.items():
            if flag in self.flags and layer not in self.admissible_layers:
                raise TaxonomyError(
                    f"category {self.id!r}: flag {flag.value!r} requires layer "
                    f"{layer.value} to be admissible"
                )


@dataclass(frozen=True)
class Taxonomy:
    """Validated, immutable category catalog."""

    categories: dict[str, EntityCategory]
    version: str = "1.0"

    def __post_init__(self):
        object.__setattr__(self, "categories", dict(self.categories))
        roots = []
        for cid, cat in self.categories.items():
            if cid != cat.id:
                raise TaxonomyError(f"category key {cid!r} does not match id {cat.id!r}")
            if cat.parent is None:
                roots.append(cid)
            elif cat.parent not in self.categories:
                raise TaxonomyError(
                    f"category {cid!r}: parent {cat.parent!r} does not exist"
                )
        if roots != [ROOT_CATEGORY_ID]:
            raise TaxonomyError(
                f"expected exactly one root category {ROOT_CATEGORY_ID!r}, found {roots!r}"
            )
        for cid in self.categories:
            seen = set()
            cursor: str | None = cid
            while cursor is not None:
                if cursor in seen:
                    raise TaxonomyError(f"category {cid!r}: cycle in parent chain")
                seen.add(cursor)
                cursor = self.categories[cursor].parent
        # Child layers may only extend the parent's by layer 3 (temporary
        # instantiation is always possible for L1/L2 classes).
        for cat in self.categories.values():
            if cat.parent is None:
                continue
            allowed = self.categories[cat.parent].admissible_layers | {
                Layer.TEMPORARY_MODIFICATIONS
            }
            if not cat.admissible_layers <= allowed:
                raise TaxonomyError(
                    f"category {cat.id!r}: admissible layers "
                    f"{sorted(l.value for l in cat.admissible_layers)} exceed parent's "
                    f"{sorted(l.value for l in allowed)}"
                )

    def get(self, category_id: str) -> EntityCategory:
        try:
            return self.categories[category_id]
        except KeyError:
            raise TaxonomyError(f"unknown category {category_id!r}") from None

    def __contains__(self, category_id: str) -> bool:
        return category_id in self.categories

    def admissible_layers(self, category_id: str) -> LayerSet:
        """Layers on which instances of ``category_id`` may be placed."""
        return self.get(category_id).admissible_layers

    def is_subcategory(self, a: str, b: str) -> bool:
        """True iff ``b`` equals ``a`` or lies on ``a``'s parent chain."""
        self.get(b)
        cursor: str | None = a
        while cursor is not None:
            if cursor == b:
                return True
            cursor = self.get(cursor).parent
        return False

    def has_flag(self, category_id: str, flag: CategoryFlag) -> bool:
        """True iff the category or any of its ancestors carries ``flag``."""
        cursor: str | None = category_id
        while cursor is not None:
            cat = self.get(cursor)
            if flag in cat.flags:
                return True
            cursor = cat.parent
        return False

    def ancestors(self, category_id: str) -> list[str]:
        """Parent chain from the category's parent up to the root."""
        chain = []
        cursor = self.get(category_id).parent
        while cursor is not None:
            chain.append(cursor)
            cursor = self.get(cursor).parent
        return chain


def _cat(
    id: str,
    layers: tuple[int, ...],
    display_name: str,
    parent: str | None,
    *flags: CategoryFlag,
) -> EntityCategory:
    return EntityCategory(
        id=id,
        display_name=display_name,
        admissible_layers=frozenset(Layer(l) for l in layers),
        parent=parent,
        flags=frozenset(flags),
    )


@lru_cache(maxsize=1)
def default_taxonomy() -> Taxonomy:
    """The built-in category catalog.

    Branch nodes carry the branch-wide flags (guidance, roadside,
    environmental, digital); leaf categories add specific markers such as
    ``temporary_only`` on traffic cones or ``movable`` on vehicles.
    """
    g = CategoryFlag.GUIDANCE_OBJECT
    r = CategoryFlag.ROADSIDE_STRUCTURE
    m = CategoryFlag.MOVABLE
    e = CategoryFlag.ENVIRONMENTAL_CONDITION
    d = CategoryFlag.DIGITAL_INFORMATION
    t = CategoryFlag.TEMPORARY_ONLY
    p = CategoryFlag.SUPPORTS_PERIODIC_STATE

    cats = [
        _cat("entity", (1, 2, 3, 4, 5, 6), "Entity", None),
        # Road network: geometry, topology, surface.
        _cat("road_network", (1,), "Road Network", "entity"),
        _cat("road_network.road", (1,), "Road", "road_network"),
        _cat("road_network.road_surface", (1,), "Road Surface", "road_network"),
        # Traffic guidance objects: permanent on L1, temporary instances on L3.
        _cat("guidance", (1, 3), "Traffic Guidance Objects", "entity", g),
        _cat("guidance.road_marking", (1, 3), "Road Marking", "guidance"),
        _cat("guidance.traffic_sign", (1, 3), "Traffic Sign", "guidance"),
        _cat("guidance.traffic_sign.beacon", (1, 3), "Beacon", "guidance.traffic_sign", p),
        _cat("guidance.traffic_sign.cone", (3,), "Traffic Cone", "guidance.traffic_sign", t),
        _cat("guidance.traffic_light", (1, 3), "Traffic Light", "guidance"),
        # Roadside structures; vegetation may additionally appear on L4
        # (a tree falling over follows a trajectory).
        _cat("roadside", (2, 3, 4), "Roadside Structures", "entity", r),
        _cat("roadside.building", (2, 3), "Building", "roadside"),
        _cat("roadside.vegetation", (2, 3, 4), "Vegetation", "roadside", p),
        _cat("roadside.vegetation.tree", (2, 3, 4), "Tree", "roadside.vegetation"),
        _cat("roadside.street_lamp", (2, 3), "Street Lamp", "roadside"),
        _cat("roadside.guardrail", (2, 3), "Guardrail", "roadside"),
        _cat("roadside.advertising_board", (2,), "Advertising Board", "roadside", p),
        _cat("roadside.bus_shelter", (2,), "Bus Shelter", "roadside"),
        _cat("roadside.bollard", (2,), "Bollard", "roadside"),
        _cat("roadside.fountain", (2, 3), "Fountain", "roadside"),
        _cat("roadside.bicycle_stand", (2, 3), "Bicycle Stand", "roadside"),
        # Dynamic objects: everything that moves or could move.
        _cat("dynamic", (4,), "Dynamic Objects", "entity"),
        _cat("dynamic.vehicle", (4,), "Vehicle", "dynamic", m),
        _cat("dynamic.vehicle.trailer", (4,), "Trailer", "dynamic.vehicle", m),
        _cat("dynamic.motorcycle", (4,), "Motorcycle", "dynamic"),
        _cat("dynamic.bicycle", (4,), "Bicycle", "dynamic"),
        _cat("dynamic.pedestrian", (4,), "Pedestrian", "dynamic"),
        _cat("dynamic.rail_vehicle", (4,), "Rail Vehicle", "dynamic"),
        _cat("dynamic.animal", (4,), "Animal", "dynamic"),
        _cat("dynamic.misc_object", (3, 4), "Miscellaneous Object", "dynamic", m),
        # Globally perceptible environmental conditions.
        _cat("env", (5,), "Environmental Conditions", "entity", e),
        _cat("env.precipitation", (5,), "Precipitation", "env"),
        _cat("env.road_weather", (5,), "Road Weather", "env"),
        _cat("env.wind", (5,), "Wind", "env"),
        _cat("env.lighting", (5,), "Lighting", "env"),
        _cat("env.fog", (5,), "Fog", "env"),
        # Digital information: switchable states, messages, coverage.
        _cat("digital", (6,), "Digital Information", "entity", d),
        _cat("digital.v2x_message", (6,), "V2X Message", "digital"),
        _cat("digital.signal_coverage", (6,), "Signal Coverage", "digital"),
        _cat("digital.switchable_state", (6,), "Switchable State", "digital"),
    ]
    return Taxonomy(categories={c.id: c for c in cats}, version="1.0")


def serialize_taxonomy(taxonomy: Taxonomy) -> str:
    """Canonical JSON form: keys sorted, categories sorted by id, layers
    ascending, flags lexicographic.  Newline-terminated."""
    doc = {
        "version": taxonomy.version,
        "categories": [
            {
                "id": cat.id,
                "parent": cat.parent,
                "display_name": cat.display_name,
                "admissible_layers": sorted(l.value for l in cat.admissible_layers),
                "flags": sorted(f.value for f in cat.flags),
            }
            for _, cat in sorted(taxonomy.categories.items())
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_taxonomy(document: str) -> Taxonomy:
    """Parse and validate a taxonomy document.

    Raises :class:`ParseError` for malformed JSON and :class:`TaxonomyError`
    for semantic violations (cycles, dangling parents, empty layer sets,
    inconsistent flags); messages name the offending category.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"taxonomy document: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise TaxonomyError("taxonomy document must be a JSON object")
    unknown = set(raw) - {"version", "categories"}
    if unknown:
        raise TaxonomyError(f"unknown top-level keys: {sorted(unknown)}")
    version = raw.get("version")
    if not isinstance(version, str):
        raise TaxonomyError("'version' must be a string")
    items = raw.get("categories")
    if not isinstance(items, list):
        raise TaxonomyError("'categories' must be an array")

    categories: dict[str, EntityCategory] = {}
    for index, item in enumerate(items):
        where = f"categories[{index}]"
        if not isinstance(item, dict):
            raise TaxonomyError(f"{where}: expected an object")
        unknown = set(item) - {"id", "parent", "display_name", "admissible_layers", "flags"}
        if unknown:
            raise TaxonomyError(f"{where}: unknown keys {sorted(unknown)}")
        cid = item.get("id")
        if not isinstance(cid, str):
            raise TaxonomyError(f"{where}: 'id' must be a string")
        where = f"{where} ({cid!r})"
        parent = item.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise TaxonomyError(f"{where}: 'parent' must be a string or null")
        display = item.get("display_name", cid)
        if not isinstance(display, str):
            raise TaxonomyError(f"{where}: 'display_name' must be a string")
        layers = item.get("admissible_layers")
        if not isinstance(layers, list) or not all(isinstance(l, int) for l in layers):
            raise TaxonomyError(f"{where}: 'admissible_layers' must be an array of integers")
        flags = item.get("flags", [])
        if not isinstance(flags, list) or not all(isinstance(f, str) for f in flags):
            raise TaxonomyError(f"{where}: 'flags' must be an array of strings")
        if cid in categories:
            raise TaxonomyError(f"{where}: duplicate category id")
        try:
            categories[cid] = EntityCategory(
                id=cid,
                display_name=display,
                admissible_layers=frozenset(Layer(l) for l in layers),
                parent=parent,
                flags=frozenset(CategoryFlag(f) for f in flags),
            )
        except ValueError as exc:
            raise TaxonomyError(f"{where}: {exc}") from None
    return Taxonomy(categories=categories, version=version)
