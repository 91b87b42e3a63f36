"""Guideline conformance checks for scenarios.

Each rule family encodes one of the eight layer-model guidelines (G1..G8),
plus T1 for category/layer admissibility against the taxonomy.  ``validate``
never raises on non-conforming content: every finding becomes a
:class:`Diagnostic`, the whole list is produced in one pass, and the result
is deterministic (sorted by entity id, then rule id).

The checks assert only what is decidable from the data.  Judgment calls the
model leaves open (which properties count as actor-dependent, which
annotation keys are known, how long "temporary" may last) sit in
:class:`RuleConfig` with defaults matching the model's own examples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import ParseError, SchemaError, UnknownRuleError
from .layers import Layer, SPATIAL_LAYERS
from .model import Scenario
from .taxonomy import CategoryFlag, Taxonomy

RULE_IDS = ("G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8", "T1")

#: Property prefix that marks a changed state (single-valued on layer 3).
STATE_PREFIX = "state."

#: Annotation keys that claim the entity is in motion.
MOTION_ANNOTATION_KEYS = frozenset({"motion", "maneuver"})

#: Scenario metadata key carrying the real-world standing duration in days.
STANDING_DURATION_KEY = "standing_duration_days"

#: Influence label that marks "this entity is the state of that one".
STATE_OF_LABEL = "state_of"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Diagnostic:
    """One finding: rule id, severity, subject, message, and the anchor
    naming the guideline or definition the rule encodes."""

    rule: str
    severity: Severity
    entity: str
    property: str | None
    message: str
    anchor: str

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity.value,
            "subject": {"entity": self.entity, "property": self.property},
            "message": self.message,
            "anchor": self.anchor,
        }

    def format_text(self) -> str:
        subject = self.entity if self.property is None else f"{self.entity}.{self.property}"
        return f"{self.severity.value.upper()} {self.rule} {subject}: {self.message} [{self.anchor}]"


#: Full guideline statements, served by :func:`explain` and quoted (in part)
#: as diagnostic anchors.
GUIDELINES = {
    "G1": (
        "spatial/temporal separation",
        "Layers 1, 2 and 3 conduct a spatial-based description. They do not "
        "contain any time-variable aspects. Time-based descriptions are "
        "introduced from Layer 4 upwards.",
    ),
    "G2": (
        "temporary changes of layers 1 and 2",
        "Layer 3 contains temporary changes of Layer 1 and 2. These changes "
        "are fixed for the whole duration of the scenario. They are not "
        "permanent in the sense of Layer 1 and 2.",
    ),
    "G3": (
        "state changes",
        "From Layer 3 upwards, state changes are introduced. Additionally, "
        "from Layer 4 upwards state changes can be time-dependent.",
    ),
    "G4": (
        "time-dependent entities belong on layer 4 upwards",
        "If an entity has time-dependent properties (potentially variable "
        "during a scenario), it should be placed on Layer 4 upwards. However, "
        "not all its properties need to be time-dependent.",
    ),
    "G5": (
        "one layer per property",
        "Not all properties of an entity are necessarily in the same layer. "
        "The same property of a given entity should, however, not be located "
        "on different layers. If in doubt where to locate a property, it is "
        "placed in the layer where it matches the description of the layer "
        "best and has the largest influence.",
    ),
    "G6": (
        "annotations",
        "Annotations can be used for reasons of simplicity or in order to add "
        "extra information.",
    ),
    "G7": (
        "allegedly global properties",
        "Allegedly global properties need to be thoroughly checked whether "
        "they are truly objective. If they are not, they are not part of the "
        "six-layer description.",
    ),
    "G8": (
        "influence runs in every direction",
        "Properties of all layers can influence properties on other layers. "
        "There is no single direction of influence.",
    ),
    "T1": (
        "category admissibility",
        "Every entity must sit on a layer that is admissible for its "
        "category; categories marked temporary-only may be instantiated in "
        "Layer 3 only.",
    ),
}

_ANCHORS = {
    "G1": 'Guideline 1: "Layers 1, 2 and 3 conduct a spatial-based description"',
    "G2": 'Guideline 2: "temporary changes of Layer 1 and 2"',
    "G3": 'Guideline 3: "From Layer 3 upwards, state changes are introduced"',
    "G4": 'Guideline 4: "it should be placed on Layer 4 upwards"',
    "G5": 'Guideline 5: "not be located on different layers"',
    "G6": 'Guideline 6: "Annotations can be used for reasons of simplicity"',
    "G7": 'Guideline 7: "Allegedly global properties need to be thoroughly checked"',
    "G8": 'Guideline 8: "There is no single direction of influence"',
    "T1": 'Layer 3 definition: same classes as Layer 1 and 2, "instantiated in Layer 3"',
}


def explain(rule: str) -> str:
    """Full statement of a rule's guideline plus its anchor."""
    if rule not in GUIDELINES:
        raise UnknownRuleError(f"unknown rule {rule!r} (known: {', '.join(RULE_IDS)})")
    label, statement = GUIDELINES[rule]
    return f"{rule} ({label}):\n{statement}\nAnchor: {_ANCHORS[rule]}"


@dataclass(frozen=True)
class RuleConfig:
    """Tunable judgment calls of the rule engine."""

    global_property_blocklist: frozenset[str] = frozenset(
        {"friction_coefficient", "occlusion", "visibility_from_actor"}
    )
    annotation_registry: frozenset[str] = frozenset(
        {"periodic_state", "emergency_duty", "privileges_active"}
    )
    temporary_threshold_days: float = 90.0
    severity_overrides: dict[str, Severity] = field(default_factory=dict)

    def __post_init__(self):
        if self.temporary_threshold_days <= 0:
            raise SchemaError("temporary_threshold_days must be > 0")
        object.__setattr__(
            self, "global_property_blocklist", frozenset(self.global_property_blocklist)
        )
        object.__setattr__(self, "annotation_registry", frozenset(self.annotation_registry))
        overrides = {}
        for rule, severity in self.severity_overrides.items():
            if rule not in RULE_IDS:
                raise SchemaError(f"severity override for unknown rule {rule!r}")
            overrides[rule] = Severity(severity)
        object.__setattr__(self, "severity_overrides", overrides)


DEFAULT_CONFIG = RuleConfig()


def load_config(text: str) -> RuleConfig:
    """Read a config file (JSON); absent fields keep their defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise SchemaError("config: top level must be a JSON object")
    known = {
        "global_property_blocklist",
        "annotation_registry",
        "temporary_threshold_days",
        "severity_overrides",
    }
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(f"config: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key in ("global_property_blocklist", "annotation_registry"):
        if key in raw:
            if not isinstance(raw[key], list) or not all(isinstance(x, str) for x in raw[key]):
                raise SchemaError(f"config: {key!r} must be an array of strings")
            kwargs[key] = frozenset(raw[key])
    if "temporary_threshold_days" in raw:
        value = raw["temporary_threshold_days"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError("config: 'temporary_threshold_days' must be a number")
        kwargs["temporary_threshold_days"] = float(value)
    if "severity_overrides" in raw:
        if not isinstance(raw["severity_overrides"], dict):
            raise SchemaError("config: 'severity_overrides' must be an object")
        try:
            kwargs["severity_overrides"] = {
                rule: Severity(sev) for rule, sev in raw["severity_overrides"].items()
            }
        except ValueError as exc:
            raise SchemaError(f"config: {exc}") from None
    return RuleConfig(**kwargs)


def _standing_duration(metadata: dict[str, str]) -> float | None:
    raw = metadata.get(STANDING_DURATION_KEY)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        return None


def validate(
    scenario: Scenario, taxonomy: Taxonomy, config: RuleConfig | None = None
) -> list[Diagnostic]:
    """Run every rule over the scenario and return all findings.

    An empty list means the scenario conforms.  Unresolvable categories are
    reported as T1 errors, not raised.
    """
    config = config if config is not None else DEFAULT_CONFIG
    findings: list[Diagnostic] = []
    entity_map = scenario.entity_map()
    standing_days = _standing_duration(scenario.metadata)

    def emit(rule, severity, entity, prop, message):
        severity = config.severity_overrides.get(rule, severity)
        findings.append(
            Diagnostic(
                rule=rule,
                severity=severity,
                entity=entity,
                property=prop,
                message=message,
                anchor=_ANCHORS[rule],
            )
        )

    for entity in scenario.entities:
        known_category = entity.category in taxonomy
        spatial = entity.layer in SPATIAL_LAYERS
        on_l3 = entity.layer == Layer.TEMPORARY_MODIFICATIONS
        movable = known_category and taxonomy.has_flag(entity.category, CategoryFlag.MOVABLE)

        # T1: the taxonomy has the final word on where instances may live.
        if not known_category:
            emit(
                "T1",
                Severity.ERROR,
                entity.id,
                None,
                f"unknown category {entity.category!r}",
            )
        else:
            admissible = taxonomy.admissible_layers(entity.category)
            if entity.layer not in admissible:
                emit(
                    "T1",
                    Severity.ERROR,
                    entity.id,
                    None,
                    f"layer {entity.layer.value} is not admissible for category "
                    f"{entity.category!r} (admissible: "
                    f"{sorted(l.value for l in admissible)})",
                )
            elif (
                taxonomy.has_flag(entity.category, CategoryFlag.TEMPORARY_ONLY)
                and not on_l3
            ):
                emit(
                    "T1",
                    Severity.ERROR,
                    entity.id,
                    None,
                    f"category {entity.category!r} is temporary-only and belongs "
                    f"on layer 3, not {entity.layer.value}",
                )

        # G1/G3: no time series below layer 4; on layer 3 a series under the
        # state. prefix is the more specific G3 violation.
        series_props = [p for p in entity.properties if p.is_series]
        for prop in series_props:
            if not spatial:
                continue
            if on_l3 and prop.name.startswith(STATE_PREFIX):
                emit(
                    "G3",
                    Severity.ERROR,
                    entity.id,
                    prop.name,
                    "a changed state on layer 3 must be single-valued for the "
                    "whole scenario, not a time series",
                )
            else:
                emit(
                    "G1",
                    Severity.ERROR,
                    entity.id,
                    prop.name,
                    f"time series on spatial layer {entity.layer.value}; "
                    "time-based description starts at layer 4",
                )

        # G4: movable categories below layer 4.
        if spatial and movable:
            if series_props:
                emit(
                    "G4",
                    Severity.ERROR,
                    entity.id,
                    None,
                    f"movable category {entity.category!r} on layer "
                    f"{entity.layer.value} with time-varying data",
                )
            else:
                claimed = sorted(set(entity.annotation_map()) & MOTION_ANNOTATION_KEYS)
                if claimed:
                    emit(
                        "G4",
                        Severity.WARNING,
                        entity.id,
                        None,
                        f"movable category {entity.category!r} on layer "
                        f"{entity.layer.value} with annotations claiming motion: "
                        f"{', '.join(claimed)}",
                    )

        # G2: layer 3 holds temporary changes of L1/L2 content.
        if on_l3:
            if entity.modifies is not None:
                target = entity_map.get(entity.modifies)
                if target is None:
                    emit(
                        "G2",
                        Severity.ERROR,
                        entity.id,
                        None,
                        f"modifies target {entity.modifies!r} not found",
                    )
                elif target.layer not in (Layer.ROAD_NETWORK, Layer.ROADSIDE_STRUCTURES):
                    emit(
                        "G2",
                        Severity.ERROR,
                        entity.id,
                        None,
                        f"modifies target {entity.modifies!r} is on layer "
                        f"{target.layer.value}, expected 1 or 2",
                    )
            elif known_category:
                admissible = taxonomy.admissible_layers(entity.category)
                if (
                    Layer.ROAD_NETWORK not in admissible
                    and Layer.ROADSIDE_STRUCTURES not in admissible
                ):
                    emit(
                        "G2",
                        Severity.ERROR,
                        entity.id,
                        None,
                        f"layer-3 entity of category {entity.category!r} is not of "
                        "an L1/L2 class and names no modified entity",
                    )
            if standing_days is not None and standing_days > config.temporary_threshold_days:
                emit(
                    "G2",
                    Severity.INFO,
                    entity.id,
                    None,
                    f"declared standing duration of {standing_days:g} days exceeds "
                    f"the {config.temporary_threshold_days:g}-day orientation for "
                    "temporary modifications",
                )

        # G5: a property of one thing must not live on two layers at once.
        links = []
        if entity.modifies is not None:
            links.append(entity.modifies)
        links.extend(i.target for i in entity.influences if i.label == STATE_OF_LABEL)
        own_names = {p.name for p in entity.properties}
        for target_id in links:
            target = entity_map.get(target_id)
            if target is None or target.layer == entity.layer:
                continue
            for name in sorted(own_names & {p.name for p in target.properties}):
                emit(
                    "G5",
                    Severity.ERROR,
                    entity.id,
                    name,
                    f"property {name!r} is declared on layer {entity.layer.value} "
                    f"here and on layer {target.layer.value} of linked entity "
                    f"{target_id!r}",
                )

        # G6: annotations are free, but unknown keys are worth a look.
        for annotation in entity.annotations:
            if annotation.key not in config.annotation_registry:
                emit(
                    "G6",
                    Severity.WARNING,
                    entity.id,
                    None,
                    f"annotation key {annotation.key!r} is not in the registry",
                )
            if (
                annotation.key == "periodic_state"
                and known_category
                and not taxonomy.has_flag(
                    entity.category, CategoryFlag.SUPPORTS_PERIODIC_STATE
                )
            ):
                emit(
                    "G6",
                    Severity.INFO,
                    entity.id,
                    None,
                    f"periodic_state on category {entity.category!r}, which does "
                    "not declare periodic-state support",
                )

        # G7: actor-dependent quantities are derived, never stored.
        for prop in entity.properties:
            if prop.name in config.global_property_blocklist:
                emit(
                    "G7",
                    Severity.ERROR,
                    entity.id,
                    prop.name,
                    f"property {prop.name!r} is not an objective part of the "
                    "environment description; derive it from the description "
                    "instead of storing it",
                )

        # G8: any direction of influence is fine, but targets must exist.
        for influence in entity.influences:
            if influence.target not in entity_map:
                emit(
                    "G8",
                    Severity.ERROR,
                    entity.id,
                    None,
                    f"influence target {influence.target!r} not found",
                )

    findings.sort(key=lambda d: (d.entity, d.rule, d.property or "", d.message))
    return findings


def diagnostics_to_json(diagnostics: list[Diagnostic]) -> list[dict]:
    return [d.to_json() for d in diagnostics]


def format_diagnostics_text(diagnostics: list[Diagnostic]) -> str:
    return "\n".join(d.format_text() for d in diagnostics)
