"""The six layers of the environment model and helpers for layer sets.

Layer numbering is structural, not a ranking: every entity of a scenario
lives on exactly one layer, and tooling (projection, diff, validation)
groups its output by layer.
"""

from __future__ import annotations

from enum import IntEnum

from .errors import ModelError


class Layer(IntEnum):
    """One of the six description layers."""

    ROAD_NETWORK = 1
    ROADSIDE_STRUCTURES = 2
    TEMPORARY_MODIFICATIONS = 3
    DYNAMIC_OBJECTS = 4
    ENVIRONMENTAL_CONDITIONS = 5
    DIGITAL_INFORMATION = 6

    @property
    def canonical_name(self) -> str:
        return _CANONICAL_NAMES[self]


# Byte-exact names used everywhere a layer is rendered for humans.
_CANONICAL_NAMES = {
    Layer.ROAD_NETWORK: "Road Network and Traffic Guidance Objects",
    Layer.ROADSIDE_STRUCTURES: "Roadside Structures",
    Layer.TEMPORARY_MODIFICATIONS: "Temporary Modifications of L1 and L2",
    Layer.DYNAMIC_OBJECTS: "Dynamic Objects",
    Layer.ENVIRONMENTAL_CONDITIONS: "Environmental Conditions",
    Layer.DIGITAL_INFORMATION: "Digital Information",
}

LayerSet = frozenset[Layer]

ALL_LAYERS: LayerSet = frozenset(Layer)
#: Layers carrying the spatial, time-invariant part of a description.
SPATIAL_LAYERS: LayerSet = frozenset(
    {Layer.ROAD_NETWORK, Layer.ROADSIDE_STRUCTURES, Layer.TEMPORARY_MODIFICATIONS}
)
#: Layers that may carry time-varying content.
TEMPORAL_LAYERS: LayerSet = ALL_LAYERS - SPATIAL_LAYERS


def coerce_layer(value: int | Layer) -> Layer:
    """Return ``value`` as a :class:`Layer`, rejecting anything outside 1..6."""
    try:
        return Layer(value)
    except ValueError:
        raise ModelError(f"layer out of range: {value!r} (expected 1..6)") from None


def parse_layer_set(text: str) -> LayerSet:
    """Parse a comma-separated layer list such as ``"1,4"``.

    Raises :class:`ModelError` on empty tokens or out-of-range layers.
    """
    members = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ModelError(f"empty layer token in {text!r}")
        try:
            number = int(token)
        except ValueError:
            raise ModelError(f"bad layer token {token!r} (expected an integer 1..6)") from None
        members.add(coerce_layer(number))
    return frozenset(members)


def format_layer_set(layers: LayerSet) -> str:
    """Render a layer set as the ascending comma-separated form, e.g. ``"1,4"``."""
    return ",".join(str(layer.value) for layer in sorted(layers))
