"""
Text rendering of objects, scenes and relation questions.

Phrase grammar::

    phrase := INT INT INT INT WORD+     (locations on)
            | WORD+                     (locations off)
    scene  := phrase (" . " phrase)*

Attributes, when enabled, come between the location tokens and the label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .geometry import GridConfig, LocationTokens, to_location_tokens
from .ingest import DetectedObject, Scene
from .relations import ArityError, RelationCategory, SpatialRelation

SEPARATOR = " . "


class EmptyScene(ValueError):
    pass


class PhraseParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at token {position})")
        self.position = position


@dataclass(frozen=True)
class ObjectPhrase:
    tokens: Tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SceneDescription:
    text: str
    object_count: int


@dataclass(frozen=True)
class ParsedPhrase:
    name: str
    tokens: Optional[LocationTokens] = None


def object_phrase(
    obj: DetectedObject,
    scene: Scene,
    grid: GridConfig = GridConfig(),
    locations: bool = True,
    attributes: bool = False,
) -> ObjectPhrase:
    """Render one detection as ``"x0 y0 x1 y1 [attrs] label"``."""
    tokens = []
    if locations:
        loc = to_location_tokens(scene.normalized(obj), grid)
        tokens.extend(str(v) for v in loc.as_tuple())
    if attributes:
        for attr in obj.attributes:
            tokens.extend(attr.split())
    tokens.extend(obj.label.split())
    return ObjectPhrase(tuple(tokens))


def scene_description(
    scene: Scene,
    grid: GridConfig = GridConfig(),
    locations: bool = True,
    attributes: bool = False,
    separator: str = SEPARATOR,
) -> SceneDescription:
    if not scene.objects:
        raise EmptyScene(f"image {scene.image_id} has no detected objects")
    phrases = [object_phrase(o, scene, grid, locations, attributes).text for o in scene.objects]
    return SceneDescription(separator.join(phrases), len(phrases))


def render_question(rel: SpatialRelation, obj1: str, obj2: Optional[str] = None) -> str:
    rel = SpatialRelation(rel)
    if (rel.arity == 2) != (obj2 is not None):
        raise ArityError(f"'{rel}' takes {rel.arity} object name(s)")
    cat = rel.category
    if cat is RelationCategory.OBJECT_POSITION:
        return f"is {obj1} in {rel} region?"
    if cat is RelationCategory.SIZE_COMPARISON:
        return f"is {obj1} {rel} than {obj2}?"
    if rel is SpatialRelation.SEPARATED:
        return f"are {obj1} and {obj2} separated?"
    return f"is {obj1} {rel} {obj2}?"


def parse_object_phrase(text: str, grid: GridConfig = GridConfig(), locations: bool = True) -> ParsedPhrase:
    """
    Inverse of :func:`object_phrase`.

    Everything after the four location integers is returned as the name, so
    attributes stay glued to the label.

    Raises:
        PhraseParseError: With the index of the first offending token.
    """
    parts = text.split()
    if not locations:
        if not parts:
            raise PhraseParseError("empty phrase", 0)
        return ParsedPhrase(" ".join(parts))
    coords = []
    for i in range(4):
        if i >= len(parts):
            raise PhraseParseError("expected 4 location tokens", i)
        try:
            v = int(parts[i])
        except ValueError:
            raise PhraseParseError(f"expected location token, got {parts[i]!r}", i) from None
        if not 0 <= v < grid.g:
            raise PhraseParseError(f"location token {v} outside grid of size {grid.g}", i)
        coords.append(v)
    if coords[0] > coords[2] or coords[1] > coords[3]:
        raise PhraseParseError(f"location tokens {coords} are not ordered corners", 0)
    if len(parts) == 4:
        raise PhraseParseError("missing object name", 4)
    return ParsedPhrase(" ".join(parts[4:]), LocationTokens(*coords))


def parse_scene_description(
    text: str, grid: GridConfig = GridConfig(), locations: bool = True, separator: str = SEPARATOR
) -> list:
    return [parse_object_phrase(p, grid, locations) for p in text.split(separator)]
