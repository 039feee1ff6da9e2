"""
The 23 box-decidable spatial relations and their rules.

Relations fall in three categories: where a single object sits in the image,
how the sizes of two objects compare, and how two objects are placed with
respect to each other.
"""

from __future__ import annotations

from enum import Enum
from typing import FrozenSet, Optional

from .geometry import (
    DegenerateAngle,
    NormalizedBox,
    center_offset,
    inscribed,
    iou,
    measures,
)


class RelationCategory(str, Enum):
    OBJECT_POSITION = "object_position"
    SIZE_COMPARISON = "size_comparison"
    TWO_OBJECT_POSITIONAL = "two_object_positional"

    @property
    def arity(self) -> int:
        return 1 if self is RelationCategory.OBJECT_POSITION else 2


class SpatialRelation(str, Enum):
    TOP_LEFT = "top left"
    BOTTOM_LEFT = "bottom left"
    LEFT = "left"
    TOP_RIGHT = "top right"
    BOTTOM_RIGHT = "bottom right"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"
    CENTER = "center"

    WIDER = "wider"
    NARROWER = "narrower"
    TALLER = "taller"
    SHORTER = "shorter"
    LARGER = "larger"
    SMALLER = "smaller"

    SURROUNDING = "surrounding"
    INSIDE = "inside"
    LEFT_OF = "left of"
    ABOVE = "above"
    RIGHT_OF = "right of"
    BELOW = "below"
    OVERLAPPING = "overlapping"
    SEPARATED = "separated"

    @property
    def category(self) -> RelationCategory:
        return _CATEGORY[self]

    @property
    def arity(self) -> int:
        return self.category.arity

    def __str__(self) -> str:
        return self.value


R = SpatialRelation

_CATEGORY = {}
for _r in (R.TOP_LEFT, R.BOTTOM_LEFT, R.LEFT, R.TOP_RIGHT, R.BOTTOM_RIGHT, R.RIGHT, R.TOP, R.BOTTOM, R.CENTER):
    _CATEGORY[_r] = RelationCategory.OBJECT_POSITION
for _r in (R.WIDER, R.NARROWER, R.TALLER, R.SHORTER, R.LARGER, R.SMALLER):
    _CATEGORY[_r] = RelationCategory.SIZE_COMPARISON
for _r in (R.SURROUNDING, R.INSIDE, R.LEFT_OF, R.ABOVE, R.RIGHT_OF, R.BELOW, R.OVERLAPPING, R.SEPARATED):
    _CATEGORY[_r] = RelationCategory.TWO_OBJECT_POSITIONAL

RELATIONS_BY_CATEGORY = {
    cat: tuple(r for r in SpatialRelation if r.category is cat) for cat in RelationCategory
}

SECTOR_RELATIONS = frozenset({R.LEFT_OF, R.RIGHT_OF, R.ABOVE, R.BELOW})

# Checked in order; quadrants win over halves, anything else is the center.
QUADRANTS = (
    (R.TOP_LEFT, NormalizedBox(0.0, 0.0, 0.5, 0.5)),
    (R.TOP_RIGHT, NormalizedBox(0.5, 0.0, 1.0, 0.5)),
    (R.BOTTOM_LEFT, NormalizedBox(0.0, 0.5, 0.5, 1.0)),
    (R.BOTTOM_RIGHT, NormalizedBox(0.5, 0.5, 1.0, 1.0)),
)
HALVES = (
    (R.TOP, NormalizedBox(0.0, 0.0, 1.0, 0.5)),
    (R.BOTTOM, NormalizedBox(0.0, 0.5, 1.0, 1.0)),
    (R.LEFT, NormalizedBox(0.0, 0.0, 0.5, 1.0)),
    (R.RIGHT, NormalizedBox(0.5, 0.0, 1.0, 1.0)),
)


class ArityError(ValueError):
    """A relation was given the wrong number of boxes."""


def position_in_image(nbox: NormalizedBox) -> SpatialRelation:
    """
    Classify the region of the image a box falls in.

    A box inscribed in a quadrant gets that quadrant; otherwise a box
    inscribed in a half gets that half; everything else is ``center``.
    """
    for rel, region in QUADRANTS:
        if inscribed(nbox, region):
            return rel
    for rel, region in HALVES:
        if inscribed(nbox, region):
            return rel
    return R.CENTER


def direction(subject: NormalizedBox, obj: NormalizedBox) -> SpatialRelation:
    """
    Which of left of / right of / above / below the subject is, from its center
    angle to the object center.

    Sectors are half-open with the lower angle inclusive: right of covers
    [-pi/4, pi/4), above [-3pi/4, -pi/4), below [pi/4, 3pi/4), left of the
    rest. Decided with exact comparisons on the center offset instead of
    atan2 so swapping the arguments always gives the mirrored answer.

    Raises:
        DegenerateAngle: If the two centers coincide.
    """
    dx, dy = center_offset(subject, obj)
    if dx == 0.0 and dy == 0.0:
        raise DegenerateAngle("boxes share a center; direction is undefined")
    if dx > 0 and -dx <= dy < dx:
        return R.RIGHT_OF
    if dy < 0 and dy <= dx < -dy:
        return R.ABOVE
    if dy > 0 and -dy < dx <= dy:
        return R.BELOW
    return R.LEFT_OF


def holds(rel: SpatialRelation, subject: NormalizedBox, obj: Optional[NormalizedBox] = None) -> bool:
    """
    Decide whether ``rel`` is true for the subject (and object) boxes.

    Args:
        rel: Relation to test
        subject: Box of the first object
        obj: Box of the second object; required iff the relation is binary

    Returns:
        bool

    Raises:
        ArityError: If ``obj`` is given for a one-object relation or missing
            for a two-object one.
        DegenerateAngle: For left of / right of / above / below when both
            centers coincide.
    """
    rel = SpatialRelation(rel)
    if rel.arity == 1:
        if obj is not None:
            raise ArityError(f"'{rel}' takes a single object")
        return position_in_image(subject) is rel
    if obj is None:
        raise ArityError(f"'{rel}' needs two objects")

    if rel.category is RelationCategory.SIZE_COMPARISON:
        sw, sh, sa = measures(subject)
        ow, oh, oa = measures(obj)
        return {
            R.WIDER: sw > ow,
            R.NARROWER: sw < ow,
            R.TALLER: sh > oh,
            R.SHORTER: sh < oh,
            R.LARGER: sa > oa,
            R.SMALLER: sa < oa,
        }[rel]

    if rel is R.INSIDE:
        return inscribed(subject, obj)
    if rel is R.SURROUNDING:
        return inscribed(obj, subject)
    if rel is R.OVERLAPPING:
        return iou(subject, obj) > 0.0
    if rel is R.SEPARATED:
        return iou(subject, obj) == 0.0
    return direction(subject, obj) is rel


def _check_arity(category: RelationCategory, obj: Optional[NormalizedBox]) -> None:
    if (category.arity == 2) != (obj is not None):
        raise ArityError(f"category {category.value} takes {category.arity} object(s)")


def true_relations(
    category: RelationCategory, subject: NormalizedBox, obj: Optional[NormalizedBox] = None
) -> FrozenSet[SpatialRelation]:
    """All relations of ``category`` that hold for the given boxes."""
    category = RelationCategory(category)
    _check_arity(category, obj)
    if category is RelationCategory.OBJECT_POSITION:
        return frozenset({position_in_image(subject)})
    return frozenset(r for r in RELATIONS_BY_CATEGORY[category] if holds(r, subject, obj))


def false_relations(
    category: RelationCategory, subject: NormalizedBox, obj: Optional[NormalizedBox] = None
) -> FrozenSet[SpatialRelation]:
    """Complement of :func:`true_relations` within the category."""
    category = RelationCategory(category)
    return frozenset(RELATIONS_BY_CATEGORY[category]) - true_relations(category, subject, obj)
