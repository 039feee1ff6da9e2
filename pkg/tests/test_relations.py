import math
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spatialtok.geometry import DegenerateAngle, NormalizedBox, center_angle
from spatialtok.relations import (
    RELATIONS_BY_CATEGORY,
    ArityError,
    RelationCategory,
    SpatialRelation as R,
    false_relations,
    holds,
    position_in_image,
    true_relations,
)

from conftest import random_nbox

POS = RelationCategory.TWO_OBJECT_POSITIONAL
SIZE = RelationCategory.SIZE_COMPARISON
ONE = RelationCategory.OBJECT_POSITION

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def nboxes(draw):
    x0, x1 = sorted((draw(unit), draw(unit)))
    y0, y1 = sorted((draw(unit), draw(unit)))
    return NormalizedBox(x0, y0, x1, y1)


def box_at(cx, cy, half=0.05):
    return NormalizedBox(cx - half, cy - half, cx + half, cy + half)


def oracle_positional(a, b):
    """Positional relations from atan2 sectors and open-interval overlap."""
    out = set()
    theta = center_angle(a, b)
    q = math.pi / 4
    if -q <= theta < q:
        out.add(R.RIGHT_OF)
    elif -3 * q <= theta < -q:
        out.add(R.ABOVE)
    elif q <= theta < 3 * q:
        out.add(R.BELOW)
    else:
        out.add(R.LEFT_OF)
    overlap_x = a.x0 < b.x1 and b.x0 < a.x1
    overlap_y = a.y0 < b.y1 and b.y0 < a.y1
    out.add(R.OVERLAPPING if overlap_x and overlap_y else R.SEPARATED)
    if b.x0 <= a.x0 and b.y0 <= a.y0 and a.x1 <= b.x1 and a.y1 <= b.y1:
        out.add(R.INSIDE)
    if a.x0 <= b.x0 and a.y0 <= b.y0 and b.x1 <= a.x1 and b.y1 <= a.y1:
        out.add(R.SURROUNDING)
    return out


def test_23_relations_in_3_categories():
    assert len(R) == 23
    assert {c: len(v) for c, v in RELATIONS_BY_CATEGORY.items()} == {ONE: 9, SIZE: 6, POS: 8}
    assert ONE.arity == 1 and SIZE.arity == 2 and POS.arity == 2


def test_surface_forms():
    assert R("left of") is R.LEFT_OF
    assert R("top left") is R.TOP_LEFT
    assert str(R.BOTTOM_RIGHT) == "bottom right"


@pytest.mark.parametrize(
    "box, region",
    [
        ((0.1, 0.1, 0.4, 0.4), R.TOP_LEFT),
        ((0.1, 0.2, 0.45, 0.9), R.LEFT),
        ((0.3, 0.3, 0.7, 0.7), R.CENTER),
        ((0.6, 0.1, 0.9, 0.4), R.TOP_RIGHT),
        ((0.1, 0.6, 0.4, 0.9), R.BOTTOM_LEFT),
        ((0.5, 0.5, 1.0, 1.0), R.BOTTOM_RIGHT),
        ((0.1, 0.1, 0.9, 0.4), R.TOP),
        ((0.1, 0.6, 0.9, 0.9), R.BOTTOM),
        ((0.6, 0.1, 0.9, 0.9), R.RIGHT),
        ((0.0, 0.0, 1.0, 1.0), R.CENTER),
    ],
)
def test_position_in_image(box, region):
    assert position_in_image(NormalizedBox(*box)) is region


@given(nboxes())
def test_position_total(b):
    assert position_in_image(b) in RELATIONS_BY_CATEGORY[ONE]
    assert len(true_relations(ONE, b)) == 1


def test_right_of_at_zero_angle():
    assert holds(R.RIGHT_OF, box_at(0.8, 0.5), box_at(0.2, 0.5))


@pytest.mark.parametrize(
    "offset, rel",
    [
        ((0.1, -0.1), R.RIGHT_OF),  # -pi/4 is the inclusive start of right of
        ((0.1, 0.1), R.BELOW),  # pi/4 starts below
        ((-0.1, 0.1), R.LEFT_OF),  # 3pi/4 starts left of
        ((-0.1, -0.1), R.ABOVE),  # -3pi/4 starts above
        ((0.0, -0.1), R.ABOVE),
        ((0.0, 0.1), R.BELOW),
        ((-0.1, 0.0), R.LEFT_OF),
    ],
)
def test_sector_boundaries(offset, rel):
    dx, dy = offset
    subject, obj = box_at(0.5 + dx, 0.5 + dy), box_at(0.5, 0.5)
    got = [r for r in (R.LEFT_OF, R.RIGHT_OF, R.ABOVE, R.BELOW) if holds(r, subject, obj)]
    assert got == [rel]


def test_inside_and_surrounding():
    a, b = NormalizedBox(0.2, 0.2, 0.3, 0.3), NormalizedBox(0.1, 0.1, 0.6, 0.6)
    assert holds(R.INSIDE, a, b)
    assert holds(R.SURROUNDING, b, a)
    assert not holds(R.INSIDE, b, a)


def test_size_tie_gives_neither():
    a, b = NormalizedBox(0, 0, 0.5, 0.5), NormalizedBox(0.5, 0.2, 1.0, 0.9)
    assert not holds(R.WIDER, a, b)
    assert not holds(R.NARROWER, a, b)


def test_arity_errors():
    b = NormalizedBox(0, 0, 0.5, 0.5)
    with pytest.raises(ArityError):
        holds(R.WIDER, b)
    with pytest.raises(ArityError):
        holds(R.TOP_LEFT, b, b)
    with pytest.raises(ArityError):
        true_relations(POS, b)


def test_sector_degenerate():
    with pytest.raises(DegenerateAngle):
        holds(R.LEFT_OF, NormalizedBox(0, 0, 1, 1), NormalizedBox(0.4, 0.4, 0.6, 0.6))
    # non-directional relations still decide
    assert holds(R.SURROUNDING, NormalizedBox(0, 0, 1, 1), NormalizedBox(0.4, 0.4, 0.6, 0.6))


def test_true_positional_disjoint_left():
    a, b = NormalizedBox(0.0, 0.4, 0.2, 0.6), NormalizedBox(0.6, 0.4, 0.8, 0.6)
    expected = oracle_positional(a, b)
    assert expected == {R.LEFT_OF, R.SEPARATED}
    assert true_relations(POS, a, b) == expected


def test_true_size_identical_is_empty():
    b = NormalizedBox(0.1, 0.1, 0.4, 0.4)
    assert true_relations(SIZE, b, b) == set()


def test_false_position_complement():
    b = NormalizedBox(0.1, 0.1, 0.4, 0.4)
    assert false_relations(ONE, b) == set(RELATIONS_BY_CATEGORY[ONE]) - {R.TOP_LEFT}
    assert len(false_relations(ONE, b)) == 8


def test_false_positional_inscribed():
    a, b = NormalizedBox(0.2, 0.2, 0.3, 0.3), NormalizedBox(0.1, 0.1, 0.6, 0.6)
    expected_false = set(RELATIONS_BY_CATEGORY[POS]) - oracle_positional(a, b)
    got = false_relations(POS, a, b)
    assert got == expected_false
    assert R.SEPARATED in got
    assert R.INSIDE not in got


def test_false_size_duality():
    a, b = NormalizedBox(0, 0, 0.8, 0.9), NormalizedBox(0, 0, 0.2, 0.3)
    assert false_relations(SIZE, a, b) == {R.NARROWER, R.SHORTER, R.SMALLER}


def test_positional_matches_oracle_on_random_pairs():
    rng = random.Random(7)
    for _ in range(3000):
        a, b = random_nbox(rng), random_nbox(rng)
        assert true_relations(POS, a, b) == oracle_positional(a, b)


@given(nboxes(), nboxes())
def test_sector_partition(a, b):
    assume(a.center != b.center)
    assert sum(holds(r, a, b) for r in (R.LEFT_OF, R.RIGHT_OF, R.ABOVE, R.BELOW)) == 1


@given(nboxes(), nboxes())
def test_dualities(a, b):
    assume(a.center != b.center)
    assert holds(R.LEFT_OF, a, b) == holds(R.RIGHT_OF, b, a)
    assert holds(R.ABOVE, a, b) == holds(R.BELOW, b, a)
    assert holds(R.WIDER, a, b) == holds(R.NARROWER, b, a)
    assert holds(R.TALLER, a, b) == holds(R.SHORTER, b, a)
    assert holds(R.LARGER, a, b) == holds(R.SMALLER, b, a)
    assert holds(R.INSIDE, a, b) == holds(R.SURROUNDING, b, a)


@given(nboxes(), nboxes())
def test_overlap_exclusive_and_exhaustive(a, b):
    assert holds(R.OVERLAPPING, a, b) != holds(R.SEPARATED, a, b)


@given(nboxes(), nboxes())
def test_inside_implies_overlap_for_boxes_with_area(a, b):
    assume(a.x1 > a.x0 and a.y1 > a.y0)
    if holds(R.INSIDE, a, b):
        assert holds(R.OVERLAPPING, a, b)
