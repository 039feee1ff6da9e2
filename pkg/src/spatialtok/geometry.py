"""
Bounding-box arithmetic: normalization, grid discretization, IoU,
inscription and center angles.

Box formats:
- BoundingBox: pixel (x0, y0, w, h), top-left origin, y grows downward
- NormalizedBox: unit-square corner form (x0, y0, x1, y1)
- LocationTokens: integer grid cells (x0, y0, x1, y1) on a G x G grid
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple


class InvalidGeometry(ValueError):
    """Raised for boxes or images that violate their geometric invariants."""


class DegenerateAngle(InvalidGeometry):
    """Raised when two boxes share a center, so no direction exists."""


@dataclass(frozen=True)
class BoundingBox:
    x0: float
    y0: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise InvalidGeometry(f"box must have positive size, got w={self.w} h={self.h}")
        if self.x0 < 0 or self.y0 < 0:
            raise InvalidGeometry(f"box origin must be non-negative, got ({self.x0}, {self.y0})")

    def as_list(self) -> list:
        return [self.x0, self.y0, self.w, self.h]


@dataclass(frozen=True)
class NormalizedBox:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (0.0 <= self.x0 <= self.x1 <= 1.0 and 0.0 <= self.y0 <= self.y1 <= 1.0):
            raise InvalidGeometry(
                f"normalized box must satisfy 0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1, got {self.as_tuple()}"
            )

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def center(self) -> Tuple[float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)


@dataclass(frozen=True)
class LocationTokens:
    x0: int
    y0: int
    x1: int
    y1: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.as_tuple())


@dataclass(frozen=True)
class GridConfig:
    g: int = 32

    def __post_init__(self):
        if not isinstance(self.g, int) or self.g < 1:
            raise InvalidGeometry(f"grid size must be a positive integer, got {self.g!r}")


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def normalize(box: BoundingBox, image_w: float, image_h: float) -> NormalizedBox:
    """
    Convert a pixel box to unit-square corner form.

    Overhang past the image border is clamped to [0, 1] rather than rejected.

    Args:
        box: Pixel-space box (x0, y0, w, h)
        image_w: Image width in pixels
        image_h: Image height in pixels

    Returns:
        NormalizedBox with every coordinate in [0, 1]

    Raises:
        InvalidGeometry: If the image dimensions are not positive.
    """
    if not (image_w > 0 and image_h > 0):
        raise InvalidGeometry(f"image dimensions must be positive, got {image_w}x{image_h}")
    return NormalizedBox(
        _clamp01(box.x0 / image_w),
        _clamp01(box.y0 / image_h),
        _clamp01((box.x0 + box.w) / image_w),
        _clamp01((box.y0 + box.h) / image_h),
    )


def denormalize(nbox: NormalizedBox, image_w: float, image_h: float) -> Tuple[float, float, float, float]:
    """Scale a normalized box back to pixel corner coordinates (x0, y0, x1, y1)."""
    return (nbox.x0 * image_w, nbox.y0 * image_h, nbox.x1 * image_w, nbox.y1 * image_h)


def _cell(c: float, g: int) -> int:
    # a coordinate on a grid line belongs to the cell to its right/below; 1.0 clamps into the last cell
    return min(g - 1, max(0, math.floor(c * g)))


def to_location_tokens(nbox: NormalizedBox, grid: GridConfig) -> LocationTokens:
    """Find the grid cells holding the two corners of ``nbox``."""
    g = grid.g
    return LocationTokens(_cell(nbox.x0, g), _cell(nbox.y0, g), _cell(nbox.x1, g), _cell(nbox.y1, g))


def measures(nbox: NormalizedBox) -> Tuple[float, float, float]:
    """Return (width, height, area) of a normalized box."""
    width = nbox.x1 - nbox.x0
    height = nbox.y1 - nbox.y0
    return width, height, width * height


def intersection_area(a: NormalizedBox, b: NormalizedBox) -> float:
    # edge contact gives a zero-width overlap, hence zero area
    iw = max(0.0, min(a.x1, b.x1) - max(a.x0, b.x0))
    ih = max(0.0, min(a.y1, b.y1) - max(a.y0, b.y0))
    return iw * ih


def iou(a: NormalizedBox, b: NormalizedBox) -> float:
    """
    Intersection over union of two boxes.

    Returns:
        float in [0, 1]; 0 when the interiors are disjoint, including boxes
        that only touch along an edge.
    """
    inter = intersection_area(a, b)
    union = measures(a)[2] + measures(b)[2] - inter
    if union <= 0.0:
        # both boxes have zero area
        return 1.0 if a == b else 0.0
    return min(1.0, inter / union)


def center_offset(subject: NormalizedBox, reference: NormalizedBox) -> Tuple[float, float]:
    """(dx, dy) from the reference center to the subject center, image coordinates."""
    sx, sy = subject.center
    rx, ry = reference.center
    return sx - rx, sy - ry


def center_angle(subject: NormalizedBox, reference: NormalizedBox) -> float:
    """
    Direction of the subject center seen from the reference center.

    Image coordinates are used, so a subject above the reference has a
    negative angle.

    Returns:
        Angle in radians in (-pi, pi].

    Raises:
        DegenerateAngle: If both centers coincide.
    """
    dx, dy = center_offset(subject, reference)
    if dx == 0.0 and dy == 0.0:
        raise DegenerateAngle("boxes share a center; direction is undefined")
    theta = math.atan2(dy, dx)
    return math.pi if theta == -math.pi else theta


def inscribed(inner: NormalizedBox, outer: NormalizedBox) -> bool:
    """True iff ``inner`` lies within ``outer``, boundaries included."""
    return (
        inner.x0 >= outer.x0
        and inner.y0 >= outer.y0
        and inner.x1 <= outer.x1
        and inner.y1 <= outer.y1
    )
