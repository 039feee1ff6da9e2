"""
Readers and writers for detector dumps, VSR instance files and COCO image ids.

Detection files are a JSON array of image entries::

    [{"image_id": 9, "width": 640, "height": 480,
      "objects": [{"label": "cat", "attributes": ["black"],
                   "bbox": [x, y, w, h], "confidence": 0.93}]}]

VSR files are JSON lines with keys ``image``, ``caption``, ``label`` and
``relation`` (``image_link`` and anything else is ignored).
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterable, List, Optional

from .geometry import BoundingBox, InvalidGeometry, NormalizedBox, normalize

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class DataError(ValueError):
    """An input file does not match its documented format."""


@dataclass(frozen=True)
class DetectedObject:
    label: str
    box: BoundingBox
    attributes: tuple = ()
    confidence: Optional[float] = None

    def __post_init__(self):
        if not self.label or not self.label.strip():
            raise DataError("object label must be non-empty")
        object.__setattr__(self, "attributes", tuple(self.attributes))


@dataclass(frozen=True)
class Scene:
    image_id: int
    width: float
    height: float
    objects: tuple = ()

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DataError(f"image {self.image_id}: width and height must be positive, got {self.width}x{self.height}")
        object.__setattr__(self, "objects", tuple(self.objects))

    def normalized(self, obj: DetectedObject) -> NormalizedBox:
        return normalize(obj.box, self.width, self.height)


@dataclass(frozen=True)
class VSRInstance:
    image_ref: str
    caption: str
    label: bool
    relation: str
    flagged: bool = False  # relation string not found in the lexicon

    @property
    def image_id(self) -> int:
        return image_id_from_name(self.image_ref)


_TRAILING_INT = re.compile(r"(\d+)(?:\.[A-Za-z0-9]+)?$")


def image_id_from_name(name: str) -> int:
    """
    Extract the COCO image id from a file name or bare integer.

    Examples:
        ``COCO_train2014_000000000009.jpg`` -> 9, ``000000397133.jpg`` -> 397133
    """
    base = str(name).strip().rsplit("/", 1)[-1]
    m = _TRAILING_INT.search(base)
    if not m:
        raise DataError(f"cannot extract an image id from {name!r}")
    return int(m.group(1))


def _read_tsv(text: str) -> List[List[str]]:
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        rows.append([c.strip() for c in line.split("\t")])
    return rows


@lru_cache(maxsize=None)
def _packaged(name: str) -> str:
    return resources.files("spatialtok").joinpath("data", name).read_text(encoding="utf-8")


def load_vsr_lexicon(path: Optional[str] = None) -> Dict[str, str]:
    """Load the VSR relation -> category table (packaged copy unless ``path`` is given)."""
    if path is None:
        text = _packaged("vsr_relations.tsv")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    table = {}
    for i, row in enumerate(_read_tsv(text), 1):
        if len(row) != 2:
            raise DataError(f"lexicon row {i}: expected 'relation<TAB>category', got {row!r}")
        table[row[0].lower()] = row[1].lower()
    return table


def _object_from_json(raw: dict, where: str) -> DetectedObject:
    try:
        label = raw["label"]
        bbox = raw["bbox"]
    except (KeyError, TypeError) as e:
        raise DataError(f"{where}: missing required key {e}") from None
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        raise DataError(f"{where}: bbox must be [x, y, w, h], got {bbox!r}")
    try:
        box = BoundingBox(*(float(v) for v in bbox))
    except (InvalidGeometry, TypeError, ValueError) as e:
        raise DataError(f"{where}: {e}") from None
    attrs = raw.get("attributes") or []
    conf = raw.get("confidence")
    if not isinstance(label, str) or not label.strip():
        raise DataError(f"{where}: label must be a non-empty string")
    return DetectedObject(label=label, box=box, attributes=tuple(attrs), confidence=conf)


def scene_from_json(entry: dict, where: str = "entry", min_confidence: float = 0.0) -> Scene:
    try:
        image_id = entry["image_id"]
        width = entry["width"]
        height = entry["height"]
        raw_objects = entry["objects"]
    except (KeyError, TypeError) as e:
        raise DataError(f"{where}: missing required key {e}") from None
    where = f"{where} (image_id={image_id})"
    if not (isinstance(width, (int, float)) and isinstance(height, (int, float)) and width > 0 and height > 0):
        raise DataError(f"{where}: width and height must be positive, got {width!r}x{height!r}")
    objects = []
    for j, raw in enumerate(raw_objects):
        obj = _object_from_json(raw, f"{where} object {j}")
        if obj.confidence is not None and obj.confidence < min_confidence:
            continue
        objects.append(obj)
    return Scene(image_id=int(image_id), width=width, height=height, objects=tuple(objects))


def scene_to_json(scene: Scene) -> dict:
    objects = []
    for obj in scene.objects:
        raw = {"label": obj.label, "attributes": list(obj.attributes), "bbox": obj.box.as_list()}
        if obj.confidence is not None:
            raw["confidence"] = obj.confidence
        objects.append(raw)
    return {"image_id": scene.image_id, "width": scene.width, "height": scene.height, "objects": objects}


def parse_detections(path, min_confidence: float = 0.0) -> List[Scene]:
    """
    Read a detection dump into scenes, preserving entry and object order.

    Args:
        path: JSON file holding an array of image entries
        min_confidence: Drop objects whose confidence is below this value;
            objects without a confidence are always kept

    Raises:
        DataError: On malformed JSON, missing keys or invalid geometry. The
            message names the file and the offending entry.
    """
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}:{e.lineno}: malformed JSON: {e.msg}") from None
    if not isinstance(data, list):
        raise DataError(f"{path}: top level must be an array of image entries")
    return [scene_from_json(entry, f"{path} entry {i}", min_confidence) for i, entry in enumerate(data)]


def dump_detections(scenes: Iterable[Scene], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump([scene_to_json(s) for s in scenes], f)


def scene_from_vinvl(image_id: int, width: float, height: float, record: dict) -> Scene:
    """
    Convert one VinVL prediction record to a Scene.

    VinVL reports ``rect`` as corner coordinates [x1, y1, x2, y2], ``class``
    as the label and ``attr`` as the attribute list. Corners are clipped to
    the image before converting to (x, y, w, h); boxes left with no area are
    dropped.
    """
    objects = []
    for raw in record.get("objects", []):
        x1, y1, x2, y2 = (float(v) for v in raw["rect"])
        x1, y1 = max(0.0, x1), max(0.0, y1)
        x2, y2 = min(float(width), x2), min(float(height), y2)
        if x2 <= x1 or y2 <= y1:
            logger.warning("image %s: dropping empty VinVL box %r", image_id, raw.get("rect"))
            continue
        objects.append(
            DetectedObject(
                label=raw["class"],
                box=BoundingBox(x1, y1, x2 - x1, y2 - y1),
                attributes=tuple(raw.get("attr", ())),
                confidence=raw.get("conf"),
            )
        )
    return Scene(image_id=image_id, width=width, height=height, objects=tuple(objects))


def convert_vinvl_tsv(predictions_path, hw_path) -> List[Scene]:
    """
    Read VinVL's ``predictions.tsv`` plus its ``hw.tsv`` companion.

    Both files are ``key<TAB>json``; the hw json is ``[{"height": h, "width": w}]``.
    """
    sizes = {}
    with open(hw_path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            key, payload = line.rstrip("\n").split("\t", 1)
            hw = json.loads(payload)
            hw = hw[0] if isinstance(hw, list) else hw
            sizes[key] = (hw["width"], hw["height"])
    scenes = []
    with open(predictions_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            key, payload = line.rstrip("\n").split("\t", 1)
            if key not in sizes:
                raise DataError(f"{predictions_path}:{lineno}: no image size for {key!r} in {hw_path}")
            w, h = sizes[key]
            scenes.append(scene_from_vinvl(image_id_from_name(key), w, h, json.loads(payload)))
    return scenes


def _parse_label(v) -> bool:
    if isinstance(v, bool):
        return v
    if v in (0, 1):
        return bool(v)
    if isinstance(v, str) and v.strip().lower() in {"0", "1", "true", "false"}:
        return v.strip().lower() in {"1", "true"}
    raise ValueError(f"label must be 0/1 or true/false, got {v!r}")


def parse_vsr(path, lexicon: Optional[Dict[str, str]] = None) -> List[VSRInstance]:
    """
    Read a VSR JSON-lines split.

    Rows whose relation is not in the lexicon are kept with ``flagged=True``
    and a warning is logged. All row errors are collected and raised together.
    """
    if lexicon is None:
        lexicon = load_vsr_lexicon()
    instances, errors = [], []
    unknown = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                inst = VSRInstance(
                    image_ref=str(row["image"]),
                    caption=row["caption"],
                    label=_parse_label(row["label"]),
                    relation=row["relation"].strip().lower(),
                )
            except json.JSONDecodeError as e:
                errors.append(f"line {lineno}: malformed JSON: {e.msg}")
                continue
            except KeyError as e:
                errors.append(f"line {lineno}: missing key {e}")
                continue
            except (TypeError, AttributeError, ValueError) as e:
                errors.append(f"line {lineno}: {e}")
                continue
            if inst.relation not in lexicon:
                unknown.add(inst.relation)
                inst = VSRInstance(inst.image_ref, inst.caption, inst.label, inst.relation, flagged=True)
            instances.append(inst)
    if errors:
        raise DataError(f"{path}: {len(errors)} bad row(s):\n  " + "\n  ".join(errors))
    if unknown:
        logger.warning("%s: relations not in lexicon: %s", path, ", ".join(sorted(unknown)))
    return instances


def write_vsr(instances: Iterable[VSRInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            row = {"image": inst.image_ref, "caption": inst.caption, "label": int(inst.label), "relation": inst.relation}
            f.write(json.dumps(row) + "\n")
