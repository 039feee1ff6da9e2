"""
Rule-based VSR baseline.

A caption is split into subject, relation and object; the relation is mapped
onto a box relation; subject and object are matched against the detections;
the box rule decides. Anything that cannot be decided this way gets a fair
coin.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .geometry import DegenerateAngle, measures
from .ingest import DataError, DetectedObject, Scene, VSRInstance, _packaged, _read_tsv, load_vsr_lexicon
from .relations import SpatialRelation, holds

ARTICLES = ("the", "a", "an")
COPULAS = ("is", "are")


class FailureReason(str, Enum):
    UNMAPPED_RELATION = "unmapped_relation"
    CAPTION_PARSE = "caption_parse"
    SUBJECT_UNMATCHED = "subject_unmatched"
    OBJECT_UNMATCHED = "object_unmatched"
    MISSING_SCENE = "missing_scene"
    DEGENERATE_GEOMETRY = "degenerate_geometry"


class CaptionParseError(ValueError):
    pass


@dataclass(frozen=True)
class RelationMapping:
    table: Mapping[str, SpatialRelation]

    def get(self, vsr_relation: str) -> Optional[SpatialRelation]:
        return self.table.get(vsr_relation.strip().lower())

    def __len__(self) -> int:
        return len(self.table)


@dataclass(frozen=True)
class Prediction:
    answer: bool
    method: Optional[str] = "rule"  # "rule", "random", or None for predictions from elsewhere
    failure_reason: Optional[FailureReason] = None

    def __post_init__(self):
        if self.method not in ("rule", "random", None):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.method == "random") != (self.failure_reason is not None):
            raise ValueError("random predictions need a failure reason; others carry none")

    def to_json(self, index: int) -> dict:
        return {
            "index": index,
            "answer": self.answer,
            "method": self.method,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }

    @classmethod
    def from_json(cls, row: dict) -> "Prediction":
        reason = row.get("failure_reason")
        return cls(bool(row["answer"]), row.get("method"), FailureReason(reason) if reason else None)


def load_mapping(path=None) -> RelationMapping:
    """Read the VSR -> box relation TSV (the packaged table unless ``path`` is given)."""
    if path is None:
        text = _packaged("relation_mapping.tsv")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    table = {}
    for i, row in enumerate(_read_tsv(text), 1):
        if len(row) != 2:
            raise DataError(f"mapping row {i}: expected 'vsr relation<TAB>box relation', got {row!r}")
        try:
            table[row[0].lower()] = SpatialRelation(row[1].lower())
        except ValueError:
            raise DataError(f"mapping row {i}: unknown box relation {row[1]!r}") from None
    return RelationMapping(table)


def map_relation(vsr_rel: str, mapping: Optional[RelationMapping] = None) -> Optional[SpatialRelation]:
    return (mapping or load_mapping()).get(vsr_rel)


def _strip_words(words: List[str], leading=(), trailing=()) -> List[str]:
    while words and words[0] in leading:
        words = words[1:]
    while words and words[-1] in trailing:
        words = words[:-1]
    return words


def normalize_phrase(text: str) -> str:
    words = re.sub(r"[^\w\s'-]", " ", text.lower()).split()
    return " ".join(_strip_words(words, leading=ARTICLES))


@lru_cache(maxsize=32)
def _patterns(lexicon: frozenset) -> List[Tuple[str, "re.Pattern"]]:
    # longest phrase first; ties alphabetical for a stable order
    ordered = sorted(lexicon, key=lambda p: (-len(p), p))
    return [(p, re.compile(r"(?<![\w'-])" + re.escape(p) + r"(?![\w'-])")) for p in ordered]


def parse_caption(caption: str, lexicon: Iterable[str]) -> Tuple[str, str, str]:
    """
    Split a caption into (subject, relation, object).

    The relation is the longest lexicon phrase found in the caption, so
    "at the right side of" wins over "at". Leading articles are dropped from
    both noun phrases, a trailing "is"/"are" from the subject.

    Raises:
        CaptionParseError: If no lexicon phrase occurs or a side is empty.
    """
    text = " ".join(caption.lower().strip().rstrip(".").split())
    if not text:
        raise CaptionParseError("empty caption")
    for phrase, pat in _patterns(frozenset(p.lower() for p in lexicon)):
        m = pat.search(text)
        if m is None:
            continue
        subject = _strip_words(normalize_phrase(text[: m.start()]).split(), ARTICLES, COPULAS)
        obj = normalize_phrase(text[m.end() :]).split()
        if not subject or not obj:
            raise CaptionParseError(f"relation {phrase!r} found but subject or object is empty: {caption!r}")
        return " ".join(subject), phrase, " ".join(obj)
    raise CaptionParseError(f"no known relation in {caption!r}")


def _contains(haystack: List[str], needle: List[str]) -> bool:
    k = len(needle)
    return any(haystack[i : i + k] == needle for i in range(len(haystack) - k + 1))


def _match_index(phrase: str, scene: Scene, exclude: Optional[int] = None) -> Optional[int]:
    target = normalize_phrase(phrase)
    if not target:
        return None
    labels = [normalize_phrase(o.label) for o in scene.objects]
    candidates = [k for k in range(len(labels)) if k != exclude]

    hits = [k for k in candidates if labels[k] == target]
    if not hits:
        tw = target.split()
        hits = [k for k in candidates if labels[k] and (_contains(tw, labels[k].split()) or _contains(labels[k].split(), tw))]
    if not hits:
        return None
    # largest detection wins; max() keeps the first on equal areas
    return max(hits, key=lambda k: measures(scene.normalized(scene.objects[k]))[2])


def match_object(phrase: str, scene: Scene, exclude: Optional[DetectedObject] = None) -> Optional[DetectedObject]:
    """
    Find the detection a caption noun phrase refers to.

    Exact label equality is tried first, then word-level containment in
    either direction ("potted plant" finds "plant"). Among several hits the
    largest box is taken. ``exclude`` (compared by identity) keeps subject and
    object from resolving to the same detection.
    """
    skip = None
    if exclude is not None:
        skip = next((k for k, o in enumerate(scene.objects) if o is exclude), None)
    k = _match_index(phrase, scene, skip)
    return None if k is None else scene.objects[k]


def _coin(rng: random.Random, reason: FailureReason) -> Prediction:
    return Prediction(rng.random() < 0.5, "random", reason)


def solve(
    instance: VSRInstance,
    scene: Optional[Scene],
    mapping: RelationMapping,
    rng: random.Random,
    lexicon: Optional[Iterable[str]] = None,
) -> Prediction:
    """
    Answer one VSR instance with box rules, falling back to a coin flip.

    The annotated relation is looked up in the caption first; the full
    lexicon is only used when it cannot be found there.
    """
    rel = mapping.get(instance.relation)
    if rel is None:
        return _coin(rng, FailureReason.UNMAPPED_RELATION)
    if scene is None:
        return _coin(rng, FailureReason.MISSING_SCENE)
    try:
        subj_text, _, obj_text = parse_caption(instance.caption, [instance.relation])
    except CaptionParseError:
        try:
            subj_text, _, obj_text = parse_caption(instance.caption, lexicon or load_vsr_lexicon())
        except CaptionParseError:
            return _coin(rng, FailureReason.CAPTION_PARSE)

    si = _match_index(subj_text, scene)
    if si is None:
        return _coin(rng, FailureReason.SUBJECT_UNMATCHED)
    oi = _match_index(obj_text, scene, exclude=si)
    if oi is None:
        return _coin(rng, FailureReason.OBJECT_UNMATCHED)
    try:
        answer = holds(rel, scene.normalized(scene.objects[si]), scene.normalized(scene.objects[oi]))
    except DegenerateAngle:
        return _coin(rng, FailureReason.DEGENERATE_GEOMETRY)
    return Prediction(answer, "rule")


def instance_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"solve:{seed}:{index}")


def solve_all(
    instances: Iterable[VSRInstance],
    scenes: Dict[int, Scene],
    mapping: Optional[RelationMapping] = None,
    seed: int = 0,
) -> List[Prediction]:
    """Solve every instance; each gets its own rng derived from (seed, index)."""
    mapping = mapping or load_mapping()
    lexicon = frozenset(load_vsr_lexicon())
    preds = []
    for idx, inst in enumerate(instances):
        try:
            scene = scenes.get(inst.image_id)
        except DataError:
            scene = None
        preds.append(solve(inst, scene, mapping, instance_rng(seed, idx), lexicon))
    return preds


def write_predictions(preds: Iterable[Prediction], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, p in enumerate(preds):
            f.write(json.dumps(p.to_json(i)) + "\n")


def read_predictions(path) -> List[Prediction]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed JSON: {e.msg}") from None
    rows.sort(key=lambda r: r.get("index", 0))
    try:
        return [Prediction.from_json(r) for r in rows]
    except (KeyError, ValueError) as e:
        raise DataError(f"{path}: bad prediction row: {e}") from None
