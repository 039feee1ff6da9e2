"""
Synthetic spatial QA generation from detected scenes.

Each example asks a yes/no question about one relation between one or two
detections of an image and carries the textual scene description as context.
Randomness for an image depends only on (seed, epoch, image_id), so output is
reproducible and independent of how the work is split across processes.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence

from .geometry import DegenerateAngle, GridConfig
from .ingest import DataError, Scene, VSRInstance, image_id_from_name
from .relations import (
    RELATIONS_BY_CATEGORY,
    RelationCategory,
    SpatialRelation,
    false_relations,
    true_relations,
)
from .verbalize import EmptyScene, render_question, scene_description

logger = logging.getLogger(__name__)

MAX_RETRIES = 8


class SkipImage(Exception):
    """No verifiable example could be drawn from an image."""


@dataclass(frozen=True)
class GeneratorConfig:
    grid: GridConfig = GridConfig()
    p_two_object: float = 0.7
    p_negative: float = 0.5
    examples_per_image_per_epoch: int = 1
    locations: bool = True
    attributes: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("p_two_object", "p_negative"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.examples_per_image_per_epoch < 1:
            raise ValueError("examples_per_image_per_epoch must be >= 1")


@dataclass(frozen=True)
class SSTDExample:
    question: str
    description: str
    answer: str
    image_id: int
    relation: SpatialRelation
    category: RelationCategory
    subject: str
    object: Optional[str] = None
    # detection indices into the source scene, kept for label checks
    subject_index: int = field(default=-1, compare=False)
    object_index: Optional[int] = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {
            "question": self.question,
            "description": self.description,
            "answer": self.answer,
            "image_id": self.image_id,
            "relation": self.relation.value,
            "category": self.category.value,
            "subject": self.subject,
            "object": self.object,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)


@dataclass(frozen=True)
class ExclusionSet:
    image_ids: FrozenSet[int] = frozenset()

    def __contains__(self, image_id) -> bool:
        return image_id in self.image_ids

    def __len__(self) -> int:
        return len(self.image_ids)


def build_exclusion_set(vsr_dev: Sequence[VSRInstance], vsr_test: Sequence[VSRInstance]) -> ExclusionSet:
    """Image ids appearing in either evaluation split."""
    ids, bad = set(), []
    for split, rows in (("dev", vsr_dev), ("test", vsr_test)):
        for i, inst in enumerate(rows):
            try:
                ids.add(image_id_from_name(inst.image_ref))
            except DataError:
                bad.append(f"{split}[{i}]: {inst.image_ref!r}")
    if bad:
        raise DataError("unresolvable image references:\n  " + "\n  ".join(bad))
    return ExclusionSet(frozenset(ids))


def image_rng(seed: int, epoch: int, image_id: int) -> random.Random:
    # str seeds are hashed with sha512, so this is stable across processes and runs
    return random.Random(f"sstd:{seed}:{epoch}:{image_id}")


def _ordered(rels: Iterable[SpatialRelation], category: RelationCategory) -> List[SpatialRelation]:
    rels = set(rels)
    return [r for r in RELATIONS_BY_CATEGORY[category] if r in rels]


def sample_example(
    scene: Scene,
    rng: random.Random,
    cfg: GeneratorConfig,
    description: Optional[str] = None,
) -> SSTDExample:
    """
    Draw one question/description/answer example from a scene.

    A single-object scene always yields an image-position question. Otherwise
    a two-object category is picked with probability ``cfg.p_two_object``
    (size or positional, evenly), and the objects are drawn without
    replacement. With probability ``cfg.p_negative`` the relation comes from
    the relations that do not hold and the answer is "no".

    If the chosen branch has no candidate relation (all sizes tied, or the
    two centers coincide) the objects are redrawn, up to ``MAX_RETRIES``
    times, keeping category and polarity fixed.

    Raises:
        EmptyScene: If the scene has no objects.
        SkipImage: If every retry was degenerate.
    """
    objects = scene.objects
    n = len(objects)
    if n == 0:
        raise EmptyScene(f"image {scene.image_id} has no detected objects")

    if n >= 2 and rng.random() < cfg.p_two_object:
        category = rng.choice((RelationCategory.SIZE_COMPARISON, RelationCategory.TWO_OBJECT_POSITIONAL))
    else:
        category = RelationCategory.OBJECT_POSITION
    negative = rng.random() < cfg.p_negative

    for _ in range(MAX_RETRIES):
        if category.arity == 1:
            i, j = rng.randrange(n), None
            boxes = (scene.normalized(objects[i]), None)
        else:
            i, j = rng.sample(range(n), 2)
            boxes = (scene.normalized(objects[i]), scene.normalized(objects[j]))
        try:
            pool = (false_relations if negative else true_relations)(category, *boxes)
        except DegenerateAngle:
            continue
        if not pool:
            continue
        rel = rng.choice(_ordered(pool, category))
        subject = objects[i].label
        obj = objects[j].label if j is not None else None
        if description is None:
            description = scene_description(scene, cfg.grid, cfg.locations, cfg.attributes).text
        return SSTDExample(
            question=render_question(rel, subject, obj),
            description=description,
            answer="no" if negative else "yes",
            image_id=scene.image_id,
            relation=rel,
            category=category,
            subject=subject,
            object=obj,
            subject_index=i,
            object_index=j,
        )
    raise SkipImage(f"image {scene.image_id}: no valid {category.value} draw in {MAX_RETRIES} tries")


def examples_for_image(scene: Scene, cfg: GeneratorConfig, epoch: int) -> List[SSTDExample]:
    if not scene.objects:
        logger.info("image %s: no detections, skipped", scene.image_id)
        return []
    rng = image_rng(cfg.seed, epoch, scene.image_id)
    description = scene_description(scene, cfg.grid, cfg.locations, cfg.attributes).text
    out = []
    for _ in range(cfg.examples_per_image_per_epoch):
        try:
            out.append(sample_example(scene, rng, cfg, description))
        except SkipImage as e:
            logger.info("%s", e)
    return out


def _examples_for_chunk(args) -> List[SSTDExample]:
    scenes, cfg, epoch = args
    return [ex for scene in scenes for ex in examples_for_image(scene, cfg, epoch)]


def generate_epoch(
    corpus: Sequence[Scene],
    exclusion: Optional[ExclusionSet],
    cfg: GeneratorConfig,
    epoch: int,
    workers: int = 1,
    chunk_size: int = 256,
) -> Iterator[SSTDExample]:
    """
    Yield one epoch of examples in ascending image_id order.

    Excluded images produce nothing. With ``workers > 1`` images are processed
    in a process pool; the stream is identical to the single-worker one.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    exclusion = exclusion or ExclusionSet()
    scenes = sorted((s for s in corpus if s.image_id not in exclusion), key=lambda s: s.image_id)
    if workers <= 1:
        for scene in scenes:
            yield from examples_for_image(scene, cfg, epoch)
        return
    chunks = [(scenes[k : k + chunk_size], cfg, epoch) for k in range(0, len(scenes), chunk_size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for batch in pool.map(_examples_for_chunk, chunks):
            yield from batch


def summarize(examples: Iterable) -> Dict:
    """Yes fraction, category mix and relation counts for examples or their JSON dicts."""
    answers, categories, relations = Counter(), Counter(), Counter()
    for ex in examples:
        row = ex.to_json() if isinstance(ex, SSTDExample) else ex
        answers[row["answer"]] += 1
        categories[row["category"]] += 1
        relations[row["relation"]] += 1
    total = sum(answers.values())
    two_object = total - categories[RelationCategory.OBJECT_POSITION.value]
    return {
        "examples": total,
        "yes_fraction": answers["yes"] / total if total else 0.0,
        "two_object_share": two_object / total if total else 0.0,
        "categories": dict(sorted(categories.items())),
        "relations": dict(sorted(relations.items())),
    }
