import random

import pytest

from spatialtok.geometry import BoundingBox
from spatialtok.ingest import DetectedObject, Scene, VSRInstance, load_vsr_lexicon
from spatialtok.relations import SpatialRelation as R
from spatialtok.solver import (
    CaptionParseError,
    FailureReason,
    Prediction,
    load_mapping,
    map_relation,
    match_object,
    parse_caption,
    read_predictions,
    solve,
    solve_all,
    write_predictions,
)

LEXICON = set(load_vsr_lexicon())
MAPPING = load_mapping()

TABLE_8 = {
    "at the right side of": R.RIGHT_OF,
    "at the left side of": R.LEFT_OF,
    "around": R.SURROUNDING,
    "into": R.INSIDE,
    "on top of": R.ABOVE,
    "beneath": R.BELOW,
    "left of": R.LEFT_OF,
    "right of": R.RIGHT_OF,
    "under": R.BELOW,
    "below": R.BELOW,
    "above": R.ABOVE,
    "over": R.ABOVE,
    "contains": R.SURROUNDING,
    "within": R.INSIDE,
    "surrounding": R.SURROUNDING,
    "inside": R.INSIDE,
    "outside": R.SEPARATED,
}


def scene_of(*objs, image_id=1, size=(100, 100)):
    return Scene(image_id, size[0], size[1], tuple(DetectedObject(label, BoundingBox(*box)) for label, box in objs))


def test_mapping_is_table_8():
    assert dict(MAPPING.table) == TABLE_8
    assert len(MAPPING) == 17
    assert set(MAPPING.table) <= LEXICON


def test_mapped_relations_per_category():
    lex = load_vsr_lexicon()
    per_cat = {}
    for rel in MAPPING.table:
        per_cat[lex[rel]] = per_cat.get(lex[rel], 0) + 1
    assert per_cat == {"adjacency": 2, "directional": 2, "projective": 8, "topological": 5}


@pytest.mark.parametrize("vsr, box", [("on top of", R.ABOVE), ("outside", R.SEPARATED), ("touching", None)])
def test_map_relation(vsr, box):
    assert map_relation(vsr, MAPPING) == box


def test_parse_longest_match():
    got = parse_caption("The potted plant is at the right side of the bench.", LEXICON)
    assert got == ("potted plant", "at the right side of", "bench")


def test_parse_simple():
    assert parse_caption("The cat is left of the dog.", LEXICON) == ("cat", "left of", "dog")


def test_parse_no_relation():
    with pytest.raises(CaptionParseError):
        parse_caption("A sentence with no relation.", {"left of", "right of"})


def test_parse_plural_copula_and_article():
    assert parse_caption("A pair of skis are under the person", LEXICON) == ("pair of skis", "under", "person")


def test_parse_relation_only_on_word_boundaries():
    # "on" must not be found inside "onion"
    assert parse_caption("The onion is beneath the bowl.", {"on", "beneath"}) == ("onion", "beneath", "bowl")


def test_match_exact():
    scene = scene_of(("table", (0, 0, 50, 50)), ("cat", (50, 50, 10, 10)))
    assert match_object("cat", scene) is scene.objects[1]


def test_match_substring():
    scene = scene_of(("plant", (0, 0, 20, 20)), ("bench", (30, 30, 40, 40)))
    assert match_object("potted plant", scene) is scene.objects[0]


def test_match_absent():
    scene = scene_of(("cat", (0, 0, 20, 20)), ("dog", (30, 30, 40, 40)))
    assert match_object("zebra", scene) is None


def test_match_prefers_largest():
    scene = scene_of(("person", (0, 0, 10, 10)), ("person", (20, 20, 50, 50)), ("person", (80, 80, 5, 5)))
    assert match_object("person", scene) is scene.objects[1]
    assert match_object("person", scene, exclude=scene.objects[1]) is scene.objects[0]


def test_match_exact_beats_substring():
    scene = scene_of(("hot dog", (0, 0, 90, 90)), ("dog", (0, 0, 10, 10)))
    assert match_object("dog", scene) is scene.objects[1]


def test_solve_rule_true():
    scene = scene_of(("cat", (0, 40, 20, 20)), ("dog", (60, 40, 20, 20)))
    inst = VSRInstance("1.jpg", "The cat is left of the dog.", True, "left of")
    assert solve(inst, scene, MAPPING, random.Random(0)) == Prediction(True, "rule")
    inst = VSRInstance("1.jpg", "The dog is at the left side of the cat.", False, "at the left side of")
    assert solve(inst, scene, MAPPING, random.Random(0)) == Prediction(False, "rule")


def test_solve_unmapped_relation():
    scene = scene_of(("cat", (0, 40, 20, 20)), ("dog", (60, 40, 20, 20)))
    inst = VSRInstance("1.jpg", "The cat is touching the dog.", True, "touching")
    p = solve(inst, scene, MAPPING, random.Random(0))
    assert p.method == "random" and p.failure_reason is FailureReason.UNMAPPED_RELATION


def test_solve_subject_unmatched():
    scene = scene_of(("cat", (0, 40, 20, 20)), ("dog", (60, 40, 20, 20)))
    inst = VSRInstance("1.jpg", "The zebra is left of the dog.", True, "left of")
    assert solve(inst, scene, MAPPING, random.Random(0)).failure_reason is FailureReason.SUBJECT_UNMATCHED


def test_solve_object_unmatched_when_only_one_detection():
    scene = scene_of(("cat", (0, 40, 20, 20)))
    inst = VSRInstance("1.jpg", "The cat is left of the cat.", True, "left of")
    assert solve(inst, scene, MAPPING, random.Random(0)).failure_reason is FailureReason.OBJECT_UNMATCHED


def test_solve_missing_scene():
    inst = VSRInstance("1.jpg", "The cat is left of the dog.", True, "left of")
    assert solve(inst, None, MAPPING, random.Random(0)).failure_reason is FailureReason.MISSING_SCENE


def test_solve_caption_parse():
    scene = scene_of(("cat", (0, 40, 20, 20)))
    inst = VSRInstance("1.jpg", "cat dog", True, "left of")
    assert solve(inst, scene, MAPPING, random.Random(0)).failure_reason is FailureReason.CAPTION_PARSE


def test_coin_is_roughly_fair():
    inst = VSRInstance("1.jpg", "The cat is touching the dog.", True, "touching")
    answers = [solve(inst, None, MAPPING, random.Random(i)).answer for i in range(4000)]
    assert 0.46 < sum(answers) / len(answers) < 0.54


def test_solve_all_deterministic_and_accounted():
    scenes = {1: scene_of(("cat", (0, 40, 20, 20)), ("dog", (60, 40, 20, 20)))}
    instances = [
        VSRInstance("1.jpg", "The cat is left of the dog.", True, "left of"),
        VSRInstance("1.jpg", "The cat is touching the dog.", True, "touching"),
        VSRInstance("2.jpg", "The cat is above the dog.", False, "above"),
        VSRInstance("1.jpg", "The horse is above the dog.", False, "above"),
    ]
    a = solve_all(instances, scenes, MAPPING, seed=4)
    b = solve_all(instances, scenes, MAPPING, seed=4)
    assert a == b
    assert [p.method for p in a] == ["rule", "random", "random", "random"]
    reasons = [p.failure_reason for p in a if p.method == "random"]
    assert len(reasons) == sum(p.method == "random" for p in a)


def test_prediction_invariants():
    with pytest.raises(ValueError):
        Prediction(True, "rule", FailureReason.CAPTION_PARSE)
    with pytest.raises(ValueError):
        Prediction(True, "random")


def test_predictions_roundtrip(tmp_path):
    preds = [Prediction(True, "rule"), Prediction(False, "random", FailureReason.UNMAPPED_RELATION)]
    path = tmp_path / "p.jsonl"
    write_predictions(preds, path)
    assert read_predictions(path) == preds
    assert '"index": 1' in path.read_text().splitlines()[1]
