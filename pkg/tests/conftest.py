import json
import random

import pytest

from spatialtok.geometry import BoundingBox, NormalizedBox
from spatialtok.ingest import DetectedObject, Scene

LABELS = [
    "cat", "dog", "person", "table", "chair", "car", "bus", "bench", "potted plant", "horse",
    "cup", "bowl", "laptop", "book", "bed", "couch", "tv", "umbrella", "kite", "pizza",
]


def random_nbox(rng: random.Random) -> NormalizedBox:
    x0, x1 = sorted((rng.random(), rng.random()))
    y0, y1 = sorted((rng.random(), rng.random()))
    return NormalizedBox(x0, y0, x1, y1)


def random_scene(rng: random.Random, image_id: int, n_objects: int, width=640, height=480) -> Scene:
    objects = []
    for _ in range(n_objects):
        w = rng.uniform(4, width * 0.8)
        h = rng.uniform(4, height * 0.8)
        x = rng.uniform(0, width - w)
        y = rng.uniform(0, height - h)
        attrs = rng.sample(["black", "white", "small", "wooden", "sitting"], rng.randint(0, 2))
        objects.append(DetectedObject(rng.choice(LABELS), BoundingBox(x, y, w, h), tuple(attrs), round(rng.random(), 3)))
    return Scene(image_id, width, height, tuple(objects))


def random_corpus(seed: int, n_scenes: int, min_objects=1, max_objects=8, first_id=1):
    rng = random.Random(seed)
    return [random_scene(rng, first_id + k, rng.randint(min_objects, max_objects)) for k in range(n_scenes)]


@pytest.fixture
def cat_scene():
    # 400x200 image, cat covers x in [0.05, 0.85], y in [0.10, 0.70]
    return Scene(
        42,
        400,
        200,
        (
            DetectedObject("cat", BoundingBox(20, 20, 320, 120), ("black", "sitting")),
            DetectedObject("table", BoundingBox(100, 10, 299, 189)),
        ),
    )


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(name, rows):
        path = tmp_path / name
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return path

    return _write


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(item.user_properties).get("detail", "")
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _ACCEPTANCE[number] = f"[{status}] {number:>2}. {title}" + (f" -- {detail}" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
