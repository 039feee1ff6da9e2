"""
Command line entry point: verbalize / generate / solve / eval / stats.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .evaluate import aggregate_runs, aggregate_to_dict, evaluate, write_report
from .generator import ExclusionSet, GeneratorConfig, generate_epoch, summarize
from .geometry import GridConfig, InvalidGeometry
from .ingest import DataError, image_id_from_name, parse_detections, parse_vsr
from .solver import load_mapping, read_predictions, solve_all, write_predictions
from .verbalize import scene_description

logger = logging.getLogger("spatialtok")

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_exclusion(paths) -> ExclusionSet:
    """
    Image ids to keep out of generated data.

    Each file is either VSR JSON lines (ids taken from the ``image`` field) or
    plain text with one id or COCO file name per line.
    """
    ids, bad = set(), []
    for path in paths or ():
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                ref = line
                if line.startswith("{"):
                    try:
                        ref = json.loads(line)["image"]
                    except (json.JSONDecodeError, KeyError):
                        bad.append(f"{path}:{lineno}")
                        continue
                try:
                    ids.add(image_id_from_name(ref))
                except DataError:
                    bad.append(f"{path}:{lineno}: {ref!r}")
    if bad:
        raise DataError("unresolvable image references:\n  " + "\n  ".join(bad))
    return ExclusionSet(frozenset(ids))


def _add_grid(p):
    p.add_argument("--grid", type=int, default=32, help="grid size G for location tokens (default: 32)")


def _add_scene_flags(p):
    _add_grid(p)
    p.add_argument("--no-locations", action="store_true", help="leave location tokens out of descriptions")
    p.add_argument("--attributes", action="store_true", help="put detector attributes before each label")
    p.add_argument(
        "--min-confidence", type=float, default=0.0, help="drop detections below this confidence (default: 0)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spatialtok", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-image details")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verbalize", help="write one textual scene description per image")
    p.add_argument("--detections", required=True, help="detection JSON file")
    p.add_argument("--out", required=True, help="output JSON-lines file")
    _add_scene_flags(p)

    p = sub.add_parser("generate", help="generate synthetic spatial QA examples, one file per epoch")
    p.add_argument("--detections", required=True, help="detection JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--exclude", nargs="*", default=[], help="VSR JSONL or id-list files whose images are left out")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--epochs", type=int, default=1, help="number of epochs to write (default: 1)")
    p.add_argument("--first-epoch", type=int, default=0, help="index of the first epoch (default: 0)")
    p.add_argument("--per-image", type=int, default=1, help="examples per image per epoch (default: 1)")
    p.add_argument("--p-two-object", type=float, default=0.7, help="two-object relation probability (default: 0.7)")
    p.add_argument("--p-negative", type=float, default=0.5, help="negative question probability (default: 0.5)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    _add_scene_flags(p)

    p = sub.add_parser("solve", help="answer VSR instances with the box rules")
    p.add_argument("--vsr", required=True, help="VSR JSON-lines split")
    p.add_argument("--detections", required=True, help="detection JSON file for the split's images")
    p.add_argument("--mapping", default=None, help="VSR->box relation TSV (default: packaged table)")
    p.add_argument("--seed", type=int, default=0, help="seed for random fallbacks (default: 0)")
    p.add_argument("--out", required=True, help="predictions JSON-lines file")
    p.add_argument("--summary", default=None, help="also write the coverage summary as JSON here")
    p.add_argument("--min-confidence", type=float, default=0.0, help="drop detections below this confidence")

    p = sub.add_parser("eval", help="accuracy per relation and category")
    p.add_argument("--gold", required=True, help="VSR JSON-lines split")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--predictions", help="predictions JSON-lines file")
    src.add_argument("--runs", nargs="+", help="several prediction files to aggregate (mean, std)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default: json)")
    p.add_argument(
        "--threshold", type=int, default=15, help="CSV tables keep groups with more than this many instances (default: 15)"
    )

    p = sub.add_parser("stats", help="summarize a generated examples file")
    p.add_argument("--input", required=True, help="generated JSON-lines file")
    return parser


def cmd_verbalize(args) -> int:
    grid = GridConfig(args.grid)
    scenes = parse_detections(args.detections, args.min_confidence)
    with open(args.out, "w", encoding="utf-8") as f:
        for scene in scenes:
            if scene.objects:
                d = scene_description(scene, grid, not args.no_locations, args.attributes)
                text, count = d.text, d.object_count
            else:
                text, count = "", 0
            row = {"image_id": scene.image_id, "description": text, "object_count": count}
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {len(scenes)} descriptions to {args.out}")
    return 0


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        grid=GridConfig(args.grid),
        p_two_object=args.p_two_object,
        p_negative=args.p_negative,
        examples_per_image_per_epoch=args.per_image,
        locations=not args.no_locations,
        attributes=args.attributes,
        seed=args.seed,
    )
    scenes = parse_detections(args.detections, args.min_confidence)
    if not scenes:
        raise DataError(f"{args.detections}: no images")
    exclusion = load_exclusion(args.exclude)
    excluded = sum(1 for s in scenes if s.image_id in exclusion)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for epoch in range(args.first_epoch, args.first_epoch + args.epochs):
        path = out / f"sstd_epoch{epoch:03d}.jsonl"
        examples = []
        with open(path, "w", encoding="utf-8") as f:
            for ex in generate_epoch(scenes, exclusion, cfg, epoch, workers=args.workers):
                f.write(ex.to_line() + "\n")
                examples.append(ex)
        summaries[path.name] = summarize(examples)
    total = sum(s["examples"] for s in summaries.values())
    print(json.dumps({"images": len(scenes), "excluded_images": excluded, "examples": total, "files": summaries}, indent=2))
    return 0


def cmd_solve(args) -> int:
    instances = parse_vsr(args.vsr)
    scenes = {s.image_id: s for s in parse_detections(args.detections, args.min_confidence)}
    preds = solve_all(instances, scenes, load_mapping(args.mapping), args.seed)
    write_predictions(preds, args.out)
    report = evaluate(preds, instances)
    cov = report.rule_coverage
    summary = {
        "instances": report.n,
        "mappable_fraction": cov.mappable_fraction if cov else None,
        "solved_fraction": cov.solved_fraction if cov else None,
        "solved_accuracy": cov.solved_accuracy if cov else None,
        "overall_accuracy": report.overall_accuracy,
        "failure_counts": cov.failure_counts if cov else {},
    }
    text = json.dumps(summary, indent=2)
    print(text)
    if args.summary:
        Path(args.summary).write_text(text + "\n", encoding="utf-8")
    return 0


def _write_tables(report, out: Path, stem: str, fmt: str, threshold: int) -> None:
    if fmt == "json":
        write_report(report, out / f"{stem}.json", "json")
    else:
        write_report(report, out / f"{stem}_relations.csv", "csv", "relation", threshold)
        write_report(report, out / f"{stem}_categories.csv", "csv", "category", None)


def cmd_eval(args) -> int:
    gold = parse_vsr(args.gold)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = args.runs or [args.predictions]
    reports = []
    for i, path in enumerate(paths):
        preds = read_predictions(path)
        report = evaluate(preds, gold)
        reports.append(report)
        stem = "report" if len(paths) == 1 else f"run{i}"
        _write_tables(report, out, stem, args.format, args.threshold)
    if len(reports) > 1:
        agg = aggregate_to_dict(aggregate_runs(reports))
        (out / "aggregate.json").write_text(json.dumps(agg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        o = agg["overall_accuracy"]
        print(f"overall accuracy {o['mean']:.4f} +- {o['std']:.4f} over {o['runs']} runs")
    else:
        print(f"overall accuracy {reports[0].overall_accuracy:.4f} on {reports[0].n} instances")
    return 0


def cmd_stats(args) -> int:
    with open(args.input, encoding="utf-8") as f:
        rows = [json.loads(line) for line in f if line.strip()]
    print(json.dumps(summarize(rows), indent=2))
    return 0


COMMANDS = {
    "verbalize": cmd_verbalize,
    "generate": cmd_generate,
    "solve": cmd_solve,
    "eval": cmd_eval,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DataError, InvalidGeometry, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        # bad flag values caught by config validation
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
