"""Location-token scene descriptions, synthetic spatial QA and rule-based spatial reasoning."""

from .geometry import (
    BoundingBox,
    DegenerateAngle,
    GridConfig,
    InvalidGeometry,
    LocationTokens,
    NormalizedBox,
    center_angle,
    inscribed,
    iou,
    measures,
    normalize,
    to_location_tokens,
)
from .ingest import DataError, DetectedObject, Scene, VSRInstance, image_id_from_name, parse_detections, parse_vsr
from .relations import RelationCategory, SpatialRelation, false_relations, holds, position_in_image, true_relations
from .verbalize import object_phrase, parse_object_phrase, render_question, scene_description
from .generator import ExclusionSet, GeneratorConfig, SSTDExample, build_exclusion_set, generate_epoch, sample_example
from .solver import Prediction, RelationMapping, load_mapping, map_relation, match_object, parse_caption, solve
from .evaluate import EvalReport, RunAggregate, aggregate_runs, evaluate, write_report

__version__ = "0.1.0"
