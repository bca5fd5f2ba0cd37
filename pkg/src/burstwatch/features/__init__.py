"""Feature families computed at a prediction moment."""

from .assemble import (DEFAULT_STAGES, FeatureVector, StageArtifacts, StageRow, assemble,
                       assemble_matrix, featurize_stream)
from .prototypes import NormalizationStats, PrototypeIndex, PrototypePool, similarity
from .schema import ALPHA, BASE_DIM, FEATURE_NAMES, SCHEMA_VERSION, schema_document
from .series import build_top_gram_table


def build_stage_artifacts(historic_rows, training_rows, stage: int) -> StageArtifacts:
    """Normalization and prototype pools from the historic run, top grams from training."""
    hist = [r for r in historic_rows if r.stage == stage and r.label is not None]
    stats = NormalizationStats.fit([r.base for r in hist])
    pools = {}
    for task in ("burst", "tbb", "tra"):
        pools[task] = PrototypePool.build(
            [(r.key, r.cycle, r.base, r.target(task)) for r in hist if r.eligible(task)])
    grams = build_top_gram_table(r.grams for r in training_rows
                                 if r.stage == stage and r.label == 1)
    return StageArtifacts(grams, PrototypeIndex(stats, pools))


__all__ = [
    "ALPHA", "BASE_DIM", "DEFAULT_STAGES", "FEATURE_NAMES", "SCHEMA_VERSION", "FeatureVector",
    "NormalizationStats", "PrototypeIndex", "PrototypePool", "StageArtifacts", "StageRow",
    "assemble", "assemble_matrix", "build_stage_artifacts", "build_top_gram_table",
    "featurize_stream", "schema_document", "similarity",
]
