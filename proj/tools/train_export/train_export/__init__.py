"""Training and bundle export for the extractive span model.

The boundary with the C++ pipeline is the file system: corpus and split
JSONL files in, model bundle directories out.
"""

from .schemas import (QUESTIONS, MissingSpan, TrainingExample, prepare_training_examples, read_corpus,
                      read_splits)
from .manifest import BundleInvalid, read_manifest, verify_bundle, write_manifest
from .train import Checkpoint, TrainingConfig, TrainingDiverged, fine_tune, predict_answers
from .export import ExportVerificationError, export_bundle

__all__ = [
    "QUESTIONS", "MissingSpan", "TrainingExample", "prepare_training_examples", "read_corpus", "read_splits",
    "BundleInvalid", "read_manifest", "verify_bundle", "write_manifest",
    "Checkpoint", "TrainingConfig", "TrainingDiverged", "fine_tune", "predict_answers",
    "ExportVerificationError", "export_bundle",
]
