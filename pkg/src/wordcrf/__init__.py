"""Word recognition with a higher-order CRF over character detections."""

from .alphabet import EPSILON, Alphabet
from .detection import AspectStats, DetectionWindow, ingest_detections, read_detections, write_detections
from .energy import EnergyModel, Labeling, PotentialParams, total_energy
from .evaluation import CorpusEntry, EvalReport, ablation, evaluate, parse_manifest
from .graph import CandidateGraph, ExtendedLabelSet, build_extended_label_set, build_graph
from .inference import (
    FactorGraphView,
    InferenceResult,
    brute_force_minimize,
    build_factor_view,
    trws_minimize,
)
from .lm import Lexicon, LexiconKind, NGramModel, build_ngram_model, build_roi_table, load_lexicon
from .recognizer import (
    RecognitionConfig,
    RecognitionResult,
    Recognizer,
    edit_distance_correct,
    read_out_word,
    recognize,
)
from .synth import synth_corpus

__version__ = "0.1.0"

__all__ = [
    "EPSILON", "Alphabet", "AspectStats", "DetectionWindow", "ingest_detections", "read_detections",
    "write_detections", "EnergyModel", "Labeling", "PotentialParams", "total_energy", "CorpusEntry",
    "EvalReport", "ablation", "evaluate", "parse_manifest", "CandidateGraph", "ExtendedLabelSet",
    "build_extended_label_set", "build_graph", "FactorGraphView", "InferenceResult",
    "brute_force_minimize", "build_factor_view", "trws_minimize", "Lexicon", "LexiconKind",
    "NGramModel", "build_ngram_model", "build_roi_table", "load_lexicon", "RecognitionConfig",
    "RecognitionResult", "Recognizer", "edit_distance_correct", "read_out_word", "recognize",
    "synth_corpus",
]
