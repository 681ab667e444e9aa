"""End-to-end word recognition: windows in, word out."""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from rapidfuzz.distance import Levenshtein
from rapidfuzz.process import cdist

from .alphabet import EPSILON, Alphabet
from .classifier import default_aspect_stats
from .detection import (
    GS_THRESHOLD,
    NMS_OVERLAP,
    AspectStats,
    DetectionWindow,
    ingest_detections,
    load_aspect_stats,
    nms_character_specific,
    prune_by_goodness,
)
from .energy import EnergyModel, Labeling, PotentialParams
from .graph import (
    DEFAULT_PROXIMITY,
    CandidateGraph,
    ExtendedLabelSet,
    build_extended_label_set,
    build_graph,
    estimate_T,
)
from .inference import (
    DEFAULT_DOMAIN_CAP,
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    build_factor_view,
    trws_minimize,
)
from .lm import (
    DEFAULT_DIGIT_CONSTANT,
    Lexicon,
    LexiconKind,
    RoiPairTable,
    build_ngram_model,
    build_roi_table,
    load_lexicon,
)

SMALL_LEXICON = 1000


@dataclass(frozen=True)
class RecognitionConfig:
    vocab_mode: str = "open"
    order: int = 4
    params: PotentialParams = field(default_factory=PotentialParams)
    case_fold: bool = True
    lexicon_path: Optional[str] = None
    large_lexicon_path: Optional[str] = None
    aspect_stats_path: Optional[str] = None
    proximity: float = DEFAULT_PROXIMITY
    gs_threshold: float = GS_THRESHOLD
    nms_overlap: float = NMS_OVERLAP
    prune: bool = True
    auto_lambda_a: bool = True
    edit_correction: bool = True
    digit_constant: float = DEFAULT_DIGIT_CONSTANT
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    domain_cap: int = DEFAULT_DOMAIN_CAP

    def __post_init__(self) -> None:
        if self.vocab_mode not in ("closed", "open"):
            raise ValueError("vocab_mode must be 'closed' or 'open'")
        if not 2 <= self.order <= 6:
            raise ValueError("order must be in 2..6")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.for_case(self.case_fold)

    def replace(self, **changes) -> "RecognitionConfig":
        if any(k in changes for k in ("lambda_l", "lambda_o", "lambda_a", "lambda_b", "beta", "pairwise_mode")):
            pkeys = {k: changes.pop(k) for k in list(changes) if k in PotentialParams.__dataclass_fields__}
            changes["params"] = dataclasses.replace(self.params, **pkeys)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RecognitionConfig":
        d = dict(d)
        params = dict(d.pop("params", {}) or {})
        for k in list(d):
            if k in PotentialParams.__dataclass_fields__:
                params[k] = d.pop(k)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(params=PotentialParams(**params), **d)

    @classmethod
    def load(cls, path: "os.PathLike[str] | str") -> "RecognitionConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RecognitionResult:
    word: str
    raw_word: str
    energy: float
    lower_bound: float
    labels: List[str]
    timing_ms: float
    iterations: int = 0
    converged: bool = True

    def to_record(self) -> dict:
        return {
            "word": self.word,
            "raw_word": self.raw_word,
            "energy": self.energy,
            "lower_bound": self.lower_bound,
            "timing_ms": self.timing_ms,
        }


def read_out_word(g: CandidateGraph, labeling: Labeling, alphabet: Alphabet) -> str:
    """Non-null character labels, left to right."""
    eps = alphabet.epsilon_index
    return "".join(alphabet.labels[x] for x in labeling.chars if x != eps)


def edit_distance_correct(raw: str, lex: Union[Lexicon, Sequence[str]]) -> str:
    """Lexicon word closest to ``raw`` in unit-cost edit distance; ties keep lexicon order."""
    words = list(lex)
    if not words:
        raise ValueError("edit-distance correction needs a non-empty lexicon")
    dist = cdist([raw], words, scorer=Levenshtein.distance, dtype=np.int32, workers=1)[0]
    return words[int(np.argmin(dist))]


class _LexiconResources:
    """Per-lexicon language model, extended label sets and ROI tables."""

    def __init__(self, lex: Lexicon, order: int, digit_constant: float):
        self.lex = lex
        self.model = build_ngram_model(lex, max(order, 2), digit_constant)
        self._label_sets: Dict[int, ExtendedLabelSet] = {}
        self._roi: Dict[int, RoiPairTable] = {}
        self._aux_unary: Dict[Tuple[int, PotentialParams], np.ndarray] = {}

    def label_set(self, n: int) -> ExtendedLabelSet:
        if n not in self._label_sets:
            self._label_sets[n] = build_extended_label_set(self.lex, n)
        return self._label_sets[n]

    def roi(self, T: int) -> RoiPairTable:
        if T not in self._roi:
            self._roi[T] = build_roi_table(self.lex, T)
        return self._roi[T]

    def aux_unary(self, n: int, params: PotentialParams) -> Optional[np.ndarray]:
        return self._aux_unary.get((n, params))

    def store_aux_unary(self, n: int, params: PotentialParams, value: np.ndarray) -> None:
        self._aux_unary[(n, params)] = value


class Recognizer:
    """Runs the pipeline for one configuration, caching lexicon-derived models.

    Shared state is only ever read after it is built, so one instance can
    serve many words.
    """

    def __init__(self, config: RecognitionConfig, stats: Optional[AspectStats] = None):
        self.config = config
        self.alphabet = config.alphabet
        if stats is None:
            if config.aspect_stats_path:
                stats = load_aspect_stats(config.aspect_stats_path, self.alphabet)
            else:
                stats = default_aspect_stats(self.alphabet)
        self.stats = stats
        self._lexicons: Dict[str, Lexicon] = {}
        self._resources: Dict[Tuple[str, int], _LexiconResources] = {}

    def lexicon(self, path: str, kind: LexiconKind = LexiconKind.IMAGE_SPECIFIC) -> Lexicon:
        key = os.fspath(path)
        if key not in self._lexicons:
            self._lexicons[key] = load_lexicon(key, self.config.case_fold, kind, self.alphabet)
        return self._lexicons[key]

    def resources(self, lex: Lexicon, key: str) -> _LexiconResources:
        rk = (key, self.config.order)
        if rk not in self._resources:
            self._resources[rk] = _LexiconResources(lex, self.config.order, self.config.digit_constant)
        return self._resources[rk]

    def _prior_lexicon(self, lexicon_path: Optional[str]) -> Tuple[Lexicon, str]:
        cfg = self.config
        if cfg.vocab_mode == "closed":
            path = lexicon_path or cfg.lexicon_path
            if path is None:
                raise ValueError("closed-vocabulary recognition needs an image-specific lexicon")
            return self.lexicon(path), os.fspath(path)
        if cfg.large_lexicon_path is None:
            raise ValueError("open-vocabulary recognition needs the large lexicon")
        return self.lexicon(cfg.large_lexicon_path, LexiconKind.LARGE), os.fspath(cfg.large_lexicon_path)

    def effective_params(self, lex: Lexicon) -> PotentialParams:
        p = self.config.params
        if (
            self.config.auto_lambda_a
            and self.config.vocab_mode == "closed"
            and len(lex) <= SMALL_LEXICON
        ):
            p = dataclasses.replace(p, lambda_a=1.0)
        return p

    def prepare(self, windows: Sequence[DetectionWindow]) -> List[DetectionWindow]:
        ws = list(windows)
        if self.config.prune:
            ws = prune_by_goodness(ws, self.stats, self.config.gs_threshold)
        return nms_character_specific(ws, self.config.nms_overlap)

    def recognize(
        self,
        windows: Sequence[DetectionWindow],
        image_width: float,
        lexicon_path: Optional[str] = None,
    ) -> RecognitionResult:
        start = time.perf_counter()
        cfg = self.config
        lex, key = self._prior_lexicon(lexicon_path)
        ws = self.prepare(windows)
        if not ws:
            return RecognitionResult("", "", 0.0, 0.0, [], _ms(start))
        params = self.effective_params(lex)
        res = self.resources(lex, key)
        label_set = res.label_set(cfg.order) if cfg.order >= 3 else None
        g = build_graph(ws, image_width, cfg.order, label_set, cfg.proximity)
        roi = None
        if params.pairwise_mode == "roi" and g.edges:
            roi = res.roi(estimate_T(g.nodes, image_width))
        em = EnergyModel(g, res.model, roi, params, self.stats)
        if g.aux_nodes:
            cached = res.aux_unary(cfg.order, params)
            if cached is None:
                res.store_aux_unary(cfg.order, params, em.aux_unary)
            else:
                em.__dict__["aux_unary"] = cached
        view = build_factor_view(em, cfg.domain_cap)
        out = trws_minimize(view, cfg.max_iters, cfg.tol)
        raw = read_out_word(g, out.labeling, self.alphabet)
        word = raw
        if cfg.vocab_mode == "closed" and cfg.edit_correction:
            word = edit_distance_correct(raw, lex)
        labels = [EPSILON if x == self.alphabet.epsilon_index else self.alphabet.labels[x] for x in out.labeling.chars]
        return RecognitionResult(
            word, raw, out.energy, out.lower_bound, labels, _ms(start), out.iterations, out.converged
        )

    def recognize_file(
        self, detections_path: str, image_width: float, lexicon_path: Optional[str] = None
    ) -> RecognitionResult:
        ws = ingest_detections(detections_path, self.alphabet)
        return self.recognize(ws, image_width, lexicon_path)


def recognize(
    detections: Union[str, Sequence[DetectionWindow]],
    image_width: float,
    config: RecognitionConfig,
    lexicon_path: Optional[str] = None,
) -> RecognitionResult:
    """One-shot convenience wrapper around :class:`Recognizer`."""
    rec = Recognizer(config)
    if isinstance(detections, (str, os.PathLike)):
        return rec.recognize_file(os.fspath(detections), image_width, lexicon_path)
    return rec.recognize(detections, image_width, lexicon_path)


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0
