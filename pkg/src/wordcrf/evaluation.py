"""Batch evaluation over a corpus manifest, and the ablation sweep."""

from __future__ import annotations

import csv
import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .lm import LexiconKind
from .recognizer import RecognitionConfig, Recognizer

log = logging.getLogger(__name__)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    detections: str
    image_width: float
    ground_truth: str
    lexicon: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.ground_truth:
            raise ManifestError("ground truth must be non-empty")
        if not self.image_width > 0:
            raise ManifestError("image width must be positive")


def parse_manifest(path: "os.PathLike[str] | str") -> List[CorpusEntry]:
    """Read ``detections_path image_width ground_truth [lexicon_path]`` lines.

    Relative paths are resolved against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ManifestError(f"{path}:{lineno}: expected 3 or 4 fields, found {len(parts)}")
        try:
            width = float(parts[1])
        except ValueError:
            raise ManifestError(f"{path}:{lineno}: malformed image width {parts[1]!r}") from None
        lex = str(base / parts[3]) if len(parts) == 4 else None
        try:
            entries.append(CorpusEntry(str(base / parts[0]), width, parts[2], lex))
        except ManifestError as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from None
    return entries


@dataclass
class EntryOutcome:
    index: int
    ground_truth: str
    word: Optional[str]
    raw_word: Optional[str]
    correct: bool
    in_dictionary: bool
    timing_ms: float = 0.0
    energy: Optional[float] = None
    lower_bound: Optional[float] = None
    error: Optional[str] = None


@dataclass
class EvalReport:
    total: int
    correct: int
    accuracy: float
    dictionary: Dict[str, float]
    non_dictionary: Dict[str, float]
    failures: int
    timing_ms: Dict[str, float]
    entries: List[EntryOutcome] = field(default_factory=list)

    def to_dict(self, with_entries: bool = True) -> dict:
        d = dataclasses.asdict(self)
        if not with_entries:
            d.pop("entries")
        return d


def words_match(pred: str, truth: str, case_fold: bool) -> bool:
    if case_fold:
        return pred.upper() == truth.upper()
    return pred == truth


def _bucket(outcomes: Sequence[EntryOutcome]) -> Dict[str, float]:
    total = len(outcomes)
    correct = sum(o.correct for o in outcomes)
    return {"total": total, "correct": correct, "accuracy": 100.0 * correct / total if total else 0.0}


def summarize(outcomes: Sequence[EntryOutcome]) -> EvalReport:
    """Aggregate per-entry outcomes; failed entries count as incorrect."""
    outcomes = sorted(outcomes, key=lambda o: o.index)
    total = len(outcomes)
    correct = sum(o.correct for o in outcomes)
    times = np.array([o.timing_ms for o in outcomes if o.error is None])
    timing = {"mean": 0.0, "p50": 0.0, "p90": 0.0, "p99": 0.0, "max": 0.0}
    if len(times):
        timing = {
            "mean": float(times.mean()),
            "p50": float(np.percentile(times, 50)),
            "p90": float(np.percentile(times, 90)),
            "p99": float(np.percentile(times, 99)),
            "max": float(times.max()),
        }
    return EvalReport(
        total=total,
        correct=correct,
        accuracy=100.0 * correct / total if total else 0.0,
        dictionary=_bucket([o for o in outcomes if o.in_dictionary]),
        non_dictionary=_bucket([o for o in outcomes if not o.in_dictionary]),
        failures=sum(o.error is not None for o in outcomes),
        timing_ms=timing,
        entries=list(outcomes),
    )


def _evaluate_one(rec: Recognizer, index: int, entry: CorpusEntry) -> EntryOutcome:
    cfg = rec.config
    truth = entry.ground_truth.upper() if cfg.case_fold else entry.ground_truth
    try:
        ref_path = cfg.large_lexicon_path or entry.lexicon
        in_dict = False
        if ref_path is not None:
            kind = LexiconKind.LARGE if cfg.large_lexicon_path else LexiconKind.IMAGE_SPECIFIC
            in_dict = truth in rec.lexicon(ref_path, kind)
        if cfg.vocab_mode == "closed" and entry.lexicon is None and cfg.lexicon_path is None:
            raise ValueError("closed-vocabulary entry without a lexicon")
        res = rec.recognize_file(entry.detections, entry.image_width, entry.lexicon)
    except (OSError, ValueError) as exc:
        log.warning("entry %d (%s) skipped: %s", index, entry.detections, exc)
        return EntryOutcome(index, entry.ground_truth, None, None, False, False, error=str(exc))
    return EntryOutcome(
        index,
        entry.ground_truth,
        res.word,
        res.raw_word,
        words_match(res.word, entry.ground_truth, cfg.case_fold),
        in_dict,
        res.timing_ms,
        res.energy,
        res.lower_bound,
    )


_worker_rec: Optional[Recognizer] = None


def _worker_init(config: RecognitionConfig) -> None:
    global _worker_rec
    _worker_rec = Recognizer(config)


def _worker_run(job: Tuple[int, CorpusEntry]) -> EntryOutcome:
    return _evaluate_one(_worker_rec, *job)


def evaluate(
    corpus: Sequence[CorpusEntry],
    config: RecognitionConfig,
    workers: int = 1,
    recognizer: Optional[Recognizer] = None,
) -> EvalReport:
    """Recognize every entry and score it against its ground truth."""
    jobs = list(enumerate(corpus))
    if workers <= 1 or len(jobs) < 2:
        rec = recognizer or Recognizer(config)
        return summarize([_evaluate_one(rec, i, e) for i, e in jobs])
    with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(config,)) as pool:
        outcomes = list(pool.map(_worker_run, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return summarize(outcomes)


ABLATION_ORDERS = (2, 3, 4, 5, 6)


def ablation_configs(base: RecognitionConfig) -> List[Tuple[str, RecognitionConfig]]:
    """Unary-only, pairwise, and one higher-order row per order 2..6."""
    rows = [
        ("unary", base.replace(order=2, lambda_l=0.0, lambda_o=0.0)),
        ("pairwise", base.replace(order=2)),
    ]
    rows += [(f"order-{n}", base.replace(order=n)) for n in ABLATION_ORDERS]
    return rows


@dataclass
class AblationRow:
    name: str
    order: int
    total: int
    correct: int
    accuracy: float
    failures: int
    seconds: float


def ablation(
    corpus: Sequence[CorpusEntry], base: RecognitionConfig, workers: int = 1
) -> List[AblationRow]:
    import time

    rows = []
    for name, cfg in ablation_configs(base):
        t0 = time.perf_counter()
        rep = evaluate(corpus, cfg, workers)
        rows.append(
            AblationRow(name, cfg.order, rep.total, rep.correct, rep.accuracy, rep.failures,
                        time.perf_counter() - t0)
        )
    return rows


def write_ablation_csv(rows: Sequence[AblationRow], path: "os.PathLike[str] | str") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "order", "total", "correct", "accuracy", "failures"])
        for r in rows:
            w.writerow([r.name, r.order, r.total, r.correct, f"{r.accuracy:.2f}", r.failures])
