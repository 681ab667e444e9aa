"""Candidate character windows: sliding-window scoring, pruning and NMS."""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .alphabet import Alphabet

ASPECT_RANGE = (0.1, 2.5)
GS_THRESHOLD = 0.1
NMS_OVERLAP = 0.4

ScoreProvider = Callable[[np.ndarray], Sequence[float]]


class DetectionFormatError(ValueError):
    """A detections or aspect-stats file violates its format."""


@dataclass(eq=False)
class DetectionWindow:
    """One candidate character location with per-class confidences."""

    id: int
    center_x: float
    center_y: float
    width: float
    height: float
    scores: np.ndarray

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=float)
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"window {self.id}: width and height must be positive")
        if self.scores.ndim != 1:
            raise ValueError(f"window {self.id}: scores must be a vector")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError(f"window {self.id}: non-finite score")
        if np.any(self.scores < 0.0) or np.any(self.scores > 1.0):
            raise ValueError(f"window {self.id}: score out of [0,1]")

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def top_class(self) -> int:
        return int(np.argmax(self.scores))

    @property
    def top_score(self) -> float:
        return float(self.scores.max())

    @property
    def x0(self) -> float:
        return self.center_x - self.width / 2

    @property
    def x1(self) -> float:
        return self.center_x + self.width / 2

    @property
    def y0(self) -> float:
        return self.center_y - self.height / 2

    @property
    def y1(self) -> float:
        return self.center_y + self.height / 2

    def __repr__(self) -> str:
        return (
            f"DetectionWindow(id={self.id}, cx={self.center_x:g}, cy={self.center_y:g}, "
            f"w={self.width:g}, h={self.height:g}, top={self.top_class}:{self.top_score:.3f})"
        )


def iou(a: DetectionWindow, b: DetectionWindow) -> float:
    """Intersection over union of two axis-aligned windows."""
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.width * a.height + b.width * b.height - inter)


@dataclass
class AspectStats:
    """Per-class mean and spread of character aspect ratios (width / height)."""

    alphabet: Alphabet
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.mu.shape != (self.alphabet.k,) or self.sigma.shape != (self.alphabet.k,):
            raise ValueError("aspect stats must have one entry per class")
        known = ~np.isnan(self.mu)
        if np.any(self.sigma[known] <= 0) or not np.all(np.isfinite(self.sigma[known])):
            raise ValueError("aspect sigma must be positive and finite")

    def has(self, j: int) -> bool:
        return not math.isnan(self.mu[j])

    def get(self, j: int) -> Tuple[float, float]:
        if not self.has(j):
            raise KeyError(f"no aspect statistics for class {self.alphabet.labels[j]!r}")
        return float(self.mu[j]), float(self.sigma[j])

    @classmethod
    def from_mapping(cls, alphabet: Alphabet, table: Dict[str, Tuple[float, float]]) -> "AspectStats":
        mu = np.full(alphabet.k, np.nan)
        sigma = np.full(alphabet.k, np.nan)
        for label, (m, s) in table.items():
            label = alphabet.fold(label)
            if label in alphabet:
                j = alphabet.index(label)
                if math.isnan(mu[j]):
                    mu[j], sigma[j] = m, s
        return cls(alphabet, mu, sigma)

    def save(self, path: "os.PathLike[str] | str") -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for j, lab in enumerate(self.alphabet.labels):
                if self.has(j):
                    fh.write(f"{lab} {float(self.mu[j])!r} {float(self.sigma[j])!r}\n")


def load_aspect_stats(path: "os.PathLike[str] | str", alphabet: Alphabet) -> AspectStats:
    table: Dict[str, Tuple[float, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise DetectionFormatError(f"{path}:{lineno}: expected '<label> <mu> <sigma>'")
            try:
                mu, sigma = float(parts[1]), float(parts[2])
            except ValueError:
                raise DetectionFormatError(f"{path}:{lineno}: non-numeric value") from None
            if not (math.isfinite(mu) and math.isfinite(sigma)) or sigma <= 0:
                raise DetectionFormatError(f"{path}:{lineno}: need finite mu and sigma > 0")
            table.setdefault(parts[0], (mu, sigma))
    return AspectStats.from_mapping(alphabet, table)


def goodness_score(w: DetectionWindow, stats: AspectStats) -> float:
    """Top confidence times a Gaussian agreement of the window's aspect ratio."""
    j = w.top_class
    mu, sigma = stats.get(j)
    return float(w.scores[j] * math.exp(-((mu - w.aspect) ** 2) / (2.0 * sigma**2)))


def prune_by_goodness(
    ws: Iterable[DetectionWindow], stats: AspectStats, threshold: float = GS_THRESHOLD
) -> List[DetectionWindow]:
    return [w for w in ws if goodness_score(w, stats) >= threshold]


def nms_character_specific(
    ws: Iterable[DetectionWindow], overlap_threshold: float = NMS_OVERLAP
) -> List[DetectionWindow]:
    """Greedy per-class suppression; result is sorted by window id.

    Within one argmax class, windows are visited by descending top score (ties:
    lower id first) and a window is dropped when its IoU with an already kept
    window exceeds ``overlap_threshold``.
    """
    if not 0.0 < overlap_threshold < 1.0:
        raise ValueError("overlap_threshold must lie in (0, 1)")
    by_class: Dict[int, List[DetectionWindow]] = {}
    for w in ws:
        by_class.setdefault(w.top_class, []).append(w)
    kept: List[DetectionWindow] = []
    for group in by_class.values():
        group.sort(key=lambda w: (-w.top_score, w.id))
        chosen: List[DetectionWindow] = []
        for w in group:
            if all(iou(w, c) <= overlap_threshold for c in chosen):
                chosen.append(w)
        kept.extend(chosen)
    kept.sort(key=lambda w: w.id)
    return kept


def default_scales(image_height: int) -> List[Tuple[int, int]]:
    """Three window heights, each paired with a spread of aspect ratios."""
    sizes = []
    for frac in (1.0, 0.85, 0.7):
        h = max(1, int(round(image_height * frac)))
        for aspect in (0.3, 0.45, 0.6, 0.75, 0.9, 1.1):
            sizes.append((max(1, int(round(h * aspect))), h))
    return sizes


def default_stride(image_height: int) -> int:
    return max(1, image_height // 8)


def sliding_window_detect(
    image: np.ndarray,
    provider: ScoreProvider,
    scales: Sequence[Tuple[int, int]],
    stride: int,
    aspect_range: Tuple[float, float] = ASPECT_RANGE,
    k: Optional[int] = None,
) -> List[DetectionWindow]:
    """Score every placement of every ``(width, height)`` window size.

    Placements run over scales in the given order, then rows, then columns;
    ids follow that order. Sizes whose aspect lies outside ``aspect_range`` or
    that do not fit in the image are skipped.
    """
    image = np.asarray(image)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("image must be a non-empty 2-D raster")
    if not scales:
        raise ValueError("at least one window scale is required")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if k is None:
        alphabet = getattr(provider, "alphabet", None)
        k = alphabet.k if alphabet is not None else None
    H, W = image.shape
    lo, hi = aspect_range
    out: List[DetectionWindow] = []
    for w, h in scales:
        if not lo <= w / h <= hi or w > W or h > H:
            continue
        for y0 in range(0, H - h + 1, stride):
            for x0 in range(0, W - w + 1, stride):
                scores = np.asarray(provider(image[y0 : y0 + h, x0 : x0 + w]), dtype=float)
                if k is None:
                    k = len(scores)
                if scores.shape != (k,):
                    raise ValueError(f"provider returned {scores.size} scores, expected {k}")
                out.append(DetectionWindow(len(out), x0 + w / 2, y0 + h / 2, w, h, scores))
    return out


# -- detections file -------------------------------------------------------

_HEADER = re.compile(r"^k=(\d+)\s+classes=(\S*)\s*$")


def write_detections(
    path: "os.PathLike[str] | str", alphabet: Alphabet, windows: Sequence[DetectionWindow]
) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"k={alphabet.k} classes={','.join(alphabet.labels)}\n")
        for w in windows:
            coords = " ".join(f"{v:.4f}" for v in (w.center_x, w.center_y, w.width, w.height))
            scores = " ".join(f"{s:.6f}" for s in w.scores)
            fh.write(f"{w.id} {coords} {scores}\n")


def read_detections(path: "os.PathLike[str] | str") -> Tuple[Tuple[str, ...], List[DetectionWindow]]:
    """Parse a detections file into its class list and windows."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DetectionFormatError(f"{path}:1: missing header")
    m = _HEADER.match(lines[0])
    if not m:
        raise DetectionFormatError(f"{path}:1: malformed header {lines[0]!r}")
    k = int(m.group(1))
    classes = tuple(m.group(2).split(",")) if m.group(2) else ()
    if len(classes) != k:
        raise DetectionFormatError(f"{path}:1: header declares k={k} but lists {len(classes)} classes")
    windows: List[DetectionWindow] = []
    seen_ids = set()
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != 5 + k:
            raise DetectionFormatError(
                f"{path}:{lineno}: expected {k} scores, found {len(parts) - 5}"
            )
        try:
            wid = int(parts[0])
            vals = [float(p) for p in parts[1:]]
        except ValueError:
            raise DetectionFormatError(f"{path}:{lineno}: malformed number") from None
        if not all(math.isfinite(v) for v in vals):
            raise DetectionFormatError(f"{path}:{lineno}: non-finite value")
        scores = np.array(vals[4:])
        if np.any(scores < 0) or np.any(scores > 1):
            raise DetectionFormatError(f"{path}:{lineno}: score out of [0,1]")
        if vals[2] <= 0 or vals[3] <= 0:
            raise DetectionFormatError(f"{path}:{lineno}: width and height must be positive")
        if wid in seen_ids:
            raise DetectionFormatError(f"{path}:{lineno}: duplicate window id {wid}")
        seen_ids.add(wid)
        windows.append(DetectionWindow(wid, vals[0], vals[1], vals[2], vals[3], scores))
    return classes, windows


def reconcile_scores(
    classes: Sequence[str], windows: Sequence[DetectionWindow], alphabet: Alphabet
) -> List[DetectionWindow]:
    """Re-express score vectors over ``alphabet``.

    Classes folding onto the same label (``a`` and ``A`` in a case-insensitive
    run) are merged by taking the larger score. Every alphabet label must be
    covered by at least one class.
    """
    if tuple(classes) == alphabet.labels:
        return list(windows)
    cols: Dict[int, List[int]] = {}
    for c, lab in enumerate(classes):
        folded = alphabet.fold(lab)
        if folded not in alphabet:
            raise DetectionFormatError(f"class {lab!r} has no counterpart in the run alphabet")
        cols.setdefault(alphabet.index(folded), []).append(c)
    missing = [alphabet.labels[j] for j in range(alphabet.k) if j not in cols]
    if missing:
        raise DetectionFormatError(f"detections lack scores for classes {''.join(missing)!r}")
    out = []
    for w in windows:
        s = np.array([w.scores[cols[j]].max() for j in range(alphabet.k)])
        out.append(DetectionWindow(w.id, w.center_x, w.center_y, w.width, w.height, s))
    return out


def ingest_detections(
    path: "os.PathLike[str] | str", alphabet: Optional[Alphabet] = None
) -> List[DetectionWindow]:
    """Read a detections file, optionally checking it against a run alphabet.

    With an alphabet of the same size the class lists must agree; a
    62-class file can feed a 36-class (case-folded) run. Any other size
    mismatch is reported against the first window line.
    """
    classes, windows = read_detections(path)
    if alphabet is None:
        return windows
    if len(classes) != alphabet.k and not (
        alphabet.is_case_folded and {alphabet.fold(c) for c in classes} == set(alphabet.labels)
    ):
        raise DetectionFormatError(
            f"{path}:2: {len(classes)} scores per window on a {alphabet.k}-class run"
        )
    return reconcile_scores(classes, windows, alphabet)
