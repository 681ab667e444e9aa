"""Reference score provider: nearest-template matching on 16x16 binary grids.

Only meant to make the pipeline runnable without trained models. Scores are
ink-overlap (Jaccard) similarities between the resized window and each class
template, so they lie in [0, 1] without any softmax.
"""

from __future__ import annotations

from typing import Dict, List

import numpy as np

from .alphabet import Alphabet
from .detection import AspectStats
from .render import glyph_aspect, glyph_template, resample

GRID = 16
# stretch range of the "training" renders behind the aspect statistics; wider
# than the test-time jitter, as a classifier trained on many fonts would see
TRAIN_X_RANGE = (0.6, 1.4)


def _variants(alphabet: Alphabet, label: str) -> List[str]:
    # a folded run scores 'A' by the better of the 'A' and 'a' templates
    if alphabet.is_case_folded and label.isalpha():
        return [label, label.lower()]
    return [label]


class TemplateClassifier:
    """Callable ``patch -> scores`` over the classes of ``alphabet``."""

    def __init__(self, alphabet: Alphabet, threshold: float = 0.5):
        self.alphabet = alphabet
        self.threshold = threshold
        templates = []
        owner = []
        for j, lab in enumerate(alphabet.labels):
            for ch in _variants(alphabet, lab):
                templates.append(resample(glyph_template(ch) > 0.5, GRID, GRID).ravel())
                owner.append(j)
        self._templates = np.array(templates, dtype=bool)
        self._owner = np.array(owner)
        self._ink = self._templates.sum(axis=1)

    def __call__(self, patch: np.ndarray) -> np.ndarray:
        patch = np.asarray(patch, dtype=float)
        grid = resample(patch > self.threshold, GRID, GRID).ravel()
        inter = (self._templates & grid).sum(axis=1)
        union = self._ink + grid.sum() - inter
        sim = np.where(union > 0, inter / np.maximum(union, 1), 0.0)
        scores = np.zeros(self.alphabet.k)
        np.maximum.at(scores, self._owner, sim)
        return scores


def default_aspect_stats(
    alphabet: Alphabet, samples: int = 17, x_range: tuple = TRAIN_X_RANGE
) -> AspectStats:
    """Aspect mean/std per class over a range of horizontal stretches.

    Folded runs use the capital glyph, which is what the synthetic corpus draws.
    """
    scales = np.linspace(x_range[0], x_range[1], samples)
    table: Dict[str, tuple] = {}
    for lab in alphabet.labels:
        a = np.array([glyph_aspect(lab, s) for s in scales])
        table[lab] = (float(a.mean()), float(a.std()))
    return AspectStats.from_mapping(alphabet, table)
