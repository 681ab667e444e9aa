"""Potentials of the word CRF and the energy of a labeling.

Character nodes take labels ``0..k-1`` (classes) or ``k`` (epsilon);
auxiliary nodes take ``0..M-1`` (dictionary n-grams) or ``M`` (invalid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np

from .alphabet import Alphabet
from .detection import AspectStats, DetectionWindow, iou
from .graph import CandidateGraph, ExtendedLabelSet
from .lm import NGramModel, RoiPairTable

PAIRWISE_MODES = ("lexicon", "roi")


@dataclass(frozen=True)
class PotentialParams:
    lambda_l: float = 2.0
    lambda_o: float = 2.0
    lambda_a: float = 5.0
    lambda_b: float = 1.0
    beta: float = 50.0
    pairwise_mode: str = "roi"

    def __post_init__(self) -> None:
        for name in ("lambda_l", "lambda_o", "lambda_a", "lambda_b", "beta"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.pairwise_mode not in PAIRWISE_MODES:
            raise ValueError(f"pairwise_mode must be one of {PAIRWISE_MODES}")


class LabelDomainError(ValueError):
    """A labeling does not fit the graph it is evaluated on."""


@dataclass
class Labeling:
    chars: List[int]
    aux: List[int] = field(default_factory=list)


# -- scalar potentials -----------------------------------------------------


def unary_cost(w: DetectionWindow, label: int) -> float:
    return 1.0 - float(w.scores[label])


def null_unary_cost(w: DetectionWindow, stats: AspectStats) -> float:
    """Cost of declaring ``w`` a false detection.

    The maximum over classes of confidence times ``exp(-(mu - a)^2 / sigma^2)``;
    classes with zero confidence cannot win and need no statistics.
    """
    best = 0.0
    for u in np.flatnonzero(w.scores > 0):
        mu, sigma = stats.get(int(u))
        best = max(best, float(w.scores[u]) * math.exp(-((mu - w.aspect) ** 2) / sigma**2))
    return best


def pairwise_lexicon_cost(u: int, v: int, model: NGramModel, params: PotentialParams) -> float:
    return params.lambda_l * math.exp(-params.beta * model.score((u, v)))


def pairwise_roi_cost(u: int, v: int, t: int, roi: RoiPairTable, params: PotentialParams) -> float:
    return 0.0 if roi.contains(t, u, v) else params.lambda_l


def pairwise_null_cost(a: DetectionWindow, b: DetectionWindow, params: PotentialParams) -> float:
    return params.lambda_o * math.exp(-params.beta * (1.0 - iou(a, b)) ** 2)


def aux_unary_cost(
    m: int, label_set: ExtendedLabelSet, model: NGramModel, params: PotentialParams
) -> float:
    if m == label_set.invalid_index:
        return params.lambda_a
    return params.lambda_a * math.exp(-params.beta * model.score(label_set.ngrams[m]))


def aux_pairwise_cost(
    m: int, q: int, l_r: int, label_set: ExtendedLabelSet, params: PotentialParams
) -> float:
    """Disagreement cost between aux label ``m`` and its ``q``-th member (1-based)."""
    if not 1 <= q <= label_set.n:
        raise ValueError(f"member position {q} outside 1..{label_set.n}")
    if m == label_set.invalid_index or l_r == label_set.alphabet.epsilon_index:
        return 0.0
    return 0.0 if int(label_set.ngrams[m][q - 1]) == l_r else params.lambda_b


def node_part(w: DetectionWindow, image_width: float, T: int) -> int:
    """Image part (1..T) holding the window centre, for the position-aware prior."""
    t = math.ceil(w.center_x / (image_width / T)) if image_width > 0 else 1
    return min(max(t, 1), T)


def pairwise_cost(
    g: CandidateGraph,
    i: int,
    j: int,
    li: int,
    lj: int,
    alphabet: Alphabet,
    model: Optional[NGramModel],
    roi: Optional[RoiPairTable],
    params: PotentialParams,
) -> float:
    eps = alphabet.epsilon_index
    if li == eps and lj == eps:
        return 0.0
    if li == eps or lj == eps:
        return pairwise_null_cost(g.nodes[i], g.nodes[j], params)
    if params.pairwise_mode == "roi":
        if roi is None:
            raise ValueError("position-aware pairwise mode needs an ROI table")
        return pairwise_roi_cost(li, lj, node_part(g.nodes[i], g.image_width, roi.T), roi, params)
    if model is None:
        raise ValueError("lexicon pairwise mode needs an n-gram model")
    return pairwise_lexicon_cost(li, lj, model, params)


def check_labeling(g: CandidateGraph, labeling: Labeling, alphabet: Alphabet) -> None:
    if len(labeling.chars) != g.N:
        raise LabelDomainError(f"{len(labeling.chars)} character labels for {g.N} nodes")
    if len(labeling.aux) != len(g.aux_nodes):
        raise LabelDomainError(f"{len(labeling.aux)} aux labels for {len(g.aux_nodes)} aux nodes")
    for x in labeling.chars:
        if not 0 <= x <= alphabet.k:
            raise LabelDomainError(f"character label {x} outside 0..{alphabet.k}")
    if g.aux_nodes:
        size = g.label_set.size
        for y in labeling.aux:
            if not 0 <= y < size:
                raise LabelDomainError(f"aux label {y} outside 0..{size - 1}")


def total_energy(
    g: CandidateGraph,
    labeling: Labeling,
    model: Optional[NGramModel],
    roi: Optional[RoiPairTable],
    params: PotentialParams,
    stats: AspectStats,
) -> float:
    """Sum of every unary, edge and auxiliary term for ``labeling``."""
    alphabet = stats.alphabet
    check_labeling(g, labeling, alphabet)
    eps = alphabet.epsilon_index
    e = 0.0
    for w, x in zip(g.nodes, labeling.chars):
        e += null_unary_cost(w, stats) if x == eps else unary_cost(w, x)
    for i, j in g.edges:
        e += pairwise_cost(g, i, j, labeling.chars[i], labeling.chars[j], alphabet, model, roi, params)
    for aux, y in zip(g.aux_nodes, labeling.aux):
        e += aux_unary_cost(y, g.label_set, model, params)
        for q, r in enumerate(aux.members, start=1):
            e += aux_pairwise_cost(y, q, labeling.chars[r], g.label_set, params)
    return e


class EnergyModel:
    """All potential tables of one graph, computed once and then read-only."""

    def __init__(
        self,
        graph: CandidateGraph,
        model: Optional[NGramModel],
        roi: Optional[RoiPairTable],
        params: PotentialParams,
        stats: AspectStats,
    ):
        self.graph = graph
        self.model = model
        self.roi = roi
        self.params = params
        self.stats = stats
        self.alphabet = stats.alphabet
        if params.pairwise_mode == "roi" and graph.edges and roi is None:
            raise ValueError("position-aware pairwise mode needs an ROI table")
        if graph.aux_nodes and model is None:
            raise ValueError("auxiliary nodes need an n-gram model")

    def unary_table(self, i: int) -> np.ndarray:
        w = self.graph.nodes[i]
        return np.append(1.0 - w.scores, null_unary_cost(w, self.stats))

    def edge_table(self, i: int, j: int) -> np.ndarray:
        """``(k+1) x (k+1)`` cost matrix of edge ``(i, j)``; row = label of ``i``."""
        p = self.params
        k = self.alphabet.k
        table = np.empty((k + 1, k + 1))
        if p.pairwise_mode == "roi":
            t = node_part(self.graph.nodes[i], self.graph.image_width, self.roi.T)
            table[:k, :k] = np.where(self.roi.matrix(t), 0.0, p.lambda_l)
        else:
            table[:k, :k] = p.lambda_l * np.exp(-p.beta * self._pair_scores)
        null = pairwise_null_cost(self.graph.nodes[i], self.graph.nodes[j], p)
        table[k, :k] = null
        table[:k, k] = null
        table[k, k] = 0.0
        return table

    @cached_property
    def _pair_scores(self) -> np.ndarray:
        return self.model.pair_scores()

    @cached_property
    def aux_unary(self) -> np.ndarray:
        ls = self.graph.label_set
        p = self.params
        scores = self.model.score_many(ls.ngrams) if ls.M else np.zeros(0)
        return np.append(p.lambda_a * np.exp(-p.beta * scores), p.lambda_a)

    def aux_codes(self, q: int) -> np.ndarray:
        """Alphabet index of the ``q``-th character (0-based) of every aux label; -1 = invalid."""
        ls = self.graph.label_set
        return np.append(ls.ngrams[:, q], -1) if ls.M else np.array([-1])
