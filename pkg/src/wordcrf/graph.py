"""Left-to-right candidate graphs with auxiliary n-gram nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .alphabet import Alphabet
from .detection import DetectionWindow
from .lm import Lexicon

DEFAULT_PROXIMITY = 1.0


@dataclass(frozen=True)
class ExtendedLabelSet:
    """Dictionary n-grams ``L_1..L_M`` plus the catch-all invalid label ``L_{M+1}``.

    ``ngrams`` is an ``M x n`` integer array of alphabet indices, sorted
    lexicographically; the invalid label has index ``M``.
    """

    alphabet: Alphabet
    n: int
    ngrams: np.ndarray

    @property
    def M(self) -> int:
        return len(self.ngrams)

    @property
    def size(self) -> int:
        return self.M + 1

    @property
    def invalid_index(self) -> int:
        return self.M

    def label(self, m: int) -> str:
        if m == self.M:
            return "<invalid>"
        return self.alphabet.decode(self.ngrams[m])

    @cached_property
    def index(self) -> "NGramIndex":
        return NGramIndex(self.ngrams)

    def index_of(self, ngram: str) -> int:
        """Index of a dictionary n-gram, or the invalid index if absent."""
        target = np.array(self.alphabet.encode(ngram))
        if len(target) != self.n or self.M == 0:
            return self.M
        hits = np.flatnonzero((self.ngrams == target).all(axis=1))
        return int(hits[0]) if len(hits) else self.M


class NGramIndex:
    """Head/tail split of an ``M x n`` code matrix.

    Positions ``[0, h)`` form the head and ``[h, n)`` the tail. Each row is
    mapped to the id of its distinct head pattern and of its distinct tail
    pattern, so sums of per-position terms can be formed once per pattern
    instead of once per row.
    """

    def __init__(self, codes: np.ndarray):
        self.codes = np.ascontiguousarray(codes, dtype=np.int64)
        self.M, self.n = self.codes.shape
        self.h = (self.n + 1) // 2
        self.head_patterns, self.head_ids = _patterns(self.codes[:, : self.h])
        self.tail_patterns, self.tail_ids = _patterns(self.codes[:, self.h :])


def _patterns(cols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if len(cols) == 0:
        return np.zeros((0, cols.shape[1]), dtype=np.int64), np.zeros(0, dtype=np.int32)
    patterns, ids = np.unique(cols, axis=0, return_inverse=True)
    return np.ascontiguousarray(patterns, dtype=np.int64), ids.reshape(-1).astype(np.int32)


def build_extended_label_set(lex: Lexicon, n: int) -> ExtendedLabelSet:
    grams = set()
    for w in lex.encoded():
        for i in range(len(w) - n + 1):
            grams.add(w[i : i + n])
    arr = np.array(sorted(grams), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return ExtendedLabelSet(lex.alphabet, n, arr)


@dataclass(frozen=True)
class AuxNode:
    members: Tuple[int, ...]


@dataclass
class CandidateGraph:
    nodes: List[DetectionWindow]
    image_width: float
    edges: List[Tuple[int, int]] = field(default_factory=list)
    aux_nodes: List[AuxNode] = field(default_factory=list)
    order: int = 2
    label_set: Optional[ExtendedLabelSet] = None

    @property
    def N(self) -> int:
        return len(self.nodes)

    def mean_width(self) -> float:
        return float(np.mean([w.width for w in self.nodes])) if self.nodes else 0.0

    def dump(self) -> str:
        """Plain-text adjacency listing, stable for golden-file comparisons."""
        lines = [f"nodes {self.N} order {self.order} width {self.image_width:g}"]
        for i, w in enumerate(self.nodes):
            nbrs = sorted({j for a, b in self.edges for j in (a, b) if i in (a, b) and j != i})
            lines.append(
                f"n{i} id={w.id} x=[{w.x0:g},{w.x1:g}] -> " + " ".join(f"n{j}" for j in nbrs)
            )
        size = self.label_set.size if self.label_set is not None else 0
        for a, aux in enumerate(self.aux_nodes):
            lines.append(f"a{a} labels={size} -> " + " ".join(f"n{j}" for j in aux.members))
        return "\n".join(lines) + "\n"


def order_nodes(ws: Sequence[DetectionWindow], image_width: Optional[float] = None) -> CandidateGraph:
    nodes = sorted(ws, key=lambda w: (w.center_x, w.id))
    if image_width is None:
        image_width = max((w.x1 for w in nodes), default=0.0)
    return CandidateGraph(nodes, float(image_width))


def horizontal_gap(a: DetectionWindow, b: DetectionWindow) -> float:
    """Distance between horizontal extents; negative when they overlap."""
    return max(b.x0 - a.x1, a.x0 - b.x1)


def connect_edges(g: CandidateGraph, proximity: float = DEFAULT_PROXIMITY) -> CandidateGraph:
    """Join every pair whose gap is at most ``proximity`` mean window widths."""
    limit = proximity * g.mean_width()
    edges = [
        (i, j)
        for i in range(g.N)
        for j in range(i + 1, g.N)
        if horizontal_gap(g.nodes[i], g.nodes[j]) <= limit
    ]
    return replace(g, edges=edges)


def estimate_T(ws: Sequence[DetectionWindow], image_width: float) -> int:
    """Estimated character count: image width over mean window width."""
    if not ws:
        raise ValueError("cannot estimate the character count without windows")
    mean_w = sum(w.width for w in ws) / len(ws)
    return max(1, int(math.floor(image_width / mean_w + 0.5)))


def insert_aux_nodes(g: CandidateGraph, n: int, label_set: ExtendedLabelSet) -> CandidateGraph:
    """One auxiliary node per run of ``n`` consecutive nodes."""
    if n < 3:
        raise ValueError("auxiliary nodes need n >= 3")
    if label_set.n != n:
        raise ValueError(f"label set holds {label_set.n}-grams, graph order is {n}")
    aux = [AuxNode(tuple(range(s, s + n))) for s in range(max(0, g.N - n + 1))]
    return replace(g, aux_nodes=aux, order=n, label_set=label_set)


def build_graph(
    ws: Sequence[DetectionWindow],
    image_width: float,
    order: int = 2,
    label_set: Optional[ExtendedLabelSet] = None,
    proximity: float = DEFAULT_PROXIMITY,
) -> CandidateGraph:
    """Order, connect and (for ``order >= 3``) augment in one step.

    Graphs with fewer than two nodes get neither edges nor auxiliary nodes.
    """
    g = order_nodes(ws, image_width)
    if g.N < 2:
        return g
    g = connect_edges(g, proximity)
    if order >= 3:
        if label_set is None:
            raise ValueError("higher-order graphs need an extended label set")
        g = insert_aux_nodes(g, order, label_set)
    return g
