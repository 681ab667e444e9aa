"""Random factor graphs for solver tests."""

import numpy as np

from wordcrf.graph import NGramIndex
from wordcrf.inference import AgreementEdge, AuxBlock, DenseEdge, FactorGraphView


def random_chain(rng: np.random.Generator, max_nodes: int = 6, max_labels: int = 6) -> FactorGraphView:
    """A path with per-node domain sizes and arbitrary finite potentials."""
    n = int(rng.integers(1, max_nodes + 1))
    sizes = rng.integers(1, max_labels + 1, size=n)
    unaries = [rng.normal(0, 1, size=s) for s in sizes]
    edges = [DenseEdge(i, i + 1, rng.normal(0, 1.5, size=(sizes[i], sizes[i + 1]))) for i in range(n - 1)]
    # occasionally visit the path in a scrambled order
    order = list(rng.permutation(n)) if rng.random() < 0.3 else None
    return FactorGraphView(unaries, edges, order)


def random_loopy(
    rng: np.random.Generator,
    n: int = 3,
    max_chars: int = 5,
    max_labels: int = 5,
    max_ngrams: int = 30,
    penalty: float = 1.0,
) -> FactorGraphView:
    """Character chain with skip edges plus aux nodes over every run of ``n`` characters.

    The last character label plays epsilon. Aux domains are a random n-gram
    table plus the invalid label; all aux nodes share unary and codes, as in
    views built from an energy model.
    """
    N = int(rng.integers(n, max_chars + 1))
    k = int(rng.integers(2, max_labels + 1))
    eps = k - 1
    unaries = [rng.random(k) for _ in range(N)]
    edges = [DenseEdge(i, i + 1, rng.random((k, k)) * 2) for i in range(N - 1)]
    for i in range(N - 2):
        if rng.random() < 0.5:
            edges.append(DenseEdge(i, i + 2, rng.random((k, k)) * 2))
    M = int(rng.integers(0, max_ngrams + 1))
    codes = rng.integers(0, max(k - 1, 1), size=(M, n))
    index = NGramIndex(codes)
    U = np.append(rng.random(M) * 3, rng.random() * 3)
    blocks = []
    for a in range(N - n + 1):
        unaries.append(U)
        first = len(edges)
        for q in range(n):
            edges.append(AgreementEdge(a + q, N + a, np.append(codes[:, q], -1), k, eps, penalty))
        blocks.append(AuxBlock(N + a, tuple(range(first, len(edges))), index))
    order = []
    for i in range(N):
        order.append(i)
        if i >= n - 1:
            order.append(N + i - n + 1)
    return FactorGraphView(unaries, edges, order, n_char=N, blocks=blocks)
