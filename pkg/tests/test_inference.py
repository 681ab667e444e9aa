import itertools

import numpy as np
import pytest
from conftest import word_windows
from instances import random_chain, random_loopy

from wordcrf import _kernels
from wordcrf.energy import EnergyModel, PotentialParams, total_energy
from wordcrf.graph import NGramIndex, build_extended_label_set, build_graph
from wordcrf.inference import (
    AgreementEdge,
    DenseEdge,
    DomainOverflowError,
    FactorGraphView,
    InstanceTooLargeError,
    _pack_structured,
    brute_force_minimize,
    build_factor_view,
    trws_minimize,
)
from wordcrf.lm import Lexicon, build_ngram_model, build_roi_table


def _open_em(upper, stats, word="OPEN", order=3, words=("OPEN", "OPERA", "PENCIL")):
    lex = Lexicon.from_words(words, alphabet=upper)
    ls = build_extended_label_set(lex, order) if order >= 3 else None
    g = build_graph(word_windows(upper, word), 12 * len(word), order, ls)
    return EnergyModel(g, build_ngram_model(lex, max(order, 2)), build_roi_table(lex, len(word)), PotentialParams(), stats)


def test_open_view_shape(upper, font_stats):
    view = build_factor_view(_open_em(upper, font_stats))
    assert len(view) == 6
    dense = [e for e in view.edges if isinstance(e, DenseEdge)]
    agree = [e for e in view.edges if isinstance(e, AgreementEdge)]
    assert [(e.a, e.b) for e in dense] == [(0, 1), (1, 2), (2, 3)]
    assert len(agree) == 6
    assert view.order == [0, 1, 2, 4, 3, 5]
    assert len(view.blocks) == 2


def test_pairwise_view_is_plain_crf(upper, font_stats):
    em = _open_em(upper, font_stats, order=2)
    view = build_factor_view(em)
    assert len(view) == 4
    assert all(isinstance(e, DenseEdge) for e in view.edges)
    for e, (i, j) in zip(view.edges, em.graph.edges):
        assert np.array_equal(e.table, em.edge_table(i, j))


def test_single_node_view(upper, font_stats):
    em = _open_em(upper, font_stats, word="A")
    view = build_factor_view(em)
    assert len(view) == 1 and view.edges == []
    res = trws_minimize(view)
    assert res.labels == [int(np.argmin(view.unaries[0]))]
    assert res.lower_bound == res.energy


def test_domain_cap(upper, font_stats):
    with pytest.raises(DomainOverflowError):
        build_factor_view(_open_em(upper, font_stats), domain_cap=3)


def test_brute_force_single_variable():
    res = brute_force_minimize(FactorGraphView([np.array([0.3, 0.1])], []))
    assert res.labels == [1]
    assert res.energy == 0.1


def test_brute_force_two_variables_by_hand():
    # (0,0)=0.5  (0,1)=2  (1,0)=3.5  (1,1)=1
    view = FactorGraphView(
        [np.array([0.0, 1.0]), np.array([0.5, 0.0])], [DenseEdge(0, 1, [[0.0, 2.0], [2.0, 0.0]])]
    )
    res = brute_force_minimize(view)
    assert res.labels == [0, 0] and res.energy == 0.5
    assert trws_minimize(view).energy == 0.5


def test_brute_force_limit():
    view = FactorGraphView(
        [np.zeros(10)] * 4, [DenseEdge(i, j, np.zeros((10, 10))) for i, j in itertools.combinations(range(4), 2)]
    )
    with pytest.raises(InstanceTooLargeError):
        brute_force_minimize(view, limit=100)


def test_view_validation():
    with pytest.raises(ValueError, match="self-loop"):
        FactorGraphView([np.zeros(2)], [DenseEdge(0, 0, np.zeros((2, 2)))])
    with pytest.raises(ValueError, match="shape"):
        FactorGraphView([np.zeros(2), np.zeros(3)], [DenseEdge(0, 1, np.zeros((2, 2)))])
    with pytest.raises(ValueError, match="permutation"):
        FactorGraphView([np.zeros(2)], [], order=[1])


def test_non_finite_rejected():
    view = FactorGraphView([np.array([0.0, np.inf])], [])
    with pytest.raises(ValueError, match="non-finite"):
        trws_minimize(view)


def test_max_iters_must_be_positive():
    with pytest.raises(ValueError):
        trws_minimize(FactorGraphView([np.zeros(1)], []), max_iters=0)


def test_empty_view():
    res = trws_minimize(FactorGraphView([], []))
    assert res.labels == [] and res.energy == 0.0


def test_chains_exact():
    rng = np.random.default_rng(11)
    for _ in range(60):
        view = random_chain(rng)
        res, ref = trws_minimize(view), brute_force_minimize(view)
        assert abs(res.energy - ref.energy) <= 1e-9


def test_loopy_sound_monotone_and_consistent():
    rng = np.random.default_rng(12)
    for _ in range(60):
        view = random_loopy(rng, n=int(rng.integers(2, 4)))
        assert _pack_structured(view) is not None
        res = trws_minimize(view)
        ref = brute_force_minimize(view)
        assert res.lower_bound <= ref.energy + 1e-9
        assert ref.energy <= res.energy + 1e-9
        assert abs(view.energy(res.labels) - res.energy) <= 1e-9
        assert all(b >= a - 1e-10 for a, b in zip(res.bound_trace, res.bound_trace[1:]))


def test_compiled_matches_generic():
    rng = np.random.default_rng(13)
    for _ in range(60):
        view = random_loopy(rng, n=int(rng.integers(2, 5)), max_chars=7)
        fast, slow = trws_minimize(view), trws_minimize(view, compiled=False)
        assert fast.labels == slow.labels
        assert fast.iterations == slow.iterations
        assert np.allclose(fast.bound_trace, slow.bound_trace, rtol=0, atol=1e-9)


def test_generic_path_without_blocks():
    rng = np.random.default_rng(14)
    view = random_loopy(rng, max_chars=5)
    view.blocks = []
    assert _pack_structured(view) is None
    res, ref = trws_minimize(view), brute_force_minimize(view)
    assert res.lower_bound <= ref.energy + 1e-9 <= res.energy + 2e-9


def test_deterministic():
    view = random_loopy(np.random.default_rng(15), max_chars=5)
    a, b = trws_minimize(view), trws_minimize(view)
    assert a.labels == b.labels and a.bound_trace == b.bound_trace


def test_view_energy_equals_model_energy(upper, font_stats):
    em = _open_em(upper, font_stats, word="OPERA", order=4)
    view = build_factor_view(em)
    rng = np.random.default_rng(16)
    for _ in range(50):
        labels = [int(rng.integers(s)) for s in view.domain_sizes]
        lab = view.to_labeling(labels)
        ref = total_energy(em.graph, lab, em.model, em.roi, em.params, font_stats)
        assert abs(view.energy(labels) - ref) <= 1e-12
    res = trws_minimize(view)
    ref = total_energy(em.graph, res.labeling, em.model, em.roi, em.params, font_stats)
    assert abs(res.energy - ref) <= 1e-9


def test_letter_mins_matches_naive():
    rng = np.random.default_rng(17)
    for n in (2, 3, 4, 5):
        K = 6
        codes = rng.integers(0, K, size=(40, n))
        ix = NGramIndex(codes)
        u = rng.random(41)
        F = rng.random((n, K))
        out = np.empty((n, K))
        _kernels.letter_mins(
            u, ix.h, ix.head_ids, ix.tail_ids, ix.head_patterns, ix.tail_patterns, F, out
        )
        row = u[:40] + F[np.arange(n), codes].sum(axis=1)
        for q in range(n):
            for c in range(K):
                hit = codes[:, q] == c
                ref = row[hit].min() if hit.any() else np.inf
                assert out[q, c] == pytest.approx(ref, abs=1e-12) or (np.isinf(ref) and np.isinf(out[q, c]))


def test_agreement_argmin_prefers_lowest_index():
    codes = np.array([[0, 1], [0, 1], [2, 2]])
    u = np.array([0.5, 0.5, 0.1, 0.5])
    arg, best = _kernels.agreement_argmin(u, codes, np.array([0, 1]), 3, 1.0)
    assert (arg, best) == (0, 0.5)
    # with every member epsilon nothing disagrees; the cheapest row wins
    arg, best = _kernels.agreement_argmin(u, codes, np.array([3, 3]), 3, 1.0)
    assert (arg, best) == (2, 0.1)
