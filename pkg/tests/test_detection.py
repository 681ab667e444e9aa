import math

import numpy as np
import pytest
from conftest import one_hot, window
from hypothesis import given, settings
from hypothesis import strategies as st

from wordcrf.alphabet import Alphabet
from wordcrf.classifier import TemplateClassifier
from wordcrf.detection import (
    AspectStats,
    DetectionFormatError,
    DetectionWindow,
    goodness_score,
    ingest_detections,
    iou,
    load_aspect_stats,
    nms_character_specific,
    prune_by_goodness,
    read_detections,
    sliding_window_detect,
    write_detections,
)
from wordcrf.synth import sample_lexicon, synth_word


def test_window_validation():
    with pytest.raises(ValueError, match="positive"):
        DetectionWindow(0, 1, 1, 0, 1, [0.5])
    with pytest.raises(ValueError, match=r"out of \[0,1\]"):
        DetectionWindow(0, 1, 1, 1, 1, [1.2])
    w = DetectionWindow(0, 1, 1, 3, 7, [0.5])
    assert abs(w.aspect - 3 / 7) <= 1e-12


def test_iou_basic():
    a = window(0, 5, [1.0], w=10, h=10, cy=5)
    b = window(1, 10, [1.0], w=10, h=10, cy=5)
    assert iou(a, a) == 1.0
    assert iou(a, b) == pytest.approx(50 / 150)
    far = window(2, 100, [1.0])
    assert iou(a, far) == 0.0


# -- goodness score -----------------------------------------------------------


def test_gs_exact_aspect(unit_stats, upper):
    w = window(0, 5, one_hot(upper, "A", 1.0), w=10, h=10)
    assert goodness_score(w, unit_stats) == 1.0


def test_gs_one_sigma(unit_stats, upper):
    w = window(0, 5, one_hot(upper, "A", 0.8), w=12.5, h=10)
    assert goodness_score(w, unit_stats) == pytest.approx(0.8 * math.exp(-0.5), abs=1e-12)
    assert round(goodness_score(w, unit_stats), 4) == 0.4852


def test_gs_zero_confidence(unit_stats, upper):
    w = window(0, 5, np.zeros(upper.k), w=30, h=10)
    assert goodness_score(w, unit_stats) == 0.0


def _gs_reference(w, mu, sigma):
    j = int(np.argmax(w.scores))
    return w.scores[j] * math.exp(-((mu[j] - w.width / w.height) ** 2) / (2 * sigma[j] ** 2))


@settings(max_examples=100, deadline=None)
@given(
    s=st.lists(st.floats(0, 1), min_size=36, max_size=36),
    w=st.floats(1, 50),
    h=st.floats(1, 50),
)
def test_gs_matches_reference(font_stats, s, w, h):
    win = window(0, 5, s, w=w, h=h)
    ref = _gs_reference(win, font_stats.mu, font_stats.sigma)
    assert abs(goodness_score(win, font_stats) - ref) <= 1e-12


def test_prune_threshold_boundary(upper):
    stats = AspectStats.from_mapping(upper, {c: (1.0, 0.25) for c in upper.labels})
    low = window(0, 5, one_hot(upper, "A", 0.09))
    edge = window(1, 20, one_hot(upper, "A", 0.10))
    assert [w.id for w in prune_by_goodness([low, edge], stats)] == [1]
    assert prune_by_goodness([], stats) == []


@settings(max_examples=50, deadline=None)
@given(t1=st.floats(0, 1), t2=st.floats(0, 1), seed=st.integers(0, 1000))
def test_prune_monotone_in_threshold(font_stats, upper, t1, t2, seed):
    rng = np.random.default_rng(seed)
    ws = [window(i, 10 * i, rng.random(upper.k), w=rng.uniform(2, 20)) for i in range(12)]
    lo, hi = sorted((t1, t2))
    assert {w.id for w in prune_by_goodness(ws, font_stats, hi)} <= {
        w.id for w in prune_by_goodness(ws, font_stats, lo)
    }


def test_prune_reduces_false_positives_keeps_recall(font_stats, upper):
    classifier = TemplateClassifier(upper)
    rng = np.random.default_rng(0)
    true_before = fp_before = true_after = fp_after = 0
    for word in sample_lexicon(40, 0):
        sw = synth_word(word, rng, classifier, 0.0, fp_rate=0.5)
        kept = {w.id for w in prune_by_goodness(sw.windows, font_stats)}
        true_before += sw.n_true
        fp_before += len(sw.windows) - sw.n_true
        true_after += sum(1 for i in kept if i < sw.n_true)
        fp_after += sum(1 for i in kept if i >= sw.n_true)
    assert fp_after < fp_before
    assert true_after / true_before >= 0.95


# -- NMS ----------------------------------------------------------------------


def test_nms_same_class_identical(upper):
    a = window(0, 5, one_hot(upper, "A", 0.9))
    b = window(1, 5, one_hot(upper, "A", 0.8))
    assert [w.id for w in nms_character_specific([b, a])] == [0]


def test_nms_different_classes_kept(upper):
    a = window(0, 5, one_hot(upper, "A", 0.9))
    b = window(1, 5, one_hot(upper, "B", 0.8))
    assert [w.id for w in nms_character_specific([a, b])] == [0, 1]


def test_nms_iou_035_kept(upper):
    # 10x10 boxes shifted by d overlap (10-d)*10; IoU 0.35 at d = 10*(1-0.7/1.35)
    d = 10 * (1 - 0.7 / 1.35)
    a = window(0, 5, one_hot(upper, "A", 0.9))
    b = window(1, 5 + d, one_hot(upper, "A", 0.8))
    assert iou(a, b) == pytest.approx(0.35)
    assert len(nms_character_specific([a, b])) == 2


def test_nms_tie_keeps_lower_id(upper):
    a = window(4, 5, one_hot(upper, "A", 0.9))
    b = window(2, 5, one_hot(upper, "A", 0.9))
    assert [w.id for w in nms_character_specific([a, b])] == [2]


def test_nms_rejects_bad_threshold():
    with pytest.raises(ValueError):
        nms_character_specific([], 1.0)


def _windows(draw_ids, xs, labels, scores, alphabet):
    return [window(i, x, one_hot(alphabet, lab, s)) for i, x, lab, s in zip(draw_ids, xs, labels, scores)]


window_lists = st.integers(0, 10).flatmap(
    lambda n: st.tuples(
        st.permutations(list(range(n))),
        st.lists(st.floats(0, 40), min_size=n, max_size=n),
        st.lists(st.sampled_from("AB"), min_size=n, max_size=n),
        st.lists(st.sampled_from([0.5, 0.7, 0.9]), min_size=n, max_size=n),
    )
)


@settings(max_examples=100, deadline=None)
@given(data=window_lists, perm_seed=st.integers(0, 100))
def test_nms_idempotent_and_order_free(data, perm_seed):
    alphabet = Alphabet.case_insensitive()
    ws = _windows(*data, alphabet)
    once = nms_character_specific(ws)
    assert [w.id for w in nms_character_specific(once)] == [w.id for w in once]
    shuffled = list(ws)
    np.random.default_rng(perm_seed).shuffle(shuffled)
    assert [w.id for w in nms_character_specific(shuffled)] == [w.id for w in once]


# -- sliding windows ------------------------------------------------------------


def _const(k):
    return lambda patch: np.full(k, 0.5)


def test_sliding_single_placement():
    ws = sliding_window_detect(np.zeros((48, 48)), _const(3), [(48, 48)], 48)
    assert [(w.center_x, w.center_y) for w in ws] == [(24, 24)]


def test_sliding_three_placements():
    ws = sliding_window_detect(np.zeros((48, 96)), _const(3), [(48, 48)], 24)
    assert [w.center_x for w in ws] == [24, 48, 72]


def test_sliding_aspect_excluded():
    ws = sliding_window_detect(np.zeros((48, 200)), _const(3), [(144, 48), (48, 48)], 48)
    assert all(w.width == 48 for w in ws)
    assert sliding_window_detect(np.zeros((48, 200)), _const(3), [(144, 48)], 48) == []


def test_sliding_bad_provider_length():
    with pytest.raises(ValueError, match="expected 4"):
        sliding_window_detect(np.zeros((8, 8)), _const(3), [(8, 8)], 8, k=4)


# -- detections file --------------------------------------------------------------


def test_detections_roundtrip(tmp_path, upper):
    ws = [window(i, 10 * i + 5, one_hot(upper, "ABC"[i], 0.9, 0.01)) for i in range(3)]
    p = tmp_path / "d.txt"
    write_detections(p, upper, ws)
    back = ingest_detections(p, upper)
    assert len(back) == 3
    assert np.allclose(back[1].scores, ws[1].scores)


def test_detections_wrong_score_count(tmp_path, full):
    p = tmp_path / "d.txt"
    header = f"k=62 classes={','.join(full.labels)}\n"
    p.write_text(header + "0 5 5 10 10 " + " ".join(["0.1"] * 61) + "\n")
    with pytest.raises(DetectionFormatError, match=r"d\.txt:2: expected 62 scores, found 61"):
        ingest_detections(p, full)


def test_detections_score_out_of_range(tmp_path, upper):
    p = tmp_path / "d.txt"
    scores = ["0.1"] * 36
    scores[3] = "1.2"
    p.write_text(f"k=36 classes={','.join(upper.labels)}\n0 5 5 10 10 {' '.join(scores)}\n")
    with pytest.raises(DetectionFormatError, match=r"score out of \[0,1\]"):
        read_detections(p)


def test_detections_62_classes_feed_folded_run(tmp_path, full, upper):
    p = tmp_path / "d.txt"
    s = np.zeros(62)
    s[full.index("a")] = 0.7
    s[full.index("A")] = 0.4
    write_detections(p, full, [window(0, 5, s)])
    (w,) = ingest_detections(p, upper)
    assert w.scores[upper.index("A")] == pytest.approx(0.7)


def test_detections_size_mismatch(tmp_path, upper, full):
    p = tmp_path / "d.txt"
    write_detections(p, upper, [window(0, 5, np.zeros(36))])
    with pytest.raises(DetectionFormatError, match="36 scores per window on a 62-class run"):
        ingest_detections(p, full)


def test_aspect_stats_roundtrip(tmp_path, font_stats, upper):
    p = tmp_path / "stats.txt"
    font_stats.save(p)
    back = load_aspect_stats(p, upper)
    assert np.array_equal(back.mu, font_stats.mu)
    assert np.array_equal(back.sigma, font_stats.sigma)


def test_aspect_stats_rejects_bad_sigma(tmp_path, upper):
    p = tmp_path / "stats.txt"
    p.write_text("A 1.0 0\n")
    with pytest.raises(DetectionFormatError, match=":1:"):
        load_aspect_stats(p, upper)
