import filecmp
from pathlib import Path

import pytest
from conftest import word_windows

from wordcrf.detection import write_detections
from wordcrf.evaluation import (
    ABLATION_ORDERS,
    CorpusEntry,
    EntryOutcome,
    ManifestError,
    ablation,
    ablation_configs,
    evaluate,
    parse_manifest,
    summarize,
    words_match,
    write_ablation_csv,
)
from wordcrf.recognizer import RecognitionConfig
from wordcrf.synth import builtin_words, distractor_lexicons, pseudo_words, sample_lexicon, synth_corpus


def test_words_match_case_rules():
    assert words_match("Open", "OPEN", case_fold=True)
    assert not words_match("Open", "OPEN", case_fold=False)


@pytest.fixture
def tiny_corpus(tmp_path, upper):
    (tmp_path / "lex.txt").write_text("OPEN\nSPOON\n")
    write_detections(tmp_path / "a.txt", upper, word_windows(upper, "OPEN"))
    (tmp_path / "m.txt").write_text("# comment\n\na.txt 48 OPEN lex.txt  # trailing\n")
    return tmp_path


def test_parse_manifest(tiny_corpus):
    (e,) = parse_manifest(tiny_corpus / "m.txt")
    assert e == CorpusEntry(str(tiny_corpus / "a.txt"), 48.0, "OPEN", str(tiny_corpus / "lex.txt"))


@pytest.mark.parametrize(
    "line, msg",
    [("a.txt 48", "expected 3 or 4"), ("a.txt wide OPEN", "malformed image width"), ("a.txt 0 OPEN", "positive")],
)
def test_parse_manifest_errors(tmp_path, line, msg):
    (tmp_path / "m.txt").write_text(line + "\n")
    with pytest.raises(ManifestError, match=msg):
        parse_manifest(tmp_path / "m.txt")


def test_single_entry_accuracy(tiny_corpus, unit_stats):
    from wordcrf.recognizer import Recognizer

    cfg = RecognitionConfig(vocab_mode="closed", order=3)
    rep = evaluate(parse_manifest(tiny_corpus / "m.txt"), cfg, recognizer=Recognizer(cfg, unit_stats))
    assert (rep.total, rep.correct, rep.accuracy, rep.failures) == (1, 1, 100.0, 0)
    assert rep.dictionary["total"] + rep.non_dictionary["total"] == rep.total


def test_missing_file_counts_as_failure(tiny_corpus):
    corpus = parse_manifest(tiny_corpus / "m.txt") + [CorpusEntry(str(tiny_corpus / "nope.txt"), 48, "OPEN", None)]
    rep = evaluate(corpus, RecognitionConfig(vocab_mode="closed", order=2))
    assert rep.failures == 1
    assert rep.entries[1].error is not None and not rep.entries[1].correct
    assert rep.total == 2


def test_summarize_arithmetic():
    outs = [
        EntryOutcome(1, "B", "B", "B", True, False, 2.0),
        EntryOutcome(0, "A", "X", "X", False, True, 4.0),
        EntryOutcome(2, "C", "C", "C", True, True, 6.0),
    ]
    rep = summarize(outs)
    assert [o.index for o in rep.entries] == [0, 1, 2]
    assert rep.accuracy == pytest.approx(100 * 2 / 3)
    assert rep.dictionary == {"total": 2, "correct": 1, "accuracy": 50.0}
    assert rep.non_dictionary["total"] == 1
    assert rep.timing_ms["mean"] == 4.0 and rep.timing_ms["max"] == 6.0


def test_ablation_configs():
    rows = ablation_configs(RecognitionConfig())
    assert [name for name, _ in rows] == ["unary", "pairwise"] + [f"order-{n}" for n in ABLATION_ORDERS]
    unary = rows[0][1]
    assert unary.order == 2 and unary.params.lambda_l == 0 and unary.params.lambda_o == 0
    assert len([r for r in rows if r[0].startswith("order-")]) == 5


@pytest.fixture(scope="module")
def small_synth(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    manifest = synth_corpus(sample_lexicon(10, 3), 12, 0.3, 3, out)
    return manifest


def test_ablation_is_deterministic(small_synth, tmp_path):
    corpus = parse_manifest(small_synth)
    cfg = RecognitionConfig(vocab_mode="open", large_lexicon_path=str(small_synth.parent / "lexicon.txt"))
    a = ablation(corpus, cfg)
    b = ablation(corpus, cfg)
    assert [(r.name, r.correct) for r in a] == [(r.name, r.correct) for r in b]
    write_ablation_csv(a, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "config,order,total,correct,accuracy,failures"
    assert len(lines) == 8


def test_parallel_matches_serial(small_synth):
    corpus = parse_manifest(small_synth)
    cfg = RecognitionConfig(vocab_mode="closed", order=3)
    serial = evaluate(corpus, cfg, workers=1)
    parallel = evaluate(corpus, cfg, workers=2)
    assert [o.word for o in serial.entries] == [o.word for o in parallel.entries]
    assert serial.correct == parallel.correct


# -- synthetic corpus --------------------------------------------------------------


def test_synth_is_byte_identical(tmp_path):
    words = sample_lexicon(8, 1)
    a = synth_corpus(words, 10, 0.3, 7, tmp_path / "a", distractor_sizes=(20,))
    b = synth_corpus(words, 10, 0.3, 7, tmp_path / "b", distractor_sizes=(20,))
    files = sorted(p.relative_to(a.parent) for p in a.parent.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(b.parent) for p in b.parent.rglob("*") if p.is_file())
    match, mismatch, errors = filecmp.cmpfiles(a.parent, b.parent, [str(f) for f in files], shallow=False)
    assert not mismatch and not errors


def _unary_accuracy(manifest: Path) -> float:
    cfg = RecognitionConfig(vocab_mode="open", large_lexicon_path=str(manifest.parent / "lexicon.txt"))
    unary = dict(ablation_configs(cfg))["unary"]
    return evaluate(parse_manifest(manifest), unary).accuracy


def test_clean_corpus_unary_perfect(tmp_path):
    m = synth_corpus(sample_lexicon(20, 2), 40, 0.0, 2, tmp_path, fp_rate=0.0, noise=0.0)
    assert _unary_accuracy(m) == 100.0


def test_fully_corrupted_corpus_unary_near_zero(tmp_path):
    m = synth_corpus(sample_lexicon(20, 2), 40, 1.0, 2, tmp_path, fp_rate=0.0, noise=0.0)
    assert _unary_accuracy(m) <= 5.0


def test_synth_validation(tmp_path):
    with pytest.raises(ValueError):
        synth_corpus(["A"], 1, 1.5, 0, tmp_path)
    with pytest.raises(ValueError):
        synth_corpus([], 1, 0.0, 0, tmp_path)
    with pytest.raises(ValueError):
        sample_lexicon(10**6)


def test_distractors_nested_and_distinct():
    base = sample_lexicon(5, 0)
    lex = distractor_lexicons(base, (5, 50, 200), seed=0)
    assert lex[5] == base
    assert lex[50][:5] == base and lex[200][:50] == lex[50]
    assert len(set(lex[200])) == 200
    extra = pseudo_words(30, 1, builtin_words(), exclude=base)
    assert not set(extra) & set(base)
