"""Synthetic desk-scale corpus: rendered words, template scores, injected confusions."""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .alphabet import Alphabet
from .classifier import TemplateClassifier
from .detection import DetectionWindow, write_detections
from .render import X_JITTER, render_word

DEFAULT_FP_RATE = 0.3
DEFAULT_NOISE = 0.02
FP_WIDTH_RANGE = (0.5, 1.6)


def builtin_words() -> List[str]:
    """The packaged English word list (uppercase, one word per line)."""
    text = resources.files("wordcrf").joinpath("data/words.txt").read_text(encoding="ascii")
    return [w for w in text.split() if w]


def sample_lexicon(size: int, seed: int = 0, pool: Optional[Sequence[str]] = None) -> List[str]:
    pool = list(pool if pool is not None else builtin_words())
    if size > len(pool):
        raise ValueError(f"cannot draw {size} distinct words from a pool of {len(pool)}")
    rng = np.random.default_rng(seed)
    return [pool[i] for i in rng.choice(len(pool), size=size, replace=False)]


def pseudo_words(
    count: int, seed: int, train: Sequence[str], exclude: Sequence[str] = (), order: int = 3
) -> List[str]:
    """Pronounceable distractors from a letter Markov chain fitted on ``train``."""
    rng = np.random.default_rng(seed)
    trans: Dict[str, Dict[str, int]] = {}
    for w in train:
        padded = "^" * (order - 1) + w + "$"
        for i in range(order - 1, len(padded)):
            ctx = padded[i - order + 1 : i]
            trans.setdefault(ctx, {}).setdefault(padded[i], 0)
            trans[ctx][padded[i]] += 1
    table = {
        ctx: (list(nxt), np.array(list(nxt.values()), dtype=float) / sum(nxt.values()))
        for ctx, nxt in sorted(trans.items())
    }
    seen = set(exclude)
    out: List[str] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * count + 1000:
            raise RuntimeError("letter model cannot produce enough distinct pseudo-words")
        ctx = "^" * (order - 1)
        word = ""
        while len(word) < 12:
            chars, probs = table[ctx]
            ch = chars[int(rng.choice(len(chars), p=probs))]
            if ch == "$":
                break
            word += ch
            ctx = (ctx + ch)[-(order - 1) :]
        if len(word) >= 3 and word not in seen:
            seen.add(word)
            out.append(word)
    return out


def distractor_lexicons(
    base: Sequence[str], sizes: Sequence[int], seed: int = 0
) -> Dict[int, List[str]]:
    """Nested lexicons: ``base`` first, padded with pseudo-words to each size."""
    base = list(base)
    if not sizes:
        return {}
    top = max(sizes)
    extra = pseudo_words(max(0, top - len(base)), seed, builtin_words(), exclude=base)
    return {s: base + extra[: max(0, s - len(base))] for s in sizes}


@dataclass
class SynthWord:
    word: str
    image_width: int
    windows: List[DetectionWindow]
    n_true: int


def synth_word(
    word: str,
    rng: np.random.Generator,
    classifier: TemplateClassifier,
    corruption_rate: float,
    fp_rate: float = DEFAULT_FP_RATE,
    noise: float = DEFAULT_NOISE,
) -> SynthWord:
    """Render ``word`` and emit true windows plus inter-character false positives."""
    k = classifier.alphabet.k
    scales = rng.uniform(X_JITTER[0], X_JITTER[1], size=len(word))
    rendered = render_word(word, scales, noise, rng)
    image = rendered.image
    boxes = rendered.boxes
    placed: List[Tuple[float, float, float, float]] = []
    for x, y, w, h in boxes:
        placed.append((x + w / 2, y + h / 2, float(w), float(h)))
    mean_w = float(np.mean([b[2] for b in boxes]))
    for (xa, ya, wa, ha), (xb, yb, wb, hb) in zip(boxes, boxes[1:]):
        if rng.random() >= fp_rate:
            continue
        gap_mid = (xa + wa + xb) / 2
        w = mean_w * rng.uniform(*FP_WIDTH_RANGE)
        cx = gap_mid + rng.uniform(-0.25, 0.25) * mean_w
        top = min(ya, yb)
        h = float(max(ya + ha, yb + hb) - top)
        placed.append((cx, top + h / 2, w, h))
    windows = []
    H, W = image.shape
    for wid, (cx, cy, w, h) in enumerate(placed):
        x0 = int(max(0, round(cx - w / 2)))
        x1 = int(min(W, max(x0 + 1, round(cx + w / 2))))
        y0 = int(max(0, round(cy - h / 2)))
        y1 = int(min(H, max(y0 + 1, round(cy + h / 2))))
        scores = np.clip(classifier(image[y0:y1, x0:x1]), 0.0, 1.0)
        if rng.random() < corruption_rate:
            top_c = int(np.argmax(scores))
            other = int(rng.integers(k - 1))
            other += other >= top_c
            scores[[top_c, other]] = scores[[other, top_c]]
        windows.append(DetectionWindow(wid, cx, cy, w, h, np.round(scores, 6)))
    return SynthWord(word, W, windows, len(boxes))


def synth_corpus(
    lexicon: Sequence[str],
    n_words: int,
    corruption_rate: float,
    seed: int,
    out: "os.PathLike[str] | str",
    fp_rate: float = DEFAULT_FP_RATE,
    noise: float = DEFAULT_NOISE,
    distractor_sizes: Sequence[int] = (),
) -> Path:
    """Write a corpus (manifest, lexicon, detection files) under ``out``.

    Words are drawn with replacement from ``lexicon``. Returns the manifest path.
    """
    if not 0.0 <= corruption_rate <= 1.0:
        raise ValueError("corruption_rate must be in [0, 1]")
    if not 0.0 <= fp_rate <= 1.0:
        raise ValueError("fp_rate must be in [0, 1]")
    words = [w.upper() for w in lexicon]
    if not words:
        raise ValueError("empty lexicon")
    alphabet = Alphabet.case_insensitive()
    classifier = TemplateClassifier(alphabet)
    rng = np.random.default_rng(seed)
    root = Path(out)
    (root / "det").mkdir(parents=True, exist_ok=True)
    lex_path = root / "lexicon.txt"
    lex_path.write_text("\n".join(words) + "\n", encoding="ascii")
    picks = rng.integers(len(words), size=n_words)
    lines = ["# detections image_width ground_truth lexicon"]
    for i, p in enumerate(picks):
        sw = synth_word(words[p], rng, classifier, corruption_rate, fp_rate, noise)
        det = Path("det") / f"{i:04d}.txt"
        write_detections(root / det, alphabet, sw.windows)
        lines.append(f"{det.as_posix()} {sw.image_width} {sw.word} lexicon.txt")
    manifest = root / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="ascii")
    for size, lex in distractor_lexicons(words, distractor_sizes, seed).items():
        (root / f"lexicon_{size}.txt").write_text("\n".join(lex) + "\n", encoding="ascii")
    return manifest
