"""Lexicons, n-gram priors with Katz-style backoff, and position-aware pair tables.

Scores follow a successor-conditioned convention: the score of a tuple
``(l_1, ..., l_m)`` is the probability of its *first* label given the rest,

    P(l_1, ..., l_m) = C(l_1 ... l_m) / C(l_2 ... l_m)        if observed

so for a fixed context ``c = (l_2, ..., l_m)`` the family ``{P(w + c)}`` over
the first slot ``w`` is a distribution. Mass not covered by observed
continuations (occurrences of ``c`` at the start of a word) is handed to the
unseen ``w`` in proportion to the shorter-context score ``P(w + c[:-1])``.
"""

from __future__ import annotations

import enum
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .alphabet import EPSILON, Alphabet

MODEL_MAGIC = "WORDCRF-NGRAM"
MODEL_VERSION = 1
MIN_ORDER = 2
MAX_ORDER = 6
DEFAULT_DIGIT_CONSTANT = 0.4
DEFAULT_FLOOR = 1e-6


class LexiconError(ValueError):
    """Raised for malformed lexicon files."""


class LexiconKind(str, enum.Enum):
    IMAGE_SPECIFIC = "image_specific"
    LARGE = "large"


@dataclass
class Lexicon:
    words: List[str]
    alphabet: Alphabet
    kind: LexiconKind = LexiconKind.IMAGE_SPECIFIC

    def __post_init__(self) -> None:
        for w in self.words:
            if not w:
                raise LexiconError("empty word in lexicon")
            for c in w:
                if c not in self.alphabet:
                    raise LexiconError(f"word {w!r} contains {c!r}, not in the alphabet")
        self._set = frozenset(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._set

    def __iter__(self):
        return iter(self.words)

    def encoded(self) -> List[Tuple[int, ...]]:
        return [self.alphabet.encode(w) for w in self.words]

    @classmethod
    def from_words(
        cls,
        words: Iterable[str],
        case_fold: bool = True,
        kind: LexiconKind = LexiconKind.IMAGE_SPECIFIC,
        alphabet: Optional[Alphabet] = None,
    ) -> "Lexicon":
        alphabet = alphabet or Alphabet.for_case(case_fold)
        seen = set()
        out = []
        for w in words:
            w = w.upper() if case_fold else w
            if w and w not in seen:
                seen.add(w)
                out.append(w)
        return cls(out, alphabet, kind)


def load_lexicon(
    path: "os.PathLike[str] | str",
    case_fold: bool = True,
    kind: LexiconKind = LexiconKind.IMAGE_SPECIFIC,
    alphabet: Optional[Alphabet] = None,
) -> Lexicon:
    """Read a one-word-per-line lexicon.

    Words are upper-cased when ``case_fold`` is set, duplicates are dropped
    (first occurrence wins) and blank lines are ignored. Any symbol outside
    the alphabet raises :class:`LexiconError` naming the offending line.
    """
    alphabet = alphabet or Alphabet.for_case(case_fold)
    words: List[str] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            w = raw.strip()
            if not w:
                continue
            if case_fold:
                w = w.upper()
            bad = [c for c in w if c not in alphabet]
            if bad:
                raise LexiconError(
                    f"{path}:{lineno}: word {w!r} contains out-of-alphabet symbol {bad[0]!r}"
                )
            if w not in seen:
                seen.add(w)
                words.append(w)
    return Lexicon(words, alphabet, LexiconKind(kind))


class NGramModel:
    """Counts and smoothed scores over tuples of length 1..``order``.

    Parameters
    ----------
    alphabet : Alphabet
        Label set the tuples range over.
    order : int
        Longest tuple length that can be scored.
    counts : dict
        Occurrence count of every observed contiguous label tuple (as index
        tuples) of length 1..``order``.
    digit_constant : float
        Score given to tuples (length >= 2) made only of digits.
    floor : float
        Lower clamp on :meth:`score` for tuples the backoff chain cannot reach.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        order: int,
        counts: Dict[Tuple[int, ...], int],
        digit_constant: float = DEFAULT_DIGIT_CONSTANT,
        floor: float = DEFAULT_FLOOR,
    ):
        if not MIN_ORDER <= order <= MAX_ORDER:
            raise ValueError(f"order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
        self.alphabet = alphabet
        self.order = order
        self.digit_constant = float(digit_constant)
        self.floor = float(floor)
        self.discount = 0.0
        self.counts = dict(counts)
        k = alphabet.k
        self._digit = np.array([alphabet.is_digit(i) for i in range(k)], dtype=bool)
        # context -> predecessor count vector, for every observed context of length < order
        preds: Dict[Tuple[int, ...], np.ndarray] = {}
        for tup, c in self.counts.items():
            if len(tup) < 2:
                continue
            ctx = tup[1:]
            vec = preds.get(ctx)
            if vec is None:
                vec = preds[ctx] = np.zeros(k, dtype=np.int64)
            vec[tup[0]] = c
        self._preds = preds
        self._total = sum(c for t, c in self.counts.items() if len(t) == 1)
        self._cond: Dict[Tuple[int, ...], np.ndarray] = {}
        self._alpha: Dict[Tuple[int, ...], float] = {}

    def count(self, tup: Sequence[int]) -> int:
        if len(tup) == 0:
            return self._total
        return self.counts.get(tuple(tup), 0)

    def contexts(self, length: int) -> List[Tuple[int, ...]]:
        """Observed context tuples of the given length, sorted."""
        return sorted(t for t in self.counts if len(t) == length)

    def ngrams(self, n: int) -> List[Tuple[int, ...]]:
        """Distinct observed n-grams, sorted by label index."""
        if n > self.order:
            raise ValueError(f"model of order {self.order} holds no {n}-grams")
        return sorted(t for t in self.counts if len(t) == n)

    def conditional(self, context: Sequence[int]) -> np.ndarray:
        """Distribution over the first slot for ``context`` (count/backoff path).

        Excludes the digit override and the floor; entries sum to one.
        """
        context = tuple(context)
        cached = self._cond.get(context)
        if cached is not None:
            return cached
        k = self.alphabet.k
        if not context:
            if self._total == 0:
                dist = np.full(k, 1.0 / k)
            else:
                uni = np.zeros(k)
                for t, c in self.counts.items():
                    if len(t) == 1:
                        uni[t[0]] = c
                dist = uni / self._total
            alpha = 1.0
        else:
            lower = self.conditional(context[:-1])
            c_ctx = self.count(context)
            pred = self._preds.get(context)
            if c_ctx == 0 or pred is None:
                dist, alpha = lower, 1.0
            else:
                observed = pred / c_ctx
                reserved = max(0.0, 1.0 - float(observed.sum()))
                unseen = pred == 0
                mass = float(lower[unseen].sum())
                if reserved == 0.0 or not unseen.any():
                    alpha, spread = 0.0, np.zeros(k)
                elif mass > 0.0:
                    alpha = reserved / mass
                    spread = np.where(unseen, lower * alpha, 0.0)
                else:
                    # unseen continuations all have zero lower-order mass
                    alpha = 0.0
                    spread = np.where(unseen, reserved / unseen.sum(), 0.0)
                dist = np.where(unseen, spread, observed)
        dist.setflags(write=False)
        self._cond[context] = dist
        self._alpha[context] = alpha
        return dist

    def alpha(self, context: Sequence[int]) -> float:
        """Backoff weight applied to unseen continuations of ``context``."""
        context = tuple(context)
        self.conditional(context)
        return self._alpha[context]

    def prob(self, tup: Sequence[int]) -> float:
        """Count/backoff score of ``tup``; no digit override, no floor."""
        tup = tuple(tup)
        if not 1 <= len(tup) <= self.order:
            raise ValueError(f"tuple length must be in [1, {self.order}]")
        return float(self.conditional(tup[1:])[tup[0]])

    def score(self, tup: Sequence[int]) -> float:
        """Smoothed score in [0, 1] used by the potentials."""
        tup = tuple(tup)
        if len(tup) >= 2 and all(self._digit[i] for i in tup):
            return self.digit_constant
        return max(self.prob(tup), self.floor)

    def score_many(self, tuples: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`score` over the rows of an integer array."""
        tuples = np.asarray(tuples, dtype=np.int64)
        out = np.empty(len(tuples))
        for r, tup in enumerate(map(tuple, tuples.tolist())):
            out[r] = self.score(tup)
        return out

    def pair_scores(self) -> np.ndarray:
        """``k x k`` matrix of :meth:`score` for every ordered label pair."""
        k = self.alphabet.k
        mat = np.empty((k, k))
        for v in range(k):
            mat[:, v] = self.conditional((v,))
        mat = np.maximum(mat, self.floor)
        mat[np.ix_(self._digit, self._digit)] = self.digit_constant
        return mat

    # -- serialization -------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"{MODEL_MAGIC} v{MODEL_VERSION}\n")
        buf.write(f"order {self.order}\n")
        buf.write(f"digit_constant {float(self.digit_constant)!r}\n")
        buf.write(f"discount {float(self.discount)!r}\n")
        buf.write(f"floor {float(self.floor)!r}\n")
        buf.write(f"alphabet {''.join(self.alphabet.labels)}\n")
        buf.write(f"counts {len(self.counts)}\n")
        rows = sorted((self.alphabet.decode(t), c) for t, c in self.counts.items())
        for s, c in rows:
            buf.write(f"{s} {c}\n")
        return buf.getvalue()

    def save(self, path: "os.PathLike[str] | str") -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "NGramModel":
        lines = text.splitlines()
        if not lines or not lines[0].startswith(MODEL_MAGIC + " "):
            raise ValueError("not an n-gram model dump (bad magic header)")
        version = lines[0].split()[1]
        if version != f"v{MODEL_VERSION}":
            raise ValueError(f"unsupported model version {version}")
        head = dict(line.split(" ", 1) for line in lines[1:7])
        alphabet = Alphabet(tuple(head["alphabet"]))
        n = int(head["counts"])
        counts = {}
        for line in lines[7 : 7 + n]:
            s, c = line.rsplit(" ", 1)
            counts[alphabet.encode(s)] = int(c)
        model = cls(
            alphabet,
            int(head["order"]),
            counts,
            digit_constant=float(head["digit_constant"]),
            floor=float(head["floor"]),
        )
        model.discount = float(head["discount"])
        return model

    @classmethod
    def load(cls, path: "os.PathLike[str] | str") -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def count_ngrams(words: Iterable[Sequence[int]], order: int) -> Dict[Tuple[int, ...], int]:
    """Count every contiguous sub-tuple of length 1..order within each word."""
    counts: Counter = Counter()
    for w in words:
        w = tuple(w)
        for n in range(1, order + 1):
            for i in range(len(w) - n + 1):
                counts[w[i : i + n]] += 1
    return dict(counts)


def build_ngram_model(
    lex: Lexicon,
    order: int = 3,
    digit_constant: float = DEFAULT_DIGIT_CONSTANT,
    floor: float = DEFAULT_FLOOR,
) -> NGramModel:
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    counts = count_ngrams(lex.encoded(), order)
    return NGramModel(lex.alphabet, order, counts, digit_constant=digit_constant, floor=floor)


def ngram_score(model: NGramModel, tup: Sequence[str]) -> float:
    """Score a tuple of label strings; epsilon is rejected."""
    if any(lab == EPSILON or lab is None for lab in tup):
        raise ValueError("the null label has no n-gram score")
    if not 1 <= len(tup) <= model.order:
        raise ValueError(f"tuple length must be in [1, {model.order}]")
    return model.score(model.alphabet.encode(tup))


@dataclass(frozen=True)
class RoiPairTable:
    """Location-specific pair validity for a word split into ``T`` parts."""

    T: int
    alphabet: Alphabet
    valid: FrozenSet[Tuple[int, Tuple[int, int]]]
    _dense: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        k = self.alphabet.k
        dense = np.zeros((self.T, k, k), dtype=bool)
        for t, (u, v) in self.valid:
            dense[t - 1, u, v] = True
        dense.setflags(write=False)
        object.__setattr__(self, "_dense", dense)

    def contains(self, t: int, u: int, v: int) -> bool:
        if not 1 <= t <= self.T:
            raise ValueError(f"position {t} outside 1..{self.T}")
        return bool(self._dense[t - 1, u, v])

    def matrix(self, t: int) -> np.ndarray:
        """Boolean ``k x k`` validity matrix for part ``t``."""
        if not 1 <= t <= self.T:
            raise ValueError(f"position {t} outside 1..{self.T}")
        return self._dense[t - 1]


def build_roi_table(lex: Lexicon, T: int) -> RoiPairTable:
    """Pairs whose first character sits at word position t-1, t or t+1."""
    if T < 1:
        raise ValueError("T must be >= 1")
    valid = set()
    for w in lex.encoded():
        for p in range(1, len(w)):  # 1-based start of the pair w[p-1], w[p]
            pair = (w[p - 1], w[p])
            for t in (p - 1, p, p + 1):
                if 1 <= t <= T:
                    valid.add((t, pair))
    return RoiPairTable(T, lex.alphabet, frozenset(valid))
