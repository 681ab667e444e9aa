import numpy as np
import pytest

from wordcrf.alphabet import Alphabet
from wordcrf.classifier import default_aspect_stats
from wordcrf.detection import AspectStats, DetectionWindow

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line; shown in the terminal summary and printed."""
    sink = request.config.stash[_ACCEPTANCE]

    def report(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else "")
        sink.append(line)
        print(line)
        return ok

    return report


@pytest.fixture(scope="session")
def upper() -> Alphabet:
    return Alphabet.case_insensitive()


@pytest.fixture(scope="session")
def full() -> Alphabet:
    return Alphabet.case_sensitive()


@pytest.fixture(scope="session")
def font_stats(upper) -> AspectStats:
    return default_aspect_stats(upper)


@pytest.fixture(scope="session")
def unit_stats(upper) -> AspectStats:
    """Every class has mean aspect 1 and spread 0.25."""
    return AspectStats.from_mapping(upper, {c: (1.0, 0.25) for c in upper.labels})


def one_hot(alphabet: Alphabet, label: str, p: float = 1.0, rest: float = 0.0) -> np.ndarray:
    s = np.full(alphabet.k, rest)
    s[alphabet.index(label)] = p
    return s


def window(wid, cx, scores, w=10.0, h=10.0, cy=10.0) -> DetectionWindow:
    return DetectionWindow(wid, float(cx), float(cy), float(w), float(h), np.asarray(scores, dtype=float))


def word_windows(alphabet: Alphabet, word: str, width: float = 10.0, gap: float = 2.0, p: float = 0.9):
    """Square windows reading ``word`` left to right, one confident class each."""
    out = []
    x = 0.0
    for i, ch in enumerate(word):
        out.append(window(i, x + width / 2, one_hot(alphabet, ch, p), w=width, h=width))
        x += width + gap
    return out
