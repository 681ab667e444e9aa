"""A built-in 5x7 bitmap font and a word renderer for synthetic data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

# Each glyph is seven rows of five bits, most significant bit leftmost.
_FONT_HEX = {
    "A": "0E 11 11 1F 11 11 11", "B": "1E 11 11 1E 11 11 1E", "C": "0E 11 10 10 10 11 0E",
    "D": "1C 12 11 11 11 12 1C", "E": "1F 10 10 1E 10 10 1F", "F": "1F 10 10 1E 10 10 10",
    "G": "0E 11 10 17 11 11 0F", "H": "11 11 11 1F 11 11 11", "I": "0E 04 04 04 04 04 0E",
    "J": "07 02 02 02 02 12 0C", "K": "11 12 14 18 14 12 11", "L": "10 10 10 10 10 10 1F",
    "M": "11 1B 15 15 11 11 11", "N": "11 11 19 15 13 11 11", "O": "0E 11 11 11 11 11 0E",
    "P": "1E 11 11 1E 10 10 10", "Q": "0E 11 11 11 15 12 0D", "R": "1E 11 11 1E 14 12 11",
    "S": "0F 10 10 0E 01 01 1E", "T": "1F 04 04 04 04 04 04", "U": "11 11 11 11 11 11 0E",
    "V": "11 11 11 11 11 0A 04", "W": "11 11 11 15 15 15 0A", "X": "11 11 0A 04 0A 11 11",
    "Y": "11 11 11 0A 04 04 04", "Z": "1F 01 02 04 08 10 1F",
    "a": "00 00 0E 01 0F 11 0F", "b": "10 10 16 19 11 11 1E", "c": "00 00 0E 10 10 11 0E",
    "d": "01 01 0D 13 11 11 0F", "e": "00 00 0E 11 1F 10 0E", "f": "06 09 08 1C 08 08 08",
    "g": "00 0F 11 11 0F 01 0E", "h": "10 10 16 19 11 11 11", "i": "04 00 0C 04 04 04 0E",
    "j": "02 00 06 02 02 12 0C", "k": "10 10 12 14 18 14 12", "l": "0C 04 04 04 04 04 0E",
    "m": "00 00 1A 15 15 11 11", "n": "00 00 16 19 11 11 11", "o": "00 00 0E 11 11 11 0E",
    "p": "00 00 1E 11 1E 10 10", "q": "00 00 0D 13 0F 01 01", "r": "00 00 16 19 10 10 10",
    "s": "00 00 0E 10 0E 01 1E", "t": "08 08 1C 08 08 09 06", "u": "00 00 11 11 11 13 0D",
    "v": "00 00 11 11 11 0A 04", "w": "00 00 11 11 15 15 0A", "x": "00 00 11 0A 04 0A 11",
    "y": "00 00 11 11 0F 01 0E", "z": "00 00 1F 02 04 08 1F",
    "0": "0E 11 13 15 19 11 0E", "1": "04 0C 04 04 04 04 0E", "2": "0E 11 01 02 04 08 1F",
    "3": "1F 02 04 02 01 11 0E", "4": "02 06 0A 12 1F 02 02", "5": "1F 10 1E 01 01 11 0E",
    "6": "06 08 10 1E 11 11 0E", "7": "1F 01 02 04 08 08 08", "8": "0E 11 11 0E 11 11 0E",
    "9": "0E 11 11 0F 01 02 0C",
}

CELL_W, CELL_H = 5, 7
PIXEL = 4  # rendered pixels per font pixel
MARGIN = 4
SPACING = 4
X_JITTER = (0.85, 1.15)


def glyph_cell(ch: str) -> np.ndarray:
    """The full 7x5 cell of ``ch`` as a boolean array."""
    try:
        rows = _FONT_HEX[ch].split()
    except KeyError:
        raise KeyError(f"no glyph for {ch!r}") from None
    bits = [[(int(r, 16) >> (CELL_W - 1 - c)) & 1 for c in range(CELL_W)] for r in rows]
    return np.array(bits, dtype=bool)


def glyph_box(ch: str) -> Tuple[int, int, int, int]:
    """Ink bounding box ``(row0, row1, col0, col1)`` (exclusive ends) in cell units."""
    cell = glyph_cell(ch)
    rows = np.flatnonzero(cell.any(axis=1))
    cols = np.flatnonzero(cell.any(axis=0))
    return int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1


def glyph_ink(ch: str) -> np.ndarray:
    r0, r1, c0, c1 = glyph_box(ch)
    return glyph_cell(ch)[r0:r1, c0:c1]


def resample(mask: np.ndarray, height: int, width: int) -> np.ndarray:
    """Nearest-neighbour resize of a 2-D array."""
    h, w = mask.shape
    ri = np.minimum((np.arange(height) + 0.5) * h / height, h - 1).astype(int)
    ci = np.minimum((np.arange(width) + 0.5) * w / width, w - 1).astype(int)
    return mask[np.ix_(ri, ci)]


def glyph_template(ch: str) -> np.ndarray:
    """Ink of ``ch`` rendered at nominal scale."""
    ink = glyph_ink(ch)
    return resample(ink, ink.shape[0] * PIXEL, ink.shape[1] * PIXEL)


def glyph_aspect(ch: str, x_scale: float = 1.0) -> float:
    """Aspect of the rendered ink box of ``ch`` at a given horizontal scale."""
    r0, r1, c0, c1 = glyph_box(ch)
    width = max(1, int(round((c1 - c0) * PIXEL * x_scale)))
    return width / ((r1 - r0) * PIXEL)


@dataclass
class RenderedWord:
    image: np.ndarray  # float raster, ink = 1.0
    boxes: List[Tuple[int, int, int, int]]  # per character ink: x0, y0, width, height

    @property
    def width(self) -> int:
        return self.image.shape[1]


def render_word(
    word: str,
    x_scales: Optional[Sequence[float]] = None,
    noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> RenderedWord:
    """Draw ``word`` left to right with per-glyph horizontal stretch.

    Each glyph keeps its vertical position inside the 7-row cell so that
    lowercase letters sit lower than capitals. ``noise`` flips that fraction
    of pixels at random.
    """
    if x_scales is None:
        x_scales = [1.0] * len(word)
    glyphs = []
    for ch, sx in zip(word, x_scales):
        r0, r1, _, _ = glyph_box(ch)
        ink = glyph_ink(ch)
        h = ink.shape[0] * PIXEL
        w = max(1, int(round(ink.shape[1] * PIXEL * sx)))
        glyphs.append((resample(ink, h, w), r0 * PIXEL))
    height = CELL_H * PIXEL + 2 * MARGIN
    width = 2 * MARGIN + sum(g.shape[1] for g, _ in glyphs) + SPACING * max(0, len(glyphs) - 1)
    image = np.zeros((height, max(width, 1)))
    boxes = []
    x = MARGIN
    for g, top in glyphs:
        y = MARGIN + top
        image[y : y + g.shape[0], x : x + g.shape[1]] = g
        boxes.append((x, y, g.shape[1], g.shape[0]))
        x += g.shape[1] + SPACING
    if noise > 0:
        rng = rng or np.random.default_rng(0)
        flip = rng.random(image.shape) < noise
        image = np.where(flip, 1.0 - image, image)
    return RenderedWord(image, boxes)
