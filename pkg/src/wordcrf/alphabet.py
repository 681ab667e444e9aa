"""Character label sets shared by every stage of the pipeline."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple

UPPER = string.ascii_uppercase
LOWER = string.ascii_lowercase
DIGITS = string.digits

#: Display form of the null label. Internally epsilon is the index ``k``.
EPSILON = "ε"


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of ``k`` character classes; epsilon is never a member.

    The null label is addressed by index ``k`` (one past the last class), so a
    character node has ``k + 1`` possible labels.
    """

    labels: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in alphabet")
        if EPSILON in self.labels:
            raise ValueError("the null label cannot be an alphabet member")
        for lab in self.labels:
            if len(lab) != 1:
                raise ValueError(f"labels must be single characters, got {lab!r}")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.labels)})

    @classmethod
    def case_sensitive(cls) -> "Alphabet":
        return cls(tuple(UPPER + LOWER + DIGITS))

    @classmethod
    def case_insensitive(cls) -> "Alphabet":
        return cls(tuple(UPPER + DIGITS))

    @classmethod
    def for_case(cls, case_fold: bool) -> "Alphabet":
        return cls.case_insensitive() if case_fold else cls.case_sensitive()

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def epsilon_index(self) -> int:
        return len(self.labels)

    @property
    def is_case_folded(self) -> bool:
        return not any(c in self._index for c in LOWER)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in alphabet") from None

    def encode(self, word: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self.index(c) for c in word)

    def decode(self, indices: Sequence[int]) -> str:
        return "".join(self.labels[i] for i in indices)

    def fold(self, text: str) -> str:
        """Map ``text`` into this alphabet's case convention."""
        return text.upper() if self.is_case_folded else text

    def is_digit(self, index: int) -> bool:
        return self.labels[index] in DIGITS
