"""Words over an ordered alphabet, Hamming distance and the confusion test.

A word is a tuple of symbol indices ``0 .. s-1``; tuple comparison is
lexicographic, which is exactly the order used for the preferred word.
The confusion parameter is always an exact :class:`fractions.Fraction`, and
the test ``H(x, y) <= eps * L`` is evaluated in integers.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Word = tuple[int, ...]

_DECIMAL = re.compile(r"^\d+(\.\d{1,6})?$|^\.\d{1,6}$")
_RATIONAL = re.compile(r"^\d+/\d+$")


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of ``size`` abstract sounds, ordered by index."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"alphabet needs at least 2 symbols, got {self.size}")
        if self.size > 256:
            raise ValueError(f"alphabet size is limited to 256 symbols, got {self.size}")

    def contains(self, word: Sequence[int]) -> bool:
        return all(0 <= a < self.size for a in word)


def as_epsilon(value) -> Fraction:
    """Coerce ``value`` to an exact rational in ``[0, 1]``.

    Accepts a ``Fraction``, an ``int``, a ``"num/den"`` string or a decimal
    (string or float) with at most six fractional digits. Anything else is
    rejected rather than rounded.
    """
    if isinstance(value, bool):
        raise ValueError(f"invalid epsilon {value!r}")
    if isinstance(value, Fraction):
        eps = value
    elif isinstance(value, int):
        eps = Fraction(value)
    elif isinstance(value, float):
        eps = as_epsilon(repr(value))
    elif isinstance(value, str):
        text = value.strip()
        if _RATIONAL.match(text):
            num, den = text.split("/")
            if int(den) == 0:
                raise ValueError(f"epsilon {value!r} has a zero denominator")
            eps = Fraction(int(num), int(den))
        elif _DECIMAL.match(text):
            eps = Fraction(text)
        else:
            raise ValueError(
                f"epsilon {value!r} must be NUM/DEN or a decimal with at most 6 digits"
            )
    else:
        raise ValueError(f"invalid epsilon {value!r}")
    if not 0 <= eps <= 1:
        raise ValueError(f"epsilon must be in [0, 1], got {eps}")
    return eps


def confusion_radius(epsilon, length: int) -> int:
    """Largest Hamming distance still confounded: ``floor(eps * L)``."""
    eps = as_epsilon(epsilon)
    return (eps.numerator * length) // eps.denominator


def _check_lengths(x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != len(y):
        raise ValueError(f"words have different lengths ({len(x)} and {len(y)})")


def hamming(x: Sequence[int], y: Sequence[int]) -> int:
    """Number of positions in which ``x`` and ``y`` differ."""
    _check_lengths(x, y)
    return sum(a != b for a, b in zip(x, y))


def lex_min(words: Iterable[Sequence[int]]) -> Word:
    """Lexicographic minimum of a non-empty collection of equal-length words."""
    ws = [tuple(w) for w in words]
    if not ws:
        raise ValueError("lex_min of an empty collection")
    first = ws[0]
    for w in ws[1:]:
        _check_lengths(first, w)
    return min(ws)


def confounds(x: Sequence[int], y: Sequence[int], epsilon) -> bool:
    """True when ``H(x, y) <= eps * L`` (the hearer cannot tell them apart)."""
    eps = as_epsilon(epsilon)
    h = hamming(x, y)
    return h * eps.denominator <= eps.numerator * len(x)


def random_word(alphabet: Alphabet, length: int, stream) -> Word:
    """Word of ``length`` independent uniform symbols drawn from ``stream``."""
    if length < 1:
        raise ValueError(f"word length must be positive, got {length}")
    return tuple(int(a) for a in stream.below_many(alphabet.size, length))


def word_to_text(word: Sequence[int]) -> str:
    """Render as lowercase letters (``a`` is symbol 0); digits-with-dots above 26."""
    if all(0 <= a < 26 for a in word):
        return "".join(string.ascii_lowercase[a] for a in word)
    return ".".join(str(a) for a in word)


def word_from_text(text: str) -> Word:
    if "." in text or text.isdigit():
        return tuple(int(a) for a in text.split("."))
    if not text.isalpha() or not text.islower():
        raise ValueError(f"cannot parse word {text!r}")
    return tuple(ord(c) - ord("a") for c in text)


def words(*texts: str) -> list[Word]:
    """Convenience: ``words("abcd", "bacd")`` -> list of symbol tuples."""
    return [word_from_text(t) for t in texts]
