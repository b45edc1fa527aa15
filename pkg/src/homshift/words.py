"""Words over signed generators and their text syntax.

A word is a tuple of ``(generator, exponent)`` letters with exponent ``+1`` or
``-1``. Text form separates letters by spaces and marks inverses with a
trailing ``⁻`` (``^-1`` and a trailing ``-`` are accepted on input); the empty
word is written ``1``.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .errors import ParseError

Letter = tuple[str, int]

INVERSE_MARK = "⁻"


class Word(tuple):
    """Immutable word; multiplication freely reduces."""

    def __new__(cls, letters: Iterable[Letter] = ()):
        return super().__new__(cls, ((str(g), int(e)) for g, e in letters))

    @classmethod
    def gen(cls, name: str, exp: int = 1) -> "Word":
        """``name`` raised to an integer power."""
        sign = 1 if exp >= 0 else -1
        return cls([(name, sign)] * abs(exp))

    def reduced(self) -> "Word":
        return Word(_free_reduce(self))

    def inverse(self) -> "Word":
        return Word((g, -e) for g, e in reversed(self))

    def __mul__(self, other: "Word") -> "Word":  # type: ignore[override]
        return Word(_free_reduce(tuple(self) + tuple(other)))

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        out: list[Letter] = []
        for _ in range(abs(k)):
            out.extend(base)
        return Word(_free_reduce(out))

    def cyclically_reduced(self) -> "Word":
        w = list(_free_reduce(self))
        while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
            w = w[1:-1]
        return Word(w)

    def exponent_sums(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g, e in self:
            out[g] = out.get(g, 0) + e
        return out

    def generators(self) -> set[str]:
        return {g for g, _ in self}

    def substitute(self, images: Mapping[str, "Word"]) -> "Word":
        out: list[Letter] = []
        for g, e in self:
            img = images.get(g, Word([(g, 1)]))
            out.extend(img if e > 0 else img.inverse())
        return Word(_free_reduce(out))

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


IDENTITY = Word()


def _free_reduce(letters: Sequence[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for g, e in letters:
        if stack and stack[-1][0] == g and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((g, e))
    return tuple(stack)


def format_word(w: Sequence[Letter]) -> str:
    if not w:
        return "1"
    return " ".join(g if e > 0 else g + INVERSE_MARK for g, e in w)


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "1"):
        return IDENTITY
    letters = []
    for tok in text.split():
        for suffix in (INVERSE_MARK, "^-1", "-"):
            if tok.endswith(suffix) and len(tok) > len(suffix):
                letters.append((tok[: -len(suffix)], -1))
                break
        else:
            if tok.endswith("^1"):
                tok = tok[:-2]
            if not tok or any(ch in tok for ch in "^⁻"):
                raise ParseError(f"bad letter {tok!r} in word {text!r}")
            letters.append((tok, 1))
    return Word(letters)
