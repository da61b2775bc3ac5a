"""Reduced-word arithmetic in finitely generated free groups.

Letters are signed 1-based integers: ``+n`` is the n-th generator, ``-n``
its inverse.  Words are stored freely reduced, so equality of group
elements is equality of letter tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _merge(left: tuple[int, ...], right: tuple[int, ...]) -> tuple[int, ...]:
    # both sides already reduced; cancellation only happens at the seam
    i = len(left)
    j = 0
    n = len(right)
    while i > 0 and j < n and left[i - 1] == -right[j]:
        i -= 1
        j += 1
    return left[:i] + right[j:]


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered set of named free-group generators."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("a free group needs at least one generator")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"generator names must be distinct: {self.names}")

    @property
    def rank(self) -> int:
        return len(self.names)

    def identity(self) -> "Word":
        return Word(self, ())

    def generator(self, name: str) -> "Word":
        return Word(self, (self.names.index(name) + 1,))

    def word(self, letters: Iterable[int]) -> "Word":
        return Word(self, _reduce(letters))

    def generator_power(self, index: int, exponent: int) -> "Word":
        """The reduced word g_index**exponent."""
        if not 0 <= index < self.rank:
            raise ValueError(f"no generator with index {index}")
        code = index + 1 if exponent >= 0 else -(index + 1)
        return Word(self, (code,) * abs(exponent))

    def __repr__(self) -> str:
        return f"GeneratorSet({', '.join(self.names)})"


F2 = GeneratorSet(("a", "b"))


def tree_generators(alphabet_size: int) -> GeneratorSet:
    """Generators s0..s<alphabet_size> of the rank-(size+1) free group."""
    return GeneratorSet(tuple(f"s{i}" for i in range(alphabet_size + 1)))


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    gens: GeneratorSet
    letters: tuple[int, ...]

    def __post_init__(self):
        rank = self.gens.rank
        prev = 0
        for letter in self.letters:
            if letter == 0 or abs(letter) > rank:
                raise ValueError(f"letter {letter} out of range for rank {rank}")
            if prev == -letter:
                raise ValueError(f"word {self.letters} is not freely reduced")
            prev = letter

    def __mul__(self, other: "Word") -> "Word":
        if self.gens != other.gens:
            raise ValueError("cannot multiply words over different generator sets")
        return Word(self.gens, _merge(self.letters, other.letters))

    def inverse(self) -> "Word":
        return Word(self.gens, tuple(-l for l in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.gens.identity()
        for _ in range(n):
            out = out * self
        return out

    def __len__(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def prefixes(self) -> Iterator["Word"]:
        """All prefixes from the identity up to the full word."""
        for i in range(len(self.letters) + 1):
            yield Word(self.gens, self.letters[:i])

    def to_tokens(self) -> list[str]:
        names = self.gens.names
        return [names[l - 1] if l > 0 else names[-l - 1] + "'" for l in self.letters]

    def __str__(self) -> str:
        return "·".join(self.to_tokens())

    def __repr__(self) -> str:
        return f"<{self}>" if self.letters else "<e>"


def word_length(w: Word) -> int:
    """Word metric: length of the reduced word."""
    return len(w.letters)


def multiply(u: Word, v: Word) -> Word:
    return u * v


def invert(u: Word) -> Word:
    return u.inverse()


def from_tokens(gens: GeneratorSet, tokens: Sequence[str]) -> Word:
    letters = []
    for token in tokens:
        token = token.strip()
        if not token:
            raise ValueError("empty token")
        if token.endswith("'"):
            letters.append(-(gens.names.index(token[:-1]) + 1))
        else:
            letters.append(gens.names.index(token) + 1)
    return gens.word(letters)


def from_text(gens: GeneratorSet, text: str) -> Word:
    """Parse the '·'-separated token form; the empty string is the identity."""
    text = text.strip()
    if not text:
        return gens.identity()
    return from_tokens(gens, text.split("·"))


def shortlex_key(w: Word) -> tuple:
    """Sort key: length first, then letters with positive before inverse."""
    rank = w.gens.rank
    return (len(w.letters), tuple(l - 1 if l > 0 else rank - l - 1 for l in w.letters))


def enumerate_ball(gens: GeneratorSet, radius: int) -> list[Word]:
    """All reduced words of length <= radius in shortlex order.

    Positive letters sort before inverse letters, both by generator index.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    order = list(range(1, gens.rank + 1)) + list(range(-1, -gens.rank - 1, -1))
    words: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(radius):
        new: list[tuple[int, ...]] = []
        for letters in frontier:
            last = letters[-1] if letters else 0
            for l in order:
                if last == -l:
                    continue
                new.append(letters + (l,))
        words.extend(new)
        frontier = new
    return [Word(gens, letters) for letters in words]


def ball_size(rank: int, radius: int) -> int:
    """Closed-form count of reduced words of length <= radius."""
    total = 1
    layer = 1
    for k in range(1, radius + 1):
        layer = 2 * rank if k == 1 else layer * (2 * rank - 1)
        total += layer
    return total


def split_generator_tail(w: Word, index: int) -> tuple[Word, int]:
    """Split ``w = prefix * g_index**t`` with ``prefix`` not ending in g_index."""
    code = index + 1
    letters = w.letters
    i = len(letters)
    while i > 0 and abs(letters[i - 1]) == code:
        i -= 1
    tail = letters[i:]
    t = len(tail) if (tail and tail[0] > 0) else -len(tail)
    return Word(w.gens, letters[:i]), t


def split_a_tail(w: Word) -> tuple[Word, int]:
    """Split off the maximal trailing power of the first generator."""
    return split_generator_tail(w, 0)


def coset_rep_b(w: Word) -> Word:
    """Canonical representative of the right coset w<b>: strip the maximal
    trailing power of the second generator."""
    if w.gens.rank < 2:
        raise ValueError("coset representative needs a rank >= 2 group")
    return split_generator_tail(w, 1)[0]
