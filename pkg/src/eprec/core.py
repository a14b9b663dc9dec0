"""Alphabets, involutions and symbol sequences.

Symbols are stored as dense ``uint8`` indices into a :class:`FiniteAlphabet`.
Positions reported to users (error messages, tables) are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

MAX_ALPHABET_SIZE = 256


class AlphabetError(ValueError):
    """Raised on invalid alphabets, involutions, or alphabet mismatches."""


class EncodingError(ValueError):
    """Raised when text contains a character outside the alphabet.

    ``offset`` is the 1-based position of the offending character.
    """

    def __init__(self, char: str, offset: int):
        super().__init__(f"unknown symbol {char!r} at offset {offset}")
        self.char = char
        self.offset = offset


@dataclass(frozen=True)
class FiniteAlphabet:
    """An ordered set of distinct printable tokens."""

    symbols: tuple[str, ...]
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not 2 <= len(symbols) <= MAX_ALPHABET_SIZE:
            raise AlphabetError(
                f"alphabet size must be in [2, {MAX_ALPHABET_SIZE}], got {len(symbols)}"
            )
        if len(set(symbols)) != len(symbols):
            raise AlphabetError(f"duplicate tokens in alphabet {symbols!r}")
        if any(not s or not s.isprintable() or "," in s or s.isspace() for s in symbols):
            raise AlphabetError(f"tokens must be non-empty printable, comma-free: {symbols!r}")
        object.__setattr__(self, "_lookup", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def from_string(cls, tokens: str) -> "FiniteAlphabet":
        """Build an alphabet of single-character tokens, e.g. ``"01"`` or ``"ACGT"``."""
        return cls(tuple(tokens))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, token: str) -> int:
        try:
            return self._lookup[token]
        except KeyError:
            raise AlphabetError(f"token {token!r} not in alphabet {self.symbols!r}") from None

    def token(self, i: int) -> str:
        return self.symbols[i]

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def spec(self) -> str:
        """Compact textual form used in CLI flags and config headers."""
        if self.single_char:
            return "".join(self.symbols)
        return " ".join(self.symbols)


BINARY = FiniteAlphabet(("0", "1"))
DNA = FiniteAlphabet(("A", "C", "G", "T"))


@dataclass(frozen=True)
class Involution:
    """A self-inverse letter map on an alphabet, stored as index mapping."""

    alphabet: FiniteAlphabet
    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(v) for v in self.mapping)
        object.__setattr__(self, "mapping", mapping)
        k = self.alphabet.size
        if len(mapping) != k:
            raise AlphabetError(f"involution needs {k} entries, got {len(mapping)}")
        for a, b in enumerate(mapping):
            if not 0 <= b < k:
                raise AlphabetError(f"involution image {b} out of range")
            if mapping[b] != a:
                raise AlphabetError(
                    f"not an involution: {self.alphabet.token(a)!r} -> "
                    f"{self.alphabet.token(b)!r} -> {self.alphabet.token(mapping[b])!r}"
                )

    @classmethod
    def identity(cls, alphabet: FiniteAlphabet) -> "Involution":
        return cls(alphabet, tuple(range(alphabet.size)))

    @classmethod
    def from_pairs(cls, alphabet: FiniteAlphabet, pairs: Iterable[tuple[str, str]]) -> "Involution":
        """Swap each listed pair; unlisted letters are fixed points."""
        mapping = list(range(alphabet.size))
        seen: set[int] = set()
        for a, b in pairs:
            i, j = alphabet.index(a), alphabet.index(b)
            if i in seen or j in seen:
                raise AlphabetError(f"letter listed twice in involution pairs: {a}:{b}")
            seen.update((i, j))
            mapping[i], mapping[j] = j, i
        return cls(alphabet, tuple(mapping))

    @property
    def is_identity(self) -> bool:
        return all(a == b for a, b in enumerate(self.mapping))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mapping, dtype=np.uint8)

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    def spec(self) -> str:
        if self.is_identity:
            return "id"
        pairs = []
        for a, b in enumerate(self.mapping):
            if a < b:
                pairs.append(f"{self.alphabet.token(a)}:{self.alphabet.token(b)}")
        return ",".join(pairs)


def parse_involution(spec: str, alphabet: FiniteAlphabet) -> Involution:
    """Parse ``id``, ``chargaff`` or a pair list such as ``"C:G,A:T"``."""
    spec = spec.strip()
    if spec in ("id", "identity"):
        return Involution.identity(alphabet)
    if spec.lower() in ("chargaff", "ch", "theta_ch"):
        spec = "C:G,A:T"
    pairs = []
    for item in spec.split(","):
        parts = item.split(":")
        if len(parts) != 2:
            raise AlphabetError(f"malformed involution pair {item!r}")
        pairs.append((parts[0].strip(), parts[1].strip()))
    return Involution.from_pairs(alphabet, pairs)


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """An immutable run of symbol indices over ``alphabet``."""

    alphabet: FiniteAlphabet
    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.ndim != 1:
            raise ValueError("sequence data must be one-dimensional")
        if data.size and int(data.max()) >= self.alphabet.size:
            bad = int(np.flatnonzero(data >= self.alphabet.size)[0])
            raise AlphabetError(f"symbol index {int(data[bad])} at offset {bad + 1} out of range")
        if data.flags.writeable:
            data = data.copy()
            data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def length(self) -> int:
        return int(self.data.size)

    def __len__(self) -> int:
        return int(self.data.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.data.tobytes()))

    def window(self, start: int, m: int) -> "SymbolSequence":
        """The word ``x_start ... x_{start+m-1}`` (1-based ``start``)."""
        if start < 1 or m < 0 or start - 1 + m > self.length:
            raise IndexError(
                f"window [{start}, {start + m - 1}] outside sequence of length {self.length}"
            )
        return SymbolSequence(self.alphabet, self.data[start - 1 : start - 1 + m])

    def prefix(self, n: int) -> "SymbolSequence":
        return self.window(1, n)

    def shift(self, k: int) -> "SymbolSequence":
        """Drop the first ``k`` symbols (the left shift applied ``k`` times)."""
        if not 0 <= k <= self.length:
            raise IndexError(f"cannot shift a sequence of length {self.length} by {k}")
        return SymbolSequence(self.alphabet, self.data[k:])

    def to_text(self, sep: str = "") -> str:
        syms = self.alphabet.symbols
        return sep.join(syms[i] for i in self.data.tolist())

    def __repr__(self) -> str:
        text = self.to_text() if self.alphabet.single_char else self.to_text(" ")
        if len(text) > 40:
            text = text[:37] + "..."
        return f"SymbolSequence({text!r}, length={self.length})"


Word = Union[SymbolSequence, Sequence[int], np.ndarray]


def reverse_word(word: Word, theta: Involution):
    """Reverse ``word`` and map each letter through ``theta``.

    Returns a :class:`SymbolSequence` for sequence input and an ``uint8``
    array otherwise.
    """
    if isinstance(word, SymbolSequence):
        if word.alphabet != theta.alphabet:
            raise AlphabetError("word and involution are over different alphabets")
        return SymbolSequence(word.alphabet, theta.as_array()[word.data[::-1]])
    arr = np.asarray(word, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= theta.alphabet.size):
        raise AlphabetError("word contains symbols outside the involution's alphabet")
    return theta.as_array()[arr[::-1]].astype(np.uint8)


def _encode_table(alphabet: FiniteAlphabet, fold_case: bool) -> dict[str, int]:
    table = {}
    for i, s in enumerate(alphabet.symbols):
        table[s] = i
        if fold_case:
            for variant in (s.upper(), s.lower()):
                table.setdefault(variant, i)
    return table


def encode_text(text: str, alphabet: FiniteAlphabet, fold_case: bool = False) -> SymbolSequence:
    """Map each character of ``text`` to its alphabet index."""
    if not alphabet.single_char:
        raise AlphabetError("text encoding requires single-character tokens")
    table = _encode_table(alphabet, fold_case)
    if text.isascii():
        lut = np.full(256, 255, dtype=np.uint8)
        for ch, i in table.items():
            if len(ch) == 1 and ord(ch) < 256:
                lut[ord(ch)] = i
        raw = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
        out = lut[raw]
        bad = np.flatnonzero(out == 255)
        if bad.size:
            pos = int(bad[0])
            raise EncodingError(text[pos], pos + 1)
        return SymbolSequence(alphabet, out)
    out = np.empty(len(text), dtype=np.uint8)
    for pos, ch in enumerate(text):
        try:
            out[pos] = table[ch]
        except KeyError:
            raise EncodingError(ch, pos + 1) from None
    return SymbolSequence(alphabet, out)


def decode(seq: SymbolSequence) -> str:
    return seq.to_text()


def as_sequence(x, alphabet: FiniteAlphabet | None = None) -> SymbolSequence:
    """Coerce text or an index array into a :class:`SymbolSequence`."""
    if isinstance(x, SymbolSequence):
        return x
    if isinstance(x, str):
        return encode_text(x, alphabet or BINARY)
    if alphabet is None:
        raise AlphabetError("an alphabet is required to wrap raw index data")
    return SymbolSequence(alphabet, np.asarray(x))
