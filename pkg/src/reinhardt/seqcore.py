"""Ternary sequences, even/odd compositions and the block alphabets.

Sequences print with the characters ``+``, ``-`` and ``0`` so that block data
can be pasted straight from a table of coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

_TO_CHAR = {1: "+", -1: "-", 0: "0"}
_FROM_CHAR = {"+": 1, "-": -1, "0": 0}
# separators tolerated by TernarySeq.parse
_IGNORED = set(" \t\n|~_")


def _check_sign(b: int) -> None:
    if b not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {b!r}")


@dataclass(frozen=True)
class TernarySeq:
    """Immutable sequence over {-1, 0, +1}.

    Zero-length sequences are allowed: they show up as sub-blocks Z(0).
    """

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(int(v) for v in self.values)
        for v in values:
            if v not in (-1, 0, 1):
                raise ValueError(f"entry {v!r} is not in {{-1, 0, 1}}")
        object.__setattr__(self, "values", values)

    @classmethod
    def parse(cls, text: str) -> "TernarySeq":
        out = []
        for ch in text:
            if ch in _IGNORED:
                continue
            try:
                out.append(_FROM_CHAR[ch])
            except KeyError:
                raise ValueError(f"bad ternary character {ch!r} in {text!r}") from None
        return cls(tuple(out))

    def __str__(self) -> str:
        return "".join(_TO_CHAR[v] for v in self.values)

    def __repr__(self) -> str:
        return f"TernarySeq({str(self)!r})"

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return TernarySeq(self.values[i])
        return self.values[i]

    def __add__(self, other: "TernarySeq") -> "TernarySeq":
        return TernarySeq(self.values + tuple(other.values))

    def __neg__(self) -> "TernarySeq":
        return TernarySeq(tuple(-v for v in self.values))

    @property
    def length(self) -> int:
        return len(self.values)

    def reversed(self) -> "TernarySeq":
        return TernarySeq(self.values[::-1])

    def nonzero_count(self) -> int:
        return sum(1 for v in self.values if v)

    def nonzero_positions(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v]

    def alternates(self) -> bool:
        """True when consecutive nonzero entries have opposite signs."""
        last = 0
        for v in self.values:
            if v:
                if v == last:
                    return False
                last = v
        return True


def concat(blocks: Iterable[TernarySeq]) -> TernarySeq:
    values: list[int] = []
    for b in blocks:
        values.extend(b.values)
    return TernarySeq(tuple(values))


# -- block alphabets ---------------------------------------------------------

def alphabet_size(k: int) -> int:
    """Size of S_o(k, b) and of S_e(k, b): 2**(k-1)."""
    if k < 1:
        raise ValueError(f"block length must be >= 1, got {k}")
    return 1 << (k - 1)


def pattern_mask(k: int, index: int, odd: bool) -> int:
    """Nonzero-position mask of the ``index``-th member of S_o/S_e of length k.

    Bit ``k-1-i`` of the mask is set when position ``i`` is nonzero, so the
    mask read as a binary number orders patterns lexicographically (position 0
    most significant).  The first k-1 positions come straight from ``index``;
    the last one fixes the parity.
    """
    size = alphabet_size(k)
    if not 0 <= index < size:
        raise ValueError(f"index {index} out of range for alphabet of size {size}")
    head = index << 1
    parity = bin(index).count("1") & 1
    want = 1 if odd else 0
    return head | (parity ^ want)


def seq_from_mask(k: int, mask: int, b: int) -> TernarySeq:
    """Alternating sequence of length k with nonzeros at ``mask``, first one ``b``."""
    values = [0] * k
    sign = b
    for i in range(k):
        if (mask >> (k - 1 - i)) & 1:
            values[i] = sign
            sign = -sign
    return TernarySeq(tuple(values))


def mask_from_seq(seq: TernarySeq) -> int:
    k = len(seq)
    mask = 0
    for i, v in enumerate(seq.values):
        if v:
            mask |= 1 << (k - 1 - i)
    return mask


def s_o_at(k: int, b: int, index: int) -> TernarySeq:
    _check_sign(b)
    return seq_from_mask(k, pattern_mask(k, index, odd=True), b)


def s_e_at(k: int, b: int, index: int) -> TernarySeq:
    _check_sign(b)
    return seq_from_mask(k, pattern_mask(k, index, odd=False), b)


def alphabet_index(seq: TernarySeq) -> int:
    """Inverse of ``s_o_at``/``s_e_at``: the index ignores the sign and parity."""
    if len(seq) < 1:
        raise ValueError("empty sequence has no alphabet index")
    return mask_from_seq(seq) >> 1


def in_s_o(seq: TernarySeq, b: int) -> bool:
    nz = [v for v in seq.values if v]
    return len(nz) % 2 == 1 and nz[0] == b and seq.alternates()


def in_s_e(seq: TernarySeq, b: int) -> bool:
    nz = [v for v in seq.values if v]
    if len(nz) % 2:
        return False
    return (not nz or nz[0] == b) and seq.alternates()


def gen_S_o(k: int, b: int) -> list[TernarySeq]:
    """All of S_o(k, b) in index order."""
    _check_sign(b)
    return [s_o_at(k, b, i) for i in range(alphabet_size(k))]


def gen_S_e(k: int, b: int) -> list[TernarySeq]:
    """All of S_e(k, b) in index order."""
    _check_sign(b)
    return [s_e_at(k, b, i) for i in range(alphabet_size(k))]


def zero_block(k: int) -> TernarySeq:
    if k < 0:
        raise ValueError(f"zero block length must be >= 0, got {k}")
    return TernarySeq((0,) * k)


def shift_right_negate(seq: TernarySeq) -> TernarySeq:
    """Cyclic right shift; the element that wraps around is negated."""
    if len(seq) == 0:
        raise ValueError("cannot shift an empty sequence")
    v = seq.values
    return TernarySeq((-v[-1],) + v[:-1])


def shift_left_negate(seq: TernarySeq) -> TernarySeq:
    """Inverse of :func:`shift_right_negate`."""
    if len(seq) == 0:
        raise ValueError("cannot shift an empty sequence")
    v = seq.values
    return TernarySeq(v[1:] + (-v[0],))


# -- compositions -------------------------------------------------------------

def _parse_parts(text: str) -> tuple[int, ...]:
    text = text.strip().strip("[]()")
    if not text:
        return ()
    return tuple(int(tok) for tok in text.split(","))


@dataclass(frozen=True)
class EvenComposition:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(x) for x in self.parts)
        if len(parts) < 2 or len(parts) % 2:
            raise ValueError(f"need an even number (>= 2) of parts, got {parts}")
        if any(x < 1 for x in parts):
            raise ValueError(f"parts must be positive, got {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "EvenComposition":
        return cls(_parse_parts(text))

    def __str__(self) -> str:
        return ",".join(map(str, self.parts))

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def half_count(self) -> int:
        return len(self.parts) // 2

    @property
    def r_e(self) -> int:
        """Sum of the even-indexed parts r_2 + r_4 + ... (1-based)."""
        return sum(self.parts[1::2])

    @property
    def r_o(self) -> int:
        return self.total - self.r_e

    def reversed(self) -> "EvenComposition":
        return EvenComposition(self.parts[::-1])


@dataclass(frozen=True)
class OddComposition:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(x) for x in self.parts)
        if len(parts) % 2 == 0:
            raise ValueError(f"need an odd number of parts, got {len(parts)}")
        if any(x < 1 for x in parts):
            raise ValueError(f"parts must be positive, got {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "OddComposition":
        return cls(_parse_parts(text))

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.parts)) + "]"

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def n(self) -> int:
        return sum(self.parts)


def composition_period(c: EvenComposition) -> int:
    """Least even k > 0 with L^k(c) == c, L the cyclic left shift."""
    parts = c.parts
    size = len(parts)
    for k in range(2, size + 1, 2):
        if size % k == 0 and parts[k:] + parts[:k] == parts:
            return k
    return size  # unreachable: k == size always qualifies


def even_compositions(r: int) -> Iterator[EvenComposition]:
    """Compositions of r into an even number of parts (deterministic order)."""
    for parts in _compositions(r):
        if len(parts) % 2 == 0:
            yield EvenComposition(parts)


def odd_compositions(n: int, max_part: int | None = None) -> Iterator[OddComposition]:
    for parts in _compositions(n, max_part):
        if len(parts) % 2 == 1:
            yield OddComposition(parts)


def _compositions(total: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    # each composition of `total` is a choice of cut points in {1..total-1}
    if total < 1:
        return
    for cuts in product((0, 1), repeat=total - 1):
        parts = []
        run = 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        if max_part is None or max(parts) <= max_part:
            yield tuple(parts)


def parse_parts(text: str) -> tuple[int, ...]:
    return _parse_parts(text)


def as_seq(value: TernarySeq | str | Sequence[int]) -> TernarySeq:
    if isinstance(value, TernarySeq):
        return value
    if isinstance(value, str):
        return TernarySeq.parse(value)
    return TernarySeq(tuple(value))
