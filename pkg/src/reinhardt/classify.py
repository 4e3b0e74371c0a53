"""Reinhardt predicate, dihedral compositions and periodic/sporadic labels."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .cyclo import IntPolynomial, divides_cyclotomic, divisors
from .seqcore import OddComposition, TernarySeq, as_seq


def least_rotation(seq: Sequence[int]) -> int:
    """Start index of the lexicographically least rotation (Booth, O(len))."""
    s = list(seq) * 2
    fail = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = fail[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = fail[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            fail[j - k] = -1
        else:
            fail[j - k] = i + 1
    return k % len(seq) if seq else 0


def _min_rotation(parts: tuple[int, ...]) -> tuple[int, ...]:
    k = least_rotation(parts)
    return parts[k:] + parts[:k]


def _repeat_block(parts: tuple[int, ...]) -> int:
    """Length of the shortest block whose repetition gives ``parts``."""
    size = len(parts)
    for d in range(1, size + 1):
        if size % d == 0 and parts[d:] + parts[:d] == parts:
            return d
    return size


@dataclass(frozen=True)
class DihedralComposition:
    """A composition class under rotation and reversal.

    ``canonical`` is the lexicographic minimum over the whole dihedral orbit.
    """

    canonical: tuple[int, ...]
    n: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", sum(self.canonical))

    @property
    def part_count(self) -> int:
        return len(self.canonical)

    @property
    def max_part(self) -> int:
        return max(self.canonical)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.canonical)) + "]"

    @property
    def key(self) -> str:
        return str(self)

    def repeat(self) -> tuple[tuple[int, ...], int]:
        """(block, times) with ``times`` maximal; times == 1 when aperiodic."""
        d = _repeat_block(self.canonical)
        return self.canonical[:d], len(self.canonical) // d

    def is_periodic(self) -> bool:
        return self.repeat()[1] > 1

    def power_str(self) -> str:
        """Power notation, e.g. ``[(2,3,5)^3]``; plain form when aperiodic."""
        block, times = self.repeat()
        if times == 1:
            return str(self)
        return "[(" + ",".join(map(str, block)) + f")^{times}]"

    def as_odd(self) -> OddComposition:
        return OddComposition(self.canonical)

    def is_reciprocal(self) -> bool:
        return _min_rotation(self.canonical[::-1]) == self.canonical


def canonicalize(comp) -> DihedralComposition:
    parts = tuple(comp.parts if isinstance(comp, OddComposition) else comp)
    if len(parts) % 2 == 0:
        raise ValueError("dihedral compositions have an odd number of parts")
    fwd = _min_rotation(parts)
    rev = _min_rotation(parts[::-1])
    return DihedralComposition(min(fwd, rev))


def parts_from_coeffs(values: Sequence[int], n: int) -> tuple[int, ...]:
    ks = [i for i, v in enumerate(values) if v]
    if not ks:
        raise ValueError("polynomial has no nonzero coefficients")
    gaps = [b - a for a, b in zip(ks, ks[1:])]
    gaps.append(n - ks[-1] + ks[0])
    return tuple(gaps)


def coeffs_from_parts(parts: Sequence[int], start: int = 0) -> tuple[int, ...]:
    """Coefficient vector (length sum(parts)) with F(z) = sum (-1)^i z^{k_i}."""
    n = sum(parts)
    if start < 0 or start >= n:
        raise ValueError("start outside 0..n-1")
    values = [0] * n
    pos, sign = start, 1
    for part in parts:
        if pos >= n:
            raise ValueError("composition wraps past degree n-1; use start=0")
        values[pos] = sign
        sign = -sign
        pos += part
    return tuple(values)


def _pad(seq: TernarySeq, n: int) -> tuple[int, ...]:
    if len(seq) > n:
        raise ValueError(f"sequence longer than n={n}")
    return seq.values + (0,) * (n - len(seq))


def is_reinhardt(seq, n: int) -> bool:
    """All four defining conditions: ternary, odd count, alternating, Phi_{2n} | F."""
    try:
        values = _pad(as_seq(seq), n)
    except ValueError:
        return False
    nz = [v for v in values if v]
    if len(nz) % 2 == 0:
        return False
    if any(a == b for a, b in zip(nz, nz[1:])):
        return False
    return divides_cyclotomic(IntPolynomial(values), n)


def antiperiod(values: Sequence[int], n: int) -> Optional[int]:
    """Least proper divisor d of n with v_k == -v_{k+d} for every k."""
    for d in divisors(n)[:-1]:
        if all(values[k] == -values[k + d] for k in range(n - d)):
            return d
    return None


class NotReinhardtError(ValueError):
    pass


class ReinhardtPolynomial:
    """Validated Reinhardt polynomial of length n with lazily cached labels."""

    def __init__(self, coeffs, n: int, *, validate: bool = True) -> None:
        seq = as_seq(coeffs)
        self.n = n
        self.coeffs = TernarySeq(_pad(seq, n))
        if validate and not is_reinhardt(self.coeffs, n):
            raise NotReinhardtError(f"not a Reinhardt polynomial for n={n}: {self.coeffs}")

    def __repr__(self) -> str:
        return f"ReinhardtPolynomial({str(self.coeffs)!r}, n={self.n})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, ReinhardtPolynomial)
                and self.n == other.n and self.coeffs == other.coeffs)

    def __hash__(self) -> int:
        return hash((self.n, self.coeffs.values))

    @property
    def values(self) -> tuple[int, ...]:
        return self.coeffs.values

    def polynomial(self) -> IntPolynomial:
        return IntPolynomial(self.coeffs.values)

    def nonzero_count(self) -> int:
        return self.coeffs.nonzero_count()

    @cached_property
    def composition(self) -> OddComposition:
        return OddComposition(parts_from_coeffs(self.values, self.n))

    @cached_property
    def dihedral(self) -> DihedralComposition:
        return canonicalize(self.composition)

    @cached_property
    def period(self) -> Optional[int]:
        return antiperiod(self.values, self.n)

    @property
    def sporadic(self) -> bool:
        return self.period is None

    @property
    def reciprocal(self) -> bool:
        return self.dihedral.is_reciprocal()

    def normalized(self) -> "ReinhardtPolynomial":
        """Sign-normalized copy: first nonzero coefficient is +1."""
        first = next(v for v in self.values if v)
        if first == 1:
            return self
        return ReinhardtPolynomial(-self.coeffs, self.n, validate=False)


def to_dihedral(F: ReinhardtPolynomial) -> DihedralComposition:
    return F.dihedral


def coefficient_period(F: ReinhardtPolynomial) -> Optional[int]:
    return F.period


def composition_period(comp) -> Optional[int]:
    """Cyclic counterpart of :func:`coefficient_period`.

    Returns the angle sum d of the shortest repeated block when the part
    sequence is a block repeated an odd number (> 1) of times, else None.
    """
    parts = tuple(comp.parts if isinstance(comp, OddComposition) else comp)
    b = _repeat_block(parts)
    if b == len(parts):
        return None
    return sum(parts[:b])


def is_sporadic(F: ReinhardtPolynomial) -> bool:
    return F.sporadic


def is_reciprocal(F) -> bool:
    if isinstance(F, ReinhardtPolynomial):
        return F.reciprocal
    return canonicalize(F).is_reciprocal()


def rotate_coeffs(values: Sequence[int], k: int) -> tuple[int, ...]:
    """Multiply by z^k modulo z^n + 1 (coefficients wrap with a sign flip)."""
    n = len(values)
    out = [0] * n
    for i, v in enumerate(values):
        j = i + k
        wraps, j = divmod(j, n)
        out[j] = -v if wraps % 2 else v
    return tuple(out)
