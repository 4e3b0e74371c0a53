"""Building Reinhardt polynomials for n = pqr from block choices.

f1 is p blocks A_1..A_p and f2 is R(B_1..B_q), each block of length r and cut
into 2m sub-blocks along an even composition c of r.  A choice vector picks one
member of each sub-block alphabet; choice vectors are numbered as mixed-radix
integers so a whole spec can be walked (or split into ranges) with a counter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .classify import ReinhardtPolynomial, is_reinhardt
from .cyclo import batch_divisible, compose_neg_power, is_prime
from .seqcore import (
    EvenComposition,
    TernarySeq,
    alphabet_index,
    alphabet_size,
    as_seq,
    concat,
    in_s_e,
    in_s_o,
    s_e_at,
    s_o_at,
    shift_right_negate,
    zero_block,
)


class ConstructionError(RuntimeError):
    """An assembled polynomial failed re-verification (a bug, never user error)."""


def _alt(i: int) -> int:
    return -1 if i % 2 else 1


@dataclass(frozen=True)
class ConstructionSpec:
    n: int
    p: int
    q: int
    c: EvenComposition
    s: Optional[int] = None

    def __post_init__(self) -> None:
        if isinstance(self.c, (tuple, list, str)):
            c = EvenComposition.parse(self.c) if isinstance(self.c, str) else EvenComposition(tuple(self.c))
            object.__setattr__(self, "c", c)
        p, q, n = self.p, self.q, self.n
        for t in (p, q):
            if t % 2 == 0 or not is_prime(t):
                raise ValueError(f"{t} is not an odd prime")
        if p == q:
            raise ValueError("p and q must be distinct")
        if n % (p * q):
            raise ValueError(f"p*q={p * q} does not divide n={n}")
        r = n // (p * q)
        if r < 2:
            raise ValueError(f"r = n/(pq) must be >= 2, got {r}")
        if self.c.total != r:
            raise ValueError(f"composition {self.c} does not sum to r={r}")
        if self.s not in (None, 1, -1):
            raise ValueError(f"s must be +1 or -1, got {self.s}")

    @property
    def r(self) -> int:
        return self.n // (self.p * self.q)

    @property
    def m(self) -> int:
        return self.c.half_count

    def with_sign(self, s: int) -> "ConstructionSpec":
        return ConstructionSpec(self.n, self.p, self.q, self.c, s)

    def count(self) -> int:
        """Number of polynomials over both signs: 2^(r_o p + r_e q)."""
        return 1 << (self.c.r_o * self.p + self.c.r_e * self.q)

    def count_per_sign(self) -> int:
        return self.count() // 2

    def __str__(self) -> str:
        out = f"n={self.n} p={self.p} q={self.q} c={self.c}"
        if self.s is not None:
            out += f" s={'+1' if self.s == 1 else '-1'}"
        return out

    @classmethod
    def parse(cls, text: str) -> "ConstructionSpec":
        fields = dict(re.findall(r"(\w+)=(\S+)", text))
        try:
            s = int(fields["s"]) if "s" in fields else None
            return cls(int(fields["n"]), int(fields["p"]), int(fields["q"]),
                       EvenComposition.parse(fields["c"]), s)
        except KeyError as exc:
            raise ValueError(f"missing field {exc} in spec {text!r}") from None

    # sub-block descriptors: (kind, length, sign factor relative to s)
    def a_subblocks(self, i: int) -> list[tuple[str, int, int]]:
        out = []
        for j, rj in enumerate(self.c.parts, start=1):
            if j == 1:
                out.append(("o", rj + 1, _alt(i + 1)))
            elif j % 2:
                out.append(("e", rj + 1, _alt(i)))
            else:
                out.append(("z", rj - 1, 0))
        return out

    def b_subblocks(self, i: int) -> list[tuple[str, int, int]]:
        out = []
        for j, rj in enumerate(self.c.parts, start=1):
            if j % 2:
                out.append(("z", rj - 1, 0))
            else:
                out.append(("e", rj + 1, _alt(i)))
        return out

    @cached_property
    def layout(self) -> "Layout":
        return Layout.build(self)


@dataclass(frozen=True)
class ChoiceVector:
    """Alphabet indices: a_choices[i-1] over odd j, b_choices[i-1] over even j.

    The A_{1,1} entry is the index inside the restricted alphabet of members
    that start with s (size 2^(r_1 - 1)).
    """

    a_choices: tuple[tuple[int, ...], ...]
    b_choices: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Layout:
    """Flat arrays describing the free sub-blocks of a spec, in digit order."""

    target: np.ndarray
    offset: np.ndarray
    length: np.ndarray
    sign: np.ndarray
    odd: np.ndarray
    radix: np.ndarray
    base: np.ndarray

    @classmethod
    def build(cls, spec: ConstructionSpec) -> "Layout":
        rows = []
        for i in range(1, spec.p + 1):
            off = (i - 1) * spec.r
            for j, (kind, k, sf) in enumerate(spec.a_subblocks(i), start=1):
                if kind != "z":
                    size = alphabet_size(k)
                    if i == 1 and j == 1:
                        # must start with s: top half of the index range
                        rows.append((0, off, k, sf, 1, size // 2, size // 2))
                    else:
                        rows.append((0, off, k, sf, int(kind == "o"), size, 0))
                off += k
        for i in range(1, spec.q + 1):
            off = (i - 1) * spec.r
            for kind, k, sf in spec.b_subblocks(i):
                if kind != "z":
                    rows.append((1, off, k, sf, 0, alphabet_size(k), 0))
                off += k
        cols = list(zip(*rows))
        return cls(*(np.array(col, dtype=np.int64) for col in cols))

    def per_sign(self) -> int:
        total = 1
        for x in self.radix:
            total *= int(x)
        return total


def _check_choices(spec: ConstructionSpec, choices: ChoiceVector) -> None:
    if len(choices.a_choices) != spec.p or len(choices.b_choices) != spec.q:
        raise ValueError("choice vector has the wrong number of blocks")
    m = spec.m
    for i, row in enumerate(choices.a_choices, start=1):
        if len(row) != m:
            raise ValueError(f"A_{i} needs {m} choices, got {len(row)}")
    for i, row in enumerate(choices.b_choices, start=1):
        if len(row) != m:
            raise ValueError(f"B_{i} needs {m} choices, got {len(row)}")


def _require_sign(spec: ConstructionSpec) -> int:
    if spec.s is None:
        raise ValueError("spec has no sign s")
    return spec.s


def a_blocks(spec: ConstructionSpec, choices: ChoiceVector) -> list[list[TernarySeq]]:
    s = _require_sign(spec)
    _check_choices(spec, choices)
    blocks = []
    for i in range(1, spec.p + 1):
        subs = []
        picks = iter(choices.a_choices[i - 1])
        for j, (kind, k, sf) in enumerate(spec.a_subblocks(i), start=1):
            if kind == "z":
                subs.append(zero_block(k))
                continue
            idx = next(picks)
            size = alphabet_size(k)
            if i == 1 and j == 1:
                if not 0 <= idx < size // 2:
                    raise ValueError(f"A_1,1 index {idx} outside 0..{size // 2 - 1}")
                subs.append(s_o_at(k, sf * s, idx + size // 2))
            elif kind == "o":
                subs.append(s_o_at(k, sf * s, idx))
            else:
                subs.append(s_e_at(k, sf * s, idx))
        blocks.append(subs)
    return blocks


def b_blocks(spec: ConstructionSpec, choices: ChoiceVector) -> list[list[TernarySeq]]:
    s = _require_sign(spec)
    _check_choices(spec, choices)
    blocks = []
    for i in range(1, spec.q + 1):
        subs = []
        picks = iter(choices.b_choices[i - 1])
        for kind, k, sf in spec.b_subblocks(i):
            if kind == "z":
                subs.append(zero_block(k))
            else:
                subs.append(s_e_at(k, sf * s, next(picks)))
        blocks.append(subs)
    return blocks


def build_f1(spec: ConstructionSpec, choices: ChoiceVector) -> TernarySeq:
    seq = concat(concat(subs) for subs in a_blocks(spec, choices))
    assert len(seq) == spec.p * spec.r
    return seq


def build_f2(spec: ConstructionSpec, choices: ChoiceVector) -> TernarySeq:
    seq = concat(concat(subs) for subs in b_blocks(spec, choices))
    assert len(seq) == spec.q * spec.r
    return shift_right_negate(seq)


def combine(spec: ConstructionSpec, f1: TernarySeq, f2: TernarySeq) -> tuple[int, ...]:
    """Coefficients of f1*Phi_q(-z^{pr}) + f2*Phi_p(-z^{qr}), length n."""
    n, pr, qr = spec.n, spec.p * spec.r, spec.q * spec.r
    g1 = compose_neg_power(spec.q, pr)
    g2 = compose_neg_power(spec.p, qr)
    out = [0] * n
    for e, c in enumerate(g1.coeffs):
        if c:
            for i, v in enumerate(f1.values):
                out[e + i] += c * v
    for e, c in enumerate(g2.coeffs):
        if c:
            for i, v in enumerate(f2.values):
                out[e + i] += c * v
    return tuple(out)


def _verified(spec: ConstructionSpec, values: Sequence[int]) -> ReinhardtPolynomial:
    if not all(v in (-1, 0, 1) for v in values) or not is_reinhardt(values, spec.n):
        raise ConstructionError(f"construction produced a non-Reinhardt polynomial for {spec}")
    return ReinhardtPolynomial(values, spec.n, validate=False)


def assemble(spec: ConstructionSpec, choices: ChoiceVector) -> ReinhardtPolynomial:
    """Build F and re-verify every Reinhardt condition."""
    return _verified(spec, combine(spec, build_f1(spec, choices), build_f2(spec, choices)))


# -- explicit blocks -------------------------------------------------------

def _split(block: TernarySeq, lengths: Sequence[int]) -> list[TernarySeq]:
    out, pos = [], 0
    for k in lengths:
        out.append(block[pos:pos + k])
        pos += k
    return out


def check_blocks(spec: ConstructionSpec, A: Sequence, B: Sequence, *,
                 strict: bool = True) -> None:
    """Validate whole blocks A_i and B_i (pre-shift) against the alphabets.

    ``strict`` also enforces that A_1 starts with s.
    """
    s = _require_sign(spec)
    A = [as_seq(a) for a in A]
    B = [as_seq(b) for b in B]
    if len(A) != spec.p or len(B) != spec.q:
        raise ValueError(f"need {spec.p} A blocks and {spec.q} B blocks")
    for i, block in enumerate(A, start=1):
        desc = spec.a_subblocks(i)
        if len(block) != spec.r:
            raise ValueError(f"A_{i} has length {len(block)}, expected {spec.r}")
        for j, (sub, (kind, k, sf)) in enumerate(zip(_split(block, [d[1] for d in desc]), desc), start=1):
            ok = {"o": in_s_o, "e": in_s_e}.get(kind)
            if (ok is None and sub.nonzero_count()) or (ok is not None and not ok(sub, sf * s)):
                raise ValueError(f"A_{i},{j} = {sub} is not in its alphabet")
    if strict and A[0][0] != s:
        raise ValueError("A_1,1 must begin with s")
    for i, block in enumerate(B, start=1):
        desc = spec.b_subblocks(i)
        if len(block) != spec.r:
            raise ValueError(f"B_{i} has length {len(block)}, expected {spec.r}")
        for j, (sub, (kind, k, sf)) in enumerate(zip(_split(block, [d[1] for d in desc]), desc), start=1):
            if (kind == "z" and sub.nonzero_count()) or (kind == "e" and not in_s_e(sub, sf * s)):
                raise ValueError(f"B_{i},{j} = {sub} is not in its alphabet")


def from_blocks(spec: ConstructionSpec, A: Sequence, B: Sequence, *,
                strict: bool = True) -> ReinhardtPolynomial:
    """Assemble from explicit blocks; B blocks are given before the R shift."""
    check_blocks(spec, A, B, strict=strict)
    f1 = concat(as_seq(a) for a in A)
    f2 = shift_right_negate(concat(as_seq(b) for b in B))
    return _verified(spec, combine(spec, f1, f2))


def choices_from_blocks(spec: ConstructionSpec, A: Sequence, B: Sequence) -> ChoiceVector:
    check_blocks(spec, A, B, strict=True)
    a_rows = []
    for i, block in enumerate(A, start=1):
        desc = spec.a_subblocks(i)
        row = []
        for j, (sub, (kind, k, _)) in enumerate(zip(_split(as_seq(block), [d[1] for d in desc]), desc), start=1):
            if kind == "z":
                continue
            idx = alphabet_index(sub)
            if i == 1 and j == 1:
                idx -= alphabet_size(k) // 2
            row.append(idx)
        a_rows.append(tuple(row))
    b_rows = []
    for i, block in enumerate(B, start=1):
        desc = spec.b_subblocks(i)
        row = [alphabet_index(sub) for sub, (kind, _, _) in
               zip(_split(as_seq(block), [d[1] for d in desc]), desc) if kind != "z"]
        b_rows.append(tuple(row))
    return ChoiceVector(tuple(a_rows), tuple(b_rows))


# -- mixed-radix numbering ---------------------------------------------------

def choices_to_index(spec: ConstructionSpec, choices: ChoiceVector) -> int:
    """Index within one sign; digits in order A_1..A_p then B_1..B_q."""
    _check_choices(spec, choices)
    digits = [d for row in choices.a_choices for d in row]
    digits += [d for row in choices.b_choices for d in row]
    idx = 0
    for d, radix in zip(digits, spec.layout.radix):
        if not 0 <= d < radix:
            raise ValueError(f"choice digit {d} outside 0..{radix - 1}")
        idx = idx * int(radix) + d
    return idx


def index_to_choices(spec: ConstructionSpec, index: int) -> ChoiceVector:
    radix = [int(x) for x in spec.layout.radix]
    total = spec.layout.per_sign()
    if not 0 <= index < total:
        raise ValueError(f"choice index {index} outside 0..{total - 1}")
    digits = []
    for rad in reversed(radix):
        index, d = divmod(index, rad)
        digits.append(d)
    digits.reverse()
    m = spec.m
    a = tuple(tuple(digits[i * m:(i + 1) * m]) for i in range(spec.p))
    off = spec.p * m
    b = tuple(tuple(digits[off + i * m: off + (i + 1) * m]) for i in range(spec.q))
    return ChoiceVector(a, b)


def global_index(spec: ConstructionSpec, choices: ChoiceVector) -> int:
    """Index over both signs: s=+1 occupies the first half."""
    s = _require_sign(spec)
    return (0 if s == 1 else spec.count_per_sign()) + choices_to_index(spec, choices)


def assemble_range(spec: ConstructionSpec, s: int, start: int, count: int) -> np.ndarray:
    """(count, n) int8 coefficients for consecutive choice indices, verified."""
    lay = spec.layout
    out = _kernels.assemble_batch(start, count, s, spec.n, spec.p * spec.r, spec.q * spec.r,
                                  lay.target, lay.offset, lay.length, lay.sign, lay.odd,
                                  lay.radix, lay.base)
    _verify_batch(spec, out)
    return out


def _verify_batch(spec: ConstructionSpec, coeffs: np.ndarray) -> None:
    if coeffs.size == 0:
        return
    a = coeffs.astype(np.int64)
    cs = np.cumsum(a, axis=1)
    ok = (np.abs(a).max(axis=1) <= 1) & (cs.min(axis=1) >= -1) & (cs.max(axis=1) <= 1)
    ok &= (cs.max(axis=1) - cs.min(axis=1)) <= 1
    ok &= (np.count_nonzero(a, axis=1) % 2) == 1
    ok &= batch_divisible(a, spec.n)
    if not ok.all():
        bad = int(np.argmin(ok))
        raise ConstructionError(f"non-Reinhardt output at batch row {bad} for {spec}")


def enumerate_spec(spec: ConstructionSpec, *, signs: Sequence[int] = (1, -1),
                   batch: int = 1 << 14) -> Iterator[ReinhardtPolynomial]:
    """Every polynomial of the spec, sign by sign, in choice-index order."""
    total = spec.count_per_sign()
    for s in signs:
        for start in range(0, total, batch):
            rows = assemble_range(spec, s, start, min(batch, total - start))
            for row in rows:
                yield ReinhardtPolynomial(TernarySeq(tuple(int(v) for v in row)), spec.n,
                                          validate=False)


def enumerate_range(spec: ConstructionSpec, s: int, start: int, stop: int,
                    batch: int = 1 << 14) -> Iterator[ReinhardtPolynomial]:
    """Worker-sized slice of :func:`enumerate_spec` (indices start..stop-1)."""
    for lo in range(start, stop, batch):
        for row in assemble_range(spec, s, lo, min(batch, stop - lo)):
            yield ReinhardtPolynomial(TernarySeq(tuple(int(v) for v in row)), spec.n,
                                      validate=False)


# -- the p <-> q symmetry ------------------------------------------------------

def _add_at(block: TernarySeq, pos: int, delta: int) -> TernarySeq:
    v = list(block.values)
    v[pos] += delta
    return TernarySeq(tuple(v))


def symmetry_swap(spec: ConstructionSpec, A: Sequence, B: Sequence):
    """Blocks for the same polygon with the roles of p and q exchanged.

    Returns ``(spec', A', B')`` where spec' has p and q swapped and the
    composition reversed.  A' has q blocks and B' has p blocks (B' is given
    before the R shift, like B).
    """
    s = _require_sign(spec)
    A = [as_seq(a) for a in A]
    B = [as_seq(b) for b in B]
    check_blocks(spec, A, B, strict=False)
    A_t = [_add_at(a, 0, _alt(i) * s) for i, a in enumerate(A, start=1)]
    B_t = [_add_at(b, len(b) - 1, _alt(i) * s) for i, b in enumerate(B, start=1)]
    new_A = [-(B_t[len(B_t) - i].reversed()) for i in range(1, len(B_t) + 1)]
    new_B = [-(A_t[len(A_t) - i].reversed()) for i in range(1, len(A_t) + 1)]
    new_spec = ConstructionSpec(spec.n, spec.q, spec.p, spec.c.reversed(), s)
    return new_spec, new_A, new_B


def tilde_blocks(spec: ConstructionSpec, A: Sequence, B: Sequence):
    """The intermediate modified blocks (first entry of A_i, last of B_i shifted)."""
    s = _require_sign(spec)
    A_t = [_add_at(as_seq(a), 0, _alt(i) * s) for i, a in enumerate(A, start=1)]
    B_t = [_add_at(as_seq(b), len(as_seq(b)) - 1, _alt(i) * s) for i, b in enumerate(B, start=1)]
    return A_t, B_t


def blocks_for(spec: ConstructionSpec, choices: ChoiceVector):
    """Whole blocks (A_1..A_p, B_1..B_q) for a choice vector."""
    return ([concat(subs) for subs in a_blocks(spec, choices)],
            [concat(subs) for subs in b_blocks(spec, choices)])


def tilde_polynomial(spec: ConstructionSpec, A_t: Sequence, B_t: Sequence) -> tuple[int, ...]:
    """Recombine modified blocks; equals the original F."""
    f1 = concat(as_seq(a) for a in A_t)
    f2 = shift_right_negate(concat(as_seq(b) for b in B_t))
    return combine(spec, f1, f2)
