"""Exact integer polynomial arithmetic around cyclotomic polynomials.

Coefficients are Python ints (index = exponent).  Nothing here ever touches
floating point.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .seqcore import TernarySeq


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = [int(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_seq(cls, seq: TernarySeq | Sequence[int]) -> "IntPolynomial":
        return cls(tuple(seq))

    @classmethod
    def monomial(cls, exp: int, coeff: int = 1) -> "IntPolynomial":
        return cls((0,) * exp + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def padded(self, length: int) -> tuple[int, ...]:
        if len(self.coeffs) > length:
            raise ValueError(f"degree {self.degree} does not fit in length {length}")
        return self.coeffs + (0,) * (length - len(self.coeffs))

    def is_ternary(self) -> bool:
        return all(c in (-1, 0, 1) for c in self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPolynomial(tuple(out))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPolynomial(())
        out = [0] * (len(a) + len(b) - 1)
        # skip zero coefficients: the factors here are usually sparse
        bnz = [(j, y) for j, y in enumerate(b) if y]
        for i, x in enumerate(a):
            if x:
                for j, y in bnz:
                    out[i + j] += x * y
        return IntPolynomial(tuple(out))

    def divmod_monic(self, divisor: "IntPolynomial") -> tuple["IntPolynomial", "IntPolynomial"]:
        """Quotient and remainder by a monic divisor, exactly over Z."""
        d = divisor.coeffs
        if not d:
            raise ZeroDivisionError("division by the zero polynomial")
        if d[-1] != 1:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dd = len(d) - 1
        if len(rem) <= dd:
            return IntPolynomial(()), IntPolynomial(tuple(rem))
        quot = [0] * (len(rem) - dd)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k]
            if c:
                quot[k - dd] = c
                base = k - dd
                for j in range(dd):
                    if d[j]:
                        rem[base + j] -= c * d[j]
                rem[k] = 0
        return IntPolynomial(tuple(quot)), IntPolynomial(tuple(rem[:dd]))

    def __str__(self) -> str:
        if self.is_ternary() and self.coeffs:
            return str(TernarySeq(self.coeffs))
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c}·z^{e}" for e, c in enumerate(self.coeffs) if c)


ZERO = IntPolynomial(())
ONE = IntPolynomial((1,))


def _as_poly(f) -> IntPolynomial:
    if isinstance(f, IntPolynomial):
        return f
    return IntPolynomial(tuple(f))


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def prime_factors(m: int) -> list[int]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def odd_prime_divisors(n: int) -> list[int]:
    return [p for p in prime_factors(n) if p != 2]


def divisors(m: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= m:
        if m % d == 0:
            small.append(d)
            if d * d != m:
                large.append(m // d)
        d += 1
    return small + large[::-1]


_cyclo_lock = threading.Lock()


@lru_cache(maxsize=None)
def _cyclotomic(m: int) -> IntPolynomial:
    num = IntPolynomial((-1,) + (0,) * (m - 1) + (1,))
    for d in divisors(m)[:-1]:
        num, rem = num.divmod_monic(_cyclotomic(d))
        assert rem.is_zero(), f"inexact division building Phi_{m}"
    return num


def cyclotomic(m: int) -> IntPolynomial:
    """Phi_m(z), memoized per process."""
    if m < 1:
        raise ValueError(f"cyclotomic index must be >= 1, got {m}")
    with _cyclo_lock:
        return _cyclotomic(m)


def compose_neg_power(p: int, k: int) -> IntPolynomial:
    """Phi_p(-z^k) for an odd prime p: 1 - z^k + z^2k - ... + z^{(p-1)k}."""
    if p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    coeffs = [0] * ((p - 1) * k + 1)
    for i in range(p):
        coeffs[i * k] = -1 if i % 2 else 1
    return IntPolynomial(tuple(coeffs))


def poly_mul_add(f1, g1, f2, g2) -> IntPolynomial:
    """f1*g1 + f2*g2 over the integers."""
    return _as_poly(f1) * _as_poly(g1) + _as_poly(f2) * _as_poly(g2)


def divides_cyclotomic(F, n: int) -> bool:
    """True iff Phi_{2n} divides F, by exact remainder."""
    F = _as_poly(F)
    if F.is_zero():
        raise ValueError("divisibility of the zero polynomial is vacuous")
    _, rem = F.divmod_monic(cyclotomic(2 * n))
    return rem.is_zero()


@lru_cache(maxsize=64)
def reduction_matrix(n: int) -> np.ndarray:
    """Row k holds z^k mod Phi_{2n} for 0 <= k < n.

    ``coeffs @ reduction_matrix(n)`` is then the exact remainder of a batch of
    degree < n polynomials.  Entries of z^k mod Phi_{2n} stay small, so int64
    is safe for ternary inputs.
    """
    phi = cyclotomic(2 * n)
    deg = phi.degree
    rows = np.zeros((n, deg), dtype=np.int64)
    for k in range(n):
        _, rem = IntPolynomial.monomial(k).divmod_monic(phi)
        c = rem.coeffs
        if c and max(abs(x) for x in c) > 2**40:
            raise OverflowError(f"reduction entries too large for n={n}")
        rows[k, : len(c)] = c
    rows.setflags(write=False)
    return rows


def batch_divisible(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Row-wise Phi_{2n} divisibility for an (N, n) integer array."""
    red = reduction_matrix(n)
    a = np.asarray(coeffs)
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(red).sum(axis=0).max(initial=0))
    if bound < 2 ** 53:
        # every partial sum is an integer below 2^53, so float64 (BLAS) is exact
        rem = a.astype(np.float64) @ red.astype(np.float64)
    else:
        rem = a.astype(np.int64) @ red
    return ~rem.any(axis=1)


# -- exact linear algebra over Q ---------------------------------------------

def solve_rational(rows: Sequence[Sequence[int]], rhs: Sequence[int]):
    """Solve A x = b exactly over Q.

    Returns ``(x0, kernel)`` with ``x0`` a particular solution (free variables
    set to zero) and ``kernel`` a list of basis vectors of the null space, or
    ``None`` when the system is inconsistent.
    """
    ncols = len(rows[0]) if rows else 0
    M = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col] != 0:
                f = M[i][col]
                Mi, Mr = M[i], M[r]
                M[i] = [a - f * b for a, b in zip(Mi, Mr)]
        pivots.append(col)
        r += 1
        if r == len(M):
            break
    for i in range(r, len(M)):
        if M[i][-1] != 0:
            return None
    x0 = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        x0[col] = M[i][-1]
    free = [c for c in range(ncols) if c not in set(pivots)]
    kernel = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, col in enumerate(pivots):
            v[col] = -M[i][fcol]
        kernel.append(v)
    return x0, kernel


def _decomposition_system(F: IntPolynomial, n: int, g1: IntPolynomial, g2: IntPolynomial,
                          len1: int, len2: int):
    total = max(n, len1 + g1.degree, len2 + g2.degree, len(F.coeffs))
    rows = [[0] * (len1 + len2) for _ in range(total)]
    for j in range(len1):
        for e, c in enumerate(g1.coeffs):
            if c:
                rows[j + e][j] += c
    for j in range(len2):
        for e, c in enumerate(g2.coeffs):
            if c:
                rows[j + e][len1 + j] += c
    rhs = list(F.coeffs) + [0] * (total - len(F.coeffs))
    return rows, rhs


def _ternary_by_residue(x0: list[Fraction], n: int, p: int, q: int, len1: int, len2: int):
    """Pick the kernel shift per residue class mod r; None if impossible.

    With the natural caps the kernel is spanned by
    h(z)*((z^{pr}+1)/(z^r+1), -(z^{qr}+1)/(z^r+1)) with deg h < r, and each
    coefficient of h only touches indices congruent to it mod r.
    """
    r = n // (p * q)
    f1, f2 = x0[:len1], x0[len1:]
    h = [Fraction(0)] * r
    for j in range(r):
        slots = [(f1, j + i * r, 1 if i % 2 == 0 else -1) for i in range(p)]
        slots += [(f2, j + i * r, -1 if i % 2 == 0 else 1) for i in range(q)]
        candidates = set()
        for arr, idx, sign in slots:
            for t in (-1, 0, 1):
                candidates.add((t - arr[idx]) * sign)
        ok = [c for c in candidates
              if all(arr[idx] + sign * c in (-1, 0, 1) for arr, idx, sign in slots)]
        if not ok:
            return None
        h[j] = min(ok, key=lambda c: (abs(c), c))
    g1 = [Fraction(0)] * len1
    g2 = [Fraction(0)] * len2
    for j in range(r):
        for i in range(p):
            g1[j + i * r] = f1[j + i * r] + (1 if i % 2 == 0 else -1) * h[j]
        for i in range(q):
            g2[j + i * r] = f2[j + i * r] - (1 if i % 2 == 0 else -1) * h[j]
    return g1, g2


def _ternary_by_kernel_search(x0, kernel, limit: int = 3**12):
    if 3 ** len(kernel) > limit:
        return None
    for combo in product((0, -1, 1), repeat=len(kernel)):
        x = list(x0)
        for c, v in zip(combo, kernel):
            if c:
                x = [a + c * b for a, b in zip(x, v)]
        if all(v in (-1, 0, 1) for v in x):
            return x
    return None


def decompose_two_term(F, n: int, p: int, q: int,
                       len_f1: int | None = None, len_f2: int | None = None):
    """Solve F = f1*Phi_q(-z^{n/q}) + f2*Phi_p(-z^{n/p}) with ternary f1, f2.

    Degree caps default to deg f1 < n/q and deg f2 < n/p.  Returns
    ``(f1, f2)`` or ``None``.  ``None`` is certain when the linear system is
    inconsistent; with the default caps the ternary search over the solution
    space is exhaustive as well.  With custom caps the kernel search is
    bounded (coefficients in {-1, 0, 1}) and a ``None`` is only "not found".
    """
    F = _as_poly(F)
    if p == q:
        raise ValueError("p and q must be distinct")
    for t in (p, q):
        if t % 2 == 0 or not is_prime(t):
            raise ValueError(f"{t} is not an odd prime")
        if n % t:
            raise ValueError(f"{t} does not divide n={n}")
    if n % (p * q):
        raise ValueError(f"p*q does not divide n={n}")
    natural = len_f1 is None and len_f2 is None
    len1 = n // q if len_f1 is None else len_f1
    len2 = n // p if len_f2 is None else len_f2
    g1 = compose_neg_power(q, n // q)
    g2 = compose_neg_power(p, n // p)
    rows, rhs = _decomposition_system(F, n, g1, g2, len1, len2)
    solved = solve_rational(rows, rhs)
    if solved is None:
        return None
    x0, kernel = solved
    x = None
    if natural:
        r = n // (p * q)
        assert len(kernel) == r, f"unexpected kernel dimension {len(kernel)} != {r}"
        picked = _ternary_by_residue(x0, n, p, q, len1, len2)
        if picked is not None:
            x = picked[0] + picked[1]
    else:
        x = _ternary_by_kernel_search(x0, kernel)
    if x is None:
        return None
    f1 = IntPolynomial(tuple(int(v) for v in x[:len1]))
    f2 = IntPolynomial(tuple(int(v) for v in x[len1:]))
    if poly_mul_add(f1, g1, f2, g2) != F:
        raise AssertionError("decomposition does not reproduce F")
    return f1, f2


def power_sum(terms: Iterable[tuple[IntPolynomial, IntPolynomial]]) -> IntPolynomial:
    acc = ZERO
    for f, g in terms:
        acc = acc + f * g
    return acc
