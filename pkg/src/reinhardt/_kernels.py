"""Compiled inner loops for bulk enumeration.

These mirror the pure-Python paths in ``construct`` and ``classify`` and are
cross-checked against them in the test suite.  Layout arrays describe the free
sub-blocks of one construction spec in mixed-radix order, most significant
digit first (see ``construct.Layout``).
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _decode(index, s, n, pr, qr, target, offset, length, sign, odd, radix, base,
            f1, braw, F):
    """Fill F (length n) for the given choice index; f1/braw are scratch."""
    for t in range(pr):
        f1[t] = 0
    for t in range(qr):
        braw[t] = 0
    idx = index
    for t in range(target.shape[0] - 1, -1, -1):
        digit = idx % radix[t]
        idx //= radix[t]
        pidx = base[t] + digit
        k = length[t]
        mask = (pidx << 1) | ((_popcount(pidx) & 1) ^ odd[t])
        b = sign[t] * s
        off = offset[t]
        for i in range(k):
            if (mask >> (k - 1 - i)) & 1:
                if target[t] == 0:
                    f1[off + i] = b
                else:
                    braw[off + i] = b
                b = -b
    # f2 = R(braw); F = f1 * Phi_q(-z^pr) + f2 * Phi_p(-z^qr)
    for t in range(n):
        a = f1[t % pr]
        if (t // pr) & 1:
            a = -a
        j = t % qr
        if j == 0:
            bval = -braw[qr - 1]
        else:
            bval = braw[j - 1]
        if (t // qr) & 1:
            bval = -bval
        F[t] = a + bval


@njit(cache=True)
def assemble_batch(start, count, s, n, pr, qr, target, offset, length, sign, odd,
                   radix, base):
    out = np.zeros((count, n), dtype=np.int8)
    f1 = np.zeros(pr, dtype=np.int8)
    braw = np.zeros(qr, dtype=np.int8)
    F = np.zeros(n, dtype=np.int8)
    for c in range(count):
        _decode(start + c, s, n, pr, qr, target, offset, length, sign, odd, radix,
                base, f1, braw, F)
        for t in range(n):
            out[c, t] = F[t]
    return out


@njit(cache=True)
def _booth(seq, m, fail):
    """Least rotation start of seq[0:m] (seq has room for 2m entries)."""
    for j in range(m):
        seq[m + j] = seq[j]
    for j in range(2 * m):
        fail[j] = -1
    k = 0
    for j in range(1, 2 * m):
        sj = seq[j]
        i = fail[j - k - 1]
        while i != -1 and sj != seq[k + i + 1]:
            if sj < seq[k + i + 1]:
                k = j - i - 1
            i = fail[i]
        if sj != seq[k + i + 1]:
            if sj < seq[k]:
                k = j
            fail[j - k] = -1
        else:
            fail[j - k] = i + 1
    return k % m


@njit(cache=True)
def classify_one(F, n, period_divs, redm, gaps, rgaps, fail, key, acc):
    """Verify F and compute its labels.

    Returns (status, period, reciprocal) and writes the canonical key (vertex
    bitmask of the canonical composition) into ``key``.  status is 0 when any
    Reinhardt condition fails.
    """
    # ternary, alternating, odd count
    last = 0
    ell = 0
    for t in range(n):
        v = F[t]
        if v != 0:
            if v > 1 or v < -1 or v == last:
                return 0, 0, 0
            last = v
            gaps[ell] = t
            ell += 1
    if ell % 2 == 0:
        return 0, 0, 0
    # Phi_{2n} divisibility: sum of the reduction rows of the nonzero terms
    D = redm.shape[1]
    for d in range(D):
        acc[d] = 0
    for e in range(ell):
        t = gaps[e]
        if F[t] > 0:
            for d in range(D):
                acc[d] += redm[t, d]
        else:
            for d in range(D):
                acc[d] -= redm[t, d]
    for d in range(D):
        if acc[d] != 0:
            return 0, 0, 0
    # antiperiod: least d (n/d odd) with v_k = -v_{k+d}
    period = 0
    for di in range(period_divs.shape[0]):
        d = period_divs[di]
        ok = True
        for k in range(n - d):
            if F[k] != -F[k + d]:
                ok = False
                break
        if ok:
            period = d
            break
    # gaps from the nonzero positions
    first = gaps[0]
    for e in range(ell - 1):
        gaps[e] = gaps[e + 1] - gaps[e]
    gaps[ell - 1] = n - gaps[ell - 1] + first
    for e in range(ell):
        rgaps[e] = gaps[ell - 1 - e]
    kf = _booth(gaps, ell, fail)
    kr = _booth(rgaps, ell, fail)
    cmp = 0
    for e in range(ell):
        a = gaps[kf + e]
        b = rgaps[kr + e]
        if a != b:
            cmp = -1 if a < b else 1
            break
    recip = 1 if cmp == 0 else 0
    for w in range(key.shape[0]):
        key[w] = 0
    pos = 0
    for e in range(ell):
        if cmp <= 0:
            part = gaps[kf + e]
        else:
            part = rgaps[kr + e]
        key[pos >> 6] |= np.uint64(1) << np.uint64(pos & 63)
        pos += part
    return 1, period, recip


@njit(cache=True)
def census_chunk(start, count, s, n, pr, qr, target, offset, length, sign, odd,
                 radix, base, period_divs, redm, words):
    """Assemble and classify ``count`` consecutive choice indices."""
    keys = np.zeros((count, words), dtype=np.uint64)
    periods = np.zeros(count, dtype=np.int32)
    recips = np.zeros(count, dtype=np.uint8)
    status = np.zeros(count, dtype=np.uint8)
    f1 = np.zeros(pr, dtype=np.int8)
    braw = np.zeros(qr, dtype=np.int8)
    F = np.zeros(n, dtype=np.int8)
    gaps = np.zeros(2 * n, dtype=np.int64)
    rgaps = np.zeros(2 * n, dtype=np.int64)
    fail = np.zeros(2 * n, dtype=np.int64)
    key = np.zeros(words, dtype=np.uint64)
    acc = np.zeros(redm.shape[1], dtype=np.int64)
    for c in range(count):
        _decode(start + c, s, n, pr, qr, target, offset, length, sign, odd, radix,
                base, f1, braw, F)
        st, per, rec = classify_one(F, n, period_divs, redm, gaps, rgaps, fail, key, acc)
        status[c] = st
        periods[c] = per
        recips[c] = rec
        for w in range(words):
            keys[c, w] = key[w]
    return keys, periods, recips, status


@njit(cache=True)
def classify_batch(coeffs, n, period_divs, redm, words):
    count = coeffs.shape[0]
    keys = np.zeros((count, words), dtype=np.uint64)
    periods = np.zeros(count, dtype=np.int32)
    recips = np.zeros(count, dtype=np.uint8)
    status = np.zeros(count, dtype=np.uint8)
    gaps = np.zeros(2 * n, dtype=np.int64)
    rgaps = np.zeros(2 * n, dtype=np.int64)
    fail = np.zeros(2 * n, dtype=np.int64)
    key = np.zeros(words, dtype=np.uint64)
    acc = np.zeros(redm.shape[1], dtype=np.int64)
    F = np.zeros(n, dtype=np.int8)
    for c in range(count):
        for t in range(n):
            F[t] = coeffs[c, t]
        st, per, rec = classify_one(F, n, period_divs, redm, gaps, rgaps, fail, key, acc)
        status[c] = st
        periods[c] = per
        recips[c] = rec
        for w in range(words):
            keys[c, w] = key[w]
    return keys, periods, recips, status


def key_words(n: int) -> int:
    return (n + 63) // 64


def key_to_parts(key, n: int) -> tuple[int, ...]:
    """Decode a vertex bitmask key back to its composition."""
    pos = [i for i in range(n) if (int(key[i >> 6]) >> (i & 63)) & 1]
    gaps = [b - a for a, b in zip(pos, pos[1:])]
    gaps.append(n - pos[-1] + pos[0])
    return tuple(gaps)


def parts_to_key(parts, n: int) -> np.ndarray:
    key = np.zeros(key_words(n), dtype=np.uint64)
    pos = 0
    for part in parts:
        key[pos >> 6] |= np.uint64(1) << np.uint64(pos & 63)
        pos += part
    return key
