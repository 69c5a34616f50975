"""Compiled kernels for traces of Frobenius on y^2 = x^3 + A x + B over F_q.

Small q use the direct Legendre-symbol sum.  Large q use baby-step
giant-step on random points of the curve or of its quadratic twist; a point
with x-coordinate x0 and f = x0^3 + A x0 + B lives on the twist-by-f model as
(x0 f, f^2), so no modular square roots are needed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DIRECT_LIMIT = 1_000


@njit(cache=True)
def _powmod(b, e, m):
    r = 1
    b %= m
    while e > 0:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@njit(cache=True)
def _inv(a, m):
    # extended Euclid; a is a unit mod the prime m
    r0, r1 = a % m, m
    s0, s1 = 1, 0
    while r1:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    return s0 % m


@njit(cache=True)
def direct_trace(A, B, q):
    """a_q = -sum_x legendre(x^3 + A x + B), via a table of squares."""
    is_sq = np.zeros(q, dtype=np.int8)
    for y in range(1, q):
        is_sq[y * y % q] = 1
    total = 0
    for x in range(q):
        f = ((x * x % q) * x + A * x + B) % q
        if f != 0:
            total += 1 if is_sq[f] else -1
    return -total


# Points are (x, y, inf) on y^2 = x^3 + a x + b.


@njit(cache=True)
def _add(x1, y1, i1, x2, y2, i2, a, q):
    if i1:
        return x2, y2, i2
    if i2:
        return x1, y1, i1
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return 0, 0, True
        lam = (3 * x1 % q * x1 + a) % q * _inv(2 * y1 % q, q) % q
    else:
        lam = (y2 - y1) % q * _inv((x2 - x1) % q, q) % q
    x3 = (lam * lam - x1 - x2) % q
    y3 = (lam * (x1 - x3) - y1) % q
    return x3, y3, False


@njit(cache=True)
def _mul(k, x, y, inf, a, q):
    rx, ry, ri = 0, 0, True
    if k < 0:
        k = -k
        y = (-y) % q
    while k > 0:
        if k & 1:
            rx, ry, ri = _add(rx, ry, ri, x, y, inf, a, q)
        x, y, inf = _add(x, y, inf, x, y, inf, a, q)
        k >>= 1
    return rx, ry, ri


@njit(cache=True)
def _isqrt(n):
    r = int(np.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def _candidates(x0, y0, a, q, bound, out):
    """Fill ``out`` with every s in [-bound, bound] with [q+1-s]P = O; return count."""
    m = _isqrt(2 * bound) + 1
    bx = np.empty(m + 1, dtype=np.int64)
    by = np.empty(m + 1, dtype=np.int64)
    binf = np.zeros(m + 1, dtype=np.bool_)
    cx, cy, ci = 0, 0, True
    for j in range(m + 1):
        bx[j], by[j], binf[j] = cx, cy, ci
        cx, cy, ci = _add(cx, cy, ci, x0, y0, False, a, q)
    step = 2 * m + 1
    gx, gy, gi = _mul(step, x0, y0, False, a, q)
    gy = (-gy) % q
    # Q_k = [q + 1 - c - k*step] P with c = -bound + m
    c = -bound + m
    qx, qy, qi = _mul(q + 1 - c, x0, y0, False, a, q)
    n = 0
    k = 0
    while c + k * step - m <= bound:
        base = c + k * step
        for j in range(m + 1):
            hit_plus = False
            hit_minus = False
            if qi or binf[j]:
                if qi and binf[j]:
                    # [j]P = O = -[j]P, so both signs are candidates
                    hit_plus = True
                    hit_minus = True
            elif qx == bx[j]:
                if qy == by[j]:
                    hit_plus = True
                if (qy + by[j]) % q == 0:
                    hit_minus = True
            # Q_k = [j]P means [q+1-base-j]P = O; Q_k = -[j]P gives base - j
            if hit_plus:
                s = base + j
                if -bound <= s <= bound and n < out.size:
                    out[n] = s
                    n += 1
            if hit_minus and j > 0:
                s = base - j
                if -bound <= s <= bound and n < out.size:
                    out[n] = s
                    n += 1
        qx, qy, qi = _add(qx, qy, qi, gx, gy, gi, a, q)
        k += 1
    return n


@njit(cache=True)
def bsgs_trace(A, B, q, seed):
    """a_q by intersecting BSGS candidate sets from points on E and its twist.

    Returns sentinel 1 << 40 if no unique answer emerged (caller falls back).
    """
    bound = _isqrt(4 * q)  # |a_q| <= 2 sqrt(q)
    alive = np.ones(2 * bound + 1, dtype=np.bool_)  # alive[t + bound]
    buf = np.empty(4 * (2 * bound + 1) + 8, dtype=np.int64)
    state = np.uint64(seed) * np.uint64(6364136223846793005) + np.uint64(q)
    for _ in range(400):
        state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
        x0 = np.int64(state >> np.uint64(33)) % q
        f = ((x0 * x0 % q) * x0 + A * x0 + B) % q
        if f == 0:
            continue
        eps = 1 if _powmod(f, (q - 1) // 2, q) == 1 else -1
        f2 = f * f % q
        a_t = A * f2 % q
        px = x0 * f % q
        py = f2
        n = _candidates(px, py, a_t, q, bound, buf)
        keep = np.zeros(2 * bound + 1, dtype=np.bool_)
        for i in range(n):
            # the twist has trace eps * a_q, so s = eps * t
            t = eps * buf[i]
            keep[t + bound] = True
        count = 0
        last = 0
        for i in range(2 * bound + 1):
            alive[i] = alive[i] and keep[i]
            if alive[i]:
                count += 1
                last = i - bound
        if count == 1:
            return last
        if count == 0:
            break
    return np.int64(1) << 40


@njit(cache=True)
def traces(A_mod, B_mod, primes, seed, direct_limit):
    out = np.empty(primes.size, dtype=np.int64)
    for i in range(primes.size):
        q = primes[i]
        if q <= direct_limit:
            out[i] = direct_trace(A_mod[i], B_mod[i], q)
        else:
            t = bsgs_trace(A_mod[i], B_mod[i], q, seed)
            if t == np.int64(1) << 40:
                t = direct_trace(A_mod[i], B_mod[i], q)
            out[i] = t
    return out


@njit(cache=True)
def assemble(cutoff, prime_powers, power_values):
    """Multiplicative extension of prime-power values, primes in increasing order.

    ``prime_powers`` lists q^k (k >= 1) grouped by ascending q, and
    ``power_values`` the matching coefficients.
    """
    c = np.zeros(cutoff + 1, dtype=np.complex128)
    c[1] = 1.0
    i = 0
    npow = prime_powers.size
    while i < npow:
        q = prime_powers[i]
        j = i
        while j < npow and prime_powers[j] % q == 0 and _is_power_of(prime_powers[j], q):
            j += 1
        # update higher powers first so c[m] (q not dividing m) is read before any write
        for t in range(j - 1, i - 1, -1):
            qk = prime_powers[t]
            v = power_values[t]
            top = cutoff // qk
            for m in range(1, top + 1):
                if m % q != 0:
                    c[m * qk] = c[m] * v
        i = j
    return c


@njit(cache=True)
def _is_power_of(n, q):
    while n % q == 0:
        n //= q
    return n == 1
