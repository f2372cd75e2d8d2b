"""Double-double scalar arithmetic for accurate phase construction.

Free-evolution phases reach ~5e9 rad at the default parameters; reducing
them modulo 2*pi in plain float64 would throw away ~6 digits of angle.
These helpers carry ~32 significant digits through the reduction so the
reduced angle (and the tiny gap between the two theories' phases) stays
accurate to well below 1e-15 rad.

A double-double is an unevaluated sum hi + lo of two floats with
|lo| <= ulp(hi)/2.  Only the handful of operations needed by the phase
builder are implemented.  Python 3.10 has no math.fma, so exact products
use Dekker splitting.
"""

from __future__ import annotations

import math

_SPLITTER = 134217729.0  # 2**27 + 1

# 2*pi = TWO_PI_HI + TWO_PI_LO + O(1e-33)
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Exact sum: returns (s, e) with s = fl(a+b) and s + e = a + b."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    """Exact sum assuming |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Exact product via Dekker splitting: p + e = a * b."""
    p = a * b
    a1 = _SPLITTER * a
    ahi = a1 - (a1 - a)
    alo = a - ahi
    b1 = _SPLITTER * b
    bhi = b1 - (b1 - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def dd_add(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    s, e = two_sum(x[0], y[0])
    e += x[1] + y[1]
    return quick_two_sum(s, e)


def dd_sub(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    return dd_add(x, (-y[0], -y[1]))


def dd_mul(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    p, e = two_prod(x[0], y[0])
    e += x[0] * y[1] + x[1] * y[0]
    return quick_two_sum(p, e)


def dd_mul_d(x: tuple[float, float], d: float) -> tuple[float, float]:
    p, e = two_prod(x[0], d)
    e += x[1] * d
    return quick_two_sum(p, e)


def dd_div(x: tuple[float, float], y: tuple[float, float]) -> tuple[float, float]:
    q1 = x[0] / y[0]
    r = dd_sub(x, dd_mul_d(y, q1))
    q2 = r[0] / y[0]
    r = dd_sub(r, dd_mul_d(y, q2))
    q3 = r[0] / y[0]
    s, e = quick_two_sum(q1, q2)
    return dd_add((s, e), (q3, 0.0))


def dd_sqrt(x: tuple[float, float]) -> tuple[float, float]:
    """Square root by one Newton step on a float64 estimate."""
    if x[0] == 0.0 and x[1] == 0.0:
        return 0.0, 0.0
    y0 = math.sqrt(x[0])
    # y = (y0 + x/y0) / 2
    r = dd_div(x, (y0, 0.0))
    s, e = two_sum(y0, r[0])
    e += r[1]
    s, e = quick_two_sum(s, e)
    return 0.5 * s, 0.5 * e


def dd_mod_2pi(x: tuple[float, float]) -> float:
    """Reduce a double-double angle modulo 2*pi to a float64 in (-pi, pi].

    The integer multiple k is representable exactly for |x| < ~5.6e16 rad;
    beyond that the loop reduces in stages.
    """
    hi, lo = x
    for _ in range(4):
        k = round((hi + lo) / TWO_PI_HI)
        if k == 0:
            break
        kf = float(k)
        p1, e1 = two_prod(kf, TWO_PI_HI)
        p2, e2 = two_prod(kf, TWO_PI_LO)
        hi, lo = dd_sub((hi, lo), (p1, e1))
        hi, lo = dd_sub((hi, lo), (p2, e2))
        if abs(hi) <= 2.0 * TWO_PI_HI:
            break
    # final nudge into (-pi, pi]
    r = hi + lo
    if r > 0.5 * TWO_PI_HI:
        r -= TWO_PI_HI + TWO_PI_LO
    elif r <= -0.5 * TWO_PI_HI:
        r += TWO_PI_HI + TWO_PI_LO
    return r
