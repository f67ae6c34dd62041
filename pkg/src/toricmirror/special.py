"""Polygamma values by Euler–Maclaurin and truncated univariate power series.

Series are plain lists of coefficients [c_0, c_1, ...]; entries are Fractions
in exact mode and mpmath numbers otherwise.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath

from .errors import PrecisionUnattainable

MAX_DIGITS = 400


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    b = a[0]
    return -b if n == 1 else b


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@lru_cache(maxsize=4096)
def _polygamma_cached(k: int, a: Fraction, digits: int):
    with mpmath.workdps(digits + 10):
        x = _mp(a)
        eps = mpmath.mpf(10) ** (-(digits + 4))
        N = max(10, int(digits * 0.6) + k)
        s = k + 1
        while True:
            xN = x + N
            if k == 0:
                head = -sum(1 / (x + j) for j in range(N))
                tail = mpmath.log(xN) - 1 / (2 * xN)
                terms = []
                for j in range(1, 200):
                    t = _mp(bernoulli(2 * j)) / (2 * j * xN ** (2 * j))
                    terms.append(t)
                    if abs(t) < eps:
                        break
                else:
                    N *= 2
                    continue
                # the omitted term bounds the remainder (alternating asymptotics)
                value = head + tail - sum(terms[:-1])
                err = abs(terms[-1])
            else:
                head = sum((x + j) ** (-s) for j in range(N))
                tail = xN ** (1 - s) / (s - 1) + xN ** (-s) / 2
                terms = []
                rising = mpmath.mpf(s)
                for j in range(1, 200):
                    t = _mp(bernoulli(2 * j)) / factorial(2 * j) * rising * xN ** (-s - 2 * j + 1)
                    terms.append(t)
                    rising *= (s + 2 * j - 1) * (s + 2 * j)
                    if abs(t) < eps:
                        break
                else:
                    N *= 2
                    continue
                zeta = head + tail + sum(terms[:-1])
                err = abs(terms[-1]) * factorial(k)
                value = (-1) ** (k + 1) * factorial(k) * zeta
            if err <= eps * max(1, abs(value)):
                return +value
            N *= 2


def polygamma(k: int, a, digits: int | None = None):
    """ψ^{(k)}(a) for rational a > 0, accurate to about `digits` digits."""
    digits = digits or mpmath.mp.dps
    if digits > MAX_DIGITS:
        raise PrecisionUnattainable(f"{digits} digits exceeds the certified range {MAX_DIGITS}")
    a = Fraction(a)
    if a <= 0:
        raise ValueError("polygamma argument must be positive")
    return +_polygamma_cached(k, a, digits)


# ---------------------------------------------------------------------------
# truncated univariate series

def s_mul(a, b, order: int):
    out = [a[0] * 0] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[:order + 1 - i]):
            out[i + j] = out[i + j] + x * y
    return out


def s_inv(a, order: int):
    if a[0] == 0:
        raise ZeroDivisionError("series not invertible")
    out = [1 / a[0]]
    for k in range(1, order + 1):
        acc = sum((a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), a[0] * 0)
        out.append(-acc / a[0])
    return out


def s_exp(a, order: int, exp0=None):
    """exp of a series; the constant term is exponentiated by `exp0` if given."""
    b = [x for x in a[:order + 1]] + [a[0] * 0] * max(0, order + 1 - len(a))
    c0 = exp0(b[0]) if exp0 else (mpmath.exp(b[0]) if b[0] != 0 else b[0] * 0 + 1)
    out = [c0]
    # e' = a' e
    for k in range(1, order + 1):
        acc = sum((j * b[j] * out[k - j] for j in range(1, k + 1)), b[0] * 0)
        out.append(acc / k)
    return out


def s_scale_var(a, c, order: int):
    """f(x) ↦ f(c x)."""
    out = []
    p = c ** 0
    for k in range(min(order + 1, len(a))):
        out.append(a[k] * p)
        p = p * c
    return out + [a[0] * 0] * (order + 1 - len(out))


def exp_series(c, order: int, exact: bool = True):
    """Coefficients of e^{c x}."""
    out = []
    term = Fraction(1) if exact else mpmath.mpf(1)
    for k in range(order + 1):
        out.append(term)
        term = term * c / (k + 1)
    return out


def log_gamma_shift(s: Fraction, order: int, digits: int | None = None):
    """Coefficients of log Γ(s + x) − log Γ(s) = Σ_{k≥1} ψ^{(k-1)}(s) x^k / k!."""
    return [mpmath.mpf(0)] + [polygamma(k - 1, s, digits) / factorial(k) for k in range(1, order + 1)]


def gamma_series(s: Fraction, order: int, digits: int | None = None):
    """Coefficients of Γ(s + x) for rational s > 0."""
    lg = log_gamma_shift(s, order, digits)
    return s_exp(lg, order, exp0=lambda _: mpmath.gamma(_mp(s)))


def rgamma_series(s: Fraction, order: int, digits: int | None = None):
    """Coefficients of 1/Γ(s + x) for any rational s (entire in x)."""
    s = Fraction(s)
    if s > 0:
        lg = log_gamma_shift(s, order, digits)
        return s_exp([-c for c in lg], order, exp0=lambda _: 1 / mpmath.gamma(_mp(s)))
    # 1/Γ(s+x) = [∏_{j=0}^{K-1} (s+j+x)] / Γ(s+K+x) with s+K > 0
    K = int(-s) + 1
    base = rgamma_series(s + K, order, digits)
    poly = [mpmath.mpf(1)]
    for j in range(K):
        poly = s_mul(poly, [_mp(s + j), mpmath.mpf(1)], order)
    return s_mul(poly, base, order)
