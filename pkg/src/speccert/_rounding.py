"""Directed-rounding scalar kernels and a-priori inflation constants.

Every rigorous bound in this package reduces to floating-point claims of
the form ``computed_up >= exact`` or ``computed_down <= exact``.  Two
mechanisms deliver them:

1.  *Scalar directed rounding* via MPFR (through :mod:`gmpy2`), with the
    context clamped to IEEE-754 binary64 semantics (precision 53,
    ``emin=-1073``, ``emax=1024``, subnormals on).  Results are therefore
    exactly representable doubles and the final ``float()`` conversion is
    lossless.  Overflow rounds to ``+inf`` in upward mode (a valid upper
    bound, rejected later by finiteness checks where required) and
    underflow rounds to the smallest subnormal, never to an unsound zero.

2.  *A-priori inflation* for bulk numpy kernels that run in round-to-nearest.
    Under the standard model (each of +, -, *, /, sqrt introduces a relative
    error factor ``1+d`` with ``|d| <= u``, ``u = 2**-53``), a nonnegative
    quantity ``r`` computed by at most ``k`` such operations per output
    satisfies ``r <= rhat * (1-u)**-k`` and ``r >= rhat * (1+u)**-k``.
    Multiplying ``rhat`` once more by ``scale_up(k) >= (1+(k+4)u)`` (resp.
    ``scale_down``) in round-to-nearest then yields a value that is still
    an upper (resp. lower) bound of ``r``, because

        ``fl(rhat*c) >= rhat*c*(1-u) >= rhat*(1-u)**-k``    for ``c = scale_up(k)``

    holds whenever ``(k+2)**2 * u <= 1``, i.e. for every ``k`` up to about
    ``6.7e7`` -- far beyond any dependency depth used here (matrix inner
    dimensions and FFT stage counts stay below ``2**21``).  The symmetric
    inequality justifies ``scale_down``.

No other floating-point assumptions are made; in particular libm's
``hypot``/``sin``/``cos`` accuracy is never relied upon.
"""

from __future__ import annotations

import math

import gmpy2

__all__ = [
    "U",
    "add_up", "add_down", "sub_up", "sub_down",
    "mul_up", "mul_down", "div_up", "div_down",
    "sqrt_up", "sqrt_down", "exp_up", "exp_down",
    "expm1_up", "expm1_down", "log_up", "log_down",
    "pow_up", "pow_down", "pi_up", "pi_down",
    "sin_enclosure", "cos_enclosure",
    "abs2_up", "cabs_up", "cabs_down",
    "sum_up", "two_sum",
    "scale_up", "scale_down",
]

#: unit roundoff of binary64
U = 2.0 ** -53

# MPFR contexts pinned to binary64.  emin/emax follow MPFR's convention of a
# mantissa in [1/2, 1): the smallest positive subnormal 2**-1074 has exponent
# -1073 and the largest finite value has exponent 1024.
_UP = gmpy2.context(precision=53, round=gmpy2.RoundUp,
                    subnormalize=True, emin=-1073, emax=1024)
_DOWN = gmpy2.context(precision=53, round=gmpy2.RoundDown,
                      subnormalize=True, emin=-1073, emax=1024)


def add_up(a: float, b: float) -> float:
    return float(_UP.add(a, b))


def add_down(a: float, b: float) -> float:
    return float(_DOWN.add(a, b))


def sub_up(a: float, b: float) -> float:
    return float(_UP.sub(a, b))


def sub_down(a: float, b: float) -> float:
    return float(_DOWN.sub(a, b))


def mul_up(a: float, b: float) -> float:
    return float(_UP.mul(a, b))


def mul_down(a: float, b: float) -> float:
    return float(_DOWN.mul(a, b))


def div_up(a: float, b: float) -> float:
    return float(_UP.div(a, b))


def div_down(a: float, b: float) -> float:
    return float(_DOWN.div(a, b))


def sqrt_up(a: float) -> float:
    return float(_UP.sqrt(a))


def sqrt_down(a: float) -> float:
    return float(_DOWN.sqrt(a))


def exp_up(a: float) -> float:
    return float(_UP.exp(a))


def exp_down(a: float) -> float:
    return float(_DOWN.exp(a))


def expm1_up(a: float) -> float:
    return float(_UP.expm1(a))


def expm1_down(a: float) -> float:
    return float(_DOWN.expm1(a))


def log_up(a: float) -> float:
    return float(_UP.log(a))


def log_down(a: float) -> float:
    return float(_DOWN.log(a))


def pow_up(x: float, y: float) -> float:
    """Upper bound of x**y for x > 0 (MPFR pow is correctly rounded)."""
    return float(_UP.pow(gmpy2.mpfr(x), gmpy2.mpfr(y)))


def pow_down(x: float, y: float) -> float:
    return float(_DOWN.pow(gmpy2.mpfr(x), gmpy2.mpfr(y)))


def pi_up() -> float:
    return float(_UP.const_pi())


def pi_down() -> float:
    return float(_DOWN.const_pi())


def sin_enclosure(a: float) -> tuple[float, float]:
    """[lo, hi] enclosing sin(a) for the exact double a."""
    return float(_DOWN.sin(a)), float(_UP.sin(a))


def cos_enclosure(a: float) -> tuple[float, float]:
    return float(_DOWN.cos(a)), float(_UP.cos(a))


def abs2_up(re: float, im: float) -> float:
    """Upper bound of re**2 + im**2."""
    return add_up(mul_up(re, re), mul_up(im, im))


def abs2_down(re: float, im: float) -> float:
    """Lower bound of re**2 + im**2."""
    return add_down(mul_down(re, re), mul_down(im, im))


def exp_2pi_enclosure(x: float) -> tuple[float, float]:
    """Enclosure of e^(2*pi*x); the weighted-norm radii are all of this shape."""
    tp_lo = mul_down(2.0, pi_down())
    tp_hi = mul_up(2.0, pi_up())
    t_lo = min(mul_down(tp_lo, x), mul_down(tp_hi, x))
    t_hi = max(mul_up(tp_lo, x), mul_up(tp_hi, x))
    return exp_down(t_lo), exp_up(t_hi)


def cabs_up(re: float, im: float) -> float:
    """Upper bound of |re + i*im|."""
    return sqrt_up(abs2_up(re, im))


def cabs_down(re: float, im: float) -> float:
    """Lower bound of |re + i*im|."""
    return sqrt_down(add_down(mul_down(re, re), mul_down(im, im)))


def sum_up(values) -> float:
    """Upper bound of a finite sum (sequential upward additions)."""
    acc = 0.0
    for v in values:
        acc = float(_UP.add(acc, v))
    return acc


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Error-free transform: returns (s, e) with s = fl(a+b) and s+e = a+b exactly.

    Knuth's branch-free TwoSum; valid for all finite doubles.
    """
    s = a + b
    bv = s - a
    e = (a - (s - bv)) + (b - bv)
    return s, e


# Inflation constants are built with upward rounding so that
# scale_up(k) >= 1 + (k+4)*u even when 1 + (k+4)*u is not representable.
_scale_up_cache: dict[int, float] = {}
_scale_down_cache: dict[int, float] = {}


def scale_up(k: int) -> float:
    """Multiplier turning a depth-k round-to-nearest nonnegative result into an upper bound."""
    try:
        return _scale_up_cache[k]
    except KeyError:
        c = float(_UP.add(1.0, _UP.mul(k + 4, U)))
        _scale_up_cache[k] = c
        return c


def scale_down(k: int) -> float:
    """Multiplier turning a depth-k round-to-nearest nonnegative result into a lower bound."""
    try:
        return _scale_down_cache[k]
    except KeyError:
        c = float(_DOWN.sub(1.0, _DOWN.mul(k + 4, U)))
        _scale_down_cache[k] = c
        return c


def next_up(a: float) -> float:
    return math.nextafter(a, math.inf)


def next_down(a: float) -> float:
    return math.nextafter(a, -math.inf)
