"""Exact scaled-integer binary floating point.

A value is a pair ``(man, exp)`` meaning ``man * 2**exp`` with ``man`` an
arbitrary-size signed integer. Pairs are kept normalized: ``man`` is odd, or
the value is the canonical zero ``(0, 0)``. Addition and multiplication are
exact; division, square root and the elementary functions are rounded to a
requested number of significand bits with round-to-nearest, ties to even.
Every rounding reports whether it changed the value, which is what lets the
reference interpreter track exactness.

The elementary functions (sin, cos, atan) are delegated to mpmath's libmp
backend, called through its pure functions with an explicit working
precision, then rounded here. Everything else is plain integer arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from decimal import Decimal, localcontext
from typing import Tuple

from mpmath import libmp

Val = Tuple[int, int]

ZERO: Val = (0, 0)

# Reference executions carry at least this many significand bits, comfortably
# above the widest tunable width (113).
REF_BITS = 128


def norm(man: int, exp: int) -> Val:
    if man == 0:
        return ZERO
    shift = (man & -man).bit_length() - 1
    if shift:
        man >>= shift
        exp += shift
    return (man, exp)


def from_int(n: int) -> Val:
    return norm(n, 0)


def is_zero(v: Val) -> bool:
    return v[0] == 0


def neg(v: Val) -> Val:
    return (-v[0], v[1])


def width(v: Val) -> int:
    """Significand bits needed to hold v exactly (0 for zero)."""
    return abs(v[0]).bit_length()


def ufp(v: Val) -> int:
    """Exponent of the leading significand bit; 0 for zero."""
    if v[0] == 0:
        return 0
    return abs(v[0]).bit_length() - 1 + v[1]


def add(a: Val, b: Val) -> Val:
    """Exact sum."""
    if a[0] == 0:
        return b
    if b[0] == 0:
        return a
    ma, ea = a
    mb, eb = b
    if ea >= eb:
        return norm((ma << (ea - eb)) + mb, eb)
    return norm(ma + (mb << (eb - ea)), ea)


def sub(a: Val, b: Val) -> Val:
    return add(a, neg(b))


def mul(a: Val, b: Val) -> Val:
    """Exact product."""
    if a[0] == 0 or b[0] == 0:
        return ZERO
    return norm(a[0] * b[0], a[1] + b[1])


def cmp(a: Val, b: Val) -> int:
    d = sub(a, b)[0]
    return (d > 0) - (d < 0)


def abs_val(v: Val) -> Val:
    return (abs(v[0]), v[1])


def abs_cmp(a: Val, b: Val) -> int:
    return cmp(abs_val(a), abs_val(b))


def _round_half_even(keep: int, rem: int, half: int, sticky: bool) -> int:
    """Round the dropped part (rem plus a sticky tail) into keep."""
    if rem > half or (rem == half and (sticky or (keep & 1))):
        return keep + 1
    return keep


def round_nsb(v: Val, nsb: int) -> Tuple[Val, bool]:
    """Round v to at most nsb significand bits, nearest, ties to even.

    Returns the rounded value and an inexact flag. Exact inputs (width <=
    nsb) are returned unchanged. nsb must be >= 1.
    """
    if nsb < 1:
        raise ValueError("nsb must be >= 1")
    man, exp = v
    if man == 0:
        return ZERO, False
    a = abs(man)
    w = a.bit_length()
    if w <= nsb:
        return v, False
    shift = w - nsb
    keep = a >> shift
    rem = a & ((1 << shift) - 1)
    keep = _round_half_even(keep, rem, 1 << (shift - 1), False)
    out = norm(keep if man > 0 else -keep, exp + shift)
    return out, rem != 0


def div(a: Val, b: Val, nsb: int) -> Tuple[Val, bool]:
    """Quotient a/b correctly rounded to nsb bits. b must be nonzero."""
    if b[0] == 0:
        raise ZeroDivisionError("division by zero")
    if a[0] == 0:
        return ZERO, False
    ma, ea = abs(a[0]), a[1]
    mb, eb = abs(b[0]), b[1]
    # Give the raw quotient nsb + 2 bits so guard and sticky are available.
    s = nsb + 2 + max(0, mb.bit_length() - ma.bit_length() + 1)
    q, r = divmod(ma << s, mb)
    w = q.bit_length()
    exp = ea - eb - s
    sign = 1 if (a[0] > 0) == (b[0] > 0) else -1
    if w <= nsb:
        if r == 0:
            return norm(sign * q, exp), False
        # q has at most nsb bits but a nonzero tail; widen once to round it.
        q2, r2 = divmod(ma << (s + 2), mb)
        keep = q2 >> 2
        rem = q2 & 3
        keep = _round_half_even(keep, rem, 2, r2 != 0)
        return norm(sign * keep, ea - eb - s - 2 + 2), True
    shift = w - nsb
    keep = q >> shift
    rem = q & ((1 << shift) - 1)
    keep = _round_half_even(keep, rem, 1 << (shift - 1), r != 0)
    return norm(sign * keep, exp + shift), (rem != 0 or r != 0)


def sqrt(a: Val, nsb: int) -> Tuple[Val, bool]:
    """Square root correctly rounded to nsb bits. a must be >= 0."""
    if a[0] < 0:
        raise ValueError("sqrt of negative value")
    if a[0] == 0:
        return ZERO, False
    man, exp = a
    # Scale left so the integer root carries at least nsb + 2 bits and the
    # remaining exponent is even.
    shift = max(0, 2 * (nsb + 2) - man.bit_length())
    if (exp - shift) & 1:
        shift += 1
    m = man << shift
    root = math.isqrt(m)
    r = m - root * root
    w = root.bit_length()
    exp2 = (exp - shift) // 2
    if w <= nsb:
        return norm(root, exp2), r != 0  # only reachable with r == 0
    cut = w - nsb
    keep = root >> cut
    rem = root & ((1 << cut) - 1)
    keep = _round_half_even(keep, rem, 1 << (cut - 1), r != 0)
    return norm(keep, exp2 + cut), (rem != 0 or r != 0)


def from_decimal(text: str, prec: int = REF_BITS) -> Tuple[Val, bool]:
    """Convert a decimal literal exactly, rounding to prec bits if needed.

    Literals whose value is a dyadic rational within prec bits convert
    exactly (inexact=False); anything else is rounded to nearest.
    """
    frac = Fraction(text)
    if frac == 0:
        return ZERO, False
    num, den = frac.numerator, frac.denominator
    # den is 2^a * 5^b for decimal literals; fold the power of two into the
    # exponent and divide out the rest with correct rounding.
    a = (den & -den).bit_length() - 1
    den >>= a
    if den == 1:
        v = norm(num, -a)
        if width(v) <= prec:
            return v, False
        return round_nsb(v, prec)
    return div(norm(num, -a), from_int(den), prec)


def from_float(x: float) -> Val:
    """Exact conversion of a finite binary64 value."""
    if x == 0.0:
        return ZERO
    man, exp = math.frexp(x)
    man = int(man * (1 << 53))
    return norm(man, exp - 53)


def to_float(v: Val) -> float:
    man, exp = v
    try:
        return math.ldexp(man, exp)
    except OverflowError:
        return math.inf if man > 0 else -math.inf


def to_decimal_str(v: Val, digits: int = 30) -> str:
    """Decimal rendering with the given number of significant digits."""
    man, exp = v
    if man == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(man)
        if exp >= 0:
            d = d * (Decimal(2) ** exp)
        else:
            d = d / (Decimal(2) ** (-exp))
        return str(d.normalize())


def pow2(e: int) -> Val:
    return (1, e)


def _to_libmp(v: Val):
    man, exp = v
    if man == 0:
        return libmp.fzero
    return libmp.from_man_exp(man, exp)


def _from_libmp(x) -> Val:
    sign, man, exp, _ = x
    if man == 0:
        return ZERO
    return norm(-man if sign else man, exp)


def _elementary(fn, v: Val, nsb: int) -> Tuple[Val, bool]:
    work = max(nsb, 1) + 12
    raw = _from_libmp(fn(_to_libmp(v), work, libmp.round_nearest))
    out, _ = round_nsb(raw, max(nsb, 1))
    return out, True


def sin(v: Val, nsb: int) -> Tuple[Val, bool]:
    if v[0] == 0:
        return ZERO, False
    return _elementary(libmp.mpf_sin, v, nsb)


def cos(v: Val, nsb: int) -> Tuple[Val, bool]:
    if v[0] == 0:
        return from_int(1), False
    return _elementary(libmp.mpf_cos, v, nsb)


def atan(v: Val, nsb: int) -> Tuple[Val, bool]:
    if v[0] == 0:
        return ZERO, False
    return _elementary(libmp.mpf_atan, v, nsb)
