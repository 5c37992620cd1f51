"""Integer-order Bessel functions J_n and I_n.

The whole transfer-coefficient layer is Bessel-valued, so the evaluator is
kept self-contained: power series below |x| = 10, normalized backward
recurrence (Miller's algorithm) above.  The test suite pins it against
numerical quadrature of the defining integrals to 1e-12.

``besseli_scaled`` returns exp(-|x|) I_n(x), which is what the absorption
formulas actually consume; it stays finite for any argument.
"""

import math

_SERIES_CUTOFF = 10.0
_RESCALE = 1e250
_TINY = 1e-300


def besselj(n: int, x: float) -> float:
    """Bessel function of the first kind, integer order."""
    n = int(n)
    if n < 0:
        return besselj(-n, x) * (-1.0 if n & 1 else 1.0)
    if x < 0.0:
        return besselj(n, -x) * (-1.0 if n & 1 else 1.0)
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < _SERIES_CUTOFF:
        return _j_series(n, x)
    return _j_miller(n, x)


def besseli(n: int, x: float) -> float:
    """Modified Bessel function of the first kind, integer order.

    Overflows to inf for x beyond ~700; use besseli_scaled in sums.
    """
    n = abs(int(n))
    sign = 1.0
    if x < 0.0:
        x = -x
        sign = -1.0 if n & 1 else 1.0
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    scaled = besseli_scaled(n, x)
    if x > 690.0:  # exp alone would overflow; split the exponent
        half = math.exp(x / 2.0)
        return sign * scaled * half * half
    return sign * scaled * math.exp(x)


def besseli_scaled(n: int, x: float) -> float:
    """exp(-|x|) I_n(x) for integer order; finite for all real x."""
    n = abs(int(n))
    sign = 1.0
    if x < 0.0:
        x = -x
        sign = -1.0 if n & 1 else 1.0
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < _SERIES_CUTOFF:
        return sign * _i_series(n, x) * math.exp(-x)
    return sign * _i_miller(n, x)


def _half_pow_over_factorial(n: int, h: float) -> float:
    # h**n / n!  without overflowing the factorial
    if n <= 150:
        return h**n / math.factorial(n)
    return math.exp(n * math.log(h) - math.lgamma(n + 1.0))


def _j_series(n: int, x: float) -> float:
    h = 0.5 * x
    term = _half_pow_over_factorial(n, h)
    if term == 0.0:
        return 0.0
    q = -h * h
    total = term
    for k in range(1, 80):
        term *= q / (k * (n + k))
        total += term
        if abs(term) < 1e-18 * abs(total) + _TINY:
            break
    return total


def _i_series(n: int, x: float) -> float:
    h = 0.5 * x
    term = _half_pow_over_factorial(n, h)
    if term == 0.0:
        return 0.0
    q = h * h
    total = term
    for k in range(1, 200):
        term *= q / (k * (n + k))
        total += term
        if term < 1e-18 * total + _TINY:
            break
    return total


def _start_order(n: int, x: float) -> int:
    m = int(max(n, x) + 2.0 * math.sqrt(max(n, x)) + 42.0)
    return m + (m & 1)  # even start keeps the normalization bookkeeping simple


def _j_miller(n: int, x: float) -> float:
    # Downward recurrence f_{k-1} = (2k/x) f_k - f_{k+1}, normalized by
    # J_0 + 2 (J_2 + J_4 + ...) = 1.
    m = _start_order(n, x)
    fp = 0.0
    f = _TINY
    norm = f if m % 2 == 0 else 0.0
    jn = f if m == n else 0.0
    for k in range(m, 0, -1):
        fm = (2.0 * k / x) * f - fp
        fp = f
        f = fm
        order = k - 1
        if order == n:
            jn = f
        if order % 2 == 0:
            norm += f
        if abs(f) > _RESCALE:
            f /= _RESCALE
            fp /= _RESCALE
            norm /= _RESCALE
            jn /= _RESCALE
    norm = 2.0 * norm - f  # f is now f_0; it was added with weight 2 above
    return jn / norm


def _i_miller(n: int, x: float) -> float:
    # Same scheme with the modified recurrence and e^x = I_0 + 2 sum I_k,
    # which directly yields the exp(-x)-scaled value.
    m = _start_order(n, x)
    fp = 0.0
    f = _TINY
    norm = f
    in_val = f if m == n else 0.0
    for k in range(m, 0, -1):
        fm = (2.0 * k / x) * f + fp
        fp = f
        f = fm
        order = k - 1
        if order == n:
            in_val = f
        norm += f
        if abs(f) > _RESCALE:
            f /= _RESCALE
            fp /= _RESCALE
            norm /= _RESCALE
            in_val /= _RESCALE
    norm = 2.0 * norm - f
    return in_val / norm
