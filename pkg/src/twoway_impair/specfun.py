"""Scalar special functions used by the closed-form performance expressions.

Provides the first-order modified Bessel function of the second kind K1 (plain
and exponentially scaled), the complementary error function, the lower
incomplete gamma function, and the Gaussian Q-function.  Everything here is
double precision, scalar, and pure; target accuracy is 1e-12 relative (1e-10
for the incomplete gamma), i.e. at least one order tighter than any quadrature
tolerance that consumes these kernels.

K1 follows the classical two-branch scheme: the ascending series (DLMF
10.31.2) on z <= 2 and a Chebyshev fit of exp(z)*K1(z)*sqrt(z) in the variable
4/z - 1 on z > 2.  The Chebyshev coefficients were recomputed from a
high-precision reference (see tools/gen_k1_coeffs.py) rather than copied from
the literature.
"""

from __future__ import annotations

import math

_EULER_GAMMA = 0.5772156649015328606065120900824024

# Chebyshev coefficients of f(t) = exp(z)*K1(z)*sqrt(z), t = 4/z - 1, z in
# [2, inf).  Max relative error of the truncated series is below 1e-19.
# Regenerate with tools/gen_k1_coeffs.py.
_K1E_CHEB = (
    2.7206261904844426694,
    0.10392373657681723844,
    -0.0028578168596227793868,
    0.00019521551847135163111,
    -0.0000193619797416608296,
    2.4064849478372171171e-6,
    -3.5019606030878125421e-7,
    5.7410841254500492923e-8,
    -1.0345762465678097027e-8,
    2.0150497551970346161e-9,
    -4.1903547593419255842e-10,
    9.2183151876053141258e-11,
    -2.1299678384277910216e-11,
    5.1396396734823435404e-12,
    -1.2891739609498229352e-12,
    3.3484196660522431201e-13,
    -8.9767051820101460692e-14,
    2.4771544242195986813e-14,
    -7.0198370892147688513e-15,
    2.0387031662398608799e-15,
    -6.0570472706430178228e-16,
    1.8380935752430454256e-16,
    -5.6894628491936483743e-17,
    1.7940510478863572914e-17,
    -5.7567444820733024503e-18,
    1.8778651901623267401e-18,
    -6.2216452873526091852e-19,
    2.0919125269831136552e-19,
)


def _cheb_eval(coeffs, t: float) -> float:
    """Clenshaw evaluation of a Chebyshev series with halved c0 convention."""
    b1 = 0.0
    b2 = 0.0
    for c in reversed(coeffs[1:]):
        b1, b2 = 2.0 * t * b1 - b2 + c, b1
    return t * b1 - b2 + 0.5 * coeffs[0]


def _k1_small(z: float) -> float:
    """Ascending series for K1(z), 0 < z <= 2 (DLMF 10.31.2 with n=1).

    K1(z) = 1/z + ln(z/2)*I1(z) - (z/4) * sum_k (psi(k+1)+psi(k+2)) q^k / (k!(k+1)!)
    with q = z^2/4 and I1(z) = (z/2) * sum_k q^k / (k!(k+1)!).
    """
    q = 0.25 * z * z
    term = 1.0                       # q^k / (k! (k+1)!)
    psi = 1.0 - 2.0 * _EULER_GAMMA   # psi(1) + psi(2)
    i1_sum = term
    s_sum = psi * term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        psi += 1.0 / k + 1.0 / (k + 1)
        i1_sum += term
        s_sum += psi * term
        if term * (abs(psi) + 1.0) < 1e-18 * (abs(s_sum) + i1_sum):
            break
    i1 = 0.5 * z * i1_sum
    return 1.0 / z + math.log(0.5 * z) * i1 - 0.25 * z * s_sum


def bessel_k1_scaled(z: float) -> float:
    """Exponentially scaled Bessel function exp(z) * K1(z).

    Stays representable for arbitrarily large z (value ~ sqrt(pi/(2z)));
    use this form whenever exp terms elsewhere cancel the e^{-z} decay.
    """
    if not z > 0.0:
        raise ValueError(f"bessel_k1_scaled requires z > 0, got {z!r}")
    if z <= 2.0:
        return math.exp(z) * _k1_small(z)
    return _cheb_eval(_K1E_CHEB, 4.0 / z - 1.0) / math.sqrt(z)


def bessel_k1(z: float) -> float:
    """Modified Bessel function of the second kind, order one.

    Returns 0 once exp(-z) underflows (z > ~746); raises for z <= 0 where
    K1 diverges.
    """
    if not z > 0.0:
        raise ValueError(f"bessel_k1 requires z > 0, got {z!r}")
    if z <= 2.0:
        return _k1_small(z)
    return math.exp(-z) * (_cheb_eval(_K1E_CHEB, 4.0 / z - 1.0) / math.sqrt(z))


def erfc(x: float) -> float:
    """Complementary error function on finite reals.

    Thin wrapper over the C library kernel; it underflows gracefully to 0
    (values turn subnormal beyond |x| ~ 26.5, exactly 0 past ~27.2).
    """
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"erfc requires finite x, got {x!r}")
    return math.erfc(x)


def gaussian_q(x: float) -> float:
    """Gaussian Q-function, the standard normal tail Q(x) = 0.5*erfc(x/sqrt(2))."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"gaussian_q requires finite x, got {x!r}")
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def lower_incomplete_gamma(p: float, x: float) -> float:
    """Lower incomplete gamma function gamma(p, x) = int_0^x t^(p-1) e^(-t) dt.

    Series branch for x < p + 1, continued fraction (via the upper function)
    otherwise; accuracy is ~1e-14 relative on the half-integer orders this
    package uses and best-effort for other p > 0.
    """
    if not p > 0.0:
        raise ValueError(f"lower_incomplete_gamma requires p > 0, got {p!r}")
    if not x >= 0.0:
        raise ValueError(f"lower_incomplete_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < p + 1.0:
        return _gamma_series(p, x)
    return math.gamma(p) - _gamma_upper_cf(p, x)


def _gamma_series(p: float, x: float) -> float:
    """gamma(p,x) = x^p e^{-x} sum_{n>=0} x^n / (p (p+1) ... (p+n)); x < p+1."""
    term = 1.0 / p
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (p + n)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        if n > 500:
            raise ArithmeticError(f"incomplete gamma series stalled at p={p}, x={x}")
    return total * math.exp(p * math.log(x) - x)


def _gamma_upper_cf(p: float, x: float) -> float:
    """Upper incomplete gamma Gamma(p,x) by modified Lentz continued fraction; x >= p+1."""
    tiny = 1e-300
    b = x + 1.0 - p
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - p)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ArithmeticError(f"incomplete gamma continued fraction stalled at p={p}, x={x}")
    log_scale = p * math.log(x) - x
    if log_scale < -745.0:
        return 0.0
    return math.exp(log_scale) * h
