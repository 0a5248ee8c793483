"""Closed-form and quadrature-based performance metrics.

Exact outage probability of the two-way AF link with relay hardware
impairments, its high-power floor, the symbol error rate as a weighted
integral of the outage CDF, the closed-form SER floor for symmetric channel
gains, and inversion utilities that bound the tolerable impairment severity
for a given outage or SER target.

Numerical strategy for the exact outage expression: the product
exp(-E) * (arg/D) * K1(arg) is assembled in log space through the
exponentially scaled Bessel function, so the result stays accurate all the
way to the saturation threshold x -> 1/c where the raw exponential
underflows while the true probability tends to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad as _quad

from . import specfun
from .model import Direction, SystemConfig, derived_constants, link_params

__all__ = [
    "Modulation",
    "MODULATIONS",
    "OutageQuery",
    "QuadratureSpec",
    "MismatchedGainError",
    "QuadratureError",
    "InfeasibleTargetError",
    "outage_probability",
    "outage_asymptotic",
    "ser",
    "ser_asymptotic",
    "ser_floor_quadrature",
    "invert_impairment_for_op",
    "invert_impairment_for_ser",
]


class MismatchedGainError(ValueError):
    """Closed forms assume the relay gain uses the true receive EVM."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to converge; carries the achieved error estimate."""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(f"{message} (achieved error estimate {achieved_error:.3e})")
        self.achieved_error = achieved_error


class InfeasibleTargetError(ValueError):
    """Requested performance target is outside the achievable range."""


@dataclass(frozen=True)
class Modulation:
    """Constants (alpha, beta) of the conditional error rate alpha*Q(sqrt(2*beta*snr))."""

    alpha: float
    beta: float
    name: str = ""

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("modulation constants alpha, beta must be positive")


MODULATIONS = {
    "bpsk": Modulation(alpha=1.0, beta=1.0, name="bpsk"),
}


@dataclass(frozen=True)
class OutageQuery:
    """Outage threshold (linear SNDR) and detection direction."""

    x: float
    direction: Direction

    def __post_init__(self):
        if not self.x >= 0:
            raise ValueError("outage threshold must be nonnegative")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the SER quadrature."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


def _require_matched(config: SystemConfig, what: str):
    if not config.is_matched:
        raise MismatchedGainError(
            f"{what} has no closed form under a mismatched gain assumption; "
            "use the Monte-Carlo route (montecarlo.mc_outage / mc_ser_signal_level)"
        )


def outage_probability(config: SystemConfig, query: OutageQuery) -> float:
    """Exact outage probability Pr{SNDR_i <= x} over Rayleigh fading.

    Equals 1 identically once x reaches the SNDR ceiling 1/c (c > 0).  Below
    the ceiling the Rayleigh average reduces to an exponential factor times
    arg*K1(arg), evaluated in log space; any [0, 1] clamp applied against
    floating rounding is smaller than 1e-12.
    """
    _require_matched(config, "the exact outage probability")
    x = query.x
    if x < 0:
        raise ValueError("outage threshold must be nonnegative")
    if x == 0.0:
        return 0.0
    dc = derived_constants(config, query.direction)
    c = dc.c
    if c > 0 and x >= 1.0 / c:
        return 1.0

    p_i, p_ri, n_i, om_i, om_ri = link_params(config, query.direction)
    om12 = config.omega1 * config.omega2
    s = 1.0 - c * x
    ratio = p_i / p_ri

    exponent = (x / s) * (dc.a_i / om_ri + dc.b_i / om_i)
    exponent += (x * (1.0 + c * x) / (s * s)) * (dc.b_i / om_ri) * ratio
    num = ((x + x * x) / (s * s)) * (n_i * config.n3 / (om12 * p_ri * config.p3))
    num += (x * x / (s * s * s)) * (dc.b_i * dc.b_i * p_i / (om12 * p_ri))
    dfac = 1.0 + (c * x / s) * (ratio * om_i / om_ri)

    arg = 2.0 * math.sqrt(num * dfac)
    if math.isinf(arg) or math.isinf(exponent):
        return 1.0
    # arg * K1(arg) <= 1, written via the scaled Bessel so the log is exact
    log_term = math.log(arg * specfun.bessel_k1_scaled(arg) / dfac)
    prob = -math.expm1(-exponent - arg + log_term)
    if prob < 0.0:
        if prob < -1e-12:
            raise ArithmeticError(f"outage probability clamp exceeded tolerance: {prob!r}")
        prob = 0.0
    return prob


def outage_asymptotic(omega_i: float, omega_ri: float, c: float, x: float) -> float:
    """High-power outage floor.

    omega_i c x / (omega_ri + c x (omega_i - omega_ri)) below the ceiling,
    1 at or above it, and 0 under ideal hardware where the outage vanishes
    asymptotically.
    """
    if x < 0:
        raise ValueError("outage threshold must be nonnegative")
    if not (omega_i > 0 and omega_ri > 0):
        raise ValueError("average channel gains must be positive")
    if c == 0.0:
        return 0.0
    if c < 0:
        raise ValueError("c must be nonnegative")
    cx = c * x
    if cx >= 1.0:
        return 1.0
    return omega_i * cx / (omega_ri + cx * (omega_i - omega_ri))


def _adaptive_quad(integrand, lo: float, hi: float, spec: QuadratureSpec) -> float:
    out = _quad(
        integrand,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abs_err = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(str(out[3]), achieved_error=abs_err)
    return value


def _ser_from_cdf(cdf, c: float, mod: Modulation, spec: QuadratureSpec) -> float:
    """SER = alpha*sqrt(beta)/(2 sqrt(pi)) * int_0^inf e^{-beta x} x^{-1/2} cdf(x) dx.

    The substitution x = u^2 removes the inverse-square-root singularity; the
    region beyond the ceiling, where the CDF is identically 1, integrates to
    the exact tail (alpha/2) * erfc(sqrt(beta/c)), so no quadrature interval
    straddles the kink at x = 1/c.
    """
    alpha, beta = mod.alpha, mod.beta
    prefactor = alpha * math.sqrt(beta) / (2.0 * math.sqrt(math.pi))
    u_cap = math.sqrt(max(50.0 / beta, 50.0))
    if c > 0:
        upper = min(math.sqrt(1.0 / c), u_cap)
        tail = 0.5 * alpha * specfun.erfc(math.sqrt(beta / c))
    else:
        upper = u_cap
        tail = 0.0

    def integrand(u: float) -> float:
        return 2.0 * math.exp(-beta * u * u) * cdf(u * u)

    return prefactor * _adaptive_quad(integrand, 0.0, upper, spec) + tail


def ser(
    config: SystemConfig,
    direction: Direction,
    mod: Modulation,
    spec: QuadratureSpec | None = None,
) -> float:
    """Symbol error rate by numerical integration of the exact outage CDF."""
    _require_matched(config, "the SER quadrature")
    if spec is None:
        spec = QuadratureSpec()
    dc = derived_constants(config, direction)
    return _ser_from_cdf(
        lambda x: outage_probability(config, OutageQuery(x, direction)),
        dc.c,
        mod,
        spec,
    )


def ser_asymptotic(mod: Modulation, c: float) -> float:
    """High-power SER floor for identical average channel gains.

    (alpha c / (2 beta sqrt(pi))) * gamma(3/2, beta/c) + (alpha/2) * erfc(sqrt(beta/c)).
    Strictly positive for any c > 0: impairments leave an irreducible error
    floor that no transmit power can cross.
    """
    if not c > 0:
        raise ValueError("SER floor is 0 under ideal hardware; requires c > 0")
    ratio = mod.beta / c
    value = (mod.alpha * c / (2.0 * mod.beta * math.sqrt(math.pi))) * specfun.lower_incomplete_gamma(1.5, ratio)
    return value + 0.5 * mod.alpha * specfun.erfc(math.sqrt(ratio))


def ser_floor_quadrature(
    mod: Modulation,
    omega_i: float,
    omega_ri: float,
    c: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """High-power SER floor for arbitrary channel gains by quadrature.

    Applies the CDF-integral SER formula to the asymptotic outage floor.
    Extends the closed-form floor, which is only stated for omega_i ==
    omega_ri, and reduces to it in that case.
    """
    if not c > 0:
        raise ValueError("SER floor is 0 under ideal hardware; requires c > 0")
    if spec is None:
        spec = QuadratureSpec()
    return _ser_from_cdf(
        lambda x: outage_asymptotic(omega_i, omega_ri, c, x),
        c,
        mod,
        spec,
    )


def invert_impairment_for_op(
    target_op: float,
    x: float,
    omega_i: float,
    omega_ri: float,
) -> float:
    """Largest impairment severity c whose outage floor stays at target_op.

    The floor is a Moebius function of c*x, so the inverse is closed form:
    c = target * omega_ri / (x * (omega_i - target * (omega_i - omega_ri))).
    """
    if not 0.0 < target_op < 1.0:
        raise InfeasibleTargetError("target outage probability must lie in (0, 1)")
    if not x > 0:
        raise ValueError("threshold x must be strictly positive")
    if not (omega_i > 0 and omega_ri > 0):
        raise ValueError("average channel gains must be positive")
    denom = x * (omega_i - target_op * (omega_i - omega_ri))
    if denom <= 0:
        raise InfeasibleTargetError("no finite impairment bound for these parameters")
    c = target_op * omega_ri / denom
    check = outage_asymptotic(omega_i, omega_ri, c, x)
    if abs(check - target_op) > 1e-12 * max(target_op, 1.0):
        raise ArithmeticError(
            f"inversion self-check failed: forward value {check!r} vs target {target_op!r}"
        )
    return c


def invert_impairment_for_ser(target_ser: float, mod: Modulation) -> float:
    """Impairment severity c whose SER floor equals target_ser (bisection).

    The floor increases strictly with c and spans (0, alpha/2), so a
    geometric bracket around the small-c approximation alpha*c/(4*beta)
    always exists; bisection stops once the bracket is below 1e-12 relative.
    """
    if not 0.0 < target_ser < 0.5 * mod.alpha:
        raise InfeasibleTargetError(
            f"target SER must lie in (0, alpha/2) = (0, {0.5 * mod.alpha!r})"
        )
    guess = max(4.0 * mod.beta * target_ser / mod.alpha, 1e-300)
    lo = hi = guess
    for _ in range(2000):
        if ser_asymptotic(mod, lo) <= target_ser:
            break
        lo *= 0.25
    else:
        raise ArithmeticError("failed to bracket the SER floor from below")
    for _ in range(2000):
        if ser_asymptotic(mod, hi) >= target_ser:
            break
        hi *= 4.0
    else:
        raise ArithmeticError("failed to bracket the SER floor from above")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-13 * mid:
            break
        if ser_asymptotic(mod, mid) < target_ser:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
