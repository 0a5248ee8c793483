"""System parameterization and instantaneous SNDR math for two-way AF relaying.

Two terminals T1, T2 exchange symbols through an amplify-and-forward relay R
whose transceiver adds power-proportional Gaussian distortion noise on both
the receive side (EVM level kappa_r) and the transmit side (kappa_t).  This
module holds the configuration types, the per-direction derived constants,
the variable relaying gain, the per-realization SNDR (two algebraically
equivalent evaluation routes), and the high-power limits.

All powers and noise variances are linear watts; dB conversion belongs to the
CLI.  Every function is pure and accepts either scalars or numpy arrays for
the channel gains rho1, rho2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ImpairmentPair",
    "SystemConfig",
    "Direction",
    "DerivedConstants",
    "HighPowerRegime",
    "derived_constants",
    "relaying_gain",
    "sndr",
    "sndr_from_gain",
    "sndr_asymptotic",
    "sndr_ceiling",
    "relaying_gain_asymptotic",
    "optimal_split",
    "equal_split_kappa",
    "link_params",
]


@dataclass(frozen=True)
class ImpairmentPair:
    """Relay EVM levels: kappa_t on the transmit side, kappa_r on the receive side."""

    kappa_t: float
    kappa_r: float

    def __post_init__(self):
        if self.kappa_t < 0 or self.kappa_r < 0:
            raise ValueError("EVM levels must be nonnegative")

    def aggregate(self) -> float:
        """Aggregate EVM sqrt(kappa_t^2 + kappa_r^2).

        A single receive-side (or transmit-side) distortion of this level
        produces the same added noise variance as the pair, so per-link
        impairment budgets can be folded into one number.
        """
        return float(np.hypot(self.kappa_t, self.kappa_r))

    def c(self) -> float:
        """Distortion severity c = kappa_t^2 + kappa_r^2 + kappa_t^2 * kappa_r^2.

        The single scalar entering every asymptotic result; c = 0 iff the
        hardware is ideal.
        """
        kt2 = self.kappa_t * self.kappa_t
        kr2 = self.kappa_r * self.kappa_r
        return kt2 + kr2 + kt2 * kr2


@dataclass(frozen=True)
class SystemConfig:
    """Full link parameterization: powers, noise variances, average channel gains.

    p1, p2, p3 are the average transmit powers of T1, T2, and the relay;
    n1, n2, n3 the corresponding noise variances; omega1, omega2 the average
    gains of the Rayleigh channels T1-R and T2-R.  `assumed_kappa_r` is the
    receive-EVM value the relay plugs into its gain normalization; leave it
    None for a relay that knows its own hardware (the matched case).
    """

    p1: float
    p2: float
    p3: float
    n1: float
    n2: float
    n3: float
    omega1: float
    omega2: float
    relay_impairments: ImpairmentPair = field(default_factory=lambda: ImpairmentPair(0.0, 0.0))
    assumed_kappa_r: float | None = None

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "n1", "n2", "n3", "omega1", "omega2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.assumed_kappa_r is not None and self.assumed_kappa_r < 0:
            raise ValueError("assumed_kappa_r must be nonnegative")

    @property
    def kappa_t(self) -> float:
        return self.relay_impairments.kappa_t

    @property
    def kappa_r(self) -> float:
        return self.relay_impairments.kappa_r

    @property
    def gain_kappa_r(self) -> float:
        """Receive EVM used inside the relaying gain (assumed value if set)."""
        if self.assumed_kappa_r is None:
            return self.relay_impairments.kappa_r
        return self.assumed_kappa_r

    @property
    def is_matched(self) -> bool:
        """True when the gain normalization uses the true receive EVM."""
        return self.assumed_kappa_r is None or self.assumed_kappa_r == self.relay_impairments.kappa_r


@dataclass(frozen=True)
class Direction:
    """Detection direction: terminal T_i decodes the symbol sent by its partner."""

    i: int

    def __post_init__(self):
        if self.i not in (1, 2):
            raise ValueError("direction index must be 1 or 2")

    @property
    def r_i(self) -> int:
        """Index of the partner terminal whose symbol is being detected."""
        return 2 // self.i


@dataclass(frozen=True)
class DerivedConstants:
    """Per-direction constants of the gain-substituted SNDR denominator."""

    a_i: float
    b_i: float
    c: float


def link_params(config: SystemConfig, direction: Direction):
    """(p_i, p_ri, n_i, omega_i, omega_ri) as seen from the receiving terminal."""
    if direction.i == 1:
        return config.p1, config.p2, config.n1, config.omega1, config.omega2
    return config.p2, config.p1, config.n2, config.omega2, config.omega1


def _rho_roles(direction: Direction, rho1, rho2):
    """(rho_i, rho_ri): own-channel gain first, partner's second."""
    if direction.i == 1:
        return rho1, rho2
    return rho2, rho1


def derived_constants(config: SystemConfig, direction: Direction) -> DerivedConstants:
    """Constants a_i, b_i, c of the closed-form SNDR denominator.

    a_i = (n3/p_ri)(1 + kappa_t^2), b_i = (n_i/p3)(1 + kappa_r^2),
    c = kappa_t^2 + kappa_r^2 + kappa_t^2 kappa_r^2.
    """
    p_i, p_ri, n_i, _, _ = link_params(config, direction)
    kt2 = config.kappa_t**2
    kr2 = config.kappa_r**2
    return DerivedConstants(
        a_i=(config.n3 / p_ri) * (1.0 + kt2),
        b_i=(n_i / config.p3) * (1.0 + kr2),
        c=config.relay_impairments.c(),
    )


def relaying_gain(config: SystemConfig, rho1, rho2):
    """Variable relaying gain G for instantaneous channel gains (rho1, rho2).

    G = sqrt(p3 / ((rho1 p1 + rho2 p2)(1 + kappa_hat_r^2) + n3)) where
    kappa_hat_r is the relay's assumed receive EVM.  With a matched
    assumption the relay's average transmit power is exactly p3; a
    mismatched assumption mis-normalizes the output power.
    """
    khat2 = config.gain_kappa_r**2
    received = (rho1 * config.p1 + rho2 * config.p2) * (1.0 + khat2) + config.n3
    return np.sqrt(config.p3 / received)


def sndr_from_gain(config: SystemConfig, direction: Direction, rho1, rho2):
    """SNDR at T_i evaluated through the explicit relaying gain.

    This route stays valid under a mismatched gain assumption: the gain
    carries the assumed receive EVM while the distortion variances carry the
    true one.
    """
    _, p_ri, n_i, _, _ = link_params(config, direction)
    rho_i, _ = _rho_roles(direction, rho1, rho2)
    g = relaying_gain(config, rho1, rho2)
    kr2 = config.kappa_r**2
    kt2 = config.kappa_t**2
    noise = rho_i * (config.n3 + kr2 * (rho1 * config.p1 + rho2 * config.p2))
    noise = noise + (rho_i * kt2 * config.p3 + n_i) / (g * g)
    return rho1 * rho2 * p_ri / noise


def _sndr_matched(config: SystemConfig, direction: Direction, rho1, rho2):
    """Gain-substituted closed form of the SNDR, valid for a matched gain only."""
    p_i, p_ri, n_i, _, _ = link_params(config, direction)
    rho_i, rho_ri = _rho_roles(direction, rho1, rho2)
    dc = derived_constants(config, direction)
    ratio = p_i / p_ri
    denom = (
        rho_i * rho_i * ratio * dc.c
        + rho1 * rho2 * dc.c
        + rho_ri * dc.b_i
        + rho_i * (dc.a_i + ratio * dc.b_i)
        + n_i * config.n3 / (p_ri * config.p3)
    )
    return rho1 * rho2 / denom


def sndr(config: SystemConfig, direction: Direction, rho1, rho2):
    """Effective SNDR at terminal T_i for channel gains (rho1, rho2).

    Matched configurations use the gain-substituted closed form; mismatched
    ones fall back to the explicit-gain route, which is the only one that is
    correct there.  rho values of exactly 0 are legal and yield SNDR 0.
    """
    if config.is_matched:
        return _sndr_matched(config, direction, rho1, rho2)
    return sndr_from_gain(config, direction, rho1, rho2)


def sndr_asymptotic(direction: Direction, rho1, rho2, c: float):
    """High-power limit of the SNDR: rho_ri / ((rho1 + rho2) c).

    Holds when p1 = p2 = tau*p3 grow without bound; the power ratio tau
    cancels.  Only the impairment severity c and the channel-gain ratio
    survive, so the limit stays random: performance floors follow.
    """
    if not c > 0:
        raise ValueError("asymptotic SNDR is unbounded for ideal hardware (c = 0)")
    _, rho_ri = _rho_roles(direction, rho1, rho2)
    return rho_ri / ((rho1 + rho2) * c)


def sndr_ceiling(c: float) -> float:
    """Hard upper bound 1/c on the SNDR, independent of transmit power."""
    if not c > 0:
        raise ValueError("no SNDR ceiling under ideal hardware (c = 0)")
    return 1.0 / c


@dataclass(frozen=True)
class HighPowerRegime:
    """Power scaling p1 = p2 = tau * p3 with every power sent to infinity."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be strictly positive")


def relaying_gain_asymptotic(regime: HighPowerRegime, rho1, rho2, kappa_r: float):
    """Limit of the relaying gain: sqrt(1 / (tau (rho1+rho2) (1+kappa_r^2))).

    Finite and strictly positive, which is what keeps the relay's distortion
    from being amplified away in the high-power regime.
    """
    return np.sqrt(1.0 / (regime.tau * (rho1 + rho2) * (1.0 + kappa_r**2)))


def optimal_split(kappa_tot: float) -> ImpairmentPair:
    """Even transmit/receive split of a total EVM budget kappa_t + kappa_r.

    The even split maximizes kappa_t*kappa_r and therefore minimizes
    c = (kappa_t + kappa_r)^2 - 2 kappa_t kappa_r + (kappa_t kappa_r)^2 over
    the fixed-sum constraint (for budgets below 2, which covers any real
    EVM): same-quality hardware on both sides is optimal.
    """
    if not kappa_tot > 0:
        raise ValueError("kappa_tot must be strictly positive")
    half = 0.5 * kappa_tot
    return ImpairmentPair(half, half)


def equal_split_kappa(c: float) -> float:
    """Per-side EVM of an even split achieving severity c.

    Inverts c = 2 kappa^2 + kappa^4 to kappa = sqrt(sqrt(1 + c) - 1).
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    return float(np.sqrt(np.sqrt(1.0 + c) - 1.0))
