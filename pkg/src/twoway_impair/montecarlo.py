"""Stochastic validation of the closed-form results by direct sampling.

Draws Rayleigh channel gains (and, for the signal-level route, the full
complex signal chain including relay distortion noise) and estimates outage
probabilities and symbol error rates with confidence intervals.

Determinism contract: every estimate is a pure function of
(seed, n_samples, n_chunks).  Each chunk owns a Philox counter-based stream
keyed by (seed, chunk index), and chunk tallies are merged in chunk order, so
results are bit-identical no matter how many threads execute the chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.special import erfc as _erfc_vec

from .analytic import Modulation, OutageQuery
from .model import Direction, SystemConfig, relaying_gain, sndr

__all__ = [
    "McConfig",
    "McEstimate",
    "SignalRealization",
    "available_lanes",
    "chunk_rng",
    "sample_channel_gains",
    "simulate_signal_chain",
    "wilson_interval",
    "mc_outage",
    "mc_ser_expectation",
    "mc_ser_signal_level",
    "mc_outage_asymptotic",
]

_MAX_SEED = 2**64


@dataclass(frozen=True)
class McConfig:
    """Sampling plan: sample count, stream seed, chunking, CI confidence.

    n_chunks=None resolves to the number of available execution lanes at run
    time; pin it explicitly whenever reproducibility across machines matters
    (the estimate depends on the chunk partition, not on thread scheduling).
    """

    seed: int
    n_samples: int = 10**6
    n_chunks: int | None = None
    confidence: float = 0.95

    def __post_init__(self):
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.n_chunks is not None and not 1 <= self.n_chunks <= self.n_samples:
            raise ValueError("n_chunks must be in [1, n_samples]")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class McEstimate:
    """A Monte-Carlo estimate with its confidence interval and provenance."""

    mean: float
    ci_low: float
    ci_high: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class SignalRealization:
    """One batch of sampled signal-chain variables (arrays of equal length).

    y_i is the receiving terminal's sample after subtracting the relayed echo
    of its own symbol (self-interference cancellation with known channel and
    gain).
    """

    h1: np.ndarray
    h2: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    eta_3r: np.ndarray
    eta_3t: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    nu3: np.ndarray
    y3: np.ndarray
    y_i: np.ndarray


def available_lanes() -> int:
    """Number of parallel execution lanes (TWOWAY_IMPAIR_THREADS caps it)."""
    env = os.environ.get("TWOWAY_IMPAIR_THREADS")
    if env is not None:
        try:
            lanes = int(env)
        except ValueError:
            raise ValueError("TWOWAY_IMPAIR_THREADS must be a positive integer") from None
        if lanes < 1:
            raise ValueError("TWOWAY_IMPAIR_THREADS must be a positive integer")
        return lanes
    return os.cpu_count() or 1


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """Independent counter-based stream for one chunk.

    Philox is keyed directly with (seed, chunk_index), so sub-streams are
    independent by construction and reproducible without any jump-ahead
    bookkeeping.
    """
    key = np.array([seed, chunk_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_channel_gains(rng: np.random.Generator, omega1: float, omega2: float, size=None):
    """Draw squared channel magnitudes: independent exponentials with means omega1, omega2."""
    rho1 = rng.exponential(omega1, size)
    rho2 = rng.exponential(omega2, size)
    return rho1, rho2


def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion.

    Chosen over the Wald interval because outage probabilities near 0 and 1
    are routine here and Wald is miscalibrated at the edges.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    z = NormalDist().inv_cdf(0.5 + 0.5 * confidence)
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    margin = (z / denom) * np.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials))
    return max(0.0, center - margin), min(1.0, center + margin)


def _chunk_sizes(n_samples: int, n_chunks: int) -> list[int]:
    base, rem = divmod(n_samples, n_chunks)
    return [base + 1] * rem + [base] * (n_chunks - rem)


def _run_chunks(mc: McConfig, worker):
    """Evaluate worker(rng, count) per chunk and sum the tally tuples in chunk order."""
    n_chunks = mc.n_chunks if mc.n_chunks is not None else min(available_lanes(), mc.n_samples)
    sizes = _chunk_sizes(mc.n_samples, n_chunks)

    def one(idx: int):
        return worker(chunk_rng(mc.seed, idx), sizes[idx])

    lanes = min(available_lanes(), n_chunks)
    if lanes > 1:
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            tallies = list(pool.map(one, range(n_chunks)))
    else:
        tallies = [one(idx) for idx in range(n_chunks)]

    totals = list(tallies[0])
    for tally in tallies[1:]:
        for pos, value in enumerate(tally):
            totals[pos] += value
    return totals


def _proportion_estimate(successes: int, mc: McConfig) -> McEstimate:
    lo, hi = wilson_interval(successes, mc.n_samples, mc.confidence)
    return McEstimate(
        mean=successes / mc.n_samples,
        ci_low=lo,
        ci_high=hi,
        n_samples=mc.n_samples,
        seed=mc.seed,
    )


def mc_outage(config: SystemConfig, query: OutageQuery, mc: McConfig) -> McEstimate:
    """Estimate Pr{SNDR_i <= x} by sampling channel gains.

    Goes through model.sndr, so a mismatched gain assumption is honored
    (explicit-gain route); ties with the threshold count as outage.
    """
    if query.x < 0:
        raise ValueError("outage threshold must be nonnegative")

    def worker(rng, count):
        rho1, rho2 = sample_channel_gains(rng, config.omega1, config.omega2, count)
        values = sndr(config, query.direction, rho1, rho2)
        return (int(np.count_nonzero(values <= query.x)),)

    (successes,) = _run_chunks(mc, worker)
    return _proportion_estimate(successes, mc)


def mc_ser_expectation(config: SystemConfig, direction: Direction, mod: Modulation, mc: McConfig) -> McEstimate:
    """Estimate the SER as the fading average of alpha*Q(sqrt(2*beta*SNDR)).

    Central-limit interval from the sample standard error; the averaged
    values are bounded in [0, alpha].
    """

    def worker(rng, count):
        rho1, rho2 = sample_channel_gains(rng, config.omega1, config.omega2, count)
        values = sndr(config, direction, rho1, rho2)
        # Q(sqrt(2*beta*s)) = erfc(sqrt(beta*s))/2
        per_sample = mod.alpha * 0.5 * _erfc_vec(np.sqrt(mod.beta * values))
        return (float(per_sample.sum()), float(np.square(per_sample).sum()))

    total, total_sq = _run_chunks(mc, worker)
    n = mc.n_samples
    mean = total / n
    if n > 1:
        variance = max(0.0, (total_sq - total * total / n) / (n - 1))
        z = NormalDist().inv_cdf(0.5 + 0.5 * mc.confidence)
        margin = z * np.sqrt(variance / n)
    else:
        margin = mod.alpha
    return McEstimate(
        mean=mean,
        ci_low=max(0.0, mean - margin),
        ci_high=min(mod.alpha, mean + margin),
        n_samples=n,
        seed=mc.seed,
    )


def _cnormal(rng: np.random.Generator, count: int) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian samples."""
    return (rng.standard_normal(count) + 1j * rng.standard_normal(count)) * np.sqrt(0.5)


def simulate_signal_chain(
    rng: np.random.Generator,
    config: SystemConfig,
    direction: Direction,
    count: int,
    fixed_channels=None,
) -> SignalRealization:
    """Simulate the two-slot relaying chain with BPSK symbols.

    First slot: both terminals transmit, the relay receives through Rayleigh
    channels and adds receive-side distortion proportional to the incident
    power.  Second slot: the relay scales by the variable gain, adds
    transmit-side distortion, and broadcasts; the receiving terminal cancels
    the echo of its own symbol exactly.  `fixed_channels=(h1, h2)` freezes
    the channels (used to check the conditional distortion variance).
    """
    if fixed_channels is None:
        h1 = np.sqrt(config.omega1) * _cnormal(rng, count)
        h2 = np.sqrt(config.omega2) * _cnormal(rng, count)
    else:
        h1 = np.full(count, fixed_channels[0], dtype=complex)
        h2 = np.full(count, fixed_channels[1], dtype=complex)
    rho1 = np.abs(h1) ** 2
    rho2 = np.abs(h2) ** 2

    s1 = np.sqrt(config.p1) * (2.0 * rng.integers(0, 2, count) - 1.0)
    s2 = np.sqrt(config.p2) * (2.0 * rng.integers(0, 2, count) - 1.0)

    nu3 = np.sqrt(config.n3) * _cnormal(rng, count)
    eta_3r_var = config.kappa_r**2 * (rho1 * config.p1 + rho2 * config.p2)
    eta_3r = np.sqrt(eta_3r_var) * _cnormal(rng, count)
    y3 = h1 * s1 + h2 * s2 + eta_3r + nu3

    eta_3t = np.sqrt(config.kappa_t**2 * config.p3) * _cnormal(rng, count)
    nu1 = np.sqrt(config.n1) * _cnormal(rng, count)
    nu2 = np.sqrt(config.n2) * _cnormal(rng, count)

    gain = relaying_gain(config, rho1, rho2)
    if direction.i == 1:
        h_i, s_i, nu_i = h1, s1, nu1
    else:
        h_i, s_i, nu_i = h2, s2, nu2
    received = h_i * (gain * y3 + eta_3t) + nu_i
    y_i = received - gain * h_i**2 * s_i

    return SignalRealization(
        h1=h1, h2=h2, s1=s1, s2=s2,
        eta_3r=eta_3r, eta_3t=eta_3t,
        nu1=nu1, nu2=nu2, nu3=nu3,
        y3=y3, y_i=y_i,
    )


def mc_ser_signal_level(config: SystemConfig, direction: Direction, mc: McConfig) -> McEstimate:
    """Estimate the BPSK SER by explicit symbol detection on the signal chain.

    Coherent maximum-likelihood threshold detection against the known
    composite coefficient G*h1*h2; supports matched and mismatched gain
    assumptions alike since the chain is simulated, not analyzed.
    """

    def worker(rng, count):
        sim = simulate_signal_chain(rng, config, direction, count)
        rho1 = np.abs(sim.h1) ** 2
        rho2 = np.abs(sim.h2) ** 2
        coeff = relaying_gain(config, rho1, rho2) * sim.h1 * sim.h2
        stat = np.real(sim.y_i * np.conj(coeff))
        s_ri = sim.s1 if direction.r_i == 1 else sim.s2
        errors = int(np.count_nonzero((stat > 0) != (s_ri > 0)))
        return (errors,)

    (errors,) = _run_chunks(mc, worker)
    return _proportion_estimate(errors, mc)


def mc_outage_asymptotic(
    omega1: float,
    omega2: float,
    direction: Direction,
    c: float,
    x: float,
    mc: McConfig,
) -> McEstimate:
    """Estimate the high-power outage floor Pr{rho_ri / ((rho1+rho2) c) <= x} directly."""
    if not c > 0:
        raise ValueError("asymptotic outage sampling requires c > 0")
    if not x > 0:
        raise ValueError("threshold must be strictly positive")

    def worker(rng, count):
        rho1, rho2 = sample_channel_gains(rng, omega1, omega2, count)
        rho_ri = rho2 if direction.i == 1 else rho1
        values = rho_ri / ((rho1 + rho2) * c)
        return (int(np.count_nonzero(values <= x)),)

    (successes,) = _run_chunks(mc, worker)
    return _proportion_estimate(successes, mc)
