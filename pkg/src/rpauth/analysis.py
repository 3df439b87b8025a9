"""Closed-form error probabilities and offline approximations of the test.

Under H1 the test statistic is Rician, so missed detection is one minus a
first-order Marcum Q. When the verifier only has statistical channel
knowledge, the realized threshold and statistic scale become random; their
squares are shifted exponentials, which gives closed-form mean squares used
as representative operating values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfn import DomainError, marcum_q1, rice_mean
from .pingpong import compute_beta
from .worldmodel import Device, Fingerprint, SystemConfig, mean_ping_gain, mean_pong_gain


@dataclass(frozen=True)
class RiceParams:
    """Noncentrality and per-component scale of a Rician magnitude."""

    v: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and self.v >= 0.0):
            raise DomainError(f"RiceParams.v must be finite and >= 0, got {self.v}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise DomainError(f"RiceParams.sigma must be finite and > 0, got {self.sigma}")


@dataclass(frozen=True)
class MarcumArgs:
    """Arguments (a, b) of Q1 in the detection probability."""

    a: float
    b: float

    def __post_init__(self):
        for name, x in (("a", self.a), ("b", self.b)):
            if not (math.isfinite(x) and x >= 0.0):
                raise DomainError(f"MarcumArgs.{name} must be finite and >= 0, got {x}")


def _shifted_pdf(y: float, rate: float, floor: float) -> float:
    if y * y < floor:
        return 0.0
    return 2.0 * rate * y * math.exp(-rate * (y * y - floor))


@dataclass(frozen=True)
class ThresholdDensity:
    """Density of the realized full-knowledge threshold under random fading.

    The squared threshold minus `floor` is exponential with the given rate;
    support starts at sqrt(floor).
    """

    rate: float
    floor: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"rate must be finite and > 0, got {self.rate}")
        if not (math.isfinite(self.floor) and self.floor >= 0.0):
            raise DomainError(f"floor must be finite and >= 0, got {self.floor}")

    @property
    def support_start(self) -> float:
        return math.sqrt(self.floor)

    def pdf(self, y: float) -> float:
        return _shifted_pdf(y, self.rate, self.floor)

    def mean_square(self) -> float:
        return self.floor + 1.0 / self.rate


@dataclass(frozen=True)
class ScaleDensity:
    """Density of the realized statistic scale (H1 Rice sigma) under fading."""

    rate: float
    floor: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise DomainError(f"rate must be finite and > 0, got {self.rate}")
        if not (math.isfinite(self.floor) and self.floor >= 0.0):
            raise DomainError(f"floor must be finite and >= 0, got {self.floor}")

    @property
    def support_start(self) -> float:
        return math.sqrt(self.floor)

    def pdf(self, s: float) -> float:
        return _shifted_pdf(s, self.rate, self.floor)

    def mean_square(self) -> float:
        return self.floor + 1.0 / self.rate


def _link_gamma(cfg: SystemConfig, sender: Device) -> float:
    if sender.id == "alice":
        return cfg.gamma_ab
    if sender.id == "eve":
        return cfg.gamma_eb
    raise DomainError("sender must be alice or eve")


def representative_beta(cfg: SystemConfig, sender: Device) -> float:
    """Relay gain evaluated at the mean forward-leg power gain."""
    h_bs_sq = _link_gamma(cfg, sender) * mean_ping_gain(cfg.bob, sender)
    return compute_beta(sender.power, cfg.bob.power, h_bs_sq, sender.noise_var)


def _neg_log(pfa: float) -> float:
    if not 0.0 < pfa < 1.0:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")
    return -math.log(pfa)


def stat_threshold_density(cfg: SystemConfig, pfa: float | None = None) -> ThresholdDensity:
    """Fading law of the realized AF threshold at a false-alarm set-point.

    Requires the legitimate sender's noise to be forwarded (sigma_A > 0);
    otherwise the threshold is deterministic and no density applies.
    """
    lg = _neg_log(cfg.pfa_setpoint if pfa is None else pfa)
    k_pb = cfg.k * cfg.bob.power
    if cfg.alice.noise_var <= 0.0:
        raise DomainError("threshold density undefined for a noiseless sender")
    gain = cfg.gamma_ab * mean_pong_gain(cfg.bob, cfg.alice)
    rate = k_pb / (lg * cfg.alice.noise_var * gain)
    beta = representative_beta(cfg, cfg.alice)
    floor = lg * cfg.bob.noise_var / (k_pb * beta ** 2)
    return ThresholdDensity(rate, floor)


def stat_scale_density(cfg: SystemConfig) -> ScaleDensity:
    """Fading law of the realized H1 statistic scale for the AF intruder path."""
    k_pb = cfg.k * cfg.bob.power
    if cfg.eve.noise_var <= 0.0:
        raise DomainError("scale density undefined for a noiseless sender")
    gain = cfg.gamma_eb * mean_pong_gain(cfg.bob, cfg.eve)
    rate = 2.0 * k_pb / (cfg.eve.noise_var * gain)
    beta = representative_beta(cfg, cfg.eve)
    floor = cfg.bob.noise_var / (2.0 * k_pb * beta ** 2)
    return ScaleDensity(rate, floor)


def af_threshold_mean_square(cfg: SystemConfig, pfa: float | None = None) -> float:
    """Exact mean of the squared realized AF threshold.

    Equals the closed-form constant-plus-inverse-rate value of the threshold
    density; also equals -ln(pfa) times the mean estimate variance, which
    holds exactly by linearity even though the density itself freezes the
    relay gain at its representative value.
    """
    return stat_threshold_density(cfg, pfa).mean_square()


def af_scale_mean_square(cfg: SystemConfig) -> float:
    """Exact mean of the squared realized H1 scale (AF intruder path)."""
    return stat_scale_density(cfg).mean_square()


def rice_statistic_params(mu_a: Fingerprint, mu_e: Fingerprint, sigma_be: float) -> RiceParams:
    """H1 law of the test statistic: Rice(|mu_E - mu_A|, sqrt(sigma_be/2))."""
    if not sigma_be > 0.0:
        raise DomainError(f"sigma_be must be > 0, got {sigma_be}")
    return RiceParams(abs(mu_e.value - mu_a.value), math.sqrt(sigma_be / 2.0))


def miss_prob_exact(mu_a: Fingerprint, mu_e: Fingerprint, sigma_be: float, delta: float) -> float:
    """Missed-detection probability at a known intruder mean and scale."""
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    rp = rice_statistic_params(mu_a, mu_e, sigma_be)
    return 1.0 - float(marcum_q1(rp.v / rp.sigma, delta / rp.sigma))


def miss_prob_from_args(args: MarcumArgs) -> float:
    """Missed-detection probability at precomputed representative arguments."""
    return 1.0 - float(marcum_q1(args.a, args.b))


def df_deflection_mean(mu_a: Fingerprint, sigma_df_be: float) -> float:
    """Mean normalized deflection a = v_T/sigma_T under the CN(1,1) intruder prior, DF.

    This is the printed offline form: the unit prior mean is left unscaled
    while the authenticated-mean coordinates are divided by the scale. It is
    exact only when sigma_df_be = 2; see df_deflection_mean_consistent.
    """
    if not sigma_df_be > 0.0:
        raise DomainError(f"sigma_df_be must be > 0, got {sigma_df_be}")
    half = sigma_df_be / 2.0
    v_sq = (1.0 - mu_a.value.real / math.sqrt(half)) ** 2 + mu_a.value.imag ** 2 / half
    return rice_mean(math.sqrt(v_sq), 1.0 / math.sqrt(sigma_df_be))


def df_deflection_mean_consistent(mu_a: Fingerprint, sigma_df_be: float) -> float:
    """Dimensionally consistent variant: every coordinate shares the scale."""
    if not sigma_df_be > 0.0:
        raise DomainError(f"sigma_df_be must be > 0, got {sigma_df_be}")
    half = sigma_df_be / 2.0
    v = abs(1.0 - mu_a.value) / math.sqrt(half)
    return rice_mean(v, 1.0 / math.sqrt(sigma_df_be))


def af_deflection_args(cfg: SystemConfig, mu_a: Fingerprint, pfa: float | None = None) -> MarcumArgs:
    """Representative (a, b) for the AF intruder path, statistical knowledge only.

    First-order ratio-of-means: the mean intruder deflection over the prior,
    divided by the root-mean-square realized scale; the threshold coordinate
    is the root-mean-square realized threshold over the same scale.
    """
    v_v = abs(1.0 - mu_a.value)
    mean_v = rice_mean(v_v, 1.0)
    rms_scale = math.sqrt(af_scale_mean_square(cfg))
    rms_delta = math.sqrt(af_threshold_mean_square(cfg, pfa))
    return MarcumArgs(mean_v / rms_scale, rms_delta / rms_scale)
