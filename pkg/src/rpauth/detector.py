"""Binary sender-authentication test with Neyman-Pearson threshold selection.

The verifier compares |p - mu_A| against a threshold chosen for a target
false-alarm probability. With full knowledge the threshold uses the realized
estimate variance of the legitimate link; with statistical knowledge (AF only)
it uses the root-mean-square threshold over the fading law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .specfn import DomainError
from .analysis import af_threshold_mean_square
from .estimator import FingerprintEstimate, ls_estimate
from .pingpong import LinkRealization, compute_beta, make_link, round_trip
from .worldmodel import CsiMode, Device, Fingerprint, RelayMode, SystemConfig


class Hypothesis(str, Enum):
    H0_ACCEPT = "H0_accept"
    H1_REJECT = "H1_reject"


@dataclass(frozen=True)
class Decision:
    hypothesis: Hypothesis
    statistic: float
    threshold: float

    def __post_init__(self):
        if self.statistic < 0.0 or self.threshold < 0.0:
            raise DomainError("statistic and threshold must be >= 0")
        want = Hypothesis.H1_REJECT if self.statistic > self.threshold else Hypothesis.H0_ACCEPT
        if self.hypothesis is not want:
            raise DomainError("hypothesis inconsistent with statistic/threshold")

    @property
    def rejected(self) -> bool:
        return self.hypothesis is Hypothesis.H1_REJECT


@dataclass(frozen=True)
class ThresholdSpec:
    pfa_setpoint: float
    csi_mode: CsiMode
    value: float

    def __post_init__(self):
        if not 0.0 < self.pfa_setpoint < 1.0:
            raise DomainError("pfa_setpoint must lie in (0, 1)")
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise DomainError(f"threshold value must be finite and >= 0, got {self.value}")


def threshold_full_csi(pfa: float, sigma_ba: float) -> float:
    """Threshold hitting the false-alarm set-point at a known estimate variance."""
    if not 0.0 < pfa < 1.0:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")
    if sigma_ba < 0.0:
        raise DomainError(f"sigma_ba must be >= 0, got {sigma_ba}")
    return math.sqrt(-math.log(pfa) * sigma_ba)


def threshold_statistical_af(cfg: SystemConfig, pfa: float | None = None) -> float:
    """Root-mean-square realized threshold under the AF fading law."""
    if cfg.relay_mode is not RelayMode.AF:
        raise DomainError("statistical threshold applies to AF mode only")
    return math.sqrt(af_threshold_mean_square(cfg, pfa))


def analytic_pfa(delta: float, sigma_ba: float) -> float:
    """False-alarm probability of threshold delta at estimate variance sigma_ba."""
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if sigma_ba < 0.0:
        raise DomainError(f"sigma_ba must be >= 0, got {sigma_ba}")
    if sigma_ba == 0.0:
        return 1.0 if delta == 0.0 else 0.0
    return math.exp(-delta * delta / sigma_ba)


def decide(est: FingerprintEstimate, mu_a: Fingerprint, delta: float) -> Decision:
    """Accept H0 iff the estimate sits within delta of the trained mean."""
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    t = abs(est.p - mu_a.value)
    # ties go to H0: the accept region is closed
    hyp = Hypothesis.H1_REJECT if t > delta else Hypothesis.H0_ACCEPT
    return Decision(hyp, t, delta)


def df_variance(cfg: SystemConfig, sender: Device) -> float:
    """Deterministic DF estimate variance for a given sender power."""
    return cfg.bob.noise_var / (cfg.k * sender.power)


def af_link_variance(cfg: SystemConfig, link: LinkRealization) -> float:
    """Realized AF estimate variance over one coherence interval."""
    sender = link.sender
    beta = compute_beta(sender.power, cfg.bob.power,
                        abs(link.directional_fwd) ** 2, sender.noise_var)
    net = beta ** 2 * abs(link.directional_rev) ** 2 * sender.noise_var + cfg.bob.noise_var
    return net / (cfg.k * cfg.bob.power * beta ** 2)


def slot_threshold(rng: np.random.Generator, cfg: SystemConfig, occupant: Device,
                   est: FingerprintEstimate) -> ThresholdSpec:
    """Threshold the verifier would set for this slot.

    DF always has full knowledge (the variance is deterministic). Under AF
    with full knowledge the verifier tracks the legitimate link's realized
    variance; when the intruder occupies the slot that quantity comes from an
    independent draw of the legitimate link's own coherence interval.
    """
    pfa = cfg.pfa_setpoint
    if cfg.relay_mode is RelayMode.DF:
        return ThresholdSpec(pfa, cfg.csi_mode,
                             threshold_full_csi(pfa, df_variance(cfg, cfg.alice)))
    if cfg.csi_mode is CsiMode.STATISTICAL:
        return ThresholdSpec(pfa, cfg.csi_mode, threshold_statistical_af(cfg, pfa))
    if occupant.id == "alice":
        sigma_ba = est.variance
    else:
        sigma_ba = af_link_variance(cfg, make_link(rng, cfg, cfg.alice))
    return ThresholdSpec(pfa, cfg.csi_mode, threshold_full_csi(pfa, sigma_ba))


def authenticate_slot(rng: np.random.Generator, cfg: SystemConfig, occupant: Device,
                      mu_a: Fingerprint) -> Decision:
    """Run one slot end to end: exchange, estimate, threshold, decide."""
    obs = round_trip(rng, cfg, occupant)
    est = ls_estimate(obs)
    spec = slot_threshold(rng, cfg, occupant, est)
    return decide(est, mu_a, spec.value)
