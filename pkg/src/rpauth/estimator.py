"""Least-squares fingerprint estimation from a pong observation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfn import DomainError
from .pingpong import PongObservation, round_trip
from .worldmodel import Fingerprint, RelayMode, SystemConfig


@dataclass(frozen=True)
class FingerprintEstimate:
    p: complex
    variance: float   # complex estimate-error variance, per noise circle
    relay_mode: RelayMode

    def __post_init__(self):
        # variance 0 occurs in idealized zero-noise worlds
        if not (math.isfinite(self.variance) and self.variance >= 0.0):
            raise DomainError(f"estimate variance must be finite and >= 0, got {self.variance}")


def variance_formula(obs: PongObservation) -> float:
    """Closed-form variance of the LS estimate for this observation.

    net_noise_var / ||x_tilde||^2 specializes to sigma_B|S^2/(K*P_B*beta^2)
    for AF and sigma_B^2/(K*P_S) for DF.
    """
    energy = float(np.vdot(obs.effective_training, obs.effective_training).real)
    if energy <= 0.0:
        raise DomainError("training energy must be > 0")
    return obs.net_noise_var / energy


def ls_estimate(obs: PongObservation) -> FingerprintEstimate:
    """Project the received pong onto the known training component."""
    xt = obs.effective_training
    energy = float(np.vdot(xt, xt).real)
    if energy <= 0.0:
        raise DomainError("training energy must be > 0")
    p = complex(np.vdot(xt, obs.z) / energy)
    return FingerprintEstimate(p, variance_formula(obs), obs.relay_mode)


def train_ground_truth(rng: np.random.Generator, cfg: SystemConfig, n_iters: int) -> Fingerprint:
    """Average n_iters independent LS estimates against the legitimate sender."""
    if n_iters < 1:
        raise DomainError(f"n_iters must be >= 1, got {n_iters}")
    total = 0.0 + 0.0j
    for _ in range(n_iters):
        total += ls_estimate(round_trip(rng, cfg, cfg.alice)).p
    return Fingerprint(total / n_iters)
