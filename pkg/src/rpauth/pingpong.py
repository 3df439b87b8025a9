"""One ping-pong exchange: verifier ping, sender-side reception, AF or DF pong.

The verifier broadcasts K unit-modulus training symbols. The sender echoes them
back inside the channel coherence interval, either amplifying the received
waveform (AF) or re-synthesizing the known preamble pre-multiplied by the
downlink coefficient (DF). Because the radio channel reverses as its conjugate
and the oscillator offset reverses sign, the round-trip signal coefficient
collapses to the hardware chain product times |h_c|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfn import DomainError, sample_cgauss
from .worldmodel import (
    Device,
    OscillatorOffset,
    RelayMode,
    SystemConfig,
    sample_radio_channel,
)


@dataclass(frozen=True)
class Preamble:
    """Known training sequence: K unit-modulus symbols sent at power P_B."""

    symbols: np.ndarray
    power: float

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.complex128)
        object.__setattr__(self, "symbols", sym)
        if sym.ndim != 1 or sym.size < 1:
            raise DomainError("Preamble.symbols must be a nonempty vector")
        if not np.allclose(np.abs(sym), 1.0, rtol=0.0, atol=1e-12):
            raise DomainError("Preamble symbols must be unit modulus")
        if not (math.isfinite(self.power) and self.power > 0.0):
            raise DomainError(f"Preamble.power must be finite and > 0, got {self.power}")

    @property
    def k(self) -> int:
        return self.symbols.size


@dataclass(frozen=True)
class LinkRealization:
    """One coherence interval between the verifier and a sender.

    directional_fwd/directional_rev are the verifier->sender and
    sender->verifier coefficients at the preamble start; the per-symbol
    frequency drift is applied by ping/pong. The reverse leg uses the
    conjugate radio coefficient and the negated offset.
    """

    sender: Device
    radio: complex
    offsets: OscillatorOffset
    directional_fwd: complex
    directional_rev: complex


def make_link(rng: np.random.Generator, cfg: SystemConfig, sender: Device) -> LinkRealization:
    """Draw a fresh radio channel and oscillator offset for one exchange."""
    gain = cfg.gamma_ab if sender.id == "alice" else cfg.gamma_eb
    radio = sample_radio_channel(rng, cfg.channel_modulus, gain)
    f = rng.uniform(-cfg.max_freq_offset, cfg.max_freq_offset) if cfg.max_freq_offset > 0 else 0.0
    offsets = OscillatorOffset(f, rng.uniform(0.0, 2.0 * math.pi))
    return link_from_parts(cfg, sender, radio, offsets)


def link_from_parts(cfg: SystemConfig, sender: Device, radio: complex,
                    offsets: OscillatorOffset) -> LinkRealization:
    base = np.exp(1j * offsets.phase_offset)
    fwd = cfg.bob.rp.h_tx * radio * sender.rp.h_rx * base
    rev = sender.rp.h_tx * np.conj(radio) * cfg.bob.rp.h_rx * np.conj(base)
    return LinkRealization(sender, complex(radio), offsets, complex(fwd), complex(rev))


def _drift(offsets: OscillatorOffset, k: int, symbol_period: float, sign: float) -> np.ndarray:
    t = np.arange(k) * symbol_period
    return np.exp(sign * 2j * math.pi * offsets.freq_offset * t)


@dataclass(frozen=True)
class PongObservation:
    """What the verifier holds after one exchange.

    effective_training is the known signal component the round-trip estimate
    is regressed on: sqrt(P_B)*beta*x_B for AF, sqrt(P_S)*x_B for DF.
    """

    z: np.ndarray
    effective_training: np.ndarray
    beta: float
    net_noise_var: float
    relay_mode: RelayMode

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.complex128)
        xt = np.asarray(self.effective_training, dtype=np.complex128)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "effective_training", xt)
        if z.shape != xt.shape or z.ndim != 1:
            raise DomainError("z and effective_training must be vectors of equal length")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise DomainError(f"PongObservation.beta must be finite and > 0, got {self.beta}")
        if not (math.isfinite(self.net_noise_var) and self.net_noise_var >= 0.0):
            raise DomainError("PongObservation.net_noise_var must be finite and >= 0")


def compute_beta(p_s: float, p_b: float, h_bs_sq: float, sigma_s_sq: float) -> float:
    """AF relay gain meeting the sender transmit power constraint."""
    if not (p_s > 0.0 and p_b > 0.0):
        raise DomainError("powers must be > 0")
    if h_bs_sq < 0.0 or sigma_s_sq < 0.0:
        raise DomainError("h_bs_sq and sigma_s_sq must be >= 0")
    denom = p_b * h_bs_sq + sigma_s_sq
    if denom <= 0.0:
        raise DomainError("relay input power is zero; beta undefined")
    return math.sqrt(p_s / denom)


def ping(rng: np.random.Generator, cfg: SystemConfig, link: LinkRealization,
         preamble: Preamble) -> np.ndarray:
    """Sender-side reception of the verifier's training broadcast."""
    drift = _drift(link.offsets, preamble.k, cfg.symbol_period, +1.0)
    noise = sample_cgauss(rng, 0.0j, link.sender.noise_var, size=preamble.k)
    return math.sqrt(preamble.power) * link.directional_fwd * drift * preamble.symbols + noise


def pong_af(rng: np.random.Generator, cfg: SystemConfig, link: LinkRealization,
            preamble: Preamble, y_s: np.ndarray) -> PongObservation:
    """Amplify-and-forward echo of the received ping."""
    sender = link.sender
    beta = compute_beta(sender.power, preamble.power,
                        abs(link.directional_fwd) ** 2, sender.noise_var)
    drift = _drift(link.offsets, preamble.k, cfg.symbol_period, -1.0)
    noise = sample_cgauss(rng, 0.0j, cfg.bob.noise_var, size=preamble.k)
    z = beta * link.directional_rev * drift * np.asarray(y_s) + noise
    net_var = beta ** 2 * abs(link.directional_rev) ** 2 * sender.noise_var + cfg.bob.noise_var
    xt = math.sqrt(preamble.power) * beta * preamble.symbols
    return PongObservation(z, xt, beta, net_var, RelayMode.AF)


def pong_df(rng: np.random.Generator, cfg: SystemConfig, link: LinkRealization,
            preamble: Preamble) -> PongObservation:
    """Decode-and-forward echo: known preamble pre-multiplied by the downlink.

    The sender is credited with a perfect per-symbol downlink estimate, so the
    offset drift cancels exactly as in the AF path. Transmit power is taken as
    P_S at unit downlink gain (the idealized form; it varies with |h_BS| only
    through the forwarded coefficient).
    """
    sender = link.sender
    k = preamble.k
    fwd = link.directional_fwd * _drift(link.offsets, k, cfg.symbol_period, +1.0)
    rev = link.directional_rev * _drift(link.offsets, k, cfg.symbol_period, -1.0)
    noise = sample_cgauss(rng, 0.0j, cfg.bob.noise_var, size=k)
    z = math.sqrt(sender.power) * rev * fwd * preamble.symbols + noise
    xt = math.sqrt(sender.power) * preamble.symbols
    return PongObservation(z, xt, 1.0, cfg.bob.noise_var, RelayMode.DF)


def make_preamble(rng: np.random.Generator, k: int, power: float) -> Preamble:
    """K constant-envelope symbols with pseudo-random phases."""
    if k < 1:
        raise DomainError(f"preamble length must be >= 1, got {k}")
    return Preamble(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=k)), power)


def round_trip(rng: np.random.Generator, cfg: SystemConfig, sender: Device) -> PongObservation:
    """One full ping-pong iteration with the given channel occupant."""
    link = make_link(rng, cfg, sender)
    preamble = make_preamble(rng, cfg.k, cfg.bob.power)
    y_s = ping(rng, cfg, link, preamble)
    if cfg.relay_mode is RelayMode.DF:
        return pong_df(rng, cfg, link, preamble)
    return pong_af(rng, cfg, link, preamble, y_s)


if __name__ == "__main__":
    # zero-noise sanity: run with `python -m rpauth.pingpong`
    from dataclasses import replace

    from .estimator import ls_estimate
    from .specfn import stream
    from .worldmodel import default_config, residual_fingerprint

    cfg = default_config()
    cfg = replace(cfg, bob=replace(cfg.bob, noise_var=0.0),
                  alice=replace(cfg.alice, noise_var=0.0))
    rng = stream(0)
    est = ls_estimate(round_trip(rng, cfg, cfg.alice))
    want = residual_fingerprint(cfg.alice.rp, cfg.bob.rp).value
    print(f"recovered {est.p:.12g}, fingerprint {want:.12g}")
    assert abs(est.p - want) < 1e-12
    print("ok")
