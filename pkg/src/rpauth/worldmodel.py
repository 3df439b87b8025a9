"""Device, link and experiment-configuration model.

A world consists of the verifier Bob plus two candidate senders (the legitimate
Alice and the intruder Eve). Each device owns a pair of complex transmit/receive
chain coefficients; the product of the four coefficients along a round trip is
the residual fingerprint the detector authenticates against.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .specfn import DomainError, sample_cgauss

try:  # stdlib on 3.11+, the tomli backport below
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml


class ConfigError(ValueError):
    """A configuration file or mapping is malformed."""


class RelayMode(str, Enum):
    AF = "af"
    DF = "df"


class CsiMode(str, Enum):
    FULL = "full"
    STATISTICAL = "stat"


class ChannelModulus(str, Enum):
    UNIT = "unit"
    RAYLEIGH = "rayleigh"


_DEVICE_IDS = ("alice", "bob", "eve")


@dataclass(frozen=True)
class ReciprocityParams:
    """Transmit/receive chain coefficients of one radio."""

    h_tx: complex
    h_rx: complex

    def __post_init__(self):
        for name, h in (("h_tx", self.h_tx), ("h_rx", self.h_rx)):
            h = complex(h)
            if not (math.isfinite(h.real) and math.isfinite(h.imag)):
                raise DomainError(f"ReciprocityParams.{name} must be finite")
            if abs(h) == 0.0:
                raise DomainError(f"ReciprocityParams.{name} must have nonzero magnitude")


@dataclass(frozen=True)
class OscillatorOffset:
    """Residual carrier frequency (Hz) and phase (rad) offset of one link direction."""

    freq_offset: float
    phase_offset: float

    def __post_init__(self):
        if not (math.isfinite(self.freq_offset) and math.isfinite(self.phase_offset)):
            raise DomainError("OscillatorOffset fields must be finite")

    def negated(self) -> "OscillatorOffset":
        return OscillatorOffset(-self.freq_offset, -self.phase_offset)


@dataclass(frozen=True)
class Device:
    """One radio: identity, chain coefficients, receive noise variance, transmit power."""

    id: str
    rp: ReciprocityParams
    noise_var: float
    power: float

    def __post_init__(self):
        if self.id not in _DEVICE_IDS:
            raise DomainError(f"Device.id must be one of {_DEVICE_IDS}, got {self.id!r}")
        # noise_var 0 is allowed: idealized zero-noise worlds are used by the
        # round-trip recovery checks.
        if not (math.isfinite(self.noise_var) and self.noise_var >= 0.0):
            raise DomainError(f"Device.noise_var must be finite and >= 0, got {self.noise_var}")
        if not (math.isfinite(self.power) and self.power > 0.0):
            raise DomainError(f"Device.power must be finite and > 0, got {self.power}")


@dataclass(frozen=True)
class Fingerprint:
    """Residual round-trip chain product a verifier can authenticate against."""

    value: complex


@dataclass(frozen=True)
class SystemConfig:
    """Full experiment configuration (world plus detector operating point)."""

    bob: Device
    alice: Device
    eve: Device
    k: int                        # training symbols per slot
    pfa_setpoint: float           # false-alarm design point, in (0, 1)
    relay_mode: RelayMode
    csi_mode: CsiMode
    channel_modulus: ChannelModulus
    gamma_ab: float               # mean radio-channel power gain, Alice-Bob link
    gamma_eb: float               # mean radio-channel power gain, Eve-Bob link
    symbol_period: float = 1e-6   # seconds between training symbols
    max_freq_offset: float = 100.0  # Hz, oscillator offset draw range

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"SystemConfig.k must be >= 1, got {self.k}")
        if not 0.0 < self.pfa_setpoint < 1.0:
            raise DomainError(f"SystemConfig.pfa_setpoint must lie in (0, 1), got {self.pfa_setpoint}")
        for name in ("gamma_ab", "gamma_eb"):
            g = getattr(self, name)
            if not (math.isfinite(g) and g > 0.0):
                raise DomainError(f"SystemConfig.{name} must be finite and > 0, got {g}")
        if not (math.isfinite(self.symbol_period) and self.symbol_period > 0.0):
            raise DomainError("SystemConfig.symbol_period must be finite and > 0")
        if not (math.isfinite(self.max_freq_offset) and self.max_freq_offset >= 0.0):
            raise DomainError("SystemConfig.max_freq_offset must be finite and >= 0")

    def sender(self, occupant: str) -> Device:
        if occupant == "alice":
            return self.alice
        if occupant == "eve":
            return self.eve
        raise DomainError(f"occupant must be 'alice' or 'eve', got {occupant!r}")


# ===== fingerprints and channel draws =======================================


def residual_fingerprint(rp_sender: ReciprocityParams, rp_verifier: ReciprocityParams) -> Fingerprint:
    """Round-trip chain product; symmetric in its two arguments."""
    return Fingerprint(rp_sender.h_tx * rp_verifier.h_rx * rp_verifier.h_tx * rp_sender.h_rx)


def alice_fingerprint(cfg: SystemConfig) -> Fingerprint:
    return residual_fingerprint(cfg.alice.rp, cfg.bob.rp)


def eve_fingerprint(cfg: SystemConfig) -> Fingerprint:
    return residual_fingerprint(cfg.eve.rp, cfg.bob.rp)


def sample_eve_fingerprint(rng: np.random.Generator) -> Fingerprint:
    """Intruder fingerprint prior: CN(1, 1)."""
    return Fingerprint(sample_cgauss(rng, 1.0 + 0.0j, 1.0))


def sample_radio_channel(rng: np.random.Generator, modulus: ChannelModulus,
                         gain: float = 1.0) -> complex:
    """One reciprocal radio-channel coefficient draw at mean power `gain`."""
    if gain <= 0.0:
        raise DomainError(f"channel gain must be > 0, got {gain}")
    if modulus is ChannelModulus.UNIT:
        return math.sqrt(gain) * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    if modulus is ChannelModulus.RAYLEIGH:
        return sample_cgauss(rng, 0.0 + 0.0j, gain)
    raise DomainError(f"unknown channel modulus {modulus!r}")


def sample_reciprocity_params(rng: np.random.Generator) -> ReciprocityParams:
    """Randomized chain coefficients, each CN(1, 0.1) (near-unit hardware)."""
    return ReciprocityParams(sample_cgauss(rng, 1.0 + 0.0j, 0.1),
                             sample_cgauss(rng, 1.0 + 0.0j, 0.1))


def mean_ping_gain(bob: Device, sender: Device) -> float:
    """Mean power gain of the verifier->sender leg (enters the relay gain)."""
    return abs(bob.rp.h_tx * sender.rp.h_rx) ** 2


def mean_pong_gain(bob: Device, sender: Device) -> float:
    """Mean power gain of the sender->verifier leg (forwarded-noise weight)."""
    return abs(sender.rp.h_tx * bob.rp.h_rx) ** 2


# ===== default world and derived configurations =============================


def _unit(phase: float) -> complex:
    return cmath.exp(1j * phase)


def default_config() -> SystemConfig:
    """Unit-power, unit-noise world with unit-modulus chains.

    Phases are fixed and distinct; Alice's are chosen so her fingerprint is
    1+0j (the center of the intruder prior), Eve's configured fingerprint is
    e^{j2.2}.
    """
    bob = Device("bob", ReciprocityParams(_unit(0.7), _unit(-0.4)), 1.0, 1.0)
    alice = Device("alice", ReciprocityParams(_unit(0.9), _unit(-1.2)), 1.0, 1.0)
    eve = Device("eve", ReciprocityParams(_unit(1.6), _unit(0.3)), 1.0, 1.0)
    return SystemConfig(
        bob=bob, alice=alice, eve=eve,
        k=16, pfa_setpoint=0.1,
        relay_mode=RelayMode.AF, csi_mode=CsiMode.FULL,
        channel_modulus=ChannelModulus.UNIT,
        gamma_ab=1.0, gamma_eb=1.0,
    )


def with_link_snr(cfg: SystemConfig, gamma_ab: float, gamma_eb: float) -> SystemConfig:
    """World whose radio channels have mean power gains (gamma_ab, gamma_eb).

    The gain rides on the reciprocal channel, so it touches both legs of a
    link while hardware fingerprints stay fixed; raising it is how operating
    SNR is swept.
    """
    if not (gamma_ab > 0.0 and gamma_eb > 0.0):
        raise DomainError("link gains must be > 0")
    return replace(cfg, gamma_ab=gamma_ab, gamma_eb=gamma_eb)


def scale_powers(cfg: SystemConfig, factor: float) -> SystemConfig:
    """World with every transmit power multiplied by `factor`."""
    if not factor > 0.0:
        raise DomainError("power factor must be > 0")
    return replace(
        cfg,
        bob=replace(cfg.bob, power=cfg.bob.power * factor),
        alice=replace(cfg.alice, power=cfg.alice.power * factor),
        eve=replace(cfg.eve, power=cfg.eve.power * factor),
    )


# ===== structured-text loading ==============================================

_DEVICE_KEYS = {"power", "noise_var", "h_tx", "h_rx"}
_SYSTEM_KEYS = {
    "k", "pfa_setpoint", "relay_mode", "csi_mode", "channel_modulus",
    "gamma_ab", "gamma_eb", "symbol_period", "max_freq_offset",
    "bob", "alice", "eve",
}


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2 and \
            all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a [re, im] pair, got {value!r}")


def _as_number(value, where: str) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(f"{where}: expected a number, got {value!r}")


def _device_from_mapping(dev_id: str, mapping, defaults: Device, where: str) -> Device:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(mapping) - _DEVICE_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    rp = defaults.rp
    if "h_tx" in mapping or "h_rx" in mapping:
        h_tx = _as_complex(mapping["h_tx"], f"{where}.h_tx") if "h_tx" in mapping else rp.h_tx
        h_rx = _as_complex(mapping["h_rx"], f"{where}.h_rx") if "h_rx" in mapping else rp.h_rx
        rp = ReciprocityParams(h_tx, h_rx)
    power = _as_number(mapping["power"], f"{where}.power") if "power" in mapping else defaults.power
    noise = _as_number(mapping["noise_var"], f"{where}.noise_var") if "noise_var" in mapping else defaults.noise_var
    try:
        return Device(dev_id, rp, noise, power)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def system_config_from_mapping(mapping, where: str = "system") -> SystemConfig:
    """Build a SystemConfig from a parsed key/value mapping.

    Unspecified keys fall back to the default world; unknown keys are an error.
    """
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(mapping) - _SYSTEM_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    base = default_config()
    devices = {}
    for dev_id in _DEVICE_IDS:
        defaults = getattr(base, dev_id)
        devices[dev_id] = _device_from_mapping(dev_id, mapping.get(dev_id, {}), defaults, f"{where}.{dev_id}")

    def enum_field(key, enum_cls, default):
        if key not in mapping:
            return default
        raw = mapping[key]
        try:
            return enum_cls(raw)
        except ValueError:
            valid = sorted(m.value for m in enum_cls)
            raise ConfigError(f"{where}.{key}: expected one of {valid}, got {raw!r}") from None

    k = mapping.get("k", base.k)
    if not isinstance(k, int) or isinstance(k, bool):
        raise ConfigError(f"{where}.k: expected an integer, got {k!r}")
    try:
        cfg = SystemConfig(
            bob=devices["bob"], alice=devices["alice"], eve=devices["eve"],
            k=k,
            pfa_setpoint=_as_number(mapping["pfa_setpoint"], f"{where}.pfa_setpoint")
            if "pfa_setpoint" in mapping else base.pfa_setpoint,
            relay_mode=enum_field("relay_mode", RelayMode, base.relay_mode),
            csi_mode=enum_field("csi_mode", CsiMode, base.csi_mode),
            channel_modulus=enum_field("channel_modulus", ChannelModulus, base.channel_modulus),
            gamma_ab=_as_number(mapping["gamma_ab"], f"{where}.gamma_ab")
            if "gamma_ab" in mapping else base.gamma_ab,
            gamma_eb=_as_number(mapping["gamma_eb"], f"{where}.gamma_eb")
            if "gamma_eb" in mapping else base.gamma_eb,
            symbol_period=_as_number(mapping["symbol_period"], f"{where}.symbol_period")
            if "symbol_period" in mapping else base.symbol_period,
            max_freq_offset=_as_number(mapping["max_freq_offset"], f"{where}.max_freq_offset")
            if "max_freq_offset" in mapping else base.max_freq_offset,
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return cfg


def load_system_config(path) -> SystemConfig:
    """Load a SystemConfig from a structured-text (TOML) file."""
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid structured text: {exc}") from exc
    return system_config_from_mapping(data, where=str(path))
