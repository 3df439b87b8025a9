"""Monte Carlo experiment driver: deterministic trial streams, ROC sweeps, CSV.

Trials are generated in fixed-size blocks. Each block owns a random stream
keyed by (seed, purpose, pfa bits, link-gain bits, occupant, block index), so
results are byte-identical for any worker count, any sweep-grid order, and
any trial-count prefix.

The trial engine samples the sufficient statistic of a slot directly: the
least-squares estimate equals the round-trip conditional mean plus a complex
Gaussian whose variance is the closed-form estimate variance of the realized
link. Preamble phases and oscillator offsets are omitted here because the
projection is invariant to them; the slower slot-level path in the detector
module keeps the full physics and the test suite checks the two agree.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .specfn import DomainError, marcum_q1, sample_cgauss, stream
from .analysis import MarcumArgs, af_deflection_args, df_deflection_mean, miss_prob_from_args
from .detector import df_variance, threshold_full_csi, threshold_statistical_af
from .worldmodel import (
    ChannelModulus,
    ConfigError,
    CsiMode,
    Fingerprint,
    RelayMode,
    SystemConfig,
    default_config,
    mean_ping_gain,
    mean_pong_gain,
    residual_fingerprint,
    system_config_from_mapping,
    with_link_snr,
)

try:
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

_BLOCK = 8192
_TRIALS_ENV = "RPAUTH_TRIALS"

CSV_HEADER = "pfa_set,pfa_emp,pd_emp,pd_analytic,pd_approx,stderr_pd"

# log-spaced from 1e-3 to 0.9, frozen so plans and golden files are stable
DEFAULT_PFA_GRID = (
    0.001, 0.001762734383, 0.003107232506, 0.005477225575, 0.009654893846,
    0.01701901335, 0.03, 0.0528820315, 0.09321697518, 0.1643167673,
    0.2896468154, 0.5105704005, 0.9,
)


@dataclass(frozen=True)
class FixedFingerprint:
    """Intruder hardware fingerprint held constant across trials."""

    value: complex


@dataclass(frozen=True)
class RandomPerTrial:
    """Intruder hardware fingerprint drawn per trial: CN(center, 1) with the
    center at the legitimate sender's fingerprint."""


@dataclass(frozen=True)
class ExperimentPlan:
    base: SystemConfig
    pfa_grid: tuple
    snr_grid: tuple | None
    trials: int
    seed: int
    eve_model: object

    def __post_init__(self):
        grid = tuple(float(x) for x in self.pfa_grid)
        object.__setattr__(self, "pfa_grid", grid)
        if not grid:
            raise DomainError("pfa_grid must be nonempty")
        for x in grid:
            if not 0.0 < x < 1.0:
                raise DomainError(f"pfa_grid values must lie in (0, 1), got {x}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("pfa_grid must be strictly ascending")
        if self.snr_grid is not None:
            pairs = tuple((float(a), float(b)) for a, b in self.snr_grid)
            object.__setattr__(self, "snr_grid", pairs)
            for ga, ge in pairs:
                if not (ga > 0.0 and ge > 0.0):
                    raise DomainError("snr_grid gains must be > 0")
        if not isinstance(self.trials, int) or isinstance(self.trials, bool) or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if not isinstance(self.eve_model, (FixedFingerprint, RandomPerTrial)):
            raise DomainError("eve_model must be FixedFingerprint or RandomPerTrial")


@dataclass(frozen=True)
class RocPoint:
    pfa_set: float
    pfa_emp: float
    pd_emp: float
    pd_analytic: float
    pd_approx: float
    stderr_pd: float

    def __post_init__(self):
        for name in ("pfa_set", "pfa_emp", "pd_emp", "pd_analytic", "pd_approx"):
            x = getattr(self, name)
            if not (math.isfinite(x) and 0.0 <= x <= 1.0):
                raise DomainError(f"RocPoint.{name} must lie in [0, 1], got {x}")
        if not (math.isfinite(self.stderr_pd) and self.stderr_pd >= 0.0):
            raise DomainError("stderr_pd must be finite and >= 0")


def default_trials() -> int:
    """Default Monte Carlo size; the environment may lower it for quick runs."""
    raw = os.environ.get(_TRIALS_ENV)
    if raw is None:
        return 100_000
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{_TRIALS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{_TRIALS_ENV} must be >= 1, got {n}")
    return n


def default_plan() -> ExperimentPlan:
    return ExperimentPlan(
        base=default_config(),
        pfa_grid=DEFAULT_PFA_GRID,
        snr_grid=None,
        trials=default_trials(),
        seed=42,
        eve_model=RandomPerTrial(),
    )


def ideal_ground_truth(cfg: SystemConfig) -> Fingerprint:
    """Exact mean of the legitimate estimate: fingerprint times mean link power."""
    return Fingerprint(residual_fingerprint(cfg.alice.rp, cfg.bob.rp).value * cfg.gamma_ab)


# ===== trial engine ==========================================================


@dataclass(frozen=True)
class TrialArrays:
    """Per-trial sufficient statistics of simulated slots.

    cond_mean is the realized round-trip signal coefficient (fingerprint times
    realized channel power), p the LS estimate, sigma_sq its realized
    variance, threshold the per-slot decision threshold.
    """

    cond_mean: np.ndarray
    p: np.ndarray
    sigma_sq: np.ndarray
    threshold: np.ndarray


def _bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def _block_stream(seed: int, pfa: float, cfg: SystemConfig, occ_code: int, block: int):
    return stream(seed, 0, _bits(pfa), _bits(cfg.gamma_ab), _bits(cfg.gamma_eb),
                  occ_code, block)


def _channel_power(rng, cfg: SystemConfig, gamma: float, m: int) -> np.ndarray:
    if cfg.channel_modulus is ChannelModulus.RAYLEIGH:
        return gamma * rng.standard_exponential(m)
    return np.full(m, gamma)


def _fill_block(rng, cfg: SystemConfig, occupant: str, eve_model, pfa: float,
                out: TrialArrays, lo: int, hi: int) -> None:
    # always draw full blocks so a shorter run is an exact prefix of a longer one
    m = hi - lo
    bob = cfg.bob
    sender = cfg.sender(occupant)
    gamma = cfg.gamma_ab if occupant == "alice" else cfg.gamma_eb
    cp_ping = mean_ping_gain(bob, sender)
    q = _channel_power(rng, cfg, gamma, _BLOCK)

    if occupant == "alice":
        htilde = np.full(_BLOCK, residual_fingerprint(sender.rp, bob.rp).value)
        cp_pong = np.full(_BLOCK, mean_pong_gain(bob, sender))
    else:
        if isinstance(eve_model, FixedFingerprint):
            htilde = np.full(_BLOCK, complex(eve_model.value))
        else:
            center = residual_fingerprint(cfg.alice.rp, bob.rp).value
            htilde = center + sample_cgauss(rng, 0.0j, 1.0, size=_BLOCK)
        # the intruder's transmit chain is whatever realizes her fingerprint,
        # so her pong-leg gain follows from it
        cp_pong = np.abs(htilde) ** 2 / cp_ping

    k_pb = cfg.k * bob.power
    if cfg.relay_mode is RelayMode.AF:
        beta_sq = sender.power / (bob.power * cp_ping * q + sender.noise_var)
        sigma_sq = cp_pong * q * sender.noise_var / k_pb + bob.noise_var / (k_pb * beta_sq)
    else:
        sigma_sq = np.full(_BLOCK, bob.noise_var / (cfg.k * sender.power))

    noise = sample_cgauss(rng, 0.0j, 1.0, size=_BLOCK) * np.sqrt(sigma_sq)
    cond_mean = htilde * q

    if cfg.relay_mode is RelayMode.DF:
        thr = np.full(_BLOCK, threshold_full_csi(pfa, df_variance(cfg, cfg.alice)))
    elif cfg.csi_mode is CsiMode.STATISTICAL:
        thr = np.full(_BLOCK, threshold_statistical_af(cfg, pfa))
    elif occupant == "alice":
        thr = np.sqrt(-math.log(pfa) * sigma_sq)
    else:
        # full knowledge tracks the legitimate link, so draw its own interval
        q2 = _channel_power(rng, cfg, cfg.gamma_ab, _BLOCK)
        cp_ping_a = mean_ping_gain(bob, cfg.alice)
        beta2_sq = cfg.alice.power / (bob.power * cp_ping_a * q2 + cfg.alice.noise_var)
        sigma2 = (mean_pong_gain(bob, cfg.alice) * q2 * cfg.alice.noise_var / k_pb
                  + bob.noise_var / (k_pb * beta2_sq))
        thr = np.sqrt(-math.log(pfa) * sigma2)

    out.cond_mean[lo:hi] = cond_mean[:m]
    out.p[lo:hi] = (cond_mean + noise)[:m]
    out.sigma_sq[lo:hi] = sigma_sq[:m]
    out.threshold[lo:hi] = thr[:m]


def simulate_trials(cfg: SystemConfig, occupant: str, eve_model, trials: int,
                    seed: int, pfa: float | None = None) -> TrialArrays:
    """Simulate `trials` authentication slots for one occupant at one set-point."""
    if occupant not in ("alice", "eve"):
        raise DomainError(f"occupant must be 'alice' or 'eve', got {occupant!r}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    pfa = cfg.pfa_setpoint if pfa is None else float(pfa)
    if not 0.0 < pfa < 1.0:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")
    out = TrialArrays(
        cond_mean=np.empty(trials, dtype=np.complex128),
        p=np.empty(trials, dtype=np.complex128),
        sigma_sq=np.empty(trials, dtype=np.float64),
        threshold=np.empty(trials, dtype=np.float64),
    )
    occ_code = 0 if occupant == "alice" else 1
    for block in range(0, (trials + _BLOCK - 1) // _BLOCK):
        lo = block * _BLOCK
        hi = min(lo + _BLOCK, trials)
        rng = _block_stream(seed, pfa, cfg, occ_code, block)
        _fill_block(rng, cfg, occupant, eve_model, pfa, out, lo, hi)
    return out


def _mean_detection_prob(arrays: TrialArrays, mu_a: complex) -> float:
    """Average closed-form detection probability at the realized per-trial values."""
    v = np.abs(arrays.cond_mean - mu_a)
    noisy = arrays.sigma_sq > 0.0
    qvals = np.where(v > arrays.threshold, 1.0, 0.0)
    if np.any(noisy):
        sig_t = np.sqrt(arrays.sigma_sq[noisy] / 2.0)
        qvals[noisy] = marcum_q1(v[noisy] / sig_t, arrays.threshold[noisy] / sig_t)
    return float(np.mean(qvals))


def _point_pd_approx(cfg: SystemConfig, mu_a: complex, pfa: float) -> float:
    """Offline detection probability from representative arguments."""
    if cfg.relay_mode is RelayMode.AF:
        args = af_deflection_args(cfg, Fingerprint(mu_a), pfa)
    else:
        sigma_be = df_variance(cfg, cfg.eve)
        delta = threshold_full_csi(pfa, df_variance(cfg, cfg.alice))
        args = MarcumArgs(df_deflection_mean(Fingerprint(mu_a), sigma_be),
                          delta / math.sqrt(sigma_be / 2.0))
    return 1.0 - miss_prob_from_args(args)


def run_point(plan: ExperimentPlan, pfa: float) -> RocPoint:
    """Monte Carlo both hypotheses at one false-alarm set-point."""
    cfg = plan.base
    mu_a = ideal_ground_truth(cfg).value
    h0 = simulate_trials(cfg, "alice", plan.eve_model, plan.trials, plan.seed, pfa)
    h1 = simulate_trials(cfg, "eve", plan.eve_model, plan.trials, plan.seed, pfa)
    pfa_emp = float(np.mean(np.abs(h0.p - mu_a) > h0.threshold))
    pd_emp = float(np.mean(np.abs(h1.p - mu_a) > h1.threshold))
    return RocPoint(
        pfa_set=pfa,
        pfa_emp=pfa_emp,
        pd_emp=pd_emp,
        pd_analytic=_mean_detection_prob(h1, mu_a),
        pd_approx=_point_pd_approx(cfg, mu_a, pfa),
        stderr_pd=math.sqrt(pd_emp * (1.0 - pd_emp) / plan.trials),
    )


def _run_point_task(args) -> RocPoint:
    plan, pfa = args
    return run_point(plan, pfa)


def run_roc(plan: ExperimentPlan, workers: int = 1) -> list:
    """One RocPoint per pfa_grid entry, in grid order."""
    tasks = [(plan, pfa) for pfa in plan.pfa_grid]
    if workers <= 1:
        return [run_point(plan, pfa) for _, pfa in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point_task, tasks))


def run_snr(plan: ExperimentPlan, workers: int = 1) -> list:
    """One RocPoint per snr_grid pair at the base false-alarm set-point."""
    if not plan.snr_grid:
        raise DomainError("plan has no snr_grid")
    tasks = []
    for ga, ge in plan.snr_grid:
        variant = replace(plan, base=with_link_snr(plan.base, ga, ge), snr_grid=None)
        tasks.append((variant, variant.base.pfa_setpoint))
    if workers <= 1:
        return [run_point(p, pfa) for p, pfa in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point_task, tasks))


# ===== CSV and plan files ====================================================


def emit_csv(points, path) -> None:
    """Write ROC points as CSV: fixed header, 10 significant digits, LF newlines."""
    lines = [CSV_HEADER]
    for pt in points:
        lines.append(",".join("{:.10g}".format(x) for x in (
            pt.pfa_set, pt.pfa_emp, pt.pd_emp, pt.pd_analytic, pt.pd_approx, pt.stderr_pd)))
    payload = "\n".join(lines) + "\n"
    try:
        with open(path, "w", newline="") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write ROC CSV to {path}: {exc}") from exc


def read_roc_csv(path) -> list:
    """Parse a CSV produced by emit_csv back into RocPoints."""
    try:
        with open(path, "r", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read ROC CSV from {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path}: missing ROC CSV header")
    points = []
    for ln in lines[1:]:
        vals = [float(tok) for tok in ln.split(",")]
        if len(vals) != 6:
            raise ConfigError(f"{path}: expected 6 columns, got {len(vals)}")
        points.append(RocPoint(*vals))
    return points


_PLAN_KEYS = {"trials", "seed", "pfa_grid", "snr_grid", "eve_model", "system"}


def _eve_model_from_mapping(mapping, where: str):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(mapping) - {"kind", "value"}
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kind = mapping.get("kind", "random_per_trial")
    if kind == "random_per_trial":
        if "value" in mapping:
            raise ConfigError(f"{where}: value is only valid for kind='fixed'")
        return RandomPerTrial()
    if kind == "fixed":
        raw = mapping.get("value")
        if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
            raise ConfigError(f"{where}.value: expected a [re, im] pair")
        return FixedFingerprint(complex(float(raw[0]), float(raw[1])))
    raise ConfigError(f"{where}.kind: expected 'fixed' or 'random_per_trial', got {kind!r}")


def plan_from_mapping(mapping, where: str = "plan") -> ExperimentPlan:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(mapping) - _PLAN_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    base = system_config_from_mapping(mapping.get("system", {}), where=f"{where}.system")
    snr_grid = None
    if "snr_grid" in mapping:
        raw = mapping["snr_grid"]
        if not isinstance(raw, list) or not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in raw):
            raise ConfigError(f"{where}.snr_grid: expected a list of [gamma_ab, gamma_eb] pairs")
        snr_grid = tuple((float(a), float(b)) for a, b in raw)
    eve_model = _eve_model_from_mapping(mapping.get("eve_model", {}), f"{where}.eve_model")
    try:
        return ExperimentPlan(
            base=base,
            pfa_grid=tuple(mapping.get("pfa_grid", DEFAULT_PFA_GRID)),
            snr_grid=snr_grid,
            trials=mapping.get("trials", default_trials()),
            seed=mapping.get("seed", 42),
            eve_model=eve_model,
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_plan(path) -> ExperimentPlan:
    """Load an ExperimentPlan from a structured-text (TOML) file."""
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read plan file {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"plan file {path} is not valid structured text: {exc}") from exc
    return plan_from_mapping(data, where=str(path))
