"""Closed-form error probabilities and their offline approximations."""

import math
from dataclasses import replace

import numpy as np
import pytest

from _oracles import density_quad, marcum_ncx2
from rpauth.specfn import DomainError, rice_mean, sample_cgauss, stream
from rpauth.worldmodel import (
    ChannelModulus,
    Fingerprint,
    default_config,
    eve_fingerprint,
    mean_ping_gain,
    mean_pong_gain,
)
from rpauth.pingpong import compute_beta
from rpauth.harness import FixedFingerprint, simulate_trials
from rpauth.analysis import (
    MarcumArgs,
    RiceParams,
    ScaleDensity,
    ThresholdDensity,
    af_deflection_args,
    af_scale_mean_square,
    af_threshold_mean_square,
    df_deflection_mean,
    df_deflection_mean_consistent,
    miss_prob_exact,
    miss_prob_from_args,
    representative_beta,
    rice_statistic_params,
    stat_scale_density,
    stat_threshold_density,
)


def rayleigh_world(pfa=0.1):
    return replace(default_config(), channel_modulus=ChannelModulus.RAYLEIGH,
                   pfa_setpoint=pfa)


def test_param_validation():
    with pytest.raises(DomainError):
        RiceParams(-1.0, 1.0)
    with pytest.raises(DomainError):
        RiceParams(1.0, 0.0)
    with pytest.raises(DomainError):
        MarcumArgs(-0.1, 1.0)
    with pytest.raises(DomainError):
        ThresholdDensity(0.0, 1.0)
    with pytest.raises(DomainError):
        ScaleDensity(1.0, -1.0)


@pytest.mark.parametrize("density", [
    ThresholdDensity(rate=2.3, floor=0.4),
    ThresholdDensity(rate=0.7, floor=0.0),
    ScaleDensity(rate=5.0, floor=0.02),
])
def test_density_normalizes_and_mean_square(density):
    lo = density.support_start
    assert density.pdf(lo * 0.5) == 0.0 if lo > 0 else True
    assert density_quad(density.pdf, lo, moment=0) == pytest.approx(1.0, abs=1e-9)
    assert density_quad(density.pdf, lo, moment=2) == pytest.approx(
        density.mean_square(), abs=1e-8)


def test_stat_threshold_density_params():
    cfg = rayleigh_world()
    dens = stat_threshold_density(cfg)
    lg = -math.log(cfg.pfa_setpoint)
    k_pb = cfg.k * cfg.bob.power
    gain = cfg.gamma_ab * mean_pong_gain(cfg.bob, cfg.alice)
    assert dens.rate == pytest.approx(k_pb / (lg * cfg.alice.noise_var * gain), rel=1e-12)
    beta = representative_beta(cfg, cfg.alice)
    assert dens.floor == pytest.approx(lg * cfg.bob.noise_var / (k_pb * beta ** 2), rel=1e-12)
    with pytest.raises(DomainError):
        stat_threshold_density(replace(cfg, alice=replace(cfg.alice, noise_var=0.0)))
    with pytest.raises(DomainError):
        stat_threshold_density(cfg, pfa=1.5)


def test_representative_beta_uses_mean_ping_gain():
    cfg = replace(default_config(), gamma_ab=4.0)
    want = compute_beta(cfg.alice.power, cfg.bob.power,
                        4.0 * mean_ping_gain(cfg.bob, cfg.alice), cfg.alice.noise_var)
    assert representative_beta(cfg, cfg.alice) == pytest.approx(want, rel=1e-12)


def test_af_threshold_mean_square_is_neg_log_times_mean_variance():
    # linearity identity: closed form equals -ln(pfa) * E[realized variance]
    cfg = rayleigh_world(pfa=0.05)
    arrays = simulate_trials(cfg, "alice", FixedFingerprint(1.0), 40_000, 99, 0.05)
    lg = -math.log(0.05)
    mc = lg * float(np.mean(arrays.sigma_sq))
    se = lg * float(np.std(arrays.sigma_sq)) / math.sqrt(arrays.sigma_sq.size)
    assert abs(af_threshold_mean_square(cfg, 0.05) - mc) < 4 * se


def test_af_threshold_mean_square_matches_realized_thresholds():
    cfg = rayleigh_world(pfa=0.1)
    arrays = simulate_trials(cfg, "alice", FixedFingerprint(1.0), 40_000, 98, 0.1)
    dsq = arrays.threshold ** 2
    se = float(np.std(dsq)) / math.sqrt(dsq.size)
    assert abs(af_threshold_mean_square(cfg) - float(np.mean(dsq))) < 4 * se


def test_af_scale_mean_square_matches_realized_scales():
    # intruder-side realized Rice scale is sigma^2/2; pin the fingerprint so
    # the pong-leg gain matches the configured chain product
    cfg = rayleigh_world(pfa=0.1)
    fp = eve_fingerprint(cfg).value
    arrays = simulate_trials(cfg, "eve", FixedFingerprint(fp), 40_000, 97, 0.1)
    ssq = arrays.sigma_sq / 2.0
    se = float(np.std(ssq)) / math.sqrt(ssq.size)
    assert abs(af_scale_mean_square(cfg) - float(np.mean(ssq))) < 4 * se


def test_unit_world_realized_threshold_equals_rms():
    # with a unit-modulus channel the realized variance is deterministic and
    # already equals its fading-law mean, so the mean square is exact there
    cfg = default_config()
    arrays = simulate_trials(cfg, "alice", FixedFingerprint(1.0), 64, 96, 0.1)
    assert float(np.var(arrays.threshold)) == pytest.approx(0.0, abs=1e-20)
    assert float(np.mean(arrays.threshold ** 2)) == pytest.approx(
        af_threshold_mean_square(cfg), rel=1e-10)


def test_rice_statistic_params():
    rp = rice_statistic_params(Fingerprint(1.0 + 0j), Fingerprint(2.0 + 1.0j), 0.5)
    assert rp.v == pytest.approx(math.sqrt(2.0))
    assert rp.sigma == pytest.approx(0.5)
    with pytest.raises(DomainError):
        rice_statistic_params(Fingerprint(1.0), Fingerprint(2.0), 0.0)


def test_miss_prob_exact_matches_scipy():
    mu_a = Fingerprint(1.0 + 0j)
    for mu_e in (1.0 + 1.0j, 0.3 - 0.4j, 1.0 + 0j):
        for sigma_be in (0.125, 0.5, 2.0):
            for delta in (0.0, 0.3, 1.0):
                got = miss_prob_exact(mu_a, Fingerprint(mu_e), sigma_be, delta)
                s = math.sqrt(sigma_be / 2.0)
                want = 1.0 - marcum_ncx2(abs(mu_e - mu_a.value) / s, delta / s)
                assert got == pytest.approx(want, abs=2e-11)


def test_miss_prob_paths_agree():
    # the config-driven path and the precomputed-args path are the same number
    mu_a, mu_e, sigma_be, delta = Fingerprint(1.0 + 0j), Fingerprint(0.2 + 0.9j), 0.25, 0.4
    rp = rice_statistic_params(mu_a, mu_e, sigma_be)
    via_args = miss_prob_from_args(MarcumArgs(rp.v / rp.sigma, delta / rp.sigma))
    assert miss_prob_exact(mu_a, mu_e, sigma_be, delta) == pytest.approx(via_args, abs=1e-12)


def test_miss_prob_exact_monte_carlo():
    rng = stream(55, 0)
    mu_a, mu_e, sigma_be, delta = 1.0 + 0j, 1.4 - 0.7j, 0.3, 0.9
    stat = np.abs(sample_cgauss(rng, mu_e, sigma_be, size=200_000) - mu_a)
    emp = float(np.mean(stat <= delta))
    want = miss_prob_exact(Fingerprint(mu_a), Fingerprint(mu_e), sigma_be, delta)
    se = math.sqrt(want * (1 - want) / stat.size)
    assert abs(emp - want) < 4 * se


def test_df_deflection_mean_exact_at_scale_two():
    # at sigma_df_be = 2 the printed mixed form coincides with the true mean
    # deflection over the unit intruder prior
    rng = stream(55, 1)
    for mu_a in (1.0 + 0j, 0.6 + 0.3j):
        mu_e = sample_cgauss(rng, 1.0 + 0j, 1.0, size=300_000)
        emp = float(np.mean(np.abs(mu_e - mu_a)))  # sigma_T = sqrt(2/2) = 1
        got = df_deflection_mean(Fingerprint(mu_a), 2.0)
        se = float(np.std(np.abs(mu_e - mu_a))) / math.sqrt(mu_e.size)
        assert abs(got - emp) < 4 * se
        assert got == pytest.approx(df_deflection_mean_consistent(Fingerprint(mu_a), 2.0),
                                    rel=1e-12)


def test_df_deflection_mean_consistent_any_scale():
    rng = stream(55, 2)
    mu_a, sigma_df = 0.8 - 0.1j, 0.5
    mu_e = sample_cgauss(rng, 1.0 + 0j, 1.0, size=300_000)
    scaled = np.abs(mu_e - mu_a) / math.sqrt(sigma_df / 2.0)
    emp = float(np.mean(scaled))
    got = df_deflection_mean_consistent(Fingerprint(mu_a), sigma_df)
    se = float(np.std(scaled)) / math.sqrt(mu_e.size)
    assert abs(got - emp) < 4 * se


def test_af_deflection_args_structure():
    cfg = rayleigh_world()
    mu_a = Fingerprint(1.0 + 0j)
    args = af_deflection_args(cfg, mu_a)
    rms_scale = math.sqrt(af_scale_mean_square(cfg))
    assert args.a == pytest.approx(rice_mean(0.0, 1.0) / rms_scale, rel=1e-12)
    assert args.b == pytest.approx(
        math.sqrt(af_threshold_mean_square(cfg)) / rms_scale, rel=1e-12)
    # moving the trained mean away from the prior center raises the deflection
    far = af_deflection_args(cfg, Fingerprint(3.0 + 0j))
    assert far.a > args.a
    assert far.b == pytest.approx(args.b, rel=1e-12)
