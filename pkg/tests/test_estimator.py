"""Least-squares estimation: projection identity, variance law, training."""

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpauth.specfn import DomainError, sample_cgauss, stream
from rpauth.worldmodel import RelayMode, default_config, residual_fingerprint
from rpauth.pingpong import PongObservation, round_trip
from rpauth.estimator import ls_estimate, train_ground_truth, variance_formula

coef = st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2,
                          allow_nan=False, allow_infinity=False)


def _obs(z, xt, net=1.0):
    return PongObservation(np.asarray(z, complex), np.asarray(xt, complex), 1.0, net, RelayMode.AF)


def test_ls_estimate_exact_on_clean_signal():
    xt = np.exp(1j * np.array([0.3, 1.4, 2.8, 4.1]))
    h = 0.7 - 1.1j
    est = ls_estimate(_obs(h * xt, xt, net=0.0))
    assert est.p == pytest.approx(h, rel=1e-14)
    assert est.variance == 0.0
    assert est.relay_mode is RelayMode.AF


@settings(max_examples=60, deadline=None)
@given(h=coef, c=coef)
def test_ls_estimate_linear_in_observation(h, c):
    xt = np.exp(1j * np.array([0.0, 0.9, 3.3]))
    base = ls_estimate(_obs(h * xt, xt)).p
    scaled = ls_estimate(_obs(c * h * xt, xt)).p
    assert scaled == pytest.approx(c * base, rel=1e-9, abs=1e-12)


def test_ls_estimate_removes_training_modulation():
    # two different trainings, same underlying coefficient -> same estimate
    rng = stream(31, 0)
    h = 1.3 + 0.4j
    for _ in range(3):
        xt = np.exp(1j * rng.uniform(0, 2 * math.pi, size=8))
        assert ls_estimate(_obs(h * xt, xt)).p == pytest.approx(h, rel=1e-12)


def test_variance_formula_energy_scaling():
    xt1 = np.ones(4, dtype=complex)
    xt2 = 2.0 * np.ones(4, dtype=complex)
    v1 = variance_formula(PongObservation(xt1, xt1, 1.0, 3.0, RelayMode.DF))
    v2 = variance_formula(PongObservation(xt2, xt2, 1.0, 3.0, RelayMode.DF))
    assert v1 == pytest.approx(3.0 / 4.0)
    assert v2 == pytest.approx(3.0 / 16.0)


def test_estimate_error_matches_variance_formula():
    # normalized squared error |p - h|^2 / variance averages to 1
    rng = stream(31, 1)
    xt = np.exp(1j * rng.uniform(0, 2 * math.pi, size=16))
    h = 0.9 + 0.1j
    n = 4000
    ratios = np.empty(n)
    for i in range(n):
        z = h * xt + sample_cgauss(rng, 0.0j, 0.5, size=xt.size)
        est = ls_estimate(_obs(z, xt, net=0.5))
        ratios[i] = abs(est.p - h) ** 2 / est.variance
    se = float(np.std(ratios)) / math.sqrt(n)
    assert abs(float(np.mean(ratios)) - 1.0) < 5 * se


@pytest.mark.parametrize("mode", [RelayMode.AF, RelayMode.DF])
def test_slot_estimate_error_distribution(mode):
    # ratio to the closed-form variance is Exp(1) across full slots too
    cfg = replace(default_config(), relay_mode=mode)
    rng = stream(31, 2)
    h = residual_fingerprint(cfg.alice.rp, cfg.bob.rp).value * cfg.gamma_ab
    n = 4000
    ratios = np.empty(n)
    for i in range(n):
        est = ls_estimate(round_trip(rng, cfg, cfg.alice))
        ratios[i] = abs(est.p - h) ** 2 / est.variance
    se = float(np.std(ratios)) / math.sqrt(n)
    assert abs(float(np.mean(ratios)) - 1.0) < 5 * se


def test_train_ground_truth_converges():
    cfg = default_config()
    h = residual_fingerprint(cfg.alice.rp, cfg.bob.rp).value * cfg.gamma_ab
    mu = train_ground_truth(stream(31, 3), cfg, 4000)
    # single-estimate variance is sigma^2; the mean shrinks it by n
    assert abs(mu.value - h) < 5 * math.sqrt(1.0 / (cfg.k * 1.0) / 4000)
    with pytest.raises(DomainError):
        train_ground_truth(stream(31, 4), cfg, 0)


def test_ls_estimate_rejects_zero_energy():
    with pytest.raises(DomainError):
        ls_estimate(PongObservation(np.zeros(3, complex), np.zeros(3, complex),
                                    1.0, 1.0, RelayMode.AF))
