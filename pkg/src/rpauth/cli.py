"""Command line interface: ROC sweeps, calibration validation, closed forms."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import specfn
from .analysis import (
    MarcumArgs,
    af_deflection_args,
    af_threshold_mean_square,
    df_deflection_mean,
    miss_prob_exact,
    miss_prob_from_args,
)
from .detector import df_variance, threshold_full_csi
from .harness import (
    ExperimentPlan,
    FixedFingerprint,
    RandomPerTrial,
    default_plan,
    default_trials,
    emit_csv,
    ideal_ground_truth,
    load_plan,
    run_point,
    run_roc,
    run_snr,
    simulate_trials,
)
from .specfn import DomainError
from .worldmodel import (
    ChannelModulus,
    ConfigError,
    CsiMode,
    Fingerprint,
    RelayMode,
    default_config,
)


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im' numbers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rpauth",
        description="Reciprocity-fingerprint sender authentication experiments",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    roc = sub.add_parser("roc", help="run a sweep plan and emit a CSV")
    roc.add_argument("--config", help="plan file (structured text)")
    roc.add_argument("--seed", type=int, help="override plan seed")
    roc.add_argument("--trials", type=int, help="override trials per point")
    roc.add_argument("--out", default="roc.csv", help="output CSV path")
    roc.add_argument("--mode", choices=["af", "df"], help="override relay mode")
    roc.add_argument("--csi", choices=["full", "stat"], help="override verifier knowledge")
    roc.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    roc.add_argument("--sweep", choices=["pfa", "snr"], default="pfa",
                     help="sweep the false-alarm grid or the link-gain grid")

    val = sub.add_parser("validate", help="run analytic-vs-Monte-Carlo cross checks")
    val.add_argument("--trials", type=int, help="Monte Carlo size per check")
    val.add_argument("--seed", type=int, default=42)

    pmd = sub.add_parser("pmd", help="evaluate closed-form miss probabilities")
    pmd.add_argument("--config", help="plan file supplying the world")
    pmd.add_argument("--mu-a", type=_parse_complex, default=complex(1.0, 0.0),
                     help="authenticated mean, as re,im")
    pmd.add_argument("--mu-e", type=_parse_complex, default=complex(1.0, 1.0),
                     help="intruder mean, as re,im")
    pmd.add_argument("--sigma-be", type=float, help="intruder estimate variance")
    pmd.add_argument("--delta", type=float, help="decision threshold")
    pmd.add_argument("--pfa", type=float, help="set-point used when delta is omitted")

    sub.add_parser("selftest", help="special-function identity checks")
    return ap


def _plan_with_overrides(args) -> ExperimentPlan:
    plan = load_plan(args.config) if args.config else default_plan()
    cfg = plan.base
    if getattr(args, "mode", None):
        cfg = replace(cfg, relay_mode=RelayMode(args.mode))
    if getattr(args, "csi", None):
        cfg = replace(cfg, csi_mode=CsiMode(args.csi))
    plan = replace(plan, base=cfg)
    if getattr(args, "seed", None) is not None:
        plan = replace(plan, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        plan = replace(plan, trials=args.trials)
    return plan


def _cmd_roc(args) -> int:
    plan = _plan_with_overrides(args)
    points = run_snr(plan, args.workers) if args.sweep == "snr" else run_roc(plan, args.workers)
    emit_csv(points, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    return 0


# ===== validate ==============================================================


def _empirical_rates(cfg, occupant, eve_model, trials, seed, pfa):
    arrays = simulate_trials(cfg, occupant, eve_model, trials, seed, pfa)
    mu_a = ideal_ground_truth(cfg).value
    stat = np.abs(arrays.p - mu_a)
    return arrays, float(np.mean(stat > arrays.threshold))


def _validate_rows(trials: int, seed: int) -> list:
    rows = []
    base = default_config()                       # AF, full knowledge, unit modulus
    df_cfg = replace(base, relay_mode=RelayMode.DF)
    eve_any = RandomPerTrial()

    for pfa in (0.05, 0.3):
        _, emp = _empirical_rates(df_cfg, "alice", eve_any, trials, seed, pfa)
        tol = 3.0 * math.sqrt(pfa * (1.0 - pfa) / trials)
        rows.append((f"false-alarm calibration, df full, set {pfa}",
                     f"emp {emp:.5f} within {tol:.5f}", abs(emp - pfa) <= tol))

    _, emp = _empirical_rates(base, "alice", eve_any, trials, seed, 0.1)
    tol = 3.0 * math.sqrt(0.1 * 0.9 / trials)
    rows.append(("false-alarm calibration, af full, set 0.1",
                 f"emp {emp:.5f} within {tol:.5f}", abs(emp - 0.1) <= tol))

    # fixed intruder, df: miss rate against the Rician closed form
    mu_e = complex(1.0, 1.0)
    arrays, rej = _empirical_rates(df_cfg, "eve", FixedFingerprint(mu_e), trials, seed, 0.1)
    miss_emp = 1.0 - rej
    delta = threshold_full_csi(0.1, df_variance(df_cfg, df_cfg.alice))
    miss_cf = miss_prob_exact(Fingerprint(1.0 + 0.0j), Fingerprint(mu_e),
                              df_variance(df_cfg, df_cfg.eve), delta)
    tol = 3.0 * math.sqrt(max(miss_cf * (1.0 - miss_cf), 1e-12) / trials)
    rows.append(("miss rate vs closed form, df fixed intruder",
                 f"emp {miss_emp:.5f} cf {miss_cf:.5f}", abs(miss_emp - miss_cf) <= tol))

    # random intruder, af: rejection rate against per-trial closed form
    arrays, rej = _empirical_rates(base, "eve", eve_any, trials, seed, 0.1)
    mu_a = ideal_ground_truth(base).value
    v = np.abs(arrays.cond_mean - mu_a)
    sig_t = np.sqrt(arrays.sigma_sq / 2.0)
    q = specfn.marcum_q1(v / sig_t, arrays.threshold / sig_t)
    se = math.sqrt(float(np.mean(q * (1.0 - q))) / trials) + 1e-12
    diff = abs(rej - float(np.mean(q)))
    rows.append(("detection rate vs per-trial closed form, af",
                 f"gap {diff:.5f} within {3 * se:.5f}", diff <= 3.0 * se))

    # estimate error law: |p - mean|^2 / variance is unit-mean exponential
    arrays = simulate_trials(base, "alice", eve_any, trials, seed, 0.1)
    chi = float(np.mean(np.abs(arrays.p - arrays.cond_mean) ** 2 / arrays.sigma_sq))
    rows.append(("estimate error variance, af full",
                 f"mean {chi:.5f} within {4 / math.sqrt(trials):.5f} of 1",
                 abs(chi - 1.0) <= 4.0 / math.sqrt(trials)))

    # realized mean-square threshold vs closed form, fading world
    ray = replace(base, channel_modulus=ChannelModulus.RAYLEIGH)
    arrays = simulate_trials(ray, "alice", eve_any, trials, seed, 0.1)
    d2 = -math.log(0.1) * arrays.sigma_sq
    cf = af_threshold_mean_square(ray, 0.1)
    se = float(np.std(d2)) / math.sqrt(trials)
    dev = abs(float(np.mean(d2)) - cf)
    rows.append(("mean-square threshold vs closed form, af fading",
                 f"emp {float(np.mean(d2)):.5f} cf {cf:.5f}", dev <= 4.0 * se))

    # two independent numerical routes to the Marcum function
    worst = 0.0
    for a in (0.5, 2.0, 5.0):
        for b in (0.3, 2.0, 6.0):
            s = specfn._marcum_series_scalar(0.5 * a * a, 0.5 * b * b)
            g = specfn._marcum_quadrature(a, b)
            worst = max(worst, abs(s - g))
    rows.append(("marcum series vs quadrature", f"max gap {worst:.2e}", worst <= 1e-8))

    # statistical-knowledge miscalibration shrinks toward high set-points
    stat_cfg = replace(ray, csi_mode=CsiMode.STATISTICAL)
    gaps = {}
    for pfa in (0.5, 0.9):
        _, emp = _empirical_rates(stat_cfg, "alice", eve_any, trials, seed, pfa)
        gaps[pfa] = abs(emp - pfa)
    rows.append(("stat knowledge gap shrinks toward high set-point",
                 f"gap(0.9) {gaps[0.9]:.5f} < gap(0.5) {gaps[0.5]:.5f}",
                 gaps[0.9] < gaps[0.5]))
    return rows


def _cmd_validate(args) -> int:
    trials = args.trials if args.trials is not None else default_trials()
    if trials < 1000:
        raise ConfigError("validate needs at least 1000 trials per check")
    rows = _validate_rows(trials, args.seed)
    width = max(len(r[0]) for r in rows)
    ok_all = True
    for name, detail, ok in rows:
        ok_all &= ok
        print(f"{name:<{width}}  {detail:<42} {'PASS' if ok else 'FAIL'}")

    # informational: offline approximation gap at two set-points (not gated)
    plan = replace(default_plan(), trials=trials, seed=args.seed)
    for pfa in (0.1, 0.7):
        pt = run_point(plan, pfa)
        print(f"note: af offline approximation at set {pfa}: "
              f"pd_approx {pt.pd_approx:.4f} vs analytic {pt.pd_analytic:.4f} "
              f"(signed gap {pt.pd_approx - pt.pd_analytic:+.4f})")
    print("validate:", "PASS" if ok_all else "FAIL")
    return 0 if ok_all else 1


# ===== pmd ===================================================================


def _cmd_pmd(args) -> int:
    plan = load_plan(args.config) if args.config else default_plan()
    cfg = plan.base
    sigma_be = args.sigma_be if args.sigma_be is not None else df_variance(cfg, cfg.eve)
    pfa = args.pfa if args.pfa is not None else cfg.pfa_setpoint
    if args.delta is not None:
        delta = args.delta
    else:
        delta = threshold_full_csi(pfa, df_variance(cfg, cfg.alice))
    mu_a, mu_e = args.mu_a, args.mu_e
    pmd = miss_prob_exact(Fingerprint(mu_a), Fingerprint(mu_e), sigma_be, delta)
    print(f"mu_a      = {mu_a}")
    print(f"mu_e      = {mu_e}")
    print(f"sigma_be  = {sigma_be:.10g}")
    print(f"delta     = {delta:.10g}")
    print(f"pmd_exact = {pmd:.10g}")
    a_hat = df_deflection_mean(Fingerprint(mu_a), sigma_be)
    b = delta / math.sqrt(sigma_be / 2.0)
    print(f"df offline: a_hat {a_hat:.10g}, b {b:.10g}, "
          f"pmd_approx {miss_prob_from_args(MarcumArgs(a_hat, b)):.10g}")
    af_cfg = replace(cfg, relay_mode=RelayMode.AF)
    args_af = af_deflection_args(af_cfg, Fingerprint(mu_a), pfa)
    print(f"af offline: a_hat {args_af.a:.10g}, b_hat {args_af.b:.10g}, "
          f"pmd_approx {miss_prob_from_args(args_af):.10g} "
          f"(rms threshold {math.sqrt(af_threshold_mean_square(af_cfg, pfa)):.10g})")
    return 0


# ===== selftest ==============================================================


def _selftest_rows() -> list:
    rows = []
    rows.append(("laguerre_half(0) = 1", abs(specfn.laguerre_half(0.0) - 1.0) == 0.0))
    rows.append(("rice_mean(0, s) = s*sqrt(pi/2)",
                 abs(specfn.rice_mean(0.0, 2.0) - 2.0 * math.sqrt(math.pi / 2.0)) < 1e-12))
    rows.append(("marcum_q1(a, 0) = 1", specfn.marcum_q1(1.3, 0.0) == 1.0))
    rows.append(("marcum_q1(0, b) = exp(-b^2/2)",
                 abs(specfn.marcum_q1(0.0, 1.1) - math.exp(-0.605)) < 1e-12))
    qs = [float(specfn.marcum_q1(a, 1.5)) for a in (0.0, 0.5, 1.0, 2.0, 4.0)]
    rows.append(("marcum_q1 nondecreasing in a", all(x <= y + 1e-15 for x, y in zip(qs, qs[1:]))))
    qs = [float(specfn.marcum_q1(1.5, b)) for b in (0.0, 0.5, 1.0, 2.0, 4.0)]
    rows.append(("marcum_q1 nonincreasing in b", all(x >= y - 1e-15 for x, y in zip(qs, qs[1:]))))
    x = 3.7
    wron = specfn.bessel_i0(x) - (specfn.bessel_i1(x) * (2.0 / x) + _i_two(x))
    rows.append(("bessel recurrence i0 - (2/x) i1 - i2 = 0", abs(wron) < 1e-10))
    rng = specfn.stream(7, 1)
    z = specfn.sample_cgauss(rng, 1.0 + 2.0j, 4.0, size=200_000)
    ok = (abs(complex(np.mean(z)) - (1 + 2j)) < 0.02
          and abs(float(np.var(z)) - 4.0) < 0.08)
    rows.append(("complex gaussian moments", ok))
    return rows


def _i_two(x: float) -> float:
    # I2 via upward series, used only to cross-check I0/I1
    total, term, k = 0.0, (0.5 * x) ** 2 / 2.0, 0
    q = 0.25 * x * x
    while True:
        total += term
        k += 1
        nxt = term * q / (k * (k + 2))
        if nxt < 1e-18 * total:
            break
        term = nxt
    return total


def _cmd_selftest() -> int:
    rows = _selftest_rows()
    width = max(len(r[0]) for r in rows)
    ok_all = True
    for name, ok in rows:
        ok_all &= ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}")
    print("selftest:", "PASS" if ok_all else "FAIL")
    return 0 if ok_all else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "roc":
            return _cmd_roc(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "pmd":
            return _cmd_pmd(args)
        return _cmd_selftest()
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
