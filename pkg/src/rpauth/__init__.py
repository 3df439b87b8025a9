"""Reciprocity-fingerprint sender authentication: simulation and analysis."""

from .specfn import (
    DomainError,
    bessel_i0,
    bessel_i1,
    laguerre_half,
    marcum_q1,
    rice_mean,
    sample_cgauss,
    stream,
)
from .worldmodel import (
    ChannelModulus,
    ConfigError,
    CsiMode,
    Device,
    Fingerprint,
    OscillatorOffset,
    ReciprocityParams,
    RelayMode,
    SystemConfig,
    default_config,
    load_system_config,
    residual_fingerprint,
    sample_eve_fingerprint,
    sample_radio_channel,
    sample_reciprocity_params,
    with_link_snr,
)
from .pingpong import (
    LinkRealization,
    Preamble,
    PongObservation,
    compute_beta,
    make_link,
    make_preamble,
    ping,
    pong_af,
    pong_df,
    round_trip,
)
from .estimator import FingerprintEstimate, ls_estimate, train_ground_truth, variance_formula
from .detector import (
    Decision,
    Hypothesis,
    ThresholdSpec,
    analytic_pfa,
    authenticate_slot,
    decide,
    threshold_full_csi,
    threshold_statistical_af,
)
from .analysis import (
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
    stat_scale_density,
    stat_threshold_density,
)
from .harness import (
    ExperimentPlan,
    FixedFingerprint,
    RandomPerTrial,
    RocPoint,
    default_plan,
    emit_csv,
    load_plan,
    read_roc_csv,
    run_point,
    run_roc,
    run_snr,
    simulate_trials,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
