"""Alternating-CSIT secure transmission for the K-user MISO broadcast channel.

Zero-forcing beamforming plus artificial noise over (P, D) slot pairs, exact
Gaussian rate and leakage evaluation, and SNR sweeps that estimate the sum
secure degrees of freedom as a pre-log slope.
"""
from ._accel import backend_name
from .analysis import (
    Conditioning,
    GaussianBlockModel,
    RatePoint,
    SdofFit,
    block_rates,
    build_block_model,
    fit_sdof,
    leakage_mi,
    power_audit,
    sep_covariance_check,
    user_rate,
)
from .channel import CsitState, Layout, make_schedule, sample_channel, sample_noise, tx_view
from .experiment import ExperimentConfig, ReferenceTable, emit_results, run_sweep, validate_config
from .linalg import log_det_hermitian_pd, log_det_whitened_gain, null_space_basis, null_space_unit_vector
from .precoding import BlockPrecoder, allocate_powers, build_d_state_precoder, build_p_state_precoder
from .scheme import SchemeVariant, effective_gains, receive_block, transmit_block

__version__ = "0.1.0"
