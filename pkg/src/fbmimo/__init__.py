"""Monte Carlo simulator for limited-feedback scheduling in the MIMO broadcast channel."""

__version__ = "0.1.0"

from .channel import (
    ChannelMatrix,
    Snapshot,
    ks_distance,
    lambda_max_tail_approx,
    row_norm_sq_cdf,
    sample_snapshot,
)
from .capacity import (
    CovarianceSet,
    DpcOrdering,
    EffectiveChannel,
    covariance_structure_diagnostics,
    dpc_sum_rate,
    dual_mac_sum_capacity,
    tdma_no_csi_rate,
    zfbf_rate,
)
from .quantize import (
    Codebook,
    QuantizationResult,
    epsilon_error_prob_lower_bound,
    expected_theta_lower_bound,
    make_codebook,
    projection_density,
    quantize_vector,
    theta_cdf,
    zf_quantization_gap_bound,
)
