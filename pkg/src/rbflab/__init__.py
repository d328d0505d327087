"""Multi-cell MIMO random beamforming laboratory.

Monte Carlo simulation of the opportunistic random-beamforming downlink
with MMSE, matched-filter, and antenna-selection receivers, together with
the closed-form SINR distributions and degrees-of-freedom formulas that
the simulation is validated against.
"""

from rbflab.core_random import RngStream, sample_cscg_matrix, sample_orthonormal_beams
from rbflab.network_model import (
    ChannelRealization,
    DerivedGains,
    NetworkConfig,
    db_to_linear,
    derive_gains,
    draw_realization,
    load_config,
)
from rbflab.receivers import (
    ReceiverKind,
    SinrTable,
    interference_covariance,
    sample_sinr,
    sinr_as,
    sinr_mf,
    sinr_mmse,
    sinr_table,
)
from rbflab.scheduler_sim import (
    ScheduleResult,
    SumRateEstimate,
    UserScaling,
    dpc_upper_bound,
    estimate_sum_rate,
    schedule,
    sweep_beams,
    users_for_snr,
)
from rbflab.analytic_cdf import (
    AntennaSelectionCdf,
    CdfCurve,
    CdfHypothesisError,
    MatchedFilterCdf,
    RationalExpCdf,
    ShiftedPowerProduct,
    as_cdf,
    default_grid,
    expand_coefficients,
    general_quadratic_cdf,
    mf_cdf,
    mmse_cdf,
    t0_derivatives,
)
from rbflab.dof_analysis import (
    DofPoint,
    DofQuery,
    DofRegion,
    dof_multi_cell,
    dof_region,
    dof_single_cell,
    optimal_beams_single_cell,
    optimality_threshold,
    region_upper_bound,
)
from rbflab.validation import (
    EmpiricalCdf,
    KsReport,
    SlopeFit,
    as_miso_equivalence,
    fit_rate_slope,
    ks_distance,
    ks_two_sample,
)

__version__ = "0.1.0"
