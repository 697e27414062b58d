"""Multi-cell massive MIMO downlink simulator with pilot contamination.

Typical flow: ``make_scenario`` -> ``allocate_pilots`` -> ``estimate_variance``
-> ``sinr_closed_form`` / ``sinr_monte_carlo`` -> ``rate_lower_bound``.
"""

from .channel import assemble_channel, sample_small_scale, trial_stream
from .errors import (ConfigError, DegenerateEstimate, InsufficientAntennas, PilotOverheadExceedsCoherence,
                     PilotSimError, ShapeMismatch, SingularGram)
from .estimation import (ChannelEstimate, PilotAssignment, allocate_pilots, estimate_variance, mmse_coefficient,
                         mmse_estimate, synthesize_training)
from .experiments import SweepResult, SweepSpec, emit_csv, run_sweep
from .precoding import PrecoderSet, mrt_precoder, transmit_signal, zf_precoder
from .rate import (GroupingResult, RateReport, SinrReport, asymptotic_ceiling, group_users, rate_lower_bound,
                   rate_with_grouping, sinr_closed_form, sinr_monte_carlo)
from .scenario import (CellGeometry, SystemConfig, build_layout, compute_large_scale, drop_users, load_config,
                       make_scenario)

__version__ = "0.1.0"
