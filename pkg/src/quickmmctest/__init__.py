"""Monte Carlo multiple testing with QuickMMCTest."""

from .baselines import run_naive
from .engine import (
    DecisionReport,
    EngineConfig,
    compute_weights,
    final_decisions,
    final_decisions_point,
    make_streams,
    residual_allocate,
    run_quickmmctest,
)
from .errors import ConfigurationError, InputError, SourceExhaustedError
from .model import HypothesisState, point_estimate, posterior_draws, sample_posterior, update_state
from .procedures import (
    PROCEDURE_NAMES,
    ProcedureSpec,
    ThresholdRule,
    apply_procedure,
    effective_alpha,
    estimate_pi0,
    get_procedure,
    threshold_sequence,
)
from .samplers import BernoulliOracle, ExceedanceSource, RecordedStatisticsSource

__version__ = "0.1.0"
