"""Mean-field random-cluster dynamics laboratory."""

from .model_core import (ModelParams, ConfigSummary, DriftEvaluation,
                         gibbs_log_weight, critical_lambda, beta_root,
                         drift_evaluate, has_positive_drift_root, find_lambda_s)
from .mean_field import (ComponentState, IntervalSpec, StatsReport,
                         default_interval_spec, from_sizes, omega_default, stats)
from .percolation import (PercolationOutcome, sample_components,
                          exact_gnp_small, tree_count_statistics)
from .cm_dynamics import (StepTrace, SQTracker, TrajectoryResult, cm_step,
                          sw_step, run_trajectory, worst_starts)
from .glauber import (EdgeConfig, glauber_step, is_cut_edge, glauber_trajectory)
from .coupling import (CouplingState, WalkSpec, LLTInstance, build_matching,
                       matched_activation, corrected_activation,
                       coupled_percolation_step, coupling_time_experiment,
                       z_decay_experiment, rw_max_tail, rw_difference_coupling,
                       binomial_shift_coupling, llt_exact_check,
                       llt_instance_from_critical_sample, wilson_interval)
from .exact_chain import (ChainMatrix, gibbs_exact, cm_matrix_exact,
                          sw_matrix_exact, glauber_matrix_exact, spectral_gap,
                          mixing_time_exact, cm_step_edge)

__version__ = "0.1.0"
