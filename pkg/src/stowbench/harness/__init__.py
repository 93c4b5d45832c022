from .config import ExperimentConfig
from .outputs import compare_variants, emit_outputs, write_curves_csv, write_finals_csv, write_plotdata
from .runner import load_records, run_experiment, train_repetition
from .scenarios import SCENARIOS, default_eval_every, scenario_label, scenario_spec
from .stats import (
    SIGNIFICANCE_LEVEL,
    MetricsRow,
    aggregate,
    regularized_incomplete_beta,
    student_t_two_sided_p,
    welch_t_test,
)

__all__ = [
    "ExperimentConfig",
    "MetricsRow",
    "SCENARIOS",
    "SIGNIFICANCE_LEVEL",
    "aggregate",
    "compare_variants",
    "default_eval_every",
    "emit_outputs",
    "load_records",
    "regularized_incomplete_beta",
    "run_experiment",
    "scenario_label",
    "scenario_spec",
    "student_t_two_sided_p",
    "train_repetition",
    "welch_t_test",
    "write_curves_csv",
    "write_finals_csv",
    "write_plotdata",
]
