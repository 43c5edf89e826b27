from .compare import CompareError, compare_report, compare_rows
from .config import DEFAULT_ATTACK_EPSILONS, DEFAULT_EPSILONS, PRESETS, ConfigError, ExperimentConfig
from .runner import ATTACKS, METRICS, RunResult, compare_graphs, run_attack, run_experiment
from .synth import GENERATORS, synth_dataset

__all__ = [
    "ATTACKS", "METRICS", "PRESETS", "GENERATORS", "DEFAULT_EPSILONS", "DEFAULT_ATTACK_EPSILONS",
    "CompareError", "ConfigError", "ExperimentConfig", "RunResult",
    "compare_graphs", "compare_report", "compare_rows", "run_attack", "run_experiment", "synth_dataset",
]
