"""Latent hierarchical time stepping for multiscale PDE forecasting.

An autoencoder learns reduced coordinates of multiscale trajectories, a bank
of residual-network flow maps learns the dynamics at dyadic step sizes in
those coordinates, and a cross-validated coupling schedule combines the bank
for fast long-horizon prediction.
"""

from .coders import Autoencoder, IdentityCoder, PcaReducer, pca_fit_reconstruct
from .config import ExperimentConfig, parse_config
from .coupling import (CouplingPlan, couple, cross_validate, enumerate_plans,
                       interpolate_fill, score_plan)
from .data import Normalizer, PairSet, TrajectorySet, build_pairs
from .errors import (ConfigError, DivergenceError, EmptyPairsError,
                     ExtrapolationError, FormatError, LhitsError,
                     SelectionError, ShapeError, TrainingError)
from .experiments import (benchmark_full_state_vs_latent,
                          compare_individual_vs_coupled, sensitivity_sweep)
from .forecasting import HierarchicalForecaster, PredictionReport, evaluate
from .nets import Adam, Mlp, mse_loss
from .steppers import ResNetStepper, StepperBank, train_stepper_bank
from .storage import load_dataset, load_model, save_dataset, save_model
from .systems import (Grid1D, KsEtdrk4, fhn_rhs, generate_dataset, ks_rhs,
                      sample_initial_conditions, simulate_fhn,
                      simulate_ks_etdrk4)

__version__ = "0.1.0"

__all__ = [
    "Adam", "Autoencoder", "ConfigError", "CouplingPlan", "DivergenceError",
    "EmptyPairsError", "ExperimentConfig", "ExtrapolationError", "FormatError",
    "Grid1D", "HierarchicalForecaster", "IdentityCoder", "KsEtdrk4",
    "LhitsError", "Mlp", "Normalizer", "PairSet", "PcaReducer",
    "PredictionReport", "ResNetStepper", "SelectionError", "ShapeError",
    "StepperBank", "TrainingError", "TrajectorySet",
    "benchmark_full_state_vs_latent", "build_pairs",
    "compare_individual_vs_coupled", "couple", "cross_validate",
    "enumerate_plans", "evaluate", "fhn_rhs", "generate_dataset",
    "interpolate_fill", "ks_rhs", "load_dataset", "load_model", "mse_loss",
    "parse_config", "pca_fit_reconstruct", "sample_initial_conditions",
    "save_dataset", "save_model", "score_plan", "sensitivity_sweep",
    "simulate_fhn", "simulate_ks_etdrk4", "train_stepper_bank",
]
