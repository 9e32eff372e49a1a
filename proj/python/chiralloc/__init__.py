"""Disorder-averaged excitation dynamics of chirally coupled emitter arrays."""

from ._core import (
    ConfigError,
    DisorderMode,
    NumericalError,
    SystemParams,
    __version__,
    cascaded_solution,
    coupling_matrix,
    eigenvalues,
    entropy,
    entropy_partial_trace,
    gap_statistics,
    localization_fit,
    propagate,
    relative_participation_ratio,
    run_ensemble,
    run_oracles,
    sample_disorder,
)

__all__ = [
    "ConfigError",
    "DisorderMode",
    "NumericalError",
    "SystemParams",
    "__version__",
    "cascaded_solution",
    "coupling_matrix",
    "eigenvalues",
    "entropy",
    "entropy_partial_trace",
    "gap_statistics",
    "localization_fit",
    "propagate",
    "relative_participation_ratio",
    "run_ensemble",
    "run_oracles",
    "sample_disorder",
]
