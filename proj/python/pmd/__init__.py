"""Probabilistic manifold decomposition reduced-order models."""

from ._pmd import (
    ChecksumError,
    ConfigError,
    DataError,
    ExtrapolationError,
    GraphError,
    IoError,
    Model,
    ModeError,
    NumericalError,
    ParseError,
    PmdError,
    ShapeError,
    VersionError,
    __version__,
    advecting_pulse,
    default_config,
    experiment_names,
    fit,
    linear_system,
    load,
    pmd_energy,
    pod_energy,
    relative_error,
    run_experiment,
    select_rank,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
