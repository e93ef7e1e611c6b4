"""MAC and parameter accounting for RetinaNet-style detectors."""

from ._core import (
    Branch,
    ConfigError,
    Error,
    GraphError,
    HeadVariant,
    IoError,
    ModelConfig,
    PredictorPolicy,
    ShapeError,
    SharingScheme,
    apply,
    distribution_chart_svg,
    param_overhead,
    preset,
    preset_names,
    profile,
    profile_csv,
    run_cli,
    sweep,
)

__all__ = [
    "Branch",
    "ConfigError",
    "Error",
    "GraphError",
    "HeadVariant",
    "IoError",
    "ModelConfig",
    "PredictorPolicy",
    "ShapeError",
    "SharingScheme",
    "apply",
    "distribution_chart_svg",
    "param_overhead",
    "preset",
    "preset_names",
    "profile",
    "profile_csv",
    "run_cli",
    "sweep",
]
