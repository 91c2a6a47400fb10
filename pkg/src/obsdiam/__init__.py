"""Intrinsic dimension of finite geometric data sets via observable diameters."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DimensionReport,
    GeometricDataSet,
    ObsDiamProfile,
    PointMeasure,
    WeightedValueDistribution,
    delta,
    intrinsic_dimension,
    levy_defect,
    observable_diameter,
    partial_diameter,
    profile,
    pushforward,
    scale,
)

__all__ = [
    "DimensionReport",
    "GeometricDataSet",
    "ObsDiamProfile",
    "PointMeasure",
    "WeightedValueDistribution",
    "delta",
    "intrinsic_dimension",
    "levy_defect",
    "observable_diameter",
    "partial_diameter",
    "profile",
    "pushforward",
    "scale",
]
