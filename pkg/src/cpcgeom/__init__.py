"""Numerical verification toolkit for hypersurfaces of S^n x R and H^n x R."""

from __future__ import annotations

__version__ = "0.1.0"

from .ambient import ProductPoint, cs_kernels, exp_map, inner  # noqa: E402
from .chart import Chart, evaluate_jet2  # noqa: E402
from .eigenframe import EigenStructure, FrameField, cluster_spectrum, smooth_frame  # noqa: E402
from .immersion import (  # noqa: E402
    ResidualReport,
    ShapeData,
    inclusion_weingarten_check,
    shape_data,
    structure_residuals,
    t_direction_residuals,
)

__all__ = [
    "__version__",
    "Chart",
    "EigenStructure",
    "FrameField",
    "ProductPoint",
    "ResidualReport",
    "ShapeData",
    "cluster_spectrum",
    "cs_kernels",
    "evaluate_jet2",
    "exp_map",
    "inclusion_weingarten_check",
    "inner",
    "shape_data",
    "smooth_frame",
    "structure_residuals",
    "t_direction_residuals",
]
