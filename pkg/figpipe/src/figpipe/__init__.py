"""Figure pipeline for kicked-ring divergence runs."""

__version__ = "0.1.0"

from .data import DensitySnapshot, SchemaError, Series, load_density, load_series
from .render import FigureSpec, render_figure

__all__ = [
    "__version__",
    "DensitySnapshot", "SchemaError", "Series", "load_density", "load_series",
    "FigureSpec", "render_figure",
]
