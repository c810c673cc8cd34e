"""Render figures from dcesim CSV traces.

Reads the simulator's mse_curve.csv and sweep.csv files and produces the
learning-curve and dimension-study figures.  No simulation logic lives here.
"""

from .figures import EmptyDataError, FigureSpec, SchemaError, build_figure, render

__version__ = "0.1.0"

__all__ = ["EmptyDataError", "FigureSpec", "SchemaError", "build_figure",
           "render"]
