"""Plotting companion for mimocrb sweep results."""

__version__ = "0.1.0"

from .render import PlotDataError, PlotSpec, Series, load_series, render_sweep

__all__ = ["PlotDataError", "PlotSpec", "Series", "load_series", "render_sweep"]
