"""Image rendering for the acsusy figure CSVs."""

from .render import RenderSpec, SchemaError, build_figure, render, read_series

__version__ = "0.1.0"
