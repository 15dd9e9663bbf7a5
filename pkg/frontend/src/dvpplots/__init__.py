"""Render figures from the estimation harness's CSV outputs.

This package does no computation of its own: it consumes the basis-curve,
target-curve, and summary CSV contracts and produces SVG figures.
"""

from dvpplots.figures import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render"]
