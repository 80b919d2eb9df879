"""Deterministic figures from sweep CSVs.

Every figure kind reads one or more CSV files produced by the simulation CLI,
validates their schemas up front, and renders a static image with a pinned
style.  render() returns the list of plotted points (as the original CSV
strings) so tests can verify that nothing is resampled or interpolated.
"""

from .figures import FigureSpec, SchemaError, render, STYLE_VERSION

__all__ = ["FigureSpec", "SchemaError", "render", "STYLE_VERSION"]
__version__ = "0.1.0"
