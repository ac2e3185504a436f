"""Figure regeneration for floquet-dce sweep outputs.

Pure post-processing: the package reads the documented CSV schemas and
draws; it never imports the solver library.
"""

from .render import FigureSpec, render, read_sweep_csv, read_critical_csv

__version__ = "0.1.0"

__all__ = ["FigureSpec", "render", "read_sweep_csv", "read_critical_csv"]
