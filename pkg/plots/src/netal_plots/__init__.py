"""Figure scripts for netal experiment CSVs."""

from .figures import plot_curves, plot_order, plot_scatter, pearson_of

__all__ = ["plot_curves", "plot_order", "plot_scatter", "pearson_of"]
