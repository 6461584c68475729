"""Numerical laboratory for fermionic mean-field dynamics on a periodic lattice."""

from hflab.lattice import DenseOperator, Field, Grid, ScaledParams

__all__ = ["DenseOperator", "Field", "Grid", "ScaledParams"]
__version__ = "0.1.0"
