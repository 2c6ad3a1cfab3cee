"""Lie bialgebras, Manin doubles, R-matrices and Poisson structures on
double Lie groups."""

from .algebra_core import LieAlgebra, MetricalLieAlgebra, Report
from .bialgebra import Bialgebra, RMatrix
from .catalog import load_catalog

__version__ = "0.1.0"
__all__ = ["LieAlgebra", "MetricalLieAlgebra", "Report", "Bialgebra", "RMatrix", "load_catalog"]
