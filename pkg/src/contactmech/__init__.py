"""Numerical contact Hamiltonian mechanics on Darboux charts.

Dissipative dynamics, Jacobi brackets, submanifold geometry, symmetry
reduction and tangent-bundle lifts, with a CLI front end for batch runs.
"""

from .chart import DarbouxChart
from .dynamics import (ContactSystem, IntegratorSpec, Trajectory,
                       hamiltonian_field, integrate)
from .errors import ContactmechError
from .expressions import (ScalarField, VectorField, darboux_varnames,
                          parse_field, parse_vector_field)

__version__ = "0.1.0"

__all__ = [
    "ContactSystem",
    "ContactmechError",
    "DarbouxChart",
    "IntegratorSpec",
    "ScalarField",
    "Trajectory",
    "VectorField",
    "__version__",
    "darboux_varnames",
    "hamiltonian_field",
    "integrate",
    "parse_field",
    "parse_vector_field",
]
