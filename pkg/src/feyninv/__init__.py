"""Exact polynomial algebra for Feynman-parameter integrals.

Submodules:

* ``polyring``: sparse polynomials and rational functions over Q
* ``graphpoly``: Symanzik polynomials and line symmetry groups of graphs
* ``invariant``: finite signed-permutation groups, Reynolds/Molien, invariant rewriting
* ``seriesengine``: truncated field-strength series of the diagram-B integrand
* ``ibp``: the signed-derivative integration-by-parts reduction
* ``ehl``: Bernoulli numbers, 2D/4D weak-field coefficients, quadrature
"""

from feyninv.kernels import BACKEND
from feyninv.polyring import Polynomial, RationalFunction, parse_polynomial

__version__ = "0.1.0"

__all__ = ["BACKEND", "Polynomial", "RationalFunction", "parse_polynomial", "__version__"]
