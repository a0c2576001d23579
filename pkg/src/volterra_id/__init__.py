"""Identification of first- and second-order Volterra kernels from one input/output pair.

Kernels are expanded in Chebyshev polynomials on ``[0, T]``; the expansion
coefficients come from a collocation (square) or least-squares
(overdetermined) linear system solved in the minimum-norm sense.
"""

from .assembly import AssembledSystem, GridScheme, NodeGrid, assemble, uniform_grid
from .basis import BasisSet, basis_row, chebyshev_eval, mapped_eval
from .errors import (AssemblyError, ConfigError, DomainError, IntegrandError, NumericalError,
                     VolterraError)
from .quadrature import QuadratureConfig, gauss_legendre_rule, integrate_1d, integrate_2d_tensor
from .signals import NoiseSpec, SignalPair, model1_pair, model2_pair
from .solver import (IdentificationReport, KernelExpansion, Method, identify_collocation, identify_lsm,
                     predict, residual_max, solve_min_norm, stability_experiment)

__version__ = "0.1.0"
