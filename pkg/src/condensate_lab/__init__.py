"""Numerical laboratory for N-soliton condensates of the focusing NLS equation.

Layers:

* specfun      -- elliptic integrals, theta series, Jacobi sd, the branched
                  radical R/S and contour quadrature
* scattering   -- condensate scattering data generation and transforms
* exactsolver  -- exact N-soliton solutions from the residue linear system
* asymptotics  -- g-function, condensate constants, leading-order elliptic
                  wave and its theta-function representation, q1 correction
* experiments  -- verification campaigns with machine-readable reports
* cli          -- `condensate-lab` command-line front end
"""

from .scattering import (CondensateSpec, DensitySpec, SamplerSpec,
                         ScatteringData, make_scattering_data)
from .exactsolver import FieldGrid, FieldSample, solve_grid, solve_pointwise
from .asymptotics import (build_cache, psi_leading_order,
                          psi_theta_representation)

__version__ = "0.1.0"

__all__ = [
    "CondensateSpec", "DensitySpec", "SamplerSpec", "ScatteringData",
    "make_scattering_data", "FieldGrid", "FieldSample", "solve_grid",
    "solve_pointwise", "build_cache", "psi_leading_order",
    "psi_theta_representation", "__version__",
]
