"""Radial cavitation on rotationally symmetric model manifolds.

Submodules:

``geometry``        curvature profiles of model manifolds
``jacobi``          the Jacobi field ``f``, ``sigma`` and curvature moments
``constitutive``    stored energies and their hypotheses
``incompressible``  closed-form deformations, ``chi(A)`` and ``P_cr``
``compressible``    shooting solvers, stresses, energies and minimization
``cli``             the ``cavitate`` command
"""

from . import compressible, constitutive, geometry, incompressible, jacobi
from .compressible import (EquilibriumSolution, MinimizerReport, StressReport,
                           equilibrium_rhs, energy_of, minimize_energy, solve_cavitating,
                           solve_regular, stress_report)
from .constitutive import ConstitutiveLaw, ReducedLaw, check_assumptions, example42
from .errors import AdmissibilityError, CavitateError, ConfigError, ConvergenceError
from .geometry import (CurvatureProfile, constant_curvature, curvature_of_revolution,
                       log_bump_surface, tabulated_curvature, zero_curvature)
from .incompressible import (BifurcationDiagram, IncompressibleSolution, bifurcation_diagram,
                             chi, energy_I, incompressible_deformation, pcr)
from .jacobi import JacobiField, solve_jacobi

__version__ = "0.1.0"
