"""Exception types shared by the solvers and the command line."""


class CavitateError(Exception):
    """Base class for package errors."""


class AdmissibilityError(CavitateError):
    """A curvature or constitutive gate failed (for example mu_plus > 1)."""


class ConvergenceError(CavitateError):
    """A root-find, quadrature or shooting iteration did not converge."""


class ConfigError(CavitateError):
    """Invalid run configuration."""
