"""Vacuum Q/T-functions of the quantum sine(h)-Gordon models from the
integrable machinery of a deformed classical field equation: nonlinear
integral equation solvers, spectral reconstruction, integrals of motion,
and inverse-scattering field recovery.
"""

from . import ddv, grid, kernels, local_im, mshg_field, params, qt, schrodinger, shg

__all__ = ["params", "grid", "kernels", "ddv", "qt", "local_im",
           "mshg_field", "shg", "schrodinger"]
__version__ = "0.1.0"
