"""Numerical laboratory for large values of Dirichlet polynomials over characters and short t-intervals."""

import os

__version__ = "0.1.0"

# LVLAB_THREADS caps BLAS worker threads; it only takes effect if set before numpy loads.
if os.environ.get("LVLAB_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["LVLAB_THREADS"])

from .errors import BudgetExceededError, InvalidInputError, LvlabError, NonConvergenceError  # noqa: E402

__all__ = ["__version__", "LvlabError", "InvalidInputError", "BudgetExceededError", "NonConvergenceError"]
