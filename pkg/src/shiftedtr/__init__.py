"""Exact-arithmetic topological recursion on shifted (r,s) spectral curves.

The package computes correlator tables for the curve x = z^r with
omega_{0,1} = r z^(s-1) dz and zero-mode shift constants S_{i,l}, entirely
in rational / cyclotomic arithmetic, and cross-checks the output three
independent ways: W-algebra constraints on the partition function, an
order-r quantum curve annihilating the wave function, and WKB amplitudes
of the associated hbar-connection.
"""

from .curve import CurveError, CurveSpec, unchecked_curve
from .exact import CycContext, CycNum, Rat, rat_from_str, rat_to_str
from .series import CorrelatorTable, HSeries, LaurentForm
from .tr import RecursionState, Report, run_curve, state_from_table

__version__ = "0.1.0"

__all__ = [
    "CurveError",
    "CurveSpec",
    "unchecked_curve",
    "CycContext",
    "CycNum",
    "Rat",
    "rat_from_str",
    "rat_to_str",
    "CorrelatorTable",
    "HSeries",
    "LaurentForm",
    "RecursionState",
    "Report",
    "run_curve",
    "state_from_table",
    "__version__",
]
