"""terndio: numerics for Diophantine inequalities of ternary diagonal forms.

Minimum-value box searches, smooth-weighted counting, exponential sums with
mean-square and sup statistics, critical-line zeta evaluation, rational points
near curved surfaces, and exceptional-set experiments.
"""

__version__ = "0.1.0"

from .errors import BudgetError, CertificationError, ValidationError  # noqa: F401
from .forms import (BoxRegion, FormParams, SearchReport, evaluate,  # noqa: F401
                    log_gap, min_search_brute, min_search_fast,
                    reduction_constants, weighted_count)
from .weights import (BumpFamily, SupportParams, bump_eval,  # noqa: F401
                      fourier_transform, kernel_difference, make_bumps,
                      solve_support, uniform_support, verify_support)
from .zeta import ZetaValue, zeta_half_line  # noqa: F401
