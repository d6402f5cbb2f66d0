"""Smooth bump weights: support constants, evaluation, certified Fourier transforms.

Five weights are maintained per family.  Indices 1..3 are the one-sided bumps
used for the three form variables (plateau on [a_i/2, 3b_i/4], support inside
[a_i/4, b_i]), index 0 is the symmetric bump (1 on [-1,1], support in [-2,2]),
and index 4 is the ratio-coordinate bump with support inside
[(1/4) a2/b1, 4 b2/a1] used by the near-surface counter.

Fourier convention, used consistently everywhere downstream:

    w_hat(xi) = integral w(x) exp(-i xi x) dx,

so inversion carries a factor 1/(2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .quadrature import gauss_panels, oscillatory_panels

#: Transforms are certified (absolute error <= 1e-10) up to this frequency.
#: Beyond it the value is returned as exactly 0: the calibrated decay envelope
#: C10*(1+|xi|)^-10 (see the decay tests) puts |w_hat| far below 1e-10 there,
#: and the theoretical envelope holds for all xi, not just the fitted range.
XI_MAX = 1.0e6

_TRANSITION_FRACTION = 0.25  # of the support interval, for the index-4 bump


# ---------------------------------------------------------------------------
# support constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportParams:
    """The six box constants 0 < a_i < b_i constraining the weight supports."""

    a1: float
    b1: float
    a2: float
    b2: float
    a3: float
    b3: float

    def pairs(self):
        return ((self.a1, self.b1), (self.a2, self.b2), (self.a3, self.b3))


@dataclass(frozen=True)
class SupportCheck:
    """Result of verify_support: validity plus per-inequality relative slack."""

    ok: bool
    ordering_ok: bool
    ordering_violations: tuple
    slacks: tuple  # three relative slacks, one per inequality
    min_slack: float


def solve_support(alpha2: float) -> SupportParams:
    """Choose support constants satisfying the three coupled inequalities

        (a1/4)^k - alpha2 * b2^k              > 0
        (a1/4)^k < alpha2 * (a2/4)^k + (a3/4)^k / 2
        alpha2 * b2^k + b3^k                  < b1^k

    in the greedy order a1, b2, a2, a3, b3, b1.  The construction below is
    degree-uniform: fixing the ratios b2/a1 = 1/(5.2 max(1, sqrt(alpha2))),
    a2 = 0.9 b2, a3 = 1.55 a1, b3 = 1.2 a3, b1 = 1.2 b3 gives relative slack
    >= 0.15 on every inequality for every k >= 2, so one SupportParams serves
    all degrees (verify_support re-checks any (alpha2, k) pair explicitly).

    The upper constants are kept tight (b1 ~ 2.2 a1 rather than some large
    multiple): a long first-variable range would compress the log-value
    spectrum of x1^k - alpha2 x2^k by 1/Phi_max and flood the mean-square
    t-integrals with near-coincident pairs at desk scale.
    """
    if not alpha2 > 0:
        raise ValidationError(f"alpha2 must be positive, got {alpha2}")
    a1 = 1.0
    b2 = 0.25 * a1 / (1.3 * max(1.0, math.sqrt(alpha2)))
    a2 = 0.9 * b2
    a3 = 1.55 * a1
    b3 = 1.2 * a3
    b1 = 1.2 * b3
    return SupportParams(a1=a1, b1=b1, a2=a2, b2=b2, a3=a3, b3=b3)


def uniform_support() -> SupportParams:
    """Support constants valid simultaneously for every alpha2 in [1/2, 1].

    Each inequality is linear in alpha2, so checking the endpoints suffices;
    solve_support(1.0) is worst-case for lines 1 and 3, and line 2 holds for
    any alpha2 > 0 because its slack never relies on the alpha2 term.  Used by
    the double-average experiments where the weights must not depend on alpha2.
    """
    return solve_support(1.0)


def verify_support(params: SupportParams, alpha2: float, k: int) -> SupportCheck:
    """Check the three support inequalities for given (alpha2, k).

    Relative slack of `lhs < rhs` is (rhs - lhs)/rhs; all three must be
    strictly positive.  Ordering violations (a_i >= b_i, or nonpositive
    constants) are reported separately and force ok=False.
    """
    violations = []
    for idx, (a, b) in enumerate(params.pairs(), start=1):
        if not (0 < a < b):
            violations.append(f"need 0 < a{idx} < b{idx}, got a{idx}={a}, b{idx}={b}")
    ordering_ok = not violations

    q1 = (0.25 * params.a1) ** k
    line1 = (q1 - alpha2 * params.b2 ** k) / q1
    rhs2 = alpha2 * (0.25 * params.a2) ** k + 0.5 * (0.25 * params.a3) ** k
    line2 = (rhs2 - q1) / rhs2
    rhs3 = params.b1 ** k
    line3 = (rhs3 - alpha2 * params.b2 ** k - params.b3 ** k) / rhs3
    slacks = (line1, line2, line3)
    ok = ordering_ok and all(s > 0 for s in slacks)
    return SupportCheck(ok=ok, ordering_ok=ordering_ok,
                        ordering_violations=tuple(violations),
                        slacks=slacks, min_slack=min(slacks))


# ---------------------------------------------------------------------------
# bump family
# ---------------------------------------------------------------------------

def _smoothstep(u):
    """C-infinity monotone step: 0 for u<=0, 1 for u>=1, all derivatives flat
    at both junctions (the exp(-1/u) mollifier profile)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        a = np.exp(-1.0 / um)
        b = np.exp(-1.0 / (1.0 - um))
        out[mid] = a / (a + b)
    return out


@dataclass(frozen=True)
class BumpFamily:
    """Knots (support_lo, plateau_lo, plateau_hi, support_hi) for w0..w4."""

    knots: tuple  # 5 tuples of 4 floats
    support: SupportParams

    def interval(self, i: int):
        x0, _, _, x3 = self.knots[i]
        return x0, x3

    def plateau(self, i: int):
        _, x1, x2, _ = self.knots[i]
        return x1, x2


def make_bumps(support: SupportParams) -> BumpFamily:
    ks = [(-2.0, -1.0, 1.0, 2.0)]
    for a, b in support.pairs():
        ks.append((0.25 * a, 0.5 * a, 0.75 * b, b))
    lo4 = 0.25 * support.a2 / support.b1
    hi4 = 4.0 * support.b2 / support.a1
    width = hi4 - lo4
    ks.append((lo4, lo4 + _TRANSITION_FRACTION * width,
               hi4 - _TRANSITION_FRACTION * width, hi4))
    return BumpFamily(knots=tuple(ks), support=support)


def _eval_knots(knots, x):
    x0, x1, x2, x3 = knots
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    out[(x >= x1) & (x <= x2)] = 1.0
    rise = (x > x0) & (x < x1)
    if np.any(rise):
        out[rise] = _smoothstep((x[rise] - x0) / (x1 - x0))
    fall = (x > x2) & (x < x3)
    if np.any(fall):
        out[fall] = _smoothstep((x3 - x[fall]) / (x3 - x2))
    return out


def bump_eval(family: BumpFamily, i: int, x):
    """Evaluate w_i at x (scalar or array).  Exactly 1 on the plateau and
    exactly 0 outside the support."""
    arr = _eval_knots(family.knots[i], np.atleast_1d(x))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(arr[0])
    return arr


def integer_support(family: BumpFamily, i: int, P: float):
    """Integers n with w_i(n/P) > 0, with their weights.

    Returns (n, w) as arrays; boundary integers with exactly zero weight are
    dropped (they contribute nothing to any sum).
    """
    x0, _, _, x3 = family.knots[i]
    lo = int(math.ceil(x0 * P))
    hi = int(math.floor(x3 * P))
    n = np.arange(lo, hi + 1, dtype=np.int64)
    w = _eval_knots(family.knots[i], n / float(P))
    keep = w > 0.0
    return n[keep], w[keep]


# ---------------------------------------------------------------------------
# Fourier transforms
# ---------------------------------------------------------------------------

def _transition_transform(beta: float) -> complex:
    """G(beta) = integral_0^1 s(u) exp(-i beta u) du via oscillation-scaled
    Gauss-Legendre panels (error far below 1e-12 at <=2.5 radians/panel)."""
    panels = oscillatory_panels(1.0, beta)
    nodes, wq = gauss_panels(0.0, 1.0, panels)
    vals = _smoothstep(nodes)
    return complex(np.sum(wq * vals * np.exp(-1j * beta * nodes)))


def fourier_transform(family: BumpFamily, i: int, xi: float) -> complex:
    """w_hat_i(xi) = integral w_i(x) exp(-i xi x) dx.

    Closed form on the plateau plus panel quadrature on the two transitions;
    absolute error <= 1e-10 for |xi| <= XI_MAX.  For |xi| > XI_MAX returns
    exactly 0 (see XI_MAX note).
    """
    x0, x1, x2, x3 = family.knots[i]
    if abs(xi) > XI_MAX:
        return 0.0j
    if xi == 0.0:
        # integral of s over a transition is half its length (s(1-u) = 1-s(u))
        return complex((x2 - x1) + 0.5 * (x1 - x0) + 0.5 * (x3 - x2))
    plateau = (np.exp(-1j * xi * x1) - np.exp(-1j * xi * x2)) / (1j * xi)
    lr = x1 - x0
    lf = x3 - x2
    rise = lr * np.exp(-1j * xi * x0) * _transition_transform(xi * lr)
    beta = xi * lf
    efull = (1.0 - np.exp(-1j * beta)) / (1j * beta)
    fall = lf * np.exp(-1j * xi * x2) * (efull - _transition_transform(beta))
    return complex(plateau + rise + fall)


def mass(family: BumpFamily, i: int) -> float:
    """The weight mass integral w_hat_i(0) = integral of w_i."""
    return fourier_transform(family, i, 0.0).real


# ---------------------------------------------------------------------------
# split-kernel difference and its calibrated envelope
# ---------------------------------------------------------------------------

def _difference_envelope(P: float, T: float, t: float) -> float:
    at = abs(t)
    if at == 0.0:
        return 0.0
    return min(1.0, t * t / P, (T / at) ** 10)


@lru_cache(maxsize=16)
def c3_constant(family: BumpFamily) -> float:
    """Envelope constant for |w2_hat(t/T) - w2_hat(t/sqrt(P))|.

    Calibrated once per family as 1.25x the observed supremum of
    value / min(1, t^2/P, (T/|t|)^10) over a log grid of (P, T, t) covering
    T in [sqrt(P), P^5] and |t| up to 1e3*T.  The supremum is dominated by the
    far-tail regime (moderate t/T against the 10th-power envelope), so the
    frozen value is large; this mirrors the envelope's role as an all-regime
    majorant rather than a sharp bound.
    """
    sup = 0.0
    for P in (16.0, 64.0, 256.0):
        rp = math.sqrt(P)
        for T in np.geomspace(rp * 1.01, P ** 5, 8):
            for t in np.geomspace(1e-2, 1e3 * T, 28):
                env = _difference_envelope(P, T, t)
                if env <= 0.0:
                    continue
                val = abs(fourier_transform(family, 2, t / T)
                          - fourier_transform(family, 2, t / rp))
                sup = max(sup, val / env)
    return 1.25 * sup


def kernel_difference(family: BumpFamily, P: float, T: float, t: float):
    """Return (value, envelope) for the split-transform difference at t.

    value    = |w2_hat(t/T) - w2_hat(t/sqrt(P))|
    envelope = c3 * min(1, t^2/P, (T/|t|)^10)

    Requires T >= sqrt(P).  Raises if value exceeds the calibrated envelope
    (which would mean the frozen c3 no longer covers this family).
    """
    if T < math.sqrt(P):
        raise ValidationError(f"need T >= sqrt(P); got T={T}, sqrt(P)={math.sqrt(P)}")
    value = abs(fourier_transform(family, 2, t / T)
                - fourier_transform(family, 2, t / math.sqrt(P)))
    envelope = c3_constant(family) * _difference_envelope(P, T, t)
    if value > envelope:
        raise RuntimeError(
            f"kernel difference {value} exceeds calibrated envelope {envelope} "
            f"at (P={P}, T={T}, t={t})")
    return value, envelope
