"""The ternary diagonal form x1^k - alpha2 x2^k - alpha3 x3^k.

Evaluation keeps the integer powers exact (Python integers, with an explicit
127-bit magnitude guard) and does the coefficient arithmetic in binary64 with
at most ~1.5 ulp total error; the box searches return deterministic,
lexicographically tie-broken witnesses so that the brute and accelerated
methods are exactly interchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, ValidationError
from .weights import BumpFamily, SupportParams, integer_support

_POWER_LIMIT = 1 << 127     # |x_i^k| beyond this is a range error
_EXACT_FLOAT = 1 << 53      # integers below this convert to float exactly

DEFAULT_EVAL_BUDGET = 1_000_000_000


@dataclass(frozen=True)
class FormParams:
    """Degree and positive coefficients of the form."""

    k: int
    alpha2: float
    alpha3: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValidationError(f"k must be an integer >= 2, got {self.k}")
        if not (self.alpha2 > 0 and self.alpha3 > 0):
            raise ValidationError(
                f"alpha2, alpha3 must be positive, got {self.alpha2}, {self.alpha3}")

    @property
    def integral_coefficients(self) -> bool:
        return float(self.alpha2).is_integer() and float(self.alpha3).is_integer()


@dataclass(frozen=True)
class BoxRegion:
    """Closed integer box [lo_i, hi_i]^3, 1 <= lo_i <= hi_i."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        for l, u in zip(self.lo, self.hi):
            if not (1 <= l <= u):
                raise ValidationError(f"box needs 1 <= lo <= hi per axis, got {self.lo}, {self.hi}")

    @classmethod
    def cube(cls, P: int) -> "BoxRegion":
        return cls(lo=(1, 1, 1), hi=(int(P),) * 3)

    @classmethod
    def from_support(cls, support: SupportParams, P: float) -> "BoxRegion":
        """The weight-support box [ceil(a_i P / 4), floor(b_i P)]."""
        lo = tuple(int(math.ceil(0.25 * a * P)) for a, _ in support.pairs())
        hi = tuple(int(math.floor(b * P)) for _, b in support.pairs())
        return cls(lo=lo, hi=hi)

    @property
    def volume(self) -> int:
        v = 1
        for l, u in zip(self.lo, self.hi):
            v *= (u - l + 1)
        return v


@dataclass(frozen=True)
class SearchReport:
    min_abs: float
    witness: tuple
    evaluations: int
    method: str


def _checked_power(x: int, k: int) -> int:
    p = int(x) ** k
    if abs(p) >= _POWER_LIMIT:
        raise OverflowError(
            f"{x}^{k} exceeds the 127-bit magnitude range of the evaluator")
    return p


def evaluate(params: FormParams, x) -> float:
    """x1^k - alpha2 x2^k - alpha3 x3^k with exact integer powers.

    For integral coefficients the result is the exact integer (as a float).
    Otherwise each coefficient product rounds once and the three terms are
    combined with an exactly rounded sum, so the total error is at most a few
    ulp of the largest term.
    """
    x1, x2, x3 = (int(v) for v in x)
    p1 = _checked_power(x1, params.k)
    p2 = _checked_power(x2, params.k)
    p3 = _checked_power(x3, params.k)
    if params.integral_coefficients:
        return float(p1 - int(params.alpha2) * p2 - int(params.alpha3) * p3)
    if max(abs(p1), abs(p2), abs(p3)) < _EXACT_FLOAT:
        return math.fsum((float(p1), -params.alpha2 * float(p2),
                          -params.alpha3 * float(p3)))
    # powers no longer exactly representable: do the whole thing rationally
    exact = Fraction(p1) - Fraction(params.alpha2) * p2 - Fraction(params.alpha3) * p3
    return float(exact)


def _abs_value(params: FormParams, x):
    """|form value| for tie-breaking: exact int when coefficients are integral,
    the evaluate() float otherwise.  One consistent type per params."""
    if params.integral_coefficients:
        x1, x2, x3 = (int(v) for v in x)
        return abs(_checked_power(x1, params.k)
                   - int(params.alpha2) * _checked_power(x2, params.k)
                   - int(params.alpha3) * _checked_power(x3, params.k))
    return abs(evaluate(params, x))


def _float_powers(lo: int, hi: int, k: int) -> np.ndarray:
    return np.arange(lo, hi + 1, dtype=np.float64) ** k


def _resolve_candidates(params: FormParams, cands) -> SearchReport:
    """Exact re-evaluation of shortlisted triples; lexicographic tie rule."""
    best_val = None
    best_x = None
    for x in cands:
        v = _abs_value(params, x)
        if best_val is None or v < best_val or (v == best_val and x < best_x):
            best_val, best_x = v, x
    return float(best_val), best_x


def min_search_brute(params: FormParams, box: BoxRegion,
                     budget: int = DEFAULT_EVAL_BUDGET) -> SearchReport:
    """Exhaustive minimum of |form| over the box.

    Vectorized float scan plus exact re-evaluation of every near-minimal
    triple, which reproduces the result of a scalar lexicographic loop.
    """
    if box.volume > budget:
        raise BudgetError(
            f"brute search over {box.volume} points exceeds budget {budget}",
            required=box.volume, budget=budget)
    (l1, l2, l3), (u1, u2, u3) = box.lo, box.hi
    k = params.k
    _checked_power(u1, k), _checked_power(u2, k), _checked_power(u3, k)
    p2 = _float_powers(l2, u2, k) * params.alpha2
    p3 = _float_powers(l3, u3, k) * params.alpha3
    rhs = p2[:, None] + p3[None, :]
    max_term = max(float(u1) ** k, p2[-1], p3[-1])
    slack = 64.0 * max_term * 2.0 ** -52

    gmin = math.inf
    for x1 in range(l1, u1 + 1):
        a = np.abs(float(x1) ** k - rhs)
        m = float(a.min())
        if m < gmin:
            gmin = m

    cands = []
    for x1 in range(l1, u1 + 1):
        a = np.abs(float(x1) ** k - rhs)
        for i2, i3 in np.argwhere(a <= gmin + slack):
            cands.append((x1, l2 + int(i2), l3 + int(i3)))
    val, wit = _resolve_candidates(params, cands)
    return SearchReport(min_abs=val, witness=wit, evaluations=box.volume,
                        method="brute")


def min_search_fast(params: FormParams, box: BoxRegion) -> SearchReport:
    """Accelerated minimum: for each (x2, x3) only the integers bracketing the
    real root (alpha2 x2^k + alpha3 x3^k)^(1/k) can minimize |form| along x1
    (the form is monotone in x1 > 0), so four clamped candidates suffice; a
    +-1 guard absorbs the rounding of the float root.  Agrees with
    min_search_brute in value and witness.
    """
    (l1, l2, l3), (u1, u2, u3) = box.lo, box.hi
    k = params.k
    _checked_power(u1, k), _checked_power(u2, k), _checked_power(u3, k)
    x3s = np.arange(l3, u3 + 1, dtype=np.int64)
    p3 = x3s.astype(np.float64) ** k * params.alpha3
    max_term = max(float(u1) ** k, params.alpha2 * float(u2) ** k, float(p3[-1]))
    slack = 64.0 * max_term * 2.0 ** -52

    def slab(x2):
        t = params.alpha2 * float(x2) ** k + p3
        r = t ** (1.0 / k)
        f = np.floor(r)
        c = np.ceil(r)
        x1c = np.stack((f - 1.0, f, c, c + 1.0))
        np.clip(x1c, l1, u1, out=x1c)
        return x1c, np.abs(x1c ** k - t[None, :])

    gmin = math.inf
    for x2 in range(l2, u2 + 1):
        _, a = slab(x2)
        m = float(a.min())
        if m < gmin:
            gmin = m

    cands = []
    for x2 in range(l2, u2 + 1):
        x1c, a = slab(x2)
        for ic, i3 in np.argwhere(a <= gmin + slack):
            cands.append((int(x1c[ic, i3]), x2, l3 + int(i3)))
    val, wit = _resolve_candidates(params, sorted(set(cands)))
    evals = 4 * (u2 - l2 + 1) * (u3 - l3 + 1)
    return SearchReport(min_abs=val, witness=wit, evaluations=evals,
                        method="fast")


def weighted_count(params: FormParams, family: BumpFamily, P: float,
                   theta: float) -> float:
    """Sum of w1(x1/P) w2(x2/P) w3(x3/P) over integer triples with
    |form(x)| < theta."""
    if not 0 < theta < float(P) ** params.k:
        raise ValidationError(f"need 0 < theta < P^k, got theta={theta}")
    k = params.k
    n1, w1 = integer_support(family, 1, P)
    n2, w2 = integer_support(family, 2, P)
    n3, w3 = integer_support(family, 3, P)
    p1 = n1.astype(np.float64) ** k
    p3 = params.alpha3 * n3.astype(np.float64) ** k
    slabs = []
    for x2, wx2 in zip(n2, w2):
        f = p1[:, None] - params.alpha2 * float(x2) ** k - p3[None, :]
        inside = np.abs(f) < theta
        slabs.append(wx2 * float(np.sum(w1[:, None] * w3[None, :] * inside)))
    return math.fsum(slabs)


def log_gap(params: FormParams, x) -> float:
    """|log(x1^k - alpha2 x2^k) - log(alpha3 x3^k)|, the quantity whose
    smallness forces |form| to be small on the weight support."""
    x1, x2, x3 = (int(v) for v in x)
    k = params.k
    first = float(x1 ** k) - params.alpha2 * float(x2 ** k)
    if first <= 0.0:
        raise ValidationError(
            f"first log factor x1^k - alpha2*x2^k = {first} is not positive")
    second = params.alpha3 * float(x3 ** k)
    if second <= 0.0:
        raise ValidationError(
            f"second log factor alpha3*x3^k = {second} is not positive")
    return abs(math.log(first) - math.log(second))


def reduction_constants(support: SupportParams, k: int, c0: float = 0.5):
    """Constants (c0, C) making the log-gap reduction explicit.

    On the weight support with theta < P^k and alpha3 <= 1:
    if |log A - log B| < eps with eps = c0 theta / P^k, then A/B lies in
    (e^-eps, e^eps), so |A - B| <= B (e^eps - 1) <= B eps e^c0, and
    B = alpha3 x3^k <= (b3 P)^k.  Hence |form| <= C theta with
    C = c0 e^c0 b3^k.  Any c0 works; c0 = 1/2 is frozen so the integral
    cutoff T = 2 P^k / (c0 theta) stays moderate.
    """
    return c0, c0 * math.exp(c0) * support.b3 ** k
