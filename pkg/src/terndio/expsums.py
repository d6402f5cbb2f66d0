"""Exponential sums over the weighted supports and their integral statistics.

The two sums are

    F1(t) = sum w1(x1/P) w2(x2/P) exp(i t log(x1^k - alpha2 x2^k))
    F2(t) = sum w3(x3/P) exp(i t log x3)

First line of the support system keeps x1^k - alpha2 x2^k positive (and of
size ~ P^k) on the support, so the logarithm is always defined; this is
guarded anyway.  Dense t-grids are evaluated by a compiled phase-recurrence
kernel (complex rotation per node, re-anchored with an exact exponential at
every chunk boundary, so the drift stays ~ chunk ulps); everything downstream
(mean squares, damped integrals) is trapezoid work on those grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .errors import BudgetError, ValidationError
from .forms import FormParams
from .quadrature import gauss_panels, oscillatory_panels
from .weights import (BumpFamily, SupportParams, integer_support, make_bumps,
                      solve_support, verify_support)
from .zeta import T_MAX, ZetaValue, zeta_half_line  # noqa: F401  (re-export)

GRID_CHUNK = 2048
DEFAULT_NODE_BUDGET = 40_000_000


# ---------------------------------------------------------------------------
# context and lattice data
# ---------------------------------------------------------------------------

@dataclass
class ExpSumContext:
    P: float
    params: FormParams
    weights: BumpFamily
    support: SupportParams
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.P < 8:
            raise ValidationError(f"P must be >= 8, got {self.P}")
        check = verify_support(self.support, self.params.alpha2, self.params.k)
        if not check.ok:
            raise ValidationError(
                f"support constants fail for alpha2={self.params.alpha2}, "
                f"k={self.params.k}: slacks={check.slacks}")

    @property
    def h_limit(self) -> float:
        """Largest admissible t-grid spacing: the phase t log(Phi) has
        |d/dt| <= k log(b1 P), and we require >= 4 nodes per radian."""
        return 0.25 / (self.params.k * math.log(self.support.b1 * self.P))


def make_context(k: int, alpha2: float, P: float, alpha3: float = 0.75,
                 support: SupportParams | None = None) -> ExpSumContext:
    support = support if support is not None else solve_support(alpha2)
    return ExpSumContext(P=float(P), params=FormParams(k=k, alpha2=alpha2,
                                                       alpha3=alpha3),
                         weights=make_bumps(support), support=support)


def _pair_data(ctx: ExpSumContext):
    """(log Phi, weight) flattened over the (x1, x2) support lattice."""
    if "pairs" not in ctx._cache:
        n1, w1 = integer_support(ctx.weights, 1, ctx.P)
        n2, w2 = integer_support(ctx.weights, 2, ctx.P)
        k = ctx.params.k
        phi = (n1.astype(np.float64) ** k)[:, None] \
            - ctx.params.alpha2 * (n2.astype(np.float64) ** k)[None, :]
        if np.any(phi <= 0.0):
            raise ValidationError("x1^k - alpha2 x2^k not positive on the support")
        ctx._cache["pairs"] = (np.log(phi).ravel(),
                               (w1[:, None] * w2[None, :]).ravel())
    return ctx._cache["pairs"]


def _single_data(ctx: ExpSumContext):
    if "singles" not in ctx._cache:
        n3, w3 = integer_support(ctx.weights, 3, ctx.P)
        ctx._cache["singles"] = (np.log(n3.astype(np.float64)), w3)
    return ctx._cache["singles"]


# ---------------------------------------------------------------------------
# point evaluation
# ---------------------------------------------------------------------------

def _compensated_phase_sum(logs: np.ndarray, w: np.ndarray, t: float) -> complex:
    ph = t * logs
    re = math.fsum((w * np.cos(ph)).tolist())
    im = math.fsum((w * np.sin(ph)).tolist())
    return complex(re, im)


def f1(ctx: ExpSumContext, t: float) -> complex:
    """The two-variable sum at a single t (compensated accumulation)."""
    logs, w = _pair_data(ctx)
    return _compensated_phase_sum(logs, w, float(t))


def f2(ctx: ExpSumContext, t: float) -> complex:
    """The one-variable sum at a single t."""
    logs, w = _single_data(ctx)
    return _compensated_phase_sum(logs, w, float(t))


def f1_many(ctx: ExpSumContext, ts) -> np.ndarray:
    """Vectorized F1 at arbitrary nodes (plain dot-product accumulation)."""
    logs, w = _pair_data(ctx)
    ts = np.asarray(ts, dtype=np.float64)
    return np.exp(1j * ts[:, None] * logs[None, :]) @ w


def f2_many(ctx: ExpSumContext, ts) -> np.ndarray:
    logs, w = _single_data(ctx)
    ts = np.asarray(ts, dtype=np.float64)
    return np.exp(1j * ts[:, None] * logs[None, :]) @ w


# ---------------------------------------------------------------------------
# dense grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TGrid:
    """Uniform t-grid t_min + i*h (i = 0..n-1) with spacing certified against
    the phase-resolution limit of its context."""

    t_min: float
    t_max: float
    h: float
    n: int

    @classmethod
    def for_context(cls, ctx: ExpSumContext, t_min: float, t_max: float,
                    refine: float = 1.0) -> "TGrid":
        if not t_max > t_min:
            raise ValidationError(f"empty grid [{t_min}, {t_max}]")
        target = ctx.h_limit / refine
        m = int(math.ceil((t_max - t_min) / target))
        h = (t_max - t_min) / m
        return cls(t_min=float(t_min), t_max=float(t_max), h=h, n=m + 1)

    def values(self) -> np.ndarray:
        return self.t_min + self.h * np.arange(self.n)


@njit(parallel=True, cache=True)
def _phase_grid_kernel(logs, w, t0, h, n, chunk):  # pragma: no cover - compiled
    out_re = np.zeros(n)
    out_im = np.zeros(n)
    nch = (n + chunk - 1) // chunk
    for c in prange(nch):
        m0 = c * chunk
        m1 = min(m0 + chunk, n)
        for j in range(logs.size):
            lj = logs[j]
            wj = w[j]
            ang = (t0 + h * m0) * lj
            cr = math.cos(ang)
            ci = math.sin(ang)
            zr = math.cos(h * lj)
            zi = math.sin(h * lj)
            for m in range(m0, m1):
                out_re[m] += wj * cr
                out_im[m] += wj * ci
                tr = cr * zr - ci * zi
                ci = cr * zi + ci * zr
                cr = tr
    return out_re, out_im


def f1_on_grid(ctx: ExpSumContext, grid: TGrid,
               node_budget: int = DEFAULT_NODE_BUDGET) -> np.ndarray:
    """F1 on every node of the grid (compiled kernel, deterministic for any
    thread count: nodes are partitioned into fixed chunks and each chunk sums
    the lattice in a fixed order)."""
    if grid.n > node_budget:
        raise BudgetError(
            f"grid of {grid.n} nodes exceeds node budget {node_budget}",
            required=grid.n, budget=node_budget)
    logs, w = _pair_data(ctx)
    re, im = _phase_grid_kernel(logs, w, grid.t_min, grid.h, grid.n, GRID_CHUNK)
    return re + 1j * im


def mean_square_f1(ctx: ExpSumContext, T: float, refine: float = 1.0,
                   node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Trapezoid value of integral_{-T}^{T} |F1|^2 dt.

    |F1(-t)| = |F1(t)|, so only [0, T] is evaluated and doubled.
    """
    if not T > ctx.P ** 2:
        raise ValidationError(f"need T > P^2 = {ctx.P ** 2}, got T={T}")
    grid = TGrid.for_context(ctx, 0.0, T, refine)
    vals = np.abs(f1_on_grid(ctx, grid, node_budget)) ** 2
    vals[0] *= 0.5
    vals[-1] *= 0.5
    return 2.0 * grid.h * float(np.sum(vals))


def integral_i3(ctx: ExpSumContext, T: float, refine: float = 1.0,
                node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Damped mean square integral min(1, (T/|t|)^10) |F1(t)|^2 dt over the
    line: trapezoid on [-5T, 5T] (by evenness, [0, 5T] doubled) plus the
    analytic tail bound 2 F1(0)^2 T^10 integral_{5T}^inf t^-10 dt, which uses
    only |F1| <= F1(0)."""
    if not T > 0:
        raise ValidationError(f"need T > 0, got {T}")
    grid = TGrid.for_context(ctx, 0.0, 5.0 * T, refine)
    t = grid.values()
    env = np.ones(grid.n)
    pos = t > T
    env[pos] = (T / t[pos]) ** 10
    vals = env * np.abs(f1_on_grid(ctx, grid, node_budget)) ** 2
    vals[0] *= 0.5
    vals[-1] *= 0.5
    body = 2.0 * grid.h * float(np.sum(vals))
    f10 = abs(f1(ctx, 0.0))
    tail = 2.0 * f10 * f10 * T / (9.0 * 5.0 ** 9)
    return body + tail


# ---------------------------------------------------------------------------
# the smoothed Dirichlet kernel and its closed/asymptotic evaluation
# ---------------------------------------------------------------------------

def _tail_cos_integral(beta: float) -> float:
    """J(beta) = integral_1^inf u^-10 cos(beta u) du.

    Small beta: oscillation-scaled panels on [1, 12] (the u > 12 remainder is
    below 12^-9/9 ~ 2e-11).  Large beta: alternating integration-by-parts
    series with terms a!/(a-1)!... / beta^m, truncated when the remainder
    bound drops below 1e-12.
    """
    if beta < 60.0:
        nodes, wq = gauss_panels(1.0, 12.0, oscillatory_panels(11.0, beta, min_panels=6))
        return float(np.sum(wq * nodes ** -10.0 * np.cos(beta * nodes)))
    s, c = math.sin(beta), math.cos(beta)
    total = 0.0
    coef = 1.0
    a = 10.0
    for _ in range(60):
        total += coef * (-s / beta + a * c / (beta * beta))
        coef *= -a * (a + 1.0) / (beta * beta)
        a += 2.0
        if abs(coef) / (a - 1.0) < 1e-12:
            break
    return total


def kernel_i(T: float, y: float) -> complex:
    """integral min(1, (T/|t|)^10) e^{i t y} dt.

    Real and even in y; at y = 0 the closed form is 2T + 2T/9 = 20T/9.
    Absolute error stays far below 1e-6 * T.
    """
    if not T > 0:
        raise ValidationError(f"need T > 0, got {T}")
    if y == 0.0:
        return complex(20.0 * T / 9.0)
    ay = abs(float(y))
    val = 2.0 * math.sin(T * ay) / ay + 2.0 * T * _tail_cos_integral(T * ay)
    return complex(val)


# ---------------------------------------------------------------------------
# partial sums and parameter averages
# ---------------------------------------------------------------------------

def partial_sum(ctx: ExpSumContext, X1: float, X2: float, t: float) -> complex:
    """Unweighted S(X1, X2) = sum over (1/4)a_i P <= x_i < X_i of
    exp(i t log(x1^k - alpha2 x2^k))."""
    sp = ctx.support
    lo1 = math.ceil(0.25 * sp.a1 * ctx.P)
    lo2 = math.ceil(0.25 * sp.a2 * ctx.P)
    if not (lo1 <= X1 <= sp.b1 * ctx.P and lo2 <= X2 <= sp.b2 * ctx.P):
        raise ValidationError(
            f"X1, X2 must lie in the summation ranges "
            f"[{lo1}, {sp.b1 * ctx.P}] x [{lo2}, {sp.b2 * ctx.P}]")
    x1 = np.arange(lo1, math.ceil(X1), dtype=np.float64)
    x2 = np.arange(lo2, math.ceil(X2), dtype=np.float64)
    if x1.size == 0 or x2.size == 0:
        return 0j
    k = ctx.params.k
    phi = (x1 ** k)[:, None] - ctx.params.alpha2 * (x2 ** k)[None, :]
    if np.any(phi <= 0.0):
        raise ValidationError("x1^k - alpha2 x2^k not positive on the range")
    return complex(np.sum(np.exp(1j * float(t) * np.log(phi))))


def alpha2_mean_square_f1(P: float, t: float, k: int, weights: BumpFamily,
                          support: SupportParams, nodes: int = 64) -> float:
    """Gauss quadrature of integral_{1/2}^{1} |F1(t)|^2 d alpha2 with weights
    that do not depend on alpha2 (the alpha2-uniform support mode)."""
    if t == 0.0:
        raise ValidationError("t must be nonzero")
    if nodes < 64:
        raise ValidationError("at least 64 quadrature nodes are required")
    n1, w1 = integer_support(weights, 1, P)
    n2, w2 = integer_support(weights, 2, P)
    p1 = (n1.astype(np.float64) ** k)[:, None]
    p2 = (n2.astype(np.float64) ** k)[None, :]
    wts = (w1[:, None] * w2[None, :]).ravel()
    ag, aw = gauss_panels(0.5, 1.0, panels=max(1, nodes // 10), order=10)
    total = 0.0
    for a2, wq in zip(ag, aw):
        phi = p1 - a2 * p2
        if np.any(phi <= 0.0):
            raise ValidationError(f"support not alpha2-uniform at alpha2={a2}")
        val = np.exp(1j * float(t) * np.log(phi)).ravel() @ wts
        total += wq * (val.real ** 2 + val.imag ** 2)
    return float(total)


# ---------------------------------------------------------------------------
# second-derivative (shifted-phase) determinant check
# ---------------------------------------------------------------------------

def hess_shift_check(ctx: ExpSumContext, mu: int, nu: int, x1: float,
                     x2: float, t: float):
    """Closed-form leading determinant of the shifted phase versus finite
    differences.

    g(x1, x2) = t[log Phi(x1+mu, x2+nu) - log Phi(x1, x2)] with
    Phi = x1^k - alpha2 x2^k.  Returns (closed, numeric) where `closed` is the
    quadratic leading term in (mu, nu) of det Hess g and `numeric` is the
    5-point central-difference determinant (exact Hessian of g up to O(h^2)).
    """
    k = ctx.params.k
    a2 = ctx.params.alpha2
    tt = float(t)

    def phase(u, v):
        val = u ** k - a2 * v ** k
        if val <= 0:
            raise ValidationError("Phi nonpositive at finite-difference stencil")
        return tt * math.log(val)

    def g(u, v):
        return phase(u + mu, v + nu) - phase(u, v)

    phi = x1 ** k - a2 * x2 ** k
    closed = (2.0 * a2 * k ** 3 * (k - 1) * tt ** 2 * mu ** 2
              * phi ** -3.0 * x1 ** (2 * k - 4) * x2 ** (k - 2)
              - 2.0 * a2 * k ** 2 * (k - 1) * (k - 2) * tt ** 2 * mu * nu
              * phi ** -2.0 * x1 ** (k - 3) * x2 ** (k - 3)
              - 2.0 * a2 ** 2 * k ** 3 * (k - 1) * tt ** 2 * nu ** 2
              * phi ** -3.0 * x1 ** (k - 2) * x2 ** (2 * k - 4))

    h1 = 1e-5 * x1
    h2 = 1e-5 * x2
    g11 = (g(x1 + h1, x2) - 2.0 * g(x1, x2) + g(x1 - h1, x2)) / h1 ** 2
    g22 = (g(x1, x2 + h2) - 2.0 * g(x1, x2) + g(x1, x2 - h2)) / h2 ** 2
    g12 = (g(x1 + h1, x2 + h2) - g(x1 + h1, x2 - h2)
           - g(x1 - h1, x2 + h2) + g(x1 - h1, x2 - h2)) / (4.0 * h1 * h2)
    return closed, g11 * g22 - g12 ** 2


# ---------------------------------------------------------------------------
# critical-line envelope for F2
# ---------------------------------------------------------------------------

_ZETA_GROWTH_C = 40.0  # empirical-with-margin envelope |zeta(1/2+iu)| <= C (1+|u|)^(1/4)


def f2_envelope(ctx: ExpSumContext, t: float) -> float:
    """sqrt(P) * (integral_{-50}^{50} |zeta(1/2 + i(y - t))| / (1 + |y|^10) dy
    plus an analytic tail bound).

    The 1/(1+|y|^10) factor makes everything beyond |y| ~ 12 negligible, so
    the node budget concentrates there; the |y| > 50 tail is bounded with the
    envelope |zeta(1/2+iu)| <= C (1+|u|)^(1/4) and contributes < 1e-12.
    """
    t = float(t)
    if abs(t) > T_MAX - 100.0:
        raise ValidationError(f"|t| = {abs(t)} too close to the zeta range limit")

    segs = ((-50.0, -12.0, 10), (-12.0, 12.0, 160), (12.0, 50.0, 10))
    total = 0.0
    for a, b, panels in segs:
        nodes, wq = gauss_panels(a, b, panels, order=8)
        vals = np.array([zeta_half_line(y - t).magnitude for y in nodes])
        total += float(np.sum(wq * vals / (1.0 + np.abs(nodes) ** 10)))
    tail = (_ZETA_GROWTH_C * (1.0 + abs(t)) ** 0.25
            * 2.0 * 51.0 ** -8.75 / 8.75)
    return math.sqrt(ctx.P) * (total + tail)
