"""Rational points near the curved objects attached to the form.

Four counters live here: the weighted count of rationals near the Monge-form
hypersurface (z2, z4, f(z2, z4)) with its curvature certificate and main-term
comparison; the planar-curve counter for 1 - alpha2 y2^k - alpha3 y3^k = 0;
the four-variable near-equality count I4(U) with an O(P^3) window
acceleration; and the product-pair level-set count R(U).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, CertificationError, ValidationError
from .expsums import ExpSumContext
from .forms import FormParams
from .weights import BumpFamily, SupportParams, bump_eval, integer_support, mass

DEFAULT_Q_BUDGET = 2000
DEFAULT_CURVE_BUDGET = 4096
BRUTE_R_LIMIT = 128
PAIR_R_LIMIT = 4096


@dataclass(frozen=True)
class MongeSurface:
    """Graph surface (z2, z4, f(z2, z4)) with f = (1 + a2 z2^k - a2 z4^k)^(1/k)."""

    k: int
    alpha2: float
    domain: tuple  # ((lo2, hi2), (lo4, hi4))

    @classmethod
    def from_support(cls, support: SupportParams, k: int,
                     alpha2: float) -> "MongeSurface":
        lo = 0.25 * support.a2 / support.b1
        hi = 4.0 * support.b2 / support.a1
        return cls(k=k, alpha2=alpha2, domain=((lo, hi), (lo, hi)))


@dataclass(frozen=True)
class CurvatureCertificate:
    c8: float           # lower bound for |det Hess f| on the domain
    c9: float           # upper bound
    sign: int           # constant sign of det (negative here)
    grid_n: int
    padding: float      # Lipschitz padding used on both sides


@dataclass(frozen=True)
class CountReport:
    count: float
    main_term: float
    ratio: float
    params: dict


def _report(count: float, main_term: float, params: dict) -> CountReport:
    ratio = count / main_term if main_term > 0 else math.nan
    return CountReport(count=count, main_term=main_term, ratio=ratio,
                       params=params)


# ---------------------------------------------------------------------------
# the Monge surface and its curvature
# ---------------------------------------------------------------------------

def monge_f(surface: MongeSurface, z2, z4):
    """(1 + a2 z2^k - a2 z4^k)^(1/k); scalar or array."""
    k, a2 = surface.k, surface.alpha2
    rad = 1.0 + a2 * np.asarray(z2, dtype=float) ** k \
        - a2 * np.asarray(z4, dtype=float) ** k
    if np.any(rad <= 0.0):
        raise ValidationError("radicand 1 + a2 z2^k - a2 z4^k not positive")
    out = rad ** (1.0 / k)
    return float(out) if np.ndim(out) == 0 else out


def hessian_det_closed(surface: MongeSurface, z2, z4):
    """det of the Hessian of monge_f, braced factor evaluated first:

    (k-1)^2 a2^2 (1 + a2 z2^k - a2 z4^k)^(2/k - 4)
      * { -z2^(k-2) z4^(k-2) (1 - a2 z4^k)(1 + a2 z2^k) - a2^2 z2^(2k-2) z4^(2k-2) }
    """
    k, a2 = surface.k, surface.alpha2
    z2 = np.asarray(z2, dtype=float)
    z4 = np.asarray(z4, dtype=float)
    rad = 1.0 + a2 * z2 ** k - a2 * z4 ** k
    braced = (-(z2 ** (k - 2)) * z4 ** (k - 2)
              * (1.0 - a2 * z4 ** k) * (1.0 + a2 * z2 ** k)
              - a2 ** 2 * z2 ** (2 * k - 2) * z4 ** (2 * k - 2))
    out = (k - 1) ** 2 * a2 ** 2 * rad ** (2.0 / k - 4.0) * braced
    return float(out) if np.ndim(out) == 0 else out


def _grid_axis(lo: float, hi: float, n: int) -> np.ndarray:
    """Geometric spacing when the axis stays positive (the determinant varies
    on a relative scale near the small-z edge), uniform otherwise."""
    if lo > 0.0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def certify_curvature(surface: MongeSurface, grid_n: int = 64) -> CurvatureCertificate:
    """Two-sided bound on |det Hess f| over the domain.

    Per-cell first-order padding: any interior point is within half a cell of
    a corner along each axis, so each cell contributes
    min(corner values) - [dz2/2 * max|d det/dz2| + dz4/2 * max|d det/dz4|]
    to the lower bound (axis-separated: the cells are strongly anisotropic on
    the geometric grid), and symmetrically for the upper bound.  The grid is
    geometric along positive axes so the padding stays a small fraction of the
    local value even where the determinant is tiny near the domain corner.
    Certification fails on a sign change, a vanishing node, or a nonpositive
    padded lower bound.
    """
    if grid_n < 32:
        raise ValidationError(f"grid_n must be >= 32, got {grid_n}")
    (lo2, hi2), (lo4, hi4) = surface.domain
    z2 = _grid_axis(lo2, hi2, grid_n)
    z4 = _grid_axis(lo4, hi4, grid_n)
    det = hessian_det_closed(surface, z2[:, None], z4[None, :])
    if np.any(det == 0.0) or (np.any(det > 0.0) and np.any(det < 0.0)):
        raise CertificationError(
            "Hessian determinant changes sign (or vanishes) on the grid",
            report={"min": float(det.min()), "max": float(det.max())})
    sign = 1 if det[0, 0] > 0 else -1
    adet = np.abs(det)
    g2, g4 = np.gradient(adet, z2, z4)

    def corners(a):
        return np.stack((a[:-1, :-1], a[1:, :-1], a[:-1, 1:], a[1:, 1:]))

    pad = 0.5 * (np.diff(z2)[:, None] * corners(np.abs(g2)).max(axis=0)
                 + np.diff(z4)[None, :] * corners(np.abs(g4)).max(axis=0))
    lower = corners(adet).min(axis=0) - pad
    upper = corners(adet).max(axis=0) + pad
    c8 = float(lower.min())
    c9 = float(upper.max())
    if c8 <= 0.0:
        raise CertificationError(
            f"padded lower curvature bound nonpositive ({c8})",
            report={"grid_min": float(adet.min()), "padding": float(pad.max())})
    return CurvatureCertificate(c8=c8, c9=c9, sign=sign, grid_n=grid_n,
                                padding=float(pad.max()))


# ---------------------------------------------------------------------------
# near-surface counter (weighted) and its main term
# ---------------------------------------------------------------------------

def count_near_surface(surface: MongeSurface, family: BumpFamily, Q: int,
                       delta: float, budget: int = DEFAULT_Q_BUDGET) -> CountReport:
    """Sum of w4(a1/q) w4(a2/q) over q <= Q and integer pairs a with
    || q f(a/q) || < delta, against the main term (2 w_hat(0) / 3) delta Q^3
    (three variables: a1, a2, q).

    ||.|| is the distance to the nearest integer via round-half-even; an exact
    half gives distance exactly 1/2, which never passes since delta < 1/2.
    """
    if not 0.0 <= delta < 0.5:
        raise ValidationError(f"delta must satisfy 0 <= delta < 1/2, got {delta}")
    Q = int(Q)
    if Q > budget:
        raise BudgetError(f"Q={Q} exceeds enumeration budget {budget}",
                          required=Q, budget=budget)
    x0, _, _, x3 = family.knots[4]
    k, a2c = surface.k, surface.alpha2
    total = 0.0
    for q in range(1, Q + 1):
        lo = int(math.ceil(x0 * q))
        hi = int(math.floor(x3 * q))
        if lo > hi:
            continue
        a = np.arange(lo, hi + 1, dtype=np.float64)
        z = a / q
        w = bump_eval(family, 4, z)
        rad = 1.0 + a2c * z[:, None] ** k - a2c * z[None, :] ** k
        qf = q * rad ** (1.0 / k)
        dist = np.abs(qf - np.rint(qf))
        hits = (dist < delta) & (w[:, None] > 0) & (w[None, :] > 0)
        if np.any(hits):
            total += float(np.sum((w[:, None] * w[None, :])[hits]))
    m4 = mass(family, 4)
    main = (2.0 / 3.0) * m4 * m4 * delta * Q ** 3
    return _report(total, main, {"Q": Q, "delta": delta})


# ---------------------------------------------------------------------------
# the planar-curve counter
# ---------------------------------------------------------------------------

def _arc_certify(gfun, lo: float, hi: float, grid_n: int = 200,
                 label: str = "arc") -> None:
    """Check the arc's graph has second derivative of constant sign bounded
    away from zero (5-point central differences on a uniform grid)."""
    u = np.linspace(lo, hi, grid_n)
    h = (hi - lo) / (grid_n - 1) * 0.25
    g2 = (gfun(u + h) - 2.0 * gfun(u) + gfun(u - h)) / (h * h)
    amin = float(np.min(np.abs(g2)))
    amax = float(np.max(np.abs(g2)))
    if amin == 0.0 or np.any(g2 > 0) and np.any(g2 < 0) or amin < 1e-9 * amax:
        raise CertificationError(
            f"{label}: second derivative not bounded away from zero "
            f"(min {amin}, max {amax})",
            report={"min_abs": amin, "max_abs": amax})


def count_near_curve(params: FormParams, P: int, delta: float,
                     trim: float = 0.05,
                     budget: int = DEFAULT_CURVE_BUDGET) -> CountReport:
    """Rational points p/q (q <= P) within ~delta/q of the planar curve
    1 - alpha2 y2^k - alpha3 y3^k = 0, counted as pairs (q, p) through the
    membership test ||q g(p/q)|| < delta on two Monge arcs.

    The curve is split at the gradient crossover alpha2 y2^(k-1) =
    alpha3 y3^(k-1): each side is parametrized by the coordinate against which
    the graph has |slope| <= 1, the ends are trimmed by `trim` of the
    intercepts (curvature of the graph vanishes on the axes for k >= 3), and
    each arc is curvature-certified before counting.  Main term: delta P^2.
    """
    if not 0.0 <= delta < 0.5:
        raise ValidationError(f"delta must satisfy 0 <= delta < 1/2, got {delta}")
    P = int(P)
    if P > budget:
        raise BudgetError(f"P={P} exceeds enumeration budget {budget}",
                          required=P, budget=budget)
    k, a2, a3 = params.k, params.alpha2, params.alpha3
    y2max = (1.0 / a2) ** (1.0 / k)
    y3max = (1.0 / a3) ** (1.0 / k)

    def g23(y2):  # y3 as a function of y2
        return ((1.0 - a2 * np.asarray(y2, dtype=float) ** k) / a3) ** (1.0 / k)

    def g32(y3):  # y2 as a function of y3
        return ((1.0 - a3 * np.asarray(y3, dtype=float) ** k) / a2) ** (1.0 / k)

    # gradient crossover on the curve, by bisection in y2 (monotone)
    def cross(y2):
        return a2 * y2 ** (k - 1) - a3 * g23(y2) ** (k - 1)

    lo, hi = 1e-9 * y2max, (1.0 - 1e-9) * y2max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cross(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    y2_star = 0.5 * (lo + hi)
    y3_star = float(g23(y2_star))

    arcs = (
        ("y2-arc", g23, trim * y2max, y2_star),
        ("y3-arc", g32, trim * y3max, y3_star * (1.0 - 1e-12)),
    )
    total = 0
    for label, gfun, alo, ahi in arcs:
        if ahi <= alo:
            continue
        _arc_certify(gfun, alo, ahi, label=label)
        for q in range(1, P + 1):
            plo = int(math.ceil(alo * q))
            phi_ = int(math.floor(ahi * q))
            if plo > phi_:
                continue
            p1 = np.arange(plo, phi_ + 1, dtype=np.float64)
            qg = q * gfun(p1 / q)
            dist = np.abs(qg - np.rint(qg))
            total += int(np.count_nonzero(dist < delta))
    main = delta * float(P) ** 2
    return _report(float(total), main, {"P": P, "delta": delta, "trim": trim})


# ---------------------------------------------------------------------------
# the four-variable window count I4(U)
# ---------------------------------------------------------------------------

def window_constants(support: SupportParams, k: int):
    """(c7, c5) of the window reduction.

    The y1-window from |log(y1^k - a2 y2^k) - log B| < 1/U has half-length at
    most (b1 P / k U) e^(1/U) <= c7 P/U with c7 = e b1 / k (any U >= 1);
    c5 = 8 c7 then keeps the window shorter than 1/4 for U >= c5 P.
    """
    c7 = math.e * support.b1 / k
    return c7, 8.0 * c7


def _i4_weight_tables(ctx: ExpSumContext):
    n1, w1 = integer_support(ctx.weights, 1, ctx.P)
    n2, w2 = integer_support(ctx.weights, 2, ctx.P)
    return n1, w1, n2, w2


def i4_count_detailed(ctx: ExpSumContext, U: float, method: str = "fast"):
    """(weighted value, exact tuple count) of the window count; see i4_count.

    The tuple count (number of selected (y1..y4) with positive weight) is an
    exact integer and agrees between methods exactly; the weighted value
    agrees up to float summation order (a few ulp), since the fast path
    factors the y1-sum out of each (y2, y3, y4) triple.
    """
    if U < 0.1:
        raise ValidationError(f"U must be >= 0.1, got {U}")
    if method not in ("fast", "naive"):
        raise ValidationError(f"unknown method {method!r}")
    U = float(U)
    k = ctx.params.k
    a2 = ctx.params.alpha2
    n1, w1, n2, w2 = _i4_weight_tables(ctx)
    p1 = n1.astype(np.float64) ** k
    p2 = n2.astype(np.float64) ** k
    inv_u = 1.0 / U

    if method == "naive":
        total = 0.0
        tuples = 0
        for i3 in range(n1.size):
            for i4 in range(n2.size):
                logb = math.log(p1[i3] - a2 * p2[i4])
                w34 = w1[i3] * w2[i4]
                for i1 in range(n1.size):
                    for i2 in range(n2.size):
                        if abs(math.log(p1[i1] - a2 * p2[i2]) - logb) < inv_u:
                            total += w34 * w1[i1] * w2[i2]
                            tuples += 1
        return U * total, tuples

    # fast path: prefix sums over a dense y1 weight/power table
    y1lo = int(n1[0])
    size = int(n1[-1]) - y1lo + 1
    wfull = np.zeros(size)
    wfull[n1 - y1lo] = w1
    pfull = np.zeros(size)
    pfull[n1 - y1lo] = p1
    cum = np.concatenate(([0.0], np.cumsum(wfull)))
    ccount = np.concatenate(([0], np.cumsum(wfull > 0.0).astype(np.int64)))
    lo_int, hi_int = int(n1[0]), int(n1[-1])

    el, eh = math.exp(-inv_u), math.exp(inv_u)
    total = 0.0
    tuples = 0
    n2s = n2.size
    for i2 in range(n2s):
        shift = a2 * p2[i2]
        w_y2 = w2[i2]
        for i3 in range(n1.size):
            w23 = w_y2 * w1[i3]
            for i4 in range(n2s):
                b = p1[i3] - a2 * p2[i4]
                logb = math.log(b)
                lo_f = (shift + b * el) ** (1.0 / k)
                hi_f = (shift + b * eh) ** (1.0 / k)
                fl = int(math.floor(lo_f))
                ce = int(math.ceil(hi_f))
                lo_mid, hi_mid = fl + 2, ce - 2
                acc = 0.0
                nsel = 0
                if lo_mid <= hi_mid:
                    ia = max(lo_mid, lo_int) - y1lo
                    ib = min(hi_mid, hi_int) - y1lo
                    if ia <= ib:
                        acc += float(cum[ib + 1] - cum[ia])
                        nsel += int(ccount[ib + 1] - ccount[ia])
                # direct tests on [fl-1, ce+1] minus the prefix-summed middle
                left_end = min(lo_mid, ce + 2)
                start2 = max(hi_mid + 1, left_end)
                for y1 in range(max(fl - 1, lo_int), min(left_end, hi_int + 1)):
                    i1 = y1 - y1lo
                    w = wfull[i1]
                    if w > 0.0 and abs(math.log(pfull[i1] - shift) - logb) < inv_u:
                        acc += w
                        nsel += 1
                for y1 in range(max(start2, lo_int), min(ce + 2, hi_int + 1)):
                    i1 = y1 - y1lo
                    w = wfull[i1]
                    if w > 0.0 and abs(math.log(pfull[i1] - shift) - logb) < inv_u:
                        acc += w
                        nsel += 1
                total += w23 * w2[i4] * acc
                tuples += nsel
    return U * total, tuples


def i4_count(ctx: ExpSumContext, U: float, method: str = "fast") -> float:
    """U * sum over (y1..y4) of w1(y1/P) w2(y2/P) w1(y3/P) w2(y4/P) restricted
    to |log(y1^k - a2 y2^k) - log(y3^k - a2 y4^k)| < 1/U.

    fast: for each (y2, y3, y4) the y1-constraint is the explicit interval
    y1^k in (a2 y2^k + B e^(-1/U), a2 y2^k + B e^(1/U)), so the bulk of the
    inner sum is a prefix-sum lookup; only integers within 2 of the float
    interval ends are re-tested with the same scalar indicator expression the
    naive loop uses.  The enumerated tuple set matches the naive scalar
    four-fold loop exactly (float rounding moves an interval end by well under
    one integer, and integers one step inside clear the log threshold by
    >= k/(b1 P), many orders above float noise); the returned float matches up
    to summation order.
    """
    value, _ = i4_count_detailed(ctx, U, method)
    return value


def near_integer_root_count(ctx: ExpSumContext, U: float,
                            window_const: float | None = None) -> float:
    """Weighted count of (y2, y3, y4) with the k-th root of
    y3^k + a2 y2^k - a2 y4^k within window_const * P/U of an integer
    (y3 over the full first support, weights w4(y2/y3) w4(y4/y3)).

    This is the near-surface reformulation that the window acceleration of
    i4_count relies on for U >= c5 P; window_const defaults to the derived c7.
    """
    if window_const is None:
        window_const, _ = window_constants(ctx.support, ctx.params.k)
    k = ctx.params.k
    a2 = ctx.params.alpha2
    P = ctx.P
    eps = window_const * P / float(U)
    sp = ctx.support
    y3s = np.arange(int(math.ceil(0.25 * sp.a1 * P)),
                    int(math.floor(sp.b1 * P)) + 1, dtype=np.int64)
    n2, _ = integer_support(ctx.weights, 2, P)
    p2 = n2.astype(np.float64) ** k
    total = 0.0
    for y3 in y3s:
        base = float(y3) ** k
        w2a = bump_eval(ctx.weights, 4, n2 / float(y3))
        keep = w2a > 0
        if not np.any(keep):
            continue
        pk = p2[keep]
        wk = w2a[keep]
        vals = base + a2 * pk[:, None] - a2 * pk[None, :]
        root = np.maximum(vals, 1e-300) ** (1.0 / k)
        dist = np.abs(root - np.rint(root))
        hits = (dist < eps) & (vals > 0)
        if np.any(hits):
            total += float(np.sum((wk[:, None] * wk[None, :])[hits]))
    return total


# ---------------------------------------------------------------------------
# the level-set count R(U)
# ---------------------------------------------------------------------------

def r_count(P: int, k: int, U, method: str = "pairs") -> int:
    """Number of quadruples x1..x4 in [P, 2P) with |(x4 x1)^k - (x2 x3)^k| <= U.

    pairs: multiplicities of products z = x*y, then a two-pointer window over
    sorted z with float k-th powers for the search and exact integer
    comparisons at the window boundaries (so the count is exact).
    brute: the literal quadruple loop over exact integers.
    """
    P = int(P)
    if method == "brute":
        if P > BRUTE_R_LIMIT:
            raise BudgetError(f"brute mode capped at P={BRUTE_R_LIMIT}",
                              required=P, budget=BRUTE_R_LIMIT)
        lo, hi = P, 2 * P
        pw = [0] * (hi * hi)
        for z in range(lo * lo, (hi - 1) * (hi - 1) + 1):
            pw[z] = z ** k
        count = 0
        rng = range(lo, hi)
        for x1 in rng:
            for x4 in rng:
                a = pw[x4 * x1]
                for x2 in rng:
                    for x3 in rng:
                        if abs(a - pw[x2 * x3]) <= U:
                            count += 1
        return count
    if method != "pairs":
        raise ValidationError(f"unknown method {method!r}")
    if P > PAIR_R_LIMIT:
        raise BudgetError(f"pair mode capped at P={PAIR_R_LIMIT}",
                          required=P, budget=PAIR_R_LIMIT)
    x = np.arange(P, 2 * P, dtype=np.int64)
    z, m = np.unique(x[:, None] * x[None, :], return_counts=True)
    zf = z.astype(np.float64) ** k
    prefix = np.concatenate(([0], np.cumsum(m)))
    zi = [int(v) for v in z]

    def exact_in(i: int, j: int) -> bool:
        return abs(zi[j] ** k - zi[i] ** k) <= U

    count = 0
    n = z.size
    for i in range(n):
        jlo = int(np.searchsorted(zf, zf[i] - float(U), side="left"))
        jhi = int(np.searchsorted(zf, zf[i] + float(U), side="right")) - 1
        while jlo > 0 and exact_in(i, jlo - 1):
            jlo -= 1
        while jlo <= jhi and not exact_in(i, jlo):
            jlo += 1
        while jhi < n - 1 and exact_in(i, jhi + 1):
            jhi += 1
        while jhi >= jlo and not exact_in(i, jhi):
            jhi -= 1
        if jlo <= jhi:
            count += int(m[i]) * int(prefix[jhi + 1] - prefix[jlo])
    return count
