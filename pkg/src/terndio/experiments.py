"""Experiment orchestration: coefficient sweeps, exceptional-set fractions,
and the explicit measure-bound assembly.

Sampling is counter-based (rng.uniform01(seed, counter)), so a sweep cell
depends only on (seed, sample index) and results replicate byte-for-byte
across runs and worker counts.  "Almost all" statements are operationalized
as empirical failure fractions at the largest scale, reported with a Wilson
interval and never asserted to converge.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ValidationError
from .expsums import ExpSumContext, f1, f2, f2_many, integral_i3
from .forms import (BoxRegion, FormParams, min_search_brute, min_search_fast,
                    reduction_constants)
from .serialize import fmt17
from .weights import (SupportParams, c3_constant, integer_support,
                      solve_support, uniform_support)

NOMINAL_EVALS_PER_SECOND = 1.0e9  # deterministic cost unit for the CSV column


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_THETA_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*\*\s*P\s*\^\s*([0-9.eE+-]+)\s*$")


@dataclass(frozen=True)
class ThetaRule:
    """A threshold rule theta(P) = c * P^e, written as 'c*P^e'."""

    c: float
    e: float

    @classmethod
    def parse(cls, text: str) -> "ThetaRule":
        m = _THETA_RE.match(text)
        if not m:
            raise ValidationError(f"theta rule must look like 'c*P^e', got {text!r}")
        return cls(c=float(m.group(1)), e=float(m.group(2)))

    def theta(self, P: float) -> float:
        return self.c * float(P) ** self.e

    @property
    def text(self) -> str:
        return f"{fmt17(self.c)}*P^{fmt17(self.e)}"


@dataclass(frozen=True)
class SweepConfig:
    k: int
    alpha2: float
    samples: int
    seed: int
    P_list: tuple
    theta_rules: tuple = ()
    method: str = "fast"
    sample_alpha2: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("need at least one sample")
        ps = list(self.P_list)
        if ps != sorted(set(ps)):
            raise ValidationError("P list must be strictly increasing")
        for p in ps:
            if p < 8 or (p & (p - 1)) != 0:
                raise ValidationError(f"P values must be dyadic (powers of two >= 8), got {p}")
        if self.method not in ("fast", "brute"):
            raise ValidationError(f"unknown search method {self.method!r}")

    def alpha3_of(self, i: int) -> float:
        return 0.5 + 0.5 * rng.uniform01(self.seed, 2 * i)

    def alpha2_of(self, i: int) -> float:
        if self.sample_alpha2:
            return 0.5 + 0.5 * rng.uniform01(self.seed, 2 * i + 1)
        return self.alpha2

    def support(self) -> SupportParams:
        return uniform_support() if self.sample_alpha2 else solve_support(self.alpha2)


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list              # dicts: alpha2, alpha3, P, min_abs, witness, evaluations
    medians: dict           # P -> median min_abs
    quartiles: dict         # P -> (q25, q75)
    slope: float            # log median vs log P least squares
    slope_ci: tuple         # bootstrap 95% interval
    normalized_medians: dict  # exponent value -> {P: median / P^e}
    failure_fractions: dict  # rule text -> {P: fraction of samples with min >= theta}

    def benchmark_exponents(self):
        k = self.config.k
        return (k - 3.0, k - 12.0 / 5.0, k - 2.0)


# ---------------------------------------------------------------------------
# sweep execution
# ---------------------------------------------------------------------------

def _run_cell(args):
    k, alpha2, alpha3, P, method, support_tuple = args
    support = SupportParams(*support_tuple)
    params = FormParams(k=k, alpha2=alpha2, alpha3=alpha3)
    box = BoxRegion.from_support(support, P)
    search = min_search_fast if method == "fast" else min_search_brute
    rep = search(params, box)
    return {"alpha2": alpha2, "alpha3": alpha3, "P": P, "min_abs": rep.min_abs,
            "witness": rep.witness, "evaluations": rep.evaluations}


def _bootstrap_slope(per_sample: np.ndarray, logP: np.ndarray, seed: int,
                     resamples: int = 1000):
    """per_sample: (samples, nP) min_abs table.  Returns (slope, lo95, hi95)."""
    nsamp = per_sample.shape[0]

    def slope_of(idx):
        med = np.median(per_sample[idx], axis=0)
        y = np.log(np.maximum(med, 1e-300))
        return float(np.polyfit(logP, y, 1)[0])

    point = slope_of(np.arange(nsamp))
    boots = np.empty(resamples)
    ctr = 0
    for b in range(resamples):
        idx = np.array([rng.randint(seed, ctr + j, nsamp) for j in range(nsamp)])
        ctr += nsamp
        boots[b] = slope_of(idx)
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return point, (float(lo), float(hi))


def run_alpha3_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Minimum-value search for every (sample, P) cell, with quantiles, the
    fitted log-log slope (bootstrap CI), benchmark normalizations and
    per-theta-rule failure fractions."""
    support = config.support()
    st = (support.a1, support.b1, support.a2, support.b2, support.a3, support.b3)
    cells = []
    for i in range(config.samples):
        a2 = config.alpha2_of(i)
        a3 = config.alpha3_of(i)
        for P in config.P_list:
            cells.append((config.k, a2, a3, P, config.method, st))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_cell, cells, chunksize=8))
    else:
        rows = [_run_cell(c) for c in cells]

    nP = len(config.P_list)
    table = np.array([r["min_abs"] for r in rows]).reshape(config.samples, nP)
    medians = {}
    quartiles = {}
    for j, P in enumerate(config.P_list):
        col = table[:, j]
        medians[P] = float(np.median(col))
        quartiles[P] = (float(np.percentile(col, 25)), float(np.percentile(col, 75)))
    logP = np.log(np.array(config.P_list, dtype=float))
    if nP >= 2:
        slope, ci = _bootstrap_slope(table, logP, config.seed + 777)
    else:
        slope, ci = math.nan, (math.nan, math.nan)

    normalized = {}
    k = config.k
    for e in (k - 3.0, k - 12.0 / 5.0, k - 2.0):
        normalized[e] = {P: medians[P] / float(P) ** e for P in config.P_list}

    failures = {}
    for rule in config.theta_rules:
        failures[rule.text] = {
            P: float(np.mean(table[:, j] >= rule.theta(P)))
            for j, P in enumerate(config.P_list)}

    return SweepResult(config=config, rows=rows, medians=medians,
                       quartiles=quartiles, slope=slope, slope_ci=ci,
                       normalized_medians=normalized, failure_fractions=failures)


def run_double_average(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Joint (alpha2, alpha3) sampling with alpha2-independent weights."""
    if not config.sample_alpha2:
        config = SweepConfig(k=config.k, alpha2=config.alpha2,
                             samples=config.samples, seed=config.seed,
                             P_list=config.P_list, theta_rules=config.theta_rules,
                             method=config.method, sample_alpha2=True)
    return run_alpha3_sweep(config, workers=workers)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial fraction."""
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class FractionReport:
    rule: str
    fractions: dict        # P -> empirical failure fraction
    prop_bound: dict       # P -> unconditional exceptional-measure bound shape
    wilson: tuple          # 95% interval at the largest P
    samples: int


def exceptional_fraction(config: SweepConfig, theta_rule: ThetaRule,
                         workers: int = 1) -> FractionReport:
    """Fraction of sampled alpha3 with no |form| < theta(P) solution in the
    box, per P, next to the unconditional exceptional-measure shape
    P^{(5/6)k-2} theta^{-5/6} + P^{(10/9)k-8/3} theta^{-10/9} (eps = 0) for
    visual comparison."""
    cfg = SweepConfig(k=config.k, alpha2=config.alpha2, samples=config.samples,
                      seed=config.seed, P_list=config.P_list,
                      theta_rules=(theta_rule,), method=config.method,
                      sample_alpha2=config.sample_alpha2)
    res = run_alpha3_sweep(cfg, workers=workers)
    fr = res.failure_fractions[theta_rule.text]
    k = cfg.k
    bound = {}
    for P in cfg.P_list:
        th = theta_rule.theta(P)
        bound[P] = (float(P) ** ((5.0 / 6.0) * k - 2.0) * th ** (-5.0 / 6.0)
                    + float(P) ** ((10.0 / 9.0) * k - 8.0 / 3.0) * th ** (-10.0 / 9.0))
    largest = cfg.P_list[-1]
    succ = int(round(fr[largest] * cfg.samples))
    return FractionReport(rule=theta_rule.text, fractions=fr, prop_bound=bound,
                          wilson=wilson_interval(succ, cfg.samples),
                          samples=cfg.samples)


# ---------------------------------------------------------------------------
# deterministic output files
# ---------------------------------------------------------------------------

def write_sweep_csv(result: SweepResult, path) -> None:
    """Sweep rows as CSV.  The `seconds` column is the deterministic nominal
    cost evaluations / 1e9 (wall time lives in the run manifest; the CSV must
    replicate byte-for-byte across runs and worker counts)."""
    lines = ["alpha2,alpha3,P,min_abs,witness1,witness2,witness3,seconds"]
    for r in result.rows:
        w = r["witness"]
        lines.append(",".join((
            fmt17(r["alpha2"]), fmt17(r["alpha3"]), str(int(r["P"])),
            fmt17(r["min_abs"]), str(w[0]), str(w[1]), str(w[2]),
            fmt17(r["evaluations"] / NOMINAL_EVALS_PER_SECOND))))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_plot_data(result: SweepResult, directory) -> list:
    """Two-column (log P, log median) files: raw medians plus the three
    benchmark normalizations.  Returns the written paths."""
    import os

    os.makedirs(directory, exist_ok=True)
    written = []

    def emit(name, values):
        path = os.path.join(directory, name)
        lines = [f"{fmt17(math.log(P))} {fmt17(math.log(max(v, 1e-300)))}"
                 for P, v in values]
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(path)

    emit("median_raw.dat", sorted(result.medians.items()))
    for e in result.benchmark_exponents():
        tag = fmt17(e).replace("-", "m").replace(".", "p")
        emit(f"median_norm_exp_{tag}.dat",
             sorted(result.normalized_medians[e].items()))
    return written


# ---------------------------------------------------------------------------
# the lower-bound calibration and the measure-bound assembly
# ---------------------------------------------------------------------------

def s3_window_count(ctx: ExpSumContext, alpha3: float) -> float:
    """Weighted count of support triples with
    |log(x1^k - alpha2 x2^k) - log(alpha3 x3^k)| < P^{-1/2}."""
    k = ctx.params.k
    a2 = ctx.params.alpha2
    P = ctx.P
    n1, w1 = integer_support(ctx.weights, 1, P)
    n2, w2 = integer_support(ctx.weights, 2, P)
    n3, w3 = integer_support(ctx.weights, 3, P)
    p1 = n1.astype(np.float64) ** k
    p3 = alpha3 * n3.astype(np.float64) ** k
    eps = P ** -0.5
    total = 0.0
    for x2, wx2 in zip(n2, w2):
        gap = np.abs(np.log(p1[:, None] - a2 * float(x2) ** k)
                     - np.log(p3[None, :]))
        total += wx2 * float(np.sum(w1[:, None] * w3[None, :] * (gap < eps)))
    return total


def lemma1_calibrate(ctx: ExpSumContext, grid: int = 17) -> float:
    """Frozen lower-bound constant c2 with
    (sqrt(P)/T) * s3_window_count >= c2 P^{3-k} theta for T = 2 P^k/(c0 theta).

    theta cancels: the normalized quantity equals (c0/2) P^{-5/2} * count, so
    the calibration is theta-free.  Returns 0.8x the minimum over an alpha3
    grid in [1/2, 1].
    """
    c0, _ = reduction_constants(ctx.support, ctx.params.k)
    vals = []
    for a3 in np.linspace(0.5, 1.0, grid):
        cnt = s3_window_count(ctx, float(a3))
        vals.append(0.5 * c0 * ctx.P ** -2.5 * cnt)
    low = min(vals)
    if low <= 0.0:
        raise ValidationError(
            "window count vanished on the calibration grid; P too small")
    return 0.8 * low


def assemble_measure_bound(ctx: ExpSumContext, P: float, theta: float,
                           c2: float | None = None) -> float:
    """Explicit right-hand side of the exceptional-measure estimate at (P, theta).

    With T = 2 P^k / (c0 theta), the Chebyshev/Parseval chain gives

        meas <= small + K^2 P^-6 * sup_{|t| >= P^(1/10)} [min(1, T/|t|) |F2(k t)|]^2 * I3(T),

    K = c0 c3 / (2 c2), where `small` is the |t| <= P^(1/10) contribution
    bounded through min(...) <= t^4/P^2 and |F1| <= F1(0), |F2| <= F2(0)
    (it evaluates to the c4 P^(-3/2) shape).  The sup is a log-grid estimate
    inflated by 1.25 and capped by F2(0)/10 for t >= 10T.
    """
    if float(P) != ctx.P:
        raise ValidationError(f"context built at P={ctx.P}, got P={P}")
    k = ctx.params.k
    if not theta > float(P) ** (k - 3):
        raise ValidationError(f"need theta > P^(k-3) = {float(P) ** (k - 3)}")
    c0, _ = reduction_constants(ctx.support, k)
    T = 2.0 * float(P) ** k / (c0 * theta)
    if c2 is None:
        c2 = lemma1_calibrate(ctx)
    c3 = c3_constant(ctx.weights)
    K = c0 * c3 / (2.0 * c2)

    a1 = abs(f1(ctx, 0.0))
    a2 = abs(f2(ctx, 0.0))
    small = (2.0 / 5.0) * K * K * float(P) ** -6.0 * (a1 * a2) ** 2 \
        * float(P) ** -2.0 * float(P) ** 0.5

    tgrid = np.geomspace(float(P) ** 0.1, 10.0 * T, 200)
    damped = np.minimum(1.0, T / tgrid) * np.abs(f2_many(ctx, k * tgrid))
    sup = max(1.25 * float(damped.max()), a2 / 10.0)
    i3 = integral_i3(ctx, T)
    return small + K * K * float(P) ** -6.0 * sup * sup * i3
