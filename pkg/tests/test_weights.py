import math

import numpy as np
import pytest

from terndio import errors, weights as wt
from terndio import rng

import _frozen


def default_family():
    return wt.make_bumps(wt.solve_support(0.75))


def test_solve_support_grid_slack():
    for k in (3, 4, 5):
        for j in range(1, 41):
            a2 = 0.1 * j
            check = wt.verify_support(wt.solve_support(a2), a2, k)
            assert check.ok
            assert check.min_slack >= 0.05


def test_solve_support_specific_inequalities():
    sup = wt.solve_support(0.5)
    assert (0.25 * sup.a1) ** 3 - 0.5 * sup.b2 ** 3 > 0
    sup = wt.solve_support(4.0)
    assert 4.0 * sup.b2 ** 3 + sup.b3 ** 3 < sup.b1 ** 3


def test_verify_support_boundary_and_ordering():
    sup = wt.solve_support(1.0)
    # inflate b2 to the exact boundary of the first inequality
    b2_star = 0.25 * sup.a1  # alpha2 = 1, any k: (a1/4)^k == b2^k
    bad = wt.SupportParams(a1=sup.a1, b1=sup.b1, a2=sup.a2, b2=b2_star,
                           a3=sup.a3, b3=sup.b3)
    check = wt.verify_support(bad, 1.0, 3)
    assert not check.ok
    assert check.slacks[0] == 0.0

    flipped = wt.SupportParams(a1=2.0, b1=1.0, a2=sup.a2, b2=sup.b2,
                               a3=sup.a3, b3=sup.b3)
    check = wt.verify_support(flipped, 1.0, 3)
    assert not check.ok
    assert not check.ordering_ok
    assert any("a1" in v for v in check.ordering_violations)


def test_bump_plateau_support_exact():
    fam = default_family()
    for i in range(5):
        x0, x1, x2, x3 = fam.knots[i]
        for x in np.linspace(x1, x2, 9):
            assert wt.bump_eval(fam, i, float(x)) == 1.0
        assert wt.bump_eval(fam, i, x0 - 0.05) == 0.0
        assert wt.bump_eval(fam, i, x3 + 0.05) == 0.0
        mid = 0.5 * (x0 + x1)
        assert 0.0 < wt.bump_eval(fam, i, mid) < 1.0


def test_bump_symmetric_weight():
    fam = default_family()
    for t in np.linspace(0.0, 2.2, 23):
        assert wt.bump_eval(fam, 0, t) == wt.bump_eval(fam, 0, -t)


def test_bump_range():
    fam = default_family()
    xs = np.linspace(-3.0, 3.0, 400)
    for i in range(5):
        vals = wt.bump_eval(fam, i, xs)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


def test_transform_at_zero():
    fam = default_family()
    v0 = wt.fourier_transform(fam, 0, 0.0)
    assert v0.imag == 0.0
    assert 2.0 < v0.real < 4.0  # plateau [-1,1], support within [-2,2]
    for i in range(5):
        assert wt.fourier_transform(fam, i, 0.0).imag == 0.0


def test_transform_conjugate_symmetry():
    fam = default_family()
    for xi in (0.3, 2.0, 17.5, 301.0):
        a = wt.fourier_transform(fam, 2, xi)
        b = wt.fourier_transform(fam, 2, -xi)
        assert abs(a - b.conjugate()) < 1e-12


def test_transform_matches_direct_quadrature():
    # dense trapezoid over the support as an independent check
    fam = default_family()
    x0, _, _, x3 = fam.knots[2]
    xs = np.linspace(x0, x3, 200001)
    w = wt.bump_eval(fam, 2, xs)
    for xi in (0.0, 1.7, 24.0, 111.0):
        direct = np.trapezoid(w * np.exp(-1j * xi * xs), xs)
        assert abs(direct - wt.fourier_transform(fam, 2, xi)) < 1e-8


def test_transform_decay_envelope():
    fam = default_family()
    xi = np.geomspace(1.3, 1.3e4, 200)
    vals = np.array([abs(wt.fourier_transform(fam, 2, x)) for x in xi])
    assert np.all(vals * (1.0 + xi) ** 10 <= _frozen.C10_DECAY)


def test_inversion_recovers_bump():
    fam = default_family()
    xi = np.arange(-120.0, 120.0 + 0.01, 0.02)
    vals = np.array([wt.fourier_transform(fam, 0, x) for x in xi])
    for xpt in np.linspace(-2.3, 2.3, 47):
        inv = np.trapezoid(vals * np.exp(1j * xi * xpt), xi).real / (2.0 * math.pi)
        assert abs(inv - wt.bump_eval(fam, 0, float(xpt))) <= 1e-6


def test_kernel_difference_examples():
    fam = default_family()
    P, T = 64.0, 5000.0
    v, env = wt.kernel_difference(fam, P, T, 0.0)
    assert v == 0.0 and env == 0.0
    c3 = wt.c3_constant(fam)
    v, env = wt.kernel_difference(fam, P, T, T)
    assert v <= c3
    v, env = wt.kernel_difference(fam, P, T, 10.0 * T)
    assert v <= c3 * 1e-10


def test_kernel_difference_requires_T_above_sqrtP():
    fam = default_family()
    with pytest.raises(errors.ValidationError):
        wt.kernel_difference(fam, 64.0, 2.0, 10.0)


def test_kernel_difference_envelope_sampled():
    fam = default_family()
    for i in range(200):
        P = rng.uniform(31, i, 9.0, 400.0)
        logT = rng.uniform(37, i, 0.0, math.log(P ** 5 / math.sqrt(P)))
        T = math.sqrt(P) * math.exp(logT)
        t = rng.uniform(41, i, 0.0, 1.0) * 1e3 * T
        value, envelope = wt.kernel_difference(fam, P, T, t)
        assert value <= envelope


def test_c3_constant_drift():
    # committed fixture guards against silent recalibration drift
    c3 = wt.c3_constant(default_family())
    assert abs(c3 - _frozen.C3_DEFAULT_FAMILY) <= 1e-6 * _frozen.C3_DEFAULT_FAMILY


def test_integer_support_positive_weights():
    fam = default_family()
    for i in (1, 2, 3, 4):
        n, w = wt.integer_support(fam, i, 64.0)
        assert np.all(w > 0.0)
        assert np.all(np.diff(n) >= 1)
