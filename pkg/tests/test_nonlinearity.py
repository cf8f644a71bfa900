"""Covariance models, regularization, conjugates, and the extended H."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from conehj import (ConePoint, ConjugateModel, CovarianceModel,
                    InvalidInputError, Partition, UnsupportedOperationError,
                    bold_xi, h_eval, h_eval_bruteforce, regularize, xi_star,
                    xi_star_vec)


# ---------------------------------------------------------------------------
# models

def test_sk_model_values():
    m = CovarianceModel.sk(0.5)
    assert m(0.0) == 0.0
    assert m(2.0) == pytest.approx(2.0)
    assert m.deriv(1.0) == pytest.approx(1.0)


def test_matrix_model_uses_eigenvalues():
    m = CovarianceModel(D=2, poly={2: 1.0})
    a = np.diag([1.0, 3.0])
    assert m(a) == pytest.approx(1.0 + 9.0)


def test_model_rejects_bad_poly():
    with pytest.raises(InvalidInputError):
        CovarianceModel(D=1, poly={1: 1.0})
    with pytest.raises(InvalidInputError):
        CovarianceModel(D=1, poly={2: -1.0})


def test_model_json_round_trip():
    m = CovarianceModel(D=1, poly={2: 0.5, 4: 0.25})
    rt = CovarianceModel.from_json(m.to_json())
    assert rt == m


# ---------------------------------------------------------------------------
# regularization

def test_regularization_closed_form_sk():
    reg = regularize(CovarianceModel.sk(1.0))
    assert reg.L == pytest.approx(4.0)
    for a in np.linspace(-1, 4, 101):
        expected = max(a ** 2, 8.0 * (a - 1.0)) if a <= 2 else 8.0 * (a - 1.0)
        assert reg(a) == pytest.approx(expected, abs=0)


def test_regularization_coincides_near_origin():
    reg = regularize(CovarianceModel.sk(1.0))
    xs = np.linspace(0.0, 1.0, 50)
    np.testing.assert_array_equal(reg.eval_vec(xs), xs ** 2)


@settings(max_examples=80, deadline=None)
@given(st.floats(-3, 5), st.floats(-3, 5))
def test_regularization_lipschitz_and_convex(a, b):
    reg = regularize(CovarianceModel.sk(1.0))
    assert abs(reg(a) - reg(b)) <= reg.slope_cap * abs(a - b) + 1e-12
    mid = reg(0.5 * (a + b))
    assert mid <= 0.5 * (reg(a) + reg(b)) + 1e-12


def test_regularization_matrix_branch():
    reg = regularize(CovarianceModel(D=2, poly={2: 1.0}))
    # on the trace ball the max of xi and the affine branch
    a = 0.25 * np.eye(2)
    assert reg(a) == pytest.approx(max(2 * 0.25 ** 2,
                                       reg.slope_cap * (0.5 - 2.0)))


# ---------------------------------------------------------------------------
# monotone conjugate

def _conj_oracle(model, reg, r):
    """Independent 1-d maximization of rs - xibar(s) over s >= 0."""
    res = minimize_scalar(lambda s: -(r * s - reg(s)),
                          bounds=(0.0, 50.0), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


def test_conjugate_pure_quadratic_closed_form():
    model = CovarianceModel.sk(1.0)
    conj = ConjugateModel(model)
    for r in (0.0, 0.5, 1.0, 3.0):
        assert xi_star(conj, r) == pytest.approx(r ** 2 / 4.0, abs=1e-12)
    # flat at -xi(0) = 0 for nonpositive slopes
    assert xi_star(conj, -2.0) == 0.0


def test_conjugate_of_regularized_matches_oracle():
    model = CovarianceModel.sk(1.0)
    reg = regularize(model)
    conj = ConjugateModel(reg)
    for r in np.linspace(0.0, 7.9, 40):
        assert xi_star(conj, r) == pytest.approx(
            _conj_oracle(model, reg, r), abs=1e-7)
    # +inf past the slope cap
    assert xi_star(conj, 8.0 + 1e-9) == np.inf


def test_conjugate_mixed_quartic_matches_oracle():
    model = CovarianceModel(D=1, poly={2: 0.5, 4: 0.25})
    reg = regularize(model)
    conj = ConjugateModel(reg)
    for r in np.linspace(0.0, reg.slope_cap - 1e-6, 25):
        assert xi_star(conj, r) == pytest.approx(
            _conj_oracle(model, reg, r), abs=1e-7)


def test_conjugate_seam_slope_sk():
    # the regularized sk nonlinearity switches to the affine branch at
    # s0 = 4 - 2 sqrt(2); the conjugate kinks at xi'(s0)
    reg = regularize(CovarianceModel.sk(1.0))
    conj = ConjugateModel(reg)
    s0 = 4.0 - 2.0 * np.sqrt(2.0)
    assert conj._s0 == pytest.approx(s0, abs=1e-12)
    assert conj._r0 == pytest.approx(2.0 * s0, abs=1e-12)


def test_conjugate_vectorized_matches_scalar():
    conj = ConjugateModel(regularize(CovarianceModel.sk(1.0)))
    rs = np.linspace(-1.0, 7.5, 30)
    vec = xi_star_vec(conj, rs)
    for r, v in zip(rs, vec):
        assert v == pytest.approx(xi_star(conj, float(r)), abs=1e-12)


def test_fenchel_young_inequality():
    reg = regularize(CovarianceModel.sk(1.0))
    conj = ConjugateModel(reg)
    rng = np.random.default_rng(0)
    for _ in range(200):
        r = rng.uniform(-1, 7.9)
        s = rng.uniform(0, 3)
        assert r * s <= reg(s) + xi_star(conj, r) + 1e-9


# ---------------------------------------------------------------------------
# bold xi and H

def test_bold_xi_is_weighted_sum():
    j = Partition(np.array([0.25, 1.0]))
    x = ConePoint(j, [1.0, 2.0])
    m = CovarianceModel.sk(1.0)
    assert bold_xi(x, m) == pytest.approx(0.25 * 1.0 + 0.75 * 4.0)


def test_h_on_cone_equals_bold_xi():
    reg = regularize(CovarianceModel.sk(1.0))
    j = Partition.uniform(3)
    x = ConePoint(j, [0.2, 0.5, 1.1])
    assert h_eval(x, reg) == pytest.approx(bold_xi(x, reg))


def test_h_off_cone_agrees_with_bruteforce():
    reg = regularize(CovarianceModel.sk(1.0))
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        kappa = ConePoint(Partition.uniform(n), rng.normal(0, 1.5, n))
        assert h_eval(kappa, reg) == pytest.approx(
            h_eval_bruteforce(kappa, reg), abs=1e-4)


def test_h_monotone_along_dual_directions():
    reg = regularize(CovarianceModel.sk(1.0))
    rng = np.random.default_rng(2)
    j = Partition.uniform(3)
    for _ in range(30):
        kappa = ConePoint(j, rng.normal(0, 1.5, 3))
        tails = np.concatenate((rng.uniform(0, 1, 3), [0.0]))
        d = ConePoint(j, (tails[:-1] - tails[1:]) / j.widths)
        assert h_eval(kappa + d, reg) >= h_eval(kappa, reg) - 1e-6


def test_h_matrix_dimension_unsupported_off_cone():
    reg = regularize(CovarianceModel(D=2, poly={2: 1.0}))
    j = Partition.uniform(1)
    off = ConePoint(j, -np.eye(2)[None])
    with pytest.raises(UnsupportedOperationError):
        h_eval(off, reg)


def test_bruteforce_requires_small_problems():
    reg = regularize(CovarianceModel.sk(1.0))
    kappa = ConePoint(Partition.uniform(4), [0.1, 0.2, 0.3, 0.4])
    with pytest.raises(UnsupportedOperationError):
        h_eval_bruteforce(kappa, reg)
