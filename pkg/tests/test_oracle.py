import mpmath
import numpy as np
import pytest

from nonlocal_eigs import (
    ConfigurationError,
    Control,
    ControlFamily,
    KernelClass,
    build_quadrature,
    c_constant,
    eval_operator,
    interval_grid,
)
from nonlocal_eigs.oracle import assemble_dense, dense_principal_eigen, quadrature_oracle, run_gates


@pytest.fixture
def small_problem():
    k = KernelClass(1.0, 2.0, 0.75, 0.5)
    g = interval_grid(-1, 1, 40)
    return k, g, build_quadrature(g, k)


@pytest.mark.parametrize("ctrl", [Control(1.0), Control(1.7, 0.5), Control(2.0, -0.25)])
def test_columns_match_operator(small_problem, ctrl):
    k, g, q = small_problem
    A = assemble_dense(ctrl, g, q, k).matrix
    fam = ControlFamily.linear(ctrl.kappa, ctrl.drift)
    for i in (0, 7, g.size - 1):
        e = np.zeros(g.size)
        e[i] = 1.0
        np.testing.assert_allclose(A[:, i], eval_operator(e, fam, q, k).values,
                                   rtol=1e-12, atol=1e-12 * np.abs(A).max())


def test_symmetric_without_drift(small_problem):
    k, g, q = small_problem
    A = assemble_dense(Control(1.4), g, q, k).matrix
    np.testing.assert_allclose(A, A.T, rtol=0, atol=1e-12 * np.abs(A).max())


def test_row_sums(small_problem):
    k, g, q = small_problem
    kap = 1.4
    A = assemble_dense(Control(kap), g, q, k).matrix
    n = g.size
    w = q.weights
    for i in (0, n // 2, n - 1):
        inside = sum(w[abs(m - i) - 1] for m in range(n) if m != i)
        expected = kap * inside - 2 * kap * (w.sum() + q.tail_mass)
        assert A[i].sum() == pytest.approx(expected, rel=1e-12)


def test_three_node_toy():
    # h = 1/2, s = 1/2: pair weights w_j = 2 (2/(2j - 1) - 2/(2j + 1)) / h-scaling,
    # i.e. w1 = 16/3, w2 = 16/15, J = 4, sum(w) = 64/9, tail = 8/9, diagonal = -16
    k = KernelClass.fractional(0.5)
    g = interval_grid(-1, 1, 4)
    q = build_quadrature(g, k)
    A = assemble_dense(Control(1.0), g, q, k).matrix
    expected = -np.array([[16, -16 / 3, -16 / 15], [-16 / 3, 16, -16 / 3], [-16 / 15, -16 / 3, 16]])
    np.testing.assert_allclose(A, expected, rtol=1e-13)
    # symmetric eigenvector (a, b, a) reduces -A to [[224/15, -16/3], [-32/3, 16]]
    tr, det = 224 / 15 + 16, 224 / 15 * 16 - 16 / 3 * 32 / 3
    mu = 0.5 * (tr - np.sqrt(tr**2 - 4 * det))
    lam, vec = dense_principal_eigen(A)
    assert lam == pytest.approx(mu, rel=1e-12)
    assert np.all(vec > 0) and vec[0] == pytest.approx(vec[2])


def test_dense_eigen_refinement_is_cauchy():
    k = KernelClass.fractional(0.5)
    lams = []
    for n in (64, 128, 256):
        g = interval_grid(-1, 1, n)
        lams.append(dense_principal_eigen(assemble_dense(Control(1.0), g, build_quadrature(g, k), k))[0])
    d1, d2 = abs(lams[0] - lams[1]), abs(lams[1] - lams[2])
    assert d2 < d1


def test_oracle_grid_size_limit():
    k = KernelClass.fractional(0.5)
    g = interval_grid(-1, 1, 2048)
    with pytest.raises(ConfigurationError):
        assemble_dense(Control(1.0), g, build_quadrature(g, k), k)


@pytest.mark.parametrize("s", [0.55, 0.75])
def test_quadrature_oracle_vanishes_at_s(s):
    assert abs(quadrature_oracle(s, KernelClass.fractional(s), "plus")) < 1e-8


@pytest.mark.parametrize("beta", [0.1, 0.662, 1.0, 1.49])
@pytest.mark.parametrize("sign", ["plus", "minus"])
def test_quadrature_oracle_agrees(beta, sign):
    k = KernelClass(1.0, 2.0, 0.75)
    assert quadrature_oracle(beta, k, sign) == pytest.approx(c_constant(beta, k, sign), abs=1e-8)


def test_profile_halves_are_equal():
    beta, s = 0.8, 0.75
    with mpmath.workdps(20):
        def f(t):
            p = mpmath.power(mpmath.fabs(1 + t), beta) * (t > -1) + mpmath.power(
                mpmath.fabs(1 - t), beta) * (t < 1) - 2
            return p / mpmath.fabs(t) ** (1 + 2 * s)

        left = mpmath.quad(f, [-10, -1, -0.25])
        right = mpmath.quad(f, [0.25, 1, 10])
    assert float(left) == pytest.approx(float(right), rel=1e-15)


def test_oracle_input_checks():
    k = KernelClass.fractional(0.5)
    with pytest.raises(ConfigurationError):
        quadrature_oracle(1.0, k, "plus")
    with pytest.raises(ConfigurationError):
        quadrature_oracle(0.5, k, "sideways")


def test_all_gates_pass():
    gates = run_gates(raise_on_failure=True)
    assert len(gates) == 3 and all(g.passed for g in gates)
