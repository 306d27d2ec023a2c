"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into an "acceptance criteria" section of the
terminal summary (see ``conftest.py``).
"""

import numpy as np
import pytest

from nonlocal_eigs import (
    EXTREMAL_MINUS,
    EXTREMAL_PLUS,
    Control,
    ControlFamily,
    EigenConfig,
    KernelClass,
    SolveConfig,
    abp_ratio,
    barrier_sign_check,
    build_quadrature,
    c_constant,
    check_comparison,
    decay_rate_fit,
    decay_ratio_series,
    domain_monotonicity,
    eval_operator,
    find_beta_root,
    h_condition_check,
    interval_grid,
    inverse_power,
    max_principle_threshold,
    random_smooth_source,
    solve,
    verify_simplicity,
)
from nonlocal_eigs.grid import GridFunction
from nonlocal_eigs.oracle import assemble_dense, dense_principal_eigen, quadrature_oracle

PUCCI = KernelClass(1.0, 2.0, 0.75, 0.5)
PUCCI_HALF = KernelClass(1.0, 2.0, 0.5)
LINEAR = KernelClass.fractional(0.5)

ISAACS = ControlFamily(
    (
        (Control(1.0, 0.5), Control(2.0, -0.3)),
        (Control(1.5, 0.2), Control(1.2, -0.5)),
    )
)
ONE_SIDED = [
    EXTREMAL_PLUS,
    EXTREMAL_MINUS,
    ControlFamily.linear(1.5, 0.3),
    ControlFamily.sup_of([Control(1.0, 0.5), Control(2.0, -0.4), Control(1.4, 0.0)]),
    ControlFamily.inf_of([Control(1.2, -0.5), Control(1.8, 0.25)]),
]


def _grid_fn(grid, values):
    return GridFunction(grid, np.asarray(values, dtype=float))


def test_01_beta_root_sandwich(acceptance):
    worst = 0.0
    for s in (0.55, 0.6, 0.75, 0.9):
        k = KernelClass.fractional(s)
        for sign in ("plus", "minus"):
            worst = max(worst, abs(find_beta_root(k, sign) - s))
    ok = worst < 1e-3
    acceptance(1, "beta-root sandwich", ok, f"max |root - s| = {worst:.2e} (tol 1e-3)")
    assert ok


def test_02_beta_sign_pattern(acceptance):
    k = KernelClass(1.0, 2.0, 0.75)
    beta1, beta2 = find_beta_root(k, "plus"), find_beta_root(k, "minus")
    betas = np.linspace(0.02, 1.48, 40)
    betas = betas[np.abs(betas - beta1) > 1e-3]
    cp = np.array([c_constant(b, k, "plus") for b in betas])
    pattern = bool(np.all(cp[betas < beta1] < 0) and np.all(cp[betas > beta1] > 0))
    ok = pattern and beta1 <= beta2
    acceptance(2, "beta sign pattern", ok,
               f"beta1 = {beta1:.6f}, beta2 = {beta2:.6f}, {len(betas)} samples, pattern {pattern}")
    assert ok


def test_03_structural_identities(acceptance, rng):
    grid = interval_grid(-1.0, 1.0, 256)
    q = build_quadrature(grid, PUCCI)
    worst_hom = 0.0
    n_viol = 0
    for _ in range(100):
        u = _grid_fn(grid, rng.standard_normal(grid.size))
        v = _grid_fn(grid, rng.standard_normal(grid.size))
        t = rng.uniform(0.1, 10.0)
        Iu = eval_operator(u, ISAACS, q, PUCCI).values
        Itu = eval_operator(t * u, ISAACS, q, PUCCI).values
        worst_hom = max(worst_hom, float(np.max(np.abs(Itu - t * Iu)) / (t * np.max(np.abs(Iu)))))
        Iv = eval_operator(v, ISAACS, q, PUCCI).values
        w = u - v
        upper = eval_operator(w, EXTREMAL_PLUS, q, PUCCI).values
        lower = eval_operator(w, EXTREMAL_MINUS, q, PUCCI).values
        # floating-point slack of a few ulps of the operator scale
        slack = 1e-12 * max(np.max(np.abs(upper)), np.max(np.abs(lower)))
        diff = Iu - Iv
        n_viol += int(np.sum(diff > upper + slack) + np.sum(diff < lower - slack))
    ok = worst_hom <= 1e-12 and n_viol == 0
    acceptance(3, "structural identities", ok,
               f"homogeneity rel err {worst_hom:.1e} (tol 1e-12), sandwich violations {n_viol}")
    assert ok


def _ordered_pair(rng, grid, fam, k, cfg, q):
    g = _grid_fn(grid, random_smooth_source(rng)(grid.x) - rng.uniform(0.0, 0.5))
    extra = _grid_fn(grid, random_smooth_source(rng, n_bumps=2)(grid.x))
    sub = solve(g, fam, k, cfg, q)
    sup = solve(g + extra, fam, k, cfg, q)
    assert sub.converged and sup.converged
    return sup.u, sub.u


def test_04_discrete_comparison(acceptance, rng):
    n_pairs = 0
    n_viol = 0
    bad_pre = 0
    tol = 1e-9
    fine = interval_grid(-1.0, 1.0, 128)
    q_fine = build_quadrature(fine, PUCCI)
    for i in range(160):
        fam = ONE_SIDED[i % len(ONE_SIDED)]
        u, v = _ordered_pair(rng, fine, fam, PUCCI, SolveConfig(residual_tol=1e-12), q_fine)
        rep = check_comparison(u, v, fam, PUCCI, q_fine, atol=tol)
        n_viol += rep.n_violations
        bad_pre += rep.precondition_gap < -tol
        n_pairs += 1
    coarse = interval_grid(-1.0, 1.0, 16)
    q_coarse = build_quadrature(coarse, PUCCI)
    for _ in range(40):
        u, v = _ordered_pair(rng, coarse, ISAACS, PUCCI, SolveConfig(residual_tol=1e-12), q_coarse)
        rep = check_comparison(u, v, ISAACS, PUCCI, q_coarse, atol=tol)
        n_viol += rep.n_violations
        bad_pre += rep.precondition_gap < -tol
        n_pairs += 1
    ok = n_pairs == 200 and n_viol == 0 and bad_pre == 0
    acceptance(4, "discrete comparison", ok,
               f"{n_pairs} pairs, {n_viol} violations, {bad_pre} pairs failing the precondition")
    assert ok


def test_05_strong_maximum_principle(acceptance, rng):
    grid = interval_grid(-1.0, 1.0, 256)
    q = build_quadrature(grid, PUCCI)
    x = grid.x
    n_bad = 0
    worst = np.inf
    for i in range(50):
        a = rng.uniform(-0.95, 0.8)
        b = a + rng.uniform(0.02, min(0.5, 0.95 - a))
        f = np.where((x > a) & (x < b), rng.uniform(0.1, 2.0) * np.sin(np.pi * (x - a) / (b - a)), 0.0)
        if not np.any(f > 0):
            f[np.argmin(np.abs(x - 0.5 * (a + b)))] = 1.0
        fam = EXTREMAL_MINUS if i % 2 == 0 else ONE_SIDED[4]
        u = solve(_grid_fn(grid, f), fam, PUCCI, q=q).u.values
        worst = min(worst, float(u.min()))
        n_bad += int(np.any(u <= 0))
    ok = n_bad == 0
    acceptance(5, "strong maximum principle", ok,
               f"50 sources, {n_bad} with a nonpositive node, smallest value {worst:.3e}")
    assert ok


def test_06_oracle_equivalence(acceptance):
    grid = interval_grid(-1.0, 1.0, 512)
    q = build_quadrature(grid, LINEAR)
    lam_dense, _ = dense_principal_eigen(assemble_dense(Control(1.0), grid, q, LINEAR))
    res = inverse_power(ControlFamily.linear(), LINEAR, EigenConfig(cw_gap_tol=1e-10), grid, q)
    eig_err = abs(res.lambda_ - lam_dense)
    k = KernelClass(1.0, 2.0, 0.75)
    quad_err = max(
        abs(quadrature_oracle(b, k, sg) - c_constant(b, k, sg))
        for b in np.linspace(0.05, 1.45, 20)
        for sg in ("plus", "minus")
    )
    ok = eig_err <= 1e-8 and quad_err <= 1e-8
    acceptance(6, "oracle equivalence", ok,
               f"eigenvalue diff {eig_err:.1e}, quadrature diff {quad_err:.1e} (tol 1e-8)")
    assert ok


def _refinement(fam, k):
    lams = []
    for n in (128, 256, 512, 1024):
        res = inverse_power(fam, k, EigenConfig(cw_gap_tol=1e-9), interval_grid(-1.0, 1.0, n))
        assert res.converged
        lams.append(res.lambda_)
    return np.abs(np.diff(lams))


def test_07_refinement_cauchy(acceptance):
    d_lin = _refinement(ControlFamily.linear(), LINEAR)
    d_puc = _refinement(EXTREMAL_PLUS, PUCCI_HALF)
    ok = bool(np.all(np.diff(d_lin) < 0) and np.all(np.diff(d_puc) < 0))
    acceptance(7, "refinement Cauchy", ok,
               "linear diffs " + ", ".join(f"{d:.2e}" for d in d_lin)
               + "; Pucci diffs " + ", ".join(f"{d:.2e}" for d in d_puc))
    assert ok


def test_08_half_eigenvalue_symmetry_and_conjugation(acceptance):
    grid = interval_grid(-1.0, 1.0, 256)
    q = build_quadrature(grid, LINEAR)
    lin = ControlFamily.linear()
    cfg = EigenConfig(cw_gap_tol=1e-10)
    plus = inverse_power(lin, LINEAR, cfg, grid, q).lambda_
    minus = inverse_power(lin, LINEAR, EigenConfig(sign="minus", cw_gap_tol=1e-10, seed=3),
                          grid, q).lambda_
    sym_err = abs(plus - minus)
    qp = build_quadrature(grid, PUCCI)
    tight = 1e-11
    conj_err = 0.0
    for fam in ONE_SIDED:
        lm = inverse_power(fam, PUCCI, EigenConfig(sign="minus", cw_gap_tol=tight, seed=1),
                           grid, qp)
        lp = inverse_power(fam.conjugate(), PUCCI, EigenConfig(cw_gap_tol=tight, seed=7), grid, qp)
        assert lm.converged and lp.converged
        conj_err = max(conj_err, abs(lm.lambda_ - lp.lambda_))
    ok = sym_err <= 1e-6 and conj_err <= 1e-10
    acceptance(8, "half-eigenvalue symmetry and conjugation", ok,
               f"|l+ - l-| linear {sym_err:.1e} (tol 1e-6), conjugation diff {conj_err:.1e} "
               f"over {len(ONE_SIDED)} families (tol 1e-10)")
    assert ok


def test_09_simplicity(acceptance):
    grid = interval_grid(-1.0, 1.0, 512)
    dev = verify_simplicity(EXTREMAL_PLUS, PUCCI, EigenConfig(), grid, n_restarts=5)
    ok = dev <= 1e-5
    acceptance(9, "simplicity", ok, f"max sup-norm deviation {dev:.1e} over 5 restarts (tol 1e-5)")
    assert ok


def test_10_threshold_consistency(acceptance):
    grid = interval_grid(-1.0, 1.0, 512)
    q = build_quadrature(grid, LINEAR)
    lin = ControlFamily.linear()
    lam = inverse_power(lin, LINEAR, EigenConfig(cw_gap_tol=1e-10), grid, q).lambda_
    rep = max_principle_threshold(lin, LINEAR, np.arange(0.0, 10.0, 0.01),
                                  _grid_fn(grid, np.ones(grid.size)), q=q)
    rel = abs(rep.breakdown_rho - lam) / lam if not rep.open_ended else np.inf
    ok = rel <= 0.02
    acceptance(10, "threshold consistency", ok,
               f"breakdown rho {rep.breakdown_rho} ({rep.reason}) vs lambda1 {lam:.6f}, "
               f"rel diff {rel:.2%} (tol 2%)")
    assert ok


def test_11_barrier_signs(acceptance):
    k = KernelClass.fractional(0.75)
    rows = barrier_sign_check(k)
    signs_ok = all(r.sign_ok for r in rows)
    worst_slope = max(r.slope_error for r in rows)
    ok = signs_ok and worst_slope <= 0.15 and len(rows) == 4
    detail = "; ".join(
        f"M{'+' if r.sign == 'plus' else '-'} beta={r.beta:.3f} sign {r.sign_fraction:.0%} "
        f"slope {r.slope:.3f} vs {r.expected_slope:.3f}"
        for r in rows
    )
    acceptance(11, "barrier signs", ok, detail)
    assert ok


def test_12_parabolic_decay(acceptance):
    grid = interval_grid(-1.0, 1.0, 256)
    q = build_quadrature(grid, LINEAR)
    lin = ControlFamily.linear()
    eig = inverse_power(lin, LINEAR, EigenConfig(cw_gap_tol=1e-10), grid, q)
    ref = (eig.cw_lo, eig.phi.values)
    run_phi = decay_ratio_series(eig.phi, ref, lin, LINEAR, q=q)
    rate_phi = decay_rate_fit(run_phi.times, run_phi.sup_h, 0.0, tau=run_phi.tau)
    err_phi = abs(rate_phi + eig.lambda_)
    x = grid.x
    bump = _grid_fn(grid, np.where(np.abs(x - 0.3) < 0.4, np.cos(np.pi * (x - 0.3) / 0.8) ** 2, 0.0))
    run_bump = decay_ratio_series(bump, ref, lin, LINEAR, q=q)
    rate_bump = decay_rate_fit(run_bump.times, run_bump.sup_h, 0.3 * run_bump.horizon,
                               tau=run_bump.tau)
    err_bump = abs(rate_bump + eig.lambda_) / eig.lambda_
    ratio_ok = run_phi.ratio_bound_holds(1e-8) and run_bump.ratio_bound_holds(1e-8)
    ok = err_phi <= 1e-6 and err_bump <= 0.02 and ratio_ok
    acceptance(12, "parabolic decay", ok,
               f"eigenmode rate err {err_phi:.1e} (tol 1e-6), bump rel err {err_bump:.1e} "
               f"(tol 2%), ratio bound {ratio_ok}")
    assert ok


def test_13_abp_stability(acceptance, rng):
    g1, g2 = interval_grid(-1.0, 1.0, 256), interval_grid(-1.0, 1.0, 512)
    q1, q2 = build_quadrature(g1, PUCCI), build_quadrature(g2, PUCCI)
    r1, r2 = [], []
    for _ in range(50):
        f = random_smooth_source(rng)
        r1.append(abp_ratio(_grid_fn(g1, f(g1.x)), PUCCI, q=q1))
        r2.append(abp_ratio(_grid_fn(g2, f(g2.x)), PUCCI, q=q2))
    r1, r2 = np.array(r1), np.array(r2)
    const_change = abs(r1.max() - r2.max()) / r2.max()
    sample_change = float(np.max(np.abs(r1 - r2) / r2))
    ok = const_change < 0.2
    acceptance(13, "ABP stability", ok,
               f"constant {r1.max():.4f} -> {r2.max():.4f}, change {const_change:.2%} "
               f"(largest per-source change {sample_change:.2%}, tol 20%)")
    assert ok


@pytest.mark.parametrize("case", ["pucci", "linear"])
def test_14_h_condition(acceptance, case):
    k, fam = (PUCCI, EXTREMAL_MINUS) if case == "pucci" else (LINEAR, ControlFamily.linear())
    grid = interval_grid(-1.0, 1.0, 256)
    beta2 = find_beta_root(k, "minus")
    margins = []
    for frac in (0.25, 0.5, 0.75):
        beta = beta2 + frac * (2 * k.s - beta2)
        rep = h_condition_check(_grid_fn(grid, np.ones(grid.size)), k, beta, 0.2, fam=fam)
        margins.append((beta, rep))
    ok = all(r.holds for _, r in margins)
    detail = f"{case}: beta2 = {beta2:.4f}; " + ", ".join(
        f"beta={b:.3f} K={r.K:.3g} margin={r.worst_margin:.1e}" for b, r in margins
    )
    acceptance(14, f"H-condition ({case})", ok, detail)
    assert ok


def test_15_domain_monotonicity(acceptance):
    radii = (0.5, 0.75, 1.0)
    lin = domain_monotonicity(LINEAR, ControlFamily.linear(), radii)
    puc = domain_monotonicity(PUCCI, EXTREMAL_PLUS, radii)
    lam1 = dict(lin.rows)[1.0]
    scale_err = max(abs(lam * a ** (2 * LINEAR.s) / lam1 - 1) for a, lam in lin.rows)
    ok = lin.decreasing and puc.decreasing and scale_err <= 0.02
    acceptance(15, "domain monotonicity", ok,
               "linear " + ", ".join(f"{lam:.4f}" for _, lam in lin.rows)
               + "; Pucci " + ", ".join(f"{lam:.4f}" for _, lam in puc.rows)
               + f"; scaling err {scale_err:.1e} (tol 2%)")
    assert ok
