"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and measured margins.
"""

import numpy as np
import pytest

from rtelab import (
    CoefficientRange,
    CrossSections,
    RandomFieldSpec,
    SlabDomain,
    UqConfig,
    assemble_k,
    build_lsigs,
    build_n,
    check_bound_pure,
    check_bound_rte,
    direct_solve,
    e1,
    gauss_legendre,
    keff_power_iteration,
    run_uq,
    sample_xsec,
    scattering_ratio,
    source_iteration,
    sym_eigenvalues,
    symmetrize,
    transport_operator,
    verify_spectrum_positive,
    weighted_norm,
    weighted_opnorm_ksigma,
)

from oracles import e1_series_oracle

SWEEP_GRIDS = (8, 16, 32)
SWEEP_FIELDS = 102  # 34 per grid
SWEEP_SEED = 20240901


def _report(num, name, ok, detail):
    print(f"criterion {num} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="module")
def field_sweep():
    """102 random heterogeneous fields over uniform grids n in {8, 16, 32},
    with assembled operators and a random source per field."""
    rng = np.random.default_rng(SWEEP_SEED)
    cases = []
    for i in range(SWEEP_FIELDS):
        n = SWEEP_GRIDS[i % len(SWEEP_GRIDS)]
        dom = SlabDomain.uniform(n)
        spec = RandomFieldSpec(
            domain=dom,
            sigma_s=CoefficientRange(0.2, 1.0),
            sigma_a=CoefficientRange(0.1, 1.0),
            seed=SWEEP_SEED,
        )
        xs = sample_xsec(spec, i)
        k_op = assemble_k(dom, xs.sigma)
        q = rng.uniform(0.5, 1.5, n)
        cases.append((dom, xs, k_op, q))
    return cases


@pytest.fixture(scope="module")
def constant_benchmark():
    """sigma = 1, sigma_s = 0.5 on [0,1], n = 32 and n = 64 grids."""
    out = {}
    for n in (32, 64):
        dom = SlabDomain.uniform(n)
        xs = CrossSections(dom, sigma_s=0.5, sigma_a=0.5)
        out[n] = (dom, xs, assemble_k(dom, xs.sigma))
    return out


def test_criterion_1_operator_spectrum(field_sweep):
    min_eig = np.inf
    max_eig = -np.inf
    for dom, xs, k_op, _ in field_sweep:
        vals = sym_eigenvalues(symmetrize(k_op, xs.sigma))
        min_eig = min(min_eig, vals[0])
        max_eig = max(max_eig, vals[-1])
    ok = min_eig > 0.0 and max_eig <= 1.0 + 1e-8
    _report(1, "positive definite, norm <= 1", ok,
            f"{SWEEP_FIELDS} fields, min eig {min_eig:.3e}, max eig {max_eig:.6f}")


def test_criterion_2_weighted_opnorm_bound(field_sweep):
    worst_margin = np.inf
    for dom, xs, k_op, _ in field_sweep:
        bound = scattering_ratio(xs)
        norm = weighted_opnorm_ksigma(dom, xs, xs.sigma_s, k_op=k_op)
        worst_margin = min(worst_margin, bound - norm)
    ok = worst_margin >= -1e-8
    _report(2, "weighted operator-norm bound", ok,
            f"worst margin bound - norm = {worst_margin:.6f}")


def test_criterion_3_contraction_and_budget(field_sweep):
    tol = 1e-10
    worst_excess = -np.inf
    budget_ok = True
    for dom, xs, k_op, q in field_sweep:
        c = scattering_ratio(xs)
        _, trace = source_iteration(dom, xs, k_op, q, tol=tol, max_iter=10_000)
        assert trace.converged
        worst = trace.max_ratio()
        if worst is not None:
            worst_excess = max(worst_excess, worst - c)
        e0 = trace.error_norms[0]
        if e0 > tol:
            allowed = int(np.ceil(np.log(tol / e0) / np.log(c))) + 2
            budget_ok = budget_ok and trace.iterations <= allowed
    ok = worst_excess <= 1e-10 and budget_ok
    _report(3, "contraction ratios and iteration budget", ok,
            f"worst ratio - c = {worst_excess:.3e}, budget ok = {budget_ok}")


def test_criterion_4_constant_coefficient_sharp_rate(constant_benchmark):
    dom, xs, _ = constant_benchmark[64]
    op = transport_operator(dom, xs, gauss_legendre(128))
    _, trace = source_iteration(dom, xs, op, np.ones(64), tol=1e-10, max_iter=500)
    assert trace.converged
    finite = trace.ratios[np.isfinite(trace.ratios)]
    asymptotic = float(finite[-1])
    sharp = 0.5 * (1.0 - np.exp(-1.0))
    ok = asymptotic <= sharp + 1e-3 and asymptotic > 0.2
    _report(4, "constant-coefficient sharp rate", ok,
            f"asymptotic ratio {asymptotic:.6f} vs sharp {sharp:.6f}")


def test_criterion_5_fixed_point_equivalences(constant_benchmark):
    dom, xs, k_op = constant_benchmark[32]
    q = np.ones(32)
    phi_direct = direct_solve(k_op, xs, q)
    phi_dense, _ = source_iteration(dom, xs, k_op, q, tol=1e-12, max_iter=1000)
    dense_gap = weighted_norm(dom, phi_dense - phi_direct, xs.sigma)
    op = transport_operator(dom, xs, gauss_legendre(128))
    phi_mf, _ = source_iteration(dom, xs, op, q, tol=1e-12, max_iter=1000)
    mf_rel = (weighted_norm(dom, phi_mf - phi_dense, xs.sigma)
              / weighted_norm(dom, phi_dense, xs.sigma))
    ok = dense_gap <= 1e-10 and mf_rel <= 2e-4
    _report(5, "fixed-point/direct and matrix-free/dense", ok,
            f"dense gap {dense_gap:.3e} (<= 1e-10), matrix-free rel {mf_rel:.3e} (<= 2e-4)")


def test_criterion_6_flux_bounds(field_sweep):
    worst_pure = 0.0
    worst_rte = 0.0
    for dom, xs, k_op, q in field_sweep:
        pure = check_bound_pure(q, k_op.apply(q), xs)
        rte = check_bound_rte(q, direct_solve(k_op, xs, q), xs)
        worst_pure = max(worst_pure, pure.ratio)
        worst_rte = max(worst_rte, rte.ratio)
        if not (pure.passed and rte.passed):
            break
    ok = worst_pure <= 1.0 + 1e-10 and worst_rte <= 1.0 + 1e-10
    _report(6, "data-explicit flux bounds", ok,
            f"worst ratios: pure {worst_pure:.6f}, full {worst_rte:.6f}")


def test_criterion_7_criticality_certificates():
    n = 16
    dom = SlabDomain.uniform(n)
    spec = RandomFieldSpec(
        domain=dom,
        sigma_s=CoefficientRange(0.3, 0.9),
        sigma_a=CoefficientRange(0.1, 0.5),
        sigma_f=CoefficientRange(0.1, 0.5),
        seed=SWEEP_SEED + 1,
    )
    min_eig = np.inf
    worst_power = 0.0
    worst_map = 0.0
    worst_resid = 0.0
    for i in range(50):
        xs = sample_xsec(spec, i)
        k_op = assemble_k(dom, xs.sigma)
        report = verify_spectrum_positive(dom, xs, k_op=k_op)
        min_eig = min(min_eig, report.spectrum[0])
        worst_resid = max(worst_resid, report.generalized_residuals.max())
        result = keff_power_iteration(dom, xs, k_op=k_op)
        n_spec = sym_eigenvalues(build_n(dom, xs, k_op=k_op))
        worst_power = max(worst_power, abs(result.k_effective - n_spec[-1]))
        l_op = build_lsigs(dom, xs, k_op=k_op)
        mu = sym_eigenvalues(l_op)
        m = np.linalg.solve(np.eye(n) - l_op.entries, l_op.entries)
        m_vals = np.sort(np.linalg.eigvalsh(0.5 * (m + m.T)))
        worst_map = max(worst_map, np.max(np.abs(m_vals - mu / (1.0 - mu))))
    ok = (min_eig > 0.0 and worst_power <= 1e-8 and worst_map <= 1e-8
          and worst_resid <= 1e-6)
    _report(7, "criticality spectrum certificates", ok,
            f"min eig {min_eig:.3e}, power-vs-full {worst_power:.2e}, "
            f"mapping {worst_map:.2e}, residual {worst_resid:.2e}")


def test_criterion_8_exponential_integral():
    xs = np.logspace(-6, np.log10(50.0), 200)
    vals = e1(xs)
    worst = 0.0
    for x, v in zip(xs, vals):
        exact = e1_series_oracle(x)
        worst = max(worst, abs(v - exact) / abs(exact))
    bracket = xs * np.exp(xs) * vals
    bracket_ok = bool(np.all(bracket > xs / (xs + 1.0)) and np.all(bracket < 1.0))
    ok = worst <= 1e-12 and bracket_ok
    _report(8, "exponential integral accuracy", ok,
            f"worst relative error {worst:.3e} (<= 1e-12), bracketing {bracket_ok}")


def test_criterion_9_uq_determinism_and_certificates(tmp_path):
    spec = RandomFieldSpec(
        domain=SlabDomain.uniform(16),
        sigma_s=CoefficientRange(0.4, 0.6),
        sigma_a=CoefficientRange(0.4, 0.6),
        seed=SWEEP_SEED + 2,
    )
    cfg = UqConfig(field_spec=spec, n_samples=200, qoi="mean_flux", source=1.0)
    outputs = []
    for run in range(2):
        result = run_uq(cfg)
        csv = tmp_path / f"samples{run}.csv"
        js = tmp_path / f"summary{run}.json"
        result.to_csv(csv)
        result.summary_json(js)
        outputs.append((csv.read_bytes(), js.read_bytes()))
    identical = outputs[0] == outputs[1]
    ok = identical and result.pass_count == 200
    _report(9, "uq determinism and per-sample certificates", ok,
            f"byte-identical {identical}, pass count {result.pass_count}/200")
