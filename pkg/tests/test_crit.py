import json

import numpy as np
import pytest

from rtelab import (
    CoefficientRange,
    CrossSections,
    RandomFieldSpec,
    SlabDomain,
    assemble_k,
    build_lsigs,
    build_n,
    keff_power_iteration,
    sample_xsec,
    scattering_ratio,
    sym_eigenvalues,
    verify_spectrum_positive,
)


def fission_field(n=16, sigma_s=0.5, sigma_f=0.3, sigma_a=0.2):
    dom = SlabDomain.uniform(n)
    xs = CrossSections(dom, sigma_s=sigma_s, sigma_a=sigma_a, sigma_f=sigma_f)
    return dom, xs


def random_fission_field(n=16, index=0, seed=29):
    dom = SlabDomain.uniform(n)
    spec = RandomFieldSpec(domain=dom,
                           sigma_s=CoefficientRange(0.3, 0.9),
                           sigma_a=CoefficientRange(0.1, 0.5),
                           sigma_f=CoefficientRange(0.1, 0.5),
                           seed=seed)
    return dom, sample_xsec(spec, index)


class TestBuildLsigs:
    def test_scalar_congruence(self):
        # sigma_s = 0.5 with sigma = 1 scales K by exactly 0.5
        dom, xs = fission_field()
        k_op = assemble_k(dom, xs.sigma)
        l_op = build_lsigs(dom, xs, k_op=k_op)
        assert np.max(np.abs(l_op.entries - 0.5 * k_op.entries)) < 1e-15

    def test_entries_below_full_l(self):
        dom, xs = random_fission_field()
        k_op = assemble_k(dom, xs.sigma)
        from rtelab import symmetrize

        l_full = symmetrize(k_op, xs.sigma)
        l_s = build_lsigs(dom, xs, k_op=k_op)
        assert np.all(l_s.entries < l_full.entries)

    def test_contraction_bound(self):
        for index in range(5):
            dom, xs = random_fission_field(index=index)
            vals = sym_eigenvalues(build_lsigs(dom, xs))
            assert vals[-1] < scattering_ratio(xs) + 1e-8

    def test_requires_fission(self):
        dom = SlabDomain.uniform(4)
        xs = CrossSections(dom, sigma_s=0.5, sigma_a=0.5)
        with pytest.raises(ValueError):
            build_lsigs(dom, xs)


class TestBuildN:
    def test_scalar_model(self):
        # one cell: N = rho l / (1 - l) with l the single L_s entry
        dom, xs = fission_field(n=1)
        l_op = build_lsigs(dom, xs)
        ell = float(l_op.entries[0, 0])
        rho = float(xs.sigma_f[0] / xs.sigma_s[0])
        n_op = build_n(dom, xs)
        assert 0.0 < ell < 1.0
        assert n_op.entries[0, 0] == pytest.approx(rho * ell / (1.0 - ell), rel=1e-12)

    def test_unit_weight_gives_m(self):
        dom, xs = fission_field(sigma_s=0.4, sigma_f=0.4, sigma_a=0.2)
        l_op = build_lsigs(dom, xs)
        m = np.linalg.solve(np.eye(l_op.n) - l_op.entries, l_op.entries)
        n_op = build_n(dom, xs)
        assert np.max(np.abs(n_op.entries - 0.5 * (m + m.T))) < 1e-12

    def test_spectral_mapping(self):
        dom, xs = random_fission_field(index=2)
        k_op = assemble_k(dom, xs.sigma)
        l_op = build_lsigs(dom, xs, k_op=k_op)
        mu = sym_eigenvalues(l_op)
        m = np.linalg.solve(np.eye(l_op.n) - l_op.entries, l_op.entries)
        m_vals = np.sort(np.linalg.eigvalsh(0.5 * (m + m.T)))
        assert np.max(np.abs(m_vals - mu / (1.0 - mu))) < 1e-8

    def test_nonuniform_grid_reported(self):
        dom = SlabDomain(np.array([0.0, 0.1, 0.4, 1.0]))
        xs = CrossSections(dom, sigma_s=0.5, sigma_a=0.2, sigma_f=0.3)
        with pytest.raises(RuntimeError, match="asymmetry"):
            build_n(dom, xs)


class TestPowerIteration:
    def test_matches_full_spectrum(self):
        dom, xs = fission_field()
        k_op = assemble_k(dom, xs.sigma)
        result = keff_power_iteration(dom, xs, k_op=k_op)
        spectrum = sym_eigenvalues(build_n(dom, xs, k_op=k_op))
        assert abs(result.k_effective - spectrum[-1]) <= 1e-8
        assert result.lambda_fundamental == pytest.approx(1.0 / result.k_effective)
        assert result.residual <= 1e-10

    def test_spectrum_positive_on_random_fields(self):
        for index in range(10):
            dom, xs = random_fission_field(index=index)
            result = keff_power_iteration(dom, xs)
            assert result.lambda_fundamental > 0.0
            assert result.k_effective > 0.0

    def test_max_iter_reports_estimate(self):
        dom, xs = fission_field()
        with pytest.raises(RuntimeError, match="Rayleigh"):
            keff_power_iteration(dom, xs, tol=1e-15, max_iter=2)

    def test_spectrum_guard(self):
        dom, xs = fission_field()
        res = keff_power_iteration(dom, xs, compute_spectrum=True)
        assert res.spectrum is not None
        assert np.all(np.diff(res.spectrum) >= 0.0)

    def test_json_export(self, tmp_path):
        dom, xs = fission_field()
        res = keff_power_iteration(dom, xs, compute_spectrum=True)
        path = tmp_path / "crit.json"
        res.to_json(path)
        data = json.loads(path.read_text())
        assert set(data) == {"lambda", "k_effective", "residual", "spectrum"}
        assert data["k_effective"] == pytest.approx(res.k_effective, rel=1e-16)
        assert data["spectrum"] == sorted(data["spectrum"])


class TestVerifySpectrum:
    def test_positive_and_residuals(self):
        dom, xs = random_fission_field(index=4)
        rep = verify_spectrum_positive(dom, xs)
        assert rep.all_positive
        assert np.all(rep.generalized_residuals <= 1e-6)
        assert rep.passed

    def test_positivity_persists_with_scaled_fission(self):
        dom, xs = random_fission_field(index=5)
        scaled = CrossSections(dom, sigma_s=xs.sigma_s, sigma_a=xs.sigma_a,
                               sigma_f=2.0 * xs.sigma_f)
        assert verify_spectrum_positive(dom, scaled).all_positive

    def test_guard_rejects_large_n(self):
        dom = SlabDomain.uniform(300)
        xs = CrossSections(dom, sigma_s=0.5, sigma_a=0.2, sigma_f=0.3)
        with pytest.raises(ValueError):
            verify_spectrum_positive(dom, xs)
