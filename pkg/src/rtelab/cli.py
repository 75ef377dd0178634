"""Command-line front door: JSON config in, CSV/JSON results out.

Commands: solve | verify | criticality | uq, each taking --config and
--out.  Every run is a pure function of its config file; re-running
overwrites outputs identically.  stdout carries a single JSON status
line, stderr the human diagnostics.  Exit codes: 0 success, 1 failed
verification certificate, 2 config error, 3 solver failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._fmt import dump_json, write_csv
from .crit import keff_power_iteration, verify_spectrum_positive
from .kernel import assemble_k, sym_eigenvalues, symmetrize, weighted_opnorm_ksigma
from .quad import gauss_legendre
from .solve import (
    check_bound_pure,
    check_bound_rte,
    source_iteration,
    transport_operator,
)
from .xsec import (
    CoefficientRange,
    CrossSections,
    RandomFieldSpec,
    SlabDomain,
    sample_xsec,
    scattering_ratio,
)


class ConfigError(Exception):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, path, message):
        super().__init__(f"config error at {path}: {message}")


class SolverError(Exception):
    pass


def _get(cfg, key, path, required=True, default=None):
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    return cfg[key]


def _number(value, path, positive=False):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if positive and not value > 0:
        raise ConfigError(path, "must be > 0")
    return float(value)


def _integer(value, path, minimum=None):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _domain_from(cfg, path="domain"):
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object")
    if "breakpoints" in cfg:
        pts = cfg["breakpoints"]
        if not isinstance(pts, list) or len(pts) < 2:
            raise ConfigError(f"{path}.breakpoints", "expected a list of >= 2 numbers")
        arr = np.asarray([_number(p, f"{path}.breakpoints[{i}]") for i, p in enumerate(pts)])
        if arr[0] != 0.0:
            raise ConfigError(f"{path}.breakpoints[0]", "must be 0")
        if not np.all(np.diff(arr) > 0):
            raise ConfigError(f"{path}.breakpoints", "must be strictly increasing")
        return SlabDomain(arr)
    n = _integer(_get(cfg, "n_cells", path), f"{path}.n_cells", minimum=1)
    length = _number(_get(cfg, "length", path, required=False, default=1.0),
                     f"{path}.length", positive=True)
    return SlabDomain.uniform(n, length)


def _cells(value, n, path):
    if isinstance(value, list):
        if len(value) != n:
            raise ConfigError(path, f"expected {n} entries, got {len(value)}")
        arr = np.asarray([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])
    else:
        arr = np.full(n, _number(value, path))
    bad = np.nonzero(~(arr > 0.0))[0]
    if bad.size:
        raise ConfigError(f"{path}[{bad[0]}]", "must be > 0")
    return arr


def _range_from(cfg, path):
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object with lo/hi")
    lo = _number(_get(cfg, "lo", path), f"{path}.lo", positive=True)
    hi = _number(_get(cfg, "hi", path), f"{path}.hi", positive=True)
    if hi < lo:
        raise ConfigError(f"{path}.hi", "must be >= lo")
    dist = _get(cfg, "dist", path, required=False, default="uniform")
    if dist not in ("uniform", "loguniform"):
        raise ConfigError(f"{path}.dist", "must be 'uniform' or 'loguniform'")
    return CoefficientRange(lo=lo, hi=hi, dist=dist)


def _field_spec_from(cfg, domain, path, need_fission=False):
    spec_f = None
    if "sigma_f" in cfg:
        spec_f = _range_from(cfg["sigma_f"], f"{path}.sigma_f")
    elif need_fission:
        raise ConfigError(f"{path}.sigma_f", "missing required field")
    return RandomFieldSpec(
        domain=domain,
        sigma_s=_range_from(_get(cfg, "sigma_s", path), f"{path}.sigma_s"),
        sigma_a=_range_from(_get(cfg, "sigma_a", path), f"{path}.sigma_a"),
        sigma_f=spec_f,
        seed=_integer(_get(cfg, "seed", path, required=False, default=0),
                      f"{path}.seed", minimum=0),
    )


def _xsec_from(cfg, domain, path="cross_sections", need_fission=False):
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object")
    n = domain.n_cells
    if "random_field" in cfg:
        rf = cfg["random_field"]
        rf_path = f"{path}.random_field"
        spec = _field_spec_from(rf, domain, rf_path, need_fission=need_fission)
        index = _integer(_get(rf, "sample_index", rf_path, required=False, default=0),
                         f"{rf_path}.sample_index", minimum=0)
        return sample_xsec(spec, index)
    sigma_f = None
    if cfg.get("sigma_f") is not None:
        sigma_f = _cells(cfg["sigma_f"], n, f"{path}.sigma_f")
    elif need_fission:
        raise ConfigError(f"{path}.sigma_f", "missing required field")
    return CrossSections(
        domain=domain,
        sigma_s=_cells(_get(cfg, "sigma_s", path), n, f"{path}.sigma_s"),
        sigma_a=_cells(_get(cfg, "sigma_a", path), n, f"{path}.sigma_a"),
        sigma_f=sigma_f,
    )


def _source_from(cfg, n, path="source"):
    if cfg is None:
        return np.ones(n)
    if isinstance(cfg, list):
        if len(cfg) != n:
            raise ConfigError(path, f"expected {n} entries, got {len(cfg)}")
        arr = np.asarray([_number(v, f"{path}[{i}]") for i, v in enumerate(cfg)])
    else:
        arr = np.full(n, _number(cfg, path))
    bad = np.nonzero(arr < 0.0)[0]
    if bad.size:
        raise ConfigError(f"{path}[{bad[0]}]", "must be >= 0")
    return arr


def _solver_from(cfg, path="solver"):
    cfg = cfg or {}
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected an object")
    tol = _number(_get(cfg, "tol", path, required=False, default=1e-10),
                  f"{path}.tol", positive=True)
    max_iter = _integer(_get(cfg, "max_iter", path, required=False, default=1000),
                        f"{path}.max_iter", minimum=1)
    method = _get(cfg, "path", path, required=False, default="dense")
    if method not in ("dense", "matrix-free"):
        raise ConfigError(f"{path}.path", "must be 'dense' or 'matrix-free'")
    return tol, max_iter, method


def _angles_from(cfg, path="n_angles"):
    n = _integer(cfg if cfg is not None else 32, path, minimum=2)
    if n % 2 != 0:
        raise ConfigError(path, "must be even (a node at mu = 0 never leaves the slab)")
    return n


def cmd_solve(config, out_dir):
    domain = _domain_from(_get(config, "domain", "config"))
    xs = _xsec_from(_get(config, "cross_sections", "config"), domain)
    q = _source_from(config.get("source"), domain.n_cells)
    n_angles = _angles_from(config.get("n_angles"))
    tol, max_iter, method = _solver_from(config.get("solver"))

    if method == "dense":
        k_op = assemble_k(domain, xs.sigma)
        phi, trace = source_iteration(domain, xs, k_op, q, tol=tol, max_iter=max_iter)
    else:
        op = transport_operator(domain, xs, gauss_legendre(n_angles))
        phi, trace = source_iteration(domain, xs, op, q, tol=tol, max_iter=max_iter)

    trace.to_csv(out_dir / "trace.csv")
    if not trace.converged:
        raise SolverError(
            f"source iteration did not reach tol={tol} in {max_iter} iterations "
            "(partial trace written to trace.csv)"
        )
    write_csv(out_dir / "phi.csv", ["midpoint", "phi"],
              zip(domain.midpoints, phi))
    bound = check_bound_rte(q, phi, xs)
    dump_json(
        {
            "lhs": bound.lhs,
            "rhs": bound.rhs,
            "ratio": bound.ratio,
            "pass": bound.passed,
            "scattering_ratio": scattering_ratio(xs),
            "sharp_rate": trace.sharp_rate,
        },
        out_dir / "bounds.json",
    )
    return ["trace.csv", "phi.csv", "bounds.json"], 0


def cmd_criticality(config, out_dir):
    domain = _domain_from(_get(config, "domain", "config"))
    xs = _xsec_from(_get(config, "cross_sections", "config"), domain, need_fission=True)
    tol, max_iter, _ = _solver_from(config.get("solver"))
    try:
        result = keff_power_iteration(
            domain, xs, tol=tol, max_iter=max_iter,
            compute_spectrum=domain.n_cells <= 256,
        )
    except RuntimeError as exc:
        raise SolverError(str(exc)) from exc
    result.to_json(out_dir / "criticality.json")
    return ["criticality.json"], 0


def cmd_uq(config, out_dir):
    from .uq import UqConfig, run_uq

    domain = _domain_from(_get(config, "domain", "config"))
    uq_cfg = _get(config, "uq", "config")
    if not isinstance(uq_cfg, dict):
        raise ConfigError("uq", "expected an object")
    qoi = _get(uq_cfg, "qoi", "uq", required=False, default="mean_flux")
    if qoi not in ("mean_flux", "probe_flux", "k_effective"):
        raise ConfigError("uq.qoi", "must be mean_flux, probe_flux or k_effective")
    spec = _field_spec_from(
        _get(config, "random_field", "config"), domain, "random_field",
        need_fission=(qoi == "k_effective"),
    )
    tol, max_iter, _ = _solver_from(config.get("solver"))
    probe = uq_cfg.get("probe_cell")
    if probe is not None:
        probe = _integer(probe, "uq.probe_cell", minimum=0)
        if probe >= domain.n_cells:
            raise ConfigError("uq.probe_cell", f"must be < {domain.n_cells}")
    try:
        cfg = UqConfig(
            field_spec=spec,
            n_samples=_integer(_get(uq_cfg, "n_samples", "uq"), "uq.n_samples", minimum=1),
            qoi=qoi,
            source=_source_from(uq_cfg.get("source"), domain.n_cells, "uq.source"),
            probe_cell=probe,
            tol=tol,
            max_iter=max_iter,
        )
    except ValueError as exc:
        raise ConfigError("uq", str(exc)) from exc
    try:
        result = run_uq(cfg)
    except RuntimeError as exc:
        raise SolverError(str(exc)) from exc
    result.to_csv(out_dir / "uq_samples.csv")
    result.summary_json(out_dir / "uq_summary.json")
    return ["uq_samples.csv", "uq_summary.json"], 0


_DEFAULT_FIELD = {"sigma_s": {"lo": 0.2, "hi": 1.0}, "sigma_a": {"lo": 0.1, "hi": 1.0}}
_DEFAULT_CRIT_FIELD = {
    "sigma_s": {"lo": 0.3, "hi": 0.9},
    "sigma_a": {"lo": 0.1, "hi": 0.5},
    "sigma_f": {"lo": 0.1, "hi": 0.5},
}


def cmd_verify(config, out_dir):
    """Run the certificate suite and write verify_report.json."""
    seed = _integer(config.get("seed", 0), "seed", minimum=0)
    n_fields = _integer(config.get("n_fields", 100), "n_fields", minimum=1)
    grids = config.get("grids", [8, 16, 32])
    if not isinstance(grids, list) or not grids:
        raise ConfigError("grids", "expected a nonempty list of cell counts")
    grids = [_integer(g, f"grids[{i}]", minimum=1) for i, g in enumerate(grids)]
    crit_cfg = config.get("criticality", {})
    n_crit = _integer(crit_cfg.get("n_fields", 50), "criticality.n_fields", minimum=1)
    crit_cells = _integer(crit_cfg.get("n_cells", 16), "criticality.n_cells", minimum=1)

    field_cfg = config.get("random_field", _DEFAULT_FIELD)
    crit_field_cfg = config.get("crit_random_field", _DEFAULT_CRIT_FIELD)

    rng = np.random.default_rng(seed)
    report = {}

    # Spectral certificates, operator-norm bound, contraction and flux bounds
    min_eig = np.inf
    max_eig = -np.inf
    worst_margin = np.inf
    worst_ratio_excess = -np.inf
    budget_ok = True
    worst_bound_pure = 0.0
    worst_bound_rte = 0.0
    tol_si = 1e-10
    for case in range(n_fields):
        n_cells = grids[case % len(grids)]
        domain = SlabDomain.uniform(n_cells)
        spec = _field_spec_from(field_cfg, domain, "random_field")
        spec = RandomFieldSpec(domain=domain, sigma_s=spec.sigma_s,
                               sigma_a=spec.sigma_a, sigma_f=spec.sigma_f,
                               seed=seed)
        xs = sample_xsec(spec, case)
        k_op = assemble_k(domain, xs.sigma)
        evals = sym_eigenvalues(symmetrize(k_op, xs.sigma))
        min_eig = min(min_eig, float(evals[0]))
        max_eig = max(max_eig, float(evals[-1]))
        c = scattering_ratio(xs)
        norm = weighted_opnorm_ksigma(domain, xs, xs.sigma_s, k_op=k_op)
        worst_margin = min(worst_margin, c - norm)
        q = rng.uniform(0.5, 1.5, n_cells)
        phi, trace = source_iteration(domain, xs, k_op, q, tol=tol_si, max_iter=5000)
        worst = trace.max_ratio()
        if worst is not None:
            worst_ratio_excess = max(worst_ratio_excess, worst - c)
        e0 = trace.error_norms[0]
        if e0 > tol_si:
            allowed = int(np.ceil(np.log(tol_si / e0) / np.log(c))) + 2
            budget_ok = budget_ok and trace.converged and trace.iterations <= allowed
        pure = check_bound_pure(q, k_op.apply(q), xs)
        rte = check_bound_rte(q, phi, xs)
        worst_bound_pure = max(worst_bound_pure, pure.ratio)
        worst_bound_rte = max(worst_bound_rte, rte.ratio)

    report["positive_definite"] = {
        "pass": bool(min_eig > 0.0),
        "n_cases": n_fields,
        "min_eigenvalue": min_eig,
    }
    report["operator_norm_unit_bound"] = {
        "pass": bool(max_eig <= 1.0 + 1e-8),
        "max_eigenvalue": max_eig,
    }
    report["weighted_opnorm_bound"] = {
        "pass": bool(worst_margin >= -1e-8),
        "worst_margin": worst_margin,
    }
    report["contraction_rate"] = {
        "pass": bool(worst_ratio_excess <= 1e-10 and budget_ok),
        "worst_ratio_excess": worst_ratio_excess,
        "iteration_budget_ok": budget_ok,
    }
    report["flux_bounds"] = {
        "pass": bool(worst_bound_pure <= 1.0 + 1e-10 and worst_bound_rte <= 1.0 + 1e-10),
        "worst_ratio_pure": worst_bound_pure,
        "worst_ratio_rte": worst_bound_rte,
    }

    # Criticality: positive spectrum, power iteration vs full spectrum
    crit_domain = SlabDomain.uniform(crit_cells)
    crit_spec = _field_spec_from(crit_field_cfg, crit_domain, "crit_random_field",
                                 need_fission=True)
    crit_spec = RandomFieldSpec(domain=crit_domain, sigma_s=crit_spec.sigma_s,
                                sigma_a=crit_spec.sigma_a, sigma_f=crit_spec.sigma_f,
                                seed=seed + 1)
    crit_min = np.inf
    worst_resid = 0.0
    worst_power_diff = 0.0
    for case in range(n_crit):
        xs = sample_xsec(crit_spec, case)
        k_op = assemble_k(crit_domain, xs.sigma)
        rep = verify_spectrum_positive(crit_domain, xs, k_op=k_op)
        crit_min = min(crit_min, float(rep.spectrum[0]))
        worst_resid = max(worst_resid, float(rep.generalized_residuals.max()))
        result = keff_power_iteration(crit_domain, xs, k_op=k_op)
        worst_power_diff = max(
            worst_power_diff, abs(result.k_effective - float(rep.spectrum[-1]))
        )
    report["criticality_positive_spectrum"] = {
        "pass": bool(crit_min > 0.0 and worst_resid <= 1e-6 and worst_power_diff <= 1e-8),
        "min_eigenvalue": crit_min,
        "worst_generalized_residual": worst_resid,
        "power_vs_full_max_diff": worst_power_diff,
    }

    # Informational only: operator norm of one fixed coefficient field under
    # grid refinement (coarse cells split, sigma values repeated)
    base_n = min(grids)
    base_domain = SlabDomain.uniform(base_n)
    base_spec = _field_spec_from(field_cfg, base_domain, "random_field")
    base_spec = RandomFieldSpec(domain=base_domain, sigma_s=base_spec.sigma_s,
                                sigma_a=base_spec.sigma_a, sigma_f=base_spec.sigma_f,
                                seed=seed + 2)
    base_xs = sample_xsec(base_spec, 0)
    ref_grids = sorted(g for g in set(grids) if g % base_n == 0)
    ref_norms = []
    for n_cells in ref_grids:
        factor = n_cells // base_n
        domain = SlabDomain.uniform(n_cells)
        xs = CrossSections(
            domain,
            sigma_s=np.repeat(base_xs.sigma_s, factor),
            sigma_a=np.repeat(base_xs.sigma_a, factor),
        )
        ref_norms.append(weighted_opnorm_ksigma(domain, xs, xs.sigma_s))
    report["refinement_report"] = {
        "informational": True,
        "grids": ref_grids,
        "weighted_opnorms": ref_norms,
        "bound": float(np.max(base_xs.sigma_s / base_xs.sigma)),
    }

    all_pass = all(entry["pass"] for key, entry in report.items()
                   if key != "refinement_report")
    report["all_pass"] = all_pass
    dump_json(report, out_dir / "verify_report.json")
    return ["verify_report.json"], 0 if all_pass else 1


_COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "criticality": cmd_criticality,
    "uq": cmd_uq,
}


def _status(line):
    print(json.dumps(line))


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rtelab",
        description="Slab transport laboratory: solvers and inequality certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        _status({"status": "config-error", "command": args.command})
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        outputs, code = _COMMANDS[args.command](config, out_dir)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        _status({"status": "config-error", "command": args.command})
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        _status({"status": "solver-failure", "command": args.command})
        return 3
    _status(
        {
            "status": "ok" if code == 0 else "certificate-failure",
            "command": args.command,
            "out": str(out_dir),
            "outputs": outputs,
        }
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
