"""Plain Monte Carlo over random cross-section fields.

Each sample draws a field from its (seed, index)-derived generator,
solves the requested problem, records the quantity of interest, and
certifies the flux bound and the contraction-ratio bound on that
realization.  The bounds are theorems, so the per-sample pass count must
equal the sample count; aggregates are computed in index order and are
byte-reproducible.
"""

from dataclasses import dataclass

import numpy as np

from ._fmt import dump_json, write_csv
from .crit import keff_power_iteration, verify_spectrum_positive
from .kernel import assemble_k
from .solve import check_bound_rte, direct_solve, source_iteration
from .xsec import RandomFieldSpec, sample_xsec, scattering_ratio

_QOIS = ("mean_flux", "probe_flux", "k_effective")


@dataclass(frozen=True)
class UqConfig:
    """Sampling plan: field spec, sample count, QoI selector, tolerances."""

    field_spec: RandomFieldSpec
    n_samples: int
    qoi: str = "mean_flux"
    source: float | np.ndarray = 1.0
    probe_cell: int | None = None
    tol: float = 1e-10
    max_iter: int = 2000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.qoi not in _QOIS:
            raise ValueError(f"qoi must be one of {_QOIS}")
        n = self.field_spec.domain.n_cells
        if self.qoi == "probe_flux":
            if self.probe_cell is None or not (0 <= self.probe_cell < n):
                raise ValueError("probe_flux requires probe_cell in [0, n_cells)")
        if self.qoi == "k_effective":
            if self.field_spec.sigma_f is None:
                raise ValueError("k_effective requires a sigma_f range in the field spec")
            if n > 256:
                raise ValueError("k_effective sampling guarded to n <= 256")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class UqResult:
    """Per-sample QoI values, their statistics, and certificate outcomes.

    bound_ratios and max_observed_ratios hold NaN for the k_effective
    QoI, where the source-problem certificates do not apply and the
    per-sample certificate is positivity of the full spectrum instead.
    """

    qoi: str
    qoi_values: np.ndarray
    c_values: np.ndarray
    bound_ratios: np.ndarray
    max_observed_ratios: np.ndarray
    mean: float
    std: float
    standard_error: float
    pass_count: int
    worst_ratio_margin: float | None

    @property
    def n_samples(self):
        return self.qoi_values.size

    def to_csv(self, path):
        rows = []
        for i in range(self.n_samples):
            rows.append(
                (
                    i,
                    float(self.qoi_values[i]),
                    float(self.c_values[i]),
                    float(self.bound_ratios[i]) if np.isfinite(self.bound_ratios[i]) else None,
                    float(self.max_observed_ratios[i]) if np.isfinite(self.max_observed_ratios[i]) else None,
                )
            )
        write_csv(path, ["index", "qoi", "c", "bound_ratio", "max_obs_ratio"], rows)

    def summary_json(self, path):
        dump_json(
            {
                "qoi": self.qoi,
                "n_samples": self.n_samples,
                "mean": self.mean,
                "std": self.std,
                "standard_error": self.standard_error,
                "pass_count": self.pass_count,
                "worst_ratio_margin": self.worst_ratio_margin,
            },
            path,
        )


def run_uq(config: UqConfig) -> UqResult:
    """Evaluate all samples in index order and aggregate.

    A solver failure aborts with the offending sample index (the sample
    is reproducible from the base seed); a certificate failure is only
    recorded, dropping pass_count below n_samples.
    """
    spec = config.field_spec
    domain = spec.domain
    n_samples = config.n_samples
    q = np.broadcast_to(np.asarray(config.source, dtype=float), (domain.n_cells,))
    qoi_values = np.empty(n_samples)
    c_values = np.empty(n_samples)
    bound_ratios = np.full(n_samples, np.nan)
    max_ratios = np.full(n_samples, np.nan)
    passes = 0
    for idx in range(n_samples):
        xs = sample_xsec(spec, idx)
        c_values[idx] = scattering_ratio(xs)
        try:
            k_op = assemble_k(domain, xs.sigma)
            if config.qoi == "k_effective":
                result = keff_power_iteration(
                    domain, xs, tol=config.tol, max_iter=config.max_iter, k_op=k_op
                )
                report = verify_spectrum_positive(domain, xs, k_op=k_op)
                qoi_values[idx] = result.k_effective
                ok = report.passed and result.k_effective > 0.0
            else:
                phi = direct_solve(k_op, xs, q)
                bound = check_bound_rte(q, phi, xs)
                bound_ratios[idx] = bound.ratio
                _, trace = source_iteration(
                    domain, xs, k_op, q, tol=config.tol, max_iter=config.max_iter
                )
                worst = trace.max_ratio()
                max_ratios[idx] = np.nan if worst is None else worst
                if config.qoi == "mean_flux":
                    qoi_values[idx] = float(
                        np.sum(domain.widths * phi) / domain.diameter
                    )
                else:
                    qoi_values[idx] = float(phi[config.probe_cell])
                ratio_ok = worst is None or worst <= c_values[idx] + 1e-10
                ok = bound.passed and trace.converged and ratio_ok
        except RuntimeError as exc:
            raise RuntimeError(f"sample {idx} failed: {exc}") from exc
        passes += int(ok)
    # center on the first sample so a degenerate (constant) QoI gives sd = 0 exactly
    shifted = qoi_values - qoi_values[0]
    mean = float(qoi_values[0] + np.mean(shifted))
    std = (float(np.sqrt(np.sum((shifted - np.mean(shifted)) ** 2) / (n_samples - 1)))
           if n_samples > 1 else 0.0)
    margins = max_ratios - c_values
    finite = margins[np.isfinite(margins)]
    return UqResult(
        qoi=config.qoi,
        qoi_values=qoi_values,
        c_values=c_values,
        bound_ratios=bound_ratios,
        max_observed_ratios=max_ratios,
        mean=mean,
        std=std,
        standard_error=std / np.sqrt(n_samples),
        pass_count=passes,
        worst_ratio_margin=float(finite.max()) if finite.size else None,
    )
