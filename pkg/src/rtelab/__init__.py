"""Slab-geometry transport laboratory: sweeps, integral operators, certificates.

Solves the steady mono-energetic transport problem on a 1D slab with
heterogeneous piecewise-constant cross-sections, both by exact
characteristic sweeps over a discrete-ordinates quadrature and by dense
assembly of the weakly singular integral operator with E1 kernel.  On top
of the solvers it provides numerical certificates for the operator-norm
bound, the source-iteration contraction rate, data-explicit flux bounds,
the criticality eigenproblem, and a Monte Carlo driver over random
cross-section fields.
"""

from .xsec import (
    SlabDomain,
    CrossSections,
    CoefficientRange,
    RandomFieldSpec,
    scattering_ratio,
    sample_xsec,
)
from .quad import AngularQuadrature, gauss_legendre, e1
from .sweep import (
    AngularFlux,
    optical_path,
    optical_path_segment,
    kernel3d_eval,
    sweep_one_direction,
    solve_angular,
    transport_apply,
)
from .kernel import (
    DenseOperator,
    QuadratureBudgetError,
    assemble_k,
    symmetrize,
    h_weighted,
    sym_eigenvalues,
    weighted_opnorm_ksigma,
)
from .solve import (
    BoundReport,
    IterationTrace,
    weighted_norm,
    source_iteration,
    direct_solve,
    transport_operator,
    check_bound_pure,
    check_bound_rte,
)
from .crit import (
    CriticalityResult,
    SpectrumReport,
    build_lsigs,
    build_n,
    keff_power_iteration,
    verify_spectrum_positive,
)
from .uq import UqConfig, UqResult, run_uq

__version__ = "0.1.0"

__all__ = [
    "SlabDomain",
    "CrossSections",
    "CoefficientRange",
    "RandomFieldSpec",
    "scattering_ratio",
    "sample_xsec",
    "AngularQuadrature",
    "gauss_legendre",
    "e1",
    "AngularFlux",
    "optical_path",
    "optical_path_segment",
    "kernel3d_eval",
    "sweep_one_direction",
    "solve_angular",
    "transport_apply",
    "DenseOperator",
    "QuadratureBudgetError",
    "assemble_k",
    "symmetrize",
    "h_weighted",
    "sym_eigenvalues",
    "weighted_opnorm_ksigma",
    "BoundReport",
    "IterationTrace",
    "weighted_norm",
    "source_iteration",
    "direct_solve",
    "transport_operator",
    "check_bound_pure",
    "check_bound_rte",
    "CriticalityResult",
    "SpectrumReport",
    "build_lsigs",
    "build_n",
    "keff_power_iteration",
    "verify_spectrum_positive",
    "UqConfig",
    "UqResult",
    "run_uq",
]
