"""Dense discretization of the slab integral operator and spectral utilities.

The operator maps a per-cell source to the cell averages of the pure
transport scalar flux.  In the piecewise-constant basis its entries are

    K[i][j] = (1/h_i) * 1/2 * int_{cell i} int_{cell j} E1(tau(x, y)) dy dx,

which, with per-cell sigma, reduce exactly to integrals of E1(s + t + T)
over rectangles in optical-thickness coordinates (T is the optical gap
between the cells).  Off-diagonal blocks use tensor Gauss rules with
adaptive subdivision; the log-singular diagonal blocks are split at
x = y and integrated with a dyadically graded rule.
"""

from dataclasses import dataclass

import numpy as np

from ._fmt import write_csv
from .quad import e1
from .xsec import SlabDomain


class QuadratureBudgetError(RuntimeError):
    """Assembly quadrature failed to reach its tolerance within budget."""


@dataclass(frozen=True)
class DenseOperator:
    """Square matrix acting on per-cell values of one slab partition."""

    entries: np.ndarray
    domain: SlabDomain
    symmetric: bool = False

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        n = self.domain.n_cells
        if a.shape != (n, n):
            raise ValueError(f"entries must be {n}x{n} for this domain")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    def apply(self, g):
        return self.entries @ np.asarray(g, dtype=float)

    def to_csv(self, path):
        n = self.n
        write_csv(path, [f"c{j}" for j in range(n)], self.entries)


_GAUSS01 = {}


def _gauss01(m):
    if m not in _GAUSS01:
        x, w = np.polynomial.legendre.leggauss(m)
        _GAUSS01[m] = (0.5 * (x + 1.0), 0.5 * w)
    return _GAUSS01[m]


def _panel_estimates(s0, ds, t0, dt, shift, m, chunk=8192):
    """m x m tensor-Gauss estimates of E1(s + t + shift) over rectangles."""
    x, w = _gauss01(m)
    out = np.empty(s0.size)
    for lo in range(0, s0.size, chunk):
        sl = slice(lo, lo + chunk)
        s = s0[sl, None] + ds[sl, None] * x
        t = t0[sl, None] + dt[sl, None] * x
        args = s[:, :, None] + t[:, None, :] + shift[sl, None, None]
        vals = e1(args.reshape(-1)).reshape(args.shape)
        out[sl] = ds[sl] * dt[sl] * np.einsum("i,j,pij->p", w, w, vals)
    return out


_GRADE_LEVELS = 28


def _graded_panels(pair_ids, A, B):
    """Geometric corner decomposition of [0,A]x[0,B] toward (0,0).

    For pairs of touching cells the integrand is log-singular at the
    shared corner; three rectangles per dyadic level plus one innermost
    square resolve it to below 1e-10 relative without adaptive rounds.
    """
    half = 2.0 ** -(np.arange(_GRADE_LEVELS) + 1)  # A/2, A/4, ...
    sA = A[:, None] * half
    sB = B[:, None] * half
    zero = np.zeros_like(sA)
    # shells: [sA, 2 sA] x [0, sB], [0, sA] x [sB, 2 sB], [sA, 2 sA] x [sB, 2 sB]
    s0 = np.concatenate([sA, zero, sA], axis=1).ravel()
    ds = np.concatenate([sA, sA, sA], axis=1).ravel()
    t0 = np.concatenate([zero, sB, sB], axis=1).ravel()
    dt = np.concatenate([sB, sB, sB], axis=1).ravel()
    eid = np.repeat(pair_ids, 3 * _GRADE_LEVELS)
    # innermost square, whose total contribution is ~1e-14 of the integral
    corner = 2.0 ** -_GRADE_LEVELS
    s0 = np.concatenate([s0, np.zeros_like(A)])
    ds = np.concatenate([ds, A * corner])
    t0 = np.concatenate([t0, np.zeros_like(B)])
    dt = np.concatenate([dt, B * corner])
    eid = np.concatenate([eid, pair_ids])
    return eid, s0, ds, t0, dt


def _rect_integrals(A, B, shift, rel_tol, max_rounds):
    """Integrals of E1(s + t + shift_p) over [0, A_p] x [0, B_p] per pair.

    Each panel carries a 7- vs 10-point tensor-Gauss disagreement as its
    error estimate; panels above their entry's budget are split 2x2 until
    every estimate fits, or the round budget runs out.
    """
    npairs = A.size
    accepted = np.zeros(npairs)
    singular = shift <= 0.0
    ids = np.arange(npairs)
    parts = []
    if singular.any():
        parts.append(_graded_panels(ids[singular], A[singular], B[singular]))
    if (~singular).any():
        sm = ids[~singular]
        parts.append(
            (sm, np.zeros(sm.size), A[sm], np.zeros(sm.size), B[sm])
        )
    eid, s0, ds, t0, dt = (np.concatenate(cols) for cols in zip(*parts))
    worst = np.inf
    for _ in range(max_rounds):
        i_hi = _panel_estimates(s0, ds, t0, dt, shift[eid], m=10)
        i_lo = _panel_estimates(s0, ds, t0, dt, shift[eid], m=7)
        err = np.abs(i_hi - i_lo)
        pending = np.zeros(npairs)
        np.add.at(pending, eid, i_hi)
        budget = rel_tol * np.maximum(accepted + pending, 1e-300) / 32.0
        ok = err <= budget[eid]
        np.add.at(accepted, eid[ok], i_hi[ok])
        if ok.all():
            return accepted
        keep = ~ok
        worst = float(np.max(err[keep] / np.maximum(budget[eid[keep]], 1e-300)))
        eid, s0, ds, t0, dt = (v[keep] for v in (eid, s0, ds, t0, dt))
        hs, ht = 0.5 * ds, 0.5 * dt
        eid = np.tile(eid, 4)
        s0 = np.concatenate([s0, s0 + hs, s0, s0 + hs])
        t0 = np.concatenate([t0, t0, t0 + ht, t0 + ht])
        ds = np.tile(hs, 4)
        dt = np.tile(ht, 4)
    raise QuadratureBudgetError(
        f"off-diagonal quadrature: {np.unique(eid).size} cell pairs still "
        f"above tolerance after {max_rounds} subdivision rounds "
        f"(worst error/budget ratio {worst:.3g})"
    )


_DIAG_LEVELS = 56


def _diag_integrals(a, rel_tol):
    """J(a) = int_0^a (a - t) E1(t) dt per cell, graded toward t = 0.

    Dyadic panels [a 2^-k-1, a 2^-k] with Gauss rules; the neglected tail
    below a 2^-56 is ~1e-16 of the total.  A 12- vs 8-point comparison
    guards the tolerance.
    """
    hi = a[:, None] * 2.0 ** -np.arange(_DIAG_LEVELS)
    lo = 0.5 * hi
    width = hi - lo
    results = {}
    for m in (12, 8):
        x, w = _gauss01(m)
        t = lo[:, :, None] + width[:, :, None] * x
        f = (a[:, None, None] - t) * e1(t.reshape(-1)).reshape(t.shape)
        results[m] = (width[:, :, None] * w * f).sum(axis=(1, 2))
    err = np.abs(results[12] - results[8])
    if np.any(err > rel_tol * results[12]):
        raise QuadratureBudgetError(
            "diagonal quadrature failed its 12- vs 8-point tolerance check"
        )
    return results[12]


def assemble_k(domain: SlabDomain, sigma, rel_tol=1e-10, max_rounds=48) -> DenseOperator:
    """Galerkin matrix of the E1-kernel transport operator on cell values.

    Scaled to act on cell values: entry (i, j) is the double cell integral
    of (1/2) E1(tau(x, y)) divided by h_i.  The h-weighted matrix
    diag(h) K is symmetric by construction on any grid; K itself is
    symmetric on uniform grids.  Quadrature that cannot reach rel_tol
    within the subdivision budget raises QuadratureBudgetError.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = domain.n_cells
    if sigma.shape != (n,):
        raise ValueError("sigma must have one value per cell")
    if not np.all(sigma > 0.0):
        raise ValueError("sigma must be strictly positive")
    h = domain.widths
    a = sigma * h  # per-cell optical thickness
    prefix = np.concatenate([[0.0], np.cumsum(a)])
    kappa = np.zeros((n, n))
    np.fill_diagonal(kappa, _diag_integrals(a, rel_tol) / sigma**2)
    ii, jj = np.tril_indices(n, k=-1)
    if ii.size:
        gap = prefix[ii] - prefix[jj + 1]  # exactly 0.0 for touching cells
        g_vals = _rect_integrals(a[ii], a[jj], gap, rel_tol, max_rounds)
        kappa[ii, jj] = 0.5 * g_vals / (sigma[ii] * sigma[jj])
        kappa[jj, ii] = kappa[ii, jj]
    entries = kappa / h[:, None]
    if not np.all(entries > 0.0):
        raise QuadratureBudgetError("assembled operator has nonpositive entries")
    return DenseOperator(entries, domain, symmetric=domain.is_uniform)


def _per_cell_positive(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have one value per cell")
    if not np.all(arr > 0.0):
        raise ValueError(f"{name} must be strictly positive")
    return arr


def symmetrize(k_op: DenseOperator, sigma) -> DenseOperator:
    """Two-sided scaling sigma^1/2 K sigma^1/2 of a transport operator.

    Reproduces K exactly when sigma is identically 1.  The result is
    symmetric wherever K is (uniform grids); on non-uniform grids use
    h_weighted for the similar symmetric matrix.
    """
    sigma = _per_cell_positive(sigma, k_op.n, "sigma")
    r = np.sqrt(sigma)
    entries = r[:, None] * k_op.entries * r[None, :]
    return DenseOperator(entries, k_op.domain, symmetric=k_op.symmetric)


def h_weighted(op: DenseOperator) -> DenseOperator:
    """Similarity transform H^1/2 A H^-1/2 with H = diag(h_i).

    Maps an operator self-adjoint in the h-weighted inner product to a
    plainly symmetric matrix with the same spectrum, which is what the
    spectral routines consume on non-uniform grids.
    """
    rh = np.sqrt(op.domain.widths)
    entries = (rh[:, None] / rh[None, :]) * op.entries
    scale = np.max(np.abs(entries))
    sym = bool(np.max(np.abs(entries - entries.T)) <= 1e-8 * max(scale, 1e-300))
    return DenseOperator(entries, op.domain, symmetric=sym)


def sym_eigenvalues(op: DenseOperator, asym_tol=1e-8, residual_tol=1e-10):
    """Full real spectrum of a symmetric operator, ascending.

    Rejects operators not flagged symmetric or with relative asymmetry
    beyond asym_tol; verifies the per-pair residual |Av - lambda v|
    against residual_tol * |A| and reports failure rather than returning
    silently.
    """
    if not op.symmetric:
        raise ValueError("operator is not flagged symmetric")
    a = op.entries
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if float(np.max(np.abs(a - a.T))) > asym_tol * scale:
        raise ValueError("asymmetry beyond tolerance; refusing eigensolve")
    s = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(s)
    opnorm = max(float(np.max(np.abs(vals))), 1e-300)
    resid = float(np.max(np.linalg.norm(s @ vecs - vecs * vals, axis=0)))
    if resid > residual_tol * opnorm:
        raise RuntimeError(
            f"eigensolve residual {resid:.3g} above {residual_tol:.1g}*|A|"
        )
    return vals


def weighted_opnorm_ksigma(domain, xs, sigstar, k_op=None) -> float:
    """Operator norm of K sigma* in the sigma-weighted inner product.

    Computed as the largest singular value of W^1/2 K D_sigma* W^-1/2
    with W = diag(h_i sigma_i); certified against the analytic bound
    max(sigma*/sigma) elsewhere.
    """
    n = domain.n_cells
    sigstar = _per_cell_positive(sigstar, n, "sigstar")
    if k_op is None:
        k_op = assemble_k(domain, xs.sigma)
    rw = np.sqrt(domain.widths * xs.sigma)
    b = (rw[:, None] / rw[None, :]) * (k_op.entries * sigstar[None, :])
    return float(np.linalg.svd(b, compute_uv=False)[0])
