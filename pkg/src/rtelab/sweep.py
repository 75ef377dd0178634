"""Exact characteristic transport sweeps on the slab.

With piecewise-constant cross-sections and sources, the within-cell
transport ODE mu psi' + sigma psi = g has a closed-form solution, so a
sweep marching from the vacuum inflow face evaluates the characteristic
formula exactly; the only discretization left in the scalar flux is the
angular quadrature.  The module also evaluates the optical path along
arbitrary 3D segments and the 3D point kernel, as pure formulas.
"""

from dataclasses import dataclass

import numpy as np

from .quad import AngularQuadrature
from .xsec import SlabDomain


def optical_path(domain: SlabDomain, sigma, x: float, y: float) -> float:
    """Integral of sigma over [min(x,y), max(x,y)], exact for per-cell sigma."""
    pts = domain.breakpoints
    if not (0.0 <= x <= pts[-1]) or not (0.0 <= y <= pts[-1]):
        raise ValueError("points must lie inside the slab [0, L]")
    sigma = np.asarray(sigma, dtype=float)
    lo, hi = (x, y) if x <= y else (y, x)
    overlap = np.minimum(hi, pts[1:]) - np.maximum(lo, pts[:-1])
    return float(np.sum(sigma * np.clip(overlap, 0.0, None)))


def optical_path_segment(r, rp, breakpoints, sigma_values) -> float:
    """Optical path along the 3D segment from r to rp.

    breakpoints partition [0, |r - rp|] into pieces on which sigma_values
    are constant; the result is the exact piecewise sum.  Reduces to
    optical_path when the segment lies on the x-axis.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    if r.shape != (3,) or rp.shape != (3,):
        raise ValueError("r and rp must be 3D points")
    dist = float(np.linalg.norm(r - rp))
    if dist == 0.0:
        return 0.0
    b = np.asarray(breakpoints, dtype=float)
    s = np.asarray(sigma_values, dtype=float)
    if b.ndim != 1 or b.size < 2 or not np.all(np.diff(b) > 0.0):
        raise ValueError("breakpoints must be strictly increasing")
    if b[0] != 0.0 or abs(b[-1] - dist) > 1e-12 * max(1.0, dist):
        raise ValueError("breakpoints must partition [0, |r - rp|]")
    if s.size != b.size - 1:
        raise ValueError("need one sigma value per piece")
    if not np.all(s > 0.0):
        raise ValueError("sigma values must be strictly positive")
    return float(np.sum(s * np.diff(b)))


def kernel3d_eval(r, rp, tau: float) -> float:
    """Point kernel exp(-tau) / (4 pi |r - rp|^2); r and rp must differ."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    d2 = float(np.sum((r - rp) ** 2))
    if d2 == 0.0:
        raise ValueError("kernel is singular at coincident points")
    return float(np.exp(-tau) / (4.0 * np.pi * d2))


def _check_fields(domain, sigma, g):
    sigma = np.asarray(sigma, dtype=float)
    g = np.asarray(g, dtype=float)
    n = domain.n_cells
    if sigma.shape != (n,) or g.shape != (n,):
        raise ValueError("sigma and g must have one value per cell")
    if not np.all(sigma > 0.0):
        raise ValueError("sigma must be strictly positive")
    return sigma, g


def _sweep_batch(domain, sigma, g, mus):
    """Sweep all directions in mus at once.

    Returns (interface values, exact cell averages), shapes (m, n+1) and
    (m, n).  Per cell the outgoing value is
    psi_out = psi_in e^-d + (g/sigma)(1 - e^-d) with d = sigma h / |mu|,
    and the cell average of the exponential profile is
    q + (psi_in - q)(1 - e^-d)/d.
    """
    h = domain.widths
    n = domain.n_cells
    q = g / sigma
    delta = np.abs(1.0 / mus)[:, None] * (sigma * h)[None, :]
    decay = np.exp(-delta)
    growth = -np.expm1(-delta)  # 1 - e^-d without cancellation
    psi = np.zeros((mus.size, n + 1))
    avg = np.zeros((mus.size, n))
    fwd = mus > 0.0
    bwd = ~fwd
    for i in range(n):
        inflow = psi[fwd, i]
        psi[fwd, i + 1] = inflow * decay[fwd, i] + q[i] * growth[fwd, i]
        avg[fwd, i] = q[i] + (inflow - q[i]) * growth[fwd, i] / delta[fwd, i]
    for i in range(n - 1, -1, -1):
        inflow = psi[bwd, i + 1]
        psi[bwd, i] = inflow * decay[bwd, i] + q[i] * growth[bwd, i]
        avg[bwd, i] = q[i] + (inflow - q[i]) * growth[bwd, i] / delta[bwd, i]
    return psi, avg


def sweep_one_direction(domain: SlabDomain, sigma, g, mu: float) -> np.ndarray:
    """Exact pure-transport solve for one direction cosine.

    Marches from the vacuum inflow face (left for mu > 0, right for
    mu < 0) and returns psi at the n+1 cell interfaces.
    """
    if mu == 0.0:
        raise ValueError("mu must be nonzero")
    sigma, g = _check_fields(domain, sigma, g)
    psi, _ = _sweep_batch(domain, sigma, g, np.array([float(mu)]))
    return psi[0]


@dataclass(frozen=True)
class AngularFlux:
    """Interface values psi(x_i, mu_k) for every quadrature direction."""

    quadrature: AngularQuadrature
    values: np.ndarray  # shape (n_angles, n_interfaces)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[0] != self.quadrature.n_angles:
            raise ValueError("one row of interface values per quadrature node")
        mu = self.quadrature.nodes
        if np.any(v[mu > 0, 0] != 0.0) or np.any(v[mu < 0, -1] != 0.0):
            raise ValueError("vacuum condition: inflow interface values must be 0")
        object.__setattr__(self, "values", v)


def solve_angular(domain, sigma, quadrature: AngularQuadrature, g) -> AngularFlux:
    """Sweep every quadrature direction; exact in space, vacuum inflow."""
    sigma, g = _check_fields(domain, sigma, g)
    psi, _ = _sweep_batch(domain, sigma, g, quadrature.nodes)
    return AngularFlux(quadrature, psi)


def transport_apply(domain, sigma, quadrature: AngularQuadrature, g) -> np.ndarray:
    """Scalar flux of the pure transport problem with source g.

    Sweeps all directions and averages the exact cell means with the
    quadrature weights, (1/2) sum_k w_k psibar(., mu_k).  The summation
    order is fixed by the node ordering, so results do not depend on
    scheduling.  As the angular count grows this converges to the dense
    integral operator applied to g.
    """
    sigma, g = _check_fields(domain, sigma, g)
    _, avg = _sweep_batch(domain, sigma, g, quadrature.nodes)
    return 0.5 * (quadrature.weights[:, None] * avg).sum(axis=0)
