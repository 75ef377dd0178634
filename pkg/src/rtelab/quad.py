"""Angular quadrature on (-1, 1) and the exponential integral E1."""

from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286


@dataclass(frozen=True)
class AngularQuadrature:
    """Direction cosines mu_k in (-1,1)\\{0} and positive weights summing to 2.

    The angular average of f is (1/2) sum_k w_k f(mu_k), so a constant
    averages to itself.  Nodes come in +/- pairs with equal weights, and
    mu = 0 is excluded because a particle travelling parallel to the slab
    faces never leaves it and the characteristic solution degenerates.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        mu = np.array(self.nodes, dtype=float)
        w = np.array(self.weights, dtype=float)
        if mu.shape != w.shape or mu.ndim != 1:
            raise ValueError("nodes and weights must be 1D arrays of equal length")
        if np.any(np.abs(mu) >= 1.0) or np.any(mu == 0.0):
            raise ValueError("nodes must lie in (-1,1) and avoid 0")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 2.0) > 1e-14:
            raise ValueError("weights must sum to 2 within 1e-14")
        order = np.argsort(mu)
        mu = mu[order]
        w = w[order]
        if not (np.allclose(mu, -mu[::-1], rtol=0, atol=1e-15)
                and np.allclose(w, w[::-1], rtol=0, atol=1e-15)):
            raise ValueError("node set must be symmetric about 0 with equal weights")
        mu.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", mu)
        object.__setattr__(self, "weights", w)

    @property
    def n_angles(self):
        return self.nodes.size


def gauss_legendre(n: int) -> AngularQuadrature:
    """n-point Gauss-Legendre rule on (-1, 1); n must be even so no node is 0."""
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return AngularQuadrature(nodes, weights)


def _e1_series(x):
    # -gamma - ln x + sum (-1)^(k+1) x^k/(k k!); term 25 is below 1e-30 for x <= 1
    acc = -EULER_GAMMA - np.log(x)
    term = np.ones_like(x)
    sign = 1.0
    for k in range(1, 26):
        term = term * (x / k)
        acc = acc + sign * (term / k)
        sign = -sign
    return acc


def _e1_contfrac(x):
    # modified Lentz on the even continued fraction e^-x/(x+1- 1/(x+3- 4/(...)));
    # each lane freezes at its own convergence so results match scalar calls
    b = x + 1.0
    c = np.full_like(x, 1e308)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, 201):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-15
        if done.all():
            break
    return h * np.exp(-x)


def e1(x):
    """Exponential integral E1(x) = int_x^inf e^-t/t dt for x > 0.

    Evaluated by the convergent series for x <= 1 and by a continued
    fraction for x > 1; both branches meet a 1e-12 relative target.
    Accepts scalars or arrays; rejects x <= 0 (log singularity at 0,
    negative arguments unsupported).
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and not np.all(arr > 0.0):
        raise ValueError("e1 requires x > 0")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = arr <= 1.0
    if small.any():
        out[small] = _e1_series(arr[small])
    large = ~small
    if large.any():
        out[large] = _e1_contfrac(arr[large])
    return float(out[0]) if scalar else out
