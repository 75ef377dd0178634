"""Slab domain, heterogeneous cross-sections, and random coefficient fields.

Cross-sections are piecewise-constant per cell and strictly positive, so
the total sigma dominates the scattering part and the scattering ratio
max(sigma_s/sigma) stays strictly below one.  All values are immutable
after construction; random sampling is a pure function of (seed, index).
"""

from dataclasses import dataclass

import numpy as np

from ._fmt import dump_json

_DISTRIBUTIONS = ("uniform", "loguniform")


def _as_readonly(values, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SlabDomain:
    """Partition 0 = x_0 < x_1 < ... < x_n = L of the slab into cells."""

    breakpoints: np.ndarray

    def __post_init__(self):
        pts = _as_readonly(self.breakpoints, "breakpoints")
        if pts.size < 2:
            raise ValueError("need at least two breakpoints (one cell)")
        if pts[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", pts)

    @classmethod
    def uniform(cls, n_cells, length=1.0):
        if n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if length <= 0.0:
            raise ValueError("length must be > 0")
        return cls(np.linspace(0.0, length, n_cells + 1))

    @property
    def n_cells(self):
        return self.breakpoints.size - 1

    @property
    def widths(self):
        return np.diff(self.breakpoints)

    @property
    def midpoints(self):
        return 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])

    @property
    def diameter(self):
        return float(self.breakpoints[-1])

    @property
    def is_uniform(self):
        h = self.widths
        return bool(np.all(np.abs(h - h[0]) <= 1e-12 * h[0]))


def _positive_cells(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    arr = _as_readonly(arr, name)
    if arr.size != n:
        raise ValueError(f"{name} has {arr.size} entries, expected {n}")
    if not np.all(arr > 0.0):
        raise ValueError(f"{name} must be strictly positive in every cell")
    return arr


@dataclass(frozen=True)
class CrossSections:
    """Per-cell scattering, absorption and optional fission coefficients.

    The total cross-section is always recomputed as the componentwise sum
    of the stored parts, never stored on its own.
    """

    domain: SlabDomain
    sigma_s: np.ndarray
    sigma_a: np.ndarray
    sigma_f: np.ndarray | None = None

    def __post_init__(self):
        n = self.domain.n_cells
        object.__setattr__(self, "sigma_s", _positive_cells(self.sigma_s, n, "sigma_s"))
        object.__setattr__(self, "sigma_a", _positive_cells(self.sigma_a, n, "sigma_a"))
        if self.sigma_f is not None:
            object.__setattr__(
                self, "sigma_f", _positive_cells(self.sigma_f, n, "sigma_f")
            )

    @property
    def sigma(self):
        total = self.sigma_s + self.sigma_a
        if self.sigma_f is not None:
            total = total + self.sigma_f
        return total

    @property
    def sigma_min(self):
        return float(np.min(self.sigma))

    def to_json(self, path):
        dump_json(
            {
                "breakpoints": self.domain.breakpoints,
                "sigma_s": self.sigma_s,
                "sigma_a": self.sigma_a,
                "sigma_f": self.sigma_f,
            },
            path,
        )

    @classmethod
    def from_json(cls, path):
        import json

        with open(path) as f:
            data = json.load(f)
        domain = SlabDomain(np.asarray(data["breakpoints"], dtype=float))
        sigma_f = data.get("sigma_f")
        return cls(
            domain=domain,
            sigma_s=np.asarray(data["sigma_s"], dtype=float),
            sigma_a=np.asarray(data["sigma_a"], dtype=float),
            sigma_f=None if sigma_f is None else np.asarray(sigma_f, dtype=float),
        )


def scattering_ratio(xs: CrossSections) -> float:
    """max over cells of sigma_s/sigma; strictly inside (0, 1)."""
    return float(np.max(xs.sigma_s / xs.sigma))


@dataclass(frozen=True)
class CoefficientRange:
    """Marginal distribution of one coefficient: uniform or log-uniform on [lo, hi]."""

    lo: float
    hi: float
    dist: str = "uniform"

    def __post_init__(self):
        if self.dist not in _DISTRIBUTIONS:
            raise ValueError(f"dist must be one of {_DISTRIBUTIONS}")
        if not (0.0 < self.lo <= self.hi):
            raise ValueError("bounds must satisfy 0 < lo <= hi")

    def draw(self, rng, n):
        u = rng.random(n)
        if self.dist == "uniform":
            return self.lo + (self.hi - self.lo) * u
        return np.exp(np.log(self.lo) + (np.log(self.hi) - np.log(self.lo)) * u)


@dataclass(frozen=True)
class RandomFieldSpec:
    """Independent per-cell random cross-sections with strictly positive bounds."""

    domain: SlabDomain
    sigma_s: CoefficientRange
    sigma_a: CoefficientRange
    sigma_f: CoefficientRange | None = None
    seed: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit nonnegative integer")


def sample_xsec(spec: RandomFieldSpec, sample_index: int) -> CrossSections:
    """Draw one cross-section realization, a pure function of (seed, index).

    The generator is derived from the pair (base seed, sample index), so
    samples are reproducible independently of evaluation order.
    """
    if sample_index < 0:
        raise ValueError("sample_index must be nonnegative")
    rng = np.random.default_rng([int(spec.seed), int(sample_index)])
    n = spec.domain.n_cells
    sigma_s = spec.sigma_s.draw(rng, n)
    sigma_a = spec.sigma_a.draw(rng, n)
    sigma_f = None if spec.sigma_f is None else spec.sigma_f.draw(rng, n)
    return CrossSections(spec.domain, sigma_s, sigma_a, sigma_f)
