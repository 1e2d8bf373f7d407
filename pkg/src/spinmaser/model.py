"""Physical parameters, Larmor frequency distributions and their discretization.

All frequencies are stored internally in rad/s.  The ensemble of spins is
represented by a quadrature grid {omega_nu, w_nu}: trapezoidal nodes across the
support of the distribution, with the weights renormalized to sum exactly to 1
so that the total spin number entering the feedback term carries no O(dw^2)
leakage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhysicalParams:
    """Relaxation times, equilibrium polarization and feedback gain.

    t1, t2 in seconds; p0 dimensionless in (0, 1]; alpha in rad/s.
    """

    t1: float
    t2: float
    p0: float
    alpha: float

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("relaxation times must be positive")
        if not (0.0 < self.p0 <= 1.0):
            raise ValueError("p0 must lie in (0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def alpha_c(self) -> float:
        """Critical gain of the single-frequency maser, 1/(T2*P0)."""
        return 1.0 / (self.t2 * self.p0)

    def with_alpha(self, alpha: float) -> "PhysicalParams":
        return PhysicalParams(self.t1, self.t2, self.p0, alpha)


#: Parameters used for all headline runs (Jiang et al. style Xe maser).
DEFAULT_PARAMS = dict(t1=13.0699, t2=13.65, p0=0.392097)

#: Center frequency of the example distributions, rad/s (8.85 Hz).
DEFAULT_OMEGA_C = TWO_PI * 8.85


@dataclass(frozen=True)
class DiracComb:
    """Discrete set of Larmor frequencies with normalized weights."""

    freqs: tuple
    weights: tuple

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if f.ndim != 1 or f.size == 0 or f.shape != w.shape:
            raise ValueError("freqs and weights must be equal-length 1D sequences")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must sum to 1")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("freqs must be strictly increasing")
        object.__setattr__(self, "freqs", tuple(f))
        object.__setattr__(self, "weights", tuple(w))


@dataclass(frozen=True)
class Uniform:
    """Flat density 1/eps on [center - eps/2, center + eps/2]."""

    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class Root:
    """Piecewise square-root density on [center - 2*eps/3, center + eps/3].

    Rising sqrt branch, flat plateau 3/(2*eps), then a falling 1 - sqrt branch;
    the profile produced by a spin cell centered between Helmholtz coils.
    """

    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class Tabulated:
    """Density sampled on a sorted grid; linear interpolation in between."""

    grid: tuple
    density: tuple

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.size < 2 or g.shape != d.shape:
            raise ValueError("grid and density must be equal-length 1D, size >= 2")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(d < 0):
            raise ValueError("density must be non-negative")
        norm = np.trapezoid(d, g)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"density must integrate to 1, got {norm!r}")
        object.__setattr__(self, "grid", tuple(g))
        object.__setattr__(self, "density", tuple(d))


FrequencyDistribution = DiracComb | Uniform | Root | Tabulated


def support(dist: FrequencyDistribution) -> tuple[float, float]:
    """Closed interval outside which the density vanishes."""
    if isinstance(dist, DiracComb):
        return dist.freqs[0], dist.freqs[-1]
    if isinstance(dist, Uniform):
        return dist.center - dist.width / 2, dist.center + dist.width / 2
    if isinstance(dist, Root):
        return dist.center - 2 * dist.width / 3, dist.center + dist.width / 3
    return dist.grid[0], dist.grid[-1]


def branches(dist: FrequencyDistribution) -> list[tuple[float, float]]:
    """Smooth pieces of the support, split at kinks of the density."""
    if isinstance(dist, Root):
        wc, eps = dist.center, dist.width
        return [
            (wc - 2 * eps / 3, wc - eps / 3),
            (wc - eps / 3, wc),
            (wc, wc + eps / 3),
        ]
    if isinstance(dist, Tabulated):
        g = dist.grid
        return [(g[i], g[i + 1]) for i in range(len(g) - 1)]
    lo, hi = support(dist)
    return [(lo, hi)]


def density(dist: FrequencyDistribution, omega) -> np.ndarray | float:
    """Probability density rho(omega) in 1/(rad/s); zero outside the support.

    Total function: DiracComb returns 0 everywhere (its mass is atomic).
    """
    w = np.asarray(omega, dtype=float)
    if isinstance(dist, DiracComb):
        out = np.zeros_like(w)
    elif isinstance(dist, Uniform):
        lo, hi = support(dist)
        out = np.where((w >= lo) & (w <= hi), 1.0 / dist.width, 0.0)
    elif isinstance(dist, Root):
        wc, eps = dist.center, dist.width
        x = w - wc
        out = np.zeros_like(w)
        rising = (x >= -2 * eps / 3) & (x < -eps / 3)
        flat = (x >= -eps / 3) & (x < 0)
        falling = (x >= 0) & (x <= eps / 3)
        out = np.where(rising, 1.5 / eps * np.sqrt(np.clip(3 * x + 2 * eps, 0, None) / eps), out)
        out = np.where(flat, 1.5 / eps, out)
        out = np.where(falling, 1.5 / eps * (1 - np.sqrt(np.clip(3 * x, 0, None) / eps)), out)
    else:
        out = np.interp(w, dist.grid, dist.density, left=0.0, right=0.0)
    return out if np.ndim(omega) else float(out)


@dataclass(frozen=True)
class DiscretizedEnsemble:
    """Quadrature grid realizing the continuum average sum_nu w_nu P(omega_nu)."""

    freqs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        f = np.ascontiguousarray(self.freqs, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        if f.ndim != 1 or f.size < 1 or f.shape != w.shape:
            raise ValueError("freqs/weights must be matching 1D arrays")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("freqs must be strictly increasing")
        f.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.freqs.size


def discretize(dist: FrequencyDistribution, m: int = 81) -> DiscretizedEnsemble:
    """Trapezoidal discretization of the density over its support.

    Nodes are uniform across [omega_1, omega_M]; weights are rho(omega_nu)*dw
    with half weight at the endpoints, renormalized to sum exactly to 1.
    DiracComb passes through unchanged (m is ignored).
    """
    if isinstance(dist, DiracComb):
        return DiscretizedEnsemble(np.array(dist.freqs), np.array(dist.weights))
    if m < 2:
        raise ValueError("continuum distributions need m >= 2")
    lo, hi = support(dist)
    freqs = np.linspace(lo, hi, m)
    dw = (hi - lo) / (m - 1)
    weights = density(dist, freqs) * dw
    weights[0] *= 0.5
    weights[-1] *= 0.5
    weights = weights / weights.sum()
    return DiscretizedEnsemble(freqs, weights)


@dataclass
class SpinEnsembleState:
    """Polarization components of every spin packet at one instant."""

    px: np.ndarray
    py: np.ndarray
    pz: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.px = np.ascontiguousarray(self.px, dtype=float)
        self.py = np.ascontiguousarray(self.py, dtype=float)
        self.pz = np.ascontiguousarray(self.pz, dtype=float)
        if not (self.px.shape == self.py.shape == self.pz.shape) or self.px.ndim != 1:
            raise ValueError("px, py, pz must be matching 1D arrays")

    @property
    def m(self) -> int:
        return self.px.size

    def copy(self) -> "SpinEnsembleState":
        return SpinEnsembleState(self.px.copy(), self.py.copy(), self.pz.copy(), self.t)


@dataclass(frozen=True)
class AveragePolarization:
    px: float
    py: float
    pz: float

    @property
    def transverse(self) -> complex:
        return complex(self.px, self.py)


def average_polarization(state: SpinEnsembleState, ens: DiscretizedEnsemble) -> AveragePolarization:
    """Ensemble average P-bar = sum_nu w_nu P(omega_nu)."""
    if state.m != ens.m:
        raise ValueError(f"state has {state.m} spins, ensemble has {ens.m}")
    w = ens.weights
    return AveragePolarization(float(w @ state.px), float(w @ state.py), float(w @ state.pz))


def equilibrium_state(ens: DiscretizedEnsemble, params: PhysicalParams) -> SpinEnsembleState:
    """No-signal fixed point: every packet at (0, 0, P0)."""
    m = ens.m
    return SpinEnsembleState(np.zeros(m), np.zeros(m), np.full(m, params.p0), 0.0)
