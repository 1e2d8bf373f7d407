"""Self-consistent limit-cycle solutions of the feedback spin ensemble.

Two coupled conditions fix the synchronization frequency omega_s and the
squared transverse amplitude |P_T_bar|^2: the first-moment condition

    0 = integral (omega - omega_s) rho(omega) L(omega) domega

and the amplitude condition

    T1 / (alpha P0 T2) = integral rho(omega) L(omega) domega,

with L(omega) = 1 / {[1 + (omega-omega_s)^2 T2^2]/T1 + alpha^2 T2 |P_T_bar|^2}.
For a density symmetric about some frequency, omega_s is pinned there
analytically and only the amplitude condition is solved (1D); otherwise a
damped Newton iteration solves both.  Absence of a positive-amplitude root is
the no-signal region and is returned as NoSolution, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import (
    DiracComb,
    FrequencyDistribution,
    PhysicalParams,
    Root,
    Tabulated,
    Uniform,
    support,
)
from .quadrature import rho_quadrature


class ConvergenceError(RuntimeError):
    """Root finder failed to converge on the self-consistency equations."""


@dataclass(frozen=True)
class NoSolution:
    """No positive-amplitude limit cycle exists at these parameters."""

    reason: str = "below threshold"


@dataclass(frozen=True)
class LimitCycleSolution:
    omega_s: float
    amp2: float
    residuals: tuple
    params: PhysicalParams

    @property
    def amp(self) -> float:
        """|P_T_bar|, gauge-fixed real positive."""
        return float(np.sqrt(self.amp2))


def lorentz_weight(omega, omega_s: float, amp2: float, params: PhysicalParams):
    """Saturated Lorentzian weight L(omega); units of T1."""
    d = (np.asarray(omega, dtype=float) - omega_s) * params.t2
    out = 1.0 / ((1.0 + d * d) / params.t1 + params.alpha**2 * params.t2 * amp2)
    return out if np.ndim(omega) else float(out)


def symmetry_center(dist: FrequencyDistribution) -> float | None:
    """Mirror-symmetry point of the density, or None if asymmetric."""
    if isinstance(dist, Uniform):
        return dist.center
    if isinstance(dist, Root):
        return None
    if isinstance(dist, DiracComb):
        f = np.array(dist.freqs)
        w = np.array(dist.weights)
        c = 0.5 * (f[0] + f[-1])
        scale = max(f[-1] - f[0], abs(c), 1.0)
        if (np.allclose(f - c, -(f[::-1] - c), rtol=0, atol=1e-12 * scale)
                and np.allclose(w, w[::-1], rtol=0, atol=1e-12)):
            return float(c)
        return None
    g = np.array(dist.grid)
    d = np.array(dist.density)
    c = 0.5 * (g[0] + g[-1])
    probe = np.linspace(g[0], c, 101)
    from .model import density as _density
    if np.allclose(_density(dist, probe), _density(dist, 2 * c - probe),
                   rtol=0, atol=1e-10 * np.max(d)):
        return float(c)
    return None


def _conditions(omega_s, s, om, w, params):
    ell = lorentz_weight(om, omega_s, s, params)
    f1 = float(np.sum(w * (om - omega_s) * ell))
    f2 = float(np.sum(w * ell)) - params.t1 / (params.alpha * params.p0 * params.t2)
    return f1, f2


def solve(params: PhysicalParams, dist: FrequencyDistribution,
          quad=None, n_per_branch: int = 200,
          scan_for_extra_roots: bool = False):
    """Solve the self-consistency conditions for (omega_s, |P_T_bar|^2).

    quad optionally overrides the (nodes, weights) quadrature, e.g. with a
    DiscretizedEnsemble's grid so the solution is an exact fixed point of the
    discretized system.  Returns LimitCycleSolution or NoSolution.
    """
    if params.alpha <= 0:
        raise ValueError("limit cycles require alpha > 0")
    om, w = quad if quad is not None else rho_quadrature(dist, n_per_branch)
    t1, t2, p0, alpha = params.t1, params.t2, params.p0, params.alpha

    rhs = t1 / (alpha * p0 * t2)
    s_hi = p0 / (alpha * t1)  # L <= 1/(alpha^2 T2 s) bounds any root from above

    center = symmetry_center(dist)
    if center is not None:
        f2_at = lambda s: _conditions(center, s, om, w, params)[1]
        if f2_at(0.0) <= 0.0:
            return NoSolution()
        s_star = brentq(f2_at, 0.0, s_hi, xtol=1e-18, rtol=8.9e-16)
        if s_star <= 0.0:
            return NoSolution()
        f1, f2 = _conditions(center, s_star, om, w, params)
        sigma = max(np.std(om), 1e-30)
        res = (f1 / (t1 * sigma), f2 / rhs)
        return LimitCycleSolution(float(center), float(s_star), res, params)

    # Asymmetric density: nest the two conditions.  For fixed omega_s the
    # amplitude condition f2 is strictly decreasing in s, so it has at most
    # one root, found by bracketing; the remaining scalar equation
    # g(omega_s) = f1(omega_s, s(omega_s)) is then bracketed along a scan of
    # the support.  Far more robust than a 2D Newton on these cliffs.
    lo, hi = support(dist)
    sigma = max(np.sqrt(np.sum(w * (om - np.sum(w * om)) ** 2)), 1e-30)

    def s_of(os_):
        if _conditions(os_, 0.0, om, w, params)[1] <= 0.0:
            return None
        return brentq(lambda s: _conditions(os_, s, om, w, params)[1],
                      0.0, s_hi, xtol=1e-18, rtol=8.9e-16)

    def g(os_):
        s_ = s_of(os_)
        return None if s_ is None else _conditions(os_, s_, om, w, params)[0]

    grid = np.linspace(lo, hi, 241)
    vals = [g(os_) for os_ in grid]
    roots = []
    for x0, x1, g0, g1 in zip(grid, grid[1:], vals, vals[1:]):
        if g0 is None or g1 is None:
            continue
        if g0 == 0.0:
            roots.append(float(x0))
        elif g0 * g1 < 0.0:
            roots.append(float(brentq(g, x0, x1, xtol=1e-14 * max(abs(hi), 1.0))))
    if not roots:
        return NoSolution()

    best = max(roots, key=lambda os_: s_of(os_))
    s = s_of(best)
    if s is None or s <= 0.0:
        return NoSolution()
    f1, f2 = _conditions(best, s, om, w, params)
    res = (f1 / (t1 * sigma), f2 / rhs)
    sol = LimitCycleSolution(float(best), float(s), res, params)
    if scan_for_extra_roots and len(roots) > 1:
        import warnings
        warnings.warn(f"{len(roots)} synchronization-frequency roots found; "
                      "returning the largest-amplitude one")
    return sol


def profile(sol: LimitCycleSolution, params: PhysicalParams, omega):
    """Per-frequency limit-cycle amplitudes (complex P_T, real P_z).

    P_T is the rotating-frame amplitude under the real-positive gauge for the
    average transverse polarization.
    """
    om = np.asarray(omega, dtype=float)
    d = om - sol.omega_s
    ell = lorentz_weight(om, sol.omega_s, sol.amp2, params)
    p_z = params.p0 * (1.0 + d * d * params.t2**2) * ell / params.t1
    p_t = params.alpha * p_z * sol.amp / (1.0 / params.t2 + 1j * d)
    return p_t, p_z
