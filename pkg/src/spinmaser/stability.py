"""Linear stability of limit cycles and of the no-signal fixed point.

Two independent routes:

* the continuum characteristic equation, built from the closed-form inverse
  of the 3x3 perturbation matrix and four density-weighted integrals; roots
  with positive real part are counted by an argument-principle winding along
  the contour Re(beta) = delta0 (with the cubic poles of the integrands in
  the right half-plane counted explicitly);
* eigenvalues of the dense 3M x 3M Jacobian of the discretized rotating-frame
  system linearized at its own exact limit cycle.

Phase invariance of the cycle always contributes a marginal growth rate at
beta = 0 (the gauge mode); both routes deflate it before giving a verdict.
The Jacobian route is the verdict of record when the two disagree, because
the analyticity domain of the characteristic integrals is not guaranteed at
large gain; disagreements are flagged, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .limitcycle import LimitCycleSolution, NoSolution, profile, solve
from .model import (
    DiracComb,
    DiscretizedEnsemble,
    FrequencyDistribution,
    PhysicalParams,
    discretize,
    support,
)
from .quadrature import rho_quadrature


@dataclass
class StabilityVerdict:
    stable: bool
    leading_beta: complex
    method: str  # "characteristic", "jacobian", "both", or "disagreement"
    zero_mode_check: float
    diagnostics: dict = field(default_factory=dict)


def m_matrix(beta: complex, omega: float, omega_s: float, ptbar: complex,
             params: PhysicalParams) -> np.ndarray:
    """3x3 perturbation matrix in the (dPz, dPt, dPt*) basis."""
    a = params.alpha
    d = omega - omega_s
    return np.array([
        [beta + 1.0 / params.t1, a * np.conj(ptbar) / 2.0, a * ptbar / 2.0],
        [-a * ptbar, beta + 1.0 / params.t2 + 1j * d, 0.0],
        [-a * np.conj(ptbar), 0.0, beta + 1.0 / params.t2 - 1j * d],
    ], dtype=complex)


def _minv_blocks(beta, delta, ptbar, params):
    """Closed-form entries of M^-1 needed by the characteristic equation.

    Vectorized over the detuning array delta.  Returns (m21, m22, m23,
    m31, m32, m33).
    """
    v = params.alpha * ptbar / 2.0
    vc = np.conj(v)
    av2 = 2.0 * (v * vc).real
    b1 = beta + 1.0 / params.t1
    b2 = beta + 1.0 / params.t2 + 1j * delta
    b3 = beta + 1.0 / params.t2 - 1j * delta
    det = b1 * b2 * b3 + av2 * (b2 + b3)
    m21 = 2.0 * v * b3 / det
    m22 = (b1 * b3 + av2) / det
    m23 = -2.0 * v * v / det
    m31 = 2.0 * vc * b2 / det
    m32 = -2.0 * vc * vc / det
    m33 = (b1 * b2 + av2) / det
    return m21, m22, m23, m31, m32, m33


def characteristic(beta: complex, params: PhysicalParams,
                   dist: FrequencyDistribution, sol: LimitCycleSolution,
                   quad=None, n_per_branch: int = 200) -> complex:
    """Characteristic function D(beta); D = 0 at perturbation growth rates."""
    om, w = quad if quad is not None else rho_quadrature(dist, n_per_branch)
    p_t, p_z = profile(sol, params, om)
    ptbar = sol.amp  # real-positive gauge
    d = om - sol.omega_s
    m21, m22, m23, m31, m32, m33 = _minv_blocks(beta, d, ptbar, params)
    a = params.alpha
    i1 = np.sum(w * (m22 * p_z - m21 * np.conj(p_t) / 2.0))
    i2 = np.sum(w * (m33 * p_z - m31 * p_t / 2.0))
    i3 = np.sum(w * (m23 * p_z - m21 * p_t / 2.0))
    i4 = np.sum(w * (m32 * p_z - m31 * np.conj(p_t) / 2.0))
    return complex((1.0 - a * i1) * (1.0 - a * i2) - a * a * i3 * i4)


def _winding(func, path_points, max_depth: int = 24):
    """Total argument change of func along a polyline, adaptively refined."""
    pts = list(path_points)
    vals = [func(p) for p in pts]
    total = 0.0
    stack = [(pts[i], pts[i + 1], vals[i], vals[i + 1], 0)
             for i in range(len(pts) - 1)]
    while stack:
        b0, b1, f0, f1, depth = stack.pop()
        dphi = np.angle(f1 / f0)
        if abs(dphi) < 0.8 or depth >= max_depth:
            total += dphi
            continue
        bm = 0.5 * (b0 + b1)
        fm = func(bm)
        stack.append((b0, bm, f0, fm, depth + 1))
        stack.append((bm, b1, fm, f1, depth + 1))
    return total / (2.0 * np.pi)


def _rhp_pole_count(params, sol, om, delta0):
    """Poles of the characteristic integrands with Re(beta) > delta0.

    det M(beta) is a cubic per frequency node; each right-half-plane root is
    a simple pole of D (the double-pole parts cancel by cofactor identities).
    """
    t1, t2 = params.t1, params.t2
    av2 = params.alpha**2 * sol.amp2  # = 2|v|^2 * 2
    count = 0
    for d in (om - sol.omega_s):
        # (x + 1/T1)[(x + 1/T2)^2 + d^2] + alpha^2 amp2 (x + 1/T2)
        c = 1.0 / t2
        a0 = 1.0 / t1
        coeffs = [
            1.0,
            a0 + 2 * c,
            c * c + d * d + 2 * a0 * c + av2,
            a0 * (c * c + d * d) + av2 * c,
        ]
        for r in np.roots(coeffs):
            if r.real > delta0:
                count += 1
    return count


def characteristic_unstable(params: PhysicalParams, dist: FrequencyDistribution,
                            sol: LimitCycleSolution, delta0: float,
                            n_per_branch: int = 200) -> dict:
    """Count zeros of D(beta) with Re(beta) > delta0 via the argument principle."""
    om, w = rho_quadrature(dist, n_per_branch)
    lo, hi = support(dist)
    scale = max(1.0 / params.t2, 1.0 / params.t1,
                params.alpha * params.p0, hi - lo)
    radius = 60.0 * scale

    dtil = lambda b: characteristic(b, params, dist, sol, quad=(om, w)) / b

    n_line = 400
    ys = np.linspace(radius, -radius, n_line)
    line = [complex(delta0, y) for y in ys]
    w_line = _winding(dtil, line)
    thetas = np.linspace(-np.pi / 2, np.pi / 2, 101)
    arc = [delta0 + radius * np.exp(1j * th) for th in thetas]
    w_arc = _winding(dtil, arc)

    winding = w_line + w_arc
    n_poles = _rhp_pole_count(params, sol, om, delta0)
    n_zeros = int(round(winding)) + n_poles
    return {
        "winding": winding,
        "n_poles_rhp": n_poles,
        "n_zeros_rhp": n_zeros,
        "unstable": n_zeros >= 1,
    }


def jacobian_matrix(params: PhysicalParams, ens: DiscretizedEnsemble,
                    sol: LimitCycleSolution) -> np.ndarray:
    """3M x 3M complex Jacobian of the rotating-frame system at the cycle.

    Basis [dPz (M), dPt (M), dPt* (M)]; dPt are rotating-frame transverse
    perturbations.  The matrix is similar to the real-coordinate Jacobian, so
    its spectrum is the physical one (conjugate-paired).
    """
    m = ens.m
    a = params.alpha
    wq = ens.weights
    d = ens.freqs - sol.omega_s
    p_t, p_z = profile(sol, params, ens.freqs)
    ptbar = sol.amp

    j = np.zeros((3 * m, 3 * m), dtype=complex)
    zz = slice(0, m)
    tt = slice(m, 2 * m)
    cc = slice(2 * m, 3 * m)

    j[zz, zz] = -np.eye(m) / params.t1
    j[zz, tt] = -(a / 2.0) * (np.conj(ptbar) * np.eye(m) + np.outer(np.conj(p_t), wq))
    j[zz, cc] = -(a / 2.0) * (ptbar * np.eye(m) + np.outer(p_t, wq))
    j[tt, zz] = a * ptbar * np.eye(m)
    j[tt, tt] = np.diag(-(1.0 / params.t2 + 1j * d)) + a * np.outer(p_z, wq)
    j[cc, zz] = a * np.conj(ptbar) * np.eye(m)
    j[cc, cc] = np.diag(-(1.0 / params.t2 - 1j * d)) + a * np.outer(p_z, wq)
    return j


def jacobian_verdict(params: PhysicalParams, dist: FrequencyDistribution,
                     m: int = 81, delta0: float | None = None) -> dict:
    """Stability by eigenvalues of the discretized Jacobian.

    The cycle is re-solved on the discretized ensemble's own quadrature so the
    linearization point is an exact fixed point; the single gauge eigenvalue
    nearest zero is then within machine precision of zero and is deflated.
    """
    if delta0 is None:
        delta0 = 1e-4 / params.t2
    ens = dist if isinstance(dist, DiscretizedEnsemble) else discretize(dist, m)
    sol_d = solve(params, dist, quad=(ens.freqs, ens.weights))
    if isinstance(sol_d, NoSolution):
        return {"no_cycle": True}
    eig = np.linalg.eigvals(jacobian_matrix(params, ens, sol_d))
    k0 = int(np.argmin(np.abs(eig)))
    gauge = eig[k0]
    rest = np.delete(eig, k0)
    leading = rest[int(np.argmax(rest.real))]
    return {
        "no_cycle": False,
        "eigenvalues": eig,
        "gauge_eigenvalue": complex(gauge),
        "gauge_ok": abs(gauge) < 1e-6 / params.t2,
        "leading_beta": complex(leading),
        "unstable": leading.real > delta0,
        "sol_discrete": sol_d,
    }


def limit_cycle_stable(params: PhysicalParams, dist: FrequencyDistribution,
                       sol: LimitCycleSolution, m: int = 81,
                       delta0: float | None = None,
                       n_per_branch: int = 200) -> StabilityVerdict:
    """Verdict on the limit cycle combining both stability routes."""
    if delta0 is None:
        delta0 = 1e-4 / params.t2

    d0 = abs(characteristic(0.0, params, dist, sol, n_per_branch=n_per_branch))
    dref = abs(characteristic(1.0 / params.t2, params, dist, sol,
                              n_per_branch=n_per_branch))
    zero_mode = d0 / dref if dref > 0 else np.inf

    char = characteristic_unstable(params, dist, sol, delta0, n_per_branch)
    jac = jacobian_verdict(params, dist, m=m, delta0=delta0)
    if jac.get("no_cycle"):
        # discretized system has no cycle at all; characteristic route decides
        return StabilityVerdict(not char["unstable"], 0j, "characteristic",
                                zero_mode, {"characteristic": char})

    agree = char["unstable"] == jac["unstable"]
    method = "both" if agree else "disagreement"
    return StabilityVerdict(
        stable=not jac["unstable"],
        leading_beta=jac["leading_beta"],
        method=method,
        zero_mode_check=zero_mode,
        diagnostics={
            "characteristic": char,
            "jacobian_gauge_eigenvalue": jac["gauge_eigenvalue"],
            "jacobian_gauge_ok": jac["gauge_ok"],
            "delta0": delta0,
        },
    )


def _no_signal_response(params, om, w, sigma):
    """C(sigma) = integral rho / (1/T2 + i(omega - sigma)) domega."""
    return np.sum(w / (1.0 / params.t2 + 1j * (om - sigma)))


def no_signal_threshold(params: PhysicalParams, dist: FrequencyDistribution,
                        n_per_branch: int = 200):
    """Smallest gain destabilizing the no-signal point, with onset frequency.

    Setting the average transverse amplitude to zero factorizes the
    characteristic equation into 1 = alpha P0 C(sigma) with Im C(sigma) = 0 at
    onset; the threshold is the sigma root maximizing Re C.
    """
    om, w = rho_quadrature(dist, n_per_branch)
    lo, hi = support(dist)
    span = max(hi - lo, 1.0 / params.t2)
    sigmas = np.linspace(lo - 0.5 * span, hi + 0.5 * span, 2001)
    ims = np.array([_no_signal_response(params, om, w, s).imag for s in sigmas])
    best_re = -np.inf
    best_sigma = None
    for i in range(len(sigmas) - 1):
        if ims[i] == 0.0 or ims[i] * ims[i + 1] < 0.0:
            s0 = brentq(lambda s: _no_signal_response(params, om, w, s).imag,
                        sigmas[i], sigmas[i + 1], xtol=1e-12 * span)
            re = _no_signal_response(params, om, w, s0).real
            if re > best_re:
                best_re = re
                best_sigma = s0
    if best_sigma is None or best_re <= 0:
        raise RuntimeError("no onset crossing found in the scanned range")
    return 1.0 / (params.p0 * best_re), float(best_sigma)


def uniform_threshold_alpha(params: PhysicalParams, eps: float) -> float:
    """Closed-form no-signal threshold for the flat density of width eps."""
    return eps / (2.0 * params.p0 * np.arctan(eps * params.t2 / 2.0))
