"""Trajectory analysis: Poincare sections, spectra, Lyapunov exponents and
phase classification.

The classifier's decision tree is declared here (it is an artifact of this
toolkit, reported with every label): (1) vanishing transverse signal is the
no-signal fixed point; (2) a largest Lyapunov exponent above threshold and
significance is chaos; (3) a Poincare section collapsing to one cluster is a
limit cycle; (4) anything else is quasi-periodic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .integrate import IntegrationConfig, Trajectory, initial_state
from .model import (
    DiscretizedEnsemble,
    FrequencyDistribution,
    PhysicalParams,
    SpinEnsembleState,
    discretize,
)

NO_SIGNAL = "no_signal"
LIMIT_CYCLE = "limit_cycle"
QUASI_PERIODIC = "quasi_periodic"
CHAOS = "chaos"

#: Chaos calls require lambda above this (1/s) and above 3 standard errors.
LAMBDA_CHAOS = 5e-3
#: Transverse amplitude below this is the no-signal fixed point.
NO_SIGNAL_AMP = 1e-4
#: Section cluster radius (relative to signal amplitude) for a limit cycle.
CLUSTER_RADIUS_REL = 1e-3


class InsufficientDataError(RuntimeError):
    pass


@dataclass
class PoincareSection:
    """Interpolated (Px, Pz) at Py = 0 crossings of one sign of dPy/dt."""

    points: np.ndarray  # (n, 2)
    direction: int
    times: np.ndarray


@dataclass
class Spectrum:
    """Single-sided amplitude spectrum on a uniform frequency grid (Hz)."""

    freqs: np.ndarray
    amps: np.ndarray
    resolution: float
    dc_excluded: bool = False


@dataclass
class LyapunovResult:
    lam: float
    stderr: float
    k: int
    tau: float
    history: np.ndarray


@dataclass
class PhaseLabel:
    kind: str
    omega_s: float | None
    evidence: dict = field(default_factory=dict)
    unclassified: bool = False


def poincare(traj: Trajectory, direction: int = 1,
             min_crossings: int = 10) -> PoincareSection:
    """Section of the average-polarization trajectory at Py = 0.

    direction=+1 keeps crossings with dPy/dt > 0.  Crossing times and the
    recorded (Px, Pz) are located by linear interpolation between samples.
    """
    py = traj.py
    if direction > 0:
        idx = np.nonzero((py[:-1] < 0.0) & (py[1:] >= 0.0))[0]
    else:
        idx = np.nonzero((py[:-1] > 0.0) & (py[1:] <= 0.0))[0]
    if idx.size < min_crossings:
        raise InsufficientDataError(
            f"only {idx.size} crossings found (need {min_crossings})")
    frac = -py[idx] / (py[idx + 1] - py[idx])
    px = traj.px[idx] + frac * (traj.px[idx + 1] - traj.px[idx])
    pz = traj.pz[idx] + frac * (traj.pz[idx + 1] - traj.pz[idx])
    tc = traj.times[idx] + frac * traj.sample_dt
    return PoincareSection(np.column_stack([px, pz]), 1 if direction > 0 else -1, tc)


def spectrum(series, sample_dt: float, times=None, min_len: int = 2 ** 14) -> Spectrum:
    """Single-sided amplitude spectrum, rectangular window, DC retained."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < min_len:
        raise ValueError(f"series must be 1D with at least {min_len} samples")
    if times is not None:
        dts = np.diff(np.asarray(times))
        if not np.allclose(dts, sample_dt, rtol=1e-9, atol=1e-12 * sample_dt):
            raise ValueError("non-uniform sampling")
    n = x.size
    amps = np.abs(np.fft.rfft(x)) / n
    amps[1:] *= 2.0
    if n % 2 == 0:
        amps[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, d=sample_dt)
    return Spectrum(freqs, amps, 1.0 / (n * sample_dt))


def dominant_frequency(spec: Spectrum, exclude_dc: bool = True) -> float:
    """Frequency (Hz) of the largest amplitude bin."""
    start = 1 if exclude_dc else 0
    return float(spec.freqs[start + int(np.argmax(spec.amps[start:]))])


def count_peaks(spec: Spectrum, rel_height: float = 0.1) -> int:
    """Local maxima above rel_height of the tallest non-DC bin."""
    a = spec.amps[1:]
    thresh = rel_height * a.max()
    local = (a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]) & (a[1:-1] > thresh)
    return int(np.count_nonzero(local))


def jacobian_vector(state: SpinEnsembleState, tangent,
                    params: PhysicalParams, ens: DiscretizedEnsemble):
    """Directional derivative of the Bloch right-hand side along tangent.

    tangent is a (qx, qy, qz) triple of arrays; the feedback contributes a
    rank-2 coupling through the quadrature-averaged transverse components.
    """
    qx, qy, qz = (np.asarray(q, dtype=float) for q in tangent)
    if not (qx.shape == qy.shape == qz.shape == state.px.shape):
        raise ValueError("tangent shape mismatch")
    w = ens.weights
    a = params.alpha
    pbx = w @ state.px
    pby = w @ state.py
    qbx = w @ qx
    qby = w @ qy
    jx = ens.freqs * qy + a * (qbx * state.pz + pbx * qz) - qx / params.t2
    jy = -ens.freqs * qx + a * (qby * state.pz + pby * qz) - qy / params.t2
    jz = (-a * (qbx * state.px + pbx * qx + qby * state.py + pby * qy)
          - qz / params.t1)
    return jx, jy, jz


def lyapunov(params: PhysicalParams,
             dist: FrequencyDistribution | DiscretizedEnsemble,
             cfg: IntegrationConfig | None = None,
             tau: float = 1.0, k: int = 2000,
             transient: float = 200.0, m: int = 81,
             n_blocks: int = 20, _retry: bool = True) -> LyapunovResult:
    """Largest Lyapunov exponent by tangent-vector propagation.

    A single tangent vector is advanced with the analytic Jacobian-vector
    product alongside the trajectory and renormalized every tau; the exponent
    is the mean log stretching rate over k intervals after the transient.
    The standard error comes from block averaging.
    """
    cfg = cfg or IntegrationConfig()
    ens = dist if isinstance(dist, DiscretizedEnsemble) else discretize(dist, m)
    st = initial_state(ens, params, cfg)
    px, py, pz = st.px.copy(), st.py.copy(), st.pz.copy()

    rng = np.random.default_rng(cfg.seed + 1)
    q = rng.standard_normal(3 * ens.m)
    q /= np.linalg.norm(q)
    qx = np.ascontiguousarray(q[:ens.m])
    qy = np.ascontiguousarray(q[ens.m:2 * ens.m])
    qz = np.ascontiguousarray(q[2 * ens.m:])

    dt = cfg.dt
    n_trans = int(round(transient / dt))
    if n_trans:
        _kernels.rk4_tangent_run(px, py, pz, qx, qy, qz, ens.freqs, ens.weights,
                                 params.alpha, params.t1, params.t2, params.p0,
                                 dt, n_trans)
        nrm = np.sqrt(np.sum(qx**2) + np.sum(qy**2) + np.sum(qz**2))
        qx /= nrm
        qy /= nrm
        qz /= nrm

    steps_per_tau = max(1, int(round(tau / dt)))
    tau_eff = steps_per_tau * dt
    logs = np.empty(k)
    for i in range(k):
        _kernels.rk4_tangent_run(px, py, pz, qx, qy, qz, ens.freqs, ens.weights,
                                 params.alpha, params.t1, params.t2, params.p0,
                                 dt, steps_per_tau)
        nrm = np.sqrt(np.sum(qx**2) + np.sum(qy**2) + np.sum(qz**2))
        if not np.isfinite(nrm) or nrm == 0.0:
            if _retry:
                return lyapunov(params, ens, cfg, tau / 2.0, 2 * k, transient,
                                m, n_blocks, _retry=False)
            raise RuntimeError("tangent vector under/overflow; reduce tau")
        logs[i] = np.log(nrm)
        qx /= nrm
        qy /= nrm
        qz /= nrm

    lam = logs.sum() / (k * tau_eff)
    nb = min(n_blocks, k)
    usable = (k // nb) * nb
    blocks = logs[:usable].reshape(nb, -1).mean(axis=1) / tau_eff
    stderr = float(np.std(blocks, ddof=1) / np.sqrt(nb)) if nb > 1 else np.inf
    history = np.cumsum(logs) / (np.arange(1, k + 1) * tau_eff)
    return LyapunovResult(float(lam), stderr, k, tau_eff, history)


def section_statistic(section: PoincareSection) -> float:
    """Largest consecutive gap over perimeter, points ordered by angle.

    Small (<~0.1) for a densely sampled smooth closed curve; larger or
    meaningless for scattered chaotic bands.
    """
    pts = section.points
    if len(pts) < 3:
        return np.inf
    c = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    order = np.argsort(ang)
    ordered = pts[order]
    diffs = np.diff(np.vstack([ordered, ordered[:1]]), axis=0)
    seglen = np.hypot(diffs[:, 0], diffs[:, 1])
    perim = seglen.sum()
    return float(seglen.max() / perim) if perim > 0 else np.inf


def classify(traj: Trajectory, lyap: LyapunovResult | None,
             spec: Spectrum | None, section: PoincareSection | None,
             lambda_chaos: float = LAMBDA_CHAOS,
             no_signal_amp: float = NO_SIGNAL_AMP) -> PhaseLabel:
    """Label the stable dynamics; all inputs analyzed on the same window."""
    amp = float(np.max(np.abs(traj.p_t)))
    evidence = {"max_transverse_amp": amp}
    if lyap is not None:
        evidence["lambda"] = lyap.lam
        evidence["lambda_stderr"] = lyap.stderr
    if spec is not None:
        evidence["peak_hz"] = dominant_frequency(spec)
        evidence["peak_count"] = count_peaks(spec)
    if section is not None:
        evidence["n_section_points"] = len(section.points)
        evidence["section_statistic"] = section_statistic(section)

    if amp < no_signal_amp:
        return PhaseLabel(NO_SIGNAL, None, evidence)

    if lyap is not None and lyap.lam > lambda_chaos and lyap.lam > 3 * lyap.stderr:
        return PhaseLabel(CHAOS, None, evidence)

    omega_s = 2 * np.pi * evidence["peak_hz"] if spec is not None else None
    if section is not None:
        pts = section.points
        c = pts.mean(axis=0)
        radius = float(np.max(np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])))
        evidence["cluster_radius"] = radius
        if radius < CLUSTER_RADIUS_REL * amp:
            return PhaseLabel(LIMIT_CYCLE, omega_s, evidence)

    label = PhaseLabel(QUASI_PERIODIC, omega_s, evidence)
    stat = evidence.get("section_statistic")
    # a closed polygon's largest edge is at most half its perimeter, and a
    # densely sampled curve keeps it under ~10%; beyond that the section is
    # scatter, which conflicts with a non-positive exponent
    if (lyap is not None and stat is not None and stat > 0.1
            and lyap.lam <= lambda_chaos):
        label.unclassified = True
    return label


def analyze_and_classify(params: PhysicalParams,
                         dist: FrequencyDistribution | DiscretizedEnsemble,
                         cfg: IntegrationConfig | None = None,
                         m: int = 81, n_fft: int = 2 ** 16,
                         lyap_tau: float = 1.0, lyap_k: int = 2000,
                         lyap_transient: float = 200.0,
                         skip_lyapunov_if_quiet: bool = True):
    """Simulate, window, analyze and classify one parameter point.

    The Lyapunov run (its own private simulation) is skipped when the signal
    already identifies the no-signal fixed point, which never needs it.
    Returns (label, trajectory_window, spectrum, section, lyapunov_result).
    """
    from .integrate import simulate

    cfg = cfg or IntegrationConfig()
    # Record finely enough that the section's linear interpolation error
    # (~amp*(omega*dt)^2/8) stays well under the cluster-radius threshold,
    # then thin back to the requested rate for the spectral window.
    fine_every = cfg.record_every
    while fine_every > 1 and fine_every * cfg.dt > 1e-3 * (1 + 1e-12):
        fine_every //= 2
    sub = cfg.record_every // fine_every
    if fine_every * sub != cfg.record_every:
        fine_every, sub = 1, cfg.record_every
    fine_cfg = replace(cfg, record_every=fine_every)
    traj = simulate(params, dist, fine_cfg, m=m)
    window = traj.after(cfg.transient)
    if len(window.times) > n_fft * sub:
        window = Trajectory(window.times[-n_fft * sub:], window.px[-n_fft * sub:],
                            window.py[-n_fft * sub:], window.pz[-n_fft * sub:],
                            window.sample_dt, traj.final_state, dict(traj.meta))
    amp = float(np.max(np.abs(window.p_t)))

    coarse = Trajectory(window.times[::sub], window.px[::sub], window.py[::sub],
                        window.pz[::sub], window.sample_dt * sub,
                        traj.final_state, dict(traj.meta)) if sub > 1 else window
    spec = spectrum(coarse.px, coarse.sample_dt,
                    min_len=min(2 ** 14, len(coarse.px)))
    try:
        section = poincare(window)
    except InsufficientDataError:
        section = None

    lyap = None
    if not (skip_lyapunov_if_quiet and amp < NO_SIGNAL_AMP):
        lyap = lyapunov(params, dist, cfg, tau=lyap_tau, k=lyap_k,
                        transient=lyap_transient, m=m)
    label = classify(window, lyap, spec, section)
    return label, window, spec, section, lyap
