"""Fixed-step RK4 integration of the feedback Bloch equations.

`simulate` drives the numba kernel; `derivative` and `step` are plain-numpy
reference implementations of the same right-hand side, kept independent for
testing.  Uniform output sampling is deliberate: the FFT and Poincare
interpolation downstream require it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import (
    AveragePolarization,
    DiscretizedEnsemble,
    FrequencyDistribution,
    PhysicalParams,
    SpinEnsembleState,
    average_polarization,
    discretize,
    equilibrium_state,
)


class BlowUpError(RuntimeError):
    """Integration produced non-finite values (feedback loop diverged)."""


@dataclass
class IntegrationConfig:
    """Time stepping and initial-condition choices.

    The default initial condition is the no-signal point tilted by a
    transverse seed of magnitude tilt*P0 with a seeded random phase, shared by
    all spin packets; the no-signal point must be perturbed to reveal its
    instability.  rotating_omega shifts every Larmor frequency, so recorded
    averages are in that rotating frame (flagged in Trajectory.meta).
    """

    dt: float = 5e-4
    t_end: float = 800.0
    record_every: int = 10
    transient: float = 300.0
    rotating_omega: float | None = None
    tilt: float = 0.01
    tilt_phase: float | None = None
    seed: int = 0
    initial_state: SpinEnsembleState | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= self.dt:
            raise ValueError("t_end must exceed dt")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def sample_dt(self) -> float:
        return self.dt * self.record_every


@dataclass
class Trajectory:
    """Uniformly sampled ensemble-average polarization time series."""

    times: np.ndarray
    px: np.ndarray
    py: np.ndarray
    pz: np.ndarray
    sample_dt: float
    final_state: SpinEnsembleState | None = None
    meta: dict = field(default_factory=dict)

    @property
    def p_t(self) -> np.ndarray:
        """Complex transverse average, Px + i*Py."""
        return self.px + 1j * self.py

    def after(self, t0: float) -> "Trajectory":
        """Sub-trajectory with times >= t0 (transient trimming)."""
        i = int(np.searchsorted(self.times, t0 - 1e-12))
        return Trajectory(self.times[i:], self.px[i:], self.py[i:], self.pz[i:],
                          self.sample_dt, self.final_state, dict(self.meta))

    def to_csv(self, path, header_comments=()):
        with open(path, "w") as f:
            for line in header_comments:
                f.write(f"# {line}\n")
            f.write("t,Px,Py,Pz\n")
            for t, x, y, z in zip(self.times, self.px, self.py, self.pz):
                f.write(f"{t:.10g},{x:.12g},{y:.12g},{z:.12g}\n")


def derivative(state: SpinEnsembleState, params: PhysicalParams,
               ens: DiscretizedEnsemble, feedback_noise=None):
    """Time derivative (dPx, dPy, dPz) of the discretized Bloch equations.

    feedback_noise, when given, is an (l, g, s) triple: additive transverse
    field components and a gain offset, per the noisy feedback channel.
    """
    if state.m != ens.m:
        raise ValueError("state/ensemble size mismatch")
    lx, gy, s = feedback_noise if feedback_noise is not None else (0.0, 0.0, 0.0)
    avg = average_polarization(state, ens)
    fx = (params.alpha + s) * avg.px + lx
    fy = (params.alpha + s) * avg.py + gy
    dpx = ens.freqs * state.py + fx * state.pz - state.px / params.t2
    dpy = -ens.freqs * state.px + fy * state.pz - state.py / params.t2
    dpz = -(fx * state.px + fy * state.py) - (state.pz - params.p0) / params.t1
    return dpx, dpy, dpz


def step(state: SpinEnsembleState, params: PhysicalParams,
         ens: DiscretizedEnsemble, dt: float, noise_hold=None) -> SpinEnsembleState:
    """One classical RK4 step; the noise sample is held across all substeps."""
    def f(px, py, pz):
        s = SpinEnsembleState(px, py, pz, state.t)
        return derivative(s, params, ens, noise_hold)

    x, y, z = state.px, state.py, state.pz
    k1 = f(x, y, z)
    k2 = f(x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1], z + 0.5 * dt * k1[2])
    k3 = f(x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1], z + 0.5 * dt * k2[2])
    k4 = f(x + dt * k3[0], y + dt * k3[1], z + dt * k3[2])
    new = SpinEnsembleState(
        x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        z + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        state.t + dt,
    )
    if not (np.all(np.isfinite(new.px)) and np.all(np.isfinite(new.py))
            and np.all(np.isfinite(new.pz))):
        raise BlowUpError(f"non-finite state after step at t={state.t:.6g}")
    return new


def initial_state(ens: DiscretizedEnsemble, params: PhysicalParams,
                  cfg: IntegrationConfig) -> SpinEnsembleState:
    if cfg.initial_state is not None:
        st = cfg.initial_state.copy()
        if st.m != ens.m:
            raise ValueError("explicit initial state size mismatch")
        return st
    if cfg.tilt_phase is not None:
        phase = cfg.tilt_phase
    else:
        phase = np.random.default_rng(cfg.seed).uniform(0.0, 2.0 * np.pi)
    st = equilibrium_state(ens, params)
    st.px += cfg.tilt * params.p0 * np.cos(phase)
    st.py += cfg.tilt * params.p0 * np.sin(phase)
    return st


def simulate(params: PhysicalParams,
             dist: FrequencyDistribution | DiscretizedEnsemble,
             cfg: IntegrationConfig,
             m: int = 81,
             noise=None,
             keep_final_state: bool = True) -> Trajectory:
    """Integrate and return the uniformly sampled average-polarization series.

    noise is an object with sample_arrays(nsteps, dt) -> (l, g, s) per-step
    arrays (see robustness.NoiseSpec); None means noise-free.
    Raises BlowUpError if the state diverges.
    """
    ens = dist if isinstance(dist, DiscretizedEnsemble) else discretize(dist, m)
    st = initial_state(ens, params, cfg)

    freqs = ens.freqs
    if cfg.rotating_omega is not None:
        freqs = np.ascontiguousarray(freqs - cfg.rotating_omega)

    nrec = int(np.floor(cfg.t_end / cfg.sample_dt)) + 1
    nsteps = (nrec - 1) * cfg.record_every
    rec_px = np.empty(nrec)
    rec_py = np.empty(nrec)
    rec_pz = np.empty(nrec)
    max_norm2 = np.zeros(ens.m)

    if noise is not None:
        noise_l, noise_g, noise_s = noise.sample_arrays(nsteps, cfg.dt)
    else:
        empty = np.empty(0)
        noise_l = noise_g = noise_s = empty

    px, py, pz = st.px.copy(), st.py.copy(), st.pz.copy()
    bad = _kernels.rk4_run(px, py, pz, freqs, ens.weights,
                           params.alpha, params.t1, params.t2, params.p0,
                           cfg.dt, cfg.record_every, rec_px, rec_py, rec_pz,
                           noise_l, noise_g, noise_s, max_norm2)
    if bad >= 0:
        raise BlowUpError(
            f"integration blew up at t={bad * cfg.dt:.4g} s "
            f"(alpha={params.alpha:.6g}, dt={cfg.dt:g})")

    times = np.arange(nrec) * cfg.sample_dt
    meta = {
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "record_every": cfg.record_every,
        "sample_dt": cfg.sample_dt,
        "frame": "lab" if cfg.rotating_omega is None else "rotating",
        "rotating_omega": cfg.rotating_omega,
        "seed": cfg.seed,
        "m": ens.m,
        "alpha": params.alpha,
        "noisy": noise is not None,
        "max_norm2": max_norm2,
    }
    final = SpinEnsembleState(px, py, pz, nsteps * cfg.dt) if keep_final_state else None
    return Trajectory(times, rec_px, rec_py, rec_pz, cfg.sample_dt, final, meta)


def rotating_to_lab(traj: Trajectory) -> Trajectory:
    """Map a rotating-frame trajectory back to the lab frame."""
    if traj.meta.get("frame") != "rotating":
        return traj
    wr = traj.meta["rotating_omega"]
    pt = traj.p_t * np.exp(-1j * wr * traj.times)
    out = Trajectory(traj.times, pt.real, pt.imag, traj.pz.copy(),
                     traj.sample_dt, traj.final_state, dict(traj.meta))
    out.meta["frame"] = "lab"
    return out


def save_state(path, state: SpinEnsembleState):
    """Binary checkpoint: little-endian uint64 M, then Px, Py, Pz as float64."""
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", state.m))
        f.write(state.px.astype("<f8").tobytes())
        f.write(state.py.astype("<f8").tobytes())
        f.write(state.pz.astype("<f8").tobytes())


def load_state(path) -> SpinEnsembleState:
    with open(path, "rb") as f:
        (m,) = struct.unpack("<Q", f.read(8))
        buf = np.frombuffer(f.read(3 * 8 * m), dtype="<f8")
    return SpinEnsembleState(buf[:m].copy(), buf[m:2 * m].copy(), buf[2 * m:].copy())
