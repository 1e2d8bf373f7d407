"""Noise robustness of limit cycles and quasi-periodic orbits.

Bounded uniform noise is injected into the feedback channel either as two
independent additive transverse field streams (field kind) or as a gain
offset (gain kind), sample-and-hold at the integration step.  Robustness is
the normalized spectral overlap between the noise-free and noisy signals;
1/e is the conventional threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analysis import Spectrum, spectrum
from .integrate import BlowUpError, IntegrationConfig, Trajectory, simulate
from .model import AveragePolarization, FrequencyDistribution, PhysicalParams

FIELD = "field"
GAIN = "gain"

INV_E = 1.0 / np.e


@dataclass(frozen=True)
class NoiseSpec:
    """Sample-and-hold bounded uniform noise on the feedback channel.

    eta is the half-width of the uniform draws (rad/s); hold_dt is the
    interval between fresh draws and must not be below the integration step.
    Field noise uses two independent streams; gain noise a single one.
    """

    kind: str = FIELD
    eta: float = 0.0
    hold_dt: float = 5e-4
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (FIELD, GAIN):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")

    def sample_arrays(self, nsteps: int, dt: float):
        """Per-integration-step (l, g, s) values, held over hold_dt."""
        if self.hold_dt < dt - 1e-15:
            raise ValueError("hold_dt must be >= integration dt")
        hold = max(1, int(round(self.hold_dt / dt)))
        ndraws = -(-nsteps // hold)
        rng = np.random.default_rng(self.seed)
        zero = np.zeros(nsteps)
        if self.eta == 0.0:
            return zero, zero.copy(), zero.copy()
        if self.kind == FIELD:
            l = np.repeat(rng.uniform(-self.eta, self.eta, ndraws), hold)[:nsteps]
            g = np.repeat(rng.uniform(-self.eta, self.eta, ndraws), hold)[:nsteps]
            return l, g, zero
        s = np.repeat(rng.uniform(-self.eta, self.eta, ndraws), hold)[:nsteps]
        return zero, zero.copy(), s


def noisy_feedback(avg: AveragePolarization, alpha: float, noise_sample):
    """Effective transverse feedback terms (fx, fy) with a held noise sample.

    noise_sample is an (l, g, s) triple; the gyromagnetic ratio cancels in
    the equations of motion, so the terms are returned as rates directly.
    """
    l, g, s = noise_sample
    return (alpha + s) * avg.px + l, (alpha + s) * avg.py + g


def r_metric(spec0: Spectrum, spec_eta: Spectrum) -> float:
    """Normalized spectral overlap of two amplitude spectra (DC excluded).

    Trapezoidal integration over the shared single-sided band; bounded in
    [0, 1] by Cauchy-Schwarz, with 1 iff the spectra are proportional.
    """
    if spec0.freqs.shape != spec_eta.freqs.shape or \
            not np.allclose(spec0.freqs, spec_eta.freqs, rtol=0, atol=1e-12):
        raise ValueError("spectra must share one frequency grid")
    f = spec0.freqs[1:]
    a = spec0.amps[1:]
    b = spec_eta.amps[1:]
    num = np.trapezoid(np.abs(a * b), f)
    den = np.sqrt(np.trapezoid(a * a, f) * np.trapezoid(b * b, f))
    return float(num / den) if den > 0 else 0.0


@dataclass
class RobustnessResult:
    eta: float
    r_mean: float
    r_std: float
    n_runs: int
    n_failed: int = 0


def _windowed_spectrum(traj: Trajectory, transient: float, n_fft: int) -> Spectrum:
    w = traj.after(transient)
    if len(w.px) < n_fft:
        raise ValueError("trajectory too short for the requested FFT window")
    return spectrum(w.px[-n_fft:], w.sample_dt, min_len=n_fft)


def robustness_curve(params: PhysicalParams, dist: FrequencyDistribution,
                     cfg: IntegrationConfig, kind: str, etas,
                     n_runs: int = 50, seed: int = 0, m: int = 81,
                     n_fft: int = 2 ** 14, progress=None):
    """Mean and spread of the overlap metric over noise-seed ensembles.

    One noise-free base run per parameter point; for each eta, n_runs
    independently seeded noisy runs.  Runs that blow up are excluded and
    counted, never imputed.  Returns a list of RobustnessResult.
    """
    base = simulate(params, dist, cfg, m=m, keep_final_state=False)
    spec0 = _windowed_spectrum(base, cfg.transient, n_fft)

    results = []
    for i_eta, eta in enumerate(etas):
        rs = []
        failed = 0
        for run in range(n_runs):
            noise = NoiseSpec(kind=kind, eta=float(eta), hold_dt=cfg.dt,
                              seed=seed + 10_000 * i_eta + run)
            if eta == 0.0:
                rs.append(r_metric(spec0, spec0))
                continue
            try:
                traj = simulate(params, dist, cfg, m=m, noise=noise,
                                keep_final_state=False)
            except BlowUpError:
                failed += 1
                continue
            rs.append(r_metric(spec0, _windowed_spectrum(traj, cfg.transient, n_fft)))
            if progress is not None:
                progress(eta, run)
        rs = np.asarray(rs)
        results.append(RobustnessResult(
            float(eta),
            float(rs.mean()) if rs.size else np.nan,
            float(rs.std(ddof=1)) if rs.size > 1 else 0.0,
            int(rs.size), failed))
    return results


def robust_extent(results) -> float:
    """Largest eta whose mean overlap stays above the 1/e threshold."""
    ok = [r.eta for r in results if np.isfinite(r.r_mean) and r.r_mean > INV_E]
    return max(ok) if ok else 0.0
