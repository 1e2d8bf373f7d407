"""Command-line entry point.

Physics comes from a strict JSON config (archivable, hashable); flags
override config fields.  Every output file embeds a metadata header with the
package version, seed and config hash.  Exit codes: 0 success, 1 domain
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    InsufficientDataError,
    analyze_and_classify,
    dominant_frequency,
    lyapunov,
    poincare,
    spectrum,
)
from .integrate import (
    BlowUpError,
    IntegrationConfig,
    save_state,
    simulate,
)
from .limitcycle import ConvergenceError, NoSolution, profile, solve
from .model import (
    DEFAULT_OMEGA_C,
    DEFAULT_PARAMS,
    DiracComb,
    PhysicalParams,
    Root,
    Tabulated,
    Uniform,
    discretize,
    support,
)
from .robustness import robust_extent, robustness_curve
from .stability import limit_cycle_stable, no_signal_threshold
from .sweep import SweepGrid, extract_boundaries, load_cells, run_sweep

TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    """Schema violation in a run configuration."""


@dataclass
class RunConfig:
    params: PhysicalParams
    distribution: object
    integration: IntegrationConfig
    m: int
    seed: int
    output_dir: str
    resolved: dict  # fully-defaulted semantic fields, hash input

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.resolved, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


_PARAM_KEYS = {"t1_s", "t2_s", "p0", "alpha", "alpha_ratio"}
_DIST_KEYS = {"kind", "center_hz", "width_per_t2", "width_hz",
              "freqs_hz", "weights", "grid_hz", "density"}
_INT_KEYS = {"dt_s", "t_end_s", "record_every", "transient_s", "frame",
             "tilt", "tilt_phase"}
_TOP_KEYS = {"params", "distribution", "integration", "m", "seed", "output_dir"}


def _reject_unknown(obj: dict, allowed: set, path: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _require_number(obj, key, path, positive=False, default=None):
    val = obj.get(key, default)
    if val is None:
        return None
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    if positive and val <= 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {val!r}")
    return float(val)


def parse_config(text: str) -> RunConfig:
    """Validate and fully default a JSON run configuration (strict mode)."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "$")

    p = raw.get("params", {})
    if not isinstance(p, dict):
        raise ConfigError("$.params: expected an object")
    _reject_unknown(p, _PARAM_KEYS, "$.params")
    t1 = _require_number(p, "t1_s", "$.params", positive=True,
                         default=DEFAULT_PARAMS["t1"])
    t2 = _require_number(p, "t2_s", "$.params", positive=True,
                         default=DEFAULT_PARAMS["t2"])
    p0 = _require_number(p, "p0", "$.params", positive=True,
                         default=DEFAULT_PARAMS["p0"])
    if p0 > 1.0:
        raise ConfigError(f"$.params.p0: must be <= 1, got {p0}")
    alpha = _require_number(p, "alpha", "$.params")
    ratio = _require_number(p, "alpha_ratio", "$.params")
    if alpha is not None and ratio is not None:
        raise ConfigError("$.params: give alpha or alpha_ratio, not both")
    alpha_c = 1.0 / (t2 * p0)
    if alpha is None:
        alpha = (ratio if ratio is not None else 4.0) * alpha_c
    if alpha < 0:
        raise ConfigError(f"$.params.alpha: must be >= 0, got {alpha}")
    params = PhysicalParams(t1, t2, p0, alpha)

    d = raw.get("distribution", {})
    if not isinstance(d, dict):
        raise ConfigError("$.distribution: expected an object")
    _reject_unknown(d, _DIST_KEYS, "$.distribution")
    kind = d.get("kind", "uniform")
    center = TWO_PI * _require_number(d, "center_hz", "$.distribution",
                                      default=DEFAULT_OMEGA_C / TWO_PI)
    if kind in ("uniform", "root"):
        w_t2 = _require_number(d, "width_per_t2", "$.distribution")
        w_hz = _require_number(d, "width_hz", "$.distribution")
        if w_t2 is not None and w_hz is not None:
            raise ConfigError("$.distribution: give width_per_t2 or width_hz, not both")
        if w_hz is not None:
            width = TWO_PI * w_hz
        else:
            width = (w_t2 if w_t2 is not None else 1.0) / t2
        dist = Uniform(center, width) if kind == "uniform" else Root(center, width)
    elif kind == "dirac-comb":
        freqs = d.get("freqs_hz")
        if not isinstance(freqs, list) or not freqs:
            raise ConfigError("$.distribution.freqs_hz: required list for dirac-comb")
        weights = d.get("weights", [1.0 / len(freqs)] * len(freqs))
        try:
            dist = DiracComb(tuple(TWO_PI * f for f in freqs), tuple(weights))
        except ValueError as exc:
            raise ConfigError(f"$.distribution: {exc}") from exc
    elif kind == "tabulated":
        grid = d.get("grid_hz")
        dens = d.get("density")
        if not isinstance(grid, list) or not isinstance(dens, list):
            raise ConfigError("$.distribution: tabulated needs grid_hz and density lists")
        try:
            dist = Tabulated(tuple(TWO_PI * g for g in grid),
                             tuple(v / TWO_PI for v in dens))
        except ValueError as exc:
            raise ConfigError(f"$.distribution: {exc}") from exc
    else:
        raise ConfigError(f"$.distribution.kind: unknown kind {kind!r}")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"$.seed: expected an integer, got {seed!r}")

    i = raw.get("integration", {})
    if not isinstance(i, dict):
        raise ConfigError("$.integration: expected an object")
    _reject_unknown(i, _INT_KEYS, "$.integration")
    frame = i.get("frame", "lab")
    rotating_omega = None
    if isinstance(frame, dict):
        _reject_unknown(frame, {"rotating_hz"}, "$.integration.frame")
        rotating_omega = TWO_PI * _require_number(frame, "rotating_hz",
                                                  "$.integration.frame")
        if rotating_omega is None:
            raise ConfigError("$.integration.frame.rotating_hz: required")
    elif frame != "lab":
        raise ConfigError(f"$.integration.frame: 'lab' or {{'rotating_hz': f}}, got {frame!r}")
    record_every = i.get("record_every", 10)
    if not isinstance(record_every, int) or record_every < 1:
        raise ConfigError(f"$.integration.record_every: positive integer, got {record_every!r}")
    try:
        integration = IntegrationConfig(
            dt=_require_number(i, "dt_s", "$.integration", positive=True, default=5e-4),
            t_end=_require_number(i, "t_end_s", "$.integration", positive=True, default=800.0),
            record_every=record_every,
            transient=_require_number(i, "transient_s", "$.integration", default=300.0),
            rotating_omega=rotating_omega,
            tilt=_require_number(i, "tilt", "$.integration", default=0.01),
            tilt_phase=_require_number(i, "tilt_phase", "$.integration"),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"$.integration: {exc}") from exc

    m = raw.get("m", 81)
    if not isinstance(m, int) or m < 1:
        raise ConfigError(f"$.m: positive integer, got {m!r}")
    output_dir = raw.get("output_dir", ".")
    if not isinstance(output_dir, str):
        raise ConfigError(f"$.output_dir: expected a string, got {output_dir!r}")

    resolved = {
        "params": {"t1_s": t1, "t2_s": t2, "p0": p0, "alpha": alpha},
        "distribution": _dist_resolved(dist),
        "integration": {
            "dt_s": integration.dt, "t_end_s": integration.t_end,
            "record_every": integration.record_every,
            "transient_s": integration.transient,
            "rotating_omega": rotating_omega,
            "tilt": integration.tilt, "tilt_phase": integration.tilt_phase,
        },
        "m": m,
        "seed": seed,
    }
    return RunConfig(params, dist, integration, m, seed, output_dir, resolved)


def _dist_resolved(dist) -> dict:
    if isinstance(dist, Uniform):
        return {"kind": "uniform", "center": dist.center, "width": dist.width}
    if isinstance(dist, Root):
        return {"kind": "root", "center": dist.center, "width": dist.width}
    if isinstance(dist, DiracComb):
        return {"kind": "dirac-comb", "freqs": list(dist.freqs),
                "weights": list(dist.weights)}
    return {"kind": "tabulated", "grid": list(dist.grid),
            "density": list(dist.density)}


def _load_config(args) -> RunConfig:
    text = "{}"
    if args.config:
        with open(args.config) as f:
            text = f.read()
    cfg = parse_config(text)
    # flag overrides rebuild the config through the same validation path
    raw = json.loads(text) if text.strip() else {}
    changed = False
    if getattr(args, "alpha_ratio", None) is not None:
        raw.setdefault("params", {}).pop("alpha", None)
        raw["params"]["alpha_ratio"] = args.alpha_ratio
        changed = True
    if getattr(args, "eps_t2", None) is not None:
        dd = raw.setdefault("distribution", {})
        dd.pop("width_hz", None)
        dd["width_per_t2"] = args.eps_t2
        changed = True
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
        changed = True
    if getattr(args, "t_end", None) is not None:
        raw.setdefault("integration", {})["t_end_s"] = args.t_end
        changed = True
    if getattr(args, "m", None) is not None:
        raw["m"] = args.m
        changed = True
    if changed:
        cfg = parse_config(json.dumps(raw))
    return cfg


def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "seed": cfg.seed,
            "config_hash": cfg.config_hash}


def _meta_lines(cfg: RunConfig):
    m = _meta(cfg)
    return [f"{k}: {v}" for k, v in m.items()]


def _write_json(path, payload, cfg):
    payload = {"meta": _meta(cfg), **payload}
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    print(json.dumps(payload, sort_keys=True))


def _out(cfg, name):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _svg_line(path, xs, ys, xlabel, ylabel, scatter=False):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if scatter:
        ax.plot(xs, ys, ".", ms=2)
    else:
        ax.plot(xs, ys, lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    traj = simulate(cfg.params, cfg.distribution, cfg.integration, m=cfg.m)
    csv_path = _out(cfg, "trajectory.csv")
    traj.to_csv(csv_path, header_comments=_meta_lines(cfg))
    if args.state_out:
        save_state(_out(cfg, args.state_out), traj.final_state)
    _write_json(_out(cfg, "simulate.json"), {
        "trajectory_csv": csv_path,
        "frame": traj.meta["frame"],
        "n_samples": len(traj.times),
        "final_amp": float(abs(traj.p_t[-1])),
    }, cfg)
    return 0


def cmd_limit_cycle(args) -> int:
    cfg = _load_config(args)
    sol = solve(cfg.params, cfg.distribution)
    if isinstance(sol, NoSolution):
        _write_json(_out(cfg, "limit_cycle.json"),
                    {"solution": None, "reason": sol.reason}, cfg)
        return 0
    lo, hi = support(cfg.distribution)
    grid = np.linspace(lo, hi, 401)
    p_t, p_z = profile(sol, cfg.params, grid)
    prof_path = _out(cfg, "limit_cycle_profile.csv")
    with open(prof_path, "w") as f:
        for line in _meta_lines(cfg):
            f.write(f"# {line}\n")
        f.write("omega_hz,RePT,ImPT,Pz\n")
        for om, pt, pz in zip(grid, p_t, p_z):
            f.write(f"{om / TWO_PI:.10g},{pt.real:.12g},{pt.imag:.12g},{pz:.12g}\n")
    _write_json(_out(cfg, "limit_cycle.json"), {
        "omega_s_hz": sol.omega_s / TWO_PI,
        "amp": sol.amp,
        "amp2": sol.amp2,
        "residuals": list(sol.residuals),
        "profile_csv_path": prof_path,
    }, cfg)
    return 0


def cmd_stability(args) -> int:
    cfg = _load_config(args)
    alpha_th, onset = no_signal_threshold(cfg.params, cfg.distribution)
    sol = solve(cfg.params, cfg.distribution)
    payload = {
        "no_signal_threshold_alpha": alpha_th,
        "no_signal_threshold_ratio": alpha_th * cfg.params.t2 * cfg.params.p0,
        "onset_frequency_hz": onset / TWO_PI,
    }
    if isinstance(sol, NoSolution):
        payload.update({"stable": False, "limit_cycle": None})
    else:
        verdict = limit_cycle_stable(cfg.params, cfg.distribution, sol, m=cfg.m)
        payload.update({
            "stable": verdict.stable,
            "leading_beta_re": verdict.leading_beta.real,
            "leading_beta_im": verdict.leading_beta.imag,
            "method": verdict.method,
            "zero_mode_residual": verdict.zero_mode_check,
            "omega_s_hz": sol.omega_s / TWO_PI,
        })
    _write_json(_out(cfg, "stability.json"), payload, cfg)
    return 0


def _window(cfg: RunConfig, n_fft: int):
    traj = simulate(cfg.params, cfg.distribution, cfg.integration, m=cfg.m)
    w = traj.after(cfg.integration.transient)
    if len(w.px) > n_fft:
        from .integrate import Trajectory
        w = Trajectory(w.times[-n_fft:], w.px[-n_fft:], w.py[-n_fft:],
                       w.pz[-n_fft:], w.sample_dt, traj.final_state, traj.meta)
    return w


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    w = _window(cfg, args.n_fft)
    spec = spectrum(w.px, w.sample_dt, min_len=min(2 ** 14, len(w.px)))
    path = _out(cfg, "spectrum.csv")
    with open(path, "w") as f:
        for line in _meta_lines(cfg):
            f.write(f"# {line}\n")
        f.write("f_hz,amp\n")
        for fz, a in zip(spec.freqs, spec.amps):
            f.write(f"{fz:.10g},{a:.12g}\n")
    if args.svg:
        _svg_line(_out(cfg, "spectrum.svg"), spec.freqs, spec.amps,
                  "f (Hz)", "|FFT| amplitude")
    _write_json(_out(cfg, "spectrum.json"), {
        "peak_hz": dominant_frequency(spec),
        "resolution_hz": spec.resolution,
        "csv": path,
    }, cfg)
    return 0


def cmd_poincare(args) -> int:
    cfg = _load_config(args)
    w = _window(cfg, args.n_fft)
    sec = poincare(w, direction=args.direction)
    path = _out(cfg, "poincare.csv")
    with open(path, "w") as f:
        for line in _meta_lines(cfg):
            f.write(f"# {line}\n")
        f.write("Px,Pz\n")
        for x, z in sec.points:
            f.write(f"{x:.12g},{z:.12g}\n")
    if args.svg:
        _svg_line(_out(cfg, "poincare.svg"), sec.points[:, 0], sec.points[:, 1],
                  "Px", "Pz", scatter=True)
    _write_json(_out(cfg, "poincare.json"),
                {"n_points": len(sec.points), "csv": path}, cfg)
    return 0


def cmd_lyapunov(args) -> int:
    cfg = _load_config(args)
    res = lyapunov(cfg.params, cfg.distribution, cfg.integration,
                   tau=args.tau, k=args.k, transient=args.transient, m=cfg.m)
    _write_json(_out(cfg, "lyapunov.json"), {
        "lambda_per_s": res.lam,
        "stderr": res.stderr,
        "k": res.k,
        "tau_s": res.tau,
    }, cfg)
    return 0


def cmd_classify(args) -> int:
    cfg = _load_config(args)
    label, w, spec, sec, lyap = analyze_and_classify(
        cfg.params, cfg.distribution, cfg.integration, m=cfg.m,
        n_fft=args.n_fft, lyap_tau=args.tau, lyap_k=args.k,
        lyap_transient=args.transient)
    _write_json(_out(cfg, "classify.json"), {
        "label": label.kind,
        "omega_s_hz": None if label.omega_s is None else label.omega_s / TWO_PI,
        "unclassified": label.unclassified,
        "evidence": {k: v for k, v in label.evidence.items()},
    }, cfg)
    return 0


def cmd_robustness(args) -> int:
    cfg = _load_config(args)
    results = robustness_curve(cfg.params, cfg.distribution, cfg.integration,
                               args.kind, args.etas, n_runs=args.runs,
                               seed=cfg.seed, m=cfg.m, n_fft=args.n_fft)
    path = _out(cfg, "robustness.csv")
    with open(path, "w") as f:
        for line in _meta_lines(cfg):
            f.write(f"# {line}\n")
        f.write("eta,r_mean,r_std,n_ok\n")
        for r in results:
            f.write(f"{r.eta:.10g},{r.r_mean:.10g},{r.r_std:.10g},{r.n_runs}\n")
    _write_json(_out(cfg, "robustness.json"), {
        "kind": args.kind,
        "robust_extent_eta": robust_extent(results),
        "csv": path,
    }, cfg)
    return 0


LABEL_COLORS = {"no_signal": "#d9d9d9", "limit_cycle": "#2b8cbe",
                "quasi_periodic": "#fdae61", "chaos": "#d7191c"}


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    grid = SweepGrid(dist_kind=args.dist)
    if args.alpha_ratios:
        grid = SweepGrid(tuple(args.alpha_ratios), grid.eps_t2, args.dist)
    if args.eps_t2_list:
        grid = SweepGrid(grid.alpha_ratios, tuple(args.eps_t2_list), args.dist)
    os.makedirs(cfg.output_dir, exist_ok=True)
    cells_path = _out(cfg, "cells.jsonl")
    threads = args.threads or int(os.environ.get("MASERLAB_THREADS",
                                                 os.cpu_count() or 1))
    if isinstance(cfg.distribution, (Uniform, Root)):
        omega_c = cfg.distribution.center
    else:
        lo, hi = support(cfg.distribution)
        omega_c = 0.5 * (lo + hi)
    cells = run_sweep(grid, cfg.params, omega_c, cells_path,
                      parallelism=threads, seed=cfg.seed, m=cfg.m)
    bounds = extract_boundaries(cells, grid)
    bpath = _out(cfg, "boundaries.csv")
    with open(bpath, "w") as f:
        for line in _meta_lines(cfg):
            f.write(f"# {line}\n")
        f.write("kind,alpha_ratio,eps_t2\n")
        for key, pts in bounds["numeric"].items():
            for a, e in pts:
                f.write(f"{key},{a:.10g},{e:.10g}\n")
        for key, pts in bounds["analytic"].items():
            for a, e in pts:
                f.write(f"analytic:{key},{a:.10g},{e:.10g}\n")
    _plot_diagram(_out(cfg, "diagram.svg"), cells, grid)
    _write_json(_out(cfg, "sweep.json"), {
        "cells_jsonl": cells_path,
        "boundaries_csv": bpath,
        "n_cells": len(cells),
        "n_errors": sum(1 for c in cells if c.error),
    }, cfg)
    return 0


def _plot_diagram(path, cells, grid):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5.5, 4))
    lc = [c for c in cells if c.label == "limit_cycle" and c.omega_s]
    ws = [c.omega_s for c in lc]
    lo, hi = (min(ws), max(ws)) if ws else (0.0, 1.0)
    for c in cells:
        color = LABEL_COLORS.get(c.label, "#ffffff")
        if c.label == "limit_cycle" and c.omega_s and hi > lo:
            shade = 0.4 + 0.6 * (c.omega_s - lo) / (hi - lo)
            color = (0.17 * shade, 0.55 * shade, 0.75 * shade)
        ax.scatter([c.eps_t2], [c.alpha_ratio], c=[color], marker="s", s=45)
    ax.set_xlabel(r"$\epsilon T_2$")
    ax.set_ylabel(r"$\alpha/\alpha_c$")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinmaser",
                                 description="Feedback spin-ensemble dynamics toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, n_fft_default=2 ** 16):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--alpha-ratio", type=float, dest="alpha_ratio")
        sp.add_argument("--eps-t2", type=float, dest="eps_t2")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--t-end", type=float, dest="t_end")
        sp.add_argument("--m", type=int)
        sp.add_argument("--n-fft", type=int, dest="n_fft", default=n_fft_default)

    sp = sub.add_parser("simulate", help="integrate and export the trajectory")
    common(sp)
    sp.add_argument("--state-out", help="binary final-state checkpoint filename")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("limit-cycle", help="solve the self-consistency conditions")
    common(sp)
    sp.set_defaults(func=cmd_limit_cycle)

    sp = sub.add_parser("stability", help="limit-cycle and no-signal stability")
    common(sp)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("spectrum", help="single-sided FFT amplitude of Px")
    common(sp)
    sp.add_argument("--svg", action="store_true")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("poincare", help="section of the trajectory at Py=0")
    common(sp)
    sp.add_argument("--direction", type=int, default=1, choices=(1, -1))
    sp.add_argument("--svg", action="store_true")
    sp.set_defaults(func=cmd_poincare)

    sp = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    common(sp)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--k", type=int, default=2000)
    sp.add_argument("--transient", type=float, default=200.0)
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("classify", help="label the stable dynamics")
    common(sp)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--k", type=int, default=2000)
    sp.add_argument("--transient", type=float, default=200.0)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("robustness", help="noise-robustness curve")
    common(sp, n_fft_default=2 ** 14)
    sp.add_argument("--kind", choices=("field", "gain"), default="field")
    sp.add_argument("--etas", type=float, nargs="+", required=True)
    sp.add_argument("--runs", type=int, default=50)
    sp.set_defaults(func=cmd_robustness)

    sp = sub.add_parser("sweep", help="phase-diagram sweep")
    common(sp)
    sp.add_argument("--dist", choices=("uniform", "root"), default="uniform")
    sp.add_argument("--alpha-ratios", type=float, nargs="+", dest="alpha_ratios")
    sp.add_argument("--eps-t2-list", type=float, nargs="+", dest="eps_t2_list")
    sp.add_argument("--threads", type=int)
    sp.set_defaults(func=cmd_sweep)

    return ap


def dispatch(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError, BlowUpError, ConvergenceError,
            InsufficientDataError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
