"""Phase-diagram sweeps over the (alpha/alpha_c, eps*T2) plane.

Each grid cell runs simulate -> analyze -> classify independently, alongside
the analytic no-signal threshold side and the limit-cycle stability verdict.
Completed cells stream to an append-only JSONL file and are skipped on
restart, so a killed sweep resumes to the same final result.  Cell seeds are
derived deterministically from (base seed, i, j), making parallelism 1 and N
equivalent.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from time import perf_counter

import numpy as np

from .analysis import NO_SIGNAL, analyze_and_classify
from .integrate import IntegrationConfig
from .limitcycle import NoSolution, solve
from .model import PhysicalParams, Root, Uniform
from .stability import limit_cycle_stable, no_signal_threshold

DEFAULT_ALPHA_RATIOS = tuple(np.arange(0.5, 8.51, 0.5))
DEFAULT_EPS_T2 = (0.1,) + tuple(np.arange(0.5, 8.01, 0.5))


@dataclass(frozen=True)
class SweepGrid:
    alpha_ratios: tuple = DEFAULT_ALPHA_RATIOS
    eps_t2: tuple = DEFAULT_EPS_T2
    dist_kind: str = "uniform"

    def __post_init__(self):
        for name in ("alpha_ratios", "eps_t2"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be nonempty and ascending")
            object.__setattr__(self, name, vals)
        if self.dist_kind not in ("uniform", "root"):
            raise ValueError("dist_kind must be 'uniform' or 'root'")


@dataclass
class SweepCell:
    i: int
    j: int
    alpha_ratio: float
    eps_t2: float
    label: str | None = None
    omega_s: float | None = None
    evidence: dict = field(default_factory=dict)
    analytic: dict = field(default_factory=dict)
    runtime: float = 0.0
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SweepCell":
        return cls(**json.loads(line))


def cell_seed(base_seed: int, i: int, j: int) -> int:
    return (base_seed + 1_000_003 * (i + 1) + 997 * (j + 1)) % (2 ** 63)


def make_distribution(kind: str, eps_t2: float, t2: float, omega_c: float):
    eps = eps_t2 / t2
    return Uniform(omega_c, eps) if kind == "uniform" else Root(omega_c, eps)


def _compute_cell(task: dict) -> SweepCell:
    """Fully compute one grid cell (runs inside a worker process)."""
    cell = SweepCell(task["i"], task["j"], task["alpha_ratio"], task["eps_t2"])
    t0 = perf_counter()
    try:
        base = PhysicalParams(**task["params"], alpha=0.0)
        params = base.with_alpha(task["alpha_ratio"] * base.alpha_c)
        dist = make_distribution(task["dist_kind"], task["eps_t2"],
                                 base.t2, task["omega_c"])
        cfg = IntegrationConfig(**task["cfg"],
                                seed=cell_seed(task["seed"], task["i"], task["j"]))
        label, _w, _spec, _sec, lyap = analyze_and_classify(
            params, dist, cfg, m=task["m"], n_fft=task["n_fft"],
            lyap_tau=task["lyap_tau"], lyap_k=task["lyap_k"],
            lyap_transient=task["lyap_transient"])
        cell.label = label.kind
        cell.omega_s = label.omega_s
        cell.evidence = {k: (float(v) if np.isscalar(v) else v)
                         for k, v in label.evidence.items()}
        if label.unclassified:
            cell.evidence["unclassified"] = True

        alpha_th, _ = no_signal_threshold(params, dist)
        cell.analytic["no_signal_threshold_ratio"] = alpha_th / base.alpha_c
        cell.analytic["above_no_signal_threshold"] = bool(params.alpha > alpha_th)
        sol = solve(params, dist)
        if isinstance(sol, NoSolution):
            cell.analytic["lc_exists"] = False
        else:
            cell.analytic["lc_exists"] = True
            cell.analytic["lc_omega_s"] = sol.omega_s
            cell.analytic["lc_amp"] = sol.amp
            verdict = limit_cycle_stable(params, dist, sol, m=task["m"])
            cell.analytic["lc_stable"] = verdict.stable
            cell.analytic["lc_method"] = verdict.method
    except Exception as exc:  # per-cell failures recorded, sweep continues
        cell.error = f"{type(exc).__name__}: {exc}"
    cell.runtime = perf_counter() - t0
    return cell


def load_cells(path) -> dict:
    """Completed cells from a JSONL file, keyed by (i, j)."""
    done = {}
    if os.path.exists(path):
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line:
                    c = SweepCell.from_json(line)
                    done[(c.i, c.j)] = c
    return done


def run_sweep(grid: SweepGrid, params: PhysicalParams | dict,
              omega_c: float, out_path,
              cfg: dict | None = None, parallelism: int = 1,
              seed: int = 0, m: int = 81, n_fft: int = 2 ** 14,
              lyap_tau: float = 0.5, lyap_k: int = 600,
              lyap_transient: float = 150.0,
              fsync_every: int = 8, progress=None) -> list:
    """Compute every grid cell once; resume from out_path if it exists.

    params carries t1/t2/p0 (its alpha is ignored; each cell sets its own
    from alpha_ratio).  cfg overrides IntegrationConfig fields; the sweep
    default trades duration for resolution suited to phase labeling.
    """
    if isinstance(params, PhysicalParams):
        params = {"t1": params.t1, "t2": params.t2, "p0": params.p0}
    cfg_fields = {"dt": 5e-4, "t_end": 430.0, "transient": 330.0,
                  "record_every": 10}
    cfg_fields.update(cfg or {})

    done = load_cells(out_path)
    tasks = []
    for i, ar in enumerate(grid.alpha_ratios):
        for j, et in enumerate(grid.eps_t2):
            if (i, j) in done:
                continue
            tasks.append({
                "i": i, "j": j, "alpha_ratio": ar, "eps_t2": et,
                "params": params, "omega_c": omega_c, "seed": seed, "m": m,
                "dist_kind": grid.dist_kind, "cfg": cfg_fields, "n_fft": n_fft,
                "lyap_tau": lyap_tau, "lyap_k": lyap_k,
                "lyap_transient": lyap_transient,
            })

    def emit(f, cell, counter):
        f.write(cell.to_json() + "\n")
        f.flush()
        if counter % fsync_every == 0:
            os.fsync(f.fileno())
        done[(cell.i, cell.j)] = cell
        if progress is not None:
            progress(cell)

    with open(out_path, "a") as f:
        if parallelism <= 1:
            for n, task in enumerate(tasks, 1):
                emit(f, _compute_cell(task), n)
        else:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                for n, cell in enumerate(pool.map(_compute_cell, tasks), 1):
                    emit(f, cell, n)
        f.flush()
        os.fsync(f.fileno())

    return [done[(i, j)]
            for i in range(len(grid.alpha_ratios))
            for j in range(len(grid.eps_t2))
            if (i, j) in done]


def extract_boundaries(cells, grid: SweepGrid):
    """Numeric phase boundaries plus the analytic overlay curves.

    Numeric: midpoints of adjacent cell pairs with different labels, grouped
    by unordered label pair; cells with errors leave holes marked uncertain.
    Analytic: the closed-form-free no-signal threshold curve and the
    limit-cycle stability change, sampled on the grid's eps values.
    """
    by_ij = {(c.i, c.j): c for c in cells}
    ni, nj = len(grid.alpha_ratios), len(grid.eps_t2)
    boundaries: dict = {}
    uncertain = []

    def visit(a, b, pa, pb):
        if a is None or b is None or a.error or b.error or \
                a.label is None or b.label is None:
            uncertain.append((pa + pb) / 2 if a is None or b is None else
                             np.array([(a.alpha_ratio + b.alpha_ratio) / 2,
                                       (a.eps_t2 + b.eps_t2) / 2]))
            return
        if a.label != b.label:
            key = tuple(sorted((a.label, b.label)))
            boundaries.setdefault(key, []).append(
                ((a.alpha_ratio + b.alpha_ratio) / 2,
                 (a.eps_t2 + b.eps_t2) / 2))

    for i in range(ni):
        for j in range(nj):
            c = by_ij.get((i, j))
            here = np.array([grid.alpha_ratios[i], grid.eps_t2[j]])
            if i + 1 < ni:
                nxt = np.array([grid.alpha_ratios[i + 1], grid.eps_t2[j]])
                visit(c, by_ij.get((i + 1, j)), here, nxt)
            if j + 1 < nj:
                nxt = np.array([grid.alpha_ratios[i], grid.eps_t2[j + 1]])
                visit(c, by_ij.get((i, j + 1)), here, nxt)

    analytic = {"no_signal": [], "lc_stability": []}
    for j, et in enumerate(grid.eps_t2):
        col = [by_ij.get((i, j)) for i in range(ni)]
        th = next((c.analytic.get("no_signal_threshold_ratio") for c in col
                   if c is not None and c.analytic), None)
        if th is not None:
            analytic["no_signal"].append((th, et))
        prev = None
        for c in col:
            if c is None or not c.analytic.get("lc_exists"):
                continue
            cur = c.analytic.get("lc_stable")
            if prev is not None and cur is not None and cur != prev[1]:
                analytic["lc_stability"].append(
                    ((c.alpha_ratio + prev[0]) / 2, et))
            prev = (c.alpha_ratio, cur)

    return {"numeric": {f"{a}|{b}": pts for (a, b), pts in boundaries.items()},
            "analytic": analytic,
            "uncertain": [tuple(map(float, u)) for u in uncertain]}
