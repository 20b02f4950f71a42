"""Eps-sweeps with coupled beta and error tables against a reference run.

Errors are measured on a space-time window ``[t0, t1] x [x0, x1]``; by
default ``[0.1 T, T]`` times the whole torus.  Time integrals use the
trapezoid rule over the saved states inside the window.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import BlowUp, IncompatibleWindows
from .estimates import (AuditReport, audit_regularized, bounded_by_median, _jsonable)
from .limit import fv_simulate, kruzhkov_levels, entropy_residual
from .nonlocal_terms import make_initial_data, profile_samples
from .regularized import Coupling, RegParams, Trajectory, simulate
from .spectral import Grid, antiderivative_array, make_grid, resample

NORMS = ("u_l1", "u_l2", "P_linf", "P_l2", "Px_linf")


@dataclass(frozen=True)
class Window:
    t0: float
    t1: float
    x0: float = 0.0
    x1: Optional[float] = None

    def area(self, L: float) -> float:
        x1 = L if self.x1 is None else self.x1
        return (self.t1 - self.t0) * (x1 - self.x0)


def _check_window(traj: Trajectory, w: Window):
    tol = 1e-9 * max(1.0, abs(traj.times[-1]))
    L = traj.grid.length
    x1 = L if w.x1 is None else w.x1
    if not (w.t0 < w.t1 and w.x0 < x1):
        raise IncompatibleWindows(f"empty window {w}")
    if w.t0 < traj.times[0] - tol or w.t1 > traj.times[-1] + tol:
        raise IncompatibleWindows(
            f"time window [{w.t0}, {w.t1}] exceeds saved range [{traj.times[0]}, {traj.times[-1]}]")
    if w.x0 < -1e-12 or x1 > L + 1e-12:
        raise IncompatibleWindows(f"space window [{w.x0}, {x1}] exceeds torus [0, {L}]")


def _interp_rows(times, rows, t_new):
    """Linear interpolation in time of saved rows."""
    j = np.clip(np.searchsorted(times, t_new, side="right") - 1, 0, len(times) - 2)
    h = times[j + 1] - times[j]
    th = np.where(h > 0, (t_new - times[j]) / np.where(h > 0, h, 1.0), 0.0)
    exact = np.isclose(t_new, times[j + 1], rtol=0, atol=1e-12)
    th = np.where(exact, 1.0, th)
    return (1 - th)[:, None] * rows[j] + th[:, None] * rows[j + 1]


def compare_trajectories(a: Trajectory, b: Trajectory, window: Window, norms=NORMS) -> dict:
    """Errors between ``a`` and ``b`` on ``window``.

    The time nodes are those of ``a`` inside the window; ``b`` is linearly
    interpolated onto them when its save times differ.  When the grids differ,
    the coarser run is resampled spectrally onto the finer grid.
    """
    for tr in (a, b):
        _check_window(tr, window)
    if abs(a.grid.length - b.grid.length) > 1e-12 * a.grid.length:
        raise IncompatibleWindows("trajectories live on tori of different length")
    tol = 1e-9 * max(1.0, abs(a.times[-1]))
    m = (a.times >= window.t0 - tol) & (a.times <= window.t1 + tol)
    t = a.times[m]
    ua = a.u[m]
    if len(b.times) == len(a.times) and np.allclose(b.times, a.times, rtol=0, atol=tol):
        ub = b.u[m]
    else:
        ub = _interp_rows(b.times, b.u, t)
    grid = a.grid
    if a.grid.n < b.grid.n:
        ua, grid = resample(ua, b.grid.n), b.grid
    elif b.grid.n < a.grid.n:
        ub = resample(ub, a.grid.n)
    d = ua - ub
    x = grid.x
    x1 = grid.length if window.x1 is None else window.x1
    xm = (x >= window.x0 - 1e-12) & (x <= x1 + 1e-12)
    dx = grid.dx
    out = {}
    if len(t) == 0:
        raise IncompatibleWindows("no saved states inside the window")

    def tint(y):
        return float(np.trapezoid(y, t)) if len(t) > 1 else 0.0

    dw = d[:, xm]
    if "u_l1" in norms:
        out["u_l1"] = tint(dx * np.sum(np.abs(dw), axis=1))
    if "u_l2" in norms:
        out["u_l2"] = math.sqrt(max(0.0, tint(dx * np.sum(dw * dw, axis=1))))
    if "P_linf" in norms or "P_l2" in norms:
        # P is linear in u, so the error of P is the primitive of the u-error
        dP = antiderivative_array(d, grid, check=False)[:, xm]
        if "P_linf" in norms:
            out["P_linf"] = float(np.max(np.abs(dP))) if dP.size else 0.0
        if "P_l2" in norms:
            out["P_l2"] = math.sqrt(max(0.0, tint(dx * np.sum(dP * dP, axis=1))))
    if "Px_linf" in norms:
        out["Px_linf"] = float(np.max(np.abs(dw))) if dw.size else 0.0
    return out


# -- sweeps -------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    eps_list: tuple
    coupling: Coupling
    gamma: float
    T: float
    grid: Grid
    profile: str = "sine"
    reference: str = "self"
    save_every: Optional[float] = None
    safety: float = 0.4
    window: Optional[Window] = None
    min_ratio: float = 1.2
    dealias: bool = True

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if not eps or any(e <= 0 for e in eps):
            raise ValueError("eps_list must hold positive values")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.reference not in ("self", "limit"):
            raise ValueError(f"reference must be 'self' or 'limit', got {self.reference!r}")

    @property
    def resolved_window(self) -> Window:
        return self.window if self.window is not None else Window(0.1 * self.T, self.T)


@dataclass
class SweepRow:
    eps: float
    beta: float
    errors: Optional[dict]
    observed_order: Optional[float] = None
    blew_up: bool = False
    blowup_time: Optional[float] = None
    audit: Optional[AuditReport] = None

    def err(self, name):
        return None if self.errors is None else self.errors.get(name)


@dataclass
class ConvergenceTable:
    rows: list
    config: SweepConfig
    reference_label: str
    checks: dict = field(default_factory=dict)

    def column(self, name):
        return [r.err(name) for r in self.rows]

    @property
    def regime(self) -> str:
        return self.config.coupling.regime

    @property
    def regime_ok(self) -> bool:
        return self.regime != "outside"

    @property
    def C0_sup(self) -> Optional[float]:
        """Largest admissibility constant over the audited rows."""
        vals = [r.audit.summary["C0"] for r in self.rows if r.audit is not None]
        return max(vals) if vals else None

    @property
    def n_blown_up(self) -> int:
        return sum(r.blew_up for r in self.rows)

    def monotone_ok(self, min_ratio: Optional[float] = None) -> bool:
        """err_u_l1 strictly decreasing with ratio >= min_ratio; err_P_linf decreasing."""
        r = self.config.min_ratio if min_ratio is None else min_ratio
        alive = [row for row in self.rows if not row.blew_up]
        for a, b in zip(alive, alive[1:]):
            ea, eb = a.err("u_l1"), b.err("u_l1")
            if ea == eb == 0 and a.err("P_linf") == b.err("P_linf") == 0:
                continue    # identical runs, e.g. zero data
            if not (eb < ea and (eb == 0 or ea / eb >= r)):
                return False
            if not b.err("P_linf") < a.err("P_linf"):
                return False
        return True

    @property
    def passed(self) -> bool:
        return self.monotone_ok() and self.n_blown_up * 2 <= len(self.rows)

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "schema": "ostrovsky-lab/convergence-table/1",
            "config": {
                "eps_list": list(cfg.eps_list), "coupling": {"c": cfg.coupling.c, "p": cfg.coupling.p},
                "gamma": cfg.gamma, "T": cfg.T, "n": cfg.grid.n, "L": cfg.grid.length,
                "profile": cfg.profile, "reference": cfg.reference,
                "window": [cfg.resolved_window.t0, cfg.resolved_window.t1],
                "min_ratio": cfg.min_ratio,
            },
            "reference_label": self.reference_label,
            "regime": self.regime,
            "regime_ok": self.regime_ok,
            "monotone_ok": self.monotone_ok(),
            "checks": _jsonable(self.checks),
            "C0_sup": self.C0_sup,
            "rows": [
                {
                    "eps": r.eps, "beta": r.beta, "blew_up": r.blew_up, "blowup_time": r.blowup_time,
                    "errors": None if r.errors is None else {k: _jsonable(v) for k, v in r.errors.items()},
                    "observed_order": _jsonable(r.observed_order),
                    "audit": None if r.audit is None else r.audit.to_dict(),
                }
                for r in self.rows
            ],
        }

    # -- writers ------------------------------------------------------------------

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "beta", *("err_" + n for n in NORMS), "observed_order", "blew_up"])
            for r in self.rows:
                errs = ["" if r.err(n) is None else repr(float(r.err(n))) for n in NORMS]
                order = "" if r.observed_order is None or not math.isfinite(r.observed_order) \
                    else repr(r.observed_order)
                w.writerow([repr(r.eps), repr(r.beta), *errs, order, int(r.blew_up)])

    def write_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    def write_plot_files(self, directory, stem="err"):
        """One two-column ``eps err`` text file per norm, for gnuplot."""
        d = Path(directory)
        out = []
        for n in NORMS:
            p = d / f"{stem}_{n}.dat"
            with open(p, "w") as fh:
                fh.write(f"# eps err_{n}\n")
                for r in self.rows:
                    if r.err(n) is not None:
                        fh.write(f"{r.eps!r} {float(r.err(n))!r}\n")
            out.append(p)
        return out


def read_table_csv(path) -> list:
    """Rows of a table CSV as dicts of floats (None for empty cells)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    conv = lambda v: None if v == "" else float(v)  # noqa: E731
    return [{k: conv(v) for k, v in r.items()} for r in rows]


def _run_row(cfg: SweepConfig, eps: float):
    prm = RegParams.coupled(eps, cfg.coupling.c, cfg.coupling.p, cfg.gamma)
    init = make_initial_data(cfg.profile, cfg.grid, eps, prm.beta)
    try:
        tr = simulate(init, prm, cfg.T, cfg.save_every, cfg.safety, dealias=cfg.dealias)
    except BlowUp as exc:
        return prm, None, exc
    return prm, tr, None


def limit_reference(cfg: SweepConfig) -> Trajectory:
    """Finite-volume entropy solution on a grid four times finer."""
    fine = make_grid(4 * cfg.grid.n, cfg.grid.length)
    u0 = profile_samples(cfg.profile, fine)
    save = cfg.save_every if cfg.save_every is not None else cfg.T / 200.0
    return fv_simulate(u0 - np.mean(u0), cfg.gamma, cfg.T, save, grid=fine, safety=cfg.safety)


def run_sweep(cfg: SweepConfig, threads: int = 1, audit: bool = True) -> ConvergenceTable:
    """Simulate every eps row, then measure errors against the reference.

    Rows are independent and may run on a thread pool; the table is assembled
    in eps order afterwards, so the output does not depend on ``threads``.
    """
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda e: _run_row(cfg, e), cfg.eps_list))
    else:
        results = [_run_row(cfg, e) for e in cfg.eps_list]

    window = cfg.resolved_window
    if cfg.reference == "limit":
        ref = limit_reference(cfg)
        label = f"limit (finite volume, n={ref.grid.n})"
    else:
        alive = [tr for _, tr, _ in results if tr is not None]
        ref = alive[-1] if alive else None
        label = "self (finest surviving regularized run)"

    rows = []
    for prm, tr, exc in results:
        if tr is None:
            rows.append(SweepRow(prm.eps, prm.beta, None, blew_up=True,
                                 blowup_time=getattr(exc, "t", None)))
            continue
        errs = compare_trajectories(tr, ref, window)
        rep = audit_regularized(tr, prm) if audit else None
        rows.append(SweepRow(prm.eps, prm.beta, errs, audit=rep))
    prev = None
    for r in rows:
        if r.blew_up:
            continue
        if prev is not None:
            a, b = prev.err("u_l1"), r.err("u_l1")
            r.observed_order = math.log2(a / b) if b > 0 and a > 0 else (math.inf if a > 0 else None)
        prev = r
    table = ConvergenceTable(rows, cfg, label)
    if audit:
        table.checks = sweep_checks(table)
    return table


def sweep_checks(table: ConvergenceTable) -> dict:
    """Boundedness of the audited families and of the dissipation terms across the sweep."""
    rows = [r for r in table.rows if r.audit is not None]
    if not rows:
        return {}
    fams = [r.audit.summary["families"] for r in rows]
    out = {}
    for key in fams[0]:
        vals = [f[key] for f in fams]
        if any(v is None or not math.isfinite(v) for v in vals):
            out[f"family:{key}"] = {"values": vals, "pass": False}
            continue
        out[f"family:{key}"] = {"values": vals, "pass": bounded_by_median(vals[-1], vals)}
    diss = [r.audit.summary["dissipation_terms"] for r in rows]
    for i in range(5):
        vals = [d[i] for d in diss]
        out[f"dissipation:I{i + 1}"] = {"values": vals, "pass": bounded_by_median(vals[-1], vals)}
    t4 = [d[3] for d in diss]
    out["dissipation:I4_ratio"] = {"values": [t4[-1] / t4[0] if t4[0] > 0 else 0.0],
                                   "pass": t4[-1] <= 0.25 * t4[0] if table.regime == "o(eps^2)" else True}
    return out


def regularized_entropy_defect(traj: Trajectory, gamma: float, width: float, levels: int = 9) -> float:
    """Largest Kruzhkov residual of a regularized trajectory against the limit inequality."""
    ks = kruzhkov_levels(traj.u[0], levels)
    return max(entropy_residual(traj, float(k), width, gamma) for k in ks)
