"""Runtime checks of the a priori bounds satisfied by regularized solutions.

Each function post-processes an immutable Trajectory.  Time integrals that
the solver accumulates alongside its RK4 stages are read from
``traj.integrals``; everything else is integrated over the saved states with
the trapezoid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateBound
from .limit import EntropyPair, entropy_residual, kruzhkov_levels, tol_entropy
from .regularized import RegParams, State, Trajectory
from .spectral import antiderivative_array, diff_array

TOL_L2_BALANCE = 1e-6
TOL_P_ENERGY = 1e-5
P_BOUND_SLACK = 0.1
ENTROPY_DELTA = 1e-3
BOUNDED_FACTOR = 2.0


def _trapz(y, t):
    return float(np.trapezoid(y, t)) if len(t) > 1 else 0.0


def _P_rows(traj: Trajectory) -> np.ndarray:
    return antiderivative_array(traj.u, traj.grid, check=False)


def _l2sq_rows(a, dx):
    return dx * np.sum(a * a, axis=-1)


# -- L2 balance -----------------------------------------------------------------

def l2_balance_series(traj: Trajectory, eps: float) -> np.ndarray:
    l2 = _l2sq_rows(traj.u, traj.grid.dx)
    scale = max(1.0, l2[0])
    return np.abs(l2 + 2.0 * eps * traj.grad_l2_time_integral - l2[0]) / scale


def l2_balance_residual(traj: Trajectory, eps: float) -> float:
    """Max over save times of ``| |u|^2 + 2 eps int |u_x|^2 - |u0|^2 | / max(1, |u0|^2)``."""
    return float(np.max(l2_balance_series(traj, eps)))


def p_energy_series(traj: Trajectory, eps: float) -> np.ndarray:
    """Defect of ``|P|^2 - |P0|^2 + 2 eps int |u|^2 + int int P u^2``, relative to ``|P0|^2``."""
    Pl2 = _l2sq_rows(_P_rows(traj), traj.grid.dx)
    z = np.zeros(len(traj.times))
    defect = Pl2 - Pl2[0] + 2.0 * eps * traj.integrals.get("u_l2", z) + traj.integrals.get("P_u2", z)
    scale = Pl2[0] if Pl2[0] > 0 else 1.0
    return np.abs(defect) / scale


def p_energy_residual(traj: Trajectory, eps: float) -> float:
    return float(np.max(p_energy_series(traj, eps)))


# -- P bound via the quartic -------------------------------------------------------

@dataclass(frozen=True)
class QuarticBound:
    A: float
    B: float
    C_of_T: float

    def g(self, X):
        return X ** 4 - self.A * X - self.B


def quartic_root_AB(A: float, B: float) -> QuarticBound:
    """Positive root of ``X^4 - A X - B`` by bisection."""
    if A < 0 or B < 0:
        raise ValueError("A and B must be non-negative")
    if A == 0 and B == 0:
        err = DegenerateBound("A = B = 0: the bound collapses to zero")
        err.bound = QuarticBound(0.0, 0.0, 0.0)
        raise err
    g = lambda X: X ** 4 - A * X - B  # noqa: E731
    lo = 0.0
    hi = max(1.0, (2 * A) ** (1 / 3), (2 * B) ** 0.25)
    while g(hi) <= 0:
        hi *= 2.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    root = lo if abs(g(lo)) <= abs(g(hi)) else hi
    return QuarticBound(A, B, root)


def quartic_root(C0: float, P0_l2: float, T: float) -> QuarticBound:
    """Bound on ``sup|P|`` from ``A = 4 C0^4 T`` and ``B = 4 C0^2 |P0|_2^2``."""
    if C0 < 0 or P0_l2 < 0 or T <= 0:
        raise ValueError("need C0 >= 0, P0_l2 >= 0, T > 0")
    return quartic_root_AB(4.0 * C0 ** 4 * T, 4.0 * C0 ** 2 * P0_l2 ** 2)


def audit_P(traj: Trajectory, bound: QuarticBound, slack: float = P_BOUND_SLACK):
    P = _P_rows(traj)
    linf = float(np.max(np.abs(P)))
    l2 = float(np.sqrt(np.max(_l2sq_rows(P, traj.grid.dx))))
    return linf, l2, linf <= bound.C_of_T * (1.0 + slack)


# -- sup norm scaling and G ---------------------------------------------------------

def audit_supnorm_scaling(runs) -> float:
    """``max(linf_u * beta**(1/3))`` over ``(beta, linf_u)`` pairs."""
    runs = list(runs)
    if not runs:
        return 0.0
    if any(b <= 0 for b, _ in runs):
        raise ValueError("betas must be positive")
    return float(max(l * b ** (1 / 3) for b, l in runs))


def supnorm_scaling_bounded(runs) -> bool:
    """Scaled sup norm at the smallest beta is at most twice the sweep median."""
    runs = sorted(runs)
    vals = [l * b ** (1 / 3) for b, l in runs]
    return bounded_by_median(vals[0], vals)


def G_functional(state: State, beta: float) -> float:
    u = state.u.values
    grid = state.u.grid
    ux = diff_array(u, grid, 1)
    uxx = diff_array(u, grid, 2)
    dx = grid.dx
    return float(dx * (0.25 * np.sum(u ** 4) + 3 * beta * np.sum(u * ux ** 2)
                       + 1.8 * beta ** 2 * np.sum(uxx ** 2)))


def bounded_by_median(value: float, values, factor: float = BOUNDED_FACTOR) -> bool:
    """Boundedness proxy used across sweeps: ``value <= factor * median(values)``."""
    return bool(value <= factor * float(np.median(values)) + 1e-300)


# -- families --------------------------------------------------------------------------

def audit_families(traj: Trajectory, params: RegParams) -> dict:
    """Quantities that stay bounded as eps -> 0 with beta = O(eps^2)."""
    eps, beta = params.eps, params.beta
    u, grid, t = traj.u, traj.grid, traj.times
    dx = grid.dx
    z = np.zeros(len(t))
    I = lambda name: float(traj.integrals.get(name, z)[-1])  # noqa: E731
    l44 = dx * np.sum(u ** 4, axis=1)
    grad = _l2sq_rows(diff_array(u, grid, 1), dx)
    b13 = beta ** (1 / 3)
    return {
        "l4_u_sup": float(np.max(l44)),
        "l4_u_IT": _trapz(l44, t),
        "eps_uux_int": eps * I("uux_l2"),
        "beta2_eps_uxxx_int": beta ** 2 * eps * I("uxxx_l2"),
        "beta2_uxx_int": beta ** 2 * I("uxx_l2"),
        "eps_ux_sup": float(eps * np.sqrt(np.max(grad))),
        "eps3_uxx_int": eps ** 3 * I("uxx_l2"),
        "beta2_uxx_int_over_eps": beta ** 2 * I("uxx_l2") / eps if eps > 0 else math.nan,
        "beta_ux_uxx_l1": beta * I("ux_uxx_l1"),
        "beta_grad_scaled_sup": float(np.max(beta * grad)) * b13,
        "linf_u_scaled": float(np.max(np.abs(u))) * b13,
    }


def dissipation_breakdown(traj: Trajectory, params: RegParams, entropy: EntropyPair):
    """Norms of the five terms of the entropy balance of the regularized equation.

    Returns ``(|eps eta'(u) u_x|_L2, |I2|_L1, |beta eta'(u) u_xx|_L2, |I4|_L1, |I5|_L1)``
    over ``(0,T) x torus``, integrated in time by the trapezoid rule.
    """
    if entropy.delta <= 0:
        raise ValueError("need a smoothed entropy (delta > 0) so that eta'' exists")
    eps, beta, gamma = params.eps, params.beta, params.gamma
    u, grid, t = traj.u, traj.grid, traj.times
    dx = grid.dx
    ux = diff_array(u, grid, 1)
    uxx = diff_array(u, grid, 2)
    d1 = entropy.deta(u)
    d2 = entropy.d2eta(u)
    P = _P_rows(traj)
    space = lambda a: dx * np.sum(a, axis=1)  # noqa: E731
    t1 = math.sqrt(_trapz(space((eps * d1 * ux) ** 2), t))
    t2 = _trapz(space(eps * d2 * ux ** 2), t)
    t3 = math.sqrt(_trapz(space((beta * d1 * uxx) ** 2), t))
    t4 = _trapz(space(beta * d2 * np.abs(ux * uxx)), t)
    t5 = _trapz(space(np.abs(gamma * d1 * P)), t)
    return t1, t2, t3, t4, t5


# -- report -------------------------------------------------------------------------------

@dataclass
class AuditReport:
    """Per-time series, summaries and per-estimate pass/fail flags for one run."""

    kind: str
    params: dict
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def failures(self):
        return [tag for tag, c in self.checks.items() if not c["pass"]]

    def to_dict(self) -> dict:
        return {
            "schema": "ostrovsky-lab/audit-report/1",
            "kind": self.kind,
            "params": self.params,
            "series": {k: _jsonable(v) for k, v in self.series.items()},
            "summary": {k: _jsonable(v) for k, v in self.summary.items()},
            "checks": {k: {kk: _jsonable(vv) for kk, vv in c.items()} for k, c in self.checks.items()},
            "pass": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        return cls(d["kind"], d["params"], d.get("series", {}), d.get("summary", {}), d.get("checks", {}))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _check(value, tol, ok):
    num = lambda v: None if v is None else float(v)  # noqa: E731
    return {"value": num(value), "tol": num(tol), "pass": bool(ok)}


def audit_regularized(traj: Trajectory, params: RegParams, C0: Optional[float] = None,
                      entropy_k: float = 0.0) -> AuditReport:
    grid, u, t = traj.grid, traj.u, traj.times
    dx = grid.dx
    eps, beta = params.eps, params.beta
    P = _P_rows(traj)
    ux = diff_array(u, grid, 1)
    uxx = diff_array(u, grid, 2)
    grad = _l2sq_rows(ux, dx)
    b13 = beta ** (1 / 3)
    z = np.zeros(len(t))
    series = {
        "t": t,
        "l2_balance_residual": l2_balance_series(traj, eps),
        "p_energy_residual": p_energy_series(traj, eps),
        "linf_P": np.max(np.abs(P), axis=1),
        "l2_P": np.sqrt(_l2sq_rows(P, dx)),
        "linf_u_scaled": np.max(np.abs(u), axis=1) * b13,
        "G_value": dx * (0.25 * np.sum(u ** 4, axis=1) + 3 * beta * np.sum(u * ux ** 2, axis=1)
                         + 1.8 * beta ** 2 * np.sum(uxx ** 2, axis=1)),
        "l4_u": (dx * np.sum(u ** 4, axis=1)) ** 0.25,
        "beta_grad": beta * grad,
        "eps_u_ux_int": eps * traj.integrals.get("uux_l2", z),
        "beta2_eps_uxxx_int": beta ** 2 * eps * traj.integrals.get("uxxx_l2", z),
        "beta2_uxx_int_over_eps": (beta ** 2 * traj.integrals.get("uxx_l2", z) / eps) if eps > 0 else z * math.nan,
    }
    if C0 is None:
        C0 = traj.meta.get("C0")
    P0_l2 = float(np.sqrt(dx * np.sum(P[0] ** 2)))
    T = float(t[-1])
    try:
        bound = quartic_root(C0, P0_l2, T)
    except DegenerateBound as exc:
        bound = exc.bound
    linf_P, l2_P, p_ok = audit_P(traj, bound)
    l2_res = float(np.max(series["l2_balance_residual"]))
    pe_res = float(np.max(series["p_energy_residual"]))
    families = audit_families(traj, params)
    diss = dissipation_breakdown(traj, params, EntropyPair(entropy_k, ENTROPY_DELTA))
    finite = lambda vals: all(math.isfinite(v) for v in vals)  # noqa: E731
    # the 1/eps family is undefined (nan) in the conservative case eps = 0
    applicable = [v for k, v in families.items() if not (k == "beta2_uxx_int_over_eps" and eps == 0)]
    summary = {
        "C0": C0,
        "P0_l2": P0_l2,
        "C_of_T": bound.C_of_T,
        "A": bound.A,
        "B": bound.B,
        "linf_P": linf_P,
        "l2_P": l2_P,
        "families": families,
        "dissipation_terms": list(diss),
        "dissipation_entropy_k": entropy_k,
        "max_tail_fraction": traj.meta.get("max_tail_fraction"),
        "resolved": traj.meta.get("resolved"),
    }
    checks = {
        "lm:l2-u": _check(l2_res, TOL_L2_BALANCE, l2_res <= TOL_L2_BALANCE),
        "lm:P-infty": _check(linf_P, bound.C_of_T * (1 + P_BOUND_SLACK), p_ok),
        "eq:1200": _check(pe_res, TOL_P_ENERGY, pe_res <= TOL_P_ENERGY),
        "lm:l-infty-u": _check(families["linf_u_scaled"], None, finite([families["linf_u_scaled"]])),
        "lm:bounded": _check(families["l4_u_IT"], None, finite(applicable)
                             and all(np.isfinite(series["G_value"]))),
        "lm:501": _check(families["eps_ux_sup"], None, finite(diss)),
    }
    pdict = {"eps": eps, "beta": beta, "gamma": params.gamma, "n": grid.n, "L": grid.length, "T": T}
    if params.coupling is not None:
        pdict["coupling"] = {"c": params.coupling.c, "p": params.coupling.p}
    return AuditReport("regularized", pdict, series, summary, checks)


def audit_limit(traj: Trajectory, gamma: float, mollifier_width: float = 0.4,
                levels: int = 9) -> AuditReport:
    """Kruzhkov residuals over ``levels`` values of k, their delta-smoothed
    versions, and mass conservation."""
    t, grid = traj.times, traj.grid
    u0 = traj.u[0]
    ks = kruzhkov_levels(u0, levels) if np.any(u0) else np.zeros(1)
    tol = tol_entropy(traj)
    # widen the bumps if the saves are too sparse for the requested width
    width = max(mollifier_width, 4 * float(np.max(np.diff(t)))) if len(t) > 1 else mollifier_width
    res = [entropy_residual(traj, float(k), width, gamma) for k in ks]
    smooth = [entropy_residual(traj, float(k), width, gamma, delta=ENTROPY_DELTA) for k in ks]
    mass = grid.dx * np.sum(traj.u, axis=1)
    mass_err = float(np.max(np.abs(mass - mass[0])))
    worst = float(max(res + smooth))
    series = {"t": t, "mass": mass, "l2": np.sqrt(_l2sq_rows(traj.u, grid.dx)),
              "linf": np.max(np.abs(traj.u), axis=1)}
    summary = {"k_levels": ks, "entropy_residuals": res, "smoothed_entropy_residuals": smooth,
               "entropy_delta": ENTROPY_DELTA, "tol_entropy": tol,
               "mollifier_width": width, "mass_defect": mass_err}
    checks = {
        "def:sol": _check(worst, tol, worst <= tol),
        "mass": _check(mass_err, 1e-12, mass_err <= 1e-12),
    }
    pdict = {"gamma": gamma, "n": grid.n, "L": grid.length, "T": float(t[-1])}
    return AuditReport("limit", pdict, series, summary, checks)
