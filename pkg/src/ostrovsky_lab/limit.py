"""Entropy-solution reference for u_t + (u^2/2)_x = gamma P, P_x = u.

Rusanov (local Lax-Friedrichs) flux with SSP-RK2 on cell averages; the
nonlocal source is evaluated inside every stage.  ``entropy_residual``
tests a trajectory against the Kruzhkov inequalities with smooth bumps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BlowUp, InsufficientSampling
from .regularized import BLOWUP_GUARD, Trajectory, save_schedule
from .spectral import Field, Grid


def burgers_flux(u):
    return 0.5 * u * u


@dataclass(frozen=True)
class EntropyPair:
    """Kruzhkov pair ``eta = |u-k|``, ``q = sign(u-k) (u^2-k^2)/2``.

    With ``delta > 0`` the absolute value is replaced by
    ``sqrt((u-k)^2 + delta^2) - delta`` and ``q`` by the matching flux
    ``int_k^u eta'(s) s ds``, so that ``eta''`` exists.
    """

    k: float
    delta: float = 0.0

    def eta(self, u):
        w = u - self.k
        if self.delta == 0:
            return np.abs(w)
        return np.sqrt(w * w + self.delta ** 2) - self.delta

    def deta(self, u):
        w = u - self.k
        if self.delta == 0:
            return np.sign(w)
        return w / np.sqrt(w * w + self.delta ** 2)

    def d2eta(self, u):
        w = u - self.k
        if self.delta == 0:
            return np.zeros_like(np.asarray(w, dtype=float))
        d2 = self.delta ** 2
        return d2 / (w * w + d2) ** 1.5

    def q(self, u):
        w = u - self.k
        if self.delta == 0:
            return np.sign(w) * (u * u - self.k ** 2) / 2.0
        # int_k^u s * (s-k)/sqrt((s-k)^2+d^2) ds with r = sqrt((s-k)^2+d^2)
        r = np.sqrt(w * w + self.delta ** 2)
        return (r - self.delta) * self.k + (w * r - self.delta ** 2 * np.arcsinh(w / self.delta)) / 2.0


@dataclass(frozen=True)
class FvState:
    t: float
    u: np.ndarray


def cumulative_P(u: np.ndarray, dx: float) -> np.ndarray:
    """Zero-mean primitive of cell averages at cell centres (midpoint cumulative rule)."""
    P = dx * (np.cumsum(u, axis=-1) - 0.5 * u)
    return P - np.mean(P, axis=-1, keepdims=True)


def _numerical_flux(a, b, scheme):
    if scheme == "rusanov":
        s = np.maximum(np.abs(a), np.abs(b))
        return 0.5 * (burgers_flux(a) + burgers_flux(b)) - 0.5 * s * (b - a)
    if scheme == "central":
        return 0.5 * (burgers_flux(a) + burgers_flux(b))
    raise ValueError(f"unknown flux {scheme!r}")


def fv_rhs(u, dx, gamma, scheme="rusanov"):
    up = np.roll(u, -1)
    F = _numerical_flux(u, up, scheme)           # F[j] = F_{j+1/2}
    rhs = -(F - np.roll(F, 1)) / dx
    if gamma != 0.0:
        rhs = rhs + gamma * cumulative_P(u, dx)
    return rhs


def _pin(u):
    return u - np.mean(u)


def fv_dt(u, dx, safety=0.4):
    return safety * dx / max(1e-12, float(np.max(np.abs(u))))


def fv_step(state: FvState, grid: Grid, gamma: float, dt: float, scheme: str = "rusanov") -> FvState:
    """One SSP-RK2 step; the mean is re-pinned after each stage."""
    u = state.u
    u1 = _pin(u + dt * fv_rhs(u, grid.dx, gamma, scheme))
    u2 = _pin(0.5 * u + 0.5 * (u1 + dt * fv_rhs(u1, grid.dx, gamma, scheme)))
    t = state.t + dt
    if not np.all(np.isfinite(u2)) or np.max(np.abs(u2)) > BLOWUP_GUARD:
        raise BlowUp(f"finite-volume solution blew up at t={t:.6g}", t)
    return FvState(t, u2)


def fv_simulate(u0, gamma: float, T: float, save_every: Optional[float] = None,
                grid: Optional[Grid] = None, safety: float = 0.4, scheme: str = "rusanov") -> Trajectory:
    """CFL-adaptive finite-volume run from ``u0``; saves as the spectral solver does."""
    if isinstance(u0, Field):
        grid, u = u0.grid, np.array(u0.values)
    else:
        u = np.array(u0, dtype=float)
        if grid is None:
            raise ValueError("grid required when u0 is a plain array")
    if save_every is None:
        save_every = T / 200.0
    u = _pin(u)
    state = FvState(0.0, u)
    times, rows = [0.0], [u.copy()]
    mass = [grid.dx * float(np.sum(u))]
    steps = 0
    for target in save_schedule(T, save_every):
        while state.t < target:
            dt = fv_dt(state.u, grid.dx, safety)
            last = state.t + dt >= target - 1e-12 * max(1.0, target)
            if last:
                dt = target - state.t
            state = fv_step(state, grid, gamma, dt, scheme)
            if last:
                state = FvState(target, state.u)
            steps += 1
        times.append(state.t)
        rows.append(state.u.copy())
        mass.append(grid.dx * float(np.sum(state.u)))
    return Trajectory(grid=grid, times=np.array(times), u=np.array(rows), integrals={},
                      params=None, kind="limit",
                      meta={"gamma": gamma, "scheme": scheme, "steps": steps, "safety": safety,
                            "mass": mass})


# -- Kruzhkov residual ---------------------------------------------------------

def _bump(s):
    """C-infinity bump with peak 1 at 0 and support [-1, 1], and its derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    val = np.zeros_like(s)
    der = np.zeros_like(s)
    si = s[inside]
    d = 1.0 - si * si
    val[inside] = np.exp(1.0 - 1.0 / d)
    der[inside] = val[inside] * (-2.0 * si / (d * d))
    return val, der


def _time_weights(times):
    w = np.zeros(len(times))
    h = np.diff(times)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def bump_family(times, grid: Grid, width: float, t_window=None):
    """Tensor bumps of half-width ``width`` centred on a lattice of spacing ``width/2``.

    Centres are snapped to save times and grid nodes, so every bump is
    sampled symmetrically; on uniform samples the quadrature of ``dphi`` then
    cancels exactly and constant states give a zero residual.  Time bumps
    whose support leaves the window are dropped.

    Returns time factors ``(phi_t, dphi_t)`` of shape (n_centres_t, n_times)
    and space factors ``(phi_x, dphi_x)`` of shape (n, n_centres_x).
    """
    times = np.asarray(times, dtype=float)
    t0, t1 = (times[0], times[-1]) if t_window is None else t_window
    h = 0.5 * width
    lattice = np.arange(t0 + width, t1 - width + 1e-12, h)
    idx = np.unique(np.abs(times[None, :] - lattice[:, None]).argmin(axis=1)) if len(lattice) else []
    tc = np.array([times[i] for i in idx])
    eps_t = 1e-12 * max(1.0, abs(t1))
    tc = tc[(tc - width >= t0 - eps_t) & (tc + width <= t1 + eps_t)] if len(tc) else tc
    if len(tc) == 0:
        raise InsufficientSampling("time window shorter than two bump widths")
    ts, dts = _bump((times[None, :] - tc[:, None]) / width)
    L = grid.length
    nxc = max(1, int(round(L / h)))
    nodes = np.unique(np.round(np.arange(nxc) * (L / nxc) / grid.dx).astype(int) % grid.n)
    xc = grid.x[nodes]
    off = (grid.x[:, None] - xc[None, :] + 0.5 * L) % L - 0.5 * L
    xs, dxs = _bump(off / width)
    return ts, dts / width, xs, dxs / width


def entropy_residual(traj: Trajectory, k: float, mollifier_width: float, gamma: float = 0.0,
                     delta: float = 0.0, t_window=None) -> float:
    """Largest value of ``int int [-eta(u) phi_t - q(u) phi_x - gamma eta'(u) P phi]``
    over the bump family; entropy solutions give values <= 0.

    P is rebuilt from each saved row with the midpoint cumulative rule.
    """
    times = traj.times
    if len(times) < 2 or np.max(np.diff(times)) > mollifier_width / 4 + 1e-12:
        raise InsufficientSampling(
            f"save spacing must not exceed mollifier_width/4 = {mollifier_width / 4:.4g}")
    pair = EntropyPair(k, delta)
    u = traj.u
    grid = traj.grid
    eta = pair.eta(u)
    q = pair.q(u)
    ts, dts, xs, dxs = bump_family(times, grid, mollifier_width, t_window)
    wt = _time_weights(times)
    dx = grid.dx
    R = -(dts * wt) @ eta @ xs - (ts * wt) @ q @ dxs
    if gamma != 0.0:
        src = pair.deta(u) * cumulative_P(u, dx)
        R = R - gamma * ((ts * wt) @ src @ xs)
    return float(np.max(R) * dx)


def tol_entropy(traj: Trajectory) -> float:
    """``1e-3 * |u0|_inf * |window|`` with the window ``(0,T) x torus``."""
    T = traj.times[-1] - traj.times[0]
    return 1e-3 * float(np.max(np.abs(traj.u[0]))) * T * traj.grid.length


def kruzhkov_levels(u0, count: int = 9) -> np.ndarray:
    return np.linspace(float(np.min(u0)), float(np.max(u0)), count)
