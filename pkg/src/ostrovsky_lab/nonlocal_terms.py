"""Nonlocal primitives P (with dP/dx = u) and F (with dF/dx = P), and initial data.

Both primitives use the zero-mean convention on the torus, so that
``integral(u*P) == 0`` and ``integral(P*F) == 0`` hold to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidProfile
from .spectral import (Field, Grid, antiderivative_zero_mean, diff_array,
                       tail_fraction)


def compute_P(u: Field) -> Field:
    return antiderivative_zero_mean(u)


def compute_F(P: Field) -> Field:
    return antiderivative_zero_mean(P)


@dataclass(frozen=True)
class InitialData:
    u0: Field
    P0: Field
    C0: float
    profile: str = "samples"

    @property
    def grid(self) -> Grid:
        return self.u0.grid


def admissibility_constant(u0: np.ndarray, grid: Grid, eps: float, beta: float) -> float:
    """Smallest C0 satisfying every bound imposed on the regularized initial datum.

    Sum of ``|u|_2^2 + |u|_4^4 + (beta+eps^2)|u_x|_2^2 + beta^2|u_xx|_2^2`` and
    ``|beta * int(u u_x^2)|``.
    """
    dx = grid.dx
    ux = diff_array(u0, grid, 1)
    uxx = diff_array(u0, grid, 2)
    return float(
        dx * np.sum(u0 ** 2)
        + dx * np.sum(u0 ** 4)
        + (beta + eps ** 2) * dx * np.sum(ux ** 2)
        + beta ** 2 * dx * np.sum(uxx ** 2)
        + abs(beta * dx * np.sum(u0 * ux ** 2))
    )


def _periodic_offset(x, x0, L):
    return (x - x0 + 0.5 * L) % L - 0.5 * L


def _parse_args(text: str, name: str, count: int, defaults):
    if not text:
        return list(defaults)
    try:
        vals = [float(a) for a in text.split(",")]
    except ValueError as exc:
        raise InvalidProfile(f"profile {name!r}: non-numeric argument in {text!r}") from exc
    if len(vals) != count:
        raise InvalidProfile(f"profile {name!r} takes {count} arguments, got {len(vals)}")
    return vals


def profile_samples(spec: str, grid: Grid) -> np.ndarray:
    """Evaluate a profile string such as ``"sine:1,1"`` or ``"gauss-deriv:1,3.14,0.5"``."""
    name, _, args = spec.strip().partition(":")
    x, L = grid.x, grid.length
    if name == "zero":
        return np.zeros(grid.n)
    if name == "sine":
        a, k = _parse_args(args, name, 2, (1.0, 1.0))
        return a * np.sin(2 * np.pi * k * x / L)
    if name == "two-mode":
        a1, k1, a2, k2 = _parse_args(args, name, 4, (1.0, 1.0, 0.5, 2.0))
        return a1 * np.sin(2 * np.pi * k1 * x / L) + a2 * np.sin(2 * np.pi * k2 * x / L)
    if name in ("gauss-deriv", "gaussian-derivative"):
        a, x0, w = _parse_args(args, name, 3, (1.0, 0.5 * L, 0.1 * L))
        if w <= 0:
            raise InvalidProfile("gauss-deriv width must be positive")
        s = _periodic_offset(x, x0, L) / w
        # peak value a at s = -1/sqrt(2)
        return -a * np.sqrt(2 * np.e) * s * np.exp(-s ** 2)
    raise InvalidProfile(f"unknown profile {spec!r}")


def make_initial_data(profile, grid: Grid, eps: float, beta: float) -> InitialData:
    """Build admissible initial data from a profile string or a sample vector.

    The samples are projected to zero mean; P0 is their zero-mean primitive and
    C0 is computed from the data (see ``admissibility_constant``).
    """
    if isinstance(profile, str):
        u = profile_samples(profile, grid)
        label = profile
    else:
        u = np.array(profile, dtype=float)
        label = "samples"
        if u.shape != (grid.n,):
            raise InvalidProfile(f"expected {grid.n} samples, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InvalidProfile("profile produced non-finite samples")
    u = u - np.mean(u)
    u0 = Field(grid, u)
    P0 = compute_P(u0)
    assert np.isfinite(np.sum(P0.values ** 2)) and abs(P0.mean()) <= 1e-12 * (1 + np.max(np.abs(P0.values)))
    return InitialData(u0, P0, admissibility_constant(u, grid, eps, beta), label)


def initial_tail_fraction(init: InitialData) -> float:
    return tail_fraction(init.u0.values)
