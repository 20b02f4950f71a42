"""Periodic grid, Fourier differentiation and quadrature on the torus.

Every field lives on a uniform grid of ``n`` nodes ``x_j = j*dx`` covering a
torus of circumference ``L``.  Derivatives and antiderivatives are taken with
the real FFT; integrals use the periodic trapezoid rule ``dx * sum(values)``,
which is exact for trigonometric polynomials below the Nyquist mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrid, NonZeroMean


@dataclass(frozen=True)
class Grid:
    n: int
    length: float
    dx: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise InvalidGrid(f"n must be an even integer >= 8, got {self.n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise InvalidGrid(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "dx", self.length / self.n)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Physical wavenumbers ``2*pi*k/L`` of the rfft modes ``k = 0..n/2``."""
        return 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.length

    @property
    def dealias_mask(self) -> np.ndarray:
        """Boolean rfft mask keeping modes with ``3|k| < n`` (2/3 rule)."""
        k = np.arange(self.n // 2 + 1)
        return 3 * k < self.n


def make_grid(n: int, L: float) -> Grid:
    return Grid(n, L)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid. Values are copied and frozen on construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, fn(grid.x))

    def _lift(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._lift(other))

    def __mul__(self, other):
        return Field(self.grid, self.values * self._lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))


# -- raw-array kernels (used by the solvers, which avoid Field churn) --------

def diff_array(values: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    """Spectral derivative of real samples along the last axis."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order!r}")
    vh = np.fft.rfft(values, axis=-1)
    return np.fft.irfft(vh * derivative_symbol(grid, order), n=grid.n, axis=-1)


def derivative_symbol(grid: Grid, order: int) -> np.ndarray:
    sym = (1j * grid.wavenumbers) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def mean_tol(values: np.ndarray) -> float:
    return 1e-10 * float(np.max(np.abs(values), initial=0.0)) + 1e-14


def antiderivative_array(values: np.ndarray, grid: Grid, check: bool = True) -> np.ndarray:
    if check:
        m = float(np.mean(values))
        if abs(m) > mean_tol(values):
            raise NonZeroMean(f"mean {m:.3e} exceeds tolerance {mean_tol(values):.3e}")
    vh = np.fft.rfft(values, axis=-1)
    kk = grid.wavenumbers.copy()
    out = np.zeros_like(vh)
    out[..., 1:-1] = vh[..., 1:-1] / (1j * kk[1:-1])
    return np.fft.irfft(out, n=grid.n, axis=-1)


# -- Field-level operations ---------------------------------------------------

def derivative(f: Field, order: int = 1) -> Field:
    """Fourier derivative; the Nyquist mode is dropped for odd orders."""
    return Field(f.grid, diff_array(f.values, f.grid, order))


def antiderivative_zero_mean(f: Field) -> Field:
    """Zero-mean periodic primitive of ``f``.

    Raises NonZeroMean when ``|mean(f)|`` exceeds ``1e-10*max|f| + 1e-14``,
    since a periodic primitive only exists for zero-mean data.
    """
    return Field(f.grid, antiderivative_array(f.values, f.grid))


def integral(f: Field) -> float:
    return f.grid.dx * float(np.sum(f.values))


def norm_l1(f: Field) -> float:
    return f.grid.dx * float(np.sum(np.abs(f.values)))


def norm_l2(f: Field) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(f.values ** 2)))


def norm_l4(f: Field) -> float:
    return float((f.grid.dx * np.sum(f.values ** 4)) ** 0.25)


def norm_linf(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


def spectral_energy(f: Field) -> float:
    """``dx``-weighted energy from full-FFT coefficients (Parseval partner of norm_l2**2)."""
    c = np.fft.fft(f.values)
    return f.grid.length * float(np.sum(np.abs(c) ** 2)) / f.grid.n ** 2


def resample(values: np.ndarray, n_new: int) -> np.ndarray:
    """Spectral (zero-padding) interpolation of periodic samples onto ``n_new`` nodes."""
    n = values.shape[-1]
    if n_new == n:
        return np.array(values, dtype=float)
    vh = np.fft.rfft(values, axis=-1)
    m = min(n, n_new) // 2
    out = np.zeros(values.shape[:-1] + (n_new // 2 + 1,), dtype=complex)
    out[..., :m] = vh[..., :m]
    # the shared top mode is a Nyquist mode for the smaller grid; split it evenly
    if n_new > n:
        out[..., m] = 0.5 * vh[..., m]
    else:
        out[..., m] = 2.0 * vh[..., m].real
    return np.fft.irfft(out, n=n_new, axis=-1) * (n_new / n)


def tail_fraction(values: np.ndarray, fraction: float = 1.0 / 3.0, band: int | None = None) -> float:
    """Share of spectral energy carried by the top ``fraction`` of the modes ``0..band``.

    ``band`` defaults to the Nyquist index ``n/2``.
    """
    vh = np.abs(np.fft.rfft(values)) ** 2
    vh[1:-1] *= 2.0
    if band is None:
        band = len(vh) - 1
    total = float(np.sum(vh[: band + 1]))
    if total == 0.0:
        return 0.0
    cut = int(np.ceil((1.0 - fraction) * band))
    return float(np.sum(vh[cut + 1 : band + 1])) / total
