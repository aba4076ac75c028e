"""Periodic spectral grids.

Conventions used throughout the package:

- wavenumbers follow numpy's signed FFT layout (DC first, positive, then negative)
- real fields stay real arrays; they are promoted to complex only inside transforms
- arrays are indexed ``[i]`` in 1D and ``[i, j]`` (x1 fastest-varying last) in 2D
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on ``[0, L_1) x [0, L_2)``."""

    lengths: tuple[float, ...]
    counts: tuple[int, ...]
    _k: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        counts = tuple(int(v) for v in np.atleast_1d(self.counts))
        if len(lengths) not in (1, 2) or len(lengths) != len(counts):
            raise ValueError("grid must be 1D or 2D with one length per count")
        for n, length in zip(counts, lengths):
            if n < 8 or n % 2:
                raise ValueError(f"point count {n} must be even and >= 8")
            if not length > 0:
                raise ValueError(f"domain length {length} must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "counts", counts)
        ks = tuple(2 * np.pi * np.fft.fftfreq(n, d=length / n)
                   for n, length in zip(counts, lengths))
        object.__setattr__(self, "_k", ks)

    @property
    def dims(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / n for n, length in zip(self.counts, self.lengths))

    @property
    def cell_area(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def k_nyquist(self) -> tuple[float, ...]:
        return tuple(np.pi * n / length for n, length in zip(self.counts, self.lengths))

    @property
    def k_max(self) -> float:
        """Largest |k| on the lattice (corner of the box in 2D)."""
        return float(np.hypot.reduce(self.k_nyquist)) if self.dims == 2 else self.k_nyquist[0]

    @property
    def k_min(self) -> float:
        """Smallest nonzero |k|."""
        return min(2 * np.pi / length for length in self.lengths)

    def coords(self, axis: int = 0) -> np.ndarray:
        n, length = self.counts[axis], self.lengths[axis]
        return np.arange(n) * (length / n)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.coords(a) for a in range(self.dims)), indexing="ij"))

    def wavenumbers(self, axis: int = 0) -> np.ndarray:
        return self._k[axis]

    def k_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self._k, indexing="ij"))

    def k_abs(self) -> np.ndarray:
        if self.dims == 1:
            return np.abs(self._k[0])
        kx, ky = self.k_mesh()
        return np.hypot(kx, ky)

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fftn(f)

    def ifft(self, fh: np.ndarray, real: bool = False) -> np.ndarray:
        out = np.fft.ifftn(fh)
        return out.real.copy() if real else out

    def integrate(self, f: np.ndarray) -> float:
        """Periodic trapezoid rule (spectrally accurate for smooth periodic f)."""
        return float(np.sum(f) * self.cell_area)

    def check(self, f: np.ndarray) -> None:
        if f.shape[-self.dims:] != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")


def apply_multiplier(grid: SpectralGrid, f: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Apply the Fourier multiplier ``m`` (signed FFT layout) to ``f``.

    Real input with a real multiplier gives real output; the multiplier is
    expected to be even in k in that case.
    """
    grid.check(f)
    m = np.asarray(m)
    if m.shape != grid.shape:
        raise ValueError(f"multiplier shape {m.shape} does not match grid {grid.shape}")
    out = np.fft.ifftn(np.fft.fftn(f) * m)
    if np.isrealobj(f) and np.isrealobj(m):
        return out.real
    return out


def derivative_multiplier(grid: SpectralGrid, axis: int, order: int) -> np.ndarray:
    if not 0 <= axis < grid.dims:
        raise ValueError(f"axis {axis} out of range for a {grid.dims}D grid")
    if order <= 0:
        raise ValueError("derivative order must be positive")
    k = grid.wavenumbers(axis).copy()
    if order % 2 and grid.counts[axis] % 2 == 0:
        # the Nyquist mode has no real odd derivative
        k[grid.counts[axis] // 2] = 0.0
    shape = [1] * grid.dims
    shape[axis] = grid.counts[axis]
    return np.broadcast_to(((1j * k) ** order).reshape(shape), grid.shape)


def spectral_derivative(grid: SpectralGrid, f: np.ndarray, axis: int = 0, order: int = 1) -> np.ndarray:
    """``d^order f / dx_axis^order`` by FFT."""
    grid.check(f)
    mult = derivative_multiplier(grid, axis, order)
    out = np.fft.ifftn(np.fft.fftn(f) * mult)
    return out.real if np.isrealobj(f) else out


def gradient(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    return np.stack([spectral_derivative(grid, f, a) for a in range(grid.dims)])


def divergence(grid: SpectralGrid, v: np.ndarray) -> np.ndarray:
    return sum(spectral_derivative(grid, v[a], a) for a in range(grid.dims))


def _hermite_weights(t: np.ndarray) -> np.ndarray:
    """Weights on offsets -2..3 of a cubic Hermite with 4th-order centered slopes.

    C1 across cells and O(dx^4) for smooth data (plain Catmull-Rom slopes give O(dx^3)).
    """
    t2, t3 = t * t, t * t * t
    h00 = 2 * t3 - 3 * t2 + 1
    h01 = -2 * t3 + 3 * t2
    h10 = (t3 - 2 * t2 + t) / 12
    h11 = (t3 - t2) / 12
    return np.stack([h10, -8 * h10 + h11, h00 - 8 * h11, h01 + 8 * h10, -h10 + 8 * h11, -h11])


def interpolate(grid: SpectralGrid, f: np.ndarray, point: Sequence[float] | np.ndarray) -> np.ndarray | float:
    """Periodic C1 cubic interpolation of ``f`` at physical coordinates.

    ``point`` has one coordinate per grid axis; each coordinate may be an
    array (all broadcast together). Coordinates wrap.
    """
    grid.check(f)
    if grid.dims == 1 and not isinstance(point, (tuple, list)):
        point = (point,)
    pts = [np.asarray(p, dtype=float) for p in point]
    if len(pts) != grid.dims:
        raise ValueError("point must have one coordinate per grid axis")
    pts = np.broadcast_arrays(*pts)
    idx, wts = [], []
    for a, p in enumerate(pts):
        s = p / grid.spacing[a]
        i0 = np.floor(s).astype(int)
        idx.append([(i0 + o) % grid.counts[a] for o in range(-2, 4)])
        wts.append(_hermite_weights(s - i0))
    if grid.dims == 1:
        out = sum(wts[0][m] * f[idx[0][m]] for m in range(6))
    else:
        out = sum(wts[0][m] * wts[1][n] * f[idx[0][m], idx[1][n]]
                  for m in range(6) for n in range(6))
    return float(out) if np.ndim(out) == 0 else out


def fourier_refine(grid: SpectralGrid, f: np.ndarray, factor: int = 2) -> np.ndarray:
    """Band-limited (zero-padded) resampling of a 1D periodic field onto a grid ``factor`` times finer."""
    if grid.dims != 1:
        raise ValueError("fourier_refine is 1D only")
    n = grid.counts[0]
    fh = np.fft.fft(f)
    big = np.zeros(n * factor, dtype=complex)
    half = n // 2
    big[:half] = fh[:half]
    big[-half + 1:] = fh[-half + 1:]
    # split the Nyquist coefficient so the refined signal stays real for real f
    big[half] = 0.5 * fh[half]
    big[-half] = 0.5 * fh[half]
    out = np.fft.ifft(big) * factor
    return out.real if np.isrealobj(f) else out


@dataclass(frozen=True)
class Field:
    """A grid-bound array, used where a field travels with its grid (I/O, snapshots)."""

    grid: SpectralGrid
    values: np.ndarray
    components: int = 1

    def __post_init__(self):
        expected = self.grid.shape if self.components == 1 else (self.components, *self.grid.shape)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")
