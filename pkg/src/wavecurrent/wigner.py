"""Discrete Wigner distribution of the energy variable and phase-space peak tracking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dn import SeparableSymbol, dn_weyl_apply
from .grid import SpectralGrid, fourier_refine
from .solver import WaveState


def energy_variable(state: WaveState, dn_sqrt: SeparableSymbol, g: float = 9.81) -> np.ndarray:
    """psi = sqrt(g) eta + i G^(1/2) phi."""
    if dn_sqrt.p != 0.5:
        raise ValueError("energy variable needs the square-root DN operator (p = 1/2)")
    dn_sqrt.grid.check(state.eta)
    return np.sqrt(g) * state.eta + 1j * dn_weyl_apply(dn_sqrt, state.phi)


def positive_branch(psi: np.ndarray) -> np.ndarray:
    """Keep the positive-wavenumber part of psi (the right-moving branch of the energy variable).

    Removing the k < 0 half also removes the cross terms between the two
    branches that otherwise sit near k = 0 in the Wigner table.
    """
    n = psi.shape[0]
    ph = np.fft.fft(psi)
    k_index = np.fft.fftfreq(n)
    ph[k_index <= 0] = 0.0
    return np.fft.ifft(ph)


@dataclass(frozen=True)
class WignerGrid:
    """W[j, m] at centers x[j] and wavenumbers k[m] (k ascending)."""

    x: np.ndarray
    k: np.ndarray
    W: np.ndarray
    Y_max: float
    mu: float = 1.0
    imag_residue: float = 0.0
    t: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dk(self) -> float:
        return float(self.k[1] - self.k[0])

    def x_marginal(self) -> np.ndarray:
        return self.W.sum(axis=1) * self.dk

    def k_marginal(self) -> np.ndarray:
        return self.W.sum(axis=0) * self.dx


def wigner_transform(grid: SpectralGrid, psi: np.ndarray, Y_max: float | None = None, mu: float = 1.0,
                     t: float = 0.0, tail_tol: float = 1e-6) -> WignerGrid:
    """Trapezoid-rule Wigner distribution on the grid's centers and wavenumber lattice.

    W(x, k) = (1/(2 pi mu)) int_{-Y_max}^{Y_max} exp(-i Y k / mu) psi(x + Y/2) conj(psi(x - Y/2)) dY.

    The Y step equals the grid spacing; the half-offset samples come from a
    two-times Fourier refinement of psi. The k axis is the grid lattice scaled
    by mu, the widest band the Y step resolves. With Y_max = L/2 the x-marginal
    is exact on the grid.
    """
    if grid.dims != 1:
        raise ValueError("Wigner transform is 1D")
    n = grid.counts[0]
    L = grid.lengths[0]
    dx = grid.spacing[0]
    Y_max = L / 2 if Y_max is None else float(Y_max)
    if Y_max > L / 2 + 1e-12 or Y_max <= 0:
        raise ValueError(f"Y_max={Y_max:g} must lie in (0, L/2]")
    n_max = int(np.floor(Y_max / dx + 1e-9))
    psi = np.asarray(psi, dtype=complex)
    fine = fourier_refine(grid, psi, 2)
    offsets = np.arange(-n_max, n_max + 1)
    weights = np.ones(len(offsets))
    weights[0] = weights[-1] = 0.5
    centers = 2 * np.arange(n)
    plus = fine[(centers[:, None] + offsets[None, :]) % (2 * n)]
    minus = fine[(centers[:, None] - offsets[None, :]) % (2 * n)]
    prod = plus * np.conj(minus) * weights[None, :]
    if tail_tol is not None and n_max < n // 2:
        edge = np.max(np.abs(fine)) ** 2
        tail = np.max(np.abs(prod[:, [0, -1]])) if edge > 0 else 0.0
        if tail > tail_tol * edge:
            warnings.warn("psi does not decay inside the Wigner window", RuntimeWarning, stacklevel=2)
    # fold offsets onto the length-n ring so one FFT yields the lattice xi = mu k_m
    ring = np.zeros((n, n), dtype=complex)
    np.add.at(ring, (slice(None), offsets % n), prod)
    table = np.fft.fft(ring, axis=1) * dx / (2 * np.pi * mu)
    k = mu * grid.wavenumbers(0)
    order = np.argsort(k)
    table = table[:, order]
    scale = np.max(np.abs(table.real))
    residue = float(np.max(np.abs(table.imag)) / scale) if scale > 0 else 0.0
    return WignerGrid(grid.coords(), k[order], table.real, Y_max, mu, residue, t)


def gaussian_wigner(x, k, width: float, k0: float, x0: float = 0.0):
    """Analytic Wigner table of exp(-(x - x0)^2 / (2 width^2)) exp(i k0 x) (mu = 1)."""
    X, K = np.meshgrid(np.asarray(x) - x0, k, indexing="ij")
    return width / np.sqrt(np.pi) * np.exp(-X ** 2 / width ** 2) * np.exp(-width ** 2 * (K - k0) ** 2)


def _parabola_offset(fm, f0, fp):
    den = fm - 2 * f0 + fp
    if den >= 0:
        return 0.0
    return float(np.clip(0.5 * (fm - fp) / den, -0.5, 0.5))


def wigner_peak(w: WignerGrid, k_range: tuple[float, float] | None = None) -> tuple[float, float, float]:
    """(x*, k*, W*) at the table maximum, refined by parabolic fits through the 3x3 neighbourhood.

    Ties go to the smaller x (first occurrence in row-major order).
    """
    W = w.W
    cols = np.arange(len(w.k))
    if k_range is not None:
        cols = np.flatnonzero((w.k >= k_range[0]) & (w.k <= k_range[1]))
        if len(cols) == 0:
            raise ValueError("k_range selects no bins")
    sub = W[:, cols]
    if not np.any(sub != 0):
        raise ValueError("degenerate Wigner frame (all zero)")
    j, mi = np.unravel_index(int(np.argmax(sub)), sub.shape)
    m = cols[mi]
    n = W.shape[0]
    fx = _parabola_offset(W[(j - 1) % n, m], W[j, m], W[(j + 1) % n, m])
    if 0 < m < len(w.k) - 1:
        fk = _parabola_offset(W[j, m - 1], W[j, m], W[j, m + 1])
    else:
        fk = 0.0
    return float(w.x[j] + fx * w.dx), float(w.k[m] + fk * w.dk), float(W[j, m])


def wigner_peak_track(frames, k_range=None) -> list[tuple[float, float, float]]:
    """[(t, x*, k*)] for a sequence of Wigner frames."""
    frames = list(frames)
    if not frames:
        raise ValueError("no frames")
    out = []
    for f in frames:
        x, k, _ = wigner_peak(f, k_range)
        out.append((f.t, x, k))
    return out
