"""Dirichlet-to-Neumann operators.

The symbol is g_b(X, xi) = |xi| tanh(b(X)|xi|). With semiclassical scale mu the
operators below act as Op(g_b(X, mu xi)^p) / mu^p, so mu = 1 is the physical
operator on the grid's own coordinates.

Three realizations:

- ``dn_flat``: exact Fourier multiplier for constant depth
- ``dn_weyl_apply``: fast Weyl-type operator from a separable Chebyshev
  expansion in depth, symmetrized so it is exactly self-adjoint
- ``dense_weyl_oracle`` / ``bvp_oracle``: slow references for testing
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import SpectralGrid, apply_multiplier, fourier_refine

MAX_RANK = 32
SYMBOL_TOL = 1e-10


class RankInsufficient(ValueError):
    """Separable expansion misses the error bound at the largest allowed rank."""


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def low_k_bump(kappa, k1):
    """C-infinity bump: 1 for |k| <= k1/2, 0 for |k| >= k1."""
    return 1.0 - smooth_step(2.0 * np.abs(kappa) / k1 - 1.0)


def symbol(beta, kappa, p=1.0, mu=1.0, k1=None):
    """g_beta(mu kappa)^p / mu^p, with the low-wavenumber lift when p != 1.

    ``k1`` is the first nonzero grid wavenumber (unscaled); it is required for
    fractional powers.
    """
    kappa = np.abs(np.asarray(kappa, dtype=float))
    beta = np.asarray(beta, dtype=float)
    g = mu * kappa * np.tanh(beta * mu * kappa)
    if p == 1:
        return g / mu
    if k1 is None:
        raise ValueError("fractional symbol powers need the first grid wavenumber k1")
    g1 = mu * k1 * np.tanh(beta * mu * k1)
    g = g + low_k_bump(kappa, k1) * g1
    return g ** p / mu ** p


def dn_flat(grid: SpectralGrid, phi: np.ndarray, b0: float, mu: float = 1.0) -> np.ndarray:
    if b0 <= 0:
        raise ValueError("depth must be positive")
    return apply_multiplier(grid, phi, symbol(b0, grid.k_abs(), 1.0, mu))


def chebyshev_nodes(a: float, b: float, n: int) -> np.ndarray:
    """Chebyshev points of the second kind on [a, b], ascending."""
    j = np.arange(n)
    return 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * j / (n - 1))


def cardinal_functions(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Lagrange cardinal functions of Chebyshev-II nodes at x (barycentric form).

    Returns an array of shape (len(nodes),) + x.shape.
    """
    n = len(nodes)
    w = (-1.0) ** np.arange(n)
    w[0] *= 0.5
    w[-1] *= 0.5
    x = np.asarray(x, dtype=float)
    diff = x[None, ...] - nodes.reshape((n,) + (1,) * x.ndim)
    exact = diff == 0
    diff = np.where(exact, 1.0, diff)
    terms = w.reshape((n,) + (1,) * x.ndim) / diff
    out = terms / terms.sum(axis=0)
    hit = exact.any(axis=0)
    if np.any(hit):
        out = np.where(hit[None, ...], exact.astype(float), out)
    return out


@dataclass(frozen=True)
class SeparableSymbol:
    """Rank-R expansion sum_r phi_r(b(X)) psi_r(|xi|) of a DN symbol power."""

    grid: SpectralGrid
    p: float
    mu: float
    b_min: float
    b_max: float
    nodes: np.ndarray
    weights: np.ndarray   # (R, *grid.shape): phi_r(b(X))
    tables: np.ndarray    # (R, *grid.shape): psi_r(xi), full FFT layout
    error: float
    symmetric: bool = True

    @property
    def rank(self) -> int:
        return len(self.nodes)

    @property
    def is_flat(self) -> bool:
        return self.rank == 1


def _separable_error(grid, nodes, p, mu, b_min, b_max, k1):
    kap = np.unique(np.round(grid.k_abs().ravel(), 14))
    betas = np.linspace(b_min, b_max, 301)
    exact = symbol(betas[:, None], kap[None, :], p, mu, k1)
    tabs = symbol(nodes[:, None], kap[None, :], p, mu, k1)
    card = cardinal_functions(nodes, betas)
    approx = card.T @ tabs
    return float(np.max(np.abs(approx - exact)) / np.max(np.abs(exact)))


def build_separable(grid: SpectralGrid, b: np.ndarray | float, p: float = 1.0, mu: float = 1.0,
                    R: int | None = None) -> SeparableSymbol:
    """Chebyshev-in-depth separable expansion of g_b^p on ``grid``.

    With ``R=None`` the smallest rank meeting the error bound is used.
    Constant depth collapses to a single exact term.
    """
    b = np.broadcast_to(np.asarray(b, dtype=float), grid.shape)
    if np.any(b <= 0):
        raise ValueError("depth must be positive everywhere")
    if R is not None and R < 4:
        raise ValueError("rank must be at least 4")
    b_min, b_max = float(b.min()), float(b.max())
    k1 = grid.k_min
    kabs = grid.k_abs()
    if b_max - b_min <= 1e-12 * b_max:
        nodes = np.array([b_min])
        weights = np.ones((1, *grid.shape))
        tables = symbol(b_min, kabs, p, mu, k1)[None]
        return SeparableSymbol(grid, p, mu, b_min, b_max, nodes, weights, tables, 0.0)

    ranks = [R] if R is not None else range(4, MAX_RANK + 1)
    err = np.inf
    for r in ranks:
        nodes = chebyshev_nodes(b_min, b_max, r)
        err = _separable_error(grid, nodes, p, mu, b_min, b_max, k1)
        if err < SYMBOL_TOL:
            break
    if err >= SYMBOL_TOL:
        if R is not None and R < MAX_RANK:
            return build_separable(grid, b, p, mu, None)
        raise RankInsufficient(f"separable symbol error {err:.2e} at rank {len(nodes)}")
    weights = cardinal_functions(nodes, b)
    tables = symbol(nodes.reshape((-1,) + (1,) * grid.dims), kabs[None], p, mu, k1)
    return SeparableSymbol(grid, p, mu, b_min, b_max, nodes, weights, tables, err)


def dn_weyl_apply(s: SeparableSymbol, phi: np.ndarray) -> np.ndarray:
    """(1/2) sum_r [phi_r M_r(u) + M_r(phi_r u)]: self-adjoint on the grid inner product."""
    grid = s.grid
    grid.check(phi)
    if phi.shape != grid.shape:
        raise ValueError("field and symbol live on different grids")
    real = np.isrealobj(phi)
    uh = np.fft.fftn(phi)
    if s.is_flat:
        out = np.fft.ifftn(s.tables[0] * uh)
        return out.real if real else out
    axes = tuple(range(1, grid.dims + 1))
    left = np.fft.ifftn(s.tables * uh[None], axes=axes)
    out = np.sum(s.weights * left, axis=0)
    if s.symmetric:
        right = np.sum(s.tables * np.fft.fftn(s.weights * phi[None], axes=axes), axis=0)
        out = 0.5 * (out + np.fft.ifftn(right))
    return out.real if real else out


def _wrap_mid(grid: SpectralGrid, b: np.ndarray):
    """Depth at the periodic midpoints of every node pair, with both midpoints at half-period separation."""
    n = grid.counts[0]
    bh = fourier_refine(grid, b, 2)  # b at multiples of dx/2
    j = np.arange(n)
    d = (j[:, None] - j[None, :] + n // 2) % n - n // 2   # separation in [-n/2, n/2)
    mid2 = (2 * j[None, :] + d) % (2 * n)                 # 2*(x_m + d/2)/dx
    b_mid = bh[mid2]
    alt = bh[(mid2 + n) % (2 * n)]
    half = np.abs(d) == n // 2
    return d, b_mid, alt, half


def dense_weyl_oracle(grid: SpectralGrid, b: np.ndarray, p: float = 1.0, mu: float = 1.0):
    """Direct midpoint-rule Weyl matrix.

    Returns ``(G, asymmetry)`` where G is the symmetric part and asymmetry is
    ||G_raw - G_raw^T|| / ||G_raw|| (Frobenius).
    """
    if grid.dims != 1 or grid.counts[0] > 4096:
        raise ValueError("dense oracle is limited to 1D grids with at most 4096 points")
    n = grid.counts[0]
    dx = grid.spacing[0]
    xi = grid.wavenumbers(0)
    b = np.broadcast_to(np.asarray(b, dtype=float), grid.shape)
    d, b_mid, alt, half = _wrap_mid(grid, b)
    G = np.empty((n, n))
    phase = np.exp(1j * np.outer(np.arange(-(n // 2), n // 2) * dx, xi))  # rows indexed by d + n/2
    for j in range(n):
        sym = symbol(b_mid[j][:, None], xi[None, :], p, mu, grid.k_min)
        row = np.sum(phase[d[j] + n // 2] * sym, axis=1).real
        if np.any(half[j]):
            m = half[j]
            sym2 = symbol(alt[j][m][:, None], xi[None, :], p, mu, grid.k_min)
            row2 = np.sum(phase[d[j][m] + n // 2] * sym2, axis=1).real
            row[m] = 0.5 * (row[m] + row2)
        G[j] = row / n
    asym = np.linalg.norm(G - G.T) / np.linalg.norm(G)
    return 0.5 * (G + G.T), float(asym)


class _SigmaLaplace:
    """mu^2 d_xx + d_zz on z = zeta b(x), zeta in [-1, 0], spectral in x, FD in zeta.

    Unknowns are the interior-and-bottom levels j = 0..nz-1 (zeta_j = -1 + j dz);
    the surface level j = nz carries the Dirichlet data.
    """

    def __init__(self, grid: SpectralGrid, b: np.ndarray, mu: float, nz: int):
        self.grid, self.mu, self.nz = grid, mu, nz
        self.n = grid.counts[0]
        self.k = grid.wavenumbers(0)
        self.dz = 1.0 / nz
        self.zeta = -1.0 + self.dz * np.arange(nz + 1)
        self.b = np.asarray(b, dtype=float)
        bx = self.dx(self.b)
        bxx = self.dx(bx)
        self.s = bx / self.b
        self.sp = bxx / self.b - self.s ** 2
        self.bx = bx
        self.b0 = float(np.mean(self.b))
        self._factor_preconditioner()

    def dx(self, f, order=1):
        out = np.fft.ifft(np.fft.fft(f, axis=-1) * (1j * self.k) ** order, axis=-1)
        return out.real if np.isrealobj(f) else out

    def dzeta(self, F):
        """Centered first derivative in zeta at interior levels 1..nz-1."""
        return (F[2:] - F[:-2]) / (2 * self.dz)

    def apply(self, F):
        """Residual rows for all nz+1 levels; F has shape (nz+1, n)."""
        mu2, dz = self.mu ** 2, self.dz
        z = self.zeta[1:-1, None]
        Fz = self.dzeta(F)
        Fzz = (F[2:] - 2 * F[1:-1] + F[:-2]) / dz ** 2
        Fxx = self.dx(F[1:-1], 2)
        Fxz = self.dx(Fz)
        interior = (mu2 * (Fxx - 2 * z * self.s * Fxz + z ** 2 * self.s ** 2 * Fzz
                           + z * (self.s ** 2 - self.sp) * Fz)
                    + Fzz / self.b ** 2)
        Fz0 = (-3 * F[0] + 4 * F[1] - F[2]) / (2 * dz)
        bottom = Fz0 / self.b + mu2 * self.bx * (self.dx(F[0]) + self.s * Fz0)
        return np.vstack([bottom[None], interior, F[-1][None]])

    def _factor_preconditioner(self):
        """Per-mode LU of the flat-bottom (b = mean b) operator."""
        nz, dz, b0 = self.nz, self.dz, self.b0
        self._lu = []
        for kk in self.k:
            A = np.zeros((nz + 1, nz + 1))
            A[0, :3] = np.array([-3, 4, -1]) / (2 * dz) / b0
            for j in range(1, nz):
                A[j, j - 1] = A[j, j + 1] = 1 / (dz ** 2 * b0 ** 2)
                A[j, j] = -2 / (dz ** 2 * b0 ** 2) - self.mu ** 2 * kk ** 2
            A[nz, nz] = 1.0
            self._lu.append(lu_factor(A))

    def precondition(self, R):
        Rh = np.fft.fft(R, axis=1)
        out = np.empty_like(Rh)
        for i, lu in enumerate(self._lu):
            out[:, i] = lu_solve(lu, Rh[:, i])
        return np.fft.ifft(out, axis=1).real

    def surface_flux(self, F):
        dz = self.dz
        Fz = (3 * F[-1] - 4 * F[-2] + F[-3]) / (2 * dz)
        return Fz / self.b


def bvp_oracle(grid: SpectralGrid, phi: np.ndarray, b: np.ndarray, mu: float = 1.0,
               nz: int = 64, tol: float = 1e-13) -> np.ndarray:
    """DN map from a direct Laplace solve in terrain-following coordinates.

    Solves mu^2 phi_xx + phi_zz = 0 under the surface with phi = data at z = 0
    and a no-flux bottom, then returns d_z phi(z=0) / mu (same normalization
    as :func:`dn_flat`). x is Fourier collocation; the vertical uses
    second-order differences on ``nz`` intervals.
    """
    if grid.dims != 1:
        raise ValueError("bvp_oracle supports 1D surfaces only")
    if nz < 64:
        raise ValueError("use at least 64 vertical levels")
    b = np.broadcast_to(np.asarray(b, dtype=float), grid.shape)
    if np.any(b <= 0):
        raise ValueError("depth must be positive")
    op = _SigmaLaplace(grid, b, mu, nz)
    shape = (nz + 1, grid.counts[0])
    rhs = np.zeros(shape)
    rhs[-1] = phi
    # initial guess from the flat-bottom solve
    F0 = op.precondition(rhs)
    r0 = rhs - op.apply(F0)
    A = LinearOperator((r0.size, r0.size), matvec=lambda v: op.apply(v.reshape(shape)).ravel())
    M = LinearOperator((r0.size, r0.size), matvec=lambda v: op.precondition(v.reshape(shape)).ravel())
    scale = np.linalg.norm(rhs)
    if np.linalg.norm(r0) <= tol * scale:
        dF = np.zeros(r0.size)
    else:
        dF, info = gmres(A, r0.ravel(), M=M, rtol=tol * scale / np.linalg.norm(r0),
                         atol=0.0, restart=60, maxiter=50)
        if info != 0:
            raise RuntimeError(f"terrain-following Laplace solve did not converge (info={info})")
    F = F0 + dF.reshape(shape)
    return op.surface_flux(F) / mu
