"""Time integration of the linear surface system

    d_t eta + div(U eta) - G(b) phi = 0
    d_t phi + U . grad phi + g eta  = 0

with spectral derivatives, RK4 stepping and relaxation sponges.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np

from . import physics
from .dn import SeparableSymbol, dn_weyl_apply
from .grid import SpectralGrid, derivative_multiplier

RK4_IMAG_BOUND = 2.8


class NumericalAbort(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class BulkCurrent(Protocol):
    """Analytic depth-dependent background flow in the (x, z) plane."""

    depth: float

    def velocity(self, x, z) -> tuple[np.ndarray, np.ndarray]: ...

    def strain(self, x, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(S_xx, S_xz, S_zz)."""
        ...


@dataclass(frozen=True)
class SpongeProfile:
    width: float = 0.1     # fraction of the domain per side
    strength: float = 1.0  # peak relaxation rate s0 (1/s)

    def rate(self, grid: SpectralGrid) -> np.ndarray:
        """Damping rate: zero in the interior, cubic smoothstep up to s0 at the edges."""
        out = np.zeros(grid.shape)
        for a, x in enumerate(grid.mesh()):
            length = grid.lengths[a]
            w = self.width * length
            # distance into the nearer layer, scaled to [0, 1]
            depth_in = np.maximum(np.maximum(w - x, x - (length - w)), 0.0) / w
            depth_in = np.minimum(depth_in, 1.0)
            out = np.maximum(out, depth_in ** 2 * (3 - 2 * depth_in))
        return self.strength * out

    def interior(self, grid: SpectralGrid) -> tuple[tuple[float, float], ...]:
        return tuple((self.width * L, (1 - self.width) * L) for L in grid.lengths)


@dataclass(frozen=True, eq=False)
class Environment:
    """Static medium on a grid.

    ``U`` has shape (dims, *grid.shape). ``sampler`` optionally evaluates the
    analytic depth and current at arbitrary points, ``sampler(X) -> (b, U)``
    with ``X`` of shape (dims, ...); ray tracing prefers it over interpolation.
    """

    grid: SpectralGrid
    b: np.ndarray
    U: np.ndarray
    bulk: BulkCurrent | None = None
    sponge: SpongeProfile | None = None
    g: float = physics.G
    sampler: Callable | None = None
    _damping: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        grid = self.grid
        b = np.broadcast_to(np.asarray(self.b, dtype=float), grid.shape).copy()
        if np.any(b <= 0):
            raise ValueError("depth must be positive everywhere")
        U = np.asarray(self.U, dtype=float)
        if U.shape != (grid.dims, *grid.shape):
            U = np.broadcast_to(U.reshape((grid.dims,) + (1,) * grid.dims) if U.size == grid.dims
                                else U, (grid.dims, *grid.shape)).copy()
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "U", U)
        damping = self.sponge.rate(grid) if self.sponge is not None else None
        object.__setattr__(self, "_damping", damping)

    @property
    def damping(self) -> np.ndarray | None:
        return self._damping

    @property
    def has_current(self) -> bool:
        return bool(np.any(self.U != 0))

    def without_sponge(self) -> "Environment":
        return replace(self, sponge=None, _damping=None)

    def spectral_tail(self) -> float:
        """Largest relative Fourier magnitude of b and U in the top quarter of the lattice."""
        kk = self.grid.k_abs()
        top = kk >= 0.75 * self.grid.k_max if self.grid.dims == 1 else kk >= 0.75 * min(self.grid.k_nyquist)
        worst = 0.0
        for f in (self.b, *self.U):
            fh = np.abs(np.fft.fftn(f))
            if fh.max() > 0:
                worst = max(worst, float(fh[top].max() / fh.max()))
        return worst


@dataclass(frozen=True)
class WaveState:
    eta: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.eta.shape != self.phi.shape:
            raise ValueError("eta and phi must share a grid")


def _grad_ops(grid):
    return [derivative_multiplier(grid, a, 1) for a in range(grid.dims)]


def rhs(state: WaveState, env: Environment, dn: SeparableSymbol):
    grid = env.grid
    grid.check(state.eta)
    if dn.grid != grid:
        raise ValueError("operator and environment live on different grids")
    eta, phi = state.eta, state.phi
    ops = _grad_ops(grid)
    div = np.zeros(grid.shape)
    adv = np.zeros(grid.shape)
    phih = np.fft.fftn(phi)
    for a in range(grid.dims):
        if np.any(env.U[a] != 0):
            div += np.fft.ifftn(ops[a] * np.fft.fftn(env.U[a] * eta)).real
            adv += env.U[a] * np.fft.ifftn(ops[a] * phih).real
    deta = -div + dn_weyl_apply(dn, phi)
    dphi = -adv - env.g * eta
    if env.damping is not None:
        deta -= env.damping * eta
        dphi -= env.damping * phi
    return deta, dphi


def max_frequency(env: Environment) -> float:
    kmax = env.grid.k_max
    speed = float(np.max(np.sqrt(np.sum(env.U ** 2, axis=0))))
    return speed * kmax + float(physics.sigma_mag(kmax, env.b.max(), env.g))


def cfl_dt(env: Environment, safety: float = 0.8) -> float:
    """RK4 step bound from the fastest oscillation (and sponge rate, if any)."""
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    rate = max_frequency(env)
    if env.sponge is not None:
        rate = float(np.hypot(rate, env.sponge.strength))
    return safety * RK4_IMAG_BOUND / rate


def step_rk4(state: WaveState, env: Environment, dn: SeparableSymbol, dt: float) -> WaveState:
    e, p = state.eta, state.phi
    k1 = rhs(state, env, dn)
    k2 = rhs(WaveState(e + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1]), env, dn)
    k3 = rhs(WaveState(e + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1]), env, dn)
    k4 = rhs(WaveState(e + dt * k3[0], p + dt * k3[1]), env, dn)
    eta = e + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    phi = p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(phi))):
        raise NumericalAbort(f"non-finite state at t={state.t + dt:.6g}", last_good=state)
    return WaveState(eta, phi, state.t + dt)


def integrate(state: WaveState, env: Environment, dn: SeparableSymbol, t_end: float, dt_max: float,
              every: float | None = None, callback: Callable[[WaveState], None] | None = None) -> WaveState:
    """Advance to ``t_end`` landing exactly on multiples of ``every`` (callback at each)."""
    every = every or (t_end - state.t)
    if callback is not None:
        callback(state)
    t0 = state.t
    n_out = int(round((t_end - t0) / every))
    nsub = max(1, int(np.ceil(every / dt_max - 1e-9)))
    dt = every / nsub
    for i in range(n_out):
        for _ in range(nsub):
            state = step_rk4(state, env, dn, dt)
        state = WaveState(state.eta, state.phi, t0 + (i + 1) * every)
        if callback is not None:
            callback(state)
    return state


def _envelope(grid: SpectralGrid, center, width) -> np.ndarray:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    width = np.atleast_1d(np.asarray(width, dtype=float))
    if len(center) != grid.dims or len(width) not in (1, grid.dims):
        raise ValueError("center needs one coordinate per axis")
    width = np.broadcast_to(width, (grid.dims,))
    if np.any(width < 4 * np.asarray(grid.spacing)):
        raise ValueError("packet width must span at least four grid spacings")
    X = grid.mesh()
    env = np.ones(grid.shape)
    for a in range(grid.dims):
        env *= np.exp(-(X[a] - center[a]) ** 2 / (2 * width[a] ** 2))
    return env


def packet_ic(grid: SpectralGrid, center, width, k0: float, amplitude: float) -> WaveState:
    """Gaussian-windowed carrier along x1 with phi = 0."""
    if abs(k0) > 0.5 * grid.k_nyquist[0]:
        raise ValueError("carrier is not resolved (above half the Nyquist wavenumber)")
    env = amplitude * _envelope(grid, center, width)
    theta = k0 * (grid.mesh()[0] - np.atleast_1d(center)[0])
    return WaveState(env * np.cos(theta), np.zeros(grid.shape))


def eigenmode_packet(grid: SpectralGrid, center, width, k0: float, amplitude: float, b: float,
                     g: float = physics.G) -> WaveState:
    """Right-moving packet: phi = (g/sigma) a sin(theta) alongside eta = a cos(theta)."""
    if abs(k0) > 0.5 * grid.k_nyquist[0]:
        raise ValueError("carrier is not resolved (above half the Nyquist wavenumber)")
    env = amplitude * _envelope(grid, center, width)
    theta = k0 * (grid.mesh()[0] - np.atleast_1d(center)[0])
    s = float(physics.sigma_mag(k0, b, g))
    return WaveState(env * np.cos(theta), (g / s) * env * np.sin(theta))


def harmonic_extension(grid: SpectralGrid, phi: np.ndarray, b0, z_levels) -> tuple[np.ndarray, np.ndarray]:
    """Bulk velocity (u, w) of the flat-bottom harmonic extension at each z level.

    Returns arrays of shape (len(z_levels), *grid.shape); 1D surfaces only.
    """
    if np.ndim(b0) != 0:
        b = np.asarray(b0)
        if np.ptp(b) > 1e-12 * b.max():
            raise ValueError("harmonic extension is available for a flat bottom only")
        b0 = float(b.flat[0])
    if grid.dims != 1:
        raise ValueError("harmonic extension is implemented for 1D surfaces")
    z = np.asarray(z_levels, dtype=float)
    if np.any(z < -b0 - 1e-12) or np.any(z > 1e-12):
        raise ValueError("z levels must lie in [-b0, 0]")
    k = grid.wavenumbers(0)
    kk = np.abs(k)
    ph = np.fft.fft(phi)
    # cosh(k(z+b))/cosh(kb) and k sinh(k(z+b))/cosh(kb) written to avoid overflow
    zz = z[:, None]
    e1 = np.exp(kk[None, :] * zz)
    e2 = np.exp(-kk[None, :] * (zz + 2 * b0))
    denom = 1 + np.exp(-2 * kk * b0)
    ch = (e1 + e2) / denom
    sh = kk * (e1 - e2) / denom
    dx = 1j * k
    dx[grid.counts[0] // 2] = 0
    u = np.fft.ifft(dx * ch * ph, axis=1).real
    w = np.fft.ifft(sh * ph, axis=1).real
    return u, w


def default_sponge_strength(k0: float, b_max: float, g: float = physics.G) -> float:
    return 4.0 * float(physics.sigma_mag(k0, b_max, g))
