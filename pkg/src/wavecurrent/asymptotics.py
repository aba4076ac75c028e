"""Asymptotic models: rays, steady wavenumber fields, wave-energy transport,
the linear Schrodinger envelope equation and the mild-slope equation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import physics
from .dn import SeparableSymbol, dn_weyl_apply
from .grid import SpectralGrid, divergence, gradient, interpolate, spectral_derivative
from .solver import Environment, SpongeProfile


# --------------------------------------------------------------------- rays

class RayTerminated(RuntimeError):
    pass


@dataclass(frozen=True)
class RayState:
    X: np.ndarray
    k: np.ndarray
    action: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "X", np.atleast_1d(np.asarray(self.X, dtype=float)))
        object.__setattr__(self, "k", np.atleast_1d(np.asarray(self.k, dtype=float)))


class _Medium:
    """Point sampler of depth, current and their gradients."""

    def __init__(self, env: Environment):
        self.env = env
        self.grid = env.grid
        self.dims = env.grid.dims
        self.h = 1e-4 * min(env.grid.spacing)
        if env.sampler is None:
            self._db = gradient(self.grid, env.b)
            self._dU = np.stack([gradient(self.grid, env.U[a]) for a in range(self.dims)])

    def fields(self, X):
        if self.env.sampler is not None:
            b, U = self.env.sampler(np.asarray(X, dtype=float).reshape(self.dims, -1))
            return float(b[0]), np.asarray(U)[:, 0]
        pt = tuple(X)
        b = interpolate(self.grid, self.env.b, pt)
        U = np.array([interpolate(self.grid, self.env.U[a], pt) for a in range(self.dims)])
        return b, U

    def omega(self, X, k):
        b, U = self.fields(X)
        return float(U @ k + physics.sigma(k, b, self.env.g))

    def grad_omega(self, X, k):
        """-dk/dt: grad_X of U.k + sigma(k, b) at fixed k."""
        if self.env.sampler is not None:
            out = np.empty(self.dims)
            for a in range(self.dims):
                e = np.zeros(self.dims)
                e[a] = self.h
                out[a] = (self.omega(X + e, k) - self.omega(X - e, k)) / (2 * self.h)
            return out
        pt = tuple(X)
        b, _ = self.fields(X)
        db = np.array([interpolate(self.grid, self._db[a], pt) for a in range(self.dims)])
        dU = np.array([[interpolate(self.grid, self._dU[i, a], pt) for a in range(self.dims)]
                       for i in range(self.dims)])  # dU[i, a] = d U_i / d x_a
        ds_db = float(physics.dsigma_db(np.linalg.norm(k), b, self.env.g))
        return ds_db * db + dU.T @ k

    def velocity(self, X, k):
        b, U = self.fields(X)
        return U + _cg_vec(k, b, self.env.g)


def _cg_vec(k, b, g):
    kappa = np.linalg.norm(k)
    return float(physics.dsigma_dk(kappa, b, g)) * k / kappa


def ray_rhs(r: RayState, env: Environment, medium: _Medium | None = None):
    """(dX/dt, dk/dt, dA/dt) for a ray in a static medium."""
    m = medium or _Medium(env)
    kmax = env.grid.k_max
    if np.linalg.norm(r.k) < 1e-6 * kmax:
        raise RayTerminated(f"wavenumber collapsed at t={r.t:.6g}")
    dX = m.velocity(r.X, r.k)
    dk = -m.grad_omega(r.X, r.k)
    # explicit divergence of dX/dt at fixed k over one grid spacing
    div = 0.0
    for a in range(m.dims):
        h = env.grid.spacing[a]
        e = np.zeros(m.dims)
        e[a] = h
        div += (m.velocity(r.X + e, r.k)[a] - m.velocity(r.X - e, r.k)[a]) / (2 * h)
    return dX, dk, -div * r.action


@dataclass
class Trajectory:
    t: list = field(default_factory=list)
    X: list = field(default_factory=list)
    k: list = field(default_factory=list)
    action: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    omega: list = field(default_factory=list)
    status: str = "complete"

    @property
    def E(self) -> np.ndarray:
        return np.asarray(self.sigma) * np.asarray(self.action)

    def rows(self):
        out = []
        for t, X, k, a, s in zip(self.t, self.X, self.k, self.action, self.sigma):
            X2 = np.concatenate([X, [0.0]])[:2] if len(X) == 1 else X
            k2 = np.concatenate([k, [0.0]])[:2] if len(k) == 1 else k
            out.append(dict(t=t, x=X2[0], y=X2[1], kx=k2[0], ky=k2[1], sigma=s, action=a, E=s * a))
        return out


def medium_length(env: Environment) -> float:
    """Shortest variation length (range / max gradient) of depth and current; the box size if uniform."""
    grid = env.grid
    scale = np.inf
    for f in (env.b, *env.U):
        gmax = float(np.max(np.abs(gradient(grid, f))))
        if gmax > 0:
            scale = min(scale, (np.max(f) - np.min(f) + 1e-300) / gmax)
    return float(scale) if np.isfinite(scale) else float(min(grid.lengths))


def default_ray_dt(r0: RayState, env: Environment) -> float:
    scale = medium_length(env)
    speed = np.linalg.norm(_Medium(env).velocity(r0.X, r0.k))
    return 0.1 * scale / max(speed, 1e-12)


def ray_trace(r0: RayState, env: Environment, T: float, dt: float | None = None,
              every: int = 1, bounds=None) -> Trajectory:
    """RK4 ray integration; stops early (status recorded) on leaving ``bounds`` or k collapse.

    ``bounds`` defaults to the sponge interior if the environment has a sponge,
    else the whole periodic box.
    """
    m = _Medium(env)
    dt = dt or default_ray_dt(r0, env)
    if bounds is None:
        bounds = env.sponge.interior(env.grid) if env.sponge is not None \
            else tuple((0.0, L) for L in env.grid.lengths)
    traj = Trajectory()

    def emit(r):
        b, _ = m.fields(r.X)
        traj.t.append(r.t)
        traj.X.append(r.X.copy())
        traj.k.append(r.k.copy())
        traj.action.append(r.action)
        traj.sigma.append(float(physics.sigma(r.k, b, env.g)))
        traj.omega.append(m.omega(r.X, r.k))

    def f(X, k, A, t):
        return ray_rhs(RayState(X, k, A, t), env, m)

    r = r0
    emit(r)
    nsteps = int(np.ceil(T / dt - 1e-9))
    for i in range(nsteps):
        h = min(dt, T - r.t) if i == nsteps - 1 else dt
        try:
            a1 = f(r.X, r.k, r.action, r.t)
            a2 = f(r.X + 0.5 * h * a1[0], r.k + 0.5 * h * a1[1], r.action + 0.5 * h * a1[2], r.t)
            a3 = f(r.X + 0.5 * h * a2[0], r.k + 0.5 * h * a2[1], r.action + 0.5 * h * a2[2], r.t)
            a4 = f(r.X + h * a3[0], r.k + h * a3[1], r.action + h * a3[2], r.t)
        except RayTerminated:
            traj.status = "k_collapse"
            break
        X = r.X + h / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0])
        k = r.k + h / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1])
        A = r.action + h / 6 * (a1[2] + 2 * a2[2] + 2 * a3[2] + a4[2])
        r = RayState(X, k, A, r0.t + (i + 1) * dt if i < nsteps - 1 else r0.t + T)
        if any(not lo <= x <= hi for x, (lo, hi) in zip(r.X, bounds)):
            traj.status = "left_domain"
            emit(r)
            break
        if (i + 1) % every == 0 or i == nsteps - 1:
            emit(r)
    return traj


# ----------------------------------------------------------- steady fields

def steady_wavenumber_field(env: Environment, omega0: float, direction=None, branch: int = 1):
    """|k|(X) solving U.e |k| + branch sigma(|k|, b) = omega0 with e the propagation direction.

    Returns (kappa, k_vec) where k_vec has shape (dims, *grid.shape).
    In 2D ``direction`` is a unit vector or a unit-vector field (default x1).
    """
    grid = env.grid
    if grid.dims == 1:
        e = np.ones((1, *grid.shape))
    else:
        d = np.asarray(direction if direction is not None else (1.0, 0.0), dtype=float)
        e = np.broadcast_to(d.reshape((2,) + (1,) * (d.ndim == 1) * 2), (2, *grid.shape)) \
            if d.ndim == 1 else d
        e = e / np.sqrt(np.sum(e ** 2, axis=0))
    U_along = np.sum(env.U * e, axis=0)
    b = env.b
    g = env.g
    kappa = np.full(grid.shape, omega0 ** 2 / g)
    # vectorized Newton from the deep-water guess
    for _ in range(60):
        f = U_along * kappa + branch * physics.sigma_mag(kappa, b, g) - omega0
        df = U_along + branch * physics.dsigma_dk(kappa, b, g)
        step = f / df
        kappa = np.where((kappa - step > 0) & (df * branch > 0), kappa - step, 0.5 * kappa)
        if np.max(np.abs(f)) < 1e-13 * abs(omega0):
            break
    f = U_along * kappa + branch * physics.sigma_mag(kappa, b, g) - omega0
    bad = np.abs(f) > 1e-12 * abs(omega0)
    if np.any(bad):
        # warm-started scalar solves along x1, neighbour to neighbour
        flat_bad = np.argwhere(bad)
        for idx in flat_bad:
            idx = tuple(idx)
            prev = list(idx)
            prev[0] = (prev[0] - 1) % grid.counts[0]
            try:
                kappa[idx] = physics.solve_wavenumber(omega0, float(b[idx]), float(U_along[idx]), branch,
                                                      g, k_max=grid.k_max, guess=float(kappa[tuple(prev)]))
            except physics.NoRoot as err:
                x = [grid.coords(a)[i] for a, i in enumerate(idx)]
                raise physics.NoRoot(f"{err} at X={x}") from None
    return kappa, kappa * e


def _solve_k1(omega0, k2, b, U1, U2, g, k1):
    """k1 with U1 k1 + U2 k2 + sigma(|k|, b) = omega0, vectorized Newton from ``k1``."""
    for _ in range(60):
        kap = np.hypot(k1, k2)
        f = U1 * k1 + U2 * k2 + physics.sigma_mag(kap, b, g) - omega0
        df = U1 + physics.dsigma_dk(kap, b, g) * k1 / kap
        k1 = k1 - f / df
        if np.max(np.abs(f)) < 1e-13 * abs(omega0):
            return k1
    raise physics.NotConverged("k1 march did not converge")


def refracted_direction_field(env: Environment, omega0: float, x1_start: float, band: float = 0.1):
    """Unit propagation directions of a steady, curl-free wavenumber field in 2D.

    The field starts as k = (k1, 0) on the line x1 = x1_start and is marched
    outwards in x1 with d k2/d x1 = d k1/d x2 (RK4, spectral in x2), where k1
    closes the Doppler relation at frequency ``omega0``. k2 is tapered to zero
    inside the x2 sponge bands of relative width ``band`` so that the
    periodized band does not feed refraction back into the interior. Inside
    the sponge the directions are blended back to x1.
    """
    grid = env.grid
    if grid.dims != 2:
        raise ValueError("direction fields are for 2D grids")
    n1, n2 = grid.counts
    dx = grid.spacing[0]
    col_grid = SpectralGrid((grid.lengths[1],), (n2,))
    kq = col_grid.wavenumbers(0)
    filt = np.exp(-36.0 * (np.abs(kq) / col_grid.k_nyquist[0]) ** 36)
    taper = 1.0 - SpongeProfile(band, 1.0).rate(col_grid)
    j0 = int(np.argmin(np.abs(grid.coords(0) - x1_start)))
    b, U1, U2, g = env.b, env.U[0], env.U[1], env.g

    def k1_at(cols, k2, guess):
        vals = [_solve_k1(omega0, k2, b[j], U1[j], U2[j], g, guess) for j in cols]
        return sum(vals) / len(vals)

    def slope(cols, k2, guess):
        return spectral_derivative(col_grid, k1_at(cols, k2, guess))

    K1 = np.empty(grid.shape)
    K2 = np.zeros(grid.shape)
    start = _solve_k1(omega0, np.zeros(n2), b[j0], U1[j0], U2[j0], g, np.full(n2, omega0 ** 2 / g))
    K1[j0] = start
    for sgn, count in ((1, n1 - 1 - j0), (-1, j0)):
        k2 = np.zeros(n2)
        k1 = start
        for s in range(count):
            jp, jn = j0 + sgn * s, j0 + sgn * (s + 1)
            h = sgn * dx
            a1 = slope([jp], k2, k1)
            a2 = slope([jp, jn], k2 + 0.5 * h * a1, k1)
            a3 = slope([jp, jn], k2 + 0.5 * h * a2, k1)
            a4 = slope([jn], k2 + h * a3, k1)
            k2 = k2 + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
            k2 = np.fft.ifft(np.fft.fft(k2) * filt).real * taper
            k1 = _solve_k1(omega0, k2, b[jn], U1[jn], U2[jn], g, k1)
            K1[jn], K2[jn] = k1, k2
    norm = np.hypot(K1, K2)
    # inside the sponge the direction relaxes back to x1
    w = 1.0 - SpongeProfile(band, 1.0).rate(grid)
    d1 = w * K1 / norm + (1 - w)
    d2 = w * K2 / norm
    norm = np.hypot(d1, d2)
    return np.stack([d1 / norm, d2 / norm])


# ---------------------------------------------------------- wave energy

def spectral_filter(grid: SpectralGrid, order: int = 36, strength: float = 36.0) -> np.ndarray:
    filt = np.ones(grid.shape)
    kk = grid.k_mesh()
    for a in range(grid.dims):
        filt = filt * np.exp(-strength * (np.abs(kk[a]) / grid.k_nyquist[a]) ** order)
    return filt


@dataclass(frozen=True)
class ActionField:
    """Phase-averaged wave energy E on a steady wavenumber field."""

    grid: SpectralGrid
    E: np.ndarray
    k: np.ndarray            # (dims, *shape)
    omega0: float
    V: np.ndarray            # U + C_g, (dims, *shape)
    sigma: np.ndarray
    source: np.ndarray       # V . grad sigma / sigma
    t: float = 0.0
    clipped: float = 0.0

    @property
    def action(self) -> np.ndarray:
        return self.E / self.sigma


def prepare_action(env: Environment, E0: np.ndarray, omega0: float, direction=None) -> ActionField:
    kappa, kvec = steady_wavenumber_field(env, omega0, direction)
    grid = env.grid
    cg = physics.dsigma_dk(kappa, env.b, env.g)
    V = env.U + cg * kvec / kappa
    sig = physics.sigma_mag(kappa, env.b, env.g)
    src = np.sum(V * gradient(grid, sig), axis=0) / sig
    return ActionField(grid, np.asarray(E0, dtype=float), kvec, omega0, V, sig, src)


def action_cfl(a: ActionField) -> float:
    speed = float(np.max(np.sqrt(np.sum(a.V ** 2, axis=0))))
    return 0.8 * min(a.grid.spacing) / speed


def _energy_rhs(a: ActionField, E):
    return -divergence(a.grid, a.V * E) + a.source * E


def action_transport_step(a: ActionField, dt: float, filt: np.ndarray | None = None) -> ActionField:
    """One RK4 step of d_t E + div(V E) = E V.grad(sigma)/sigma, then spectral filtering and clipping."""
    if dt > action_cfl(a) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the transport CFL limit {action_cfl(a):g}")
    E = a.E
    k1 = _energy_rhs(a, E)
    k2 = _energy_rhs(a, E + 0.5 * dt * k1)
    k3 = _energy_rhs(a, E + 0.5 * dt * k2)
    k4 = _energy_rhs(a, E + dt * k3)
    E = E + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if filt is None:
        filt = spectral_filter(a.grid)
    E = np.fft.ifftn(np.fft.fftn(E) * filt).real
    neg = E < 0
    clip = -a.grid.integrate(np.where(neg, E, 0.0))
    E = np.where(neg, 0.0, E)
    return replace(a, E=E, t=a.t + dt, clipped=a.clipped + clip)


def alt_energy_source(env: Environment, a: ActionField) -> np.ndarray:
    """(U.grad sigma - C_g.grad(U.k)) / sigma, the alternative form of the energy source."""
    grid = a.grid
    cg = a.V - env.U
    uk = np.sum(env.U * a.k, axis=0)
    return (np.sum(env.U * gradient(grid, a.sigma), axis=0)
            - np.sum(cg * gradient(grid, uk), axis=0)) / a.sigma


# ------------------------------------------------------------ Schrodinger

@dataclass(frozen=True)
class SchrodingerField:
    """Coefficients of d_t A + V.grad A + c A - i mu div(D grad A) = 0."""

    grid: SpectralGrid
    V: np.ndarray            # (dims, *shape)
    D: np.ndarray            # 1D: (*shape,), 2D: (2, 2, *shape)
    c: np.ndarray            # (1/2) div V + V.grad sigma / (2 sigma)
    sigma: np.ndarray
    mu: float = 1.0


@dataclass(frozen=True)
class SchrodingerState:
    A: np.ndarray
    t: float = 0.0


def prepare_schrodinger(env: Environment, omega0: float, direction=None, mu: float = 1.0,
                        sources: bool = True) -> SchrodingerField:
    grid = env.grid
    kappa, kvec = steady_wavenumber_field(env, omega0, direction)
    cg = physics.dsigma_dk(kappa, env.b, env.g)
    V = env.U + cg * kvec / kappa
    sig = physics.sigma_mag(kappa, env.b, env.g)
    if grid.dims == 1:
        D = physics.diffraction_matrix(kvec[0], env.b, env.g)
    else:
        D = physics.diffraction_matrix(kvec, env.b, env.g)
    if sources:
        c = 0.5 * divergence(grid, V) + np.sum(V * gradient(grid, sig), axis=0) / (2 * sig)
    else:
        c = np.zeros(grid.shape)
    return SchrodingerField(grid, V, D, c, sig, mu)


def constant_schrodinger(grid: SpectralGrid, V, D, mu: float = 1.0) -> SchrodingerField:
    V = np.asarray(V, dtype=float).reshape((grid.dims,) + (1,) * grid.dims) * np.ones((grid.dims, *grid.shape))
    D = np.asarray(D, dtype=float)
    D = D * np.ones(grid.shape) if grid.dims == 1 else D.reshape(2, 2, 1, 1) * np.ones((2, 2, *grid.shape))
    return SchrodingerField(grid, V, D, np.zeros(grid.shape), np.ones(grid.shape), mu)


def schrodinger_rhs(f: SchrodingerField, A):
    grid = f.grid
    dA = [spectral_derivative(grid, A, a) for a in range(grid.dims)]
    adv = sum(f.V[a] * dA[a] for a in range(grid.dims))
    if grid.dims == 1:
        diff = spectral_derivative(grid, f.D * dA[0], 0)
    else:
        diff = sum(spectral_derivative(grid, sum(f.D[i, j] * dA[j] for j in range(2)), i) for i in range(2))
    return -adv - f.c * A + 1j * f.mu * diff


def schrodinger_cfl(f: SchrodingerField) -> float:
    """RK4 bound: dt (|V| k_max + mu |D| k_max^2) <= 0.8 * 2.8."""
    grid = f.grid
    speed = float(np.max(np.sqrt(np.sum(f.V ** 2, axis=0))))
    if grid.dims == 1:
        dnorm = float(np.max(np.abs(f.D)))
    else:
        dnorm = float(np.max(np.linalg.norm(np.moveaxis(f.D, (0, 1), (-2, -1)), ord=2, axis=(-2, -1))))
    kn = grid.k_max
    return 0.8 * 2.8 / (speed * kn + f.mu * dnorm * kn ** 2)


def schrodinger_step(s: SchrodingerState, f: SchrodingerField, dt: float) -> SchrodingerState:
    if dt > schrodinger_cfl(f) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the Schrodinger stability limit {schrodinger_cfl(f):g}")
    A = s.A
    k1 = schrodinger_rhs(f, A)
    k2 = schrodinger_rhs(f, A + 0.5 * dt * k1)
    k3 = schrodinger_rhs(f, A + 0.5 * dt * k2)
    k4 = schrodinger_rhs(f, A + dt * k3)
    return SchrodingerState(A + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), s.t + dt)


def schrodinger_kernel(grid: SpectralGrid, A0: np.ndarray, V, D, t: float, mu: float = 1.0) -> np.ndarray:
    """Exact constant-medium propagator exp(-i k.V t - i mu t k.D k) applied in Fourier space."""
    V = np.atleast_1d(np.asarray(V, dtype=float))
    D = np.asarray(D, dtype=float)
    if grid.dims == 1:
        if D.size != 1 or float(D) == 0:
            raise ValueError("1D diffraction coefficient must be a nonzero scalar")
        k = grid.wavenumbers(0)
        phase = k * V[0] * t + mu * t * float(D) * k ** 2
    else:
        D = D.reshape(2, 2)
        if abs(np.linalg.det(D)) == 0:
            raise ValueError("diffraction matrix is singular")
        kx, ky = grid.k_mesh()
        phase = (kx * V[0] + ky * V[1]) * t + mu * t * (D[0, 0] * kx * kx + 2 * D[0, 1] * kx * ky
                                                      + D[1, 1] * ky * ky)
    return np.fft.ifftn(np.fft.fftn(A0) * np.exp(-1j * phase))


def schrodinger_energy(f: SchrodingerField, A: np.ndarray, g: float = physics.G) -> np.ndarray:
    """Phase-averaged energy sigma^2 |A|^2 / (2 g) of a potential envelope A."""
    return f.sigma ** 2 * np.abs(A) ** 2 / (2 * g)


# --------------------------------------------------------------- mild slope

def mild_slope_coefficients(omega: float, b: np.ndarray, g: float = physics.G):
    """kappa0 with sigma(kappa0, b) = omega and c = (sigma/kappa0) d sigma/d kappa."""
    b = np.asarray(b, dtype=float)
    kappa = np.empty_like(b)
    flat = kappa.reshape(-1)
    guess = None
    for i, bi in enumerate(b.reshape(-1)):
        flat[i] = physics.solve_wavenumber(omega, float(bi), 0.0, 1, g, guess=guess)
        guess = flat[i]
    c = omega / kappa * physics.dsigma_dk(kappa, b, g)
    return kappa, c


def _mild_slope_operator(grid: SpectralGrid, omega: float, b, g):
    n = grid.counts[0]
    kappa, c = mild_slope_coefficients(omega, b, g)
    k = grid.wavenumbers(0).copy()
    k[n // 2] = 0.0
    F = np.fft.fft(np.eye(n), axis=0)
    Dm = np.fft.ifft(1j * k[:, None] * F, axis=0).real       # spectral d/dx matrix
    L = Dm @ (c[:, None] * Dm) + np.diag(kappa ** 2 * c)
    return 0.5 * (L + L.T)


def mild_slope_solve(grid: SpectralGrid, b: np.ndarray, omega_guess: float, g: float = physics.G):
    """Periodic solution of (c psi')' + kappa0^2 c psi = 0.

    The frequency is adjusted near ``omega_guess`` until the operator has a
    null vector (the wave train fits the periodic box). Fourier collocation
    in x. Returns (omega, psi) with max|psi| = 1.
    """
    if grid.dims != 1:
        raise ValueError("mild-slope solve is 1D")
    ev0 = np.linalg.eigvalsh(_mild_slope_operator(grid, omega_guess, b, g))
    j = int(np.argmin(np.abs(ev0)))

    def branch(om):
        return np.linalg.eigvalsh(_mild_slope_operator(grid, om, b, g))[j]

    lo, hi = omega_guess, omega_guess
    f0 = branch(omega_guess)
    step = 0.02 * omega_guess
    for _ in range(60):
        lo, hi = lo - step, hi + step
        if np.sign(branch(lo)) != np.sign(f0):
            hi = lo + step
            break
        if np.sign(branch(hi)) != np.sign(f0):
            lo = hi - step
            break
    omega = brentq(branch, lo, hi, xtol=1e-14, rtol=1e-15)
    w, vecs = np.linalg.eigh(_mild_slope_operator(grid, omega, b, g))
    psi = vecs[:, j]
    return omega, psi / np.max(np.abs(psi))


def mild_slope_residual(psi: np.ndarray, omega: float, dn: SeparableSymbol, g: float = physics.G) -> float:
    """||g G psi - omega^2 psi||_inf / ||omega^2 psi||_inf."""
    r = g * dn_weyl_apply(dn, psi) - omega ** 2 * psi
    return float(np.max(np.abs(r)) / np.max(np.abs(omega ** 2 * psi)))
