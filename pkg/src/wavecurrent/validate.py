"""Small-N invariant suite: operator, conservation and dispersion properties of every module.

Each check returns (value, tolerance); a check passes when value <= tolerance.
Failures are report content, never exceptions.
"""

from __future__ import annotations

import time
import traceback
from dataclasses import replace

import numpy as np

from . import asymptotics as asy
from . import physics
from .diagnostics import energy_density, kinetic_potential, total_energy
from .dn import build_separable, dn_flat, dn_weyl_apply
from .grid import SpectralGrid, fourier_refine, spectral_derivative
from .scenarios import BUILTIN_HASHES, BUILTIN_NAMES, builtin
from .solver import Environment, WaveState, cfl_dt, integrate, packet_ic, step_rk4
from .wigner import gaussian_wigner, wigner_transform

FAULTS = ("asymmetric",)


def _smooth_random(grid: SpectralGrid, rng: np.random.Generator, modes: int = 8) -> np.ndarray:
    """Real field with random coefficients on the lowest ``modes`` wavenumbers per axis."""
    fh = np.zeros(grid.shape, dtype=complex)
    idx = tuple(slice(0, modes) for _ in range(grid.dims))
    fh[idx] = rng.standard_normal(fh[idx].shape) + 1j * rng.standard_normal(fh[idx].shape)
    fh.flat[0] = 0
    return np.fft.ifftn(fh).real * grid.size


def _variable_depth(grid: SpectralGrid) -> np.ndarray:
    x = grid.coords(0)
    L = grid.lengths[0]
    b = 6.0 + 2.0 * np.cos(2 * np.pi * x / L) + 0.5 * np.sin(6 * np.pi * x / L)
    if grid.dims == 2:
        y = grid.coords(1)
        b = b[:, None] + 0.8 * np.cos(2 * np.pi * y / grid.lengths[1])[None, :]
    return b


class _Suite:
    def __init__(self, n: int, fault: str | None, seed: int):
        self.n = n
        self.fault = fault
        self.rng = np.random.default_rng(seed)
        self.g1 = SpectralGrid((400.0,), (n,))
        self.g2 = SpectralGrid((400.0, 200.0), (n, n // 2))

    def dn(self, grid, b, **kw):
        s = build_separable(grid, b, **kw)
        if self.fault == "asymmetric":
            s = replace(s, symmetric=False)
        return s

    # grid_spectral
    def derivative_exact(self):
        g = self.g1
        x = g.coords()
        m = 2 * np.pi * 5 / g.lengths[0]
        err = np.max(np.abs(spectral_derivative(g, np.sin(m * x)) - m * np.cos(m * x))) / m
        return err, 1e-12

    def refine_interpolates(self):
        g = self.g1
        x = g.coords()
        f = np.cos(2 * np.pi * 3 * x / g.lengths[0])
        fine = fourier_refine(g, f, 2)
        xf = np.arange(2 * g.counts[0]) * g.spacing[0] / 2
        return np.max(np.abs(fine - np.cos(2 * np.pi * 3 * xf / g.lengths[0]))), 1e-12

    # physics
    def dispersion_positive(self):
        k = np.linspace(1e-4, 2.0, 200)
        s = physics.sigma_mag(k, 5.0)
        cg = physics.dsigma_dk(k, 5.0)
        return float(np.sum(s <= 0) + np.sum(cg <= 0)), 0.0

    def doppler_roundtrip(self):
        worst = 0.0
        for b, U in ((3.0, 0.5), (20.0, -0.3), (9.0, 0.0)):
            om = float(physics.doppler_omega(0.1, b, U))
            k = physics.solve_wavenumber(om, b, U)
            worst = max(worst, abs(k - 0.1) / 0.1)
        return worst, 1e-10

    # dn_operator
    def self_adjoint_1d(self):
        return self._self_adjoint(self.g1)

    def self_adjoint_2d(self):
        return self._self_adjoint(self.g2)

    def _self_adjoint(self, grid):
        s = self.dn(grid, _variable_depth(grid))
        worst = 0.0
        for _ in range(10):
            u = _smooth_random(grid, self.rng)
            v = _smooth_random(grid, self.rng)
            gu, gv = dn_weyl_apply(s, u), dn_weyl_apply(s, v)
            lhs, rhs = np.vdot(u, gv), np.vdot(gu, v)
            worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(u) * np.linalg.norm(gv)))
        return worst, 1e-12

    def flat_reduces(self):
        g = self.g1
        phi = _smooth_random(g, self.rng)
        s = build_separable(g, np.full(g.shape, 7.0))
        return np.max(np.abs(dn_weyl_apply(s, phi) - dn_flat(g, phi, 7.0))) / np.max(np.abs(phi)), 1e-12

    def nonnegative(self):
        g = self.g1
        s = self.dn(g, _variable_depth(g))
        worst = 0.0
        for _ in range(10):
            u = _smooth_random(g, self.rng)
            q = float(np.vdot(u, dn_weyl_apply(s, u)).real)
            worst = max(worst, -q / (np.linalg.norm(u) ** 2))
        return worst, 1e-12

    # solver
    def energy_conserved(self):
        g = self.g1
        b = _variable_depth(g)
        env = Environment(g, b, np.zeros((1, *g.shape)))
        s = self.dn(g, b)
        k0 = 2 * np.pi / 50
        st = packet_ic(g, [200.0], [40.0], k0, 0.1)
        e0 = total_energy(st, s)
        # a short step keeps RK4 amplitude damping of the carrier below the tolerance
        dt = min(cfl_dt(env), 2 * np.pi / float(physics.sigma_mag(k0, b.max())) / 200)
        for _ in range(200):
            st = step_rk4(st, env, s, dt)
        return abs(total_energy(st, s) - e0) / e0, 1e-8

    def single_mode_phase(self):
        g = self.g1
        k0 = 2 * np.pi * 10 / g.lengths[0]
        env = Environment(g, 9.0, np.zeros((1, *g.shape)))
        s = build_separable(g, 9.0)
        om = float(physics.sigma_mag(k0, 9.0))
        x = g.coords()
        st = WaveState(np.cos(k0 * x), np.zeros(g.shape))
        T = 2 * np.pi / om
        st = integrate(st, env, s, T, T / 200)
        return np.max(np.abs(st.eta - np.cos(k0 * x))), 1e-6

    # diagnostics
    def energy_density_integrates(self):
        g = self.g1
        s = build_separable(g, _variable_depth(g))
        st = WaveState(_smooth_random(g, self.rng), _smooth_random(g, self.rng))
        ek, ep = kinetic_potential(st, s)
        tot = g.integrate(energy_density(st, s))
        return abs(tot - ek - ep) / abs(tot), 1e-12

    # asymptotics
    def ray_frequency(self):
        g = self.g1
        x = g.coords()
        L = g.lengths[0]

        def sampler(X):
            return 8.0 + 2 * np.cos(2 * np.pi * X[0] / L), 0.2 * np.sin(2 * np.pi * X / L)

        env = Environment(g, 8.0 + 2 * np.cos(2 * np.pi * x / L), 0.2 * np.sin(2 * np.pi * x / L),
                          sampler=sampler)
        tr = asy.ray_trace(asy.RayState([100.0], [0.15]), env, 60.0, dt=0.25)
        om = np.asarray(tr.omega)
        return float(np.max(np.abs(om - om[0])) / om[0]), 1e-7

    def schrodinger_vs_kernel(self):
        g = self.g1
        x = g.coords()
        V, D = 3.0, -2.0
        A0 = np.exp(-((x - 150.0) / 25.0) ** 2).astype(complex)
        f = asy.constant_schrodinger(g, [V], D)
        n = int(np.ceil(4 * 20.0 / asy.schrodinger_cfl(f)))
        st = asy.SchrodingerState(A0)
        for _ in range(n):
            st = asy.schrodinger_step(st, f, 20.0 / n)
        ref = asy.schrodinger_kernel(g, A0, [V], D, 20.0)
        return float(np.linalg.norm(st.A - ref) / np.linalg.norm(ref)), 1e-6

    def action_mass(self):
        g = self.g1
        x = g.coords()
        env = Environment(g, 10.0, np.zeros((1, *g.shape)))
        E0 = np.exp(-((x - 200.0) / 30.0) ** 2)
        a = asy.prepare_action(env, E0, float(physics.sigma_mag(0.1, 10.0)))
        m0 = g.integrate(a.E)
        dt = asy.action_cfl(a)
        for _ in range(50):
            a = asy.action_transport_step(a, dt)
        return abs(g.integrate(a.E) + a.clipped - m0) / m0, 1e-6

    # wigner
    def wigner_gaussian(self):
        g = SpectralGrid((400.0,), (self.n,))
        x = g.coords() - 200.0
        width, k0 = 20.0, 2 * np.pi * 6 / 400.0
        psi = np.exp(-x ** 2 / (2 * width ** 2)) * np.exp(1j * k0 * x)
        w = wigner_transform(g, psi)
        exact = gaussian_wigner(g.coords(), w.k, width, k0, 200.0)
        return float(np.max(np.abs(w.W - exact)) / np.max(exact)), 1e-4

    def wigner_marginal(self):
        g = SpectralGrid((400.0,), (self.n,))
        x = g.coords() - 200.0
        psi = np.exp(-x ** 2 / (2 * 20.0 ** 2)) * np.exp(1j * 0.1 * x)
        w = wigner_transform(g, psi)
        dens = np.abs(psi) ** 2
        return float(np.sum(np.abs(w.x_marginal() - dens)) / np.sum(dens)), 1e-3

    # cli
    def builtin_hashes(self):
        bad = sum(builtin(n).hash != BUILTIN_HASHES[n] for n in BUILTIN_NAMES)
        return float(bad), 0.0


CHECKS = [
    ("grid_spectral", "derivative_exact"),
    ("grid_spectral", "refine_interpolates"),
    ("physics", "dispersion_positive"),
    ("physics", "doppler_roundtrip"),
    ("dn_operator", "self_adjoint_1d"),
    ("dn_operator", "self_adjoint_2d"),
    ("dn_operator", "flat_reduces"),
    ("dn_operator", "nonnegative"),
    ("solver", "energy_conserved"),
    ("solver", "single_mode_phase"),
    ("diagnostics", "energy_density_integrates"),
    ("asymptotics", "ray_frequency"),
    ("asymptotics", "schrodinger_vs_kernel"),
    ("asymptotics", "action_mass"),
    ("wigner", "wigner_gaussian"),
    ("wigner", "wigner_marginal"),
    ("cli", "builtin_hashes"),
]


def validate_suite(quick: bool = False, fault: str | None = None, seed: int = 20240611) -> dict:
    """Run every invariant check; ``fault`` injects a known defect (test hook)."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; known: {', '.join(FAULTS)}")
    n = 64 if quick else 128
    suite = _Suite(n, fault, seed)
    results = []
    t0 = time.perf_counter()
    for module, name in CHECKS:
        tic = time.perf_counter()
        try:
            value, tol = getattr(suite, name)()
            ok = bool(np.isfinite(value) and value <= tol)
            entry = {"value": float(value), "tolerance": tol}
        except Exception as err:  # noqa: BLE001 - failures are report content
            ok = False
            entry = {"error": f"{type(err).__name__}: {err}", "trace": traceback.format_exc(limit=3)}
        results.append({"module": module, "check": name, "passed": ok,
                        "seconds": time.perf_counter() - tic, **entry})
    return {"quick": quick, "N": n, "seed": seed, "fault": fault, "passed": all(r["passed"] for r in results),
            "seconds": time.perf_counter() - t0, "checks": results}
