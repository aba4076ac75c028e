"""Energy accounting for the surface system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dn import SeparableSymbol, dn_weyl_apply
from .grid import SpectralGrid, divergence
from .solver import Environment, WaveState, harmonic_extension


def energy_density(state: WaveState, dn: SeparableSymbol, g: float = 9.81) -> np.ndarray:
    """Pointwise (g eta^2 + phi G phi) / 2. May be locally negative."""
    return 0.5 * (g * state.eta ** 2 + state.phi * dn_weyl_apply(dn, state.phi))


def kinetic_potential(state: WaveState, dn: SeparableSymbol, g: float = 9.81) -> tuple[float, float]:
    """Integrated kinetic and potential energy."""
    grid = dn.grid
    ek = 0.5 * grid.integrate(state.phi * dn_weyl_apply(dn, state.phi))
    ep = 0.5 * g * grid.integrate(state.eta ** 2)
    return ek, ep


def total_energy(state: WaveState, dn: SeparableSymbol, g: float = 9.81) -> float:
    return dn.grid.integrate(energy_density(state, dn, g))


def surface_divergence_source(state: WaveState, env: Environment, half: bool = True) -> float:
    """-int div(U) (g/2) eta^2 dX.

    ``half=False`` gives the variant without the 1/2, -int div(U) g eta^2.
    """
    div_u = divergence(env.grid, env.U)
    factor = 0.5 if half else 1.0
    return -env.grid.integrate(div_u * factor * env.g * state.eta ** 2)


def production_integral(state: WaveState, env: Environment, nz: int = 32) -> float:
    """Bulk production -int int u . S(U) u dz dx over a flat bottom.

    Wave velocity comes from the flat-bottom harmonic extension; the strain
    comes analytically from the bulk-current descriptor. Gauss-Legendre in z.
    """
    if env.bulk is None:
        raise ValueError("production integral needs an analytic bulk current")
    if env.grid.dims != 1:
        raise ValueError("production integral is implemented for 1D surfaces")
    if np.ptp(env.b) > 1e-12 * env.b.max():
        raise ValueError("production integral requires a flat bottom")
    depth = float(env.b.flat[0])
    nodes, weights = np.polynomial.legendre.leggauss(nz)
    z = 0.5 * depth * (nodes - 1.0)
    wz = 0.5 * depth * weights
    u, w = harmonic_extension(env.grid, state.phi, depth, z)
    x = env.grid.coords()
    sxx, sxz, szz = env.bulk.strain(x[None, :], z[:, None])
    prod = -(u * u * sxx + 2 * u * w * sxz + w * w * szz)
    return float(np.sum(wz[:, None] * prod) * env.grid.spacing[0])


@dataclass
class EnergyReport:
    t: list[float] = field(default_factory=list)
    E_T: list[float] = field(default_factory=list)
    I_s: list[float] = field(default_factory=list)
    I_b: list[float] = field(default_factory=list)

    def record(self, t, e_total, i_s, i_b=0.0):
        self.t.append(float(t))
        self.E_T.append(float(e_total))
        self.I_s.append(float(i_s))
        self.I_b.append(float(i_b))

    @property
    def E_tilde(self) -> np.ndarray:
        t = np.asarray(self.t)
        src = np.asarray(self.I_s) + np.asarray(self.I_b)
        if len(t) == 0:
            return np.zeros(0)
        increments = 0.5 * (src[1:] + src[:-1]) * np.diff(t)
        return self.E_T[0] + np.concatenate([[0.0], np.cumsum(increments)])

    def rows(self):
        et = self.E_tilde
        return [dict(t=t, E_T=e, I_s=s, I_b=b, E_tilde=x)
                for t, e, s, b, x in zip(self.t, self.E_T, self.I_s, self.I_b, et)]


def budget_check(report: EnergyReport) -> float:
    """max_t |E_T - E_tilde| / E_T(0)."""
    if not report.t:
        raise ValueError("energy report is empty")
    e = np.asarray(report.E_T)
    return float(np.max(np.abs(e - report.E_tilde)) / abs(e[0]))


def envelope_extract(grid: SpectralGrid, eta: np.ndarray, k0: float | None = None) -> np.ndarray:
    """Magnitude of the analytic signal along x1.

    Meaningful for narrow-band signals around +/- k0; ``k0`` only documents
    the carrier and is not used by the demodulation itself.
    """
    k = grid.wavenumbers(0)
    shape = [1] * grid.dims
    shape[0] = grid.counts[0]
    weight = np.where(k > 0, 2.0, np.where(k == 0, 1.0, 0.0)).reshape(shape)
    analytic = np.fft.ifft(np.fft.fft(eta, axis=0) * weight, axis=0)
    return np.abs(analytic)
