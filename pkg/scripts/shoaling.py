"""Stationary shoaling check: E_b / E_a against C_g,a / C_g,b on a tanh slope (20 m to 3 m)."""

import numpy as np

from wavecurrent import physics as ph
from wavecurrent.diagnostics import energy_density
from wavecurrent.dn import build_separable
from wavecurrent.grid import SpectralGrid
from wavecurrent.media import periodize
from wavecurrent.solver import Environment, SpongeProfile, WaveState, cfl_dt, integrate


def main():
    L, N = 6000.0, 2048
    g = SpectralGrid((L,), (N,))
    x = g.coords()
    ba, bb = 20.0, 3.0
    depth = periodize(lambda X: 0.5 * (ba + bb) - 0.5 * (ba - bb) * np.tanh((X[0] - 3500) / 150), (L,), 0.1)
    b = depth(x[None])
    k0 = 2 * np.pi / 80
    om = float(ph.sigma_mag(k0, ba))
    env = Environment(g, b, np.zeros((1, N)), sponge=SpongeProfile(0.1, 4 * om))
    dn = build_separable(g, b)
    envl = 0.1 * 0.25 * (1 + np.tanh((x - 600) / 100)) * (1 - np.tanh((x - 3000) / 100))
    st = WaveState(envl * np.cos(k0 * x), ph.G / om * envl * np.sin(k0 * x))
    kb = ph.solve_wavenumber(om, bb)
    ma = np.abs(x - 3000.0) <= 4 * np.pi / k0
    mb = np.abs(x - 4300.0) <= 4 * np.pi / kb
    expected = float(ph.dsigma_dk(k0, ba) / ph.dsigma_dk(kb, bb))
    print(f"expected E_b/E_a = {expected:.4f}")

    def probe(s):
        e = energy_density(s, dn)
        ea, eb = e[ma].mean(), e[mb].mean()
        print(f"t={s.t:5.0f}  E_a={ea:.5f}  E_b={eb:.5f}  ratio={eb / ea if ea > 0 else 0:.4f}")

    integrate(st, env, dn, 330.0, cfl_dt(env, 0.25), every=10.0, callback=probe)


if __name__ == "__main__":
    main()
