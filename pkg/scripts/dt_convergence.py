"""Time-step convergence of the exact solver on a flat-bottom mode with a current.

Halving dt should cut the error by 16 (RK4).
"""

import numpy as np

from wavecurrent import physics as ph
from wavecurrent.dn import build_separable
from wavecurrent.grid import SpectralGrid
from wavecurrent.solver import Environment, WaveState, integrate


def main():
    g = SpectralGrid((400.0,), (128,))
    x = g.coords()
    k = 2 * np.pi * 8 / 400.0
    b, U = 9.0, 0.3
    env = Environment(g, b, np.full((1, 128), U))
    dn = build_separable(g, b)
    om = U * k + float(ph.sigma_mag(k, b))
    T = 30.0
    exact = np.cos(k * x - om * T)
    phi0 = ph.G / float(ph.sigma_mag(k, b)) * np.sin(k * x)
    prev = None
    for n in (40, 80, 160, 320):
        st = integrate(WaveState(np.cos(k * x), phi0), env, dn, T, T / n)
        err = np.max(np.abs(st.eta - exact))
        ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
        print(f"steps={n:<4d} err={err:.3e}{ratio}")
        prev = err


if __name__ == "__main__":
    main()
