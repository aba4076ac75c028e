"""Mild-slope residual against the slope parameter delta (expected rate 2).

    python scripts/mild_slope_rate.py [--b0 10] [--amp 5] [--wavelength 60]
"""

import argparse

import numpy as np

from wavecurrent import asymptotics as asy
from wavecurrent import physics as ph
from wavecurrent.dn import build_separable
from wavecurrent.grid import SpectralGrid


def residual(b0, amp, delta, lam):
    L = 2 * np.pi * amp / delta
    n = int(2 ** np.ceil(np.log2(L / (lam / 24))))
    g = SpectralGrid((L,), (n,))
    b = b0 + amp * np.cos(2 * np.pi * g.coords() / L)
    kg = 2 * np.pi * round(L / lam) / L
    om, psi = asy.mild_slope_solve(g, b, float(ph.sigma_mag(kg, b0)))
    return n, om, asy.mild_slope_residual(psi, om, build_separable(g, b))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--b0", type=float, default=10.0)
    p.add_argument("--amp", type=float, default=5.0)
    p.add_argument("--wavelength", type=float, default=60.0)
    p.add_argument("--deltas", default="0.1,0.05,0.025")
    args = p.parse_args()
    deltas = [float(d) for d in args.deltas.split(",")]
    res = []
    for d in deltas:
        n, om, r = residual(args.b0, args.amp, d, args.wavelength)
        res.append(r)
        print(f"delta={d:<6g} N={n:<6d} omega={om:.6f} residual={r:.3e}")
    print(f"slope {np.polyfit(np.log(deltas), np.log(res), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
