"""Closed-form bathymetry and current families, and their periodic embedding.

Each family is a callable ``f(X)`` where ``X`` has shape (dims, ...). Depth
families return an array shaped like ``X[0]``; current families return an
array of shape (dims, ...).

The periodic solver needs periodic coefficients, while the closed forms are
generally not periodic (a parabolic current, a jet that is off at one edge).
:func:`periodize` blends each field into its periodic image inside the
sponge bands, leaving the interior untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dn import smooth_step
from .grid import SpectralGrid
from .solver import Environment, SpongeProfile


def gaussian(x, center, width):
    return np.exp(-(x - center) ** 2 / (2 * width ** 2))


def _sech2(x):
    return 1.0 / np.cosh(np.minimum(np.abs(x), 350.0)) ** 2


@dataclass(frozen=True)
class GaussianBumps:
    """base + sum_i amp_i prod_a B(x_a; center_ia, width_ia); axes with center None are skipped."""

    base: float
    bumps: tuple = ()

    def __call__(self, X):
        out = np.full(np.shape(X[0]), float(self.base))
        for bump in self.bumps:
            term = np.full(np.shape(X[0]), float(bump["amp"]))
            for a, (c, w) in enumerate(zip(bump["center"], bump["width"])):
                if c is not None and a < len(X):
                    term = term * gaussian(X[a], c, w)
            out = out + term
        return out


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, X):
        return np.full(np.shape(X[0]), float(self.value))


@dataclass(frozen=True)
class ParabolicOpposing:
    """U_1 = -scale (x_1 - origin)^2 / length^2."""

    scale: float
    length: float
    origin: float = 0.0

    def __call__(self, X):
        return -self.scale * (X[0] - self.origin) ** 2 / self.length ** 2


@dataclass(frozen=True)
class TanhShear:
    """Depth-dependent shear current over a flat bottom.

    U(x, z) = U0 + A tanh((x - x0)/w) cos(pi z / b),
    W(x, z) = -(A b / (pi w)) sech^2((x - x0)/w) sin(pi z / b),
    which is divergence free with W = 0 at the surface and the bottom.
    """

    U0: float
    amplitude: float
    center: float
    width: float
    depth: float

    def __call__(self, X):
        return self.U0 + self.amplitude * np.tanh((X[0] - self.center) / self.width)

    def velocity(self, x, z):
        s = (x - self.center) / self.width
        kz = np.pi / self.depth
        u = self.U0 + self.amplitude * np.tanh(s) * np.cos(kz * z)
        w = -(self.amplitude / (kz * self.width)) * _sech2(s) * np.sin(kz * z)
        return u, w

    def strain(self, x, z):
        s = (x - self.center) / self.width
        kz = np.pi / self.depth
        A, L = self.amplitude, self.width
        ux = (A / L) * _sech2(s) * np.cos(kz * z)
        uz = -A * kz * np.tanh(s) * np.sin(kz * z)
        # d/dx sech^2(s) = -2 sech^2(s) tanh(s) / L
        wx = (A / (kz * L)) * 2 * _sech2(s) * np.tanh(s) / L * np.sin(kz * z)
        return ux, 0.5 * (uz + wx), -ux


@dataclass(frozen=True)
class MeanderingJet:
    """U = (amp sech^2((x2 - m s sin(n x1))/s), cross * x1)."""

    amplitude: float
    sigma: float
    meander: float
    wavenumber: float
    cross: float

    def __call__(self, X):
        x1, x2 = X[0], X[1]
        arg = (x2 - self.meander * self.sigma * np.sin(self.wavenumber * x1)) / self.sigma
        return np.stack([self.amplitude * _sech2(arg), self.cross * x1])


FAMILIES = {
    "constant": Constant,
    "gaussian_bumps": GaussianBumps,
    "tanh_jet": TanhShear,
    "parabolic_opposing": ParabolicOpposing,
    "meandering_jet": MeanderingJet,
}


def make_family(name: str, params: dict):
    if name not in FAMILIES:
        raise KeyError(f"unknown analytic family {name!r}; known: {sorted(FAMILIES)}")
    params = dict(params)
    if name == "gaussian_bumps":
        params["bumps"] = tuple(
            {"amp": float(bp["amp"]),
             "center": tuple(None if c is None else float(c) for c in np.atleast_1d(bp["center"])),
             "width": tuple(None if w is None else float(w) for w in np.atleast_1d(bp["width"]))}
            for bp in params.get("bumps", ()))
    return FAMILIES[name](**params)


def periodize(f: Callable, lengths: Sequence[float], band: float = 0.1) -> Callable:
    """Blend ``f`` with its one-period shift inside [L - band L, L + band L] on every axis.

    The result is smooth and periodic and equals ``f`` on [band L, (1 - band) L].
    """
    def wrapped(X, axis=0, func=f):
        X = np.asarray(X, dtype=float)
        L = lengths[axis]
        lo = (1 - band) * L
        xa = np.mod(X[axis], L)
        xa = np.where(xa < band * L, xa + L, xa)   # unwrap into [band L, L + band L)
        t = (xa - lo) / (2 * band * L)
        s = smooth_step(t)
        Xa = X.copy()
        Xa[axis] = xa
        Xb = X.copy()
        Xb[axis] = xa - L
        fa, fb = func(Xa), func(Xb)
        return (1 - s) * fa + s * fb

    g = f
    for axis in range(len(lengths)):
        g = (lambda h, ax: (lambda X: wrapped(X, ax, h)))(g, axis)
    return g


def build_environment(grid: SpectralGrid, depth: Callable, current: Callable | None = None,
                      bulk=None, sponge: SpongeProfile | None = None, g: float = 9.81,
                      band: float | None = None) -> Environment:
    """Sample analytic fields on ``grid`` (periodized within the sponge bands)."""
    band = band if band is not None else (sponge.width if sponge is not None else 0.1)
    dims = grid.dims

    def current_vec(X):
        if current is None:
            return np.zeros((dims,) + np.shape(X[0]))
        u = np.asarray(current(X))
        if u.shape == np.shape(X[0]):
            return np.stack([u] + [np.zeros_like(u)] * (dims - 1))
        return u

    dep = periodize(depth, grid.lengths, band)
    cur = periodize(current_vec, grid.lengths, band)
    X = np.stack(grid.mesh())

    def sampler(P):
        P = np.asarray(P, dtype=float)
        return dep(P), cur(P)

    return Environment(grid, dep(X), cur(X), bulk=bulk, sponge=sponge, g=g, sampler=sampler)
