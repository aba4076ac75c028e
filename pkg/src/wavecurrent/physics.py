"""Linear dispersion kinematics for gravity waves on a current over finite depth.

All functions broadcast over numpy arrays. Wavenumber vectors carry their
components on the leading axis (``k[0]``, ``k[1]``); a scalar or 1-vector is
treated as 1D.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

G = 9.81


class NoRoot(ValueError):
    """The dispersion relation has no root on the requested branch (e.g. blocking)."""


class NotConverged(RuntimeError):
    """Newton and bisection both failed to reach tolerance."""


def _check_depth(b):
    if np.any(np.asarray(b) <= 0):
        raise ValueError("depth must be positive")


def _kmag(k):
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        return np.abs(k)
    if k.shape[0] == 1:
        return np.abs(k[0])
    if k.shape[0] == 2:
        return np.hypot(k[0], k[1])
    return np.abs(k)


def sigma_mag(kappa, b, g=G):
    """Intrinsic frequency as a function of |k|."""
    _check_depth(b)
    kappa = np.abs(np.asarray(kappa, dtype=float))
    return np.sqrt(g * kappa * np.tanh(b * kappa))


def sigma(k, b, g=G):
    """sqrt(g|k| tanh(b|k|))."""
    return sigma_mag(_kmag(k), b, g)


def _sech2(x):
    x = np.minimum(np.abs(x), 350.0)
    return 1.0 / np.cosh(x) ** 2


def dsigma_dk(kappa, b, g=G):
    """d sigma / d|k| with its shallow-water limit sqrt(g b) at k = 0."""
    _check_depth(b)
    kappa = np.abs(np.asarray(kappa, dtype=float))
    bk = b * kappa
    s = sigma_mag(kappa, b, g)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = g * (np.tanh(bk) + bk * _sech2(bk)) / (2 * s)
    return np.where(kappa > 0, out, np.sqrt(g * np.broadcast_to(b, np.shape(out))))


def d2sigma_dk2(kappa, b, g=G):
    """Second radial derivative of sigma(|k|)."""
    _check_depth(b)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValueError("|k| must be positive")
    bk = b * kappa
    s = sigma_mag(kappa, b, g)
    s2p = g * (np.tanh(bk) + bk * _sech2(bk))            # (sigma^2)'
    s2pp = 2 * g * b * _sech2(bk) * (1 - bk * np.tanh(bk))  # (sigma^2)''
    # sigma = sqrt(F): sigma'' = F''/(2 sigma) - F'^2/(4 sigma^3)
    return s2pp / (2 * s) - s2p ** 2 / (4 * s ** 3)


def dsigma_db(kappa, b, g=G):
    """Partial derivative of sigma with respect to depth."""
    _check_depth(b)
    kappa = np.abs(np.asarray(kappa, dtype=float))
    s = sigma_mag(kappa, b, g)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = g * kappa ** 2 * _sech2(b * kappa) / (2 * s)
    return np.where(kappa > 0, out, 0.0)


def group_velocity(k, b, g=G):
    """C_g = grad_k sigma. Returns the same layout as ``k``."""
    k = np.asarray(k, dtype=float)
    kappa = _kmag(k)
    cg = dsigma_dk(kappa, b, g)
    if k.ndim == 0:
        return np.sign(k) * cg if k != 0 else cg
    if k.shape[0] in (1, 2):
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(kappa > 0, k / kappa, 0.0)
        if k.shape[0] == 2:
            unit = np.where(kappa > 0, unit, np.array([1.0, 0.0]).reshape((2,) + (1,) * (k.ndim - 1)))
        else:
            unit = np.where(kappa > 0, unit, 1.0)
        return unit * cg
    return np.sign(k) * cg


def doppler_omega(k, b, U, branch=+1, g=G):
    """omega = U.k +/- sigma(k, b)."""
    k = np.asarray(k, dtype=float)
    U = np.asarray(U, dtype=float)
    if k.ndim == 0 or k.shape[0] not in (1, 2):
        udotk = U * k
    else:
        udotk = np.sum(U * k, axis=0)
    return udotk + branch * sigma(k, b, g)


def solve_wavenumber(omega, b, U_along=0.0, branch=+1, g=G, k_max=None, guess=None,
                     tol=1e-12, max_iter=50):
    """Positive root kappa of U_along*kappa + branch*sigma(kappa, b) = omega.

    Newton from ``guess`` (default omega^2/g), with a bisection fallback on
    [1e-8, 10 k_max]. Raises :class:`NoRoot` if the bracket holds no sign
    change and :class:`NotConverged` if iteration stalls.
    """
    _check_depth(b)
    if k_max is None:
        k_max = max(10.0 * omega ** 2 / g, 10.0 / b, 1.0)

    def f(kappa):
        return U_along * kappa + branch * float(sigma_mag(kappa, b, g)) - omega

    def df(kappa):
        return U_along + branch * float(dsigma_dk(kappa, b, g))

    scale = max(abs(omega), 1e-300)
    kappa = guess if guess is not None else omega ** 2 / g
    if not np.isfinite(kappa) or kappa <= 0:
        kappa = abs(omega) / np.sqrt(g * b) + 1e-6
    for _ in range(max_iter):
        fk = f(kappa)
        if abs(fk) < tol * scale:
            return kappa
        d = df(kappa)
        if d == 0 or not np.isfinite(d):
            break
        nxt = kappa - fk / d
        if not (0 < nxt < 10 * k_max):
            break
        kappa = nxt
    # Newton escaped or stalled: need a bracket on the branch through the guess
    lo, hi = 1e-8, 10 * k_max
    flo, fhi = f(lo), f(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoRoot(f"no wavenumber for omega={omega:g} with depth {b:g} and current {U_along:g}")
    try:
        root = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as err:
        raise NotConverged(str(err)) from err
    if abs(f(root)) > 1e-10 * scale:
        raise NotConverged(f"residual {f(root):g} at kappa={root:g}")
    return root


def diffraction_matrix(k, b, g=G):
    """D = (1/2) Hessian of sigma in k.

    Scalar in 1D; a 2x2 array (leading two axes) in 2D.
    """
    k = np.asarray(k, dtype=float)
    kappa = _kmag(k)
    if np.any(kappa == 0):
        raise ValueError("diffraction matrix undefined at k = 0")
    radial = 0.5 * d2sigma_dk2(kappa, b, g)
    if k.ndim == 0 or k.shape[0] == 1:
        return radial if k.ndim == 0 else radial
    tangential = 0.5 * dsigma_dk(kappa, b, g) / kappa
    ux, uy = k[0] / kappa, k[1] / kappa
    return np.array([
        [radial * ux * ux + tangential * uy * uy, (radial - tangential) * ux * uy],
        [(radial - tangential) * ux * uy, radial * uy * uy + tangential * ux * ux],
    ])
