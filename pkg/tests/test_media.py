import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecurrent import media
from wavecurrent.grid import SpectralGrid, spectral_derivative
from wavecurrent.solver import SpongeProfile


def test_families_closed_forms():
    X = np.array([[0.0, 1000.0, 2000.0]])
    assert np.allclose(media.Constant(4.0)(X), 4.0)
    assert np.allclose(media.ParabolicOpposing(5.0, 2000.0)(X), [0.0, -1.25, -5.0])
    bumps = media.make_family("gaussian_bumps", {"base": 10.0, "bumps": [{"amp": -2.0, "center": 1000.0, "width": 50.0}]})
    assert bumps(X)[1] == pytest.approx(8.0)
    assert bumps(X)[0] == pytest.approx(10.0)
    with pytest.raises(KeyError):
        media.make_family("nope", {})


def test_gaussian_bumps_skip_axis():
    f = media.make_family("gaussian_bumps", {"base": 5.0, "bumps": [{"amp": 1.0, "center": [None, 10.0], "width": [None, 2.0]}]})
    X = np.array([[0.0, 500.0], [10.0, 10.0]])
    assert np.allclose(f(X), 6.0)


@given(st.floats(-1.0, 1.0), st.floats(0.1, 1.0), st.floats(50.0, 400.0))
def test_tanh_shear_divergence_free(U0, A, width):
    sh = media.TanhShear(U0, A, 1000.0, width, 9.0)
    x = np.linspace(600.0, 1400.0, 41)
    z = np.linspace(-8.5, -0.5, 17)
    X, Z = np.meshgrid(x, z, indexing="ij")
    h = 1e-4
    ux = (sh.velocity(X + h, Z)[0] - sh.velocity(X - h, Z)[0]) / (2 * h)
    wz = (sh.velocity(X, Z + h)[1] - sh.velocity(X, Z - h)[1]) / (2 * h)
    assert np.max(np.abs(ux + wz)) < 1e-6 * max(A / width, 1e-12) + 1e-9
    u0, w0 = sh.velocity(x, 0.0)
    assert np.allclose(u0, sh(x[None]), atol=1e-12)
    assert np.allclose(w0, 0.0, atol=1e-15)
    assert np.allclose(sh.velocity(x, -9.0)[1], 0.0, atol=1e-12)


def test_meandering_jet_shape():
    jet = media.MeanderingJet(1.0, 100.0, 0.5, 2 * np.pi / 2000.0, 0.01)
    X = np.array([[0.0, 500.0], [0.0, 50.0]])
    U = jet(X)
    assert U.shape == (2, 2)
    assert U[0, 0] == pytest.approx(1.0)
    assert U[0, 1] == pytest.approx(1.0)  # on the meander crest
    assert np.allclose(U[1], [0.0, 5.0])


def test_periodize_interior_and_periodic():
    L = 2000.0
    f = media.ParabolicOpposing(5.0, L)
    p = media.periodize(f, (L,), 0.1)
    x = np.linspace(0.1 * L, 0.9 * L, 101)
    assert np.array_equal(p(x[None]), f(x[None]))
    xs = np.linspace(-300.0, 300.0, 61)
    assert np.allclose(p(xs[None]), p((xs + L)[None]), atol=1e-12)


def test_periodized_field_is_smooth():
    L = 2000.0
    g = SpectralGrid((L,), (1024,))
    env = media.build_environment(g, media.Constant(20.0), media.ParabolicOpposing(5.0, L))
    U = env.U[0]
    spec = np.abs(np.fft.rfft(U))
    assert spec[200:].max() < 1e-8 * spec.max()
    assert np.max(np.abs(spectral_derivative(g, U))) < 1.0


def test_build_environment_sampler_matches_grid():
    g = SpectralGrid((1000.0, 800.0), (64, 32))
    env = media.build_environment(g, media.Constant(9.0), media.MeanderingJet(0.5, 80.0, 0.3, 0.01, 0.0),
                                  sponge=SpongeProfile(0.1, 0.05))
    X = np.stack(g.mesh())
    b, U = env.sampler(X)
    assert np.allclose(b, env.b) and np.allclose(U, env.U)
    assert env.U.shape == (2, 64, 32)
