import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.differing_executors],
)
settings.register_profile("stress", parent=settings.get_profile("default"), max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_random(grid, rng, modes=8):
    """Real field with random coefficients on the lowest ``modes`` wavenumbers per axis."""
    fh = np.zeros(grid.shape, dtype=complex)
    idx = tuple(slice(0, modes) for _ in range(grid.dims))
    fh[idx] = rng.standard_normal(fh[idx].shape) + 1j * rng.standard_normal(fh[idx].shape)
    fh.flat[0] = 0
    return np.fft.ifftn(fh).real * grid.size


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion (from the ``criterion`` user property)."""
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and rep.passed:
                continue
            verdict = "PASS" if rep.passed else "FAIL"
            lines.append((props["criterion"], f"{verdict}  C{props['criterion']:<2d} {props.get('title', '')}"
                                              f"  [{props.get('measured', 'no measurement')}]"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
