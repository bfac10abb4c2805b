import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tomolens.fixtures import golden_reconstructions, load_fixtures

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_hermitian(rng, dim=4):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (z + z.conj().T) / 2


def random_density(rng, rank=4, dim=4):
    """Normalized Wishart sample: G G^dagger / Tr, G of shape (dim, rank)."""
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture(scope="session")
def fix():
    return load_fixtures()


@pytest.fixture(scope="session")
def golden(fix):
    return golden_reconstructions(fix)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the terminal summary, then assert."""
    def record(label: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else ""))
        print(ACCEPTANCE_LINES[-1])
        assert ok, f"{label}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
