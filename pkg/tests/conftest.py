import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from seplsd import make_measure
from seplsd.measure import ModelSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_model(rng: np.random.Generator, K: int | None = None, max_atoms: int = 8) -> ModelSpec:
    """Random valid model: K <= 3, at most ``max_atoms`` atoms per measure."""
    K = K or int(rng.integers(1, 4))
    c = float(rng.choice([0.3, 0.5, 0.8, 1.3, 2.0]))

    def measure():
        m = int(rng.integers(1, max_atoms + 1))
        atoms = rng.uniform(0.2, 3.0, (m, K))
        return make_measure(atoms, rng.uniform(0.2, 1.0, m))

    return ModelSpec(c, measure(), measure())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance bookkeeping: criterion id -> list of (passed, detail)
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
