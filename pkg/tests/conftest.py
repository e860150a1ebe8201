import numpy as np
import pytest
from hypothesis import settings

from sddisc.lifting import DesignSpec, build_error_system
from sddisc.lti import StateSpaceModel
from sddisc.models import elliptic_target, lowpass_signal_model
from sddisc.synthesis import gamma_iterate

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# acceptance lines collected here and printed in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


def random_stable_discrete(rng, n, m=1, p=1, radius=0.9, period=1.0, with_d=True):
    A = rng.standard_normal((n, n))
    rho = max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12)
    A *= rng.uniform(0.1, radius) / rho
    D = rng.standard_normal((p, m)) if with_d else np.zeros((p, m))
    return StateSpaceModel(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)), D,
                           period=period)


def random_stable_continuous(rng, n, m=1, p=1, with_d=True):
    A = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(A).real)
    A -= (shift + rng.uniform(0.2, 2.0)) * np.eye(n)
    D = rng.standard_normal((p, m)) if with_d else np.zeros((p, m))
    return StateSpaceModel(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)), D)


def rk4_step_response(G, h, samples, substeps=1000):
    """Continuous unit-step response at t = k h by fixed-step RK4."""
    dt = h / substeps
    x = np.zeros(G.n_states)
    u = np.ones(G.n_inputs)
    out = [G.C @ x + G.D @ u]
    f = lambda x: G.A @ x + G.B @ u
    for _ in range(samples - 1):
        for _ in range(substeps):
            k1 = f(x)
            k2 = f(x + dt / 2 * k1)
            k3 = f(x + dt / 2 * k2)
            k4 = f(x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(G.C @ x + G.D @ u)
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def G_bench():
    return elliptic_target()


@pytest.fixture(scope="session")
def F_bench():
    return lowpass_signal_model()


@pytest.fixture(scope="session")
def bench_spec():
    return DesignSpec(h=1.0, m=4, N=12, L=1)


@pytest.fixture(scope="session")
def bench_plant(G_bench, F_bench, bench_spec):
    return build_error_system(G_bench, F_bench, bench_spec)


@pytest.fixture(scope="session")
def bench_design(bench_plant, bench_spec):
    return gamma_iterate(bench_plant, bench_spec)
