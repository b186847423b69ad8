import numpy as np
import pytest

from armsig import ExtractionConfig, make_synthetic_dataset
from armsig.kinematics import default_geometry


@pytest.fixture(scope="session")
def geometry():
    return default_geometry()


@pytest.fixture(scope="session")
def config():
    return ExtractionConfig()


@pytest.fixture(scope="session")
def corpus():
    """The bundled synthetic corpus (20 signers, 10 genuine + 10 forgeries)."""
    return make_synthetic_dataset()


@pytest.fixture(scope="session")
def mini_corpus():
    """Small corpus for fast end-to-end tests."""
    return make_synthetic_dataset(n_signers=4, n_genuine=6, n_forgeries=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def sample_joint_tuples(g, n, seed=0):
    """Random in-range joint tuples for round-trip properties.

    Respects the documented guards: elbow angle in (0.1*pi + 0.05, pi - 0.05),
    |sin q5| > 1e-3 with q5 in (-pi/2, pi/2), q4 away from +/-pi/2, and the
    wrist in the front workspace (positive planar radius along q1).
    """
    from armsig.kinematics import _fk_batch

    rng = np.random.default_rng(seed)
    phi3 = g.elbow_offset_angle
    out = []
    total = 0
    while total < n:
        m = max(2 * (n - total), 512)
        q = np.column_stack(
            [
                rng.uniform(-np.pi, np.pi, m),
                rng.uniform(0.0, np.pi, m),
                -phi3 - rng.uniform(0.1 * np.pi + 0.05, np.pi - 0.05, m),
                rng.uniform(-np.pi / 2 + 0.05, np.pi / 2 - 0.05, m),
                rng.uniform(-np.pi / 2, np.pi / 2, m),
                rng.uniform(-np.pi, np.pi, m),
            ]
        )
        keep = np.abs(np.sin(q[:, 4])) > 1e-3
        pos, _ = _fk_batch(q, g)
        p5 = pos[:, 5]
        radial = p5[:, 0] * np.cos(q[:, 0]) + p5[:, 1] * np.sin(q[:, 0])
        keep &= radial > 10.0
        q = q[keep]
        out.append(q)
        total += len(q)
    return np.vstack(out)[:n]


@pytest.fixture(scope="session")
def joint_tuples(geometry):
    """1000 pre-sampled in-range joint tuples."""
    return sample_joint_tuples(geometry, 1000, seed=7)
