import numpy as np
import pytest

from nhvi import (
    EllipseShape,
    ParticleParams,
    PendulumParams,
    Se2BodyParams,
    make_discrete_lagrangian,
    make_particle,
    make_pendulum,
    make_se2_body,
)

PENDULUM_Q0 = np.array([0.75 * np.pi, 0.0])
PENDULUM_V0 = np.array([0.25 * np.pi, 0.25 * (np.pi + 0.5) * np.pi])
ELLIPSE_Q0 = np.array([np.pi / 2, 0.0, 3.5])
ELLIPSE_V0 = np.array([-3.0, 2.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def particle():
    return make_particle(ParticleParams(mass=1.0, gravity=9.8))


@pytest.fixture
def free_particle():
    return make_particle(ParticleParams(mass=1.0, gravity=0.0))


@pytest.fixture
def ellipse_body():
    return make_se2_body(Se2BodyParams(shape=EllipseShape(a=1.0, b=0.5)))


@pytest.fixture
def ellipse_body_edge_slope():
    return make_se2_body(
        Se2BodyParams(shape=EllipseShape(a=1.0, b=0.5), contact_frame="edge-slope")
    )


@pytest.fixture
def pendulum():
    return make_pendulum(PendulumParams())


@pytest.fixture
def particle_mid(particle):
    return make_discrete_lagrangian(particle, "midpoint")


@pytest.fixture
def ellipse_mid(ellipse_body):
    return make_discrete_lagrangian(ellipse_body, "midpoint")


@pytest.fixture
def pendulum_left(pendulum):
    return make_discrete_lagrangian(pendulum, "retraction-left")
