import numpy as np
import pytest

from rolljoint.catalog import demo_five_link, polynomial_link_chain, standard_link_chain
from rolljoint.mechanism import pose_difference


@pytest.fixture(scope="session")
def paper5():
    return demo_five_link()


@pytest.fixture(scope="session")
def chain2():
    return standard_link_chain(2)


@pytest.fixture(scope="session")
def chain3():
    return standard_link_chain(3)


@pytest.fixture(scope="session")
def poly2():
    return polynomial_link_chain(2)


@pytest.fixture(scope="session")
def poly3():
    return polynomial_link_chain(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def max_pose_error(poses_a, poses_b):
    """Worst translation/angle gap across two pose sequences."""
    return max(max(pose_difference(a, b)) for a, b in zip(poses_a, poses_b))
