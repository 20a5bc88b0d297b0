import numpy as np
import pytest

from abcs import Instance, bernoulli


@pytest.fixture(scope="session")
def booking_instance():
    """Bernoulli click-rate instance over four seasonal subpopulations."""
    means = np.array([[0.0296, 0.0372, 0.0588, 0.0620],
                      [0.0300, 0.0373, 0.0596, 0.0626],
                      [0.0295, 0.0373, 0.0591, 0.0630]])
    ab = np.array([0.1958, 0.2950, 0.2813, 0.2279])
    return Instance(means, bernoulli(), ab, ab)


@pytest.fixture(scope="session")
def boxplot_instance():
    """Three-arm, three-subpopulation Bernoulli benchmark."""
    means = np.array([[0.1, 0.4, 0.3],
                      [0.2, 0.5, 0.2],
                      [0.5, 0.1, 0.1]])
    return Instance(means, bernoulli(), np.array([0.4, 0.5, 0.1]),
                    np.full(3, 1 / 3))
