import numpy as np
import pytest

from gradpso.core import Objective


@pytest.fixture
def quad2():
    """f = x1^2 + 2 x2^2 on a wide box, with analytic derivatives."""
    H = np.diag([2.0, 4.0])
    return Objective(
        "quad2",
        lambda x: float(x[0] ** 2 + 2 * x[1] ** 2),
        [-10, -10],
        [10, 10],
        grad=lambda x: H @ x,
        hess=lambda x: H,
    )


@pytest.fixture
def parabola():
    return Objective("parabola", lambda x: float(x[0] ** 2), [-10], [10], grad=lambda x: 2 * x)


def affine(a, b=0.0, half=10.0):
    a = np.asarray(a, dtype=float)
    return Objective("affine", lambda x: float(a @ x + b), -half * np.ones_like(a), half * np.ones_like(a))
