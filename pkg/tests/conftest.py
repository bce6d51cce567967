from fractions import Fraction

import pytest

from smooth_bergman.polarize import Weight


@pytest.fixture(scope="session")
def quartic():
    """``|x|^2/2 + |x|^4/10`` with a validity radius that keeps ``Im f > 0``."""
    return Weight.from_terms(
        1,
        [((1,), (1,), Fraction(1, 2)), ((2,), (2,), Fraction(1, 10))],
        validity_radius=1.58,
        name="quartic",
    )


@pytest.fixture(scope="session")
def fock():
    return Weight.fock(1, validity_radius=2.0, name="fock")
