from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from bcentropy.algebraic import parse_polynomial, real_root

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def golden():
    """The root of x^2 + x - 1 in (0, 1), i.e. (sqrt 5 - 1) / 2."""
    return real_root(parse_polynomial("x^2+x-1"), Fraction(1, 2), Fraction(1))
