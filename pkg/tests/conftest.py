import random

import pytest
from gmpy2 import mpq
from hypothesis import settings

from ncdeform.params import DeformationParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_rational(rng: random.Random, num=3, den=7) -> mpq:
    return mpq(rng.randint(-num, num), rng.randint(1, den))


def random_params(rng: random.Random, n: int) -> DeformationParams:
    """Small-denominator rational parameters, at least one of a, s nonzero."""
    while True:
        a = tuple(random_rational(rng) for _ in range(n))
        s = random_rational(rng)
        p = DeformationParams(n, a, s)
        if not p.is_undeformed:
            return p


@pytest.fixture
def kappa2():
    return DeformationParams.from_strings(2, ["1/3", "0"], "1/5")


@pytest.fixture
def general3():
    return DeformationParams.from_strings(3, ["1/2", "-1/3", "1/4"], "1/7")
