import random

import pytest

from chainecon.econ import AttackValueModel


def draw_market(rng: random.Random, anchored: bool = False) -> dict:
    """One random but valid (V, e, P, A, t) combination.

    ``anchored`` draws V as a multiple in [0.01, 10] of the stability threshold
    (A-1)ePt instead of on an absolute scale.
    """
    m = {
        "e": 10 ** rng.uniform(-1, 5),
        "P": 10 ** rng.uniform(-2, 3),
        "A": rng.uniform(1.001, 5.0),
        "t": rng.randint(1, 200),
    }
    if anchored:
        k = (m["A"] - 1) * m["e"] * m["P"] * m["t"] * 10 ** rng.uniform(-2, 1)
    else:
        k = 10 ** rng.uniform(0, 8)
    return {"V": AttackValueModel.constant(k), **m}


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def btc_case():
    # Bitcoin-style worked case: $10,000/BTC, 12.5 BTC reward, simple majority
    return {"e": 10000.0, "P": 12.5, "A": 1.01, "t": 36}
