import numpy as np
import pytest
from hypothesis import given, strategies as st

from decision_market.seeding import check_seed, derive_seed, make_rng


def test_make_rng_is_pcg64_and_reproducible():
    a, b = make_rng(42), make_rng(42)
    assert isinstance(a.bit_generator, np.random.PCG64)
    assert a.random(5).tobytes() == b.random(5).tobytes()


def test_check_seed_bounds():
    assert check_seed(2 ** 64 - 1) == 2 ** 64 - 1
    for bad in (-1, 2 ** 64):
        with pytest.raises(ValueError):
            check_seed(bad)


def test_derive_seed_frozen_values():
    # a change here silently changes every stored sweep
    assert derive_seed(0, 0, 0) == 2635072618980576772
    assert derive_seed(0, 0, 1) == 14898058564793133489
    assert derive_seed(0, 1, 0) == 11539782348902174461
    assert derive_seed(7, 3, 2) == 7497344561439099852


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 10 ** 6), st.integers(0, 10 ** 4))
def test_derived_seed_in_range(master, cell, rep):
    s = derive_seed(master, cell, rep)
    assert 0 <= s < 2 ** 64
    assert s == derive_seed(master, cell, rep)
