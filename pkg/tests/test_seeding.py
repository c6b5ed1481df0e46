import numpy as np

from app.utils.seeding import derive_seed, make_rng


def test_same_inputs_same_seed():
    assert derive_seed(2023, "small", "long_to_short", 3) == derive_seed(2023, "small", "long_to_short", 3)


def test_seed_depends_on_every_part():
    base = derive_seed(2023, "small", "combined", 0)
    assert base != derive_seed(2024, "small", "combined", 0)
    assert base != derive_seed(2023, "large", "combined", 0)
    assert base != derive_seed(2023, "small", "combined", 1)
    assert 0 <= base < 2**64


def test_streams_are_independent_and_repeatable():
    wrist = make_rng(42, "wrist").normal(size=5)
    again = make_rng(42, "wrist").normal(size=5)
    vision = make_rng(42, "vision").normal(size=5)
    np.testing.assert_array_equal(wrist, again)
    assert not np.array_equal(wrist, vision)
