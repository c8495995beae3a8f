import numpy as np

from chordcdf import rng


def _fill(g, n):
    return g.random(n)


def test_any_range_matches_serial():
    full = rng.counter_draws(3, 0, 200_000, _fill)
    for start, stop in [(0, 10), (65_530, 65_545), (131_000, 200_000)]:
        np.testing.assert_array_equal(rng.counter_draws(3, start, stop, _fill), full[start:stop])


def test_derived_seeds_distinct_and_stable():
    seeds = {rng.derive_seed(7, t, k) for t in range(100) for k in range(2)}
    assert len(seeds) == 200
    assert rng.derive_seed(7, 3, 1) == rng.derive_seed(7, 3, 1)
