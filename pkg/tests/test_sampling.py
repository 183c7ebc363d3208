import math

import numpy as np
import pytest

from lyapidx.errors import DomainError
from lyapidx.sampling import (Geometric, Poisson, UniformInt, rng_stream, sample_file_length,
                              sample_lengths, step_idle, step_user_packet_mode)


def test_stream_test_vectors():
    # Philox keyed by SeedSequence(master, spawn_key=(trial, user)); pinned for ports
    assert rng_stream(0, 0, 0).random(3).tolist() == [
        0.810243512110891, 0.5461260857686415, 0.4817011004763435]
    assert rng_stream(42, 3, 1).integers(0, 2**32, 3).tolist() == [
        3301240336, 1415203468, 1891987535]


def test_streams_reproducible_and_distinct():
    a = rng_stream(7, 1, 2).random(1000)
    assert np.array_equal(a, rng_stream(7, 1, 2).random(1000))
    others = [rng_stream(7, 1, 3), rng_stream(7, 2, 2), rng_stream(8, 1, 2)]
    for g in others:
        b = g.random(1000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.12


def test_law_validation():
    for bad in (lambda: Geometric(0.0), lambda: Geometric(1.2), lambda: UniformInt(0, 3),
                lambda: UniformInt(4, 3), lambda: Poisson(0.0)):
        with pytest.raises(DomainError):
            bad()


def test_geometric_unit_mu_is_one():
    assert (sample_lengths(Geometric(1.0), rng_stream(0), 1000) == 1).all()


def test_uniform_mean():
    x = sample_lengths(UniformInt(1, 5), rng_stream(1), 1_000_000)
    assert x.min() == 1 and x.max() == 5
    assert abs(x.mean() - 3.0) < 0.01


def test_truncated_poisson_mean():
    x = sample_lengths(Poisson(3.0), rng_stream(2), 1_000_000)
    assert x.min() >= 1
    analytic = 3.0 / (1.0 - math.exp(-3.0))
    assert Poisson(3.0).effective_mean == pytest.approx(analytic)
    assert abs(x.mean() - analytic) < 4 * x.std() / 1000


def test_geometric_law():
    x = sample_lengths(Geometric(0.25), rng_stream(3), 1_000_000)
    assert x.min() >= 1
    assert abs(x.mean() - 4.0) < 4 * x.std() / 1000
    # P(X = 1) = mu
    assert abs((x == 1).mean() - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 1e6)
    assert isinstance(sample_file_length(Geometric(0.5), rng_stream(4)), int)


def test_packet_step_examples():
    g = rng_stream(5)
    assert step_user_packet_mode(1, 1.0, g) == (0, True)
    assert step_user_packet_mode(3, 0.0, g) == (3, False)
    with pytest.raises(DomainError):
        step_user_packet_mode(2, 1.5, g)
    with pytest.raises(DomainError):
        step_user_packet_mode(0, 0.5, g)


def test_geometric_packets_complete_like_memoryless():
    # served every slot: completions per slot should be mu * q_hat
    mu, q = 0.4, 0.7
    g = rng_stream(6)
    slots, done = 1_000_000, 0
    resid = sample_file_length(Geometric(mu), g)
    for _ in range(slots):
        resid, fin = step_user_packet_mode(resid, q, g)
        if fin:
            done += 1
            resid = sample_file_length(Geometric(mu), g)
    p = mu * q
    assert abs(done / slots - p) <= 3 * math.sqrt(p * (1 - p) / slots)


def test_idle_step():
    g = rng_stream(7)
    assert all(step_idle(1.0, g)[0] for _ in range(100))
    n = 1_000_000
    hits = sum(step_idle(0.25, g)[0] for _ in range(n))
    assert abs(hits / n - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)
    active, resid = step_idle(1.0, g, UniformInt(2, 2))
    assert active and resid == 2


def test_idle_durations_geometric():
    g = rng_stream(8)
    lam, durations = 0.2, []
    for _ in range(20_000):
        d = 1
        while not step_idle(lam, g)[0]:
            d += 1
        durations.append(d)
    x = np.array(durations)
    assert abs(x.mean() - 1 / lam) <= 3 * x.std() / math.sqrt(x.size)
