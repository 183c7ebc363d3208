import math

import pytest
from hypothesis import given, strategies as st

from lyapidx.errors import DomainError
from lyapidx.model import (Action, SystemConfig, UserParams, completion_prob_exponential,
                           completion_prob_geometric, expected_frame_length, validate_config)

probs = st.floats(0.0, 1.0)
pos = st.floats(1e-3, 1e3)


def test_exponential_completion_examples():
    assert completion_prob_exponential(0.0, 1.0, 5.0) == 0.0
    assert completion_prob_exponential(1e6, 1.0, 5.0) == pytest.approx(1.0)
    # 1 - e^{-ln 2} = 1/2
    assert completion_prob_exponential(5.0 * math.log(2), 1.0, 5.0) == pytest.approx(0.5, abs=1e-15)


def test_exponential_rejects_bad_mean():
    with pytest.raises(DomainError):
        completion_prob_exponential(1.0, 0.5, 0.0)


def test_geometric_completion_examples():
    assert completion_prob_geometric(1.0, 1.0) == 1.0
    assert completion_prob_geometric(0.5, 0.0) == 0.0
    # table1 user 1: mu 0.5380 with q = 0.9 gives the listed 0.4842
    assert completion_prob_geometric(0.5380, 0.90) == pytest.approx(0.4842, abs=5e-5)
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(DomainError):
            completion_prob_geometric(bad, 0.5)


def test_frame_length_examples():
    assert expected_frame_length(0.0, 0.3) == 1.0
    assert expected_frame_length(1.0, 0.5) == 3.0
    assert expected_frame_length(0.4842, 0.0028) == 1 + 0.4842 / 0.0028
    with pytest.raises(DomainError):
        expected_frame_length(0.5, 0.0)


@given(rate=pos, q=probs, mean=pos)
def test_exponential_in_unit_interval(rate, q, mean):
    assert 0.0 <= completion_prob_exponential(rate, q, mean) <= 1.0


@given(r1=pos, r2=pos, q1=probs, q2=probs, mean=pos)
def test_exponential_monotone(r1, r2, q1, q2, mean):
    lo_r, hi_r = sorted((r1, r2))
    lo_q, hi_q = sorted((q1, q2))
    assert completion_prob_exponential(lo_r, q1, mean) <= completion_prob_exponential(hi_r, q1, mean)
    assert completion_prob_exponential(r1, lo_q, mean) <= completion_prob_exponential(r1, hi_q, mean)


@given(mu=st.floats(1e-6, 1.0), q=probs)
def test_geometric_in_unit_interval(mu, q):
    assert 0.0 <= completion_prob_geometric(mu, q) <= 1.0


@given(phi=probs, lam=st.floats(1e-6, 1.0))
def test_frame_length_at_least_one(phi, lam):
    assert expected_frame_length(phi, lam) >= 1.0


def test_table1_is_valid(table1):
    assert validate_config(table1) == []
    assert table1.servers == 4 and table1.power_budget == 5.0 and table1.n_users == 8


def test_servers_must_be_below_users(table1):
    bad = SystemConfig(table1.users, 8, 5.0, 70.0)
    assert any("servers must be < users" in v for v in validate_config(bad))


def test_zero_power_action_flagged(table1):
    u = table1.users[0]
    broken = UserParams(u.lam, u.mean_file, (Action.idle(), Action(1, 0.0, 0.4)), u.weight, True)
    bad = SystemConfig((broken,) + table1.users[1:], 4, 5.0, 70.0)
    assert any("p^min must be positive" in v for v in validate_config(bad))


def test_every_violation_reported():
    u = UserParams(lam=0.0, mean_file=-1.0, weight=0.0,
                   actions=(Action(1, 1.0, 1.5), Action(1, 1.0, 0.2)))
    cfg = SystemConfig((u,), 0, -1.0, -2.0)
    msgs = validate_config(cfg)
    for field in ("lambda", "mean_file", "weight", "unique", "idle action 0", "success_prob",
                  "servers", "power_budget", "tradeoff_v"):
        assert any(field in m for m in msgs), field


def test_unknown_action_id():
    u = UserParams(0.5, 2.0, (Action.idle(),))
    with pytest.raises(DomainError):
        u.action(3)


def test_actions_sorted_by_id():
    u = UserParams(0.5, 2.0, (Action(2, 1.0, 0.1), Action.idle(), Action(1, 2.0, 0.2)))
    assert [a.id for a in u.actions] == [0, 1, 2]
    assert u.p_min == 1.0 and u.p_max == 2.0
