import math

import pytest

import aliased_ac as ac


@pytest.fixture
def tiger():
    p = ac.tiger(0.9)
    z = ac.last_observation(p)
    return p, z, ac.resolve_policy("enter_always", p, z)


def test_tiger_tables(tiger):
    p, z, pi = tiger
    assert (p.n_states, p.n_actions, p.n_obs) == (4, 2, 3)
    t = ac.exact_tables(p, z, pi, 1)
    assert t["J"] == pytest.approx(4.75, abs=1e-12)
    assert t["aliasing_gap"] == pytest.approx(1.0062305898749055, abs=1e-10)
    assert t["q_sym"]["shape"] == (3, 2)
    assert t["q_asym"]["shape"] == (4, 3, 2)
    value, actions = ac.brute_force_optimal(p, z)
    assert value == pytest.approx(6.775)
    assert list(actions) == [0, 1, 0]


def test_td_and_bounds(tiger):
    p, z, pi = tiger
    r = ac.td_learn(p, z, pi, mode="sym", K=2000, seed=3)
    assert r["error"] > 0.0
    assert "error_fixed_point" in r
    again = ac.td_learn(p, z, pi, mode="sym", K=2000, seed=3)
    assert (r["beta_bar"] == again["beta_bar"]).all()
    assert ac.eps_td(1, 1.0, 0.0, 1) == pytest.approx(math.sqrt(6.5))
    check = ac.aliasing_lemma_check(p, z, pi, m=2)
    assert check["holds"]


def test_nac_runs(tiger):
    p, z, _ = tiger
    r = ac.nac_run(p, z, T=5, N=200, K=2000, seed=1)
    assert len(r["J"]) == 5
    assert r["policy"].shape == (3, 2)


def test_state_revealing_has_no_aliasing():
    q, z = ac.state_revealing(ac.tiger(0.9))
    pi = ac.TabularPolicy.uniform(4, 2)
    value, tail = ac.eps_alias(q, z, pi, m=1)
    assert value == 0.0


def test_cli_and_errors(tmp_path):
    code, out, err = ac.cli(["exact", "--out", str(tmp_path / "o"), "--no-plot"])
    assert code == 0
    assert "J* = 6.775" in out
    assert (tmp_path / "o" / "results.csv").exists()
    code, _, err = ac.cli(["td", "-K", "0", "--out", str(tmp_path / "bad")])
    assert code == 2
    with pytest.raises(ValueError):
        ac.tv_distance([0.5, 0.5], [1.0])
