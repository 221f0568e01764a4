import numpy as np
import pytest

from gliderlab.lattice import BINARY, GLIDER_ALPHABET, rng_stream
from gliderlab.measures import bernoulli
from gliderlab.rules import make_elementary, make_gliders, rule_from_function
from gliderlab.walks import (density_decay, density_minus, ecdf_report,
                             entry_times, entry_times_stepping, ks_between,
                             lemma_min_oracle, limit_cdf, loglog_fit,
                             sliding_min, walk_sums)


def brute_sliding_min(s, w):
    return np.array([s[i:i + w].min() for i in range(len(s) - w + 1)])


def test_sliding_min_matches_brute_force():
    rng = rng_stream(11, 0)
    for w in (1, 2, 3, 7, 16, 50):
        s = rng.integers(-100, 100, 173)
        assert (sliding_min(s, w) == brute_sliding_min(s, w)).all()
    with pytest.raises(ValueError):
        sliding_min(np.arange(3), 4)


def test_walk_sums():
    cells = np.array([0, 1, 2, 2, 0], dtype=np.uint8)  # values -1,0,+1,+1,-1
    assert list(walk_sums(cells)) == [0, -1, -1, 0, 1, 0]


def test_lemma_oracle_small_clean():
    for vm, vp in ((-1, 0), (-1, 1)):
        rep = lemma_min_oracle(vm, vp, word_len=6, t_max=2)
        assert rep.mismatches == 0
        assert rep.checked > 0


def test_lemma_oracle_detects_corruption():
    # feed the (-1,1) automaton where (-1,0) is asserted
    rep = lemma_min_oracle(-1, 0, word_len=6, t_max=2, rule=make_gliders(-1, 1))
    assert rep.mismatches > 0
    assert rep.witnesses


def test_limit_cdf_values():
    a = np.linspace(0.01, 50, 200)
    F = limit_cdf(a, -1, 0)
    assert (np.diff(F) > 0).all() and F[0] > 0 and F[-1] < 1
    assert limit_cdf(1.0, -1, 0) == pytest.approx(0.5)  # (2/pi) arctan 1
    assert limit_cdf(2.0, -1, 1) == pytest.approx(2 / np.pi * np.arctan(np.sqrt(0.5)))


@pytest.mark.parametrize("vm,vp", [(-1, 0), (-1, 1)])
def test_entry_times_two_routes_agree(vm, vp):
    mu = bernoulli((0.5, 0.0, 0.5), GLIDER_ALPHABET)
    t1, c1 = entry_times(vm, vp, mu, n=8, n_samples=60, seed=5, t_max=64)
    t2, c2 = entry_times_stepping(vm, vp, mu, n=8, n_samples=60, seed=5,
                                  t_max=64)
    assert (t1 == t2).all()
    assert (c1 == c2).all()


def test_entry_times_factor_route():
    # -1 gliders of the (0,1)->+1,(1,0)->-1 edge map under rule 128
    f = rule_from_function(BINARY, (0, 1),
                           lambda a, b: 2 if (a, b) == (0, 1)
                           else 0 if (a, b) == (1, 0) else 1,
                           out_alphabet=GLIDER_ALPHABET)
    mu = bernoulli((0.7, 0.3), BINARY)
    t1, c1 = entry_times(-1, 1, mu, n=6, n_samples=40, seed=9, t_max=48,
                         factor=f)
    t2, c2 = entry_times_stepping(-1, 1, mu, n=6, n_samples=40, seed=9,
                                  t_max=48, factor=f)
    assert (t1 == t2).all() and (c1 == c2).all()


def test_ecdf_report_shape():
    mu = bernoulli((0.5, 0.0, 0.5), GLIDER_ALPHABET)
    times, cens = entry_times(-1, 0, mu, n=32, n_samples=400, seed=3,
                              t_max=32 * 64)
    rep = ecdf_report(times, cens, 32, -1, 0)
    assert (np.diff(rep.ecdf) >= 0).all()
    assert 0 <= rep.ks <= 1
    assert ks_between(rep, rep) == 0.0


def test_density_minus_start_and_monotone():
    mu = bernoulli((0.3, 0.4, 0.3), GLIDER_ALPHABET)
    d = density_minus(-1, 0, mu, (0, 1, 2, 4, 8), n_traj=20, cells=5000,
                      seed=4)
    assert d[0] == pytest.approx(0.3, abs=0.01)
    ts = sorted(d)
    assert all(d[a] >= d[b] for a, b in zip(ts, ts[1:]))


def test_loglog_fit_exact_power_law():
    ts = np.array([2, 4, 8, 16, 32], dtype=float)
    slope, inter = loglog_fit(ts, 3.0 * ts ** -0.5)
    assert slope == pytest.approx(-0.5)
    assert np.exp(inter) == pytest.approx(3.0)


def test_density_decay_report():
    mu = bernoulli((0.5, 0.0, 0.5), GLIDER_ALPHABET)
    rep = density_decay(-1, 0, mu, (4, 8, 16, 32, 64), n_traj=10, cells=20000,
                        seed=6)
    assert rep.fit_range == (16, 64)
    assert -0.8 < rep.slope < -0.2
