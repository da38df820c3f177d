import numpy as np
import pytest

from marketstates.errors import NumericalError, ValidationError
from marketstates.reference import JPN_STATIONARY, JPN_W, USA_STATIONARY, USA_W
from marketstates.states import (
    empirical_frequencies,
    occupancy_windows,
    order_states,
    precursor_report,
    stationary_distribution,
    transition_matrix,
)


def sample_chain(W, steps, seed, start=0):
    """Inverse-CDF sampler, independent of the estimators under test."""
    W = W / W.sum(axis=1, keepdims=True)
    cdf = np.cumsum(W, axis=1)
    u = np.random.default_rng(seed).random(steps)
    seq = np.empty(steps, dtype=int)
    s = start
    for t in range(steps):
        seq[t] = s
        s = min(int(np.searchsorted(cdf[s], u[t], side="right")), W.shape[0] - 1)
    return seq


def test_order_two_clusters():
    labels = np.array([0, 0, 1, 1, 0])
    mu = np.array([0.5, 0.5, 0.1, 0.1, 0.5])
    m = order_states(labels, mu)
    assert list(m.state_of_epoch) == [1, 1, 0, 0, 1]
    np.testing.assert_allclose(m.state_mean_corr, [0.1, 0.5])


def test_order_tie_breaks_on_first_epoch():
    m = order_states(np.array([2, 0, 2, 0]), np.array([0.3, 0.3, 0.3, 0.3]))
    assert list(m.state_of_epoch) == [0, 1, 0, 1]


def test_representatives(rng):
    mats = [rng.random((3, 3)) for _ in range(4)]
    m = order_states(np.array([0, 1, 1, 2]), np.array([0.1, 0.5, 0.7, 0.9]), mats)
    np.testing.assert_array_equal(m.representative_frame[0], mats[0])
    np.testing.assert_allclose(m.representative_frame[1], (mats[1] + mats[2]) / 2)
    assert np.all(np.diff(m.state_mean_corr) > 0)


def test_order_needs_two_clusters():
    with pytest.raises(ValidationError):
        order_states(np.zeros(4, dtype=int), np.ones(4))


def test_constant_sequence():
    tm = transition_matrix([0, 0, 0, 0])
    np.testing.assert_array_equal(tm.W, [[1.0]])
    assert tm.counts[0, 0] == 3


def test_alternating_sequence():
    tm = transition_matrix([0, 1, 0, 1, 0])
    np.testing.assert_array_equal(tm.W, [[0.0, 1.0], [1.0, 0.0]])


def test_zero_row_flagged():
    tm = transition_matrix([0, 0, 1], k=3)
    assert tm.zero_rows == (1, 2)
    assert tm.W[1].sum() == 0.0
    with pytest.raises(NumericalError, match="S2"):
        stationary_distribution(tm.W)


def test_rows_stochastic(rng):
    seq = rng.integers(0, 4, size=200)
    tm = transition_matrix(seq, 4)
    np.testing.assert_allclose(tm.W.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(tm.W >= 0)


def test_recover_usa_chain():
    seq = sample_chain(USA_W, 1_000_000, seed=11)
    W = transition_matrix(seq, 4).W
    assert np.max(np.abs(W - USA_W / USA_W.sum(axis=1, keepdims=True))) < 0.005


@pytest.mark.parametrize("W,expected", [(USA_W, USA_STATIONARY), (JPN_W, JPN_STATIONARY)])
def test_published_stationary(W, expected):
    sd = stationary_distribution(W)
    np.testing.assert_allclose(sd.P0, expected, atol=0.002)
    assert sd.P0.sum() == pytest.approx(1.0, abs=1e-12)
    Wn = W / W.sum(axis=1, keepdims=True)
    assert np.max(np.abs(Wn.T @ sd.P0 - sd.P0)) < 1e-10


def test_published_tables_are_diagonally_dominant():
    for W in (USA_W, JPN_W):
        for i in range(W.shape[0]):
            assert W[i, i] == W[i].max()


def test_uniform_chain():
    sd = stationary_distribution(np.full((5, 5), 0.2))
    np.testing.assert_allclose(sd.P0, 0.2, atol=1e-15)


def test_periodic_chain_uses_power_iteration():
    sd = stationary_distribution(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(sd.P0, [0.5, 0.5])
    assert sd.method == "power"


def test_transient_state_gets_zero_mass():
    W = np.array([[0.5, 0.5, 0.0], [0.0, 0.3, 0.7], [0.0, 0.6, 0.4]])
    sd = stationary_distribution(W)
    assert sd.P0[0] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(W.T @ sd.P0, sd.P0, atol=1e-10)


def test_periodic_non_uniform_start_still_converges():
    # period 3 with a uniform start is already stationary
    W = np.roll(np.eye(3), 1, axis=1)
    np.testing.assert_allclose(stationary_distribution(W).P0, 1 / 3)


def test_two_closed_classes_is_an_error():
    with pytest.raises(NumericalError, match="not unique"):
        stationary_distribution(np.eye(3))


def test_rejects_non_stochastic():
    with pytest.raises(ValidationError):
        stationary_distribution(np.array([[0.5, 0.3], [0.5, 0.5]]))
    with pytest.raises(ValidationError):
        stationary_distribution(np.array([[1.2, -0.2], [0.5, 0.5]]))


def test_empirical_frequencies():
    np.testing.assert_allclose(empirical_frequencies([0, 0, 1, 1]), [0.5, 0.5])
    f = empirical_frequencies(sample_chain(JPN_W, 1_000_000, seed=3), 5)
    np.testing.assert_allclose(f, stationary_distribution(JPN_W).P0, atol=0.005)


def test_empirical_converges_within_three_sigma():
    p0 = stationary_distribution(USA_W).P0
    steps = 200_000
    f = empirical_frequencies(sample_chain(USA_W, steps, seed=8), 4)
    # autocorrelated chain: inflate the iid variance by the slowest mixing factor
    lam2 = sorted(np.abs(np.linalg.eigvals(USA_W / USA_W.sum(1, keepdims=True))))[-2]
    sigma = np.sqrt(p0 * (1 - p0) / steps * (1 + lam2) / (1 - lam2))
    assert np.all(np.abs(f - p0) < 3 * sigma)


def test_occupancy_constant_and_onehot():
    occ = occupancy_windows([2, 2, 2, 2, 2], k=3, window=3)
    np.testing.assert_array_equal(occ, [[0, 0, 1]] * 3)
    seq = [0, 1, 2, 1]
    np.testing.assert_array_equal(occupancy_windows(seq, 3, window=1), np.eye(3)[seq])


def test_occupancy_hand_counted():
    seq = [0] * 5 + [1] * 5 + [2] * 3 + [0] * 7  # 20 epochs
    occ = occupancy_windows(seq, 3, window=10)
    assert occ.shape == (11, 3)
    np.testing.assert_allclose(occ[0], [0.5, 0.5, 0.0])
    np.testing.assert_allclose(occ[5], [0.0, 0.5, 0.3] + np.array([0.2, 0, 0]))
    np.testing.assert_allclose(occ[10], [0.7, 0.0, 0.3])
    np.testing.assert_allclose(occ.sum(axis=1), 1.0)
    assert occupancy_windows(seq, 3, window=10, step=10).shape == (2, 3)


def test_precursor_usa():
    rep = precursor_report(USA_W)
    assert (rep[0].state, rep[0].transition) == (2, 0.058)
    assert rep[0].joint is None


def test_precursor_jpn():
    rep = precursor_report(JPN_W)
    assert (rep[0].state, rep[0].transition) == (3, 0.075)


def test_precursor_joint_and_identity():
    tm = transition_matrix([0, 1, 2, 2, 1, 2, 0, 0])
    rep = precursor_report(tm.W, tm.counts)
    assert rep[0].state == 1 and rep[0].transition == 1.0
    assert rep[0].joint == pytest.approx(2 / 7)
    assert all(e.transition == 0.0 for e in precursor_report(np.eye(4)))
