"""Ring decomposition: localization of saturated nodes into singles and
adjacent pairs, spill bookkeeping, and the unsupported-topology guards."""
import pytest

from fogloss.errors import (CriticalRegime, InvalidRerouteProbability,
                            UnsupportedTopology, ValidationError)
from fogloss.ring import RingParams, RingSolution, classify_ring, ring_blocking

LIGHT = (1, 1, 12, 0.1)


# ------------------------------------------------------------------ validation

def test_ring_params_validation():
    with pytest.raises(ValidationError):
        RingParams(((1, 1, 1, 0.1), (1, 1, 1, 0.1)))        # J < 3
    with pytest.raises(ValidationError):
        RingParams(((1, 1, 1), (1, 1, 1, 0.1), (1, 1, 1, 0.1)))
    with pytest.raises(ValidationError):
        RingParams(((-1, 1, 1, 0.1), LIGHT, LIGHT))
    with pytest.raises(InvalidRerouteProbability):
        RingParams(((1, 1, 1, 0.6), LIGHT, LIGHT))


def test_ring_accessors_wrap():
    r = RingParams(((2, 1, 1, 0.25), (1, 1, 10, 0.1), (3, 2, 4, 0.3)))
    assert r.lam(3) == 2 and r.lam(-1) == 3
    assert r.a(2) == 8


def test_ring_solution_clips_roundoff_but_rejects_real_violations():
    s = RingSolution("single_saturated", (1.0 + 1e-13, 0.0, 0.0), (("single", 0),))
    assert s.beta == (1.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        RingSolution("single_saturated", (1.5, 0.0, 0.0), (("single", 0),))


# ------------------------------------------------------------------- regimes

def test_no_congestion():
    sol = ring_blocking(RingParams(((0.5, 1, 1, 0.1),) * 3))
    assert sol.case == "no_congestion"
    assert sol.beta == (0.0, 0.0, 0.0)
    assert sol.groups == ()


def test_isolated_single_saturated_node():
    sol = ring_blocking(RingParams(((2, 1, 1, 0.25),
                                    (1, 1, 10, 0.1), (1, 1, 10, 0.1), (1, 1, 10, 0.1))))
    assert sol.case == "single_saturated"
    assert sol.groups == (("single", 0),)
    # (1 - 2p)(1 - a/lam) with each neighbor absorbing spill p(lam - a)
    assert sol.beta == pytest.approx((0.25, 0.0, 0.0, 0.0), abs=1e-14)


def test_two_disjoint_singles():
    sol = ring_blocking(RingParams(((2, 1, 1, 0.25), (1, 1, 10, 0.1),
                                    (2, 1, 1, 0.25), (1, 1, 10, 0.1))))
    assert sol.case == "multi_saturated"
    assert sol.groups == (("single", 0), ("single", 2))
    assert sol.beta == pytest.approx((0.25, 0.0, 0.25, 0.0), abs=1e-14)


def test_adjacent_pair_with_rerouting():
    sol = ring_blocking(RingParams(((12, 1, 1, 0.3), (8, 1, 10, 0.25),
                                    LIGHT, LIGHT)))
    assert sol.case == "pair_saturated"
    assert sol.groups == (("pair", 0),)
    assert sol.beta[0] == pytest.approx(0.3993705133099779, abs=1e-8)
    assert sol.beta[1] == pytest.approx(0.08421016475057984, abs=1e-8)
    assert sol.beta[2:] == (0.0, 0.0)


def test_adjacent_pair_other_branch():
    # same shape, second member loaded past its own capacity
    sol = ring_blocking(RingParams(((4, 1, 1, 0.3), (12, 1, 10, 0.25),
                                    LIGHT, LIGHT)))
    assert sol.case == "pair_saturated"
    assert sol.beta[0] == pytest.approx(0.3677699910652366, abs=1e-8)
    assert sol.beta[1] == pytest.approx(0.1596774054166142, abs=1e-8)


def test_adjacent_pair_without_rerouting_decouples():
    sol = ring_blocking(RingParams(((4, 1, 1, 0.0), (12, 1, 10, 0.0),
                                    (1, 1, 12, 0.0), (1, 1, 12, 0.0))))
    assert sol.beta[0] == pytest.approx(0.75, abs=1e-12)
    assert sol.beta[1] == pytest.approx(1 / 6, abs=1e-12)


def test_spill_drags_neighbor_into_pair():
    # node 0 overflows 0.25 to each side; node 1 has slack only 0.1, so the
    # pair (0, 1) forms while node 2 absorbs the remaining spill
    sol = ring_blocking(RingParams(((2, 1, 1, 0.25), (0.9, 1, 1, 0.1),
                                    (0.3, 1, 1, 0.1))))
    assert sol.case == "pair_saturated"
    assert sol.groups == (("pair", 0),)
    assert sol.beta[0] == pytest.approx(0.2693314735100236, abs=1e-8)
    assert sol.beta[1] == pytest.approx(0.1095317677887678, abs=1e-8)
    assert sol.beta[2] == 0.0


def test_rotation_equivariance():
    base = ((12, 1, 1, 0.3), (8, 1, 10, 0.25), LIGHT, LIGHT)
    ref = ring_blocking(RingParams(base))
    for k in (1, 2, 3):
        rot = tuple(base[(j - k) % 4] for j in range(4))
        sol = ring_blocking(RingParams(rot))
        assert sol.case == ref.case
        assert sol.groups == (("pair", k),)
        assert tuple(sol.beta[(j + k) % 4] for j in range(4)) == ref.beta


# ------------------------------------------------------------ refused inputs

def test_three_in_a_row_is_unsupported():
    r = RingParams(((2, 1, 1, 0.2), (2, 1, 1, 0.2), (2, 1, 1, 0.2),
                    (0.5, 1, 10, 0.1)))
    assert classify_ring(r) == "unsupported"
    with pytest.raises(UnsupportedTopology):
        ring_blocking(r)


def test_both_neighbors_too_tight_is_unsupported():
    r = RingParams(((2, 1, 1, 0.25), (0.9, 1, 1, 0.1), (0.9, 1, 1, 0.1)))
    assert classify_ring(r) == "unsupported"
    with pytest.raises(UnsupportedTopology):
        ring_blocking(r)


def test_balanced_node_is_critical():
    r = RingParams(((1, 1, 1, 0.1), (0.5, 1, 10, 0.1), (0.5, 1, 10, 0.1)))
    with pytest.raises(CriticalRegime):
        ring_blocking(r)
    with pytest.raises(CriticalRegime):
        classify_ring(r)


def test_spill_exactly_consuming_slack_is_critical():
    # node 1's slack (0.25) equals the spill arriving from node 0
    r = RingParams(((2, 1, 1, 0.25), (0.75, 1, 1, 0.1), (0.5, 1, 1, 0.1)))
    with pytest.raises(CriticalRegime):
        ring_blocking(r)
