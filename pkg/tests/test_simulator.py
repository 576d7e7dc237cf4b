"""Finite-scale engines: exact CTMC solve and the event-driven simulators."""
import numpy as np
import pytest

from fogloss.errors import (InvalidHorizon, StateSpaceTooLarge,
                            ValidationError)
from fogloss.params import SystemParams
from fogloss.ring import RingParams
from fogloss.simulator import (FiniteSystem, SimEstimate, erlang_b,
                               exact_finite, simulate_ring, simulate_two)

FIG2 = SystemParams(4, 8, 1, 1, 1, 10, 1, 0)


# --------------------------------------------------------------- FiniteSystem

def test_capacity_rounding():
    sys = FiniteSystem(SystemParams(1, 1, 1, 1, 0.24, 0.25, 0, 0), N=10)
    assert (sys.C1, sys.C2) == (2, 3)  # 2.4 down, 2.5 rounds half-up
    assert sys.arrival1 == pytest.approx(10.0)


def test_finite_system_validation():
    with pytest.raises(ValidationError):
        FiniteSystem(FIG2, N=0)
    with pytest.raises(ValidationError):
        FiniteSystem(FIG2, N=2.5)
    with pytest.raises(ValidationError):
        FiniteSystem(SystemParams(1, 1, 1, 1, 0.001, 1, 0, 0), N=10)


def test_sim_estimate_validation():
    with pytest.raises(ValidationError):
        SimEstimate(1.5, 0.0, 0.0, 0.0, (1,), 1)
    with pytest.raises(ValidationError):
        SimEstimate(0.5, 0.0, -1.0, 0.0, (1,), 1)
    e = SimEstimate(0.5, 0.25, 0.01, 0.01, (10, 10), 1)
    assert e.beta1_hat == 0.5


# -------------------------------------------------------------- exact solver

def test_erlang_b_anchors():
    assert erlang_b(1.0, 1) == pytest.approx(0.5, abs=1e-15)
    assert erlang_b(2.0, 2) == pytest.approx(0.4, abs=1e-15)
    assert erlang_b(0.0, 4) == 0.0
    with pytest.raises(ValidationError):
        erlang_b(-1.0, 2)


def test_exact_finite_single_server_loss():
    # two independent M/M/1/1 systems: blocking = rho/(1+rho)
    b1, b2 = exact_finite(FiniteSystem(SystemParams(2, 3, 1, 1, 1, 1, 0, 0), N=1))
    assert b1 == pytest.approx(2 / 3, abs=1e-12)
    assert b2 == pytest.approx(3 / 4, abs=1e-12)


def test_exact_finite_matches_erlang_without_rerouting():
    # p1 = p2 = 0 decouples the centers into independent Erlang-B systems
    sys = FiniteSystem(SystemParams(4, 8, 1, 1, 1, 10, 0, 0), N=25)
    b1, b2 = exact_finite(sys)
    assert b1 == pytest.approx(erlang_b(100.0, 25), abs=1e-10)
    assert b2 == pytest.approx(erlang_b(200.0, 250), abs=1e-10)


def test_exact_finite_against_dense_generator():
    # 6-state chain solved with a hand-built dense generator
    params = SystemParams(2, 3, 1, 1, 1, 2, 0.5, 0.25)
    sys = FiniteSystem(params, N=1)
    assert (sys.C1, sys.C2) == (1, 2)

    states = [(l1, l2) for l1 in range(2) for l2 in range(3)]
    idx = {s: k for k, s in enumerate(states)}
    Q = np.zeros((6, 6))
    for (l1, l2), k in idx.items():
        def add(dst, rate):
            Q[k, idx[dst]] += rate
        if l1 < 1:
            add((l1 + 1, l2), 2.0)
        elif l2 < 2:
            add((l1, l2 + 1), 2.0 * 0.5)           # class-1 overflow
        if l2 < 2:
            add((l1, l2 + 1), 3.0)
        elif l1 < 1:
            add((l1 + 1, l2), 3.0 * 0.25)          # class-2 overflow
        add((l1 - 1, l2), l1 * 1.0) if l1 else None
        add((l1, l2 - 1), l2 * 1.0) if l2 else None
    Q -= np.diag(Q.sum(axis=1))
    A = np.vstack([Q.T, np.ones(6)])
    pi = np.linalg.lstsq(A, np.r_[np.zeros(6), 1.0], rcond=None)[0]

    full1 = sum(pi[idx[(1, l2)]] for l2 in range(3))
    full2 = sum(pi[idx[(l1, 2)]] for l1 in range(2))
    corner = pi[idx[(1, 2)]]
    want1 = (1 - 0.5) * full1 + 0.5 * corner
    want2 = (1 - 0.25) * full2 + 0.25 * corner

    b1, b2 = exact_finite(sys)
    assert b1 == pytest.approx(want1, abs=1e-12)
    assert b2 == pytest.approx(want2, abs=1e-12)


def test_exact_finite_state_space_cap():
    with pytest.raises(StateSpaceTooLarge):
        exact_finite(FiniteSystem(SystemParams(4, 8, 1, 1, 1, 10, 0, 0), N=2000))


# ---------------------------------------------------------------- simulation

def test_simulate_two_is_reproducible():
    sys = FiniteSystem(FIG2, N=10)
    a = simulate_two(sys, horizon=500.0, seed=7)
    b = simulate_two(sys, horizon=500.0, seed=7)
    assert a == b
    c = simulate_two(sys, horizon=500.0, seed=8)
    assert (a.beta1_hat, a.beta2_hat) != (c.beta1_hat, c.beta2_hat)


def test_simulate_two_window_validation():
    sys = FiniteSystem(FIG2, N=5)
    with pytest.raises(InvalidHorizon):
        simulate_two(sys, horizon=float("inf"))
    with pytest.raises(InvalidHorizon):
        simulate_two(sys, horizon=100.0, warmup=100.0)
    with pytest.raises(InvalidHorizon):
        simulate_two(sys, horizon=100.0, warmup=-1.0)


def test_simulate_two_agrees_with_exact():
    sys = FiniteSystem(FIG2, N=25)
    want1, want2 = exact_finite(sys)
    est = simulate_two(sys, horizon=2000.0, seed=42)
    assert abs(est.beta1_hat - want1) <= 3 * est.half_width1
    assert abs(est.beta2_hat - want2) <= 3 * est.half_width2
    assert est.arrivals_seen[0] > 100_000  # lam1*N*(T - warmup) = 180k


def test_simulate_two_occupancy_tracks_capacity():
    # overloaded center 1 is nearly always full
    sys = FiniteSystem(FIG2, N=50)
    est = simulate_two(sys, horizon=1000.0, seed=3)
    assert 0.95 * sys.C1 <= est.mean_occ1 <= sys.C1
    assert 0.0 < est.mean_occ2 <= sys.C2


# ----------------------------------------------------------------- ring sim

RING4 = RingParams(((2, 1, 1, 0.25), (1, 1, 10, 0.1),
                    (1, 1, 10, 0.1), (1, 1, 10, 0.1)))


def test_simulate_ring_is_reproducible():
    a = simulate_ring(RING4, N=10, horizon=300.0, seed=5)
    b = simulate_ring(RING4, N=10, horizon=300.0, seed=5)
    assert a == b
    assert len(a) == 4


def test_simulate_ring_matches_saturated_node_loss():
    # node 0 runs at twice capacity: asymptotic loss (1 - 2p)(1 - a/lam) = 0.25.
    # At N = 50 the finite-scale bias (~N^{-1/2}) dominates the CI width, so
    # compare with an absolute tolerance rather than the half-width.
    ests = simulate_ring(RING4, N=50, horizon=1500.0, seed=6)
    assert abs(ests[0].beta1_hat - 0.25) < 0.02
    assert 0.0 < ests[0].half_width1 < 0.01
    for j in (1, 2, 3):
        assert ests[j].beta1_hat <= 1e-3


def test_simulate_ring_capacity_validation():
    tiny = RingParams(((2, 1, 0.001, 0.25), (1, 1, 10, 0.1), (1, 1, 10, 0.1)))
    with pytest.raises(ValidationError):
        simulate_ring(tiny, N=10, horizon=100.0)
