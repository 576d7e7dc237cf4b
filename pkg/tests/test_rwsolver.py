"""Quarter-plane walk: drift classification, truncated-lattice solve, and the
functional-equation residual used to validate distributions."""
import numpy as np
import pytest

from fogloss import analytic, rwsolver
from fogloss.errors import TruncationNotConverged, WrongRegime
from fogloss.params import SystemParams
from fogloss.rwsolver import (WalkParams, classify_walk, oracle_solution,
                              functional_equation_residual,
                              stationary_truncated)

FIG2 = SystemParams(4, 8, 1, 1, 1, 10, 1, 0)
FIG2_WALK = WalkParams.from_system(FIG2)


@pytest.fixture(scope="module")
def fig2_certified():
    return stationary_truncated(FIG2_WALK, M=160)


@pytest.fixture(scope="module")
def fig2_oracle():
    return oracle_solution(FIG2_WALK, M=160)


# ------------------------------------------------------------- classification

def test_classify_ergodic():
    cls = classify_walk(FIG2_WALK)
    assert cls.tag == "ergodic"
    assert cls.geometric_parameter is None
    assert cls.margin > 0


def test_classify_mixed_geometric():
    # first coordinate overloaded (lam1 > b1), second underloaded: the walk
    # escapes along m2 with a geometric marginal in m1
    cls = classify_walk(WalkParams(2, 8, 1, 1, 0, 0, 1, 10))
    assert cls.tag == "transient1_geometric2"
    assert cls.geometric_parameter == pytest.approx(0.5, abs=1e-15)

    cls = classify_walk(WalkParams(8, 2, 1, 1, 0, 0, 10, 1))
    assert cls.tag == "transient2_geometric1"
    assert cls.geometric_parameter == pytest.approx(0.5, abs=1e-15)


def test_classify_absorbed():
    cls = classify_walk(WalkParams(0.5, 8, 1, 1, 0.2, 0.2, 1, 10))
    assert cls.tag == "absorbed_at_infinity"


def test_classify_critical_on_boundary():
    cls = classify_walk(WalkParams(1, 8, 1, 1, 0, 0, 1, 10))  # lam1 == b1
    assert cls.tag == "critical"
    assert cls.geometric_parameter is None


def test_round_trip_with_system_params():
    assert FIG2_WALK.as_system() == FIG2
    assert FIG2_WALK.b1 == 1.0 and FIG2_WALK.b2 == 10.0


# ---------------------------------------------------------------- box solver

def test_stationary_refuses_bad_regimes():
    with pytest.raises(WrongRegime):
        stationary_truncated(WalkParams(0.5, 8, 1, 1, 0.2, 0.2, 1, 10), M=16)
    with pytest.raises(WrongRegime):
        stationary_truncated(WalkParams(1, 8, 1, 1, 0, 0, 1, 10), M=16)
    with pytest.raises(ValueError):
        stationary_truncated(FIG2_WALK, M=4)


def test_decoupled_product_form():
    # p1 = p2 = 0 with both coordinates overloaded: idle counts are
    # independent geometrics, pi00 = (1 - b1/lam1)(1 - b2/lam2)
    w = WalkParams(2, 3, 1, 1, 0, 0, 1, 2)
    dist = stationary_truncated(w, M=64, verify=False)
    assert dist.pi00 == pytest.approx(1 / 6, abs=1e-10)
    assert dist.mass_m1_0 == pytest.approx(1 / 2, abs=1e-10)
    assert dist.mass_m2_0 == pytest.approx(1 / 3, abs=1e-10)
    # joint cell = product of geometric marginals
    for m1, m2 in ((0, 0), (1, 0), (2, 3), (5, 1)):
        want = (0.5 ** (m1 + 1)) * (1 / 3) * ((2 / 3) ** m2)
        assert dist.prob[m1, m2] == pytest.approx(want, rel=1e-9)


def test_doubling_protocol_certifies_at_320(fig2_certified):
    dist = fig2_certified
    assert dist.M == 320
    assert dist.prob.shape == (321, 321)
    assert abs(dist.prob.sum() - 1.0) < 1e-12


def test_verify_false_solves_once_at_given_size():
    dist = stationary_truncated(FIG2_WALK, M=64, verify=False)
    assert dist.M == 64


def test_truncation_not_converged():
    # nearly critical in both coordinates: far too slow to certify at M <= 32
    w = WalkParams(1.05, 1.05, 1, 1, 0, 0, 1, 1)
    with pytest.raises(TruncationNotConverged):
        stationary_truncated(w, M=8, max_M=32, tol_trunc=1e-12)


def test_outer_layers_carry_no_mass_when_certified(fig2_certified):
    edge = max(fig2_certified.prob[-2:, :].sum(),
               fig2_certified.prob[:, -2:].sum())
    assert edge < 1e-8


# ------------------------------------------------------------------- oracle

def test_oracle_matches_analytic_solution(fig2_oracle):
    got = fig2_oracle
    assert set(got) >= {"dist", "pi00", "P01", "P10", "beta1", "beta2"}
    sol = analytic.blocking(FIG2)
    assert got["pi00"] == pytest.approx(sol.pi00, abs=1e-8)
    assert got["P01"] == pytest.approx(sol.P01, abs=1e-8)
    assert got["P10"] == pytest.approx(sol.P10, abs=1e-8)
    assert got["beta1"] == pytest.approx(sol.beta1, abs=1e-8)
    assert got["beta2"] == pytest.approx(sol.beta2, abs=1e-8)


def test_oracle_throughput_conservation(fig2_oracle):
    tput = (FIG2.lambda1 * (1 - fig2_oracle["beta1"])
            + FIG2.lambda2 * (1 - fig2_oracle["beta2"]))
    assert tput == pytest.approx(FIG2.a1 + FIG2.a2, abs=1e-5)


# ------------------------------------------------------- functional equation

def test_functional_equation_residual_small_inside_bidisk():
    dist = stationary_truncated(FIG2_WALK, M=160, verify=False)
    for x, y in ((0.5, 0.5), (0.0, 0.9), (0.9, 0.0), (1.0, 1.0), (0.25, 0.75)):
        assert functional_equation_residual(dist, x, y, FIG2) < 1e-6


def test_functional_equation_residual_halves_with_M():
    res = [functional_equation_residual(
        stationary_truncated(FIG2_WALK, M=M, verify=False), 0.5, 0.5, FIG2)
        for M in (12, 24, 48)]
    assert res[1] < 0.5 * res[0]
    assert res[2] < 0.5 * res[1]


def test_functional_equation_rejects_exterior_points():
    dist = stationary_truncated(FIG2_WALK, M=16, verify=False)
    with pytest.raises(ValueError):
        functional_equation_residual(dist, 1.5, 0.5, FIG2)
    with pytest.raises(ValueError):
        functional_equation_residual(dist, 0.5, -1.2, FIG2)
