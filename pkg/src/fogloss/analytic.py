"""Explicit solution for the saturated two-center system.

Pipeline: classify the stability regime; under the ergodic-saturated regimes
(E1/E2/E3) evaluate the boundary-value solution — the angle function Theta_Y,
the Cauchy-type quadrature phi_Y, the circle factor alpha_Y — to get the
corner mass pi00, then the boundary masses P(0,1)/P(1,0) and the blocking
probabilities.  The remaining regimes (A, B1, B2) have closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import kernel
from .errors import (CriticalRegime, DegenerateP1, DomainError, OutOfRange,
                     PoleEncountered, QuadratureFailure, SingularIntegrand,
                     WrongRegime)
from .params import SystemParams

EPS_REGIME = 1e-9      # relative slack below which a regime boundary is "hit"
TOL_QUAD = 1e-10       # absolute tolerance on the phi_Y exponent integral

ERGODIC_TAGS = ("E1", "E2", "E3")


@dataclass(frozen=True)
class Regime:
    tag: str      # E1 | E2 | E3 | A | B1 | B2 | Critical
    margin: float  # smallest relative slack among the tag's defining inequalities


def regime(params: SystemParams, eps: float = EPS_REGIME) -> Regime:
    """Stability regime of the saturated system.

    E1: lambda2 < a2 and lambda1*p1 + lambda2 > a1*p1 + a2   (spill saturates #2)
    E2: lambda1 < a1 and lambda1 + lambda2*p2 > a1 + a2*p2   (spill saturates #1)
    E3: both centers individually overloaded
    A:  both underloaded
    B1: #2 overloaded, #1 absorbs the spill and stays underloaded
    B2: #1 overloaded, #2 absorbs the spill and stays underloaded
    Critical: within eps (relative) of a boundary.
    """
    lam1, lam2, a1, a2 = params.lambda1, params.lambda2, params.a1, params.a2
    p1, p2 = params.p1, params.p2
    d1 = lam1 - a1
    d2 = lam2 - a2
    t1 = lam1 * p1 + lam2 - a1 * p1 - a2
    t2 = lam1 + lam2 * p2 - a1 - a2 * p2
    sd1 = d1 / (lam1 + a1)
    sd2 = d2 / (lam2 + a2)
    st1 = t1 / (lam1 * p1 + lam2 + a1 * p1 + a2)
    st2 = t2 / (lam1 + lam2 * p2 + a1 + a2 * p2)

    candidates = [
        ("E1", min(-sd2, st1)),
        ("E2", min(-sd1, st2)),
        ("E3", min(sd1, sd2)),
        ("A", min(-sd1, -sd2)),
        ("B1", min(sd2, -st2)),
        ("B2", min(sd1, -st1)),
    ]
    tag, margin = max(candidates, key=lambda c: c[1])
    if margin < eps:
        return Regime("Critical", margin)
    if tag == "E1":
        assert lam2 < a2 and lam1 > a1
    if tag == "E2":
        assert lam1 < a1 and lam2 > a2
    return Regime(tag, margin)


def R_Y(x: float, params: SystemParams) -> float:
    """Quadratic carrying the rerouting probabilities into the boundary
    condition on the circle |y| = r2."""
    lam1, lam2 = params.lambda1, params.lambda2
    p1, p2 = params.p1, params.p2
    return (p1 * params.a1 * (1 - p2) * x * x
            + (p1 * p2 * (params.a1 + params.a2)
               - (1 - p2) * (lam2 + lam1 * p1)) * x
            - p2 * (lam2 + lam1 * p1))


def _theta_Y_raw(x: float, params: SystemParams) -> float:
    pp = 1.0 - params.p1 * params.p2
    num = pp * math.sqrt(max(-kernel.delta2(x, params), 0.0))
    q = params.a1 * x * x - params.S * x + params.lambda1
    den = pp * q - 2.0 * R_Y(x, params)
    return math.atan2(num, den)


def theta_Y(x: float, params: SystemParams) -> float:
    """Boundary angle Theta_Y(x) in [0, pi] for x in [x1, x2]: the argument of
    -mu2c2(1-p1p2) Y0(x+0i) x - R_Y(x)."""
    bp = kernel.branch_points(params)
    tol = 1e-12 * (bp.x2 - bp.x1)
    if not (bp.x1 - tol <= x <= bp.x2 + tol):
        raise DomainError(f"x={x} outside [{bp.x1}, {bp.x2}]")
    return _theta_Y_raw(x, params)


def phi_Y(y: float, params: SystemParams, *,
          tol_quad: float = TOL_QUAD) -> float:
    """The Cauchy-integral factor

        phi_Y(y) = exp( (y/pi) * int_{x1}^{x2} (a1 x^2 - lambda1) Theta_Y(x)
                                               / (x h1(x,y)) dx )

    evaluated with the substitution x = m + h sin(theta), which absorbs the
    square-root behavior of Theta_Y at the interval endpoints.
    """
    reg = regime(params)
    if reg.tag not in ERGODIC_TAGS:
        raise WrongRegime(f"phi_Y requires an ergodic-saturated regime, got {reg.tag}")
    bp = kernel.branch_points(params)
    m = 0.5 * (bp.x1 + bp.x2)
    h = 0.5 * (bp.x2 - bp.x1)

    # pole guard: h1(., y) must stay away from zero *inside* the interval.
    # The endpoints are excluded: h1(., 1) has a legitimate zero at x = 1,
    # which collides with x2 as lambda2 -> mu2 c2, and endpoint zeros are
    # integrable under the sine substitution (Theta_Y vanishes there too).
    grid = m + h * np.sin(np.linspace(-math.pi / 2 + 0.03,
                                      math.pi / 2 - 0.03, 509))
    scale = (params.a1 + params.a2 + params.S
             + params.lambda1 + params.lambda2) * max(1.0, y * y)
    h1_grid = (-params.a1 * grid * grid * y - params.a2 * grid * y * y
               + params.S * grid * y - params.lambda1 * y - params.lambda2 * grid)
    if np.min(np.abs(h1_grid)) < 1e-8 * scale:
        raise SingularIntegrand(
            f"h1(x, {y}) nearly vanishes on the integration interval")

    lam1, a1 = params.lambda1, params.a1

    def g(th: float) -> float:
        x = m + h * math.sin(th)
        h1 = kernel.eval_h(1, x, y, params).real
        return (a1 * x * x - lam1) * _theta_Y_raw(x, params) / (x * h1) \
            * h * math.cos(th)

    val, err = quad(g, -math.pi / 2, math.pi / 2,
                    epsabs=tol_quad, epsrel=1e-13, limit=200)
    if err > tol_quad:
        val, err = quad(g, -math.pi / 2, math.pi / 2,
                        epsabs=tol_quad, epsrel=1e-13, limit=800)
        if err > tol_quad:
            raise QuadratureFailure(
                f"exponent error estimate {err} exceeds {tol_quad}")
    return math.exp(y / math.pi * val)


def alpha_Y(y: complex, params: SystemParams) -> complex:
    """Meromorphic continuation factor across the circle |y| = r2:

        alpha_Y(y) = (lambda2 (1-p1p2) X0(y) + y R_Y(X0(y)))
                   / (y (mu2c2 (1-p1p2) y X0(y) + R_Y(X0(y))))
    """
    x0 = kernel.X0(y, params)
    pp = 1.0 - params.p1 * params.p2
    ry = R_Y(x0, params)  # plain polynomial, fine for complex x0
    num = params.lambda2 * pp * x0 + y * ry
    den = y * (params.a2 * pp * y * x0 + ry)
    scale = abs(y) * (params.a2 + abs(ry)) * max(1.0, abs(x0))
    if abs(den) < 1e-13 * max(scale, 1e-300):
        raise PoleEncountered(f"alpha_Y denominator vanishes at y={y}")
    return num / den


def alpha_Y_at_1(params: SystemParams) -> float:
    """Closed form of alpha_Y(1) when lambda2 < mu2 c2 (where X0(1) = 1)."""
    lam1, lam2, a1, a2 = params.lambda1, params.lambda2, params.a1, params.a2
    p1, p2 = params.p1, params.p2
    return (p1 * (lam1 + lam2 * p2 - a1 - a2 * p2)
            / (lam2 + lam1 * p1 - a1 * p1 - a2))


def pi00(params: SystemParams, *, tol_quad: float = TOL_QUAD,
         _phi1: float | None = None) -> float:
    """Corner mass pi_c(0,0), the single unknown of the solution:

        lambda2 > mu2c2:  (lambda1 + lambda2 p2 - a1 - a2 p2)
                          / ((lambda1 + lambda2 p2) phi_Y(1))
        lambda2 < mu2c2:  (lambda2 + lambda1 p1 - a1 p1 - a2)
                          / (p1 (lambda1 + lambda2 p2) phi_Y(1))
    """
    reg = regime(params)
    if reg.tag == "Critical":
        raise CriticalRegime("parameters on a regime boundary")
    if reg.tag not in ERGODIC_TAGS:
        raise WrongRegime(f"pi00 requires regime E1/E2/E3, got {reg.tag}")
    lam1, lam2, a1, a2 = params.lambda1, params.lambda2, params.a1, params.a2
    p1, p2 = params.p1, params.p2
    phi1 = phi_Y(1.0, params, tol_quad=tol_quad) if _phi1 is None else _phi1
    if lam2 > a2:
        val = (lam1 + lam2 * p2 - a1 - a2 * p2) / ((lam1 + lam2 * p2) * phi1)
    else:
        if p1 <= 0.0:
            # impossible under ergodicity: the E1 inequality forces
            # p1 (lambda1 - a1) > a2 - lambda2 > 0
            raise DegenerateP1("p1 = 0 with lambda2 < mu2*c2")
        val = (lam2 + lam1 * p1 - a1 * p1 - a2) / (p1 * (lam1 + lam2 * p2) * phi1)
    if not (0.0 < val < 1.0):
        raise OutOfRange(f"pi00 = {val} outside (0,1)")
    return val


def boundary_masses(params: SystemParams, pi00: float) -> tuple[float, float]:
    """Boundary masses (P(0,1), P(1,0)) = (P(m1=0), P(m2=0)) from the corner
    mass, via the normalization relations of the functional equation."""
    lam1, lam2, a1, a2 = params.lambda1, params.lambda2, params.a1, params.a2
    p1, p2 = params.p1, params.p2
    pp = 1.0 - p1 * p2
    P01 = (lam1 - a1 + p2 * (lam2 - a2) - p2 * (lam2 + lam1 * p1) * pi00) \
        / (pp * lam1)
    P10 = (lam2 - a2 + p1 * (lam1 - a1) - p1 * (lam1 + lam2 * p2) * pi00) \
        / (pp * lam2)
    tol = 1e-9
    for name, v in (("P(0,1)", P01), ("P(1,0)", P10)):
        if not (-tol <= v <= 1.0 + tol):
            raise OutOfRange(f"{name} = {v} outside [0,1]")
    return min(max(P01, 0.0), 1.0), min(max(P10, 0.0), 1.0)


@dataclass(frozen=True)
class StationarySolution:
    pi00: float
    P01: float
    P10: float
    phiY1: float | None           # None outside the ergodic-saturated regimes
    beta1: float
    beta2: float
    regime: Regime
    method: str                   # analytic | oracle | simulation


def _validated(sol: StationarySolution) -> StationarySolution:
    for name in ("pi00", "P01", "P10", "beta1", "beta2"):
        v = getattr(sol, name)
        if not (0.0 <= v <= 1.0):
            raise OutOfRange(f"{name} = {v} outside [0,1]")
    if sol.phiY1 is not None and not sol.phiY1 > 0:
        raise OutOfRange(f"phiY1 = {sol.phiY1} not positive")
    return sol


def blocking(params: SystemParams, *, tol_quad: float = TOL_QUAD) -> StationarySolution:
    """Asymptotic blocking probabilities (beta1, beta2) with full dispatch:

    A        both underloaded           -> beta = (0, 0)
    B1 / B2  one overloaded, spill      -> overloaded center loses
             absorbed by the other         (1-p_i)(1 - mu_i c_i / lambda_i)
    E1/E2/E3 both saturated             -> boundary-value solution
    Critical refused.
    """
    reg = regime(params)
    if reg.tag == "Critical":
        raise CriticalRegime(
            f"parameters within {EPS_REGIME} of a regime boundary "
            f"(margin {reg.margin})")
    lam1, lam2, a1, a2 = params.lambda1, params.lambda2, params.a1, params.a2
    p1, p2 = params.p1, params.p2

    if reg.tag in ERGODIC_TAGS:
        phi1 = phi_Y(1.0, params, tol_quad=tol_quad)
        pi = pi00(params, tol_quad=tol_quad, _phi1=phi1)
        P01, P10 = boundary_masses(params, pi)
        beta1 = P01 * (1 - p1) + p1 * pi
        beta2 = P10 * (1 - p2) + p2 * pi
        return _validated(StationarySolution(
            pi, P01, P10, phi1, beta1, beta2, reg, "analytic"))

    if reg.tag == "A":
        return _validated(StationarySolution(
            0.0, 0.0, 0.0, None, 0.0, 0.0, reg, "analytic"))
    if reg.tag == "B1":
        # idle counts: first coordinate drifts to infinity, second is
        # geometric(a2/lambda2); only center 2 loses jobs
        P10 = 1.0 - a2 / lam2
        return _validated(StationarySolution(
            0.0, 0.0, P10, None, 0.0, (1 - p2) * P10, reg, "analytic"))
    if reg.tag == "B2":
        P01 = 1.0 - a1 / lam1
        return _validated(StationarySolution(
            0.0, P01, 0.0, None, (1 - p1) * P01, 0.0, reg, "analytic"))
    raise WrongRegime(f"unhandled regime {reg.tag}")  # pragma: no cover


def P0y(y: float, params: SystemParams, *, tol_quad: float = TOL_QUAD) -> float:
    """Generating function P(0, y) of the idle-count distribution on the
    {m1 = 0} boundary, as a function of real y.

    Inside the circle |y| < r2 the solution is
        (lam1+lam2 p2)/(lam1(1-p1p2)) pi00 phi_Y(y)
        - p2(lam2+lam1 p1)/(lam1(1-p1p2)) pi00;
    outside, the phi_Y term carries the extra meromorphic factor alpha_Y(y).
    """
    reg = regime(params)
    if reg.tag not in ERGODIC_TAGS:
        raise WrongRegime(f"P0y requires regime E1/E2/E3, got {reg.tag}")
    lam1, lam2 = params.lambda1, params.lambda2
    p1, p2 = params.p1, params.p2
    r2 = math.sqrt(lam2 / params.a2)
    pi = pi00(params, tol_quad=tol_quad)
    A = (lam1 + lam2 * p2) / (lam1 * (1 - p1 * p2))
    B = p2 * (lam2 + lam1 * p1) / (lam1 * (1 - p1 * p2))
    band = 1e-9 * r2
    if abs(y) <= r2 - band:
        return A * pi * phi_Y(y, params, tol_quad=tol_quad) - B * pi
    if abs(y) >= r2 + band:
        a = alpha_Y(y, params)
        if abs(complex(a).imag) > 1e-10 * max(1.0, abs(a)):
            raise DomainError(f"alpha_Y({y}) is not real: {a}")
        return (A * pi * complex(a).real * phi_Y(y, params, tol_quad=tol_quad)
                - B * pi)
    raise DomainError(f"y = {y} lies on the circle |y| = r2 = {r2}")
