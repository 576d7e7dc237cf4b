"""Kernel algebra of the stationary generating-function equation.

The stationary distribution of the limiting quarter-plane walk satisfies

    h1(x,y) P(x,y) = h2(x,y) P(x,0) + h3(x,y) P(0,y) + h4(x,y) P(0,0)

with four bivariate polynomials h1..h4.  This module provides the polynomials,
their discriminants, the real branch points, and the algebraic roots X0/Y0 of
the kernel h1, including one-sided limits on the branch cuts.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchCut, ComplexBranchPoints, OrderingViolation
from .params import SystemParams

# relative gap below which the two kernel roots count as modulus-tied and the
# smaller-modulus rule hands over to continuity tracking
_MODULUS_TIE = 1e-9


def eval_h(index: int, x: complex, y: complex, params: SystemParams) -> complex:
    """Evaluate h1..h4 at (x, y)."""
    lam1, lam2 = params.lambda1, params.lambda2
    p1, p2 = params.p1, params.p2
    a1, a2 = params.a1, params.a2
    if index == 1:
        return (-a1 * x * x * y - a2 * x * y * y
                + params.S * x * y - lam1 * y - lam2 * x)
    if index == 2:
        return lam2 * ((1 - p2) * x * y - x + p2 * y)
    if index == 3:
        return lam1 * ((1 - p1) * x * y - y + p1 * x)
    if index == 4:
        return (lam1 * p1 + lam2 * p2) * x * y - p2 * lam2 * y - p1 * lam1 * x
    raise ValueError(f"h index must be 1..4, got {index}")


def delta2(x: float, params: SystemParams) -> float:
    """Discriminant of h1(x, .) as a quadratic in y."""
    q = params.a1 * x * x - params.S * x + params.lambda1
    return q * q - 4.0 * params.a2 * params.lambda2 * x * x


def delta1(y: float, params: SystemParams) -> float:
    """Discriminant of h1(., y) as a quadratic in x."""
    q = params.a2 * y * y - params.S * y + params.lambda2
    return q * q - 4.0 * params.a1 * params.lambda1 * y * y


@dataclass(frozen=True)
class BranchPoints:
    x1: float
    x2: float
    x3: float
    x4: float
    y1: float
    y2: float
    y3: float
    y4: float
    r1: float
    r2: float


def _real_quadratic_roots(a: float, b: float, c: float) -> tuple[float, float]:
    # stable real quadratic solver; raises if the discriminant is negative
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ComplexBranchPoints(
            f"quadratic {a}*t^2 + {b}*t + {c} has no real roots")
    s = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(s, b)) if b != 0.0 else -0.5 * s
    if q == 0.0:
        return 0.0, 0.0
    r1, r2 = q / a, c / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


def _quartic_branch_points(a: float, s_mid: float, lam: float, cross: float):
    # Delta factors as (a t^2 - (S - 2*sqrt(cross)) t + lam)
    #                * (a t^2 - (S + 2*sqrt(cross)) t + lam)
    g = 2.0 * math.sqrt(cross)
    lo = _real_quadratic_roots(a, -(s_mid + g), lam)
    hi = _real_quadratic_roots(a, -(s_mid - g), lam)
    return sorted(lo + hi)


def branch_points(params: SystemParams) -> BranchPoints:
    """Real branch points of Delta2 (x side) and Delta1 (y side), ascending,
    plus the circle radii r1, r2."""
    S = params.S
    xs = _quartic_branch_points(params.a1, S, params.lambda1,
                                params.a2 * params.lambda2)
    ys = _quartic_branch_points(params.a2, S, params.lambda2,
                                params.a1 * params.lambda1)
    for t, name in ((xs, "x"), (ys, "y")):
        if not (0.0 < t[0] < t[1] < 1.0 < t[2] < t[3]):
            raise OrderingViolation(
                f"{name}-side branch points {t} do not satisfy "
                f"0 < {name}1 < {name}2 < 1 < {name}3 < {name}4")
    r1 = math.sqrt(params.lambda1 / params.a1)
    r2 = math.sqrt(params.lambda2 / params.a2)
    return BranchPoints(xs[0], xs[1], xs[2], xs[3],
                        ys[0], ys[1], ys[2], ys[3], r1, r2)


def _complex_quadratic_roots(a: complex, b: complex, c: complex):
    # roots of a t^2 + b t + c, computed with the cancellation-free split
    disc = cmath.sqrt(b * b - 4.0 * a * c)
    if (b.conjugate() * disc).real < 0.0:
        disc = -disc
    q = -0.5 * (b + disc)
    if q == 0.0:  # b == 0 and disc == 0
        r = cmath.sqrt(-c / a)
        return r, -r
    return q / a, c / q


def _on_cut(v: float, lo1: float, hi1: float, lo2: float, hi2: float,
            tol: float) -> bool:
    return (lo1 - tol <= v <= hi1 + tol) or (lo2 - tol <= v <= hi2 + tol)


def _kernel_root(y: complex, a_self: float, lam_self: float,
                 a_other: float, lam_other: float, S: float,
                 cut_lo1: float, cut_hi1: float,
                 cut_lo2: float, cut_hi2: float) -> complex:
    """Root of  a_self*y * t^2 + (a_other*y^2 - S*y + lam_other) * t
                + lam_self*y = 0  that is null at the origin.

    Selection: the smaller-modulus root; if the moduli are tied (relatively
    within 1e-9, which happens near the cuts), fall back to continuity
    tracking along the segment from the origin.
    """
    y = complex(y)
    if y == 0:
        return 0.0 + 0.0j
    if y.imag == 0.0 and _on_cut(y.real, cut_lo1, cut_hi1, cut_lo2, cut_hi2, 0.0):
        raise BranchCut(
            f"{y.real} lies on a branch cut; use the one-sided limit")

    def roots_at(t: complex):
        return _complex_quadratic_roots(
            a_self * t, a_other * t * t - S * t + lam_other, lam_self * t)

    r0, r1 = roots_at(y)
    m0, m1 = abs(r0), abs(r1)
    if abs(m0 - m1) > _MODULUS_TIE * max(m0, m1):
        return r0 if m0 < m1 else r1
    if y.imag == 0.0:
        # real y off the cuts with tied moduli only happens next to a branch
        # point, where the two roots coincide anyway
        return r0 if m0 <= m1 else r1
    # continuity tracking: walk t from near 0 to y, following the root that
    # starts at the origin (the segment stays off the real-axis cuts)
    prev = 0.0 + 0.0j
    for t in np.linspace(0.02, 1.0, 64):
        c0, c1 = roots_at(t * y)
        prev = c0 if abs(c0 - prev) <= abs(c1 - prev) else c1
    return prev


def X0(y: complex, params: SystemParams) -> complex:
    """Kernel root in x, null at the origin; analytic off [y1,y2] u [y3,y4]."""
    bp = branch_points(params)
    return _kernel_root(y, params.a1, params.lambda1, params.a2,
                        params.lambda2, params.S,
                        bp.y1, bp.y2, bp.y3, bp.y4)


def Y0(x: complex, params: SystemParams) -> complex:
    """Kernel root in y, null at the origin; analytic off [x1,x2] u [x3,x4]."""
    bp = branch_points(params)
    return _kernel_root(x, params.a2, params.lambda2, params.a1,
                        params.lambda1, params.S,
                        bp.x1, bp.x2, bp.x3, bp.x4)


def X1(y: complex, params: SystemParams) -> complex:
    """The other kernel root in x: X1 = lambda1 / (mu1 c1 X0)."""
    return params.lambda1 / (params.a1 * X0(y, params))


def Y1(x: complex, params: SystemParams) -> complex:
    """The other kernel root in y: Y1 = lambda2 / (mu2 c2 Y0)."""
    return params.lambda2 / (params.a2 * Y0(x, params))


def Y0_upper(x: float, params: SystemParams) -> complex:
    """One-sided limit Y0(x + 0i) for real x on the cut [x1,x2].

    On the cut the square root of Delta2 continues to -i*sqrt(-Delta2(x)),
    which puts Y0(x+0i) on the lower half of the circle |y| = r2 and makes
    arg(-mu2c2(1-p1p2) Y0(x+0i) x - R_Y(x)) land in [0, pi].
    """
    d = delta2(x, params)
    if d > 0.0:
        raise BranchCut(f"x={x} is not on the cut (Delta2 > 0)")
    q = params.a1 * x * x - params.S * x + params.lambda1
    return (-q - 1j * math.sqrt(-d)) / (2.0 * params.a2 * x)


def X0_upper(y: float, params: SystemParams) -> complex:
    """One-sided limit X0(y + 0i) for real y on the cut [y1,y2]."""
    d = delta1(y, params)
    if d > 0.0:
        raise BranchCut(f"y={y} is not on the cut (Delta1 > 0)")
    q = params.a2 * y * y - params.S * y + params.lambda2
    return (-q - 1j * math.sqrt(-d)) / (2.0 * params.a1 * y)
