"""Brute-force oracle for the limiting quarter-plane random walk.

Classifies the walk's long-run behavior and solves the global-balance system
on a truncated box numerically.  The truncated solve is the reference the
explicit boundary-value solution is validated against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem, TruncationNotConverged, WrongRegime
from .kernel import eval_h
from .params import SystemParams

EPS_REGIME = 1e-9


@dataclass(frozen=True)
class WalkParams:
    """Quarter-plane walk at fluid occupancy level (l1, l2).

    Transitions from (m1, m2):
      (+1, 0) at mu1*l1
      (0, +1) at mu2*l2
      (-1, 0) at lambda1 + p2*lambda2*[m2 == 0]   (if m1 > 0)
      (0, -1) at lambda2 + p1*lambda1*[m1 == 0]   (if m2 > 0)
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    p1: float
    p2: float
    l1: float
    l2: float

    @property
    def b1(self) -> float:
        return self.mu1 * self.l1

    @property
    def b2(self) -> float:
        return self.mu2 * self.l2

    @classmethod
    def from_system(cls, params: SystemParams) -> WalkParams:
        # the saturated walk: occupancy pinned at the capacities
        return cls(params.lambda1, params.lambda2, params.mu1, params.mu2,
                   params.p1, params.p2, params.c1, params.c2)

    def as_system(self) -> SystemParams:
        return SystemParams(self.lambda1, self.lambda2, self.mu1, self.mu2,
                            self.l1, self.l2, self.p1, self.p2)


@dataclass(frozen=True)
class WalkClassification:
    tag: str  # ergodic | absorbed_at_infinity | transient1_geometric2 |
    #           transient2_geometric1 | critical
    geometric_parameter: float | None = None
    margin: float = 0.0


def classify_walk(w: WalkParams, eps: float = EPS_REGIME) -> WalkClassification:
    """Long-run behavior of the walk.

    ergodic                 one of three drift conditions holds
    absorbed_at_infinity    both coordinates drift up
    transient1_geometric2   first coordinate geometric(b1/lambda1), second -> oo
    transient2_geometric1   second coordinate geometric(b2/lambda2), first -> oo
    critical                within eps (relative) of a defining boundary
    """
    lam1, lam2, b1, b2 = w.lambda1, w.lambda2, w.b1, w.b2
    p1, p2 = w.p1, w.p2
    d1 = lam1 - b1
    d2 = lam2 - b2
    t1 = lam1 * p1 + lam2 - b1 * p1 - b2
    t2 = lam1 + lam2 * p2 - b1 - b2 * p2
    # relative slacks (invariant under scaling every rate by a constant)
    sd1 = d1 / (lam1 + b1)
    sd2 = d2 / (lam2 + b2)
    st1 = t1 / (lam1 * p1 + lam2 + b1 * p1 + b2)
    st2 = t2 / (lam1 + lam2 * p2 + b1 + b2 * p2)

    candidates = [
        ("ergodic", min(-sd2, st1), None),   # down-drift via rerouted spill, side 1
        ("ergodic", min(-sd1, st2), None),   # symmetric
        ("ergodic", min(sd1, sd2), None),    # both coordinates drift down
        ("absorbed_at_infinity", min(-sd1, -sd2), None),
        ("transient1_geometric2", min(sd1, -sd2, -st1), b1 / lam1),
        ("transient2_geometric1", min(sd2, -sd1, -st2), b2 / lam2),
    ]
    tag, margin, geo = max(candidates, key=lambda c: c[1])
    if margin < eps:
        return WalkClassification("critical", None, margin)
    return WalkClassification(tag, geo, margin)


@dataclass(frozen=True)
class LatticeDistribution:
    M: int
    prob: np.ndarray  # shape (M+1, M+1), prob[m1, m2]
    pi00: float
    mass_m1_0: float
    mass_m2_0: float


def _solve_box(w: WalkParams, M: int) -> np.ndarray:
    """Stationary distribution of the walk restricted to {0..M}^2 with
    outward transitions suppressed."""
    n = M + 1
    size = n * n
    lam1, lam2, b1, b2 = w.lambda1, w.lambda2, w.b1, w.b2

    idx = np.arange(size)
    m1 = idx // n
    m2 = idx % n

    rows = []
    cols = []
    vals = []

    # vectorized transition assembly: src -> dst at constant-per-mask rates
    up1 = m1 < M
    add_src = idx[up1]
    rows.append(add_src + n)   # (m1+1, m2)
    cols.append(add_src)
    vals.append(np.full(add_src.size, b1))

    up2 = m2 < M
    add_src = idx[up2]
    rows.append(add_src + 1)
    cols.append(add_src)
    vals.append(np.full(add_src.size, b2))

    down1 = m1 > 0
    add_src = idx[down1]
    r = lam1 + w.p2 * lam2 * (m2[down1] == 0)
    rows.append(add_src - n)
    cols.append(add_src)
    vals.append(r.astype(float))

    down2 = m2 > 0
    add_src = idx[down2]
    r = lam2 + w.p1 * lam1 * (m1[down2] == 0)
    rows.append(add_src - 1)
    cols.append(add_src)
    vals.append(r.astype(float))

    rows = np.concatenate([np.atleast_1d(x) for x in rows])
    cols = np.concatenate([np.atleast_1d(x) for x in cols])
    vals = np.concatenate([np.atleast_1d(x) for x in vals])

    # Q^T off-diagonal part; diagonal = -(total outflow per column)
    out = np.zeros(size)
    np.add.at(out, cols, vals)
    rows = np.concatenate([rows, idx])
    cols = np.concatenate([cols, idx])
    vals = np.concatenate([vals, -out])

    # replace the row-0 balance equation by the normalization sum(pi) = 1
    keep = rows != 0
    rows = np.concatenate([rows[keep], np.zeros(size, dtype=idx.dtype)])
    cols = np.concatenate([cols[keep], idx])
    vals = np.concatenate([vals[keep], np.ones(size)])

    A = sp.csc_matrix((vals, (rows, cols)), shape=(size, size))
    b = np.zeros(size)
    b[0] = 1.0
    try:
        # symmetric-pattern ordering: far less fill than the default on this grid
        pi = spla.splu(A, permc_spec="MMD_AT_PLUS_A").solve(b)
    except Exception as exc:  # pragma: no cover - solver-internal failures
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("non-finite stationary solution")
    neg = pi.min()
    if neg < -1e-10:
        raise SingularSystem(f"stationary solution has entry {neg}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return pi.reshape(n, n)


def _to_dist(prob: np.ndarray, M: int) -> LatticeDistribution:
    return LatticeDistribution(
        M=M, prob=prob, pi00=float(prob[0, 0]),
        mass_m1_0=float(prob[0, :].sum()), mass_m2_0=float(prob[:, 0].sum()))


def stationary_truncated(w: WalkParams, M: int = 160, *,
                         tol_trunc: float = 1e-6, max_M: int = 640,
                         verify: bool = True) -> LatticeDistribution:
    """Truncated stationary solve, certified by truncation doubling.

    Solves on {0..M}^2, then on {0..2M}^2, and accepts when pi00 moves by less
    than tol_trunc; otherwise keeps doubling up to max_M.  Returns the finest
    accepted solution.

    The walk must not be absorbed at infinity (and not critical): the box
    solve is also meaningful in the two mixed geometric cases, where it
    converges to the geometric marginal with the transient coordinate's mass
    piled on the far edge (pi00 -> 0).
    """
    cls = classify_walk(w)
    if cls.tag in ("absorbed_at_infinity", "critical"):
        raise WrongRegime(f"walk classification is {cls.tag}")
    if M < 8:
        raise ValueError("M must be >= 8")
    if not verify:
        return _to_dist(_solve_box(w, M), M)

    prev_pi00 = _solve_box(w, M)[0, 0]
    cur_M = M
    while cur_M < max_M:
        cur_M *= 2
        cur = _solve_box(w, cur_M)
        if abs(cur[0, 0] - prev_pi00) < tol_trunc:
            return _to_dist(cur, cur_M)
        prev_pi00 = cur[0, 0]
    raise TruncationNotConverged(
        f"pi00 still moving by >= {tol_trunc} at M = {max_M}")


def oracle_solution(w: WalkParams, M: int = 160, *,
                    tol_trunc: float = 1e-6) -> dict:
    """Convenience: truncated solve plus the derived blocking quantities."""
    dist = stationary_truncated(w, M, tol_trunc=tol_trunc)
    beta1 = dist.mass_m1_0 * (1 - w.p1) + w.p1 * dist.pi00
    beta2 = dist.mass_m2_0 * (1 - w.p2) + w.p2 * dist.pi00
    return {
        "dist": dist,
        "pi00": dist.pi00,
        "P01": dist.mass_m1_0,
        "P10": dist.mass_m2_0,
        "beta1": beta1,
        "beta2": beta2,
    }


def functional_equation_residual(dist: LatticeDistribution, x: float, y: float,
                                 params: SystemParams) -> float:
    """|h1 P(x,y) - h2 P(x,0) - h3 P(0,y) - h4 P(0,0)| over the truncated
    grid, for |x| <= 1, |y| <= 1."""
    if abs(x) > 1 or abs(y) > 1:
        raise ValueError("residual is evaluated on the closed unit bidisk")
    n = dist.M + 1
    powx = np.power(float(x), np.arange(n))
    powy = np.power(float(y), np.arange(n))
    Pxy = powx @ dist.prob @ powy
    Px0 = powx @ dist.prob[:, 0]
    P0y = dist.prob[0, :] @ powy
    val = (eval_h(1, x, y, params) * Pxy
           - eval_h(2, x, y, params) * Px0
           - eval_h(3, x, y, params) * P0y
           - eval_h(4, x, y, params) * dist.pi00)
    return abs(val)
