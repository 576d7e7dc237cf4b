"""Finite-scale validation engines: CTMC simulation and exact solve.

The scaled two-center system serves class-i jobs at rate mu_i per busy
server, receives Poisson arrivals at rate lambda_i * N, and has
capacities C_i = round(c_i * N).  Blocking probabilities of this chain
converge to the asymptotic values computed by the analytic module as N
grows; the engines here measure them directly, either by solving the
global balance equations (small state spaces) or by event-driven
simulation with batch-means confidence intervals.

Simulation is bit-reproducible: uniforms come from a counter-based
Philox generator keyed by the seed and are consumed in fixed-size
chunks of three per event (holding time, event selection, reroute
decision), so the event sequence depends only on (system, horizon,
warmup, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.stats import t as _student_t

from .errors import (
    InvalidHorizon,
    StateSpaceTooLarge,
    ValidationError,
)
from .params import SystemParams
from .ring import RingParams

MAX_STATES = 1_000_000
NBATCH = 20
_T95 = float(_student_t.ppf(0.975, NBATCH - 1))
_CHUNK_EVENTS = 1_000_000


def _capacity(c: float, N: int) -> int:
    return int(math.floor(c * N + 0.5))


@dataclass(frozen=True)
class FiniteSystem:
    """Two-center loss system at scale N: capacities round(c_i*N), arrivals lambda_i*N."""

    params: SystemParams
    N: int

    def __post_init__(self):
        if not (isinstance(self.N, int) and self.N >= 1):
            raise ValidationError("N", f"scale must be a positive integer, got {self.N!r}")
        if self.C1 < 1 or self.C2 < 1:
            raise ValidationError("N", f"capacities round to ({self.C1}, {self.C2}); "
                                       "both must be at least 1")

    @property
    def C1(self) -> int:
        return _capacity(self.params.c1, self.N)

    @property
    def C2(self) -> int:
        return _capacity(self.params.c2, self.N)

    @property
    def arrival1(self) -> float:
        return self.params.lambda1 * self.N

    @property
    def arrival2(self) -> float:
        return self.params.lambda2 * self.N


@dataclass(frozen=True)
class SimEstimate:
    """Blocking estimates with 95% batch-means confidence half-widths.

    arrivals_seen counts post-warmup arrivals per class; ring estimates
    carry a single counter and use only the *1 slots.  mean_occ* are the
    post-warmup time-average occupancy counts.
    """

    beta1_hat: float
    beta2_hat: float
    half_width1: float
    half_width2: float
    arrivals_seen: tuple[int, ...]
    seed: int
    mean_occ1: float = 0.0
    mean_occ2: float = 0.0

    def __post_init__(self):
        for name, b in (("beta1_hat", self.beta1_hat), ("beta2_hat", self.beta2_hat)):
            if not 0.0 <= b <= 1.0:
                raise ValidationError(name, f"estimate {b} outside [0, 1]")
        for name, h in (("half_width1", self.half_width1), ("half_width2", self.half_width2)):
            if not (math.isfinite(h) and h >= 0.0):
                raise ValidationError(name, f"half-width {h} must be finite and nonnegative")


def erlang_b(offered: float, servers: int) -> float:
    """Erlang-B loss probability for offered load `offered` and `servers` servers."""
    if servers < 0 or offered < 0:
        raise ValidationError("erlang_b", "offered load and servers must be nonnegative")
    b = 1.0
    for k in range(1, servers + 1):
        b = offered * b / (k + offered * b)
    return b


def exact_finite(sys: FiniteSystem) -> tuple[float, float]:
    """Exact blocking probabilities from the stationary global balance equations.

    State (l1, l2) moves up at the arrival rate plus overflow from the
    other center when it is full, and down at mu_i * l_i.  Then
    beta1 = (1-p1) P(L1=C1) + p1 P(L1=C1, L2=C2) and symmetrically.
    """
    C1, C2 = sys.C1, sys.C2
    n1, n2 = C1 + 1, C2 + 1
    nstates = n1 * n2
    if nstates > MAX_STATES:
        raise StateSpaceTooLarge(f"{nstates} states exceeds the {MAX_STATES} cap")
    p = sys.params
    lam1, lam2 = sys.arrival1, sys.arrival2

    l1 = np.tile(np.arange(n1), n2)                # state k = l2*n1 + l1
    l2 = np.repeat(np.arange(n2), n1)
    k = np.arange(nstates)

    up1 = (lam1 + p.p2 * lam2 * (l2 == C2)) * (l1 < C1)
    up2 = (lam2 + p.p1 * lam1 * (l1 == C1)) * (l2 < C2)
    down1 = p.mu1 * l1
    down2 = p.mu2 * l2

    rows, cols, vals = [], [], []
    for rate, shift in ((up1, 1), (up2, n1), (down1, -1), (down2, -n1)):
        mask = rate > 0
        rows.append(k[mask] + shift)               # balance row of the target state
        cols.append(k[mask])
        vals.append(rate[mask])
    rows.append(k)
    cols.append(k)
    vals.append(-(up1 + up2 + down1 + down2))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    # swap the redundant balance equation of state 0 for normalization
    keep = rows != 0
    rows = np.concatenate([rows[keep], np.zeros(nstates, dtype=np.int64)])
    cols = np.concatenate([cols[keep], k])
    vals = np.concatenate([vals[keep], np.ones(nstates)])
    A = sparse.coo_matrix((vals, (rows, cols)), shape=(nstates, nstates)).tocsc()
    b = np.zeros(nstates)
    b[0] = 1.0
    # symmetric-pattern ordering: far less fill than the default on this grid
    pi = splu(A, permc_spec="MMD_AT_PLUS_A").solve(b)

    if pi.min() < -1e-14 * max(1.0, pi.max()):
        raise ValidationError("exact_finite", f"negative stationary mass {pi.min():.3g}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()

    mass1 = pi[l1 == C1].sum()                     # P(L1 = C1)
    mass2 = pi[l2 == C2].sum()
    corner = pi[-1]                                # P(L1 = C1, L2 = C2)
    beta1 = (1.0 - p.p1) * mass1 + p.p1 * corner
    beta2 = (1.0 - p.p2) * mass2 + p.p2 * corner
    return float(beta1), float(beta2)


@njit(cache=True)
def _run_two(u, t, l1, l2, C1, C2, lam1, lam2, mu1, mu2, p1, p2,
             horizon, warmup, batch_len, nbatch, counts, occ):
    """Consume one chunk of uniforms; returns (t, l1, l2, done).

    counts rows: class-1 arrivals, class-2 arrivals, class-1 losses,
    class-2 losses, per batch.  occ accumulates integral of l_i over the
    post-warmup window.
    """
    n = u.shape[0] // 3
    for i in range(n):
        total = lam1 + lam2 + mu1 * l1 + mu2 * l2
        tn = t - math.log(1.0 - u[3 * i]) / total
        lo = t if t > warmup else warmup
        if tn >= horizon:
            if horizon > lo:
                occ[0] += l1 * (horizon - lo)
                occ[1] += l2 * (horizon - lo)
            return horizon, l1, l2, True
        if tn > lo:
            occ[0] += l1 * (tn - lo)
            occ[1] += l2 * (tn - lo)
        t = tn
        count = t >= warmup
        b = 0
        if count:
            b = int((t - warmup) / batch_len)
            if b >= nbatch:
                b = nbatch - 1
        x = u[3 * i + 1] * total
        if x < lam1:
            if count:
                counts[0, b] += 1
            if l1 < C1:
                l1 += 1
            elif u[3 * i + 2] < p1 and l2 < C2:
                l2 += 1
            elif count:
                counts[2, b] += 1
        elif x < lam1 + lam2:
            if count:
                counts[1, b] += 1
            if l2 < C2:
                l2 += 1
            elif u[3 * i + 2] < p2 and l1 < C1:
                l1 += 1
            elif count:
                counts[3, b] += 1
        elif x < lam1 + lam2 + mu1 * l1:
            if l1 > 0:
                l1 -= 1
        elif l2 > 0:
            l2 -= 1
    return t, l1, l2, False


def _batch_estimate(arr, loss):
    """Point estimate and 95% half-width from per-batch counters."""
    atot, ltot = int(arr.sum()), int(loss.sum())
    point = ltot / atot if atot > 0 else 0.0
    means = np.where(arr > 0, loss / np.maximum(arr, 1), 0.0)
    hw = _T95 * means.std(ddof=1) / math.sqrt(len(means))
    return point, float(hw), atot


def _check_window(horizon: float, warmup: float) -> None:
    if not (math.isfinite(horizon) and math.isfinite(warmup)):
        raise InvalidHorizon("horizon and warmup must be finite")
    if warmup < 0 or horizon <= warmup:
        raise InvalidHorizon(f"need horizon > warmup >= 0, got horizon={horizon}, warmup={warmup}")


def simulate_two(sys: FiniteSystem, horizon: float, warmup: float | None = None,
                 seed: int = 12345) -> SimEstimate:
    """Event-driven simulation of the two-center chain from an empty start.

    A class-1 arrival finding center 1 full is rerouted to center 2 with
    probability p1 (lost if that one is full too) and lost otherwise;
    symmetrically for class 2.  Estimates are loss counts over arrivals in
    the post-warmup window, with half-widths from 20 time batches.
    warmup defaults to 10% of the horizon.
    """
    if warmup is None:
        warmup = 0.1 * horizon
    _check_window(horizon, warmup)
    p = sys.params
    gen = np.random.Generator(np.random.Philox(key=seed))
    counts = np.zeros((4, NBATCH), dtype=np.int64)
    occ = np.zeros(2)
    batch_len = (horizon - warmup) / NBATCH
    t, l1, l2 = 0.0, 0, 0
    done = False
    while not done:
        u = gen.random(3 * _CHUNK_EVENTS)
        t, l1, l2, done = _run_two(
            u, t, l1, l2, sys.C1, sys.C2, sys.arrival1, sys.arrival2,
            p.mu1, p.mu2, p.p1, p.p2, horizon, warmup, batch_len, NBATCH,
            counts, occ)
    beta1, hw1, a1 = _batch_estimate(counts[0], counts[2])
    beta2, hw2, a2 = _batch_estimate(counts[1], counts[3])
    span = horizon - warmup
    return SimEstimate(beta1_hat=beta1, beta2_hat=beta2,
                       half_width1=hw1, half_width2=hw2,
                       arrivals_seen=(a1, a2), seed=seed,
                       mean_occ1=float(occ[0] / span), mean_occ2=float(occ[1] / span))


@njit(cache=True)
def _run_ring(u, t, l, C, lam, mu, p, horizon, warmup, batch_len, nbatch,
              arr, loss, occ):
    J = l.shape[0]
    n = u.shape[0] // 3
    for i in range(n):
        total = 0.0
        for j in range(J):
            total += lam[j] + mu[j] * l[j]
        tn = t - math.log(1.0 - u[3 * i]) / total
        lo = t if t > warmup else warmup
        if tn >= horizon:
            if horizon > lo:
                for j in range(J):
                    occ[j] += l[j] * (horizon - lo)
            return horizon, True
        if tn > lo:
            for j in range(J):
                occ[j] += l[j] * (tn - lo)
        t = tn
        count = t >= warmup
        b = 0
        if count:
            b = int((t - warmup) / batch_len)
            if b >= nbatch:
                b = nbatch - 1
        x = u[3 * i + 1] * total
        acc = 0.0
        ev = -1
        for j in range(J):
            acc += lam[j]
            if x < acc:
                ev = j
                break
        if ev >= 0:
            if count:
                arr[ev, b] += 1
            if l[ev] < C[ev]:
                l[ev] += 1
            else:
                u3 = u[3 * i + 2]
                if u3 < p[ev]:
                    tgt = ev + 1 if ev + 1 < J else 0
                elif u3 < 2.0 * p[ev]:
                    tgt = ev - 1 if ev > 0 else J - 1
                else:
                    tgt = -1
                if tgt >= 0 and l[tgt] < C[tgt]:
                    l[tgt] += 1
                elif count:
                    loss[ev, b] += 1
        else:
            for j in range(J):
                acc += mu[j] * l[j]
                if x < acc:
                    if l[j] > 0:
                        l[j] -= 1
                    break
    return t, False


def simulate_ring(ring: RingParams, N: int, horizon: float,
                  warmup: float | None = None, seed: int = 12345) -> list[SimEstimate]:
    """Simulate the scaled ring; returns one estimate per node.

    Node j has capacity round(c_j*N) and arrival rate lambda_j*N.  A
    blocked arrival at node j tries j+1 with probability p_j, j-1 with
    probability p_j, and is lost otherwise; a rerouted job finding its
    target full is lost (single hop).  Losses are charged to the node of
    first arrival.  Per-node results live in the *1 slots of SimEstimate.
    """
    if warmup is None:
        warmup = 0.1 * horizon
    _check_window(horizon, warmup)
    J = ring.J
    C = np.empty(J, dtype=np.int64)
    lam = np.empty(J)
    mu = np.empty(J)
    p = np.empty(J)
    for j in range(J):
        C[j] = _capacity(ring.c(j), N)
        if C[j] < 1:
            raise ValidationError("N", f"node {j}: capacity rounds to zero at N={N}")
        lam[j] = ring.lam(j) * N
        mu[j] = ring.mu(j)
        p[j] = ring.p(j)

    gen = np.random.Generator(np.random.Philox(key=seed))
    arr = np.zeros((J, NBATCH), dtype=np.int64)
    loss = np.zeros((J, NBATCH), dtype=np.int64)
    occ = np.zeros(J)
    batch_len = (horizon - warmup) / NBATCH
    t = 0.0
    l = np.zeros(J, dtype=np.int64)
    done = False
    while not done:
        u = gen.random(3 * _CHUNK_EVENTS)
        t, done = _run_ring(u, t, l, C, lam, mu, p, horizon, warmup,
                            batch_len, NBATCH, arr, loss, occ)

    span = horizon - warmup
    out = []
    for j in range(J):
        beta, hw, atot = _batch_estimate(arr[j], loss[j])
        out.append(SimEstimate(beta1_hat=beta, beta2_hat=0.0,
                               half_width1=hw, half_width2=0.0,
                               arrivals_seen=(atot,), seed=seed,
                               mean_occ1=float(occ[j] / span), mean_occ2=0.0))
    return out
