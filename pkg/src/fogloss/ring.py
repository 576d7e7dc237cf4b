"""Ring of loss centers with two-sided overflow rerouting.

Classifies a cyclic network of J centers by which nodes are saturated in
the heavy-traffic limit and computes per-node asymptotic loss
probabilities.  An isolated saturated node spills a vanishing fraction of
its traffic to each neighbour; a saturated adjacent pair is mapped onto
the two-center solver, whose corner and boundary masses give both loss
rates.  Blocked arrivals are offered to each neighbour with probability
p_j (so 2*p_j in total) and lost outright otherwise; a rerouted job that
finds its target full is lost, never forwarded again.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import analytic
from .errors import (
    CriticalRegime,
    InvalidRerouteProbability,
    UnsupportedTopology,
    ValidationError,
)
from .params import SystemParams

EPS_REGIME = 1e-9

_ERGODIC_TAGS = ("E1", "E2", "E3")


@dataclass(frozen=True)
class RingParams:
    """Cyclic network of J >= 3 centers; node j holds (lambda_j, mu_j, c_j, p_j).

    Indices are cyclic: node(j) accepts any integer and wraps modulo J.
    p_j is the probability a blocked arrival at node j is offered to one
    *specific* neighbour, so it must not exceed 1/2.
    """

    nodes: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        if len(self.nodes) < 3:
            raise ValidationError("nodes", "a ring needs at least 3 nodes")
        clean = []
        for j, node in enumerate(self.nodes):
            if len(node) != 4:
                raise ValidationError(
                    "nodes", f"node {j}: expected (lambda, mu, c, p), got {node!r}")
            lam, mu, c, p = (float(v) for v in node)
            for name, v in (("lambda", lam), ("mu", mu), ("c", c)):
                if not v > 0:
                    raise ValidationError("nodes", f"node {j}: {name} must be positive")
            if not 0.0 <= p <= 0.5:
                raise InvalidRerouteProbability(
                    "nodes", f"node {j}: p={p} outside [0, 1/2] "
                             "(total reroute probability is 2p)")
            clean.append((lam, mu, c, p))
        object.__setattr__(self, "nodes", tuple(clean))

    @property
    def J(self) -> int:
        return len(self.nodes)

    def lam(self, j: int) -> float:
        return self.nodes[j % self.J][0]

    def mu(self, j: int) -> float:
        return self.nodes[j % self.J][1]

    def c(self, j: int) -> float:
        return self.nodes[j % self.J][2]

    def p(self, j: int) -> float:
        return self.nodes[j % self.J][3]

    def a(self, j: int) -> float:
        """Service capacity mu_j * c_j of node j."""
        return self.mu(j) * self.c(j)

    def pair_system(self, j0: int) -> SystemParams:
        """Map the adjacent pair (j0, j0+1) onto a two-center system.

        Within the pair each blocked arrival reaches the other member with
        probability p_j (the outward offer leaves the pair), so the mapped
        reroute probabilities are p_j themselves.
        """
        j1 = j0 + 1
        return SystemParams(
            lambda1=self.lam(j0), lambda2=self.lam(j1),
            mu1=self.mu(j0), mu2=self.mu(j1),
            c1=self.c(j0), c2=self.c(j1),
            p1=self.p(j0), p2=self.p(j1),
        )


@dataclass(frozen=True)
class RingSolution:
    """Per-node asymptotic loss probabilities.

    case: one of no_congestion, single_saturated, pair_saturated,
        multi_saturated (several disjoint saturated groups).
    groups: the saturated groups as ("single", j) or ("pair", j0) with j0
        the lower pair index; empty for no_congestion.
    beta: loss probability per node, zero at every unsaturated node.
    """

    case: str
    beta: tuple[float, ...]
    groups: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for j, b in enumerate(self.beta):
            if not -1e-12 <= b <= 1.0 + 1e-12:
                raise ValidationError("beta", f"beta[{j}]={b} outside [0, 1]")
        object.__setattr__(
            self, "beta", tuple(min(1.0, max(0.0, b)) for b in self.beta))


def _rel_margin(lhs: float, rhs: float) -> float:
    """Scale-free margin of lhs < rhs; positive iff the inequality holds."""
    return (rhs - lhs) / (rhs + lhs)


def _cyclic_runs(members: set[int], J: int) -> list[tuple[int, int]]:
    """Maximal runs of cyclically consecutive members, as (start, length)."""
    if len(members) == J:
        return [(0, J)]
    runs = []
    for j in sorted(members):
        if (j - 1) % J in members:
            continue  # not the start of a run
        length = 1
        while (j + length) % J in members:
            length += 1
        runs.append((j, length))
    return runs


def _analyze(ring: RingParams, eps: float, tol_quad: float):
    """Shared classification/solution pass.

    Returns (case, groups, beta) with beta=None when unsupported.  Raises
    CriticalRegime whenever any classifying inequality is within eps of
    equality (node load, spill absorption, or the mapped pair's own
    regime boundaries).
    """
    J = ring.J
    lam = [ring.lam(j) for j in range(J)]
    a = [ring.a(j) for j in range(J)]

    over = []
    for j in range(J):
        m = _rel_margin(lam[j], a[j])
        if abs(m) <= eps:
            raise CriticalRegime(f"node {j} is balanced: lambda = mu*c (margin {m:.3g})")
        if m < 0:
            over.append(j)
    if not over:
        return "no_congestion", (), (0.0,) * J

    runs = _cyclic_runs(set(over), J)
    if any(length >= 3 for _, length in runs):
        return "unsupported", (), None

    # Decide, per run of individually overloaded nodes, which saturated
    # group it generates.  An isolated overloaded node whose spill a
    # neighbour cannot absorb drags that neighbour into a saturated pair.
    groups: list[tuple[str, int]] = []
    for start, length in runs:
        if length == 2:
            groups.append(("pair", start))
            continue
        j = start
        spill = ring.p(j) * (lam[j] - a[j])
        sides = {}
        for nb in ((j - 1) % J, (j + 1) % J):
            m = _rel_margin(lam[nb] + spill, a[nb])
            if abs(m) <= eps:
                raise CriticalRegime(
                    f"node {nb} exactly absorbs the spill from node {j} (margin {m:.3g})")
            sides[nb] = m > 0
        left, right = sides[(j - 1) % J], sides[(j + 1) % J]
        if left and right:
            groups.append(("single", j))
        elif left:
            groups.append(("pair", j))            # spill saturates j+1
        elif right:
            groups.append(("pair", (j - 1) % J))  # spill saturates j-1
        else:
            return "unsupported", (), None        # both neighbours saturate

    # Saturated groups must be pairwise disjoint and non-adjacent; anything
    # else means three or more contiguous saturated nodes.
    owner: dict[int, int] = {}
    for gi, (kind, j0) in enumerate(groups):
        span = (j0,) if kind == "single" else (j0, (j0 + 1) % J)
        for s in span:
            if s in owner:
                return "unsupported", (), None
            owner[s] = gi
    for s, gi in owner.items():
        for nb in ((s - 1) % J, (s + 1) % J):
            if nb in owner and owner[nb] != gi:
                return "unsupported", (), None

    beta = [0.0] * J
    spill_in = [0.0] * J
    for kind, j0 in groups:
        pj0 = ring.p(j0)
        if kind == "single":
            block = 1.0 - a[j0] / lam[j0]
            beta[j0] = (1.0 - 2.0 * pj0) * block
            excess = pj0 * (lam[j0] - a[j0])
            spill_in[(j0 - 1) % J] += excess
            spill_in[(j0 + 1) % J] += excess
        else:
            j1 = (j0 + 1) % J
            pj1 = ring.p(j1)
            sol = analytic.blocking(ring.pair_system(j0), tol_quad=tol_quad)
            if sol.regime.tag not in _ERGODIC_TAGS:
                return "unsupported", (), None
            beta[j0] = sol.P01 * (1.0 - 2.0 * pj0) + pj0 * sol.pi00
            beta[j1] = sol.P10 * (1.0 - 2.0 * pj1) + pj1 * sol.pi00
            spill_in[(j0 - 1) % J] += lam[j0] * pj0 * sol.P01
            spill_in[(j1 + 1) % J] += lam[j1] * pj1 * sol.P10

    # Every spill target must stay strictly underloaded once all incoming
    # overflow is added (for a lone pair these are exactly the two
    # absorption inequalities; summing handles shared targets).
    for k in range(J):
        if spill_in[k] > 0.0 and k not in owner:
            m = _rel_margin(lam[k] + spill_in[k], a[k])
            if abs(m) <= eps:
                raise CriticalRegime(
                    f"node {k} exactly absorbs its incoming spill (margin {m:.3g})")
            if m < 0:
                return "unsupported", (), None

    if len(groups) == 1:
        case = "single_saturated" if groups[0][0] == "single" else "pair_saturated"
    else:
        case = "multi_saturated"
    return case, tuple(groups), tuple(beta)


def classify_ring(ring: RingParams, *, eps: float = EPS_REGIME,
                  tol_quad: float = analytic.TOL_QUAD) -> str:
    """Classify the ring's congestion pattern.

    Returns one of "no_congestion", "single_saturated", "pair_saturated",
    "multi_saturated", "unsupported".  Saturated-group indices are on the
    RingSolution returned by ring_blocking.  Classification of a pair
    requires its two-center solution (the absorption conditions involve
    the pair's boundary masses), so this is as expensive as solving.
    """
    case, _, _ = _analyze(ring, eps, tol_quad)
    return case


def ring_blocking(ring: RingParams, *, eps: float = EPS_REGIME,
                  tol_quad: float = analytic.TOL_QUAD) -> RingSolution:
    """Per-node asymptotic loss probabilities for a supported ring.

    Saturated singletons lose (1-2p)(1 - mu*c/lambda); a saturated pair
    (j0, j0+1) is solved as a two-center system, giving
    beta_j0 = P01*(1-2p_j0) + p_j0*pi00 and symmetrically for j0+1.
    Raises UnsupportedTopology when the congestion pattern is out of
    scope (three contiguous saturated nodes, overflowing spill targets).
    """
    case, groups, beta = _analyze(ring, eps, tol_quad)
    if case == "unsupported":
        raise UnsupportedTopology(
            "congestion pattern not covered: saturated groups must be "
            "isolated singletons or adjacent pairs whose neighbours absorb the spill")
    return RingSolution(case=case, beta=beta, groups=groups)
