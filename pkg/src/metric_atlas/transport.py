"""Geometry-aware metrics: discrepancy, Kolmogorov, Levy, Prokhorov,
Wasserstein, plus the ball-growth modulus used to bound discrepancy by
Prokhorov.

Exact algorithms throughout: discrepancy enumerates the finitely many closed
balls, Prokhorov runs a coupling max-flow over the distinct distances
(Strassen's equivalence), Wasserstein solves the transportation problem by
successive shortest paths and returns the optimal coupling as a witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .spaces import (Coupling, DiscreteDistribution, FiniteMetricSpace,
                     RealAtomicDistribution, SmoothRealCdf, _frozen)

_FLOW_EPS = 1e-12


def _check_same_space(mu, nu):
    if mu.space is not nu.space and not mu.space.same_as(nu.space):
        raise ValueError("distributions live on different spaces")


# ---------------------------------------------------------------------------
# Discrepancy
# ---------------------------------------------------------------------------

def discrepancy_finite(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """Largest |mu(B) - nu(B)| over closed balls, exactly.

    Balls only change at radii taken from the distance multiset, so scanning
    the cumulative mass difference in distance order from every center covers
    them all.
    """
    _check_same_space(mu, nu)
    d = mu.space.d
    n = mu.space.n
    delta = mu.p - nu.p
    best = 0.0
    for c in range(n):
        order = np.argsort(d[c], kind="stable")
        dist_sorted = d[c][order]
        csum = np.cumsum(delta[order])
        # last index of each tie group = a complete ball
        ends = np.nonzero(np.diff(dist_sorted) > 0)[0]
        idx = np.concatenate([ends, [n - 1]])
        best = max(best, float(np.max(np.abs(csum[idx]))))
    return best


def discrepancy_real_mixed(mu: RealAtomicDistribution, nu: SmoothRealCdf) -> float:
    """sup over closed intervals of |mu([a,b]) - nu([a,b])| for atomic mu
    against an atomless nu.

    Optimal intervals either close on atoms (mu-heavy) or open just inside
    them (nu-heavy, attained as a supremum); both cases reduce to a running
    max of A_j - B_i over prefixes.
    """
    if nu.eval_tolerance > 1e-9:
        raise ValueError("cdf oracle tolerance exceeds the 1e-9 budget")
    a, b = nu.support
    xs = mu.positions
    if xs[0] < a or xs[-1] > b:
        raise ValueError("truncation interval does not cover the atoms")

    pts = np.concatenate([[xs[0] - 1.0], xs, [xs[-1] + 1.0]])
    cums = np.cumsum(mu.weights)
    w_incl = np.concatenate([[0.0], cums, [cums[-1]]])   # mass <= pts[j]
    w_excl = np.concatenate([[0.0], w_incl[:-1]])        # mass <  pts[j]
    g = np.array([nu(float(x)) for x in pts])

    best = 0.0
    run_closed = -math.inf   # max of g[i] - w_excl[i] over i <= j
    run_open = -math.inf     # max of w_incl[i] - g[i] over i <  j
    for j in range(pts.size):
        run_closed = max(run_closed, g[j] - w_excl[j])
        best = max(best, (w_incl[j] - g[j]) + run_closed)
        if j > 0:
            best = max(best, (g[j] - w_excl[j]) + run_open)
        run_open = max(run_open, w_incl[j] - g[j])
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# Kolmogorov and Levy on the line
# ---------------------------------------------------------------------------

def kolmogorov(F, G) -> float:
    """sup_x |F(x) - G(x)| for atomic/atomic or atomic/smooth inputs.

    Step CDFs are compared at the merged atom positions; against a smooth
    CDF both one-sided values at each atom are needed.
    """
    if isinstance(F, RealAtomicDistribution) and isinstance(G, RealAtomicDistribution):
        grid = np.union1d(F.positions, G.positions)
        return max(abs(F.cdf(float(x)) - G.cdf(float(x))) for x in grid)
    if isinstance(F, SmoothRealCdf) and isinstance(G, RealAtomicDistribution):
        F, G = G, F
    if isinstance(F, RealAtomicDistribution) and isinstance(G, SmoothRealCdf):
        best = 0.0
        for x in F.positions.tolist():
            gx = G(x)
            best = max(best, abs(F.cdf(x) - gx), abs(F.cdf_left(x) - gx))
        return best
    raise TypeError("kolmogorov: use smooth_pair_kolmogorov for two smooth CDFs")


def _levy_feasible(F: RealAtomicDistribution, G, eps: float) -> bool:
    """Exact Levy feasibility for step F against step or continuous G.

    Both conditions are piecewise constant (step G) or piecewise monotone
    (continuous G) between the jump points of either side, so checking every
    piece start suffices. Pieces contributed by G's atoms are evaluated with
    G's jump taken exactly, not through the x +- eps float round trip.
    """
    if isinstance(G, RealAtomicDistribution):
        # F(x) <= G(x+eps) + eps at x = u_i and x = v_j - eps
        for u in F.positions.tolist():
            if F.cdf(u) > G.cdf(u + eps) + eps + 1e-15:
                return False
        for v in G.positions.tolist():
            if F.cdf(v - eps) > G.cdf(v) + eps + 1e-15:
                return False
        # G(x-eps) - eps <= F(x) at x = u_i and x = v_j + eps
        for u in F.positions.tolist():
            if G.cdf(u - eps) - eps > F.cdf(u) + 1e-15:
                return False
        for v in G.positions.tolist():
            if G.cdf(v) - eps > F.cdf(v + eps) + 1e-15:
                return False
        return True
    for x in F.positions.tolist():
        if F.cdf(x) > G(x + eps) + eps + 1e-15:
            return False
        if G(x - eps) - eps > F.cdf_left(x) + 1e-15:
            return False
    return True


def levy(F, G) -> float:
    """Levy distance by bisection (absolute tolerance 1e-12) over an exact
    feasibility predicate. Accepts two atomic CDFs, or one atomic and one
    smooth (the metric is symmetric, so argument order is normalized)."""
    if isinstance(F, SmoothRealCdf) and isinstance(G, RealAtomicDistribution):
        F, G = G, F
    if not isinstance(F, RealAtomicDistribution):
        raise TypeError("levy: use smooth_pair_levy for two smooth CDFs")
    if _levy_feasible(F, G, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2.0
        if _levy_feasible(F, G, mid):
            hi = mid
        else:
            lo = mid
    return hi


def smooth_pair_kolmogorov(F: SmoothRealCdf, G: SmoothRealCdf,
                           mesh: float = 1e-4) -> tuple[float, float]:
    """Grid estimate of sup|F-G| with a certified error bound."""
    lo = min(F.support[0], G.support[0])
    hi = max(F.support[1], G.support[1])
    grid = np.arange(lo, hi + mesh, mesh)
    value = max(abs(F(float(x)) - G(float(x))) for x in grid)
    err = (F.density_bound + G.density_bound) * mesh + F.eval_tolerance + G.eval_tolerance
    return value, err


def smooth_pair_levy(F: SmoothRealCdf, G: SmoothRealCdf,
                     mesh: float = 1e-4) -> tuple[float, float]:
    """Grid-checked Levy distance with a certified error bound."""
    lo_x = min(F.support[0], G.support[0])
    hi_x = max(F.support[1], G.support[1])
    grid = np.arange(lo_x, hi_x + mesh, mesh)
    fvals = np.array([F(float(x)) for x in grid])

    def feasible(eps: float) -> bool:
        for x, fx in zip(grid.tolist(), fvals.tolist()):
            if fx > G(x + eps) + eps + 1e-15:
                return False
            if G(x - eps) - eps > fx + 1e-15:
                return False
        return True

    if feasible(0.0):
        return 0.0, (F.density_bound + G.density_bound) * mesh \
            + F.eval_tolerance + G.eval_tolerance
    lo, hi = 0.0, 1.0
    while hi - lo > mesh / 4.0:
        mid = (lo + hi) / 2.0
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    err = (F.density_bound + G.density_bound) * mesh \
        + F.eval_tolerance + G.eval_tolerance + mesh / 4.0
    return hi, err


# ---------------------------------------------------------------------------
# Prokhorov via coupling max-flow
# ---------------------------------------------------------------------------

def _max_flow(cap: list[list[float]], s: int, t: int) -> float:
    """Highest-label push-relabel on a dense capacity matrix.

    Residual capacities below _FLOW_EPS count as saturated. The operation
    cap is defensive only; the algorithm terminates for these instances.
    """
    n = len(cap)
    res = [row[:] for row in cap]
    height = [0] * n
    excess = [0.0] * n
    height[s] = n
    for v in range(n):
        c = res[s][v]
        if v != s and c > _FLOW_EPS:
            res[s][v] = 0.0
            res[v][s] += c
            excess[v] += c
            excess[s] -= c

    limit = 64 * n * n * n + 10_000
    ops = 0
    active = sorted((v for v in range(n) if v not in (s, t) and excess[v] > _FLOW_EPS),
                    key=lambda v: height[v])
    while active:
        ops += 1
        if ops > limit:
            raise RuntimeError("max-flow failed to converge")
        v = active.pop()  # highest label last after sort; maintained below
        pushed = False
        for u in range(n):
            if res[v][u] > _FLOW_EPS and height[v] == height[u] + 1:
                amt = min(excess[v], res[v][u])
                res[v][u] -= amt
                res[u][v] += amt
                excess[v] -= amt
                excess[u] += amt
                if u not in (s, t) and excess[u] > _FLOW_EPS and u not in active:
                    active.append(u)
                if excess[v] <= _FLOW_EPS:
                    pushed = True
                    break
        if not pushed and excess[v] > _FLOW_EPS:
            min_h = min((height[u] for u in range(n) if res[v][u] > _FLOW_EPS),
                        default=None)
            if min_h is None:
                excess[v] = 0.0  # stranded excess cannot reach the sink
            else:
                height[v] = min_h + 1
                active.append(v)
        active.sort(key=lambda w: height[w])
    return excess[t]


def _coupled_mass_within(mu: DiscreteDistribution, nu: DiscreteDistribution,
                         delta: float) -> float:
    """Largest joint mass a coupling can place on pairs with d <= delta."""
    n = mu.space.n
    d = mu.space.d
    size = 2 * n + 2
    s, t = 2 * n, 2 * n + 1
    cap = [[0.0] * size for _ in range(size)]
    for i in range(n):
        cap[s][i] = float(mu.p[i])
        cap[n + i][t] = float(nu.p[i])
    for i in range(n):
        row = cap[i]
        di = d[i]
        for j in range(n):
            if di[j] <= delta:
                row[n + j] = 2.0
    return _max_flow(cap, s, t)


def prokhorov(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """Prokhorov distance, exactly, via Strassen's coupling equivalence.

    u(delta) = 1 - (max coupled mass within delta) is the worst slack
    max_B [mu(B) - nu(B^delta)]; it is non-increasing and piecewise constant
    on the distinct distances d_1 < ... < d_K. Interval k contains a feasible
    eps iff u(d_k) < d_{k+1}, validity is monotone in k, and the first valid
    interval yields the infimum max(d_k, u(d_k)).
    """
    _check_same_space(mu, nu)
    if mu.space.n == 1:
        return 0.0
    deltas = np.concatenate(([0.0], mu.space.distinct_distances))
    K = deltas.size - 1

    cache: dict[int, float] = {}

    def u(k: int) -> float:
        if k not in cache:
            cache[k] = max(0.0, 1.0 - _coupled_mass_within(mu, nu, float(deltas[k])))
        return cache[k]

    def valid(k: int) -> bool:
        nxt = float(deltas[k + 1]) if k < K else math.inf
        return u(k) < nxt

    lo, hi = 0, K  # valid(K) always holds: everything couples at the diameter
    while lo < hi:
        mid = (lo + hi) // 2
        if valid(mid):
            hi = mid
        else:
            lo = mid + 1
    return max(float(deltas[lo]), u(lo))


# ---------------------------------------------------------------------------
# Wasserstein
# ---------------------------------------------------------------------------

def _min_cost_transport(cost: np.ndarray, supply: np.ndarray,
                        demand: np.ndarray) -> np.ndarray:
    """Successive shortest paths with potentials on the bipartite
    transportation graph; exact optimum for non-negative costs."""
    n, m = cost.shape
    flow = np.zeros((n, m))
    rem_s = supply.astype(float).copy()
    rem_d = demand.astype(float).copy()
    pot = np.zeros(n + m)
    total = n + m

    for _ in range(16 * (n + m) + 100):
        sources = np.nonzero(rem_s > _FLOW_EPS)[0]
        if sources.size == 0:
            break
        dist = np.full(total, math.inf)
        parent = np.full(total, -1, dtype=int)
        heap = []
        for i in sources:
            dist[i] = 0.0
            heappush(heap, (0.0, int(i)))
        while heap:
            du, v = heappop(heap)
            if du > dist[v] + 1e-15:
                continue
            if v < n:
                for j in range(m):
                    rc = cost[v, j] + pot[v] - pot[n + j]
                    if rc < 0.0:
                        rc = 0.0
                    nd = du + rc
                    if nd < dist[n + j] - 1e-15:
                        dist[n + j] = nd
                        parent[n + j] = v
                        heappush(heap, (nd, n + j))
            else:
                j = v - n
                for i in range(n):
                    if flow[i, j] > _FLOW_EPS:
                        rc = -cost[i, j] + pot[v] - pot[i]
                        if rc < 0.0:
                            rc = 0.0
                        nd = du + rc
                        if nd < dist[i] - 1e-15:
                            dist[i] = nd
                            parent[i] = v
                            heappush(heap, (nd, i))
        targets = np.nonzero(rem_d > _FLOW_EPS)[0]
        j_star = int(targets[np.argmin(dist[n + targets])])
        if math.isinf(dist[n + j_star]):
            raise RuntimeError("transportation network is disconnected")

        # bottleneck along the augmenting path
        path = []
        v = n + j_star
        while parent[v] != -1:
            path.append((parent[v], v))
            v = parent[v]
        amt = min(rem_s[v], rem_d[j_star])
        for a, b in path:
            if a >= n:  # residual arc: capacity is the flow it undoes
                amt = min(amt, flow[b, a - n])
        for a, b in path:
            if a < n:
                flow[a, b - n] += amt
            else:
                flow[b, a - n] -= amt
        rem_s[v] -= amt
        rem_d[j_star] -= amt
        finite = np.isfinite(dist)
        pot[finite] += dist[finite]
    else:
        raise RuntimeError("transportation solver failed to converge")

    return flow


def wasserstein_finite(mu: DiscreteDistribution,
                       nu: DiscreteDistribution) -> tuple[float, Coupling]:
    """Optimal transportation cost under the space's metric, with the
    optimal coupling as a witness; the value is the coupling's exact cost."""
    _check_same_space(mu, nu)
    J = _min_cost_transport(mu.space.d, mu.p, nu.p)
    J = np.maximum(J, 0.0)
    coupling = Coupling(J, mu, nu)
    return coupling.expected_cost(mu.space.d), coupling


def wasserstein_real(F: RealAtomicDistribution, G: RealAtomicDistribution) -> float:
    """Integral of |F - G| over the merged breakpoint grid, exactly."""
    grid = np.union1d(F.positions, G.positions)
    diffs = [abs(F.cdf(float(x)) - G.cdf(float(x))) * float(w)
             for x, w in zip(grid[:-1], np.diff(grid))]
    return math.fsum(diffs)


# ---------------------------------------------------------------------------
# Ball-growth modulus (for the discrepancy-vs-Prokhorov bound)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BallGrowthModulus:
    """Right-continuous step function eps -> max_B nu(B^eps) - nu(B), the
    maximum taken over closed balls and complements of closed balls."""

    breakpoints: np.ndarray  # sorted, starting at 0
    values: np.ndarray       # non-decreasing, values[0] = 0

    def __post_init__(self):
        if np.any(np.diff(self.values) < -1e-15):
            raise ValueError("ball-growth modulus must be non-decreasing")
        object.__setattr__(self, "breakpoints", _frozen(self.breakpoints))
        object.__setattr__(self, "values", _frozen(self.values))

    def at(self, eps: float) -> float:
        if eps < 0:
            raise ValueError("eps must be non-negative")
        k = int(np.searchsorted(self.breakpoints, eps, side="right")) - 1
        return float(self.values[max(k, 0)])


def _ball_family(space: FiniteMetricSpace) -> np.ndarray:
    """Boolean matrix whose rows are all closed balls and their complements."""
    radii = np.concatenate(([0.0], space.distinct_distances))
    balls = (space.d[:, None, :] <= radii[None, :, None]).reshape(-1, space.n)
    fam = np.concatenate([balls, ~balls])
    return np.unique(fam, axis=0)


def ball_growth_at(nu: DiscreteDistribution, eps: float,
                   family: np.ndarray | None = None) -> float:
    """max over balls and ball complements of nu(B^eps) - nu(B)."""
    space = nu.space
    if family is None:
        family = _ball_family(space)
    famf = family.astype(float)
    within = (space.d <= eps).astype(float)
    fattened = (famf @ within) > 0.0
    growth = fattened.astype(float) @ nu.p - famf @ nu.p
    return max(0.0, float(np.max(growth)))


def tightest_ball_growth(nu: DiscreteDistribution) -> BallGrowthModulus:
    """The smallest modulus satisfying nu(B^eps) <= nu(B) + phi(eps) for all
    balls B and complements of balls, evaluated at every distance."""
    space = nu.space
    family = _ball_family(space)
    breakpoints = np.concatenate(([0.0], space.distinct_distances))
    values = np.array([ball_growth_at(nu, float(e), family) for e in breakpoints])
    values = np.maximum.accumulate(values)  # guard fp wiggle; true phi is monotone
    return BallGrowthModulus(breakpoints, values)
