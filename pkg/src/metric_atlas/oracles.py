"""Independent brute-force computations used to validate the production
algorithms. Deliberately slower and structured differently; none of these
share code with the implementations they check.
"""

from __future__ import annotations

import math

import numpy as np

from .spaces import (DiscreteDistribution, RealAtomicDistribution,
                     SmoothRealCdf)


def _subset_masks(n: int) -> np.ndarray:
    """All 2^n subsets as a (2^n, n) boolean matrix."""
    ids = np.arange(2 ** n, dtype=np.uint32)
    return (ids[:, None] >> np.arange(n)[None, :]) & 1 > 0


def tv_subset_oracle(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """sup_A |mu(A) - nu(A)|, via the positive-part identity."""
    if mu.space.n > 20:
        raise ValueError("tv_subset_oracle: n > 20")
    return math.fsum(np.maximum(mu.p - nu.p, 0.0).tolist())


def tv_exhaustive(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """Literal maximum over all 2^n subsets."""
    n = mu.space.n
    if n > 12:
        raise ValueError("tv_exhaustive: n > 12")
    masks = _subset_masks(n).astype(float)
    return float(np.max(np.abs(masks @ (mu.p - nu.p))))


def prokhorov_exhaustive(mu: DiscreteDistribution, nu: DiscreteDistribution,
                         check_symmetry: bool = False) -> float:
    """Smallest eps with mu(B) <= nu(B^eps) + eps for every subset B.

    Enumerates all subsets. The slack max_B [mu(B) - nu(B^eps)] is piecewise
    constant in eps between distances, so the infimum lies in the candidate
    set {distances} U {achieved slacks}; the smallest feasible candidate wins.
    """
    n = mu.space.n
    if n > 12:
        raise ValueError("prokhorov_exhaustive: n > 12")
    if n == 1:
        return 0.0

    d = mu.space.d
    masks = _subset_masks(n)
    maskf = masks.astype(float)
    deltas = np.concatenate(([0.0], mu.space.distinct_distances))

    def worst_slack(eps: float, p: np.ndarray, q: np.ndarray) -> float:
        within = (d <= eps).astype(float)
        fattened = (maskf @ within) > 0.0
        return float(np.max(maskf @ p - fattened.astype(float) @ q))

    def smallest_feasible(p: np.ndarray, q: np.ndarray) -> float:
        candidates = set(deltas.tolist())
        for eps in deltas:
            candidates.add(max(0.0, worst_slack(float(eps), p, q)))
        feasible = [c for c in sorted(candidates)
                    if worst_slack(c, p, q) <= c + 1e-15]
        return feasible[0]

    value = smallest_feasible(mu.p, nu.p)
    if check_symmetry:
        swapped = smallest_feasible(nu.p, mu.p)
        if abs(value - swapped) > 1e-9:
            raise AssertionError(
                f"prokhorov oracle asymmetry: {value} vs {swapped}")
    return value


def levy_grid_oracle(F: RealAtomicDistribution, G: RealAtomicDistribution,
                     mesh: float = 1e-4) -> tuple[float, float]:
    """Bracket [lo, hi] around the Levy distance, hi - lo <= mesh.

    Feasibility of each eps is decided exactly: the two step-function
    conditions are piecewise constant between the discontinuities of both
    sides, so checking the discontinuity points, midpoints between them, and
    one point beyond each end covers every piece.
    """
    xs_f, xs_g = F.positions, G.positions

    def feasible(eps: float) -> bool:
        breaks = np.unique(np.concatenate(
            [xs_f, xs_g - eps, xs_g + eps]))
        mids = (breaks[:-1] + breaks[1:]) / 2.0
        pts = np.concatenate([breaks, mids,
                              [breaks[0] - 1.0, breaks[-1] + 1.0]])
        for x in pts.tolist():
            fx = F.cdf(x)
            if fx > G.cdf(x + eps) + eps + 1e-15:
                return False
            if G.cdf(x - eps) - eps > fx + 1e-15:
                return False
        return True

    k = 0
    while not feasible(k * mesh):
        k += 1
        if k * mesh > 1.0 + mesh:
            raise AssertionError("levy oracle: no feasible eps below 1")
    return max(0.0, (k - 1) * mesh), k * mesh


def cdg_disc_window_oracle(dist: np.ndarray) -> float:
    """Discrepancy to uniform on the p-cycle by scanning every odd window.

    Closed balls on an odd cycle are the odd-length circular arcs plus the
    whole space; this enumerates them all via a doubled cumulative array.
    """
    p = dist.shape[0]
    if p > 4096:
        raise ValueError("cdg_disc_window_oracle: p > 4096")
    doubled = np.concatenate([dist, dist])
    csum = np.concatenate([[0.0], np.cumsum(doubled)])
    best = 0.0
    for length in range(1, p + 1, 2):
        sums = csum[length:length + p] - csum[:p]
        best = max(best, float(np.max(np.abs(sums - length / p))))
    return best


def mixed_discrepancy_scan_oracle(F: RealAtomicDistribution,
                                  G: SmoothRealCdf) -> float:
    """sup over closed intervals of |F-mass - G-mass|, by full candidate scan.

    Enumerates every pair of candidate endpoints (atom positions plus
    sentinels beyond the atoms) in both the closed-at-atoms and
    open-at-atoms configurations.
    """
    xs = F.positions
    pts = np.concatenate([[xs[0] - 1.0], xs, [xs[-1] + 1.0]])
    cums = np.cumsum(F.weights)
    w_incl = np.concatenate([[0.0], cums, [cums[-1]]])  # F-mass <= pts[j]
    w_excl = np.concatenate([[0.0], w_incl[:-1]])       # F-mass <  pts[j]
    g = np.array([G(float(x)) for x in pts])

    m = pts.size
    upper = np.triu(np.ones((m, m), dtype=bool))
    closed = np.abs((w_incl[None, :] - w_excl[:, None]) - (g[None, :] - g[:, None]))
    strict = np.triu(upper, k=1)
    open_ = np.abs((w_excl[None, :] - w_incl[:, None]) - (g[None, :] - g[:, None]))
    return max(float(np.max(closed[upper])), float(np.max(open_[strict])), 0.0)


def product_walk_direct(n: int, g: int, t: float) -> dict[str, float]:
    """Distances to uniform for the coordinate-refresh walk, computed on the
    full g^n-point product space (small cases only)."""
    from .divergences import (chi_squared_kernel, hellinger_kernel,
                              relative_entropy_kernel, separation_kernel,
                              tv_kernel)

    if g ** n > 2 ** 20:
        raise ValueError("product_walk_direct: state space too large")
    s = t / n
    stay = math.exp(-s)
    coord = np.full(g, (1.0 - stay) / g)
    coord[0] += stay
    dist = np.array([1.0])
    for _ in range(n):
        dist = np.kron(dist, coord)
    unif = np.full(g ** n, 1.0 / g ** n)
    return {
        "tv": tv_kernel(dist, unif),
        "entropy": relative_entropy_kernel(dist, unif),
        "chi2": chi_squared_kernel(dist, unif),
        "hellinger": hellinger_kernel(dist, unif),
        "separation": separation_kernel(dist, unif),
    }
