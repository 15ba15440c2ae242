"""Random-walk convergence experiments with exact distribution evolution:
the doubling walk on Z_p, the coordinate-refresh product walk via closed
forms, and the standardized Binomial against the normal limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import transport as tp
from .divergences import tv_kernel
from .spaces import (DiscreteDistribution, FiniteMetricSpace,
                     RealAtomicDistribution, gaussian_cdf)


# ---------------------------------------------------------------------------
# Doubling walk on Z_p:  X_k = 2 X_{k-1} + e_k (mod p), e uniform on {-1,0,1}
# ---------------------------------------------------------------------------

class CdgWalk:
    """Exact pushforward evolution of the doubling-with-noise walk.

    The distribution vector is evolved deterministically (no sampling);
    uniform is stationary. `p` must be odd so that 2 is invertible and the
    closed balls of the cycle metric are exactly the odd-length arcs.
    """

    def __init__(self, p: int):
        if p < 3 or p % 2 == 0:
            raise ValueError("modulus must be odd and >= 3")
        self.p = p
        self.step_count = 0
        self.dist = np.zeros(p)
        self.dist[0] = 1.0
        inv_two = pow(2, -1, p)
        self.inv_two = inv_two
        y = np.arange(p)
        self._idx = [((y - shift) * inv_two) % p for shift in (0, 1, -1)]

    @classmethod
    def mersenne(cls, t: int) -> "CdgWalk":
        """Walk on p = 2^t - 1."""
        return cls(2 ** t - 1)

    def step(self) -> "CdgWalk":
        d = self.dist
        self.dist = (d[self._idx[0]] + d[self._idx[1]] + d[self._idx[2]]) / 3.0
        self.step_count += 1
        return self

    def distances(self) -> dict[str, float]:
        """Total variation and discrepancy to the uniform distribution."""
        return {"tv": tv_kernel(self.dist, np.full(self.p, 1.0 / self.p)),
                "disc": cdg_discrepancy(self.dist)}


def cdg_discrepancy(dist: np.ndarray) -> float:
    """Discrepancy to uniform over the closed balls of the p-cycle in O(p).

    Balls are the odd-length arcs (plus the whole space). With Z the prefix
    sums of dist - 1/p, an arc from a of odd length L has excess
    Z[(a+L) mod p] - Z[a]; for p odd, "L odd" splits by endpoint parity
    (opposite parity without wraparound, equal parity with), so tracking
    prefix and suffix extrema of Z per parity covers every arc.
    """
    p = dist.shape[0]
    if p % 2 == 0:
        raise ValueError("cycle length must be odd")
    z = np.concatenate([[0.0], np.cumsum(dist - 1.0 / p)])[:p]

    even = np.arange(p) % 2 == 0
    neg, pos = -math.inf, math.inf
    z_even_hi = np.where(even, z, neg)
    z_even_lo = np.where(even, z, pos)
    z_odd_hi = np.where(~even, z, neg)
    z_odd_lo = np.where(~even, z, pos)

    pre_hi = {0: np.maximum.accumulate(z_even_hi), 1: np.maximum.accumulate(z_odd_hi)}
    pre_lo = {0: np.minimum.accumulate(z_even_lo), 1: np.minimum.accumulate(z_odd_lo)}
    suf_hi = {0: np.maximum.accumulate(z_even_hi[::-1])[::-1],
              1: np.maximum.accumulate(z_odd_hi[::-1])[::-1]}
    suf_lo = {0: np.minimum.accumulate(z_even_lo[::-1])[::-1],
              1: np.minimum.accumulate(z_odd_lo[::-1])[::-1]}

    best = 0.0
    for e in range(p):
        ze = z[e]
        par = e % 2
        if e > 0:  # starts a < e, opposite parity
            best = max(best, ze - pre_lo[1 - par][e - 1], pre_hi[1 - par][e - 1] - ze)
        if e < p - 1:  # starts a > e, same parity (wrapped arcs)
            best = max(best, ze - suf_lo[par][e + 1], suf_hi[par][e + 1] - ze)
    return best


def cdg_trace(p: int, steps: int) -> list[dict[str, float]]:
    """Rows (step, tv, disc) for steps 1..steps from the point mass at 0."""
    walk = CdgWalk(p)
    rows = []
    for _ in range(steps):
        walk.step()
        d = walk.distances()
        rows.append({"step": walk.step_count, "tv": d["tv"], "disc": d["disc"]})
    return rows


# ---------------------------------------------------------------------------
# Continuous-time coordinate-refresh walk on G^n
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductWalkParams:
    """n coordinates over a g-element group, observed at continuous time t;
    each coordinate refreshes to uniform at rate 1/n."""

    n: int
    g: int
    t: float

    def __post_init__(self):
        if self.n < 1 or self.g < 2:
            raise ValueError("need n >= 1 coordinates over a group of size >= 2")
        if self.t < 0:
            raise ValueError("time must be non-negative")

    @property
    def s(self) -> float:
        """Per-coordinate exposure t/n."""
        return self.t / self.n

    @classmethod
    def doubling_group(cls, n: int, t: float) -> "ProductWalkParams":
        return cls(n, 2 ** n, t)


def product_walk_distances(params: ProductWalkParams) -> dict[str, float]:
    """Distances to uniform at time t, via per-coordinate closed forms.

    With s = t/n, q0 = e^-s + (1-e^-s)/g and q1 = (1-e^-s)/g, the product
    structure gives entropy by additivity, chi-squared and Hellinger by their
    product identities, separation from the minimum density ratio, and total
    variation as a sum over the number of still-at-start coordinates, carried
    in log space so g as large as 2^64 stays finite.
    """
    n, g = params.n, params.g
    s = params.s
    u = math.exp(-s)                    # P(coordinate never refreshed)
    log_gq0 = math.log1p((g - 1.0) * u)  # log of g*q0
    log_gq1 = math.log1p(-u) if u < 1.0 else -math.inf  # log of g*q1
    q0 = u + (1.0 - u) / g
    rest = (g - 1.0) * (1.0 - u) / g    # total mass on refreshed values

    entropy = max(0.0, n * (q0 * log_gq0 + (rest * log_gq1 if rest > 0.0 else 0.0)))

    log1p_chi2_coord = math.log1p((g - 1.0) * u * u)
    chi2 = math.inf if n * log1p_chi2_coord > 700.0 else math.expm1(n * log1p_chi2_coord)

    affinity = (math.sqrt(q0) + (g - 1.0) * math.sqrt((1.0 - u) / g)) / math.sqrt(g)
    hellinger = math.sqrt(max(0.0, -2.0 * math.expm1(n * math.log(affinity))))

    separation = -math.expm1(n * log_gq1) if u < 1.0 else 1.0

    log_base = math.log(g - 1.0)
    terms = []
    for k in range(n + 1):
        log_count = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                     + (n - k) * log_base - n * math.log(g))
        log_ratio = k * log_gq0  # log of mu(x)/unif(x)
        if n - k:
            log_ratio += (n - k) * log_gq1
        if log_ratio == -math.inf:
            terms.append(math.exp(log_count))
        elif log_ratio <= 1.0:  # |R - 1| via expm1; safe on both sides of 0
            terms.append(math.exp(log_count) * abs(math.expm1(log_ratio)))
        else:
            terms.append(math.exp(
                log_count + log_ratio + math.log1p(-math.exp(-log_ratio))))
    tv = 0.5 * math.fsum(terms)

    return {"tv": tv, "entropy": entropy, "chi2": chi2,
            "hellinger": hellinger, "separation": separation}


def crossing_time(params_at, threshold: float = 0.25,
                  t_start: float = 1e-3, t_cap: float = 1e9) -> float:
    """First time a decreasing distance curve drops to the threshold:
    geometric sweep at 1% resolution, then bisection."""
    if params_at(0.0) <= threshold:
        return 0.0
    t = t_start
    while params_at(t) > threshold:
        t *= 1.01
        if t > t_cap:
            raise RuntimeError("no crossing below the time cap")
    lo, hi = t / 1.01, t
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if params_at(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def product_walk_crossing_times(n: int, g: int,
                                threshold: float = 0.25) -> dict[str, float]:
    out = {}
    for key in ("tv", "entropy", "chi2"):
        out[key] = crossing_time(
            lambda t, k=key: product_walk_distances(ProductWalkParams(n, g, t))[k],
            threshold)
    return out


def product_walk_trace(n: int, g: int, times) -> list[dict[str, float]]:
    rows = []
    for t in times:
        d = product_walk_distances(ProductWalkParams(n, g, float(t)))
        rows.append({"time": float(t), **d})
    return rows


# ---------------------------------------------------------------------------
# Standardized Binomial against the normal limit
# ---------------------------------------------------------------------------

def standardized_binomial(n: int) -> RealAtomicDistribution:
    """Binomial(n, 1/2) standardized to mean 0 and variance 1; weights via
    log-gamma, renormalized by their exact float sum."""
    if n < 1:
        raise ValueError("need at least one trial")
    k = np.arange(n + 1)
    logw = (math.lgamma(n + 1) - np.array([math.lgamma(i + 1) for i in k])
            - np.array([math.lgamma(n - i + 1) for i in k]) - n * math.log(2.0))
    w = np.exp(logw)
    w = w / math.fsum(w.tolist())
    x = (2.0 * k - n) / math.sqrt(n)
    return RealAtomicDistribution(x, w)


def binomial_normal_demo(n: int) -> dict[str, float]:
    """TV and discrepancy between the standardized Binomial(n, 1/2) and the
    standard normal. TV is 1 exactly (atomic against atomless); the
    discrepancy is the exact interval scan."""
    mu = standardized_binomial(n)
    halfwidth = max(9.0, math.sqrt(n) + 2.0)
    nu = gaussian_cdf(0.0, 1.0, halfwidth)
    return {"tv": 1.0, "disc": tp.discrepancy_real_mixed(mu, nu)}


# ---------------------------------------------------------------------------
# Two-point escape-to-distance example
# ---------------------------------------------------------------------------

def dudley_instance(n: float):
    """Distributions ((n-1) delta_0 + delta_n)/n and delta_0 on the two-point
    space {0, n}: Prokhorov-close yet at Wasserstein distance one."""
    if n < 2:
        raise ValueError("need n >= 2")
    space = FiniteMetricSpace.from_matrix([[0.0, float(n)], [float(n), 0.0]],
                                          labels=("0", str(n)))
    p_n = DiscreteDistribution(space, np.array([(n - 1.0) / n, 1.0 / n]))
    target = DiscreteDistribution(space, np.array([1.0, 0.0]))
    return space, p_n, target


def z10_measures():
    """The two measures on Z_10 with equal total variation to uniform but
    different relative entropies, plus the uniform reference."""
    space = FiniteMetricSpace.cycle(10)
    mu = DiscreteDistribution(space, np.array([0.6, 0.1, 0.1, 0.1, 0.1,
                                               0.0, 0.0, 0.0, 0.0, 0.0]))
    nu = DiscreteDistribution(space, np.array([0.2, 0.2, 0.2, 0.2, 0.2,
                                               0.0, 0.0, 0.0, 0.0, 0.0]))
    return space, mu, nu, DiscreteDistribution.uniform(space)
