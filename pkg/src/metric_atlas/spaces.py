"""Domain types: finite metric spaces, distributions, couplings, real-line CDFs.

Everything here is immutable after construction (arrays are frozen), so
instances can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

MASS_TOL = 1e-12        # absolute tolerance on total probability mass
MARGINAL_TOL = 1e-10    # coupling marginal deviation tolerance
TRIANGLE_TOL = 1e-12    # slack for float-valued metrics (euclidean, shortest-path closures)
TRIANGLE_CHECK_LIMIT = 512  # the O(n^3) triangle validation is only run up to this size

PRODUCT_SIZE_LIMIT = 10**6


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite point set with a full distance matrix.

    Invariants checked at construction: zero diagonal, symmetry, strictly
    positive off-diagonal entries, and the triangle inequality (within
    TRIANGLE_TOL, since euclidean / shortest-path matrices carry rounding).
    """

    d: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("space.d: must be a square matrix")
        n = d.shape[0]
        if n < 1:
            raise ValueError("space.d: empty matrix")
        if np.any(np.diag(d) != 0.0):
            raise ValueError("space.d: nonzero diagonal entry")
        if not np.array_equal(d, d.T):
            raise ValueError("space.d: not symmetric")
        off = d[~np.eye(n, dtype=bool)]
        if off.size and np.any(off <= 0.0):
            raise ValueError("space.d: off-diagonal distance must be positive")
        if np.any(~np.isfinite(d)):
            raise ValueError("space.d: non-finite entry")
        if n <= TRIANGLE_CHECK_LIMIT:
            for j in range(n):
                viol = d > d[:, [j]] + d[[j], :] + TRIANGLE_TOL * (1.0 + d)
                if viol.any():
                    i, k = np.argwhere(viol)[0]
                    raise ValueError(
                        f"space.d: triangle inequality fails at ({i},{j},{k})")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("space.labels: length mismatch")
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @cached_property
    def diam(self) -> float:
        return float(self.d.max())

    @cached_property
    def d_min(self) -> float:
        """Smallest distance between distinct points (+inf on a single point)."""
        n = self.n
        if n == 1:
            return math.inf
        return float(self.d[~np.eye(n, dtype=bool)].min())

    @cached_property
    def distinct_distances(self) -> np.ndarray:
        """Sorted distinct off-diagonal distances (0 excluded)."""
        n = self.n
        vals = np.unique(self.d[~np.eye(n, dtype=bool)]) if n > 1 else np.empty(0)
        return _frozen(vals)

    def ball(self, center: int, radius: float) -> frozenset[int]:
        """Closed ball {y : d(center, y) <= radius}."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        return frozenset(np.nonzero(self.d[center] <= radius)[0].tolist())

    def fatten(self, points, eps: float) -> frozenset[int]:
        """eps-fattening {x : min_{y in points} d(x, y) <= eps}."""
        if eps < 0:
            raise ValueError("eps must be non-negative")
        idx = sorted(points)
        if not idx:
            return frozenset()
        near = (self.d[idx, :] <= eps).any(axis=0)
        return frozenset(np.nonzero(near)[0].tolist())

    @classmethod
    def from_matrix(cls, d, labels=None) -> "FiniteMetricSpace":
        return cls(np.asarray(d, dtype=float),
                   tuple(labels) if labels is not None else None)

    @classmethod
    def cycle(cls, n: int) -> "FiniteMetricSpace":
        """n-cycle with the graph metric min(|i-j|, n-|i-j|)."""
        if n < 3:
            raise ValueError("cycle length must be >= 3")
        i = np.arange(n)
        gap = np.abs(i[:, None] - i[None, :])
        return cls(np.minimum(gap, n - gap).astype(float))

    @classmethod
    def euclidean(cls, points) -> "FiniteMetricSpace":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        return cls(np.sqrt((diff * diff).sum(axis=-1)))

    @classmethod
    def collinear(cls, positions) -> "FiniteMetricSpace":
        """Points on the real line with the absolute-difference metric."""
        xs = np.asarray(positions, dtype=float)
        if np.any(np.diff(xs) <= 0):
            raise ValueError("positions must be strictly increasing")
        return cls(np.abs(xs[:, None] - xs[None, :]))

    def same_as(self, other: "FiniteMetricSpace", tol: float = 1e-12) -> bool:
        return self.d.shape == other.d.shape and bool(
            np.all(np.abs(self.d - other.d) <= tol))


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector over a FiniteMetricSpace (counting-measure density)."""

    space: FiniteMetricSpace
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.shape[0] != self.space.n:
            raise ValueError("distribution.p: length must match the space")
        if np.any(p < 0.0):
            raise ValueError("distribution.p: negative mass")
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"distribution.p: mass {total!r} is not 1 within {MASS_TOL}")
        object.__setattr__(self, "p", _frozen(p))

    def support(self) -> np.ndarray:
        return np.nonzero(self.p > 0.0)[0]

    def mass(self, points) -> float:
        idx = sorted(points)
        return float(math.fsum(self.p[idx].tolist())) if idx else 0.0

    def approx_equal(self, other: "DiscreteDistribution", tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.p - other.p) <= tol))

    @classmethod
    def uniform(cls, space: FiniteMetricSpace) -> "DiscreteDistribution":
        return cls(space, np.full(space.n, 1.0 / space.n))

    @classmethod
    def point_mass(cls, space: FiniteMetricSpace, i: int) -> "DiscreteDistribution":
        p = np.zeros(space.n)
        p[i] = 1.0
        return cls(space, p)


@dataclass(frozen=True, eq=False)
class RealAtomicDistribution:
    """Weighted atoms on the real line; the CDF is a right-continuous step."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.positions, dtype=float)
        ws = np.asarray(self.weights, dtype=float)
        if xs.ndim != 1 or xs.shape != ws.shape or xs.size == 0:
            raise ValueError("atoms: positions and weights must be matching 1-D arrays")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("atoms: positions must be strictly increasing")
        if np.any(ws <= 0):
            raise ValueError("atoms: weights must be positive")
        total = math.fsum(ws.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"atoms: weights sum to {total!r}, not 1 within {MASS_TOL}")
        object.__setattr__(self, "positions", _frozen(xs))
        object.__setattr__(self, "weights", _frozen(ws))
        object.__setattr__(self, "_cum", _frozen(np.cumsum(ws)))

    @property
    def m(self) -> int:
        return self.positions.size

    def cdf(self, x: float) -> float:
        """P(X <= x)."""
        k = int(np.searchsorted(self.positions, x, side="right"))
        return float(self._cum[k - 1]) if k else 0.0

    def cdf_left(self, x: float) -> float:
        """P(X < x), the left limit of the CDF."""
        k = int(np.searchsorted(self.positions, x, side="left"))
        return float(self._cum[k - 1]) if k else 0.0

    @classmethod
    def point_mass(cls, x: float) -> "RealAtomicDistribution":
        return cls(np.array([x]), np.array([1.0]))

    @classmethod
    def from_pairs(cls, pairs) -> "RealAtomicDistribution":
        """Build from (position, weight) pairs; merges duplicates, drops zeros."""
        acc: dict[float, float] = {}
        for x, w in pairs:
            acc[float(x)] = acc.get(float(x), 0.0) + float(w)
        xs = sorted(x for x, w in acc.items() if w > 0)
        return cls(np.array(xs), np.array([acc[x] for x in xs]))


@dataclass(frozen=True, eq=False)
class SmoothRealCdf:
    """Oracle-backed continuous CDF with a declared density bound.

    `support` is a truncation interval [a, b] outside which the remaining
    mass is below 1e-12 on each side; `eval_tolerance` is the guaranteed
    oracle accuracy. Monotonicity is spot-checked on a grid at construction.
    """

    cdf: Callable[[float], float]
    density_bound: float
    support: tuple[float, float]
    eval_tolerance: float = 1e-12

    def __post_init__(self):
        a, b = self.support
        if not a < b:
            raise ValueError("smooth cdf: empty truncation interval")
        if self.density_bound <= 0 or not math.isfinite(self.density_bound):
            raise ValueError("smooth cdf: density bound must be positive and finite")
        fa, fb = self.cdf(a), self.cdf(b)
        if fa > 1e-12 or fb < 1.0 - 1e-12 or fb - fa < 1.0 - 2e-12:
            raise ValueError("smooth cdf: truncation interval does not capture the mass")
        grid = np.linspace(a, b, 65)
        vals = [self.cdf(float(x)) for x in grid]
        if any(v2 < v1 - 1e-12 for v1, v2 in zip(vals, vals[1:])):
            raise ValueError("smooth cdf: oracle is not non-decreasing on the check grid")
        if any(v < -1e-12 or v > 1 + 1e-12 for v in vals):
            raise ValueError("smooth cdf: oracle leaves [0, 1]")

    def __call__(self, x: float) -> float:
        return float(self.cdf(x))


def gaussian_cdf(mean: float = 0.0, sigma: float = 1.0,
                 halfwidth: float = 9.0) -> SmoothRealCdf:
    """Normal CDF via erf, truncated at mean +- halfwidth*sigma."""
    if halfwidth < 7.1:
        raise ValueError("halfwidth too small to push tail mass below 1e-12")

    def cdf(x: float) -> float:
        return 0.5 * (1.0 + math.erf((x - mean) / (sigma * math.sqrt(2.0))))

    return SmoothRealCdf(
        cdf=cdf,
        density_bound=1.0 / (sigma * math.sqrt(2.0 * math.pi)),
        support=(mean - halfwidth * sigma, mean + halfwidth * sigma),
        eval_tolerance=1e-14,
    )


@dataclass(frozen=True, eq=False)
class Coupling:
    """Joint probability matrix with prescribed marginals (within MARGINAL_TOL)."""

    J: np.ndarray
    row_marginal: DiscreteDistribution
    col_marginal: DiscreteDistribution

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.shape != (self.row_marginal.space.n, self.col_marginal.space.n):
            raise ValueError("coupling.J: shape does not match the marginals")
        if np.any(J < 0.0):
            raise ValueError("coupling.J: negative entry")
        if np.max(np.abs(J.sum(axis=1) - self.row_marginal.p)) > MARGINAL_TOL:
            raise ValueError("coupling.J: row marginal deviates beyond tolerance")
        if np.max(np.abs(J.sum(axis=0) - self.col_marginal.p)) > MARGINAL_TOL:
            raise ValueError("coupling.J: column marginal deviates beyond tolerance")
        object.__setattr__(self, "J", _frozen(J))

    def expected_cost(self, cost: np.ndarray) -> float:
        return float(math.fsum((self.J * cost).ravel().tolist()))


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

def product_space(s1: FiniteMetricSpace, s2: FiniteMetricSpace) -> FiniteMetricSpace:
    """Product space with the sum metric d((x1,x2),(y1,y2)) = d1 + d2.

    Only needed for smoke tests; the product-measure identities are purely
    measure-theoretic. Pair (i, j) maps to flat index i * n2 + j.
    """
    n = s1.n * s2.n
    if n > PRODUCT_SIZE_LIMIT:
        raise ValueError(f"product space would have {n} points (limit {PRODUCT_SIZE_LIMIT})")
    d = (s1.d[:, None, :, None] + s2.d[None, :, None, :]).reshape(n, n)
    if n > TRIANGLE_CHECK_LIMIT:
        # sum of two validated metrics; the O(n^3) re-check is skipped above the limit
        space = object.__new__(FiniteMetricSpace)
        object.__setattr__(space, "d", _frozen(d))
        object.__setattr__(space, "labels", None)
        return space
    return FiniteMetricSpace(d)


def product_distribution(m1: DiscreteDistribution, m2: DiscreteDistribution,
                         space: FiniteMetricSpace | None = None) -> DiscreteDistribution:
    if m1.space.n * m2.space.n > PRODUCT_SIZE_LIMIT:
        raise ValueError("product distribution exceeds the size limit")
    if space is None:
        space = product_space(m1.space, m2.space)
    return DiscreteDistribution(space, np.kron(m1.p, m2.p))


def product_pair(mu1: DiscreteDistribution, nu1: DiscreteDistribution,
                 mu2: DiscreteDistribution, nu2: DiscreteDistribution):
    """Product measures (mu1 x mu2, nu1 x nu2) on the shared product space."""
    space = product_space(mu1.space, mu2.space)
    return (product_distribution(mu1, mu2, space),
            product_distribution(nu1, nu2, space))


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def space_from_json(obj: dict) -> FiniteMetricSpace:
    """Space schema: {"kind": "matrix"|"cycle"|"euclidean", ...}."""
    if not isinstance(obj, dict):
        raise ValueError("space: expected a JSON object")
    kind = obj.get("kind")
    if kind == "matrix":
        if "d" not in obj:
            raise ValueError("space.d: missing")
        return FiniteMetricSpace.from_matrix(obj["d"], obj.get("labels"))
    if kind == "cycle":
        if "n" not in obj:
            raise ValueError("space.n: missing")
        return FiniteMetricSpace.cycle(int(obj["n"]))
    if kind == "euclidean":
        if "points" not in obj:
            raise ValueError("space.points: missing")
        return FiniteMetricSpace.euclidean(obj["points"])
    raise ValueError(f"space.kind: unknown kind {kind!r}")


def distribution_from_json(obj: dict):
    """Distribution schema: {"space": <space>, "p": [...]} or {"atoms": [{"x","w"},...]}.

    Returns a DiscreteDistribution or a RealAtomicDistribution.
    """
    if not isinstance(obj, dict):
        raise ValueError("distribution: expected a JSON object")
    if "atoms" in obj:
        atoms = obj["atoms"]
        if not atoms:
            raise ValueError("distribution.atoms: empty")
        try:
            pairs = [(a["x"], a["w"]) for a in atoms]
        except (TypeError, KeyError):
            raise ValueError("distribution.atoms: each atom needs fields x and w") from None
        return RealAtomicDistribution.from_pairs(pairs)
    if "p" in obj:
        if "space" not in obj:
            raise ValueError("distribution.space: missing")
        space = space_from_json(obj["space"])
        return DiscreteDistribution(space, np.asarray(obj["p"], dtype=float))
    raise ValueError("distribution: needs either 'p' (with 'space') or 'atoms'")
