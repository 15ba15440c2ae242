"""Machine-checkable catalog of inter-metric bounds, with applicability
predicates, randomized instance generation, and certification reports.

Metric value keys: tv, hellinger, entropy, chi2, separation, disc,
prokhorov, wasserstein, kolmogorov, levy. An edge `A<=h(B)` passes when
lhs <= h(rhs) + 1e-9 * max(1, h(rhs)) (+ any declared grid slack); a +inf
right-hand side passes vacuously, while +inf on the left against a finite
bound fails loudly (that would be an implementation bug, not a near miss).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import divergences as dv
from . import transport as tp
from .spaces import (DiscreteDistribution, FiniteMetricSpace,
                     RealAtomicDistribution, SmoothRealCdf)

REL_SLACK = 1e-9
# Evaluating the ball-growth modulus just above the computed Prokhorov value
# keeps the bound valid when the flow result lands an ulp below a breakpoint.
_PHI_NUDGE = 1e-12


@dataclass(frozen=True)
class MetricContext:
    """Computed metric values plus the instance facts predicates consult."""

    instance_id: str
    kind: str                     # finite | real-atomic | real-mixed | real-smooth
    values: dict[str, float]
    nu_dominates_mu: bool | None = None
    d_min: float | None = None
    diam: float | None = None
    density_bound: float | None = None
    phi: tp.BallGrowthModulus | None = None
    extra_slack: float = 0.0


@dataclass(frozen=True)
class BoundEdge:
    """One directed bound lhs <= transform(rhs), guarded by an applicability
    predicate over the instance."""

    edge_id: str
    lhs: str
    rhs: str
    transform: Callable[[float, MetricContext], float]
    applicable: Callable[[MetricContext], tuple[bool, str]]


def _needs(*keys: str, extra: Callable[[MetricContext], tuple[bool, str]] | None = None):
    def check(ctx: MetricContext) -> tuple[bool, str]:
        missing = [k for k in keys if k not in ctx.values]
        if missing:
            return False, f"unavailable: {','.join(missing)}"
        if extra is not None:
            return extra(ctx)
        return True, ""
    return check


def _needs_domination(ctx: MetricContext) -> tuple[bool, str]:
    if ctx.nu_dominates_mu is True:
        return True, ""
    return False, "nu does not dominate mu"


def _needs_density_bound(ctx: MetricContext) -> tuple[bool, str]:
    if ctx.density_bound is not None:
        return True, ""
    return False, "no absolutely continuous reference with a density bound"


def _needs_countable_or_dom(ctx: MetricContext) -> tuple[bool, str]:
    if ctx.kind in ("finite", "real-atomic") or ctx.nu_dominates_mu is True:
        return True, ""
    return False, "needs a countable space or domination"


def _needs_phi(ctx: MetricContext) -> tuple[bool, str]:
    if ctx.phi is not None:
        return True, ""
    return False, "no ball-growth modulus for this instance"


def edge_catalog() -> list[BoundEdge]:
    """All nineteen certified inter-metric bounds."""
    e: list[BoundEdge] = []

    # real-line block
    e.append(BoundEdge("L<=K", "levy", "kolmogorov",
                       lambda x, c: x, _needs("levy", "kolmogorov")))
    e.append(BoundEdge("K<=(1+c)L", "kolmogorov", "levy",
                       lambda x, c: (1.0 + c.density_bound) * x,
                       _needs("kolmogorov", "levy", extra=_needs_density_bound)))
    e.append(BoundEdge("K<=D", "kolmogorov", "disc",
                       lambda x, c: x, _needs("kolmogorov", "disc")))
    e.append(BoundEdge("D<=2K", "disc", "kolmogorov",
                       lambda x, c: 2.0 * x, _needs("disc", "kolmogorov")))
    e.append(BoundEdge("L<=P", "levy", "prokhorov",
                       lambda x, c: x, _needs("levy", "prokhorov")))

    # geometric block
    e.append(BoundEdge("D<=P+phi(P)", "disc", "prokhorov",
                       lambda x, c: (x + _PHI_NUDGE) + c.phi.at(x + _PHI_NUDGE),
                       _needs("disc", "prokhorov", extra=_needs_phi)))
    e.append(BoundEdge("P<=sqrt(W)", "prokhorov", "wasserstein",
                       lambda x, c: math.sqrt(x), _needs("prokhorov", "wasserstein")))
    e.append(BoundEdge("D<=TV", "disc", "tv",
                       lambda x, c: x, _needs("disc", "tv")))
    e.append(BoundEdge("P<=TV", "prokhorov", "tv",
                       lambda x, c: x, _needs("prokhorov", "tv")))
    e.append(BoundEdge("W<=diam*TV", "wasserstein", "tv",
                       lambda x, c: c.diam * x,
                       _needs("wasserstein", "tv",
                              extra=lambda c: (c.diam is not None, "unbounded space"))))
    e.append(BoundEdge("TV<=W/dmin", "tv", "wasserstein",
                       lambda x, c: x / c.d_min,
                       _needs("tv", "wasserstein",
                              extra=lambda c: (c.d_min is not None, "no minimum distance"))))

    # density-ratio block
    e.append(BoundEdge("TV<=H", "tv", "hellinger",
                       lambda x, c: x, _needs("tv", "hellinger")))
    e.append(BoundEdge("H<=sqrt(2TV)", "hellinger", "tv",
                       lambda x, c: math.sqrt(2.0 * x), _needs("hellinger", "tv")))
    e.append(BoundEdge("TV<=S", "tv", "separation",
                       lambda x, c: x, _needs("tv", "separation")))
    e.append(BoundEdge("TV<=sqrt(I/2)", "tv", "entropy",
                       lambda x, c: math.sqrt(x / 2.0), _needs("tv", "entropy")))
    e.append(BoundEdge("H<=sqrt(I)", "hellinger", "entropy",
                       lambda x, c: math.sqrt(x), _needs("hellinger", "entropy")))
    e.append(BoundEdge("H<=sqrt(chi2)", "hellinger", "chi2",
                       lambda x, c: math.sqrt(x),
                       _needs("hellinger", "chi2", extra=_needs_domination)))
    e.append(BoundEdge("TV<=sqrt(chi2)/2", "tv", "chi2",
                       lambda x, c: math.sqrt(x) / 2.0,
                       _needs("tv", "chi2", extra=_needs_countable_or_dom)))
    e.append(BoundEdge("I<=log1p(chi2)", "entropy", "chi2",
                       lambda x, c: math.log1p(x), _needs("entropy", "chi2")))
    return e


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeResult:
    edge_id: str
    lhs: float | None
    rhs: float | None
    h_rhs: float | None
    slack: float | None      # h(rhs) - lhs; negative beyond tolerance means fail
    status: str              # pass | fail | skip
    reason: str = ""


@dataclass(frozen=True)
class CertificationReport:
    instance_id: str
    results: tuple[EdgeResult, ...]

    @property
    def failures(self) -> list[EdgeResult]:
        return [r for r in self.results if r.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures


def evaluate_edges(ctx: MetricContext,
                   catalog: Sequence[BoundEdge] | None = None) -> CertificationReport:
    if catalog is None:
        catalog = edge_catalog()
    results = []
    for edge in catalog:
        ok, reason = edge.applicable(ctx)
        if not ok:
            results.append(EdgeResult(edge.edge_id, None, None, None, None,
                                      "skip", reason))
            continue
        lhs = ctx.values[edge.lhs]
        rhs = ctx.values[edge.rhs]
        h = edge.transform(rhs, ctx)
        if math.isinf(h):
            status, slack = "pass", math.inf
        elif math.isinf(lhs):
            status, slack = "fail", -math.inf
        else:
            slack = h - lhs
            tol = REL_SLACK * max(1.0, abs(h)) + ctx.extra_slack
            status = "fail" if lhs > h + tol else "pass"
        results.append(EdgeResult(edge.edge_id, lhs, rhs, h, slack, status))
    return CertificationReport(ctx.instance_id, tuple(results))


# ---------------------------------------------------------------------------
# Instance contexts
# ---------------------------------------------------------------------------

def finite_context(space: FiniteMetricSpace, mu: DiscreteDistribution,
                   nu: DiscreteDistribution,
                   instance_id: str = "finite") -> MetricContext:
    values = {
        "tv": dv.total_variation(mu, nu),
        "hellinger": dv.hellinger(mu, nu),
        "entropy": dv.relative_entropy(mu, nu),
        "chi2": dv.chi_squared(mu, nu),
        "separation": dv.separation(mu, nu),
        "disc": tp.discrepancy_finite(mu, nu),
        "prokhorov": tp.prokhorov(mu, nu),
        "wasserstein": tp.wasserstein_finite(mu, nu)[0],
    }
    return MetricContext(
        instance_id=instance_id,
        kind="finite",
        values=values,
        nu_dominates_mu=dv.nu_dominates_mu(mu, nu),
        d_min=space.d_min,
        diam=space.diam,
        phi=tp.tightest_ball_growth(nu),
    )


def embed_atomic_pair(F: RealAtomicDistribution, G: RealAtomicDistribution):
    """Collinear finite space over the merged atoms, with both densities."""
    grid = np.union1d(F.positions, G.positions)
    space = FiniteMetricSpace.collinear(grid)
    idx_f = np.searchsorted(grid, F.positions)
    idx_g = np.searchsorted(grid, G.positions)
    p = np.zeros(grid.size)
    q = np.zeros(grid.size)
    p[idx_f] = F.weights
    q[idx_g] = G.weights
    return space, DiscreteDistribution(space, p), DiscreteDistribution(space, q)


def real_atomic_context(F: RealAtomicDistribution, G: RealAtomicDistribution,
                        instance_id: str = "real-atomic") -> MetricContext:
    """Atomic pair on the line: CDF metrics directly, geometric metrics on
    the induced collinear space (Prokhorov agrees exactly with the line)."""
    space, mu, nu = embed_atomic_pair(F, G)
    ctx = finite_context(space, mu, nu, instance_id)
    values = dict(ctx.values)
    values["kolmogorov"] = tp.kolmogorov(F, G)
    values["levy"] = tp.levy(F, G)
    return MetricContext(
        instance_id=instance_id,
        kind="real-atomic",
        values=values,
        nu_dominates_mu=ctx.nu_dominates_mu,
        d_min=ctx.d_min,
        diam=ctx.diam,
        phi=ctx.phi,
    )


def real_mixed_context(F: RealAtomicDistribution, G: SmoothRealCdf,
                       instance_id: str = "real-mixed") -> MetricContext:
    """Atomic mu against an atomless nu: the density-ratio distances are
    degenerate (disjoint densities), the line metrics are computed exactly."""
    values = {
        "tv": 1.0,
        "hellinger": math.sqrt(2.0),
        "entropy": math.inf,
        "chi2": math.inf,
        "separation": 1.0,
        "disc": tp.discrepancy_real_mixed(F, G),
        "kolmogorov": tp.kolmogorov(F, G),
        "levy": tp.levy(F, G),
    }
    return MetricContext(
        instance_id=instance_id,
        kind="real-mixed",
        values=values,
        nu_dominates_mu=False,
        density_bound=G.density_bound,
    )


def real_smooth_context(F: SmoothRealCdf, G: SmoothRealCdf,
                        instance_id: str = "real-smooth",
                        mesh: float = 1e-3) -> MetricContext:
    """Two smooth CDFs: grid-based K, L, and interval discrepancy with the
    grid error carried as extra slack."""
    k, k_err = tp.smooth_pair_kolmogorov(F, G, mesh)
    l, l_err = tp.smooth_pair_levy(F, G, mesh)
    lo = min(F.support[0], G.support[0])
    hi = max(F.support[1], G.support[1])
    grid = np.arange(lo, hi + mesh, mesh)
    diffs = np.array([F(float(x)) - G(float(x)) for x in grid])
    disc = float(max(diffs.max(), 0.0) - min(diffs.min(), 0.0))
    slack = k_err + (1.0 + G.density_bound) * l_err
    return MetricContext(
        instance_id=instance_id,
        kind="real-smooth",
        values={"kolmogorov": k, "levy": l, "disc": disc},
        density_bound=G.density_bound,
        extra_slack=slack,
    )


def certify(mu, nu, space: FiniteMetricSpace | None = None,
            instance_id: str = "instance") -> CertificationReport:
    """Compute all applicable metrics for the instance and evaluate every
    edge of the catalog."""
    if isinstance(mu, DiscreteDistribution) and isinstance(nu, DiscreteDistribution):
        return evaluate_edges(finite_context(space or mu.space, mu, nu, instance_id))
    if isinstance(mu, RealAtomicDistribution) and isinstance(nu, RealAtomicDistribution):
        return evaluate_edges(real_atomic_context(mu, nu, instance_id))
    if isinstance(mu, RealAtomicDistribution) and isinstance(nu, SmoothRealCdf):
        return evaluate_edges(real_mixed_context(mu, nu, instance_id))
    if isinstance(mu, SmoothRealCdf) and isinstance(nu, SmoothRealCdf):
        return evaluate_edges(real_smooth_context(mu, nu, instance_id))
    raise ValueError("unsupported instance combination")


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

INSTANCE_KINDS = ("euclidean", "cycle", "random-metric")


@dataclass(frozen=True)
class RandomInstance:
    instance_id: str
    space: FiniteMetricSpace
    mu: DiscreteDistribution
    nu: DiscreteDistribution


def _random_space(rng: np.random.Generator, n: int, kind: str) -> FiniteMetricSpace:
    if kind == "euclidean":
        return FiniteMetricSpace.euclidean(rng.normal(size=(n, 2)))
    if kind == "cycle":
        return FiniteMetricSpace.cycle(max(n, 3))
    if kind == "random-metric":
        w = rng.uniform(0.5, 2.0, size=(n, n))
        w = np.minimum(w, w.T)
        np.fill_diagonal(w, 0.0)
        for k in range(n):  # shortest-path closure keeps the triangle inequality
            w = np.minimum(w, w[:, [k]] + w[[k], :])
        return FiniteMetricSpace(w)
    raise ValueError(f"unknown instance kind {kind!r}")


def _sparse_simplex(rng: np.random.Generator, n: int, sparsity: float) -> np.ndarray:
    p = rng.dirichlet(np.ones(n))
    if sparsity > 0.0:
        drop = rng.random(n) < sparsity
        drop[int(np.argmax(p))] = False  # keep the support non-empty
        p = np.where(drop, 0.0, p)
        p = p / math.fsum(p.tolist())
    return p


def random_instance(seed: int, index: int, size_range: tuple[int, int] = (4, 10),
                    kind: str = "euclidean", sparsity: float = 0.0) -> RandomInstance:
    """Deterministic per (seed, index): a space of the requested kind and a
    Dirichlet(1) distribution pair, optionally with zeroed coordinates to
    exercise domination edge cases."""
    if size_range[1] > 64:
        raise ValueError("instance size limit is 64")
    rng = np.random.default_rng([seed, index])
    n = int(rng.integers(size_range[0], size_range[1] + 1))
    space = _random_space(rng, n, kind)
    mu = DiscreteDistribution(space, _sparse_simplex(rng, space.n, sparsity))
    nu = DiscreteDistribution(space, _sparse_simplex(rng, space.n, sparsity))
    iid = f"{kind}-n{space.n}-seed{seed}-i{index}-sp{sparsity:g}"
    return RandomInstance(iid, space, mu, nu)


def max_workers() -> int:
    """Worker cap for certification campaigns (METRIC_ATLAS_THREADS)."""
    raw = os.environ.get("METRIC_ATLAS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"METRIC_ATLAS_THREADS: not an integer: {raw!r}") from None


def certification_campaign(trials: int, seed: int = 0,
                           size_range: tuple[int, int] = (4, 10),
                           kinds: Sequence[str] = INSTANCE_KINDS,
                           sparsities: Sequence[float] = (0.0, 0.3),
                           ) -> list[CertificationReport]:
    """Seeded campaign cycling through space kinds and sparsity levels."""
    catalog = edge_catalog()

    def run(i: int) -> CertificationReport:
        kind = kinds[i % len(kinds)]
        sparsity = sparsities[(i // len(kinds)) % len(sparsities)]
        inst = random_instance(seed, i, size_range, kind, sparsity)
        ctx = finite_context(inst.space, inst.mu, inst.nu, inst.instance_id)
        return evaluate_edges(ctx, catalog)

    workers = max_workers()
    if workers == 1:
        return [run(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(trials)))


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("instance_id", "edge_id", "lhs", "rhs", "h_rhs", "slack", "status")


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(x)


def reports_to_csv(reports: Sequence[CertificationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        for r in rep.results:
            writer.writerow([rep.instance_id, r.edge_id, _fmt(r.lhs), _fmt(r.rhs),
                             _fmt(r.h_rhs), _fmt(r.slack), r.status])
    return buf.getvalue()


def reports_to_json(reports: Sequence[CertificationReport]) -> str:
    def num(x):
        if x is None:
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x

    payload = {
        "version": "1",
        "reports": [
            {
                "instance_id": rep.instance_id,
                "edges": [
                    {"edge_id": r.edge_id, "lhs": num(r.lhs), "rhs": num(r.rhs),
                     "h_rhs": num(r.h_rhs), "slack": num(r.slack),
                     "status": r.status, "reason": r.reason}
                    for r in rep.results
                ],
            }
            for rep in reports
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def reports_from_json(text: str) -> list[CertificationReport]:
    def num(x):
        if x is None:
            return None
        if x == "inf":
            return math.inf
        if x == "-inf":
            return -math.inf
        return float(x)

    payload = json.loads(text)
    if payload.get("version") != "1":
        raise ValueError("report.version: unsupported")
    out = []
    for rep in payload["reports"]:
        results = tuple(
            EdgeResult(e["edge_id"], num(e["lhs"]), num(e["rhs"]), num(e["h_rhs"]),
                       num(e["slack"]), e["status"], e.get("reason", ""))
            for e in rep["edges"])
        out.append(CertificationReport(rep["instance_id"], results))
    return out
