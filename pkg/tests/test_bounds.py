import math

import numpy as np
import pytest

from metric_atlas.bounds import (CertificationReport, EdgeResult, MetricContext,
                                 certification_campaign, certify, edge_catalog,
                                 evaluate_edges, finite_context, max_workers,
                                 random_instance, real_atomic_context,
                                 reports_from_json, reports_to_csv,
                                 reports_to_json)
from metric_atlas.spaces import (DiscreteDistribution, FiniteMetricSpace,
                                 RealAtomicDistribution)
from metric_atlas.transport import tightest_ball_growth
from metric_atlas.walks import z10_measures

from conftest import random_pair_on


def ids(catalog):
    return [e.edge_id for e in catalog]


class TestCatalog:
    def test_size_is_nineteen(self):
        assert len(edge_catalog()) == 19

    def test_ids_unique(self):
        catalog = edge_catalog()
        assert len(set(ids(catalog))) == len(catalog)

    def test_transforms_monotone(self):
        _, mu, _, unif = z10_measures()
        ctx = MetricContext("probe", "finite", {}, nu_dominates_mu=True,
                            d_min=0.5, diam=3.0, density_bound=1.0,
                            phi=tightest_ball_growth(unif))
        grid = np.linspace(0.0, 6.0, 200)
        for edge in edge_catalog():
            vals = [edge.transform(float(x), ctx) for x in grid]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:])), edge.edge_id

    def test_tv_le_sep_applies_on_any_finite_instance(self):
        space, mu, _, unif = z10_measures()
        ctx = finite_context(space, mu, unif)
        edge = next(e for e in edge_catalog() if e.edge_id == "TV<=S")
        assert edge.applicable(ctx)[0]

    def test_kolmogorov_via_levy_skips_on_finite_instances(self):
        space, mu, _, unif = z10_measures()
        ctx = finite_context(space, mu, unif)
        edge = next(e for e in edge_catalog() if e.edge_id == "K<=(1+c)L")
        ok, reason = edge.applicable(ctx)
        assert not ok and reason


class TestEvaluation:
    def test_z10_all_applicable_pass(self):
        _, mu, _, unif = z10_measures()
        rep = certify(mu, unif, instance_id="z10")
        assert rep.passed
        by_id = {r.edge_id: r for r in rep.results}
        # Pinsker: 2 * 0.5^2 = 0.5 <= 1.075
        pinsker = by_id["TV<=sqrt(I/2)"]
        assert pinsker.status == "pass"
        assert abs(pinsker.lhs - 0.5) < 1e-12
        assert 2 * pinsker.lhs ** 2 <= by_id["I<=log1p(chi2)"].lhs

    def test_equal_arguments_all_zero(self):
        _, mu, _, _ = z10_measures()
        rep = certify(mu, mu)
        for r in rep.results:
            if r.status == "pass":
                assert r.lhs == 0.0
        assert rep.passed

    def test_nested_uniforms_entropy_vacuous(self):
        s = FiniteMetricSpace.collinear(np.arange(1.0, 11.0))
        u10 = DiscreteDistribution.uniform(s)
        u9 = DiscreteDistribution(s, np.array([1 / 9] * 9 + [0.0]))
        rep = certify(u10, u9)
        by_id = {r.edge_id: r for r in rep.results}
        assert abs(by_id["TV<=S"].lhs - 0.1) < 1e-12
        assert by_id["TV<=S"].status == "pass"
        # reference misses a support point, so entropy and chi2 blow up
        assert by_id["TV<=sqrt(I/2)"].rhs == math.inf
        assert by_id["TV<=sqrt(I/2)"].status == "pass"
        assert rep.passed

    def test_infinite_lhs_with_finite_bound_fails_loudly(self):
        ctx = MetricContext("doctored", "finite",
                            {"entropy": math.inf, "chi2": 1.0})
        rep = evaluate_edges(ctx)
        by_id = {r.edge_id: r for r in rep.results}
        assert by_id["I<=log1p(chi2)"].status == "fail"
        assert by_id["I<=log1p(chi2)"].slack == -math.inf

    def test_both_infinite_passes(self):
        ctx = MetricContext("doctored", "finite",
                            {"entropy": math.inf, "chi2": math.inf})
        rep = evaluate_edges(ctx)
        by_id = {r.edge_id: r for r in rep.results}
        assert by_id["I<=log1p(chi2)"].status == "pass"

    def test_both_argument_orders_certify(self, rng):
        s = FiniteMetricSpace.euclidean(rng.normal(size=(6, 2)))
        for i in range(15):
            mu, nu = random_pair_on(s, rng, sparsity=0.3)
            assert certify(mu, nu).passed
            assert certify(nu, mu).passed


class TestNonCatalogRelations:
    """Bounds certified as properties rather than carried as catalog rows
    (they compose from or refine catalog edges)."""

    def test_entropy_and_hellinger_chi2_relations(self, rng):
        s = FiniteMetricSpace.euclidean(rng.normal(size=(8, 2)))
        from metric_atlas.divergences import (chi_squared, hellinger,
                                              relative_entropy,
                                              total_variation)
        for i in range(40):
            mu, nu = random_pair_on(s, rng, sparsity=0.3 if i % 2 else 0.0)
            ent = relative_entropy(mu, nu)
            chi = chi_squared(mu, nu)
            tv = total_variation(mu, nu)
            h = hellinger(mu, nu)
            if math.isfinite(chi):
                assert ent <= tv + chi / 2.0 + 1e-9
                assert ent <= chi + 1e-9
                assert h <= math.sqrt(2.0) * chi ** 0.25 + 1e-9
            else:
                assert True  # vacuous for a blown-up chi-squared

    def test_wasserstein_two_sided_refinements(self, rng):
        from metric_atlas.transport import (discrepancy_finite, prokhorov,
                                            wasserstein_finite)
        from metric_atlas.divergences import total_variation
        for i in range(25):
            inst = random_instance(123, i, (3, 8), "random-metric",
                                   0.3 if i % 2 else 0.0)
            w, _ = wasserstein_finite(inst.mu, inst.nu)
            assert inst.space.d_min * discrepancy_finite(inst.mu, inst.nu) <= w + 1e-9
            assert w <= (inst.space.diam + 1.0) * prokhorov(inst.mu, inst.nu) + 1e-9


class TestTightnessWitnesses:
    def test_tv_equals_separation_on_disjoint_point_masses(self):
        s = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        mu = DiscreteDistribution.point_mass(s, 0)
        nu = DiscreteDistribution.point_mass(s, 1)
        rep = certify(mu, nu)
        by_id = {r.edge_id: r for r in rep.results}
        assert by_id["TV<=S"].lhs == by_id["TV<=S"].h_rhs == 1.0

    def test_hellinger_sandwich_tight_on_disjoint_supports(self):
        s = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
        mu = DiscreteDistribution.point_mass(s, 0)
        nu = DiscreteDistribution.point_mass(s, 1)
        rep = certify(mu, nu)
        by_id = {r.edge_id: r for r in rep.results}
        # H = sqrt(2), TV = 1: the upper H <= sqrt(2 TV) is an equality
        assert abs(by_id["H<=sqrt(2TV)"].lhs - by_id["H<=sqrt(2TV)"].h_rhs) < 1e-12

    def test_kolmogorov_discrepancy_tight_both_ways(self):
        F = RealAtomicDistribution.point_mass(0.0)
        G = RealAtomicDistribution.point_mass(0.4)
        ctx = real_atomic_context(F, G)
        assert abs(ctx.values["kolmogorov"] - ctx.values["disc"]) < 1e-12
        F2 = RealAtomicDistribution.from_pairs([(0.0, 0.5), (2.0, 0.5)])
        G2 = RealAtomicDistribution.point_mass(1.0)
        ctx2 = real_atomic_context(F2, G2)
        assert abs(ctx2.values["disc"] - 2 * ctx2.values["kolmogorov"]) < 1e-12


class TestMutualConvergence:
    def test_hellinger_and_tv_shrink_together(self):
        space, mu0, _, nu = z10_measures()
        prev_tv = prev_h = None
        for k in (2, 4, 8, 16, 64, 256):
            mix = DiscreteDistribution(
                space, (1 - 1 / k) * nu.p + (1 / k) * mu0.p)
            ctx = finite_context(space, mix, nu, f"mix-{k}")
            tv, h = ctx.values["tv"], ctx.values["hellinger"]
            assert h * h / 2 <= tv + 1e-12 and tv <= h + 1e-12
            if prev_tv is not None:
                assert tv <= prev_tv + 1e-12 and h <= prev_h + 1e-12
            prev_tv, prev_h = tv, h
        assert prev_tv < 0.01 and prev_h < 0.05


class TestRandomInstances:
    def test_deterministic(self):
        a = random_instance(5, 3, (4, 10), "random-metric", 0.3)
        b = random_instance(5, 3, (4, 10), "random-metric", 0.3)
        assert np.array_equal(a.space.d, b.space.d)
        assert np.array_equal(a.mu.p, b.mu.p) and np.array_equal(a.nu.p, b.nu.p)

    def test_cycle_kind(self):
        inst = random_instance(0, 0, (10, 10), "cycle", 0.0)
        assert np.array_equal(inst.space.d, FiniteMetricSpace.cycle(10).d)

    def test_sparsity_statistics(self):
        zeros = total = 0
        for i in range(1000):
            inst = random_instance(17, i, (16, 16), "euclidean", 0.5)
            zeros += int(np.sum(inst.mu.p == 0.0))
            total += inst.space.n
        frac = zeros / total
        assert abs(frac - 0.5) <= 0.05

    def test_campaign_small(self):
        reports = certification_campaign(trials=30, seed=1)
        assert len(reports) == 30
        assert all(r.passed for r in reports)
        assert all(len(r.results) == 19 for r in reports)

    def test_worker_cap_env(self, monkeypatch):
        monkeypatch.setenv("METRIC_ATLAS_THREADS", "2")
        assert max_workers() == 2
        reports = certification_campaign(trials=12, seed=2)
        assert [r.instance_id for r in reports] == \
            [r.instance_id for r in certification_campaign(trials=12, seed=2)]
        monkeypatch.setenv("METRIC_ATLAS_THREADS", "zebra")
        with pytest.raises(ValueError, match="METRIC_ATLAS_THREADS"):
            max_workers()


class TestSerialization:
    def test_empty_csv_is_header_only(self):
        assert reports_to_csv([]) == \
            "instance_id,edge_id,lhs,rhs,h_rhs,slack,status\n"

    def test_single_edge_report_two_lines(self):
        rep = CertificationReport("one", (EdgeResult(
            "TV<=H", 0.5, 0.9, 0.9, 0.4, "pass"),))
        text = reports_to_csv([rep])
        assert len(text.strip().split("\n")) == 2
        assert "one,TV<=H,0.5,0.9,0.9,0.4,pass" in text

    def test_json_round_trip(self):
        _, mu, _, unif = z10_measures()
        reports = [certify(mu, unif, instance_id="z10"),
                   certify(unif, mu, instance_id="z10-swapped")]
        back = reports_from_json(reports_to_json(reports))
        assert back == reports

    def test_infinities_survive_round_trip(self):
        rep = CertificationReport("inf-case", (EdgeResult(
            "I<=log1p(chi2)", math.inf, math.inf, math.inf, math.inf, "pass"),))
        assert reports_from_json(reports_to_json([rep])) == [rep]

    def test_csv_floats_round_trip_exactly(self):
        import csv as csv_mod
        import io
        _, mu, _, unif = z10_measures()
        rep = certify(mu, unif, instance_id="z10")
        text = reports_to_csv([rep])
        rows = list(csv_mod.reader(io.StringIO(text)))
        for row, result in zip(rows[1:], rep.results):
            if result.status == "skip":
                assert row[2] == ""
                continue
            assert float(row[2]) == result.lhs    # shortest round-trip format
            assert float(row[4]) == result.h_rhs
