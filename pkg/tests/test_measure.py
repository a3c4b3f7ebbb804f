import pytest

from corrdyn import (
    Correspondence,
    INFINITY,
    PointMeasure,
    build_Tn,
    build_family,
    exact_pushforward,
    invariance_residual,
    measure_distance,
    moment_dictionary,
    parse_operator,
    push_from_infinity,
    push_once,
    sample_orbit_measure,
    transfer_apply,
)
from corrdyn.errors import BudgetExceeded, HypothesisUnmet, InfiniteAtom
from corrdyn.measure import cell_indicator, moment_test
from conftest import constant_family, family_from_texts


class TestPointMeasure:
    def test_coalescing(self):
        mu = PointMeasure.from_atoms([(1 + 0j, 0.5), (1 + 1e-12j, 0.25), (2 + 0j, 0.25)])
        assert len(mu.atoms) == 2
        assert mu.total == pytest.approx(1.0)

    def test_canonical_order(self):
        mu = PointMeasure.from_atoms([(2 + 0j, 1.0), (-1 + 0j, 1.0), (INFINITY, 0.5)])
        assert mu.atoms[0][0] == -1 + 0j
        assert mu.atoms[-1][0] is INFINITY

    def test_json_round_trip(self):
        mu = PointMeasure.from_atoms([(1 + 2j, 0.75), (INFINITY, 0.25)])
        back = PointMeasure.from_jsonable(mu.to_jsonable())
        assert back.atoms == mu.atoms
        assert back.total == mu.total


class TestPushOnce:
    def test_constant_family_convention(self):
        C = build_family(constant_family("w^2 - 1"))
        mu = push_once(C, PointMeasure.dirac(0))
        assert mu.atoms == (((-1 + 0j), 1.0), ((1 + 0j), 1.0))

    def test_sqrt(self):
        C = Correspondence.from_text("w^2 - z")
        mu = push_once(C, PointMeasure.dirac(4))
        assert mu.atoms == (((-2 + 0j), 1.0), ((2 + 0j), 1.0))

    def test_double_root_weight(self):
        C = Correspondence.from_text("w^2")
        mu = push_once(C, PointMeasure.dirac(5 + 5j))
        assert mu.atoms == ((0j, 2.0),)
        assert mu.total == 2.0

    def test_mass_conservation(self):
        C = Correspondence.from_text("w^3 + 0.1*z*w - 1")
        mu = PointMeasure.dirac(0.5 + 0.25j)
        for _ in range(4):
            mu = push_once(C, mu)
        assert mu.total == pytest.approx(3.0 ** 4, rel=1e-12)

    def test_infinite_atom_rejected(self):
        C = Correspondence.from_text("w^2 - z")
        with pytest.raises(InfiniteAtom):
            push_once(C, PointMeasure.dirac(INFINITY))


class TestExactPushforward:
    def test_constant_uniform(self):
        C = build_family(constant_family("w^2 - 1"))
        mu = exact_pushforward(C, 0.3, 3)
        assert mu.atoms == (((-1 + 0j), 0.5), ((1 + 0j), 0.5))

    def test_wd_delta_zero(self):
        b = build_Tn(parse_operator("w*D"), 12)
        mu = exact_pushforward(b.correspondence, 5, 1)
        assert mu.atoms == ((0j, 1.0),)

    def test_fourth_roots(self):
        C = Correspondence.from_text("w^2 - z")
        mu = exact_pushforward(C, 16, 2)
        got = sorted((v for v, _ in mu.atoms), key=lambda c: (c.real, c.imag))
        expected = sorted((2, -2, 2j, -2j), key=lambda c: (c.real, c.imag))
        for g, e in zip(got, expected):
            assert abs(g - e) < 1e-12
        assert all(w == 0.25 for _, w in mu.atoms)

    def test_budget_exceeded_carries_level(self):
        C = Correspondence.from_text("w^2 - z")
        with pytest.raises(BudgetExceeded) as exc:
            exact_pushforward(C, 2, 30, budget=100)
        assert exc.value.completed_level is not None
        assert exc.value.measure is not None
        assert exc.value.measure.is_normalized()


class TestSampleOrbit:
    def test_constant_bernoulli(self):
        C = build_family(constant_family("w^2 - 1"))
        mu = sample_orbit_measure(C, 0.3, burn_in=2, samples=10_000, seed=99)
        weights = {round(v.real): w for v, w in mu.atoms}
        assert abs(weights[1] - 0.5) < 0.02
        assert abs(weights[-1] - 0.5) < 0.02

    def test_wd_exact_delta(self):
        b = build_Tn(parse_operator("w*D"), 8)
        mu = sample_orbit_measure(b.correspondence, 5, burn_in=1, samples=64, seed=1)
        assert mu.atoms == ((0j, 1.0),)

    def test_single_step_support(self):
        C = Correspondence.from_text("w^2 - z")
        mu = sample_orbit_measure(C, 4, burn_in=0, samples=1, seed=7)
        assert len(mu.atoms) == 1
        v = mu.atoms[0][0]
        assert min(abs(v - 2), abs(v + 2)) < 1e-12

    def test_seed_determinism(self):
        C = build_family(constant_family("w^3 - w + 0.1"))
        a = sample_orbit_measure(C, 0.2, burn_in=5, samples=500, seed=42)
        b = sample_orbit_measure(C, 0.2, burn_in=5, samples=500, seed=42)
        c = sample_orbit_measure(C, 0.2, burn_in=5, samples=500, seed=43)
        assert a.atoms == b.atoms
        assert a.atoms != c.atoms

    def test_thread_count_invariance(self):
        C = build_family(constant_family("w^2 - 1"))
        a = sample_orbit_measure(C, 0.3, burn_in=2, samples=4000, seed=5, threads=1)
        b = sample_orbit_measure(C, 0.3, burn_in=2, samples=4000, seed=5, threads=8)
        assert a.atoms == b.atoms


class TestTransferApply:
    def test_constant_function(self):
        C = Correspondence.from_text("w^2 - z")
        vals = transfer_apply(C, moment_test(0, 0, 1000.0), [4 + 0j, 1j], 3)
        for v in vals:
            assert abs(v - 1.0) < 1e-12

    def test_constant_correspondence_average(self):
        C = build_family(constant_family("w^2 - 1"))
        vals = transfer_apply(C, moment_test(1, 0, 1000.0), [0j, 5 + 5j], 1)
        for v in vals:
            assert abs(v) < 1e-12  # (1 + (-1)) / 2

    def test_sqrt_mean(self):
        C = Correspondence.from_text("w^2 - z")
        (v,) = transfer_apply(C, moment_test(1, 0, 1000.0), [4 + 0j], 1)
        assert abs(v) < 1e-12  # (2 + (-2)) / 2

    def test_budget_guard(self):
        C = Correspondence.from_text("w^2 - z")
        with pytest.raises(BudgetExceeded):
            transfer_apply(C, moment_test(0, 0, 10.0), [1 + 0j], 40, budget=100)

    def test_flattening_ratio(self, main_operator):
        # sup-spread of A^m phi over sampled points contracts geometrically
        b = build_Tn(main_operator, 100)
        pts = [0.4 + 0j, -0.7 + 0.2j, 2.0 - 1.0j, 1j]
        phi = moment_test(1, 0, 24.0)
        spreads = []
        for m in (1, 2, 3, 4):
            vals = transfer_apply(b.correspondence, phi, pts, m)
            mean = sum(vals) / len(vals)
            spreads.append(max(abs(v - mean) for v in vals))
        for a, bb in zip(spreads, spreads[1:]):
            if a > 1e-13:
                assert bb <= 0.75 * a


class TestInvariance:
    def test_constant_uniform_zero(self):
        C = build_family(constant_family("w^2 - 1"))
        mu = exact_pushforward(C, 0.3, 1)
        assert invariance_residual(C, mu, moment_dictionary(4, 12.0)) <= 1e-15

    def test_non_fixed_dirac_positive(self):
        C = Correspondence.from_text("w^2 - z")
        res = invariance_residual(C, PointMeasure.dirac(4), moment_dictionary(2, 100.0))
        assert res > 0.1

    def test_wd_fixed_delta(self):
        b = build_Tn(parse_operator("w*D"), 8)
        res = invariance_residual(b.correspondence, PointMeasure.dirac(0),
                                  moment_dictionary(4, 12.0))
        assert res == 0.0

    def test_decreases_with_depth(self, main_operator):
        b = build_Tn(main_operator, 100)
        d = moment_dictionary(4, 24.0)
        res = [invariance_residual(b.correspondence, exact_pushforward(
            b.correspondence, 0.3, m), d) for m in (1, 2, 4, 6)]
        for a, bb in zip(res, res[1:]):
            assert bb <= a + 1e-3  # monotone up to the noise floor


class TestMeasureDistance:
    def test_identical(self):
        mu = PointMeasure.from_atoms([(1 + 0j, 0.5), (-1 + 0j, 0.5)])
        assert measure_distance(mu, mu, 0.5, 10.0).tv == 0.0

    def test_disjoint(self):
        gd = measure_distance(PointMeasure.dirac(1), PointMeasure.dirac(-1), 0.5, 10.0)
        assert gd.tv == 1.0
        assert gd.moment_diff == pytest.approx(2.0)

    def test_half_overlap(self):
        u = PointMeasure.from_atoms([(1 + 0j, 0.5), (-1 + 0j, 0.5)])
        assert measure_distance(u, PointMeasure.dirac(1), 0.5, 10.0).tv == 0.5

    def test_overflow_cell(self):
        gd = measure_distance(PointMeasure.dirac(100), PointMeasure.dirac(200), 0.5, 10.0)
        assert gd.tv == 0.0  # both fall into the shared overflow cell


class TestStartPointIndependence:
    def test_main_family(self, main_operator):
        C = build_Tn(main_operator, 100).correspondence
        eta0 = 2.0 / 3.0
        tvs = []
        for m in range(2, 9):
            m1 = exact_pushforward(C, 0.3, m)
            m2 = exact_pushforward(C, -0.7 + 0.2j, m)
            tvs.append(measure_distance(m1, m2, eta0 / 4.0, 8.0).tv)
        for a, b in zip(tvs, tvs[1:]):
            assert b <= a + 1e-12
        assert tvs[-1] < 0.05


class TestEstimatorAgreement:
    def test_exact_vs_monte_carlo(self, main_operator):
        C = build_Tn(main_operator, 100).correspondence
        exact = exact_pushforward(C, 0.3, 12)
        mc = sample_orbit_measure(C, 0.3, burn_in=50, samples=20_000, seed=11)
        gd = measure_distance(exact, mc, (2.0 / 3.0) / 4.0, 8.0)
        assert gd.tv <= 0.05


class TestPushFromInfinity:
    def test_mass_decay_exact(self):
        # d = 3, d1 = 1: mass at INFINITY after m levels is (2/3)^m
        spec = family_from_texts("w^3 - 1", ["0", "w", "0", "0"], [0, 0.05, 0, 0])
        C = build_family(spec)
        mu, masses = push_from_infinity(C, 4)
        expected = [(2.0 / 3.0) ** k for k in range(1, 5)]
        for got, exp in zip(masses, expected):
            assert got == pytest.approx(exp, rel=1e-13)
        assert mu.infinity_mass() == pytest.approx((2.0 / 3.0) ** 4, rel=1e-13)

    def test_constant_in_z_unmet(self):
        C = build_family(constant_family("w^2 - 1"))
        with pytest.raises(HypothesisUnmet):
            push_from_infinity(C, 2)

    def test_constant_top_coefficient_unmet(self):
        # top z-coefficient has no w-dependence: no finite escape points
        C = Correspondence.from_text("w + 0.5*z")
        with pytest.raises(HypothesisUnmet):
            push_from_infinity(C, 2)

    def test_total_mass_preserved(self):
        spec = family_from_texts("w^3 - 1", ["0", "w", "0", "0"], [0, 0.05, 0, 0])
        C = build_family(spec)
        mu, _ = push_from_infinity(C, 5)
        assert mu.total == pytest.approx(1.0, rel=1e-12)


class TestTestFunctions:
    def test_moment_cutoff(self):
        phi = moment_test(2, 1, 10.0)
        assert phi(1 + 1j) == (1 + 1j) ** 2 * (1 - 1j)
        assert phi(20 + 0j) == 0j
        assert phi(INFINITY) == 0j

    def test_cell_indicator(self):
        phi = cell_indicator(0.0, 0.0, 1.0)
        assert phi(0.5 + 0.5j) == 1.0
        assert phi(-0.5 + 0.5j) == 0.0
        assert phi(INFINITY) == 0j

    def test_dictionary_size(self):
        d = moment_dictionary(4, 10.0)
        assert len(d) == sum(t + 1 for t in range(1, 5))
