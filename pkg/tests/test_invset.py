import math

import pytest

from corrdyn import (
    cantor_diagnostics,
    find_periodic_points,
    min_invariant_set,
    neighborhood_containment,
    parse_operator,
)
from corrdyn.errors import NotCertified
from corrdyn.invset import certified_build
from corrdyn.rng import Rng


@pytest.fixture(scope="module")
def main_prebuilt(main_operator):
    return certified_build(main_operator, 100)


class TestMinInvariantSet:
    def test_wd_single_cell(self):
        S = min_invariant_set(parse_operator("w*D"), 50, 1e-3)
        assert list(S.cells) == [(0, 0)]
        assert S.cells[(0, 0)] == 0
        assert not S.truncated

    def test_constant_two_cells(self):
        S = min_invariant_set(parse_operator("(w^2-1)*D^2"), 2, 1e-3)
        centers = S.occupied_centers()
        assert len(centers) == 2
        assert min(abs(c - 1) for c in centers) < 1e-3
        assert min(abs(c + 1) for c in centers) < 1e-3

    def test_main_family_contained(self, main_operator, main_prebuilt):
        S = min_invariant_set(main_operator, 100, 1e-3, prebuilt=main_prebuilt)
        for c in S.occupied_centers():
            assert min(abs(c - 1), abs(c + 1)) < 0.1

    def test_not_certified(self, main_operator):
        with pytest.raises(NotCertified) as exc:
            min_invariant_set(main_operator, 2, 0.01)
        assert exc.value.certificate is not None
        assert not exc.value.certificate.passed

    def test_uncertified_opt_in(self, main_operator):
        S = min_invariant_set(main_operator, 2, 0.05, max_atoms=2000,
                              allow_uncertified=True)
        assert not S.certified
        assert S.to_jsonable()["certified"] is False
        assert len(S.cells) >= 1

    def test_truncation_flag(self, main_operator, main_prebuilt):
        S = min_invariant_set(main_operator, 100, 1e-6, max_atoms=5,
                              prebuilt=main_prebuilt)
        assert S.truncated

    def test_forward_invariance_of_covering(self, main_operator, main_prebuilt):
        # one fiber step from any occupied-cell center stays eps sqrt(2)
        # close to the covering
        eps = 0.005
        S = min_invariant_set(main_operator, 100, eps, prebuilt=main_prebuilt)
        C = main_prebuilt[0].correspondence
        centers = S.occupied_centers()
        for c in centers:
            for w in C.fiber_values(c):
                gap = min(abs(w - o) for o in centers)
                assert gap <= eps * math.sqrt(2.0)

    def test_fixed_point_membership(self, main_operator, main_prebuilt):
        # every simple zero of Q_k lies in an occupied cell
        S = min_invariant_set(main_operator, 100, 0.004, prebuilt=main_prebuilt)
        for u in (-1 + 0j, 1 + 0j):
            assert S.key(u) in S.cells

    def test_minimality_reseed(self, main_operator, main_prebuilt):
        S0 = min_invariant_set(main_operator, 100, 0.005, prebuilt=main_prebuilt)
        rng = Rng(404)
        cells = sorted(S0.representatives)
        for _ in range(5):
            cell = cells[rng.below(len(cells))]
            S1 = min_invariant_set(main_operator, 100, 0.005,
                                   prebuilt=main_prebuilt,
                                   seed_point=S0.representatives[cell])
            sym = len(set(S0.cells) ^ set(S1.cells))
            assert sym <= 0.02 * max(len(S0.cells), 1)

    def test_serialization(self, main_operator, main_prebuilt):
        S = min_invariant_set(main_operator, 100, 0.01, prebuilt=main_prebuilt)
        obj = S.to_jsonable()
        assert obj["eps"] == 0.01
        assert obj["cells"] == sorted(obj["cells"])
        assert all(len(row) == 3 for row in obj["cells"])
        # bounding square contains D(0, M)
        M = main_prebuilt[1].M
        assert obj["origin"][0] <= -M / 0.01
        assert obj["origin"][0] + obj["extent"][0] >= M / 0.01

    def test_ppm_render(self, main_operator, main_prebuilt):
        S = min_invariant_set(main_operator, 100, 0.01, prebuilt=main_prebuilt)
        data = S.to_ppm()
        assert data.startswith(b"P6\n")
        header, rest = data.split(b"\n255\n", 1)
        w, h = map(int, header.split(b"\n")[1].split())
        assert len(rest) == 3 * w * h


class TestNeighborhoodContainment:
    def test_pass(self, main_operator, main_prebuilt):
        S = min_invariant_set(main_operator, 100, 1e-3, prebuilt=main_prebuilt)
        res = neighborhood_containment(S, [1 + 0j, -1 + 0j], 2.0 / 3.0)
        assert res.passed
        assert res.margin < 0.05

    def test_fail_margin(self):
        from corrdyn.invset import CellSet

        S = CellSet(0.1, 1.0)
        S.cells[(5, 0)] = 0  # center 0.5
        res = neighborhood_containment(S, [1 + 0j, -1 + 0j], 0.1)
        assert not res.passed
        assert res.margin == pytest.approx(0.5)


class TestCantorDiagnostics:
    def test_constant_two_components(self):
        rep = cantor_diagnostics(parse_operator("(w^2-1)*D^2"), 4,
                                 [0.02, 0.01])
        for row in rep.rows:
            assert row.n_components == 2
            assert row.max_component_diameter == pytest.approx(
                row.eps * math.sqrt(2.0))
        assert rep.hypothesis_met is False  # no lower-order term

    def test_wd_single_cell_flagged(self):
        rep = cantor_diagnostics(parse_operator("w*D"), 8, [0.01, 0.005])
        assert all(r.n_components == 1 for r in rep.rows)
        assert rep.hypothesis_met is False  # order k = 1

    def test_main_trends(self, main_operator):
        rep = cantor_diagnostics(main_operator, 100, [0.02, 0.01, 0.005, 0.0025])
        assert rep.hypothesis_met
        comps = [r.n_components for r in rep.rows]
        assert comps == sorted(comps)
        diams = [r.max_component_diameter for r in rep.rows]
        assert all(a > b for a, b in zip(diams, diams[1:]))
        assert rep.rows[-1].isolated_cell_count == 0
        assert rep.totally_disconnected_trend
        assert rep.perfect_trend

    def test_rows_ordered_by_decreasing_eps(self, main_operator):
        rep = cantor_diagnostics(main_operator, 100, [0.005, 0.02])
        assert rep.rows[0].eps == 0.02

    def test_csv(self, main_operator):
        rep = cantor_diagnostics(main_operator, 100, [0.02, 0.01])
        lines = rep.to_csv().strip().split("\n")
        assert lines[0] == "eps,n_components,max_component_diameter,isolated_cell_count"
        assert len(lines) == 3


class TestPeriodicPoints:
    def test_fixed_points_first(self, main_operator, main_prebuilt):
        orbits = find_periodic_points(main_operator, 100, max_len=1, count=8,
                                      prebuilt=main_prebuilt)
        pts = sorted(o.point.real for o in orbits)
        assert pts == pytest.approx([-1.0, 1.0], abs=1e-9)
        # implicit-derivative oracle: |w'(u)| = n / (2 (n)_2 u + n)
        for o in orbits:
            if abs(o.point - 1) < 1e-6:
                assert abs(abs(o.multiplier) - 1.0 / 199.0) < 1e-12

    def test_constant_multiplier_zero(self):
        T = parse_operator("(w^2-1)*D^2")
        orbits = find_periodic_points(T, 4, max_len=1, count=4)
        assert len(orbits) == 2
        for o in orbits:
            assert o.multiplier == 0j
            assert min(abs(o.point - 1), abs(o.point + 1)) < 1e-12

    def test_multiplier_bound(self, main_operator, main_prebuilt):
        sup = main_prebuilt[1].sup_deriv
        orbits = find_periodic_points(main_operator, 100, max_len=4, count=16,
                                      prebuilt=main_prebuilt)
        assert len(orbits) >= 5
        for o in orbits:
            assert abs(o.multiplier) < 1.0
            assert abs(o.multiplier) <= 1.1 * sup ** o.period
            assert o.residual <= 1e-10

    def test_lyndon_counts(self, main_operator, main_prebuilt):
        # distinct orbits of period <= 3 for two branches: 2 + 1 + 2
        orbits = find_periodic_points(main_operator, 100, max_len=3, count=32,
                                      prebuilt=main_prebuilt)
        assert len(orbits) == 5
        periods = sorted(o.period for o in orbits)
        assert periods == [1, 1, 2, 3, 3]

    def test_density_proxy(self, main_operator, main_prebuilt):
        # every occupied cell at eps = 0.05 has an orbit point within 2 eps
        eps = 0.05
        S = min_invariant_set(main_operator, 100, eps, prebuilt=main_prebuilt)
        orbits = find_periodic_points(main_operator, 100, max_len=8, count=64,
                                      prebuilt=main_prebuilt)
        pts = [p for o in orbits for p in o.cycle]
        for c in S.occupied_centers():
            assert min(abs(c - p) for p in pts) <= 2.0 * eps


class TestDiameterLaw:
    def test_generation_diameter_bound(self, main_operator, main_prebuilt):
        # cells first hit at generation m form components no wider than
        # 2 eta0 (2 sup)^m plus two cell diagonals
        eps = 0.005
        cert = main_prebuilt[1]
        S = min_invariant_set(main_operator, 100, eps, prebuilt=main_prebuilt)
        from corrdyn.invset import _component_diameter, _components

        by_gen: dict[int, list] = {}
        for cell, gen in S.cells.items():
            by_gen.setdefault(gen, []).append(cell)
        for m, cells in sorted(by_gen.items()):
            if m == 0:
                continue
            comps = _components(cells)
            worst = max(_component_diameter(c, eps) for c in comps)
            bound = (2.0 * cert.eta0 * (2.0 * cert.sup_deriv) ** m
                     + 2.0 * eps * math.sqrt(2.0))
            assert worst <= bound
