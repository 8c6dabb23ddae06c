"""Isometry group: membership residuals, the induced action on solutions,
the chart action with its analytic Jacobian, and the group operations."""

import numpy as np
import pytest

from ecs_lab.homogeneous import HomogeneousModel
from ecs_lab.isometry_group import (
    IsoElement,
    SElement,
    classify_holonomy,
    hom_C,
    hom_q,
    hom_qp,
    iso_apply,
    iso_compose,
    iso_from_heisenberg,
    iso_identity,
    iso_inverse,
    iso_jacobian,
    omega_scaling_residual,
    pullback_residual,
    s_membership,
    sigma_act,
    sigma_matrix,
)
from ecs_lab.model_geometry import ChartPoint, random_chart_point
from ecs_lab.solution_space import (
    HeisenbergElement,
    heisenberg_mul,
    random_solution,
    zero_solution,
)


def iso_distance(a: IsoElement, b: IsoElement) -> float:
    return max(
        abs(a.sigma.q - b.sigma.q),
        abs(a.sigma.p - b.sigma.p),
        float(np.max(np.abs(a.sigma.C - b.sigma.C))),
        abs(a.r - b.r),
        float(np.max(np.abs(a.u.data() - b.u.data()))),
    )


class TestSMembership:
    def test_dilation_is_structural(self, roster):
        hm = roster[1].hm
        for q in (0.25, 0.5, 2.0, 4.0):
            res = s_membership(hm.model, hm.dilation(q))
            assert max(res.values()) < 1e-12

    def test_sign_diagonal_on_polynomial(self, roster):
        model = roster[0].model
        elem = SElement(1.0, 0.0, np.diag([1.0, -1.0]))
        res = s_membership(model, elem)
        assert max(res.values()) < 1e-14

    def test_dilation_fails_on_polynomial_profile(self, roster):
        model = roster[0].model
        elem = SElement(2.0, 0.0, np.eye(2))
        res = s_membership(model, elem)
        assert res["equivariance_residual"] > 1e-2

    def test_non_isometric_c_detected(self, roster):
        model = roster[0].model
        elem = SElement(1.0, 0.0, np.diag([2.0, 0.5]))
        res = s_membership(model, elem)
        assert res["isometry_residual"] > 1.0
        assert res["conjugation_residual"] < 1e-14

    def test_q_without_matching_c_detected(self, roster):
        hm = roster[1].hm
        elem = SElement(2.0, 0.0, np.eye(2))
        res = s_membership(hm.model, elem)
        assert res["conjugation_residual"] > 1.0
        assert res["equivariance_residual"] < 1e-14

    def test_interval_shift_detected(self, roster):
        hm = roster[1].hm          # interval (0, inf)
        good = hm.dilation(2.0)
        elem = SElement(good.q, 1.0, good.C)
        res = s_membership(hm.model, elem)
        assert res["interval_residual"] >= 1.0

    def test_nonpositive_q_rejected(self):
        with pytest.raises(ValueError):
            SElement(-2.0, 0.0, np.eye(2))
        with pytest.raises(ValueError):
            SElement(0.0, 0.0, np.eye(2))


class TestSigmaAction:
    def test_pointwise_formula(self, roster):
        # sigma . u, built from Cauchy data at the base time alone, must
        # evaluate to C u((t - p)/q) at every other time as well.
        rng = np.random.default_rng(51)
        hm = roster[3].hm
        model = hm.model
        u = random_solution(model, rng)
        for q in (0.5, 3.0):
            elem = hm.dilation(q)
            moved = sigma_act(model, elem, u)
            for t in (0.4, 1.7, 5.0):
                mv, md = moved.at(t)
                uv, ud = u.at((t - elem.p) / q)
                assert np.max(np.abs(mv - elem.C @ uv)) < 1e-9
                assert np.max(np.abs(md - (elem.C @ ud) / q)) < 1e-9

    def test_matrix_matches_action(self, roster):
        rng = np.random.default_rng(52)
        hm = roster[1].hm
        model = hm.model
        elem = hm.dilation(1.7)
        M = sigma_matrix(model, elem, hm.base_t)
        for _ in range(5):
            u = random_solution(model, rng)
            moved = sigma_act(model, elem, u)
            assert np.max(np.abs(M @ u.data() - moved.data())) < 1e-10

    def test_omega_rescales(self, roster, iso_sampler):
        rng = np.random.default_rng(53)
        for entry in (roster[1], roster[3], roster[5]):
            model = entry.model
            pairs = [(random_solution(model, rng), random_solution(model, rng))
                     for _ in range(6)]
            for q in (0.25, 2.0):
                elem = entry.hm.dilation(q)
                assert omega_scaling_residual(model, elem, pairs) < 1e-9

    def test_determinant_character(self, roster):
        from ecs_lab.isometry_group import sigma_det_residual
        for entry in (roster[1], roster[3], roster[5]):
            for q in (0.25, 0.5, 2.0, 4.0):
                elem = entry.hm.dilation(q)
                assert sigma_det_residual(entry.model, elem) < 1e-9


class TestChartAction:
    def test_identity_fixes_points(self, roster):
        rng = np.random.default_rng(61)
        model = roster[2].model
        pt = random_chart_point(model, rng)
        image = iso_identity(model)
        out = iso_apply(model, image, pt)
        assert out.t == pt.t and out.s == pt.s
        assert np.array_equal(out.v, pt.v)

    def test_central_translation_moves_s_only(self, roster):
        model = roster[0].model
        g = IsoElement(SElement(1.0, 0.0, np.eye(2)), 2.5, zero_solution(model))
        pt = ChartPoint(0.3, -1.0, np.array([0.4, 0.7]))
        out = iso_apply(model, g, pt)
        assert out.t == pt.t
        assert np.array_equal(out.v, pt.v)
        assert out.s == pytest.approx(pt.s + 2.5, abs=1e-14)

    def test_dilation_rescales_t(self, roster):
        hm = roster[1].hm
        g = IsoElement(hm.dilation(3.0), 0.0, zero_solution(hm.model))
        pt = ChartPoint(0.7, 0.2, np.array([1.0, -2.0]))
        out = iso_apply(hm.model, g, pt)
        assert out.t == pytest.approx(2.1, abs=1e-14)
        assert out.s == pytest.approx(0.2 / 3.0, abs=1e-14)

    def test_pullback_vanishes_for_group_elements(self, roster, iso_sampler):
        rng = np.random.default_rng(62)
        for entry in roster:
            for g in iso_sampler(entry, rng, 6):
                pt = random_chart_point(entry.model, rng)
                assert pullback_residual(entry.model, g, pt) < 1e-9

    def test_pullback_detects_non_isometry(self, roster):
        rng = np.random.default_rng(63)
        model = roster[0].model
        bad = IsoElement(SElement(1.0, 0.0, np.diag([2.0, 0.5])),
                         0.0, zero_solution(model))
        pt = random_chart_point(model, rng)
        assert pullback_residual(model, bad, pt) > 1e-2

    def test_jacobian_against_finite_differences(self, roster, iso_sampler):
        rng = np.random.default_rng(64)
        h = 1e-6
        for entry in (roster[1], roster[2]):
            model = entry.model
            g = iso_sampler(entry, rng, 1)[0]
            pt = random_chart_point(model, rng)
            x0 = pt.coords()
            J = iso_jacobian(model, g, pt)
            n = model.dim
            fd = np.zeros((n, n))
            for e in range(n):
                step = np.zeros(n)
                step[e] = h
                hi = iso_apply(model, g, ChartPoint.from_coords(x0 + step))
                lo = iso_apply(model, g, ChartPoint.from_coords(x0 - step))
                fd[:, e] = (hi.coords() - lo.coords()) / (2 * h)
            assert np.max(np.abs(J - fd)) < 1e-5


class TestGroupOperations:
    def test_action_is_homomorphism(self, roster, iso_sampler):
        rng = np.random.default_rng(71)
        for entry in roster:
            model = entry.model
            a, b = iso_sampler(entry, rng, 2)
            ab = iso_compose(model, a, b)
            for _ in range(4):
                pt = random_chart_point(model, rng)
                via_product = iso_apply(model, ab, pt)
                via_steps = iso_apply(model, a, iso_apply(model, b, pt))
                assert np.max(np.abs(via_product.coords()
                                     - via_steps.coords())) < 1e-9

    def test_inverse(self, roster, iso_sampler):
        rng = np.random.default_rng(72)
        for entry in (roster[1], roster[4]):
            model = entry.model
            a = iso_sampler(entry, rng, 1)[0]
            inv = iso_inverse(model, a)
            assert iso_distance(iso_compose(model, a, inv),
                                iso_identity(model)) < 1e-9
            assert iso_distance(iso_compose(model, inv, a),
                                iso_identity(model)) < 1e-9
            pt = random_chart_point(model, rng)
            back = iso_apply(model, inv, iso_apply(model, a, pt))
            assert np.max(np.abs(back.coords() - pt.coords())) < 1e-9

    def test_associativity(self, roster, iso_sampler):
        rng = np.random.default_rng(73)
        entry = roster[3]
        model = entry.model
        for _ in range(10):
            a, b, c = iso_sampler(entry, rng, 3)
            lhs = iso_compose(model, iso_compose(model, a, b), c)
            rhs = iso_compose(model, a, iso_compose(model, b, c))
            assert iso_distance(lhs, rhs) < 1e-9

    def test_characters(self, roster, iso_sampler):
        rng = np.random.default_rng(74)
        entry = roster[5]
        model = entry.model
        a, b = iso_sampler(entry, rng, 2)
        ab = iso_compose(model, a, b)
        assert hom_q(ab) == pytest.approx(hom_q(a) * hom_q(b), rel=1e-14)
        qa, pa = hom_qp(a)
        qb, pb = hom_qp(b)
        assert hom_qp(ab) == pytest.approx((qa * qb, qa * pb + pa), rel=1e-14)
        assert np.allclose(hom_C(ab), hom_C(a) @ hom_C(b), atol=1e-13)

    def test_heisenberg_embedding_is_homomorphism(self, roster):
        rng = np.random.default_rng(75)
        model = roster[2].model
        h1 = HeisenbergElement(0.7, random_solution(model, rng))
        h2 = HeisenbergElement(-1.2, random_solution(model, rng))
        lhs = iso_from_heisenberg(model, heisenberg_mul(h1, h2))
        rhs = iso_compose(model, iso_from_heisenberg(model, h1),
                          iso_from_heisenberg(model, h2))
        assert iso_distance(lhs, rhs) < 1e-12


class TestClassifyHolonomy:
    def test_dilational_when_q_moves(self, roster):
        hm = roster[1].hm
        model = hm.model
        els = [iso_identity(model),
               IsoElement(hm.dilation(2.0), 0.0, zero_solution(model))]
        assert classify_holonomy(els) == "dilational"

    def test_translational_when_q_fixed(self, roster):
        rng = np.random.default_rng(81)
        model = roster[0].model
        els = [iso_from_heisenberg(
            model, HeisenbergElement(rng.standard_normal(),
                                     random_solution(model, rng)))
            for _ in range(5)]
        assert classify_holonomy(els) == "translational"
        assert classify_holonomy([]) == "translational"

    def test_nonpositive_q_rejected(self, roster):
        model = roster[0].model
        g = iso_identity(model)
        g.sigma.q = -1.0
        with pytest.raises(ValueError):
            classify_holonomy([g])
