"""Homogeneous models: dilation and generator spectra, the kernel/range
splitting, the commuting-class parametrization, conjugation, and the
commutation criterion with its transitivity consequence.

Hand-frozen spectra used below, from kappa_j = m + 1/2 - 2j -+ c:

    m=2, c=0.3:  {0.2, 0.8, -1.8, -1.2}
    m=2, c=3/2:  {-1, 2, -3, 0}
    m=2, c=1/4, q=4:  sigma_q eigenvalues {sqrt(2), 2 sqrt(2), 4^{-7/4}, 4^{-5/4}}

Every exponent list sums to -m (pair the -+c terms and sum the arithmetic
progression), which the checksum test uses across the grid.
"""

import numpy as np
import pytest

from ecs_lab.homogeneous import (
    HomogeneousModel,
    class_map,
    class_map_inverse,
    commute_test,
    conjugation_matrix,
    conjugation_spectrum_check,
    dilation_spectrum_check,
    expected_kernel_dim,
    exponential_consistency_residual,
    g0_compose,
    g0_distance,
    g0_element,
    g0_identity,
    g0_inverse,
    g0_to_iso,
    generator_matrix,
    generator_spectrum_check,
    normalize_to_standard,
    shifted_invertibility,
    spectral_exponents,
    spectral_split,
    standard_homogeneous_space,
    transitive_commutation_check,
)
from ecs_lab.isometry_group import iso_compose
from ecs_lab.solution_space import omega, zero_solution

GRID = [(2, 0.3), (2, 1.5), (3, 0.25), (3, 0.7j)]


def model_for(m, c):
    return HomogeneousModel.standard(m, c)


def multiset_close(values, expected, tol=1e-6):
    a = np.sort_complex(np.asarray(values, dtype=complex))
    b = np.sort_complex(np.asarray(expected, dtype=complex))
    return np.max(np.abs(a - b)) < tol


class TestSpectralExponents:
    def test_frozen_m2(self):
        kappa = spectral_exponents(2, 0.3)
        assert multiset_close(kappa, [0.2, 0.8, -1.8, -1.2], tol=1e-14)
        kappa = spectral_exponents(2, 1.5)
        assert multiset_close(kappa, [-1.0, 2.0, -3.0, 0.0], tol=1e-14)

    def test_checksum(self):
        for m, c in GRID + [(5, 0.25), (4, 1.3j)]:
            kappa = spectral_exponents(m, c)
            assert abs(kappa.sum() - (-m)) < 1e-12

    def test_imaginary_c_pairs(self):
        kappa = spectral_exponents(2, 0.7j)
        assert multiset_close(kappa, [0.5 - 0.7j, 0.5 + 0.7j,
                                      -1.5 - 0.7j, -1.5 + 0.7j], tol=1e-14)


class TestDilationSpectrum:
    def test_frozen_eigenvalues(self):
        hm = model_for(2, 0.25)
        chk = dilation_spectrum_check(hm, 4.0)
        expected = [np.sqrt(2.0), 2.0 * np.sqrt(2.0),
                    4.0 ** -1.75, 4.0 ** -1.25]
        assert multiset_close(chk.computed, expected)
        assert chk.max_rel_error < 1e-6

    def test_grid(self):
        for m, c in GRID:
            hm = model_for(m, c)
            for q in (0.5, 2.0):
                assert dilation_spectrum_check(hm, q).max_rel_error < 1e-6

    def test_imaginary_c_moduli(self):
        # kappa = base -+ i 0.7, so |q^kappa| = q^base regardless of the
        # imaginary part
        hm = model_for(2, 0.7j)
        q = 3.0
        chk = dilation_spectrum_check(hm, q)
        moduli = np.sort(np.abs(chk.computed))
        expected = np.sort([q ** 0.5, q ** 0.5, q ** -1.5, q ** -1.5])
        assert np.max(np.abs(moduli - expected)) < 1e-6

    def test_determinant_checksum(self):
        # product of eigenvalues is q^{sum kappa} = q^{-m} = q^{2-n}
        hm = model_for(3, 0.25)
        chk = dilation_spectrum_check(hm, 2.0)
        assert abs(np.prod(chk.computed) - 2.0 ** -3) < 1e-9


class TestGeneratorB:
    def test_frozen_spectrum_m2(self):
        hm = model_for(2, 0.3)
        B = generator_matrix(hm)
        eigs = np.linalg.eigvals(B)
        assert multiset_close(eigs, [0.2, 0.8, -1.8, -1.2])

    def test_trace_checksum(self):
        for m, c in GRID:
            hm = model_for(m, c)
            assert abs(np.trace(generator_matrix(hm)) - (-m)) < 1e-8

    def test_grid(self):
        for m, c in GRID:
            hm = model_for(m, c)
            assert generator_spectrum_check(hm).max_rel_error < 1e-6

    def test_exponential_consistency(self):
        for m, c in [(2, 0.3), (3, 1.5)]:
            hm = model_for(m, c)
            B = generator_matrix(hm)
            for q in (0.5, 2.0, 4.0):
                assert exponential_consistency_residual(hm, q, B) < 1e-6


class TestKernelSplit:
    def test_expected_dims(self):
        assert expected_kernel_dim(0.3) == 0
        assert expected_kernel_dim(1.5) == 1
        assert expected_kernel_dim(0.5) == 1
        assert expected_kernel_dim(2.5) == 1
        assert expected_kernel_dim(1.0) == 0
        assert expected_kernel_dim(0.7j) == 0

    def test_split_matches_prediction(self):
        for m, c in GRID + [(3, 1.5)]:
            hm = model_for(m, c)
            split = spectral_split(hm)
            assert split.kernel_dim == expected_kernel_dim(c)

    def test_kernel_annihilated(self):
        hm = model_for(2, 1.5)
        B = generator_matrix(hm)
        split = spectral_split(hm, B)
        assert split.kernel_dim == 1
        assert np.max(np.abs(B @ split.e0)) < 1e-8

    def test_split_is_direct(self):
        hm = model_for(3, 1.5)
        split = spectral_split(hm)
        combined = split.combined()
        assert combined.shape == (6, 6)
        assert abs(np.linalg.det(combined)) > 1e-6
        rng = np.random.default_rng(5)
        data = rng.standard_normal(6)
        plus, zero = split.decompose(data)
        rebuilt = split.eplus @ plus + split.e0 @ zero
        assert np.max(np.abs(rebuilt - data)) < 1e-10


class TestShiftedInvertibility:
    def test_gap_and_kernel(self):
        for m, c in [(2, 0.3), (2, 1.5)]:
            hm = model_for(m, c)
            split = spectral_split(hm)
            for q in (0.25, 0.5, 2.0, 4.0):
                res = shifted_invertibility(hm, q, split)
                assert res["min_singular_value"] > 1e-2
                assert res["kernel_fixed_residual"] < 1e-9
                assert res["range_leak_into_kernel"] < 1e-7


class TestG0:
    def rand_element(self, hm, rng, q=None):
        if q is None:
            q = float(np.exp(rng.uniform(-np.log(3.0), np.log(3.0))))
        return g0_element(hm, q, float(rng.standard_normal()),
                          rng.standard_normal(2 * hm.m))

    def test_group_axioms(self):
        rng = np.random.default_rng(91)
        hm = model_for(2, 1.5)
        e = g0_identity(hm)
        for _ in range(5):
            a = self.rand_element(hm, rng)
            b = self.rand_element(hm, rng)
            c = self.rand_element(hm, rng)
            assert g0_distance(g0_compose(hm, a, g0_inverse(hm, a)), e) < 1e-9
            assert g0_distance(g0_compose(hm, g0_inverse(hm, a), a), e) < 1e-9
            lhs = g0_compose(hm, g0_compose(hm, a, b), c)
            rhs = g0_compose(hm, a, g0_compose(hm, b, c))
            assert g0_distance(lhs, rhs) < 1e-9

    def test_embedding_agrees_with_full_group(self):
        rng = np.random.default_rng(92)
        hm = model_for(3, 0.25)
        a = self.rand_element(hm, rng)
        b = self.rand_element(hm, rng)
        via_g0 = g0_to_iso(hm, g0_compose(hm, a, b))
        via_iso = iso_compose(hm.model, g0_to_iso(hm, a), g0_to_iso(hm, b))
        assert abs(via_g0.sigma.q - via_iso.sigma.q) < 1e-12
        assert abs(via_g0.r - via_iso.r) < 1e-10
        assert np.max(np.abs(via_g0.u.data() - via_iso.u.data())) < 1e-10

    def test_nonpositive_q_rejected(self):
        hm = model_for(2, 0.3)
        with pytest.raises(ValueError):
            g0_element(hm, -1.0, 0.0, np.zeros(4))


class TestCommuteTest:
    def test_identity_commutes_with_everything(self):
        rng = np.random.default_rng(93)
        hm = model_for(2, 0.3)
        e = g0_identity(hm)
        for _ in range(5):
            g = g0_element(hm, float(np.exp(rng.normal())),
                           float(rng.normal()), rng.standard_normal(4))
            chk = commute_test(hm, e, g)
            assert chk.direct and chk.criterion

    def test_center_does_not_commute_with_dilations(self):
        # (1, r, 0) with r != 0 fails against q != 1: conjugation scales the
        # center by 1/q, and the criterion's central equation r (1 - 1/q) != 0
        # says the same thing.
        hm = model_for(2, 0.3)
        central = g0_element(hm, 1.0, 2.0, np.zeros(4))
        dil = g0_element(hm, 2.0, 0.0, np.zeros(4))
        chk = commute_test(hm, central, dil)
        assert not chk.direct and not chk.criterion
        assert chk.direct_residual == pytest.approx(1.0, abs=1e-12)

    def test_heisenberg_pair(self):
        hm = model_for(2, 0.3)
        e1 = np.eye(4)[0]
        e_conj = np.eye(4)[3]     # deriv slot paired to e1 by the flip Gram
        a = g0_element(hm, 1.0, 0.0, e1)
        b = g0_element(hm, 1.0, 0.0, e_conj)
        chk = commute_test(hm, a, b)
        assert not chk.direct and not chk.criterion
        # Omega-orthogonal data commutes
        c = g0_element(hm, 1.0, 0.0, np.eye(4)[1])
        chk2 = commute_test(hm, a, c)
        assert chk2.direct and chk2.criterion

    def test_same_class_members_commute(self):
        rng = np.random.default_rng(94)
        for m, c in [(2, 0.3), (2, 1.5)]:
            hm = model_for(m, c)
            split = spectral_split(hm)
            z = split.eplus @ rng.standard_normal(split.eplus.shape[1])
            w = split.e0 @ rng.standard_normal(split.kernel_dim) \
                if split.kernel_dim else np.zeros(2 * hm.m)
            a_label = 0.8
            x = class_map(hm, a_label, z, 2.0, w)
            y = class_map(hm, a_label, z, 0.3, w)
            chk = commute_test(hm, x, y)
            assert chk.direct and chk.criterion
            assert chk.direct_residual < 1e-10

    def test_routes_agree_on_random_pairs(self):
        rng = np.random.default_rng(95)
        hm = model_for(2, 1.5)
        disagreements = 0
        for _ in range(200):
            a = g0_element(hm, float(np.exp(rng.uniform(-1.2, 1.2))),
                           float(rng.normal()), rng.standard_normal(4))
            b = g0_element(hm, float(np.exp(rng.uniform(-1.2, 1.2))),
                           float(rng.normal()), rng.standard_normal(4))
            if not commute_test(hm, a, b).agree:
                disagreements += 1
        assert disagreements == 0


class TestTransitivity:
    def test_no_counterexamples(self):
        rng = np.random.default_rng(96)
        for m, c in [(2, 0.3), (2, 1.5)]:
            hm = model_for(m, c)
            split = spectral_split(hm)
            rep = transitive_commutation_check(hm, split, 40, rng)
            assert rep.triples == 40
            assert rep.premise_failures == 0
            assert rep.counterexamples == 0
            assert rep.worst_conclusion_residual < 1e-8


class TestClassMap:
    def test_round_trip_from_labels(self):
        rng = np.random.default_rng(97)
        for m, c in [(2, 0.3), (2, 1.5), (3, 1.5)]:
            hm = model_for(m, c)
            split = spectral_split(hm)
            for _ in range(10):
                a = float(rng.standard_normal())
                z = split.eplus @ rng.standard_normal(split.eplus.shape[1])
                w = split.e0 @ rng.standard_normal(split.kernel_dim) \
                    if split.kernel_dim else np.zeros(2 * hm.m)
                q = float(np.exp(rng.uniform(-np.log(4.0), np.log(4.0))))
                if abs(q - 1.0) < 0.05:
                    q *= 1.3
                g = class_map(hm, a, z, q, w)
                a2, z2, q2, w2 = class_map_inverse(hm, g, split)
                assert abs(a2 - a) < 1e-8
                assert q2 == q
                assert np.max(np.abs(z2 - z)) < 1e-8
                assert np.max(np.abs(w2 - w)) < 1e-8

    def test_round_trip_from_element(self):
        rng = np.random.default_rng(98)
        hm = model_for(2, 1.5)
        split = spectral_split(hm)
        for _ in range(10):
            g = g0_element(hm, float(np.exp(rng.uniform(0.1, 1.0))),
                           float(rng.normal()), rng.standard_normal(4))
            a, z, q, w = class_map_inverse(hm, g, split)
            back = class_map(hm, a, z, q, w)
            assert g0_distance(back, g) < 1e-8

    def test_q_one_rejected(self):
        hm = model_for(2, 0.3)
        g = g0_element(hm, 1.0, 0.5, np.ones(4))
        with pytest.raises(ValueError):
            class_map_inverse(hm, g)


class TestConjugation:
    def test_matrix_matches_group_conjugation(self):
        rng = np.random.default_rng(99)
        hm = model_for(2, 0.3)
        g = g0_element(hm, 1.7, 0.4, rng.standard_normal(4))
        M = conjugation_matrix(hm, g)
        ginv = g0_inverse(hm, g)
        for _ in range(5):
            h = g0_element(hm, 1.0, float(rng.normal()),
                           rng.standard_normal(4))
            conj = g0_compose(hm, g0_compose(hm, g, h), ginv)
            assert abs(conj.q - 1.0) < 1e-12
            vec = np.concatenate([[h.r], h.u.data()])
            out = M @ vec
            assert abs(out[0] - conj.r) < 1e-9
            assert np.max(np.abs(out[1:] - conj.u.data())) < 1e-9

    def test_spectrum_prediction(self):
        rng = np.random.default_rng(100)
        for m, c in [(2, 0.3), (2, 1.5), (3, 0.25)]:
            hm = model_for(m, c)
            for _ in range(4):
                q = float(np.exp(rng.uniform(-np.log(3.0), np.log(3.0))))
                if abs(q - 1.0) < 0.05:
                    q *= 1.2
                g = g0_element(hm, q, float(rng.normal()),
                               rng.standard_normal(2 * hm.m))
                assert conjugation_spectrum_check(hm, g).max_rel_error < 1e-6

    def test_frozen_example(self):
        hm = model_for(2, 0.25)
        g = g0_element(hm, 2.0, 0.3, np.array([0.1, -0.2, 0.4, 0.0]))
        chk = conjugation_spectrum_check(hm, g)
        expected = [0.5, 2.0 ** 0.25, 2.0 ** 0.75, 2.0 ** -1.75, 2.0 ** -1.25]
        assert multiset_close(chk.computed, expected)


class TestStandardSpace:
    def test_shift_and_gram(self):
        space, A = standard_homogeneous_space(3)
        assert np.array_equal(A, np.eye(3, k=1))
        assert np.array_equal(space.gram, np.fliplr(np.eye(3)))
        # self-adjointness of the shift for the anti-diagonal Gram
        assert np.max(np.abs(space.gram @ A - A.T @ space.gram)) == 0.0

    def test_base_anchored_at_one(self):
        hm = model_for(2, 0.3)
        assert hm.base_t == 1.0
        assert zero_solution(hm.model).base_t == 1.0


class TestNormalizeToStandard:
    def test_known_values(self):
        q, p, c = normalize_to_standard(2.0, 0.0)
        assert (q, p) == (1.0, 0.0) and c == 1.5 + 0j
        q, p, c = normalize_to_standard(-0.25, 1.0)
        assert p == -1.0 and c == 0j
        _, _, c = normalize_to_standard(-0.5, 0.0)
        assert c == 0.5j

    def test_flat_case_makes_invalid_model(self):
        # h = 0 maps to c = 1/2, whose profile is identically zero; the
        # validated constructor refuses it
        _, _, c = normalize_to_standard(0.0, 0.0)
        assert c == 0.5 + 0j
        with pytest.raises(ValueError):
            HomogeneousModel.standard(2, c)
