import numpy as np
import pytest

from berezin.errors import DomainError, UnsupportedSpaceError
from berezin.ranges import (DiscGrid, closed_form_radius, estimate_berezin_radius,
                            find_nonconvexity_witness, locate_berezin_radius, match_closed_form,
                            pattern_search, real_interval_summary, real_part_value, sample_range,
                            symmetry_defect)
from berezin.rkhs import BERGMAN, HARDY, AnalyticPolynomial, FiniteRankOperator, SpaceSpec, berezin_transform

from conftest import rank_one

mono = AnalyticPolynomial.monomial
SMALL = DiscGrid(60, 64, 0.999)


def brute_radial_max(profile, r_max=1 - 1e-9, n=2_000_001):
    """Maximum of a radial profile by dense sampling (independent oracle)."""
    r = np.linspace(0.0, r_max, n)
    return float(np.max(profile(r)))


class TestGrid:
    def test_points(self):
        g = DiscGrid(3, 4, 0.5)
        p = g.points()
        assert len(p) == len(g) == 12
        assert np.allclose(np.abs(p[:4]), 0)
        assert np.allclose(p[8:], 0.5 * np.exp(2j * np.pi * np.arange(4) / 4))
        assert np.max(np.abs(DiscGrid().points())) <= 0.999

    @pytest.mark.parametrize("args", [(1, 4, 0.5), (3, 0, 0.5), (3, 4, 1.0), (3, 4, 0.0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            DiscGrid(*args)


class TestSampleRange:
    def test_interval_example(self):
        s = sample_range(rank_one(HARDY, mono(1), mono(1)))
        assert len(s) == 51200
        assert np.all(s.values.imag == 0)
        assert s.values.real.min() >= 0 and s.values.real.max() <= 0.25

    def test_zero_operator(self):
        s = sample_range(FiniteRankOperator.zero(BERGMAN), SMALL)
        assert np.all(s.values == 0)
        assert real_interval_summary(s) == (0.0, 0.0)

    def test_values_match_transform(self):
        op = rank_one(BERGMAN, [1, 2j], [0, 1, 1])
        s = sample_range(op, SMALL)
        assert np.array_equal(s.values, berezin_transform(op, s.lambdas))
        assert s.records().shape == (len(SMALL), 4)
        assert s.points[5] == (s.lambdas[5], s.values[5])

    def test_circle_profile(self):
        grid = DiscGrid(50, 360, 0.95)
        s = sample_range(rank_one(HARDY, mono(1), mono(2)), grid)
        r = np.abs(s.lambdas)
        assert np.allclose(np.abs(s.values), r ** 3 - r ** 5, atol=1e-15)

    def test_rotation_invariance_of_range(self):
        # g = z, h = z^3: the range is invariant under multiplication by e^{2 pi i/2}
        grid = DiscGrid(40, 64, 0.95)
        s = sample_range(rank_one(HARDY, mono(1), mono(3)), grid)
        rotated = -s.values
        d = np.min(np.abs(rotated[:, None] - s.values[None, :]), axis=1)
        assert d.max() <= 1e-10

    def test_finite_rejected(self):
        with pytest.raises(UnsupportedSpaceError):
            sample_range(rank_one(SpaceSpec("finite", 2), [1], [1]))


class TestPatternSearch:
    def test_quadratic(self):
        z, f = pattern_search(lambda x: np.abs(x - (0.3 - 0.2j)) ** 2, [0.0, 0.5j])
        assert np.allclose(z, 0.3 - 0.2j, atol=1e-9)

    def test_stays_in_disc(self):
        z, _ = pattern_search(lambda x: -np.abs(x), [0.5], rmax=0.9)
        assert abs(z[0]) <= 0.9 + 1e-15 and abs(z[0]) > 0.9 - 1e-9


class TestRadius:
    def test_examples(self):
        assert estimate_berezin_radius(rank_one(HARDY, mono(2), mono(2))) == pytest.approx(4 / 27, abs=1e-9)
        assert estimate_berezin_radius(rank_one(BERGMAN, mono(1), mono(1))) == pytest.approx(4 / 27, abs=1e-9)
        assert estimate_berezin_radius(FiniteRankOperator.zero(HARDY)) == 0.0
        ber, arg = locate_berezin_radius(rank_one(HARDY, mono(1), mono(1)))
        assert abs(abs(arg) ** 2 - 0.5) < 1e-4

    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_hardy_monomial_against_radial_oracle(self, n):
        oracle = brute_radial_max(lambda r: (1 - r * r) * r ** (2 * n))
        assert closed_form_radius("hardy_monomial", n) == pytest.approx(oracle, abs=1e-11)
        assert estimate_berezin_radius(rank_one(HARDY, mono(n), mono(n))) == pytest.approx(oracle, abs=1e-9)

    @pytest.mark.parametrize("m,n", [(2, 1), (5, 2), (4, 0)])
    def test_disc_against_radial_oracle(self, m, n):
        hardy = brute_radial_max(lambda r: (1 - r * r) * r ** (m + n))
        bergman = brute_radial_max(lambda r: (1 - r * r) ** 2 * r ** (m + n))
        assert closed_form_radius("hardy_disc", n=n, m=m) == pytest.approx(hardy, abs=1e-11)
        assert closed_form_radius("bergman_disc", n=n, m=m) == pytest.approx(bergman, abs=1e-11)

    def test_bergman_monomial_against_radial_oracle(self):
        for n in (1, 2, 6):
            oracle = brute_radial_max(lambda r: (1 - r * r) ** 2 * r ** (2 * n))
            assert closed_form_radius("bergman_monomial", n) == pytest.approx(oracle, abs=1e-11)

    def test_equal_moduli_against_radial_oracle(self):
        for n, a in ((2, 1.0), (4, 0.5)):
            prof = lambda r: a * a * (1 - r * r) * sum(r ** (2 * i) for i in range(1, n + 1))
            assert closed_form_radius("hardy_equal_moduli", n, modulus=a) == pytest.approx(
                brute_radial_max(prof), abs=1e-11)

    def test_named_examples(self):
        assert closed_form_radius("hardy_disc", n=1, m=2) == pytest.approx(np.sqrt(3 / 5) * 6 / 25, abs=1e-15)
        assert closed_form_radius("bergman_disc", n=1, m=2) == pytest.approx(np.sqrt(3 / 7) * 48 / 343, abs=1e-15)
        assert closed_form_radius("hardy_monomial", 1) == 0.25
        assert closed_form_radius("hardy_compact_diagonal", modulus=0.5) == 0.25

    def test_compact_diagonal_sup_unattained(self):
        from berezin.rkhs import truncated_diagonal_operator
        est = estimate_berezin_radius(truncated_diagonal_operator(0.6, 40), SMALL)
        # finite truncation: 0.36 (r^2 - r^82), strictly below the supremum 0.36
        oracle = brute_radial_max(lambda r: 0.36 * (r ** 2 - r ** 82))
        assert est == pytest.approx(oracle, abs=1e-9)
        assert est < closed_form_radius("hardy_compact_diagonal", modulus=0.6)

    @pytest.mark.parametrize("kw", [dict(family="bogus"), dict(family="hardy_monomial", n=0),
                                    dict(family="hardy_disc", m=1, n=1),
                                    dict(family="hardy_equal_moduli", n=2),
                                    dict(family="hardy_compact_diagonal", modulus=1.0),
                                    dict(family="bergman_monomial", n=1.5)])
    def test_domain_errors(self, kw):
        with pytest.raises(DomainError):
            closed_form_radius(**kw)

    def test_refinement_monotone(self):
        op = rank_one(HARDY, [1, 1], [1, 0, 1])
        coarse = estimate_berezin_radius(op, DiscGrid(20, 16, 0.999))
        fine = estimate_berezin_radius(op, DiscGrid(200, 256, 0.999))
        assert fine >= coarse - 1e-10


class TestMatchClosedForm:
    def test_tags(self):
        assert match_closed_form(rank_one(HARDY, mono(2), mono(2)))[0] == "hardy_monomial(2)"
        assert match_closed_form(rank_one(HARDY, mono(0), mono(1))) == ("hardy_disc(1,0)", pytest.approx(2 / (3 * np.sqrt(3))))
        assert match_closed_form(rank_one(BERGMAN, mono(2), mono(1)))[0] == "bergman_disc(2,1)"
        assert match_closed_form(rank_one(HARDY, [1, 1], [1])) is None
        assert match_closed_form(rank_one(SpaceSpec("finite", 2), [1], [1])) is None

    def test_scaling(self):
        tag, r = match_closed_form(rank_one(HARDY, mono(1, 2j), mono(1, 0.5)))
        assert r == pytest.approx(0.25)

    def test_equal_moduli(self):
        terms = tuple((mono(i, 0.5j ** i / abs(0.5j ** i) * 0.5),) * 2 for i in range(1, 4))
        op = FiniteRankOperator(HARDY, terms)
        tag, r = match_closed_form(op)
        assert tag.startswith("hardy_equal_moduli(3,")
        assert estimate_berezin_radius(op) == pytest.approx(r, abs=1e-9)


class TestSymmetry:
    def test_real_coefficients(self):
        assert symmetry_defect(rank_one(HARDY, [1, 1], [1, 0, 1])) <= 1e-12
        assert symmetry_defect(FiniteRankOperator.zero(HARDY)) == 0

    def test_complex_coefficients(self):
        op = rank_one(HARDY, mono(1, 1j), mono(1))
        # hand value at lambda = 0.5: (1 - 0.25) * conj(0.5i) * 0.5 = -0.1875i
        assert berezin_transform(op, 0.5) == pytest.approx(-0.1875j)
        assert symmetry_defect(op, DiscGrid(3, 1, 0.5)) == pytest.approx(0.375)


class TestRealSummary:
    def test_cor_example(self):
        terms = ((mono(1), mono(1)), (mono(2), mono(2)))
        s = sample_range(FiniteRankOperator(HARDY, terms))
        lo, hi = real_interval_summary(s)
        assert lo == 0.0
        assert hi == pytest.approx(np.sqrt(1 / 3) * 2 / 3, abs=1e-4)
        assert hi <= np.sqrt(1 / 3) * 2 / 3 + 1e-15

    def test_complex_values(self):
        op = rank_one(HARDY, mono(1), mono(2))
        assert abs(berezin_transform(op, 0.5 * np.exp(1j * np.pi / 4)).imag) > 0.01
        assert real_interval_summary(sample_range(op, SMALL)) is None


class TestRealPart:
    def test_at_origin(self):
        op = FiniteRankOperator(HARDY, (([2, 1], [3j + 1, 5]), ([1j], [1j])))
        assert real_part_value(op, 0) == pytest.approx((2 * (1 + 3j) + 1).real)

    def test_domain(self):
        with pytest.raises(DomainError):
            real_part_value(rank_one(HARDY, [1], [1]), 1.0)


class TestWitness:
    nonconvex = ([1, 1], [1, 0, 1])

    @pytest.mark.parametrize("space", [HARDY, BERGMAN])
    def test_found(self, space):
        w = find_nonconvexity_witness(rank_one(space, *self.nonconvex))
        assert w is not None and w.gap > 1e-3
        # witness endpoints are genuine Berezin values
        op = rank_one(space, *self.nonconvex)
        for bv in (w.w1, w.w2, w.nearest):
            assert berezin_transform(op, bv.lam) == pytest.approx(bv.value, abs=1e-14)
        assert w.midpoint == pytest.approx(0.5 * (w.w1.value + w.w2.value))
        assert abs(w.nearest.value - w.midpoint) == pytest.approx(w.gap)
        d = w.to_dict()
        assert set(d) == {"w1", "w2", "midpoint", "gap", "nearest"}

    def test_deterministic(self):
        op = rank_one(HARDY, *self.nonconvex)
        a = find_nonconvexity_witness(op, SMALL, seed=3)
        b = find_nonconvexity_witness(op, SMALL, seed=3)
        assert a == b

    @pytest.mark.parametrize("g,h", [(mono(1), mono(1)), (mono(1), mono(2)), (mono(2), mono(2))])
    def test_convex_examples(self, g, h):
        assert find_nonconvexity_witness(rank_one(HARDY, g, h)) is None
