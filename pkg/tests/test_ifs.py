import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from homcantor.ifs import (ConstantsConfig, IFSError, Incommensurable, PerturbationError,
                           auto_c2, closeness, common_ratio, dumps, from_config, load, loads,
                           make_ifs, middle_alpha, perturb, refine, save, threshold_N,
                           to_config, validate)

from conftest import cantor_sets


class TestValidate:
    def test_middle_third_ok(self, cantor):
        assert validate(cantor) == []

    def test_overlap_reported_with_labels(self):
        bad = validate(make_ifs([0, F(1, 4)], F(1, 3)))
        kinds = {v.invariant for v in bad}
        assert "disjointness" in kinds
        assert ("0", "1") in [v.labels for v in bad if v.invariant == "disjointness"]

    def test_hull_mismatch(self):
        bad = validate(make_ifs([0, F(2, 3)], F(1, 3), hull=2))
        assert any(v.invariant == "hull" and "4/3" in v.detail for v in bad)

    def test_total_on_garbage(self):
        assert validate(make_ifs([0], F(3, 2), hull=-1))


class TestMiddleAlpha:
    def test_third(self):
        K = middle_alpha(F(1, 3))
        assert K.ratio == F(1, 3) and K.offsets == (0, F(2, 3))
        assert K.dimension() == pytest.approx(0.63093, abs=1e-5)

    def test_two_fifths(self):
        K = middle_alpha("0.4")
        assert K.ratio == F(2, 5) and K.offsets == (0, F(3, 5))

    def test_three_tenths_dimension(self):
        assert middle_alpha(F(3, 10)).dimension() == pytest.approx(0.57571, abs=1e-5)

    @pytest.mark.parametrize("a", [0, F(1, 2), F(-1, 4), 1])
    def test_out_of_range(self, a):
        with pytest.raises(IFSError):
            middle_alpha(a)


class TestRefine:
    def test_identity(self, cantor):
        assert refine(cantor, 1) == cantor

    def test_depth_two_by_hand(self, cantor):
        R = refine(cantor, 2)
        assert R.size == 4 and R.ratio == F(1, 9)
        assert sorted(R.offsets) == [0, F(2, 9), F(2, 3), F(8, 9)]
        assert R.offset("01") == F(2, 9)

    def test_zero_rejected(self, cantor):
        with pytest.raises(IFSError):
            refine(cantor, 0)

    @given(cantor_sets(3), st.integers(1, 3))
    def test_cylinders_match_words(self, K, n):
        R = refine(K, n)
        import itertools
        words = {"".join(w): K.word_cylinder(w) for w in itertools.product(K.labels, repeat=n)}
        assert sorted(R.cylinders().values()) == sorted(words.values())

    @given(cantor_sets(3), st.integers(1, 4))
    def test_valid_and_same_dimension(self, K, n):
        R = refine(K, n)
        assert validate(R) == []
        # log|A|^n / log(1/r^n): the rational exponent pair scales by n on both sides
        assert (R.size, R.ratio) == (K.size ** n, K.ratio ** n)
        assert math.isclose(R.dimension(), K.dimension(), rel_tol=1e-12)

    @given(cantor_sets(2), st.integers(1, 2), st.integers(1, 2))
    def test_composition(self, K, m, n):
        a, b = refine(refine(K, m), n), refine(K, m * n)
        assert sorted(a.offsets) == sorted(b.offsets) and a.ratio == b.ratio


class TestCommonRatio:
    def test_equal(self, cantor):
        assert common_ratio(cantor, cantor) == (cantor, cantor)

    def test_square(self):
        # no valid set has ratio 1/2, but refinement only needs the offsets
        quarter = make_ifs([0, F(3, 4)], F(1, 4))
        half = make_ifs([0, F(1, 2)], F(1, 2))
        A, B = common_ratio(quarter, half)
        assert A == quarter
        assert B.ratio == F(1, 4) and B.size == 4

    def test_mixed_powers(self):
        A, B = common_ratio(refine(middle_alpha(F(1, 3)), 2), middle_alpha(F(1, 3)))
        assert A.ratio == B.ratio == F(1, 9)

    def test_incommensurable(self, cantor):
        with pytest.raises(Incommensurable):
            common_ratio(cantor, make_ifs([0, F(1, 2)], F(1, 2)))

    def test_cap(self):
        K, Kp = middle_alpha(F(1, 3)), refine(middle_alpha(F(1, 3)), 5)
        with pytest.raises(Incommensurable):
            common_ratio(K, Kp, cap=4)
        assert common_ratio(K, Kp, cap=5)[0].ratio == F(1, 3) ** 5


class TestPerturb:
    def test_zero(self, cantor):
        R = refine(cantor, 2)
        assert perturb(R, ["01"], {"01": 0}, 5) == R

    def test_small_shift_by_hand(self, cantor):
        R = refine(cantor, 2)
        P = perturb(R, ["01"], {"01": 1}, F(1, 10))
        assert P.offset("01") == F(7, 30)
        assert validate(P) == []

    def test_collision(self, cantor):
        R = refine(cantor, 2)
        with pytest.raises(PerturbationError, match="01"):
            perturb(R, ["01"], {"01": 1}, 5)

    def test_endmost_rejected(self, cantor):
        with pytest.raises(PerturbationError, match="endmost"):
            perturb(refine(cantor, 2), ["00"], {"00": F(1, 100)}, 1)

    def test_omega_range(self, cantor):
        with pytest.raises(PerturbationError):
            perturb(refine(cantor, 2), ["01"], {"01": F(3, 2)}, F(1, 100))

    def test_hull_scaled(self):
        K = refine(middle_alpha(F(1, 3)), 2).scaled(2)
        P = perturb(K, ["01"], {"01": 1}, F(1, 10))
        assert P.offset("01") - K.offset("01") == F(1, 10) * F(1, 9) * 2

    @given(st.lists(st.fractions(-1, 1, max_denominator=64), min_size=2, max_size=2),
           st.fractions(0, F(1, 5), max_denominator=50))
    def test_closeness_bound(self, ws, c0):
        R = refine(middle_alpha(F(1, 3)), 2)
        omega = dict(zip(["01", "10"], ws))
        P = perturb(R, omega, omega, c0)
        assert closeness(R, P) <= c0 * max(abs(w) for w in ws)


class TestCloseness:
    def test_self(self, cantor):
        assert closeness(cantor, cantor) == 0

    def test_incomparable(self, cantor):
        assert closeness(cantor, middle_alpha(F(2, 5))) is None

    def test_exact_value(self, cantor):
        R = refine(cantor, 2)
        P = perturb(R, ["01", "10"], {"01": F(1, 2), "10": F(-1, 4)}, F(1, 10))
        assert closeness(R, P) == F(1, 20)


class TestConfigFiles:
    @given(cantor_sets())
    def test_round_trip_bit_exact(self, K):
        text = dumps(K)
        assert dumps(loads(text)) == text
        assert loads(text) == K

    def test_alpha_form(self, tmp_path):
        K = from_config({"hull": "1", "ratio": "alpha 3/10"})
        assert K == middle_alpha(F(3, 10))
        assert to_config(K)["ratio"] == "alpha 3/10"
        save(K, tmp_path / "k.json")
        assert load(tmp_path / "k.json") == K
        assert (tmp_path / "k.json").read_text() == dumps(K)

    def test_strings_are_exact(self):
        text = dumps(make_ifs([0, F(2, 3)], F(1, 3)))
        assert '"2/3"' in text and "0.66" not in text

    @pytest.mark.parametrize("text", ["{", "{}", '{"ratio": "1/3"}', '{"ratio": "x", "offsets": []}'])
    def test_bad_config(self, text):
        with pytest.raises(IFSError):
            loads(text)


class TestConstants:
    def test_default_c0(self):
        assert ConstantsConfig().amplitude(1) == 5
        assert ConstantsConfig().amplitude(F(1, 2)) == 4

    def test_warnings(self):
        assert ConstantsConfig(c0=F(2)).validate(1)
        assert ConstantsConfig(c2=F(-1)).validate(1)
        assert ConstantsConfig().validate(1) == []

    @given(st.integers(2, 6), st.integers(1, 3))
    def test_auto_c2_hits_target(self, target, n):
        K = refine(middle_alpha(F(3, 10)), n)
        c2 = auto_c2(K, K, target)
        assert threshold_N(K, K, c2) >= target
        assert threshold_N(K, K, c2 - F(1, 100)) < target or c2 == F(1, 100)
