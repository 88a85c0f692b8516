import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorlab.covering import (
    LambdaSpec,
    count,
    depth_window,
    lambda_classes,
    lambda_oracle,
    lambda_sandwich,
    parse_rho,
)
from cantorlab.dimensions import assouad_value, compute_D, lower_value
from cantorlab.errors import DomainError, TooLarge, UnsupportedModel, UnsupportedPrefix
from cantorlab.loglength import LogLength, Ordering, ll_cmp
from cantorlab.models import ConstantC, McMullenModel, SymmetricModel, fat_cantor_model
from cantorlab.recipes import default_star
from cantorlab.symbolic import Word

MC = McMullenModel()
STAR = default_star()
THIRD = SymmetricModel(ConstantC(Fraction(1, 3)))
SYM101 = McMullenModel(Fraction(1, 3), 101)


def pow2(K):
    return LogLength.pow2(-K)


# ---------------------------------------------------------------- examples


def test_half_scale_stops_at_depth_one():
    r = lambda_oracle(LambdaSpec(MC, LogLength.of_rational(Fraction(1, 2))), keep_words=True)
    assert r.count == 2
    assert r.words == ["0", "1"]


def test_inverse_base_scale_both_branches_stop():
    rho = LogLength.of_int(128, -1)
    # The fixture verdicts: "0" ties exactly, "1" is strictly shorter.
    assert ll_cmp(MC.length(Word.parse("0")), rho) is Ordering.Equal
    assert ll_cmp(MC.length(Word.parse("1")), rho) is Ordering.Less
    r = lambda_oracle(LambdaSpec(MC, rho), keep_words=True)
    assert r.count == 2
    assert r.words == ["0", "1"]


def test_constant_third_at_one_ninth_is_all_length_two_words():
    r = lambda_oracle(LambdaSpec(THIRD, LogLength.of_rational(Fraction(1, 9))), keep_words=True)
    assert r.count == 4
    assert r.words == ["00", "01", "10", "11"]
    assert lambda_classes(LambdaSpec(THIRD, LogLength.of_rational(Fraction(1, 9)))).count == 4


def test_rho_must_lie_below_one():
    with pytest.raises(DomainError):
        LambdaSpec(MC, LogLength.one())


# ---------------------------------------------------------------- route agreement


@pytest.mark.parametrize("model", [MC, STAR, SYM101], ids=["mcmullen", "star", "beta-third-M101"])
def test_oracle_and_class_counters_agree(model):
    for j in range(1, 25):
        spec = LambdaSpec(model, pow2(j))
        o = lambda_oracle(spec)
        fast = lambda_classes(spec, with_classes=True)
        lit = lambda_classes(spec, histogram=True)
        assert o.count == fast.count == lit.count, j
        assert o.histogram() == fast.histogram() == lit.histogram(), j


@pytest.mark.parametrize("prefix", ["111111", "000000", "1" * 13, "00", "1"])
def test_localised_counts_agree(prefix):
    u = Word.parse(prefix)
    for j in range(1, 19):
        spec = LambdaSpec(STAR, pow2(j), u)
        o = lambda_oracle(spec)
        fast = lambda_classes(spec, with_classes=True)
        lit = lambda_classes(spec, histogram=True)
        assert o.count == fast.count == lit.count, (prefix, j)
        assert o.histogram() == fast.histogram() == lit.histogram(), (prefix, j)


def test_symmetric_classes_agree_with_oracle():
    fat = fat_cantor_model()
    for j in range(1, 16):
        for m in (THIRD, fat):
            spec = LambdaSpec(m, pow2(j))
            assert lambda_oracle(spec).count == lambda_classes(spec).count


def test_non_dyadic_rho_agrees():
    for rho in (Fraction(1, 3), Fraction(5, 7919), Fraction(2, 3) ** 17):
        spec = LambdaSpec(MC, LogLength.of_rational(rho))
        assert lambda_oracle(spec).count == lambda_classes(spec).count


# ---------------------------------------------------------------- properties


@settings(max_examples=40)
@given(st.integers(2, 2**20 - 1))
def test_cover_is_prefix_free_and_complete(m):
    rho = Fraction(m, 2**21)
    r = lambda_oracle(LambdaSpec(MC, LogLength.of_rational(rho)), keep_words=True)
    assert r.completeness == 1
    words = r.words
    assert len(set(words)) == len(words)
    ws = set(words)
    for w in words:
        assert not any(w[:i] in ws for i in range(1, len(w)))


def _stated_window(r_lo_base, r_hi_base, rho_log):
    L = -rho_log
    return L / math.log(r_lo_base), 2 * L / math.log(r_hi_base)


@pytest.mark.parametrize("j", range(6, 25))
def test_member_depths_obey_the_stated_bounds(j):
    r = lambda_oracle(LambdaSpec(MC, pow2(j)), keep_words=True)
    lo, hi = _stated_window(2 * MC.M, MC.M / 2, pow2(j).log_approx())
    assert all(lo <= len(w) <= hi for w in r.words)
    w_lo, w_hi = depth_window(MC, pow2(j))
    assert w_lo <= r.depth_bounds[0] and r.depth_bounds[1] <= w_hi


@pytest.mark.parametrize("prefix", ["1" * 6, "0" * 6])
def test_localised_member_depths_obey_the_stated_bounds(prefix):
    u = Word.parse(prefix)
    for j in range(8, 19):
        r = lambda_oracle(LambdaSpec(STAR, pow2(j), u), keep_words=True)
        lo, hi = _stated_window(2 * STAR.M + 2, STAR.M / 2, pow2(j).log_approx())
        assert all(lo <= len(w) <= hi for w in r.words)


@pytest.mark.parametrize("model,r_min", [(MC, Fraction(1, 256)), (STAR, Fraction(1, 258))])
def test_member_lengths_sit_just_below_rho(model, r_min):
    for j in (3, 9, 15, 21):
        rho = pow2(j)
        r = lambda_oracle(LambdaSpec(model, rho), keep_words=True)
        floor = rho * LogLength.of_rational(r_min)
        for w in r.words:
            ell = model.length(Word.parse(w))
            assert ll_cmp(ell, rho) is not Ordering.Greater
            assert ll_cmp(floor, ell) is Ordering.Less


def test_binomial_entropy_bounds_on_used_classes():
    r = lambda_classes(LambdaSpec(MC, pow2(400)), with_classes=True)
    mpmath.mp.prec = 96
    seen = set()
    for n, n1, n2, _ in r.classes:
        b = n // 2
        seen.add((b, n1))
        seen.add((n - b, n2))
    for n, k in seen:
        p = mpmath.mpf(k) / n
        H = -(p * mpmath.log(p) if k else 0) - ((1 - p) * mpmath.log(1 - p) if k < n else 0)
        c = mpmath.mpf(math.comb(n, k))
        assert mpmath.exp(n * H) / (n + 1) <= c <= mpmath.exp(n * H)


# ---------------------------------------------------------------- errors and parsing


def test_leaf_guard_trips(monkeypatch):
    monkeypatch.setenv("CANTORLAB_MAX_LEAVES", "1000")
    with pytest.raises(TooLarge):
        lambda_oracle(LambdaSpec(MC, pow2(120)))
    # The class counter has no such guard.
    assert lambda_classes(LambdaSpec(MC, pow2(120))).count > 1000


def test_general_prefix_is_refused_by_classes_then_falls_back():
    spec = LambdaSpec(STAR, pow2(12), Word.parse("0110"))
    with pytest.raises(UnsupportedPrefix):
        lambda_classes(spec)
    r = count(spec)
    assert r.method == "oracle"
    assert r.count == lambda_oracle(spec).count


def test_unknown_model_is_refused():
    class Odd:
        beta = Fraction(1, 2)

        def length(self, w):
            return LogLength.pow2(-len(w))

    with pytest.raises(UnsupportedModel):
        lambda_classes(LambdaSpec(Odd(), pow2(4)))


@pytest.mark.parametrize(
    "text,K",
    [("2^-20", 20), ("2^(-7)", 7), ("2^-1/2", Fraction(1, 2)), (" 2^-300 ", 300)],
)
def test_parse_rho_powers(text, K):
    assert parse_rho(text) == LogLength.pow2(-Fraction(K))


def test_parse_rho_rational_and_refusals():
    assert parse_rho("3/8") == LogLength.of_rational(Fraction(3, 8))
    for bad in ("0.5", "1e-3", "2^-x", "abc", "1/0"):
        with pytest.raises(DomainError):
            parse_rho(bad)


# ---------------------------------------------------------------- sandwich and slopes


def test_sandwich_at_half():
    assert lambda_sandwich(STAR, LogLength.of_rational(Fraction(1, 2))) == (2, 2, 2)


def test_sandwich_holds_and_becomes_strict():
    lo, mid, hi = lambda_sandwich(STAR, pow2(100))
    assert lo <= mid <= hi
    lo, mid, hi = lambda_sandwich(STAR, pow2(700))
    assert lo < mid < hi


def test_fine_scale_slope_near_box_dimension():
    D = compute_D(math.log(128), Fraction(1, 2)).D
    r = lambda_classes(LambdaSpec(MC, pow2(700)))
    assert r.count.bit_length() > 90
    assert abs(r.slope - D) < 0.02


def test_parallel_counting_matches_serial():
    spec = LambdaSpec(MC, pow2(300))
    assert lambda_classes(spec, workers=3).count == lambda_classes(spec).count


@pytest.mark.slow
def test_localised_slopes_track_assouad_and_lower_values():
    a = assouad_value(STAR.M, STAR.beta)[1]
    low = lower_value(STAR.M, STAR.beta)[1]
    Ks = (500, 1000, 2000)
    up = [lambda_classes(LambdaSpec(STAR, pow2(K), Word.parse("1^5040"))).slope for K in Ks]
    down = [lambda_classes(LambdaSpec(STAR, pow2(K), Word.parse("0^5040"))).slope for K in Ks]
    # Both families settle monotonically onto their formula values from above.
    assert up[0] > up[1] > up[2] > a and up[2] - a < 0.002
    assert down[0] > down[1] > down[2] > low and down[2] - low < 0.002
