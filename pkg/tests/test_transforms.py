import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbtop import AdmissibilityError, ScalingParams, apply_transform, predict, validate_params
from sbtop.transforms import (coupled_incorrect_scaling, feasible_c_range, feasible_offset_ranges,
                              solve_scaling, transformed_pF, verify_invariance)

from conftest import params_strategy, random_params, reference_design_2x2, reference_old, reference_with_jprime

REFERENCE_SCALING = dict(c=1.6, e=3.0, f=1.0, tF_star_jprime=4.0, j_prime=1)


def reference_scaling(params, kC=0.0, tE_star=2.0):
    return ScalingParams(kC=kC, tE_star_jprime=tE_star, **REFERENCE_SCALING)


def random_scaling(rng, params):
    """In-bounds Tw-preserving scaling with c drawn inside the feasible range."""
    c_min, c_max = feasible_c_range(params)
    c_hi = min(c_max, 3.0)
    c_lo = max(c_min, 0.2)
    while True:
        c = rng.uniform(c_lo, c_hi)
        pF_new = transformed_pF(params, c)
        live = np.flatnonzero((pF_new > 0.01) & (pF_new < 0.99))
        if live.size:
            break
    e, f = rng.uniform(-3, 3, 2)
    return ScalingParams.preserving(params, c, e, f, rng.uniform(-5, 5), j_prime=int(live[0]))


class TestReferenceExample:
    def test_hand_substitution(self):
        # c = 1.6 checked against each formula independently of the implementation.
        c, e, f, tFj = 1.6, 3.0, 1.0, 4.0
        pB, pD, pF, tB, tD, tF, tA = 0.5, 0.4, 0.16, 2.0, 4.0, 5.0, 4.5
        pFj, tFjold = 0.20, 8.0
        assert c * pB == pytest.approx(0.8)
        assert pF / c + (c - 1) * pD / c == pytest.approx(0.25)
        assert tB + f == 3.0 and tD + e == 7.0
        tF_new = (pF * tF + f * (pFj - pF) + tFj * (pFj + (c - 1) * pD) - pFj * tFjold) / (pF + (c - 1) * pD)
        assert tF_new == pytest.approx(2.5, abs=1e-12)
        bracket = (tB - tD) * (1 - c) + (f + tFj) * (1 - c - pFj / pD) + pFj * tFjold / pD + c * e
        assert ((1 - pB) * tA + pB * bracket - e) / (1 - c * pB) == pytest.approx(7.5, abs=1e-12)

    def test_unit_scale_does_not_reproduce(self):
        s = ScalingParams(c=1.0, e=3.0, f=1.0, kC=0.0, j_prime=1, tF_star_jprime=4.0, tE_star_jprime=2.0)
        new = apply_transform(reference_with_jprime(), s)
        assert new.pB[0] == pytest.approx(0.5)
        assert abs(new.tA[0] - 7.5) > 0.1

    def test_maps_old_to_new(self):
        new = apply_transform(reference_with_jprime(), reference_scaling(reference_with_jprime()))
        expected = dict(pA=0.2, pB=0.8, pD=0.4, pF=0.25, tA=7.5, tB=3.0, tD=7.0, tF=2.5)
        for name, value in expected.items():
            assert np.atleast_1d(getattr(new, name))[0] == pytest.approx(value, abs=1e-12), name
        assert new.tF[1] == 4.0

    def test_predictions_match(self):
        old = reference_with_jprime()
        new = apply_transform(old, reference_scaling(old))
        a, b = predict(old), predict(new)
        assert a.P[0, 0] == pytest.approx(0.28, abs=1e-12) and b.P[0, 0] == pytest.approx(0.28, abs=1e-12)
        assert a.P[0, 0] * a.T[0, 0] == pytest.approx(2.26, abs=1e-12)
        assert b.P[0, 0] * b.T[0, 0] == pytest.approx(2.26, abs=1e-12)

    def test_solve_scaling_recovers_constants(self):
        old = reference_with_jprime()
        new = apply_transform(old, reference_scaling(old))
        s = solve_scaling(old, new, j_prime=1)
        assert (s.c, s.e, s.f) == pytest.approx((1.6, 3.0, 1.0), abs=1e-12)

    def test_feasible_c_range(self):
        assert feasible_c_range(reference_old()) == pytest.approx((0.6, 2.0))

    def test_offset_ranges(self):
        p = reference_design_2x2().replace(tB=[2.0, 5.0], tC=0.0)
        lows = feasible_offset_ranges(p)
        assert lows == {"f": -2.0, "e": -4.0, "kC": 0.0}


class TestBounds:
    def test_pB_one_caps_c(self):
        p = reference_design_2x2().replace(pB=[1.0, 0.5], pA=[0.0, 0.5])
        assert feasible_c_range(p)[1] == pytest.approx(1.0)

    def test_c_too_large(self):
        p = reference_with_jprime()
        s = ScalingParams(c=2.5, e=0, f=0, kC=0, j_prime=1, tF_star_jprime=8.0, tE_star_jprime=2.0)
        with pytest.raises(AdmissibilityError, match="1/max"):
            apply_transform(p, s)

    def test_negative_offset_rejected_in_nonnegative_mode(self):
        p = reference_with_jprime()
        s = ScalingParams(c=1.0, e=-5.0, f=0, kC=0, j_prime=1, tF_star_jprime=8.0, tE_star_jprime=2.0)
        with pytest.raises(AdmissibilityError, match="e >= -4"):
            apply_transform(p, s)
        unrestricted = p.replace(measure_mode="unrestricted")
        assert apply_transform(unrestricted, s).tD == pytest.approx(-1.0)

    def test_zero_pD(self):
        p = reference_with_jprime().replace(pD=0.0, pC=1.0)
        s = ScalingParams(c=1.0, e=0, f=0, kC=0, j_prime=1, tF_star_jprime=8.0, tE_star_jprime=2.0)
        with pytest.raises(AdmissibilityError, match="pD"):
            apply_transform(p, s)

    def test_bad_reference_level(self):
        p = reference_with_jprime()
        s = ScalingParams(c=1.0, e=0, f=0, kC=0, j_prime=5, tF_star_jprime=8.0, tE_star_jprime=2.0)
        with pytest.raises(AdmissibilityError, match="j'"):
            apply_transform(p, s)

    def test_lenient_zero_psi_arc(self):
        # c = c_min drives pF* at level 0 to 0. With tF*(1) = 20 the product on that
        # arc also vanishes (.16*5 + .04*20 - .20*8 = 0), so the arc can be dropped.
        p = reference_design_2x2()
        c_min, _ = feasible_c_range(p)
        assert c_min == pytest.approx(0.6)
        s = ScalingParams.preserving(p, c_min, 0.0, 0.0, 20.0, j_prime=1)
        with pytest.raises(AdmissibilityError, match="zero denominator"):
            apply_transform(p, s)
        new = apply_transform(p, s, strict=False)
        assert new.pF[0] == pytest.approx(0.0, abs=1e-12)
        assert new.tF[0] == 0.0
        assert verify_invariance(p, new).passed

    def test_lenient_rejects_lost_product(self):
        p = reference_design_2x2()
        s = ScalingParams.preserving(p, 0.6, 0.0, 0.0, 6.0, j_prime=1)
        with pytest.raises(AdmissibilityError, match="nonzero numerator"):
            apply_transform(p, s, strict=False)


@settings(max_examples=200, deadline=None)
@given(params_strategy())
def test_unit_scale_always_feasible(params):
    c_min, c_max = feasible_c_range(params)
    assert c_min <= 1.0 <= c_max


class TestInvariance:
    def test_identity(self, rng):
        p = random_params(rng, 3, 3)
        s = ScalingParams(c=1.0, e=0.0, f=0.0, kC=0.0, j_prime=0,
                          tF_star_jprime=p.tF[0], tE_star_jprime=p.tE[0])
        new = apply_transform(p, s)
        for name in ("pB", "pF", "tA", "tB", "tE", "tF"):
            np.testing.assert_allclose(getattr(new, name), getattr(p, name), atol=1e-12)

    def test_mis_set_tD_detected(self):
        old = reference_design_2x2()
        new = apply_transform(old, ScalingParams.preserving(old, 1.6, 3.0, 1.0, 4.0, j_prime=1))
        bad = new.replace(tD=new.tD + 0.1)
        report = verify_invariance(old, bad, tol=1e-9)
        assert not report.passed
        assert report.max_T > 1e-3

    def test_uncoupled_incorrect_side_breaks_Tw(self, rng):
        for _ in range(20):
            p = random_params(rng, mode="unrestricted")
            s = random_scaling(rng, p)
            loose = ScalingParams(c=s.c, e=s.e, f=s.f, kC=s.kC + 1.0, j_prime=s.j_prime,
                                  tF_star_jprime=s.tF_star_jprime, tE_star_jprime=s.tE_star_jprime + 1.0)
            report = verify_invariance(p, apply_transform(p, loose, strict=False))
            assert report.max_P <= 1e-9 and report.max_T <= 1e-9
            assert report.max_Tw > 1e-3

    def test_coupling_is_identity_at_unit_scale(self, rng):
        p = random_params(rng, 3, 3)
        kC, tE = coupled_incorrect_scaling(p, 1.0, 0.0, 0.0, 1, p.tF[1])
        assert kC == 0.0
        assert tE == pytest.approx(p.tE[1], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(params_strategy(mode="unrestricted"), st.integers(0, 2**32 - 1))
def test_preserving_scaling_is_invariant(params, seed):
    rng = np.random.default_rng(seed)
    s = random_scaling(rng, params)
    new = apply_transform(params, s, strict=False)
    assert verify_invariance(params, new, tol=1e-9).passed
    assert new.pD == params.pD and new.pC == params.pC
    assert validate_params(new) == []


@settings(max_examples=100, deadline=None)
@given(params_strategy(mode="unrestricted"), st.integers(0, 2**32 - 1))
def test_solve_scaling_round_trip(params, seed):
    rng = np.random.default_rng(seed)
    s = random_scaling(rng, params)
    new = apply_transform(params, s, strict=False)
    got = solve_scaling(params, new, tol=1e-7, j_prime=s.j_prime)
    assert (got.c, got.e, got.f, got.kC) == pytest.approx((s.c, s.e, s.f, s.kC), abs=1e-7)


@settings(max_examples=100, deadline=None)
@given(params_strategy(mode="unrestricted"), st.integers(0, 2**32 - 1))
def test_composition_stays_in_class(params, seed):
    rng = np.random.default_rng(seed)
    mid = apply_transform(params, random_scaling(rng, params), strict=False)
    end = apply_transform(mid, random_scaling(rng, mid), strict=False)
    assert verify_invariance(params, end, tol=1e-8).passed
    s = solve_scaling(params, end, tol=1e-6)
    assert s.c == pytest.approx(end.pB[0] / params.pB[0], rel=1e-9)


class TestSolveScaling:
    def test_identity(self, rng):
        p = random_params(rng, 3, 2)
        s = solve_scaling(p, p)
        assert (s.c, s.e, s.f, s.kC) == pytest.approx((1.0, 0.0, 0.0, 0.0))

    def test_pD_change_not_admissible(self, rng):
        p = random_params(rng, 3, 2)
        q = p.replace(pD=min(p.pD + 0.05, 0.99), pC=1 - min(p.pD + 0.05, 0.99))
        with pytest.raises(AdmissibilityError, match="not admissible"):
            solve_scaling(p, q)

    def test_unequal_pB_ratio(self, rng):
        p = random_params(rng, 3, 2)
        pB = p.pB.copy()
        pB[0] *= 0.9
        with pytest.raises(AdmissibilityError, match="not admissible"):
            solve_scaling(p, p.replace(pB=pB, pA=1 - pB))

    def test_measure_mismatch(self):
        old = reference_with_jprime()
        new = apply_transform(old, reference_scaling(old))
        with pytest.raises(AdmissibilityError, match="tA"):
            solve_scaling(old, new.replace(tA=new.tA + 0.5), j_prime=1)

    def test_json_round_trip(self):
        s = reference_scaling(reference_with_jprime())
        assert ScalingParams.from_dict(s.to_dict()) == s
        assert set(s.to_dict()) == {"c", "e", "f", "kC", "jPrime", "tFStarJPrime", "tEStarJPrime"}
        with pytest.raises(ValueError, match="missing"):
            ScalingParams.from_dict({"c": 1.0})
