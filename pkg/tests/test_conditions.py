import math

import numpy as np
import pytest

from tractability.complexity import DomainRestriction
from tractability.conditions import (
    CONVERGED,
    DIVERGED,
    INCONCLUSIVE,
    ConditionSpec,
    check_equivalence_prop1,
    default_eps_grid,
    direct_bound_check,
    evaluate,
    sum_kw_pt,
    sum_kw_spt,
    sum_strong,
    sum_strong_restricted,
    sum_subh,
    sum_tract,
    sum_tract_restricted,
)
from tractability.errors import InvalidSpec
from tractability.families import spectrum_family
from tractability.series import envelope_tail, evaluate_series, extrapolated_tail
from tractability.spectrum import GeometricSpectrum, PSeriesSpectrum
from tractability.tfun import HFun, make_tfun

GEO = spectrum_family("geometric", {"ratio": 0.5})
EXP = spectrum_family("geometric", {"ratio": math.exp(-1.0)})
BASEL = spectrum_family("p-series", {"alpha": 2.0})
HARM = spectrum_family("p-series", {"alpha": 1.0})
SLOW = spectrum_family("log-slow", {})


def alg(p, q=0.0):
    return make_tfun("algebraic-polynomial", [p, q])


def expo(p, q=0.0):
    return make_tfun("exponential-polynomial", [p, q])


class TestSeries:
    def test_envelope_bracket_contains_true_tail(self):
        # sum_{i > N} i^-2 against the digamma-free bound 1/N - 1/(2N^2) < tail < 1/N
        for N in (10, 100, 1000):
            est, unc, upper = envelope_tail(lambda u: -2.0 * u, N, exact=True)
            true = sum(1.0 / i ** 2 for i in range(N + 1, 10 ** 6)) + 1e-6
            assert abs(est - true) <= unc + 1e-9
            assert upper >= true - 1e-9

    def test_envelope_refuses_divergent(self):
        assert envelope_tail(lambda u: -1.0 * u, 100, exact=True) is None

    def test_extrapolation_power_law(self):
        idx = np.arange(1, 10001, dtype=float)
        est, kind, s = extrapolated_tail(idx, -3.0 * np.log(idx))
        assert s == pytest.approx(-3.0, abs=1e-9)
        assert est == pytest.approx(10000.0 ** -2 / 2, rel=0.01)

    def test_extrapolation_geometric(self):
        idx = np.arange(1, 2001, dtype=float)
        est, kind, _ = extrapolated_tail(idx, -0.01 * idx)
        true = math.exp(-0.01 * 2001) / (1 - math.exp(-0.01))
        # the larger of the two fits is kept, so the estimate never undershoots
        assert true * (1 - 1e-9) <= est <= 5 * true

    def test_finite_sum_exact(self):
        g = GeometricSpectrum(0.5)
        row = evaluate_series(g, lambda nl, i: -nl, 1, 10)
        assert row.status == "exact"
        assert row.partial_sum == pytest.approx(1 - 2 ** -10, rel=1e-15)

    def test_empty_finite_sum(self):
        row = evaluate_series(GeometricSpectrum(0.5), lambda nl, i: -nl, 5, 4)
        assert row.partial_sum == 0.0 and row.terms_used == 0

    def test_budget_respected(self):
        row = evaluate_series(PSeriesSpectrum(1.0), lambda nl, i: -0.5 * nl, 1, budget=5000)
        assert row.terms_used == 5000
        assert row.status == "diverging"


class TestStrong:
    def test_geometric_sum_is_one(self):
        v = sum_strong(ConditionSpec("strong", GEO, tf=alg(1)))
        assert v.kind == CONVERGED
        assert v.sup_over_d == pytest.approx(1.0, abs=1e-12)

    def test_basel(self):
        v = sum_strong(ConditionSpec("strong", BASEL, tf=alg(1)))
        assert v.kind == CONVERGED
        assert v.sup_over_d == pytest.approx(math.pi ** 2 / 6, abs=1e-6)
        assert all(r["tail_kind"] == "envelope" for r in v.per_d)

    def test_slow_p_series_diverges(self):
        v = sum_strong(ConditionSpec("strong", BASEL, tf=alg(0.4)))
        assert v.kind == DIVERGED
        assert v.per_d[0]["slope_estimate"] == pytest.approx(-0.8, abs=0.01)

    def test_start_index_shifts_sum(self):
        v = sum_strong(ConditionSpec("strong", GEO, tf=alg(1), L=3, d_range=(1,)))
        assert v.sup_over_d == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("L", [0, 1.5])
    def test_bad_L(self, L):
        with pytest.raises(InvalidSpec):
            sum_strong(ConditionSpec("strong", GEO, tf=alg(1), L=L))

    def test_which_checked(self):
        with pytest.raises(InvalidSpec):
            sum_strong(ConditionSpec("tract", GEO, tf=alg(1)))

    def test_missing_tf(self):
        with pytest.raises(InvalidSpec):
            ConditionSpec("strong", GEO)

    def test_d_dependent_strong_sum_flagged(self):
        fam = spectrum_family("d-scaled-geometric", {"ratio": 0.5})
        v = sum_strong(ConditionSpec("strong", fam, tf=alg(1)))
        assert v.kind == INCONCLUSIVE
        assert any("trend" in s for s in v.diagnostics)

    def test_jobs_do_not_change_result(self):
        fam = spectrum_family("d-scaled-geometric", {"ratio": 0.5})
        a = sum_tract(ConditionSpec("tract", fam, tf=alg(1, 2)))
        b = sum_tract(ConditionSpec("tract", fam, tf=alg(1, 2), jobs=4))
        assert a.to_dict() == b.to_dict()

    def test_budget_refinement_keeps_verdict(self):
        for fam, tf, kind in ((BASEL, alg(1), CONVERGED), (BASEL, alg(0.4), DIVERGED),
                              (EXP, expo(2), CONVERGED)):
            for budget in (10 ** 5, 10 ** 6):
                v = sum_strong(ConditionSpec("strong", fam, tf=tf, budget=budget, d_range=(1, 2)))
                assert v.kind == kind


class TestTract:
    def test_geometric_start_at_d(self):
        v = sum_tract(ConditionSpec("tract", GEO, tf=alg(1, 1)))
        assert v.kind == CONVERGED
        for row in v.per_d:
            d = row["d"]
            assert row["start"] == d
            assert row["value"] == pytest.approx(2.0 ** (1 - d) / d, rel=1e-12)
        assert v.sup_over_d == pytest.approx(1.0)

    def test_q_zero_matches_strong(self):
        a = sum_tract(ConditionSpec("tract", BASEL, tf=alg(1, 0)))
        b = sum_strong(ConditionSpec("strong", BASEL, tf=alg(1, 0)))
        assert [r["value"] for r in a.per_d] == [r["value"] for r in b.per_d]

    def test_harmonic_below_boundary_diverges(self):
        v = sum_tract(ConditionSpec("tract", HARM, tf=alg(0.5, 1)))
        assert v.kind == DIVERGED

    def test_harmonic_at_boundary_not_converged(self):
        # slope exactly -1 sits inside the margin, so the rule leaves it open
        v = sum_tract(ConditionSpec("tract", HARM, tf=alg(1, 1), d_range=(1, 2)))
        assert v.kind != CONVERGED


class TestRestricted:
    def test_zero_matches_unrestricted(self):
        for which, base in (("strong-restricted", sum_strong), ("tract-restricted", sum_tract)):
            plain = ConditionSpec(which.split("-")[0], BASEL, tf=alg(1, 1))
            r = ConditionSpec(which, BASEL, tf=alg(1, 1), restriction=DomainRestriction("zero"))
            fn = sum_strong_restricted if which.startswith("strong") else sum_tract_restricted
            a, b = base(plain), fn(r)
            assert a.kind == b.kind
            for x, y in zip(a.per_d, b.per_d):
                assert y["value"] == pytest.approx(x["value"], rel=1e-12)

    def test_large_threshold_gives_zero(self):
        v = sum_strong_restricted(ConditionSpec("strong-restricted", GEO, tf=alg(1),
                                                restriction=DomainRestriction("constant", 0.6)))
        assert v.kind == CONVERGED and v.sup_over_d == 0.0

    def test_harmonic_truncated(self):
        v = sum_strong_restricted(ConditionSpec("strong-restricted", HARM, tf=alg(1),
                                                restriction=DomainRestriction("constant", 0.1)))
        assert v.kind == CONVERGED
        assert v.per_d[0]["terms_used"] == 9
        assert v.sup_over_d == pytest.approx(sum(1.0 / i for i in range(1, 10)), rel=1e-14)

    def test_ub_below_start(self):
        v = sum_tract_restricted(ConditionSpec("tract-restricted", GEO, tf=alg(1, 1), L=4,
                                               restriction=DomainRestriction("constant", 0.2),
                                               d_range=(1, 2)))
        assert v.sup_over_d == 0.0

    def test_requires_restriction(self):
        with pytest.raises(InvalidSpec):
            ConditionSpec("strong-restricted", GEO, tf=alg(1))


WEAK = make_tfun("weak-sum", [1.0, 1.0])


class TestSubH:
    def test_exp_decay_converges_everywhere(self):
        cs = ConditionSpec("sub-h", EXP, tf=WEAK, h=HFun("exp"))
        r = sum_subh(cs, [0.01, 0.1, 1.0])
        assert r.passed

    def test_harmonic_converges_everywhere(self):
        cs = ConditionSpec("sub-h", HARM, tf=WEAK, h=HFun("exp"))
        r = sum_subh(cs, [0.01, 0.1, 1.0])
        assert r.passed
        # summand e^{-c(i + d)}: the d = 1 row is the geometric sum e^{-2c}/(1 - e^{-c})
        c = 1.0
        row = r.per_c[c].per_d[0]
        assert row["value"] == pytest.approx(math.exp(-2 * c) / (1 - math.exp(-c)), rel=1e-9)

    def test_log_slow_fails_for_small_c(self):
        cs = ConditionSpec("sub-h", SLOW, tf=WEAK, h=HFun("exp"))
        r = sum_subh(cs, [0.5, 2.0])
        assert r.per_c[0.5].kind == DIVERGED
        assert r.per_c[2.0].kind == CONVERGED
        assert not r.passed

    def test_c_monotone(self):
        cs = ConditionSpec("sub-h", SLOW, tf=WEAK, h=HFun("exp"), d_range=(1, 2, 3))
        r = sum_subh(cs, [0.25, 1.5, 2.0, 4.0])
        seen = False
        for c in sorted(r.per_c):
            if r.per_c[c].converged:
                seen = True
            elif seen:
                pytest.fail("convergence lost at larger c")

    def test_invalid_c(self):
        cs = ConditionSpec("sub-h", EXP, tf=WEAK, h=HFun("exp"))
        with pytest.raises(InvalidSpec):
            sum_subh(cs, [0.0])

    def test_requires_h(self):
        with pytest.raises(InvalidSpec):
            ConditionSpec("sub-h", EXP, tf=WEAK)


class TestKW:
    def test_exp_decay_converges(self):
        v = sum_kw_spt(ConditionSpec("kw-exp-spt", EXP, tau=0.5))
        assert v.kind == CONVERGED
        ref = math.fsum(math.exp(-math.sqrt(i)) for i in range(1, 20000))
        assert v.sup_over_d == pytest.approx(ref, abs=1e-6)

    def test_harmonic_diverges(self):
        assert sum_kw_spt(ConditionSpec("kw-exp-spt", HARM, tau=0.5)).kind == DIVERGED

    def test_pt_factor_and_start(self):
        v = sum_kw_pt(ConditionSpec("kw-exp-pt", EXP, tau1=1.0, tau2=0.5, tau3=1.0, C=1.0,
                                    d_range=(1, 2, 4)))
        assert v.kind == CONVERGED
        for row in v.per_d:
            d = row["d"]
            ref = math.fsum(math.exp(-math.sqrt(i)) for i in range(d, 20000)) / d
            assert row["value"] == pytest.approx(ref, abs=1e-6)

    def test_invalid(self):
        with pytest.raises(InvalidSpec):
            ConditionSpec("kw-exp-spt", EXP, tau=0.0)
        with pytest.raises(InvalidSpec):
            ConditionSpec("kw-exp-pt", EXP, tau2=0.5, tau1=-1.0)

    def test_korobov_order_is_asserted_and_holds(self):
        fam = spectrum_family("korobov", {"omega": 0.5, "a": [1.0, 2.0], "b": [1.0, 1.0]})
        v = sum_kw_spt(ConditionSpec("kw-exp-spt", fam, tau=0.1, d_range=(1, 2)))
        assert v.kind == CONVERGED


class TestEquivalence:
    def test_geometric_agrees(self):
        rep = check_equivalence_prop1(GEO, d_range=(1, 2, 3))
        assert rep.status == "AGREE"
        assert all(r.exp_side.positive and r.kw_side.positive for r in rep.rows)
        assert all(r.constructive["holds"] for r in rep.rows)

    def test_log_slow_agrees_negative(self):
        rep = check_equivalence_prop1(SLOW, d_range=(1, 2), budget=2 * 10 ** 5)
        assert rep.status == "AGREE"
        assert all(r.exp_side.positive is False and r.kw_side.positive is False for r in rep.rows)

    def test_requires_exponential(self):
        with pytest.raises(InvalidSpec):
            check_equivalence_prop1(GEO, alg(1))


class TestDirectBound:
    def test_geometric_constant(self):
        br = direct_bound_check(GEO, alg(1), "strong", default_eps_grid(1e-6), d_range=(1,))
        assert br.c_hat <= 1.5
        assert not br.exploding

    def test_trivial_grid(self):
        br = direct_bound_check(GEO, alg(1), "strong", [0.5, 0.9], d_range=(1, 2))
        assert br.c_hat == 0.0

    def test_harmonic_exponential_explodes(self):
        br = direct_bound_check(HARM, expo(1), "strong", default_eps_grid(1e-5), d_range=(1,))
        assert br.exploding

    def test_mode(self):
        with pytest.raises(InvalidSpec):
            direct_bound_check(GEO, alg(1), "weak")
