import math
from fractions import Fraction

import pytest

from hyperdiff.errors import ConfigError, PreconditionError
from hyperdiff.families import (
    GrowthRule,
    _circle_scan,
    check_property_P,
    check_property_Q,
    check_property_R,
    circle_min,
    density_demo,
    make_family,
    positive_rational,
    unicity_exponent,
)
from hyperdiff.scalars import QComplex
from hyperdiff.series import PolynomialOperator, TaylorPolynomial


class TestRationalEnumeration:
    def test_first_values(self):
        got = [positive_rational(i) for i in range(1, 11)]
        want = [
            Fraction(1),
            Fraction(1, 2),
            Fraction(2),
            Fraction(1, 3),
            Fraction(1),
            Fraction(3),
            Fraction(1, 4),
            Fraction(2, 3),
            Fraction(3, 2),
            Fraction(4),
        ]
        assert got == want

    def test_determinism_across_instances(self):
        a = make_family("F3")
        b = make_family("F3")
        for n in (1, 5, 17, 40):
            assert a.op(n) == b.op(n)


class TestMakeFamily:
    def test_f1_coefficients(self):
        op = make_family("F1").op(2)
        assert op.coefficient(2) == QComplex(Fraction(1, 4))
        assert op.coefficient(3) == QComplex(1)

    def test_f4_monomial(self):
        op = make_family("F4").op(5)
        assert op.valence == op.degree == 5
        assert op.coefficient(5) == QComplex(1)

    def test_f3_first_operator(self):
        op = make_family("F3").op(1)  # z(z - 1)
        assert op.coefficient(1) == QComplex(-1) and op.coefficient(2) == QComplex(1)

    def test_unknown_tag(self):
        with pytest.raises(ConfigError):
            make_family("F9")

    def test_bad_params(self):
        with pytest.raises(ConfigError):
            make_family("F2", {"c_mode": "weird"})
        with pytest.raises(ConfigError):
            make_family("F4", {"c": "0"})
        with pytest.raises(ConfigError):
            make_family("F1", {"c": "1"})

    def test_f4_decay_regime(self):
        seq = make_family("F4", {"decay": "pow2cubic"})
        assert seq.op(2).coefficient(2) == QComplex(Fraction(1, 2**8))
        # |c_n|^(1/n^2) = 2^-n -> 0
        for n in (2, 4, 6):
            assert seq.log_coeff(n, n).log / n**2 == pytest.approx(-n * math.log(2))

    def test_metadata_consistency_n_up_to_50(self):
        fams = [
            make_family("F1"),
            make_family("F2"),
            make_family("F2", {"c_mode": "unit"}),
            make_family("F3"),
            make_family("F4"),
        ]
        for seq in fams:
            for n in range(1, 51):
                op = seq.op(n)
                support = [j for j, _ in op.terms()]
                assert seq.valence(n) == min(support)
                assert seq.degree(n) == max(support)

    def test_escorts_match_exact_coefficients(self):
        for tag in ("F1", "F3", "F4"):
            seq = make_family(tag)
            for n in (2, 7, 19):
                for j, c in seq.op(n).terms():
                    from hyperdiff.scalars import LogMagnitude

                    assert seq.log_coeff(n, j).log == pytest.approx(
                        LogMagnitude.of(c).log, rel=1e-12, abs=1e-12
                    )

    def test_f5_table(self):
        ops = [PolynomialOperator({n: QComplex(1)}) for n in range(3, 9)]
        seq = make_family("F5", {"ops": ops})
        assert seq.op(1) == ops[0]
        with pytest.raises(PreconditionError):
            seq.op(7)


class TestPropertyP:
    def test_f3_supports_on_negative_samples(self):
        rep = check_property_P(make_family("F3"), [QComplex(-2), QComplex(-3), QComplex(-5)], (1, 40))
        assert rep.verdict == "supports"

    def test_f4_supports_on_circle_samples(self):
        rep = check_property_P(make_family("F4"), [complex(2, 0), complex(0, 2)], (1, 60))
        assert rep.verdict == "supports"

    def test_f1_refutes_inside_unit_disk(self):
        rep = check_property_P(make_family("F1"), [QComplex(Fraction(1, 2))], (1, 60))
        assert rep.verdict == "refutes"
        assert rep.witness is not None

    def test_empty_samples_rejected(self):
        with pytest.raises(PreconditionError):
            check_property_P(make_family("F1"), [], (1, 10))


class TestPropertyQ:
    def test_f2_supports_k_up_to_3(self):
        rep = check_property_Q(make_family("F2"), 3, (2, 200))
        assert rep.verdict == "supports"

    def test_f1_refutes_at_k_2_with_exact_witness(self):
        rep = check_property_Q(make_family("F1"), 2, (1, 60))
        assert rep.verdict == "refutes"
        assert rep.witness["k"] == 2
        stats = rep.tracks["growth"][2]
        for n, stat in zip(range(1, 61), stats):
            assert abs(stat - (1 - 2) * math.log(n)) <= 1e-9 * max(1.0, abs(stat))

    def test_f4_unit_supports(self):
        rep = check_property_Q(make_family("F4"), 4, (1, 60))
        assert rep.verdict == "supports"
        # statistic is exactly m(n) = n
        assert rep.tracks["growth"][1][-1] == pytest.approx(math.log(60))


class TestPropertyR:
    def test_f1_supports_at_r_2(self):
        rep = check_property_R(make_family("F1"), 2.0, (1, 40), 256)
        assert rep.verdict == "supports"
        # certified lower bound tracks r^n (2 - n^-n) up to the sampling
        # correction (pi r / M) sup|P'|, which at M=256 eats about half of it
        lower = rep.tracks["lower_log"]
        assert lower[-1] >= 40 * math.log(2) + math.log(0.5)
        assert lower[-1] <= 40 * math.log(2) + math.log(2.0)

    def test_f3_refutes_with_near_root_witnesses(self):
        for r in (1.0, 2.0, 3.0):
            rep = check_property_R(make_family("F3"), r, (1, 40), 256)
            assert rep.verdict == "refutes", r
            hits = rep.witness["vanishing"]
            assert len(hits) >= 2
            for n, log_val in hits:
                assert log_val < -n * math.log(2)

    def test_f2_refutes_at_unit_circle(self):
        rep = check_property_R(make_family("F2"), 1.0, (2, 100), 256)
        assert rep.verdict == "refutes"

    def test_f4_unit_inconclusive_at_unit_circle(self):
        rep = check_property_R(make_family("F4"), 1.0, (1, 60), 256)
        assert rep.verdict in ("inconclusive", "refutes")


class TestCircleMin:
    def test_monomial_exact(self):
        for n in (1, 5, 64):
            got = circle_min(PolynomialOperator({n: QComplex(1)}), 2.0, 64)
            assert got.log == pytest.approx(n * math.log(2))

    def test_root_on_circle_gives_zero(self):
        p = PolynomialOperator({0: QComplex(-1), 1: QComplex(1)})
        assert circle_min(p, 1.0, 256).is_zero

    def test_quadratic_example(self):
        p = PolynomialOperator({0: QComplex(-2), 2: QComplex(1)})
        val = circle_min(p, 1.0, 1024).value()
        assert abs(val - 1.0) < 0.05

    def test_lower_bound_below_sampled_min(self):
        for coeffs in ({0: QComplex(-2), 2: QComplex(1)}, {1: QComplex(3), 4: QComplex(-1)}):
            p = PolynomialOperator(coeffs)
            for r in (0.5, 1.0, 2.5):
                lower, upper = _circle_scan(p, r, 128)
                assert lower.log <= upper.log + 1e-12

    def test_sample_floor(self):
        with pytest.raises(PreconditionError):
            circle_min(PolynomialOperator({0: QComplex(1), 1: QComplex(1)}), 1.0, 32)


class TestUnicityExponent:
    def test_sqrt_points(self):
        est = unicity_exponent(lambda n: math.sqrt(n), 1e6)
        assert abs(est.chi - 2.0) <= 0.1
        assert est.unicity_supported

    def test_linear_points(self):
        est = unicity_exponent(lambda n: float(n), 1e6)
        assert abs(est.chi - 1.0) <= 0.05
        assert not est.unicity_supported

    def test_exponential_points(self):
        est = unicity_exponent(lambda n: 2.0**n, 1e6)
        assert est.chi < 0.35
        assert not est.unicity_supported

    def test_counting_monotone_and_stable_under_doubling(self):
        est1 = unicity_exponent(lambda n: math.sqrt(n), 1e6)
        est2 = unicity_exponent(lambda n: math.sqrt(n), 2e6)
        assert abs(est1.chi - est2.chi) < 0.02
        assert all(b >= a for a, b in zip(est1.counts, est1.counts[1:]))

    def test_explicit_list_source(self):
        pts = [math.sqrt(n) for n in range(1, 20001)]
        est = unicity_exponent(pts, 100.0)
        assert abs(est.chi - 2.0) <= 0.1

    def test_too_few_points(self):
        with pytest.raises(PreconditionError):
            unicity_exponent([1.0, 2.0, 3.0], 1e3)


class TestDensityDemo:
    def test_zero_target(self):
        combo, fit = density_demo([-1.0, -1.1], TaylorPolynomial.zero(), 1.0, 2)
        assert fit.residual_max <= 1e-12

    def test_identity_target_monotone_residuals(self):
        samples = [-1.0 - k / 10 for k in range(8)]
        target = TaylorPolynomial.monomial(1)
        resids = []
        for m_terms in (2, 4, 6, 8):
            _, fit = density_demo(samples, target, 1.0, m_terms)
            resids.append(fit.residual_max)
        assert all(b <= a + 1e-10 for a, b in zip(resids, resids[1:]))
        # frozen from the build-time least-squares oracle on this fixed grid
        assert resids[-1] < 2e-3

    def test_conditioning_reported(self):
        samples = [-1.0 - k / 10 for k in range(8)]
        _, fit = density_demo(samples, TaylorPolynomial.monomial(1), 1.0, 8)
        assert fit.condition > 1.0
        assert fit.ill_conditioned == (fit.condition > 1e12)

    def test_m_terms_cap(self):
        with pytest.raises(PreconditionError):
            density_demo([-1.0], TaylorPolynomial.zero(), 1.0, 2)


class TestGrowthRule:
    def test_supports_needs_threshold(self):
        ns = list(range(1, 41))
        logs = [0.1 * n for n in ns]
        verdict, _ = GrowthRule(threshold_log=100.0).classify(ns, logs)
        assert verdict == "inconclusive"
        verdict, _ = GrowthRule(threshold_log=1.0).classify(ns, logs)
        assert verdict == "supports"

    def test_oscillating_but_growing_supports(self):
        ns = list(range(1, 41))
        logs = [2.0 * n + (10.0 if n % 7 == 0 else 0.0) for n in ns]
        verdict, _ = GrowthRule(threshold_log=20.0).classify(ns, logs)
        assert verdict == "supports"

    def test_decay_refutes(self):
        ns = list(range(1, 41))
        logs = [-0.5 * n for n in ns]
        verdict, info = GrowthRule(vanish_hits=None).classify(ns, logs)
        assert verdict == "refutes" and "decay" in info

    def test_short_sweep_inconclusive(self):
        verdict, _ = GrowthRule().classify([1, 2, 3], [1.0, 2.0, 3.0])
        assert verdict == "inconclusive"


class TestF2OpenQuestions:
    def test_empirical_behavior_straddles_e(self):
        # |P_n(z)| ~ (|z|/e)^n up to slow factors: decay inside |z| < e,
        # growth outside; the checker records what it sees, no hard-coding
        seq = make_family("F2")
        grown = check_property_P(seq, [complex(4.0, 0.0)], (2, 200))
        assert grown.verdict == "supports"
        shrunk = check_property_P(seq, [complex(2.0, 0.0)], (2, 200))
        assert shrunk.verdict == "refutes"

    def test_log_base_parameter_changes_constants(self):
        nat = make_family("F2")
        base2 = make_family("F2", {"log_base": "2"})
        n = 20
        c_nat = nat.log_coeff(n, n).log
        c_two = base2.log_coeff(n, n).log
        assert c_two == pytest.approx(c_nat * math.log(2), rel=1e-12)
