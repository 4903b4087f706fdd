import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hyperdiff.scalars import (
    LogMagnitude,
    QComplex,
    falling_factorial,
    format_scalar,
    log_lt,
    parse_real,
    parse_scalar,
    scale_by_int,
)

rationals = st.fractions(min_value=-100, max_value=100, max_denominator=50)


@st.composite
def qcomplexes(draw):
    return QComplex(draw(rationals), draw(rationals))


class TestQComplex:
    def test_field_axioms_spot(self):
        a = QComplex(Fraction(1, 3), Fraction(-2, 7))
        b = QComplex(Fraction(5, 2), Fraction(1, 11))
        assert (a + b) - b == a
        assert (a * b) / b == a
        assert a * QComplex(1) == a

    @given(qcomplexes(), qcomplexes())
    def test_mul_commutes(self, a, b):
        assert a * b == b * a

    @given(qcomplexes())
    def test_division_inverts(self, a):
        if not a:
            return
        assert (a * a) / a == a

    def test_integer_power(self):
        a = QComplex(1, 1)
        assert a**2 == QComplex(0, 2)
        assert a**0 == QComplex(1)

    def test_float_mix_rejected(self):
        with pytest.raises(TypeError):
            QComplex(1) + 0.5

    def test_abs_squared_exact(self):
        assert QComplex(Fraction(3, 5), Fraction(4, 5)).abs_squared() == 1


class TestLogMagnitude:
    def test_zero_identity(self):
        z = LogMagnitude.zero()
        one = LogMagnitude.one()
        assert z.is_zero and (z * one).is_zero
        assert (z + one).log == 0.0
        assert z.value() == 0.0

    def test_huge_products_no_overflow(self):
        big = LogMagnitude.of(Fraction(2**100000))
        bigger = big * big * big
        assert math.isfinite(bigger.log)
        assert bigger.log == pytest.approx(300000 * math.log(2))

    @given(st.floats(min_value=-500, max_value=500), st.floats(min_value=-500, max_value=500))
    def test_add_is_log_sum(self, x, y):
        got = LogMagnitude(x) + LogMagnitude(y)
        assert got.value() == pytest.approx(math.exp(x) + math.exp(y), rel=1e-12)

    def test_of_exact_fraction_matches_float(self):
        fr = Fraction(355, 113)
        assert LogMagnitude.of(fr).log == pytest.approx(math.log(355 / 113))

    def test_of_complex_parts(self):
        assert LogMagnitude.of(QComplex(0, Fraction(-7))).log == pytest.approx(math.log(7))
        assert LogMagnitude.of(QComplex(3, 4)).log == pytest.approx(math.log(5))

    def test_sum_empty_and_overflow_free(self):
        assert LogMagnitude.sum([]).is_zero
        items = [LogMagnitude(1000.0), LogMagnitude(999.0)]
        assert LogMagnitude.sum(items).log == pytest.approx(1000.0 + math.log1p(math.exp(-1)))


class TestFallingFactorial:
    @given(st.integers(min_value=0, max_value=200), st.integers(min_value=0, max_value=200))
    def test_matches_perm(self, m, s):
        assert falling_factorial(m, s) == (math.perm(m, s) if s <= m else 0)

    def test_large_run_equals_factorial_ratio(self):
        assert falling_factorial(5000, 3000) == math.factorial(5000) // math.factorial(2000)

    def test_full_run_is_factorial(self):
        assert falling_factorial(300, 300) == math.factorial(300)


class TestGuardedCompare:
    def test_strict_inequality_with_guard(self):
        assert log_lt(1.0, 2.0)
        assert not log_lt(2.0, 2.0)
        assert not log_lt(2.0, 2.0 + 1e-15)  # inside the guard band
        assert log_lt(float("-inf"), 0.0)
        assert not log_lt(0.0, float("-inf"))


class TestScalarText:
    def test_rational_round_trip(self):
        assert parse_real("3/4") == Fraction(3, 4)
        assert parse_real("-12") == Fraction(-12)
        assert isinstance(parse_real("0.5"), float)

    def test_scalar_round_trip_exact(self):
        v = QComplex(Fraction(-3, 7), Fraction(22, 5))
        re, im = format_scalar(v).split(",")
        assert parse_scalar(re, im) == v

    def test_scalar_round_trip_float(self):
        v = complex(0.1, -2.5e-17)
        re, im = format_scalar(v).split(",")
        assert parse_scalar(re, im) == v

    def test_scale_by_int_huge(self):
        # factor far beyond 2^53 but with a representable product
        big = math.factorial(200)
        out = scale_by_int(complex(1e-300), big)
        expected = math.exp(math.log(1e-300) + math.log(big))
        assert abs(out) == pytest.approx(expected, rel=1e-9)

    def test_scale_by_int_true_overflow_is_inf(self):
        assert abs(scale_by_int(complex(1e-300), math.factorial(400))) == math.inf

    def test_scale_by_int_exact(self):
        assert scale_by_int(QComplex(Fraction(1, 3)), 6) == QComplex(2)
