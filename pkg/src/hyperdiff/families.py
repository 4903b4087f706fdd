"""Operator-sequence families, property evidence checkers, and unicity tools.

The built-in families F1..F4 are the standard separating examples for the
three divergence properties:

  (P) |P_n(z)| -> +infinity on some unicity sample set,
  (Q) valence-driven growth m(n)|c_{m(n),n}|^{k/m(n)} -> +infinity with the
      shifted coefficients {c_{k+m(n),n}} bounded,
  (R) the minimum of |P_n| on some circle |z| = r -> +infinity.

Checkers gather monotone finite evidence and return three-valued verdicts;
they never claim to decide a limit. All statistics are computed in the log
domain, with per-family closed-form magnitude escorts so that coefficients
like n^(-n) never underflow. Per-index evaluations are independent pure
computations; reports are assembled in index order regardless of evaluation
order, so sweeps may be parallelized by the caller.
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

from .errors import ConfigError, PreconditionError
from .scalars import LN2, LogMagnitude, NEG_INF, QComplex, is_exact, to_complex
from .series import ExponentialCombo, PolynomialOperator, TaylorPolynomial, exp_truncate

# -- rational enumeration ------------------------------------------------------

_Q_CACHE: List[Fraction] = []


def positive_rational(n: int) -> Fraction:
    """n-th positive rational in the diagonal enumeration.

    Pairs (p, q) with p, q >= 1 are listed by increasing p + q, ties broken by
    increasing p; duplicate values (2/2, 3/3, ...) are kept. Deterministic and
    reproducible by construction.
    """
    if n < 1:
        raise ValueError("enumeration index starts at 1")
    while len(_Q_CACHE) < n:
        s = 2
        # next block after the current cache length
        while s * (s - 1) // 2 < len(_Q_CACHE) + 1:
            s += 1
        base = (s - 1) * (s - 2) // 2
        for p in range(len(_Q_CACHE) - base + 1, s):
            _Q_CACHE.append(Fraction(p, s - p))
    return _Q_CACHE[n - 1]


# -- operator sequences --------------------------------------------------------


class OperatorSequence:
    """An indexed family n -> P_n with metadata and log-domain escorts.

    ``coeff_log_items(n)`` yields (exponent, LogMagnitude) pairs for |c_{j,n}|
    without materializing the operator, so sweeps stay overflow/underflow free
    even where the coefficients leave the double range.
    """

    def __init__(
        self,
        tag: str,
        label: str,
        build: Callable[[int], PolynomialOperator],
        *,
        valence_fn: Optional[Callable[[int], int]] = None,
        degree_fn: Optional[Callable[[int], int]] = None,
        coeff_items_fn: Optional[Callable[[int], List[Tuple[int, LogMagnitude]]]] = None,
        coeff_abs_log_fn: Optional[Callable[[int], float]] = None,
        log_abs_fn: Optional[Callable[[int, complex], LogMagnitude]] = None,
        exact_abs_fn: Optional[Callable[[int, Fraction], LogMagnitude]] = None,
        exact: bool,
        max_n: Optional[int] = None,
        params: Optional[Mapping] = None,
    ):
        self.tag = tag
        self.label = label
        self.exact = exact
        self.max_n = max_n
        self.params = dict(params or {})
        self._build = build
        self._valence_fn = valence_fn
        self._degree_fn = degree_fn
        self._coeff_items_fn = coeff_items_fn
        self._coeff_abs_log_fn = coeff_abs_log_fn
        self._log_abs_fn = log_abs_fn
        self._exact_abs_fn = exact_abs_fn
        self._cache: dict[int, PolynomialOperator] = {}

    def _check_index(self, n: int) -> None:
        if n < 1:
            raise PreconditionError(f"sequence index must be >= 1, got {n}")
        if self.max_n is not None and n > self.max_n:
            raise PreconditionError(f"sequence {self.label} has only {self.max_n} entries")

    def op(self, n: int) -> PolynomialOperator:
        self._check_index(n)
        got = self._cache.get(n)
        if got is None:
            got = self._build(n)
            if got.valence != self.valence(n) or got.degree != self.degree(n):
                raise PreconditionError(
                    f"{self.label}: metadata (m={self.valence(n)}, d={self.degree(n)}) "
                    f"disagrees with built coefficients (m={got.valence}, d={got.degree}) at n={n}"
                )
            self._cache[n] = got
        return got

    def valence(self, n: int) -> int:
        self._check_index(n)
        if self._valence_fn is not None:
            return self._valence_fn(n)
        return self._ensure_built(n).valence

    def degree(self, n: int) -> int:
        self._check_index(n)
        if self._degree_fn is not None:
            return self._degree_fn(n)
        return self._ensure_built(n).degree

    def _ensure_built(self, n: int) -> PolynomialOperator:
        got = self._cache.get(n)
        if got is None:
            got = self._build(n)
            self._cache[n] = got
        return got

    def coeff_log_items(self, n: int) -> List[Tuple[int, LogMagnitude]]:
        self._check_index(n)
        if self._coeff_items_fn is not None:
            return self._coeff_items_fn(n)
        return [(j, LogMagnitude.of(c)) for j, c in self.op(n).terms()]

    def log_coeff(self, n: int, j: int) -> LogMagnitude:
        for jj, mag in self.coeff_log_items(n):
            if jj == j:
                return mag
        return LogMagnitude.zero()

    def coeff_abs_log_sum(self, n: int) -> LogMagnitude:
        """log of A_n = sum |c_{j,n}|; closed form when the family provides one."""
        self._check_index(n)
        if self._coeff_abs_log_fn is not None:
            return LogMagnitude(self._coeff_abs_log_fn(n))
        return LogMagnitude.sum(mag for _, mag in self.coeff_log_items(n))

    def log_abs_at(self, n: int, z) -> LogMagnitude:
        """|P_n(z)| as a LogMagnitude, using the family's closed form if any.

        Exact rational points on exact families evaluate in exact arithmetic,
        which is what makes near-root witnesses detectable below 2^-n.
        """
        self._check_index(n)
        if is_exact(z):
            if self._exact_abs_fn is not None and isinstance(z, (int, Fraction)):
                return self._exact_abs_fn(n, Fraction(z))
            if self.exact:
                return LogMagnitude.of(self.op(n).value_at(z))
        zf = to_complex(z)
        if self._log_abs_fn is not None:
            return self._log_abs_fn(n, zf)
        return LogMagnitude.of(self.op(n).to_float().value_at(zf))

    def __repr__(self):
        return f"OperatorSequence({self.label})"


def _parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise ConfigError(f"expected a rational constant, got {value!r}")


def _f1() -> OperatorSequence:
    # P_n = z^n / n^n + z^(n+1)
    def build(n: int) -> PolynomialOperator:
        return PolynomialOperator({n: QComplex(Fraction(1, n**n)), n + 1: QComplex(1)})

    def items(n: int):
        return [(n, LogMagnitude(-math.log(n**n))), (n + 1, LogMagnitude.one())]

    def log_abs(n: int, z: complex) -> LogMagnitude:
        # |z|^n * |z + n^-n|; the shift underflows harmlessly for large n
        inner = z + math.exp(-n * math.log(n)) if n * math.log(n) < 700 else z
        if abs(z) == 0.0 or abs(inner) == 0.0:
            return LogMagnitude.zero()
        return LogMagnitude(n * math.log(abs(z)) + math.log(abs(inner)))

    def exact_abs(n: int, x: Fraction) -> LogMagnitude:
        inner = x + Fraction(1, n**n)
        if x == 0 or inner == 0:
            return LogMagnitude.zero()
        return LogMagnitude(
            n * (math.log(abs(x.numerator)) - math.log(x.denominator))
            + LogMagnitude.of(inner).log
        )

    def abs_sum(n: int) -> float:
        # A = 1 + n^-n
        t = -n * math.log(n) if n > 1 else 0.0
        return math.log1p(math.exp(t)) if t > -700 else 0.0

    return OperatorSequence(
        "F1",
        "F1: z^n/n^n + z^(n+1)",
        build,
        valence_fn=lambda n: n,
        degree_fn=lambda n: n + 1,
        coeff_items_fn=items,
        coeff_abs_log_fn=abs_sum,
        log_abs_fn=log_abs,
        exact_abs_fn=exact_abs,
        exact=True,
    )


def _f2(params: Mapping) -> OperatorSequence:
    # P_n = c_n z^n (1 + z); paper coefficients c_n = n^(-n/log(n+1))
    known = {"c_mode", "log_base"}
    unknown = set(params) - known
    if unknown:
        raise ConfigError(f"F2 does not take parameters {sorted(unknown)}")
    c_mode = params.get("c_mode", "paper")
    if c_mode not in ("paper", "unit"):
        raise ConfigError(f"F2 c_mode must be 'paper' or 'unit', got {c_mode!r}")
    base = params.get("log_base", "e")
    if base == "e":
        ln_base = 1.0
    else:
        ln_base = math.log(float(base))
        if ln_base <= 0:
            raise ConfigError("F2 log_base must exceed 1")

    if c_mode == "unit":
        def build(n: int) -> PolynomialOperator:
            return PolynomialOperator({n: QComplex(1), n + 1: QComplex(1)})

        def items(n: int):
            return [(n, LogMagnitude.one()), (n + 1, LogMagnitude.one())]

        def log_abs(n: int, z: complex) -> LogMagnitude:
            if abs(z) == 0.0 or abs(1 + z) == 0.0:
                return LogMagnitude.zero()
            return LogMagnitude(n * math.log(abs(z)) + math.log(abs(1 + z)))

        def exact_abs(n: int, x: Fraction) -> LogMagnitude:
            if x == 0 or x == -1:
                return LogMagnitude.zero()
            return LogMagnitude(n * LogMagnitude.of(x).log + LogMagnitude.of(1 + x).log)

        return OperatorSequence(
            "F2",
            "F2(unit): z^n (1 + z)",
            build,
            valence_fn=lambda n: n,
            degree_fn=lambda n: n + 1,
            coeff_items_fn=items,
            coeff_abs_log_fn=lambda n: LN2,
            log_abs_fn=log_abs,
            exact_abs_fn=exact_abs,
            exact=True,
            params={"c_mode": "unit"},
        )

    def log_c(n: int) -> float:
        # ln c_n = -n * ln(n) * ln(base) / ln(n+1)
        return -n * math.log(n) * ln_base / math.log(n + 1) if n > 1 else 0.0

    def build(n: int) -> PolynomialOperator:
        c = math.exp(log_c(n))
        if c == 0.0:
            raise PreconditionError(
                f"F2 coefficient underflows double precision at n={n}; "
                "use the log-domain escorts for sweeps this deep"
            )
        return PolynomialOperator({n: complex(c), n + 1: complex(c)})

    def items(n: int):
        lc = LogMagnitude(log_c(n))
        return [(n, lc), (n + 1, lc)]

    def log_abs(n: int, z: complex) -> LogMagnitude:
        if abs(z) == 0.0 or abs(1 + z) == 0.0:
            return LogMagnitude.zero()
        return LogMagnitude(log_c(n) + n * math.log(abs(z)) + math.log(abs(1 + z)))

    return OperatorSequence(
        "F2",
        "F2: n^(-n/log(n+1)) z^n (1 + z)",
        build,
        valence_fn=lambda n: n,
        degree_fn=lambda n: n + 1,
        coeff_items_fn=items,
        coeff_abs_log_fn=lambda n: LN2 + log_c(n),
        log_abs_fn=log_abs,
        exact=False,
        params={"c_mode": "paper", "log_base": base},
    )


def _f3() -> OperatorSequence:
    # P_n = z^n (z - q_n)^n over the diagonal enumeration of positive rationals
    def build(n: int) -> PolynomialOperator:
        q = positive_rational(n)
        coeffs = {}
        for i in range(n + 1):
            coeffs[n + i] = QComplex(math.comb(n, i) * (-q) ** (n - i))
        return PolynomialOperator(coeffs)

    def log_abs(n: int, z: complex) -> LogMagnitude:
        q = float(positive_rational(n))
        if abs(z) == 0.0 or abs(z - q) == 0.0:
            return LogMagnitude.zero()
        return LogMagnitude(n * (math.log(abs(z)) + math.log(abs(z - q))))

    def exact_abs(n: int, x: Fraction) -> LogMagnitude:
        q = positive_rational(n)
        if x == 0 or x == q:
            return LogMagnitude.zero()
        return LogMagnitude(n * (LogMagnitude.of(x).log + LogMagnitude.of(x - q).log))

    def items(n: int):
        # |c_{n+i}| = C(n, i) q^(n-i), via lgamma so huge n stays cheap
        log_q = LogMagnitude.of(positive_rational(n)).log
        lg_n = math.lgamma(n + 1)
        out = []
        for i in range(n + 1):
            log_comb = lg_n - math.lgamma(i + 1) - math.lgamma(n - i + 1)
            out.append((n + i, LogMagnitude(log_comb + (n - i) * log_q)))
        return out

    def abs_sum(n: int) -> float:
        # A = (1 + q_n)^n
        return n * math.log1p(float(positive_rational(n)))

    return OperatorSequence(
        "F3",
        "F3: z^n (z - q_n)^n",
        build,
        valence_fn=lambda n: n,
        degree_fn=lambda n: 2 * n,
        coeff_items_fn=items,
        coeff_abs_log_fn=abs_sum,
        log_abs_fn=log_abs,
        exact_abs_fn=exact_abs,
        exact=True,
    )


def _f4(params: Mapping) -> OperatorSequence:
    known = {"c", "decay"}
    unknown = set(params) - known
    if unknown:
        raise ConfigError(f"F4 does not take parameters {sorted(unknown)}")
    c = _parse_rational(params.get("c", 1))
    if c == 0:
        raise ConfigError("F4 constant c must be nonzero")
    decay = params.get("decay")
    if decay not in (None, "pow2cubic"):
        raise ConfigError("F4 decay must be omitted or 'pow2cubic'")

    if decay is None:
        def coeff(n: int) -> Fraction:
            return c

        def log_coeff(n: int) -> float:
            return LogMagnitude.of(c).log

        label = f"F4: {c} z^n"
    else:
        def coeff(n: int) -> Fraction:
            return c * Fraction(1, 2 ** (n**3))

        def log_coeff(n: int) -> float:
            return LogMagnitude.of(c).log - (n**3) * LN2

        label = f"F4: {c} 2^(-n^3) z^n"

    def build(n: int) -> PolynomialOperator:
        return PolynomialOperator({n: QComplex(coeff(n))})

    def items(n: int):
        return [(n, LogMagnitude(log_coeff(n)))]

    def log_abs(n: int, z: complex) -> LogMagnitude:
        if abs(z) == 0.0:
            return LogMagnitude.zero()
        return LogMagnitude(log_coeff(n) + n * math.log(abs(z)))

    def exact_abs(n: int, x: Fraction) -> LogMagnitude:
        if x == 0:
            return LogMagnitude.zero()
        return LogMagnitude(log_coeff(n) + n * LogMagnitude.of(x).log)

    return OperatorSequence(
        "F4",
        label,
        build,
        valence_fn=lambda n: n,
        degree_fn=lambda n: n,
        coeff_items_fn=items,
        coeff_abs_log_fn=log_coeff,
        log_abs_fn=log_abs,
        exact_abs_fn=exact_abs,
        exact=True,
        params=dict(params),
    )


def _f5(params: Mapping) -> OperatorSequence:
    ops = params.get("ops")
    if not ops:
        raise ConfigError("F5 needs an explicit operator table under params['ops']")
    table: List[PolynomialOperator] = list(ops)
    exact = all(op.exact for op in table)

    def build(n: int) -> PolynomialOperator:
        return table[n - 1]

    return OperatorSequence(
        "F5",
        f"F5: explicit table of {len(table)} operators",
        build,
        exact=exact,
        max_n=len(table),
    )


def make_family(tag: str, params: Optional[Mapping] = None) -> OperatorSequence:
    """Construct a built-in family (F1..F4) or wrap an explicit table (F5)."""
    params = dict(params or {})
    tag = tag.upper()
    if tag == "F1":
        if params:
            raise ConfigError("F1 takes no parameters")
        return _f1()
    if tag == "F2":
        return _f2(params)
    if tag == "F3":
        if params:
            raise ConfigError("F3 takes no parameters")
        return _f3()
    if tag == "F4":
        return _f4(params)
    if tag == "F5":
        return _f5(params)
    raise ConfigError(f"unknown family tag {tag!r} (expected F1..F5)")


# -- growth rule and evidence reports -------------------------------------------


@dataclass(frozen=True)
class GrowthRule:
    """Finite-sweep evidence rule for 'the statistic diverges'.

    supports: strictly increasing quartile minima over the last half, the
    last-half minimum above the first-half minimum, and the final value above
    the threshold. refutes: either enough values below the vanishing envelope
    2^-n (witnesses of near-roots), or the whole last half sitting below the
    floor without net growth. Anything else is inconclusive.
    """

    threshold_log: float = 20.0
    floor_log: float = 0.0
    vanish_hits: Optional[int] = 2
    min_len: int = 8

    def classify(self, ns: Sequence[int], logs: Sequence[float]) -> Tuple[str, dict]:
        info: dict = {}
        if self.vanish_hits is not None:
            hits = [(n, v) for n, v in zip(ns, logs) if v < -n * LN2]
            if len(hits) >= self.vanish_hits:
                info["vanishing"] = hits
                return "refutes", info
        if len(logs) < self.min_len:
            return "inconclusive", info
        half = list(logs[len(logs) // 2 :])
        if all(v < self.floor_log for v in half) and half[-1] <= half[0]:
            info["decay"] = {"first": half[0], "last": half[-1], "floor": self.floor_log}
            return "refutes", info
        q3 = half[: len(half) // 2]
        q4 = half[len(half) // 2 :]
        first_half_min = min(logs[: len(logs) // 2])
        if (
            min(q4) > min(q3)
            and min(half) > first_half_min
            and logs[-1] > self.threshold_log
        ):
            info["quartile_minima"] = (first_half_min, min(q3), min(q4))
            return "supports", info
        return "inconclusive", info


@dataclass
class EvidenceReport:
    """Outcome of one property check over an index range."""

    prop: str
    n_range: Tuple[int, int]
    verdict: str
    rows: List[Tuple[int, float, str]] = field(default_factory=list)
    tracks: dict = field(default_factory=dict)
    witness: Optional[dict] = None
    notes: dict = field(default_factory=dict)


def write_evidence_csv(report: EvidenceReport, out: TextIO) -> None:
    out.write("n,statistic_log,verdict_running\n")
    for n, stat, running in report.rows:
        out.write(f"{n},{_fmt_log(stat)},{running}\n")


def _fmt_log(v: float) -> str:
    if v == NEG_INF:
        return "-inf"
    return repr(v)


def _combine_sample_verdicts(per_sample: Mapping[str, Tuple[str, dict]]) -> Tuple[str, Optional[dict]]:
    for key, (verdict, info) in per_sample.items():
        if verdict == "refutes":
            return "refutes", {"sample": key, **info}
    if all(v == "supports" for v, _ in per_sample.values()):
        return "supports", None
    return "inconclusive", None


def check_property_P(
    seq: OperatorSequence,
    u_samples: Sequence,
    n_range: Tuple[int, int],
    rule: Optional[GrowthRule] = None,
) -> EvidenceReport:
    """Evidence for |P_n(z)| -> +infinity at every sample point z.

    supports requires every sample to pass the growth rule; refutes requires
    an explicit witness sample with vanishing or floor-bounded values.
    """
    if not u_samples:
        raise PreconditionError("property (P) check needs a nonempty sample set")
    rule = rule or GrowthRule()
    lo, hi = n_range
    ns = list(range(lo, hi + 1))
    tracks: dict = {}
    for z in u_samples:
        key = str(z)
        tracks[key] = [seq.log_abs_at(n, z).log for n in ns]
    per_sample = {key: rule.classify(ns, logs) for key, logs in tracks.items()}
    verdict, witness = _combine_sample_verdicts(per_sample)

    def verdict_at(i: int) -> str:
        sub = {k: rule.classify(ns[: i + 1], logs[: i + 1]) for k, logs in tracks.items()}
        return _combine_sample_verdicts(sub)[0]

    stat = [min(tracks[k][i] for k in tracks) for i in range(len(ns))]
    rows = [(n, stat[i], verdict_at(i)) for i, n in enumerate(ns)]
    return EvidenceReport(
        prop="P",
        n_range=n_range,
        verdict=verdict,
        rows=rows,
        tracks={"samples": tracks, "per_sample_verdicts": {k: v[0] for k, v in per_sample.items()}},
        witness=witness,
        notes={"rule": rule},
    )


def check_property_Q(
    seq: OperatorSequence,
    k_max: int,
    n_range: Tuple[int, int],
    rule: Optional[GrowthRule] = None,
    bound_cap_log: float = math.log(100.0),
) -> EvidenceReport:
    """Evidence for the valence-growth/bounded-shift property.

    Growth statistic per k: m(n) |c_{m(n),n}|^{k/m(n)} in the log domain.
    Boundedness statistic per k: max_n |c_{k+m(n),n}| against a cap.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be >= 1")
    rule = rule or GrowthRule(threshold_log=1.0, vanish_hits=None)
    lo, hi = n_range
    ns = list(range(lo, hi + 1))
    growth: dict[int, List[float]] = {}
    bound: dict[int, float] = {}
    for k in range(1, k_max + 1):
        track = []
        worst = NEG_INF
        for n in ns:
            m = seq.valence(n)
            c_log = seq.log_coeff(n, m).log
            track.append(math.log(m) + (k / m) * c_log)
            shifted = seq.log_coeff(n, k + m).log
            worst = max(worst, shifted)
        growth[k] = track
        bound[k] = worst
    per_k = {k: rule.classify(ns, growth[k]) for k in growth}
    bounded_ok = all(v <= bound_cap_log for v in bound.values())
    refuting = [k for k, (v, _) in per_k.items() if v == "refutes"]
    if refuting:
        k_bad = refuting[0]
        verdict = "refutes"
        witness = {"k": k_bad, "statistic_log": growth[k_bad], **per_k[k_bad][1]}
    elif all(v == "supports" for v, _ in per_k.values()) and bounded_ok:
        verdict, witness = "supports", None
    else:
        verdict, witness = "inconclusive", None

    def verdict_at(i: int) -> str:
        sub = {k: rule.classify(ns[: i + 1], growth[k][: i + 1])[0] for k in growth}
        if any(v == "refutes" for v in sub.values()):
            return "refutes"
        if all(v == "supports" for v in sub.values()) and bounded_ok:
            return "supports"
        return "inconclusive"

    stat = [min(growth[k][i] for k in growth) for i in range(len(ns))]
    rows = [(n, stat[i], verdict_at(i)) for i, n in enumerate(ns)]
    return EvidenceReport(
        prop="Q",
        n_range=n_range,
        verdict=verdict,
        rows=rows,
        tracks={"growth": growth, "shifted_bound_log": bound, "bound_cap_log": bound_cap_log},
        witness=witness,
        notes={"rule": rule, "k_max": k_max},
    )


def _op_coeff_majorant_log(op: PolynomialOperator, r: float) -> LogMagnitude:
    log_r = math.log(r)
    return LogMagnitude.sum(
        LogMagnitude(LogMagnitude.of(c).log + j * log_r) for j, c in op.terms()
    )


def circle_min(op: PolynomialOperator, r: float, m_samples: int) -> LogMagnitude:
    """Certified lower bound for min |P| on the circle |z| = r.

    Samples m_samples equispaced points and subtracts both the derivative arc
    correction (pi r / M) * sup|P'| and a floating-evaluation guard, so the
    result is a valid lower bound even under heavy cancellation (where it
    degrades gracefully to zero). Single-term operators have constant modulus
    on circles and are returned exactly.
    """
    if m_samples < 64:
        raise PreconditionError("circle sampling needs at least 64 points")
    if r <= 0:
        raise PreconditionError("circle radius must be positive")
    lower, _ = _circle_scan(op, r, m_samples)
    return lower


def _circle_scan(
    op: PolynomialOperator, r: float, m_samples: int
) -> Tuple[LogMagnitude, LogMagnitude]:
    """Returns (certified lower bound, sampled upper bound) for the circle min."""
    terms = list(op.terms())
    if len(terms) == 1:
        j, c = terms[0]
        exact = LogMagnitude(LogMagnitude.of(c).log + j * math.log(r))
        return exact, exact
    fop = op.to_float()
    coeffs = list(reversed(fop.coeffs))
    sampled = math.inf
    for t in range(m_samples):
        z = r * cmath.exp(2j * math.pi * t / m_samples)
        acc = 0j
        for c in coeffs:
            acc = acc * z + c
        acc *= z**fop.valence
        val = abs(acc)
        if val < sampled:
            sampled = val
    upper = LogMagnitude.of(sampled) if math.isfinite(sampled) else LogMagnitude(math.inf)
    b = op.derivative_majorant(r).value()
    guard = 8.0 * 2.0**-52 * (op.degree + 1) * _op_coeff_majorant_log(op, r).value()
    if not (math.isfinite(sampled) and math.isfinite(b) and math.isfinite(guard)):
        return LogMagnitude.zero(), upper
    lower_val = sampled - (math.pi * r / m_samples) * b - guard
    lower = LogMagnitude.of(lower_val) if lower_val > 0 else LogMagnitude.zero()
    return lower, upper


def check_property_R(
    seq: OperatorSequence,
    r: float,
    n_range: Tuple[int, int],
    samples_per_circle: int = 256,
    rule: Optional[GrowthRule] = None,
) -> EvidenceReport:
    """Evidence for min{|P_n(z)| : |z| = r} -> +infinity.

    supports reads the certified lower-bound track through the growth rule;
    refutes reads the sampled upper-bound track (which includes an exact
    evaluation at the real point z = r whenever the family can do it exactly)
    through the vanishing-witness and floor rules.
    """
    if r <= 0:
        raise PreconditionError("property (R) radius must be positive")
    if samples_per_circle < 64:
        raise PreconditionError("samples_per_circle must be >= 64")
    rule = rule or GrowthRule()
    lo, hi = n_range
    ns = list(range(lo, hi + 1))
    lower_track: List[float] = []
    upper_track: List[float] = []
    r_rational = _as_rational(r)
    for n in ns:
        op = seq.op(n)
        low, up = _circle_scan(op, r, samples_per_circle)
        if r_rational is not None:
            exact_sample = seq.log_abs_at(n, r_rational)
            if exact_sample.log < up.log:
                up = exact_sample
        lower_track.append(low.log)
        upper_track.append(up.log)
    support_verdict, support_info = rule.classify(ns, lower_track)
    refute_verdict, refute_info = rule.classify(ns, upper_track)
    if refute_verdict == "refutes":
        verdict, witness = "refutes", refute_info
    elif support_verdict == "supports":
        verdict, witness = "supports", None
    else:
        verdict, witness = "inconclusive", None

    def verdict_at(i: int) -> str:
        rv, _ = rule.classify(ns[: i + 1], upper_track[: i + 1])
        if rv == "refutes":
            return "refutes"
        sv, _ = rule.classify(ns[: i + 1], lower_track[: i + 1])
        return sv if sv == "supports" else "inconclusive"

    rows = [(n, lower_track[i], verdict_at(i)) for i, n in enumerate(ns)]
    return EvidenceReport(
        prop="R",
        n_range=n_range,
        verdict=verdict,
        rows=rows,
        tracks={"lower_log": lower_track, "upper_log": upper_track, "r": r},
        witness=witness,
        notes={"rule": rule, "samples_per_circle": samples_per_circle},
    )


def _as_rational(r: float) -> Optional[Fraction]:
    """The radius as an exact rational when it plainly is one, else None."""
    fr = Fraction(r).limit_denominator(10**6)
    return fr if abs(float(fr) - r) < 1e-12 else None


# -- unicity exponent ------------------------------------------------------------


@dataclass
class UnicityEstimate:
    """Counting-function slopes and the resulting convergence-exponent estimate."""

    radii: List[float]
    counts: List[int]
    slopes: List[float]
    chi: float
    margin: float
    unicity_supported: bool


PointSource = Union[Sequence[float], Callable[[int], float]]


def unicity_exponent(
    points: PointSource,
    r_max: float,
    *,
    per_decade: int = 8,
    decades: int = 6,
    margin: float = 0.1,
) -> UnicityEstimate:
    """Estimate chi = limsup log n(r) / log r from a point-modulus source.

    ``points`` is either an explicit list of moduli or a 1-based nondecreasing
    generator index -> modulus (counting then proceeds by binary search, which
    is what makes r_max = 1e6 with ~1e12 points feasible).
    """
    if r_max <= 10:
        raise PreconditionError("r_max must exceed 10")
    counter = _make_counter(points)
    if counter(r_max) < 10:
        raise PreconditionError("fewer than 10 point moduli below r_max")
    radii: List[float] = []
    counts: List[int] = []
    slopes: List[float] = []
    total = per_decade * decades
    for t in range(total + 1):
        rad = r_max * 10.0 ** (-(total - t) / per_decade)
        if rad <= 1.5:
            continue
        cnt = counter(rad)
        if cnt < 1:
            continue
        radii.append(rad)
        counts.append(cnt)
        slopes.append(math.log(cnt) / math.log(rad))
    last_decade = [s for rad, s in zip(radii, slopes) if rad >= r_max / 10.0]
    chi = max(last_decade) if last_decade else 0.0
    return UnicityEstimate(
        radii=radii,
        counts=counts,
        slopes=slopes,
        chi=chi,
        margin=margin,
        unicity_supported=chi > 1.0 + margin,
    )


def _make_counter(points: PointSource) -> Callable[[float], int]:
    if callable(points):
        gen = points

        def counter(r: float) -> int:
            if gen(1) > r:
                return 0
            hi = 1
            while gen(hi) <= r:
                hi *= 2
                if hi > 2**62:
                    raise PreconditionError("point generator never exceeds r; moduli must be unbounded")
            lo = hi // 2
            while lo + 1 < hi:
                mid = (lo + hi) // 2
                if gen(mid) <= r:
                    lo = mid
                else:
                    hi = mid
            return lo

        return counter
    moduli = sorted(float(p) for p in points)

    def counter(r: float) -> int:
        return bisect.bisect_right(moduli, r)

    return counter


# -- density of exponentials -----------------------------------------------------


@dataclass
class DensityFit:
    """Least-squares fit report; ill-conditioning is reported, never swallowed."""

    residual_max: float
    condition: float
    ill_conditioned: bool
    grid_size: int
    m_terms: int


def density_demo(
    u_samples: Sequence,
    target: TaylorPolynomial,
    r: float,
    m_terms: int,
    *,
    trunc: int = 40,
    rings: int = 4,
    angles: int = 16,
    cond_cap: float = 1e12,
) -> Tuple[ExponentialCombo, DensityFit]:
    """Numeric witness that exponentials e_w, w from the sample set, span densely.

    Fits the target on a fixed deterministic grid of the disk |z| <= r by a
    combination of truncated exponentials over the first m_terms frequencies.
    The max residual on the grid is nonincreasing in m_terms for a fixed grid.
    """
    import numpy as np

    if m_terms < 1 or m_terms > len(u_samples):
        raise PreconditionError("need 1 <= m_terms <= len(u_samples)")
    if r <= 0:
        raise PreconditionError("radius must be positive")
    freqs = [to_complex(w) for w in u_samples[:m_terms]]
    grid: List[complex] = [0j]
    for ring in range(1, rings + 1):
        rad = r * ring / rings
        for t in range(angles):
            grid.append(rad * cmath.exp(2j * math.pi * t / angles))
    basis = []
    for w in freqs:
        poly, _ = exp_truncate(w, trunc, r)
        fpoly = poly.to_float()
        basis.append([fpoly.evaluate(z) for z in grid])
    a = np.array(basis, dtype=complex).T
    ft = target.to_float()
    b = np.array([ft.evaluate(z) for z in grid], dtype=complex)
    weights, _, _, sv = np.linalg.lstsq(a, b, rcond=None)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    resid = float(np.max(np.abs(a @ weights - b)))
    combo = ExponentialCombo(list(zip((complex(w) for w in weights), freqs)))
    fit = DensityFit(
        residual_max=resid,
        condition=condition,
        ill_conditioned=condition > cond_cap,
        grid_size=len(grid),
        m_terms=m_terms,
    )
    return combo, fit
