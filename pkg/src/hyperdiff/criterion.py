"""Hypothesis assembly for the four-part spaceability criterion.

For a configured (sequence, route) pair the verifier gathers evidence that

  (i)   P_n(D) g -> 0 for polynomials g       (exact: zero once m(n) > deg g),
  (ii)  S_n y -> 0 on the route's target set  (decay sweeps),
  (iii) P_n(D) S_n y = y                      (exact identities per (n, k)),
  (iv)  P_{n_k}(D) f -> 0 on the lacunary subspace (tail decay audit),

and combines the four verdicts. The criterion's abstract conclusion (a closed
subspace of hypercyclic vectors) is realized separately by the synthesis
module; this one only certifies the hypotheses at desk scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, TextIO, Tuple

from .errors import PreconditionError
from .families import EvidenceReport, GrowthRule, OperatorSequence
from .inverses import build_f_nk, fnk_decay
from .lacunary import decay_report, m0_member, select_indices
from .scalars import LogMagnitude, QComplex
from .series import (
    PolynomialOperator,
    TaylorPolynomial,
    apply_operator,
    eigen_defect_bound,
    exp_truncate,
    majorant_norm,
)


def check_annihilation(op: PolynomialOperator, g: TaylorPolynomial) -> bool:
    """True iff the operator's valence exceeds deg g, which forces P(D) g = 0."""
    return op.valence > g.degree


@dataclass
class CriterionConfig:
    n_lo: int = 1
    n_hi: int = 40
    k_max: int = 3
    test_degrees: Tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    u_samples: Tuple = ()
    r: float = 2.0
    basis_size: int = 4
    basis_start: int = 1
    basis_cap: int = 10**6
    trunc: int = 60
    sweep_points: int = 12  # how many n values to spot-check for exact identities
    seed: int = 0


@dataclass
class HypothesisEvidence:
    verdict: str
    rows: List[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)


@dataclass
class CriterionReport:
    route: str
    seq_label: str
    items: dict  # keys "i", "ii", "iii", "iv" -> HypothesisEvidence

    @property
    def overall(self) -> str:
        verdicts = [ev.verdict for ev in self.items.values()]
        if all(v == "supports" for v in verdicts):
            return "supports"
        if any(v == "refutes" for v in verdicts):
            return "refutes"
        return "inconclusive"


def _sample_indices(lo: int, hi: int, count: int) -> List[int]:
    if hi - lo + 1 <= count:
        return list(range(lo, hi + 1))
    step = (hi - lo) / (count - 1)
    seen = []
    for i in range(count):
        n = round(lo + i * step)
        if not seen or n > seen[-1]:
            seen.append(n)
    return seen


def _battery(degrees: Sequence[int], seed: int) -> List[TaylorPolynomial]:
    """Deterministic test polynomials: one per degree with mixed rational coefficients."""
    import random

    rng = random.Random(seed)
    out = []
    for d in degrees:
        coeffs = [QComplex(Fraction(rng.randint(-5, 5), rng.randint(1, 4))) for _ in range(d)]
        coeffs.append(QComplex(Fraction(rng.randint(1, 5), 1)))
        out.append(TaylorPolynomial(coeffs))
    return out


def _check_unbounded_valence(seq: OperatorSequence, lo: int, hi: int) -> None:
    vals = [seq.valence(n) for n in _sample_indices(lo, hi, 16)]
    if max(vals) <= vals[0]:
        raise PreconditionError(
            "valence sequence looks bounded over the sweep range; the lacunary "
            "selection (hypothesis on unbounded valences) cannot proceed"
        )


def _hypothesis_i(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    rows = []
    verdict = "supports"
    crossings = {}
    for g in _battery(cfg.test_degrees, cfg.seed):
        crossing = None
        for n in range(cfg.n_lo, cfg.n_hi + 1):
            if seq.valence(n) > g.degree:
                crossing = n
                break
        if crossing is None:
            verdict = "inconclusive"
            rows.append({"degree": g.degree, "crossing": None, "exact_zero": None})
            continue
        ok = True
        for n in _sample_indices(crossing, cfg.n_hi, cfg.sweep_points):
            image = apply_operator(seq.op(n), g.to_float() if not seq.exact else g)
            if not image.is_zero:
                ok = False
                break
        if not ok:
            verdict = "refutes"
        crossings[g.degree] = crossing
        rows.append({"degree": g.degree, "crossing": crossing, "exact_zero": ok})
    return HypothesisEvidence(verdict=verdict, rows=rows, notes={"crossings": crossings})


def _hypothesis_ii_q(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    rows = []
    verdicts = []
    for k in range(0, cfg.k_max + 1):
        rep = fnk_decay(seq, k, max(cfg.r, 1.5), (max(cfg.n_lo, 2), cfg.n_hi))
        verdicts.append(rep.verdict)
        rows.append(
            {
                "k": k,
                "verdict": rep.verdict,
                "crossing": rep.crossing,
                "final_norm_log": rep.rows[-1].norm.log,
            }
        )
    if all(v == "supports" for v in verdicts):
        verdict = "supports"
    elif any(v == "refutes" for v in verdicts):
        verdict = "refutes"
    else:
        verdict = "inconclusive"
    return HypothesisEvidence(verdict=verdict, rows=rows)


def _hypothesis_ii_p(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    rule = GrowthRule()
    rows = []
    ns = list(range(cfg.n_lo, cfg.n_hi + 1))
    all_support = True
    any_refute = False
    for w in cfg.u_samples:
        logs = [seq.log_abs_at(n, w).log for n in ns]
        verdict, _ = rule.classify(ns, logs)
        # S_n e_w = e_w / P_n(w): growth of |P_n(w)| is exactly decay of the inverse
        rows.append({"w": str(w), "p_growth_verdict": verdict, "final_log": logs[-1]})
        all_support &= verdict == "supports"
        any_refute |= verdict == "refutes"
    verdict = "supports" if all_support else ("refutes" if any_refute else "inconclusive")
    return HypothesisEvidence(verdict=verdict, rows=rows)


def _hypothesis_iii_q(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    rows = []
    verdict = "supports"
    exact_everywhere = True
    for n in _sample_indices(cfg.n_lo, cfg.n_hi, cfg.sweep_points):
        op = seq.op(n)
        for k in range(0, cfg.k_max + 1):
            if op.exact:
                build_f_nk(op, k, verify=True)  # raises on failure
                rows.append({"n": n, "k": k, "identity": "exact"})
            else:
                exact_everywhere = False
                inv = build_f_nk(op, k, verify=False)
                defect = apply_operator(op, inv.f) - TaylorPolynomial.monomial(k, 1.0 + 0j)
                d_log = majorant_norm(defect, max(cfg.r, 1.0)).log if not defect.is_zero else -math.inf
                ok = d_log < -9 * math.log(10)
                rows.append({"n": n, "k": k, "identity": "float", "defect_log": d_log})
                if not ok:
                    verdict = "refutes"
    return HypothesisEvidence(
        verdict=verdict,
        rows=rows,
        notes={"exact": exact_everywhere},
    )


def _hypothesis_iii_p(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    rows = []
    verdict = "supports"
    for n in _sample_indices(cfg.n_lo, cfg.n_hi, cfg.sweep_points):
        op = seq.op(n)
        for w in cfg.u_samples:
            val = op.value_at(w)
            is_root = (not val) if isinstance(val, QComplex) else val == 0
            if is_root:
                rows.append({"n": n, "w": str(w), "status": "root (inverse defined as 0)"})
                continue
            # algebraic identity P(w) * (1/P(w)) = 1 is exact; certify the
            # truncation defect against its reported bound
            bound = eigen_defect_bound(op, w, cfg.trunc, 1.0)
            trunc, _ = exp_truncate(w, cfg.trunc, 1.0)
            if not op.exact:
                trunc = trunc.to_float()
            image = apply_operator(op, trunc)
            scaled = trunc.scale(val)
            defect = majorant_norm(image - scaled, 1.0)
            ok = defect.log <= bound.log + 1e-9 * max(1.0, abs(bound.log))
            rows.append(
                {
                    "n": n,
                    "w": str(w),
                    "defect_log": defect.log,
                    "bound_log": bound.log,
                    "within_bound": ok,
                }
            )
            if not ok:
                verdict = "refutes"
    return HypothesisEvidence(verdict=verdict, rows=rows)


def _hypothesis_iv(seq: OperatorSequence, cfg: CriterionConfig) -> HypothesisEvidence:
    basis = select_indices(seq, cfg.basis_size, n_start=cfg.basis_start, n_cap=cfg.basis_cap)
    r_iv = max(1.0, cfg.r)
    q = max(4, math.ceil(4 * r_iv))
    member = m0_member(basis, [QComplex(Fraction(1, q ** e.valence)) for e in basis.entries])
    rep = decay_report(basis, member, r_iv)
    rows = [
        {
            "k": row.k,
            "n": row.n,
            "measured_log": row.measured.log,
            "bound_log": row.bound.log,
        }
        for row in rep.rows
    ]
    ok = rep.measured_nonincreasing and all(
        row.measured.log <= row.bound.log + 1e-9 for row in rep.rows
    )
    return HypothesisEvidence(
        verdict="supports" if ok else "inconclusive",
        rows=rows,
        notes={"indices": basis.indices, "decay_base": q, "radius": r_iv},
    )


def verify_hypotheses(
    seq: OperatorSequence, route: str, cfg: Optional[CriterionConfig] = None
) -> CriterionReport:
    """Assemble evidence for hypotheses (i)-(iv) along the requested route.

    Q-route needs a nonzero shifted leading coefficient throughout (valence
    coefficient, guaranteed by construction) and unbounded valences; P-route
    additionally needs a nonempty frequency sample set.
    """
    cfg = cfg or CriterionConfig()
    route = route.upper()
    if route not in ("P", "Q"):
        raise PreconditionError("route must be 'P' or 'Q'")
    if route == "P" and not cfg.u_samples:
        raise PreconditionError("P-route verification needs a nonempty u_samples set")
    _check_unbounded_valence(seq, cfg.n_lo, cfg.n_hi)
    items = {"i": _hypothesis_i(seq, cfg)}
    if route == "Q":
        items["ii"] = _hypothesis_ii_q(seq, cfg)
        items["iii"] = _hypothesis_iii_q(seq, cfg)
    else:
        items["ii"] = _hypothesis_ii_p(seq, cfg)
        items["iii"] = _hypothesis_iii_p(seq, cfg)
    items["iv"] = _hypothesis_iv(seq, cfg)
    return CriterionReport(route=route, seq_label=seq.label, items=items)


def write_criterion_jsonl(report: CriterionReport, out: TextIO) -> None:
    """One JSON record per (hypothesis, row), plus a summary record."""
    for key in ("i", "ii", "iii", "iv"):
        ev = report.items[key]
        for row in ev.rows:
            record = {"hypothesis": key, "verdict": ev.verdict}
            record.update(_jsonable(row))
            out.write(json.dumps(record, sort_keys=True) + "\n")
    out.write(
        json.dumps(
            {
                "hypothesis": "overall",
                "route": report.route,
                "sequence": report.seq_label,
                "verdict": report.overall,
            },
            sort_keys=True,
        )
        + "\n"
    )


def _jsonable(row: dict) -> dict:
    out = {}
    for key, val in row.items():
        if isinstance(val, LogMagnitude):
            out[key] = None if val.is_zero else val.log
        elif isinstance(val, float) and math.isinf(val):
            out[key] = "-inf" if val < 0 else "inf"
        elif isinstance(val, tuple):
            out[key] = list(val)
        else:
            out[key] = val
    return out
