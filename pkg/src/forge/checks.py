"""The ten acceptance checks as one reproducible pipeline.

Everything random is drawn from a single seeded numpy Generator owned by the
run, in a fixed order, so a seed reproduces the report byte for byte.
Wall-clock times are collected only when ``timing=True``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .algebra import Q
from .connection import build_connection, curvature, curvature_is_zero, verify_split
from .garnier import (GARNIER_DPS, garnier_residual, spectral_coords, spectral_numerator,
                      theta_params)
from .monodromy import (a_values, check_relations, check_relations_exact, dihedral_check,
                        expected_traces, isomonodromy_scan, lambda_genericity, local_trace,
                        monodromy_rep, generator_rep)
from .report import SCHEMA_VERSION
from .restriction import (LineParams, connected_samples, draw_lambdas, draw_line,
                          etale_lift, normalize_at_infinity, pair_deviation,
                          pole_formula_deviations, residue_report, restrict_line)

DEFAULT_NS = {1: (2, 3, 4), 2: (2, 3), 3: (2, 3), 4: (2, 3), 5: (2, 3), 6: (2, 3),
              7: (2, 3), 8: (2, 3)}
TITLES = {
    1: "exact flatness",
    2: "split recovery",
    3: "local exponents",
    4: "normalization at infinity",
    5: "dihedral monodromy",
    6: "group relations",
    7: "isomonodromy",
    8: "Garnier residual",
    9: "spectral degree",
    10: "deviation ledger",
}
REFERENCE_LAMBDAS = (Q(1, 3), Q(1, 5), Q(1, 7), Q(1, 11))


def reference_lambdas(n):
    return list(REFERENCE_LAMBDAS[:n])


def reference_line(n):
    """A fixed generic line: (a, b) = (2, 3), c_i = 1/(i+1), d_i = 2/(i+2)."""
    return LineParams(2, 3, tuple(Q(1, i + 1) for i in range(1, n - 1)),
                      tuple(Q(2, i + 2) for i in range(1, n - 1)))


@dataclass
class CheckResult:
    criterion: int
    passed: bool
    details: dict
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def title(self):
        return TITLES[self.criterion]

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.criterion:2d} [{status}] {self.title}"

    def as_dict(self, timing=False):
        out = {"criterion": self.criterion, "name": self.title,
               "status": "pass" if self.passed else "fail", "details": self.details}
        if self.notes:
            out["notes"] = list(self.notes)
        if timing:
            out["seconds"] = self.seconds
        return out


def _maxabs(values):
    values = list(values)
    return max(values) if values else 0.0


class Verifier:
    """Runs the checks; later checks reuse systems built by earlier ones."""

    def __init__(self, seed=0, ns=None, ode_tol=1e-10, garnier_h=1e-5, draws=10,
                 garnier_points=3, timing=False):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.ns = ns
        self.ode_tol = ode_tol
        self.garnier_h = garnier_h
        self.draws = draws
        self.garnier_points = garnier_points
        self.timing = timing
        self.samples = []       # (lam, fs) from the random draws
        self.normalized = []    # (origin, lam, fs normalized at infinity)
        self.stencil_leading = []  # relative leading coefficients from Garnier stencils
        self.systems = []       # (origin, raw systems to normalize later)
        self.deviation_log = []
        self.oracle_only = True
        self.closed_form_compared = 0
        self.closed_form_deviating = 0
        self.results = {}

    def _ns(self, criterion):
        return tuple(self.ns) if self.ns else DEFAULT_NS[criterion]

    def run(self, criteria=range(1, 11)):
        out = []
        for c in criteria:
            t0 = time.perf_counter()
            res = getattr(self, f"criterion_{c}")()
            res.seconds = time.perf_counter() - t0
            self.results[c] = res
            out.append(res)
        return out

    # ---------------------------------------------------------- exact

    def criterion_1(self):
        details, ok = {}, True
        t0 = time.perf_counter()
        for n in self._ns(1):
            zero = curvature_is_zero(curvature(build_connection(n)))
            details[f"n={n}"] = {"curvature_zero": zero}
            ok &= zero
        elapsed = time.perf_counter() - t0
        details["under_120s"] = elapsed < 120
        return CheckResult(1, ok and elapsed < 120, details)

    def criterion_2(self):
        details, ok = {}, True
        for n in self._ns(2):
            rep = verify_split(n)
            details[f"n={n}"] = {"off_diagonal_zero": rep.off_diagonal_zero,
                                 "diagonal_match": rep.diagonal_match}
            ok &= rep.ok
        return CheckResult(2, ok, details)

    # ---------------------------------------------------------- residues

    def _draw(self, n):
        while True:
            lam = draw_lambdas(self.rng, n)
            if not lambda_genericity(lam):
                return lam, draw_line(self.rng, n)

    def _log_formulas(self, tp, fs, lam, rep):
        line = tp.base.flat()
        for rec in pole_formula_deviations(tp):
            if rec["distance"] > 1e-12:
                self.deviation_log.append({"kind": "printed_pole_formula", "n": tp.n,
                                           "line": line, "lambda": list(lam), **rec})
        self.closed_form_compared += len(rep.poles)
        for pr in rep.deviations():
            self.closed_form_deviating += 1
            self.deviation_log.append({"kind": "closed_form_residue", "n": tp.n, "line": line,
                                       "lambda": list(lam), "pole": pr.label,
                                       "deviation": pr.matrix_deviation})

    def criterion_3(self):
        details, ok = {}, True
        for n in self._ns(3):
            worst, worst_sum = 0, 0
            for _ in range(self.draws):
                lam, p = self._draw(n)
                tp = etale_lift(p)
                fs = restrict_line(n, lam, tp)
                rep = residue_report(fs, lam)
                worst = max(worst, rep.max_exponent_deviation())
                worst_sum = max(worst_sum, fs.residue_sum_error())
                self.samples.append((lam, fs))
                self._log_formulas(tp, fs, lam, rep)
            details[f"n={n}"] = {"draws": self.draws, "max_exponent_deviation": worst,
                                 "max_residue_sum": worst_sum}
            ok &= worst < 1e-9
        return CheckResult(3, ok, details)

    def criterion_4(self):
        if not self.samples:
            self.criterion_3()
        worst_off, worst_diag = 0, 0
        for lam, fs in self.samples:
            nf = normalize_at_infinity(fs)
            H = nf.residue_at_infinity
            worst_off = max(worst_off, abs(H[0, 1]), abs(H[1, 0]))
            target = mp.mpf(lam[0].numerator) / lam[0].denominator \
                + mp.mpf(lam[1].numerator) / lam[1].denominator
            worst_diag = max(worst_diag, pair_deviation([H[0, 0], H[1, 1]], target / 2))
            self.normalized.append(("criterion 3/4", lam, nf))
        ok = worst_off < 1e-10 and worst_diag < 1e-9
        return CheckResult(4, ok, {"systems": len(self.samples),
                                   "max_off_diagonal": worst_off,
                                   "max_diagonal_deviation": worst_diag})

    # ---------------------------------------------------------- monodromy

    def _monodromy_lines(self, n):
        lines = [(reference_lambdas(n), reference_line(n))]
        lines.append(self._draw(n))
        return lines

    def criterion_5(self):
        details, ok = {}, True
        notes = []
        for n in self._ns(5):
            rows = []
            for lam, p in self._monodromy_lines(n):
                fs = restrict_line(n, lam, etale_lift(p))
                self.systems.append(("criterion 5", lam, fs))
                rep = monodromy_rep(fs, tol=self.ode_tol)
                expected = expected_traces(lam, n)
                trace_dev = {lab: abs(rep.trace(lab) - expected[lab]) for lab in expected}
                dih = dihedral_check(rep, tol=1e-6)
                exponent_inf = (lam[0] + lam[1]) / 2
                inf_local = abs(rep.trace("inf") - local_trace(exponent_inf))
                row = {
                    "lambda": list(lam), "line": p.flat(),
                    "max_det_deviation": _maxabs(rep.det_errors.values()),
                    "trace_deviation": trace_dev,
                    "traces_match_expected": all(v < 1e-6 for v in trace_dev.values()),
                    "dihedral": dih.ok,
                    "dihedral_generator": dih.generator,
                    "product_identity_error": rep.product_identity_error,
                    "inf_trace_vs_local_exponent": inf_local,
                }
                good = (row["max_det_deviation"] < 1e-8 and row["traces_match_expected"]
                        and dih.ok and rep.product_identity_error < 1e-6)
                row["passed"] = good
                ok &= good
                rows.append(row)
                bad = [lab for lab, v in trace_dev.items() if v >= 1e-6]
                if bad:
                    a = a_values(lam)
                    self.deviation_log.append({
                        "kind": "expected_trace_mismatch", "n": n, "line": p.flat(),
                        "lambda": list(lam), "labels": bad,
                        "computed": {lab: rep.trace(lab) for lab in bad},
                        "expected": {lab: expected[lab] for lab in bad},
                        "local_exponent_trace_inf": local_trace(exponent_inf),
                        "a0a1_plus_inverse": a[0] * a[1] + 1 / (a[0] * a[1]),
                    })
            details[f"n={n}"] = rows
        if not ok:
            notes.append("the loop around infinity has trace a0*a1 + 1/(a0*a1), fixed by the "
                         "local exponent +-(l0+l1)/2; the closed form gives a0/a1 + a1/a0")
        return CheckResult(5, ok, details, notes)

    def criterion_6(self):
        details, ok = {}, True
        for n in self._ns(6):
            lam = reference_lambdas(n)
            num_ok, errs = check_relations(generator_rep(lam, n), tol=1e-12)
            exact = check_relations_exact(n)
            details[f"n={n}"] = {"numeric": errs, "numeric_ok": num_ok,
                                 "exact": exact}
            ok &= num_ok and all(exact.values())
        return CheckResult(6, ok, details)

    def criterion_7(self):
        details, ok = {}, True
        for n in self._ns(7):
            lam = reference_lambdas(n)
            samples = connected_samples(reference_line(n), count=5)
            systems = [restrict_line(n, lam, tp) for tp in samples]
            for fs in systems:
                self.systems.append(("criterion 7", lam, fs))
            table = isomonodromy_scan(systems, tol=self.ode_tol)
            details[f"n={n}"] = {"samples": len(systems), "words": len(table.words),
                                 "max_variation": table.max_variation,
                                 "order_stable": table.order_stable}
            ok &= table.max_variation < 1e-6 and table.order_stable
        return CheckResult(7, ok, details)

    # ---------------------------------------------------------- Garnier

    def criterion_8(self):
        details, ok = {}, True
        h = self.garnier_h
        for n in self._ns(8):
            rows = []
            for _ in range(self.garnier_points):
                lam, _ = self._draw(n)
                p = draw_line(self.rng, n, dps=GARNIER_DPS)
                tp = etale_lift(p, dps=GARNIER_DPS)
                fine = garnier_residual(lam, tp, h)
                coarse = garnier_residual(lam, tp, 10 * h)
                printed = garnier_residual(lam, tp, h, convention="printed")
                ratio = coarse.max / fine.max if fine.max > 0 else mp.inf
                converges = ratio >= 30 or fine.max < 1e-10
                good = fine.max < 1e-4 and converges
                rows.append({"lambda": list(lam), "line": p.flat(),
                             "residual": fine.max, "residual_10h": coarse.max,
                             "ratio": ratio, "order2": converges, "passed": good})
                self.deviation_log.append({"kind": "momentum_sign_convention", "n": n,
                                           "line": p.flat(), "lambda": list(lam),
                                           "printed_residual": printed.max,
                                           "corrected_residual": fine.max})
                self.stencil_leading += list(fine.leading) + list(coarse.leading)
                ok &= good
            details[f"n={n}"] = rows
        th = theta_params(reference_lambdas(2), 2)
        self.deviation_log.append({"kind": "kappa_display", "n": 2,
                                   "lambda": reference_lambdas(2),
                                   "printed": th.kappa_printed, "used": th.kappa})
        return CheckResult(8, ok, details)

    def criterion_9(self):
        worst, count, ok = 0, 0, True
        failures = []
        for origin, lam, nf in self.normalized:
            worst, count, ok = self._degree(origin, lam, nf, worst, count, ok, failures)
        for origin, lam, fs in self.systems:
            worst, count, ok = self._degree(origin, lam, normalize_at_infinity(fs),
                                            worst, count, ok, failures)
        if self.stencil_leading:
            worst = max(worst, max(self.stencil_leading))
            count += len(self.stencil_leading)
        ok &= worst < 1e-10 and count > 0
        details = {"systems": count, "max_relative_leading": worst}
        if failures:
            details["failures"] = failures
        return CheckResult(9, ok, details)

    def _degree(self, origin, lam, nf, worst, count, ok, failures):
        coeffs = spectral_numerator(nf)
        scale = max(abs(c) for c in coeffs)
        lead = abs(coeffs[0]) / scale
        deg_ok = abs(coeffs[1]) / scale > 1e-10
        try:
            spectral_coords(nf, theta_params(lam, nf.n))
        except Exception as exc:
            failures.append(f"{origin}: {exc}")
            deg_ok = False
        return max(worst, lead), count + 1, ok and deg_ok

    def criterion_10(self):
        kinds = {}
        for rec in self.deviation_log:
            kinds[rec["kind"]] = kinds.get(rec["kind"], 0) + 1
        conic = [r for r in self.deviation_log
                 if r["kind"] == "printed_pole_formula" and r["pole"] in ("t1", "t2")]
        residues = [r for r in self.deviation_log if r["kind"] == "closed_form_residue"]
        complete = len(residues) == self.closed_form_deviating
        ok = bool(conic) and self.closed_form_compared > 0 and complete and self.oracle_only
        return CheckResult(10, ok, {"entries": kinds, "conic_pole_mismatch_logged": bool(conic),
                                    "closed_form_poles_compared": self.closed_form_compared,
                                    "closed_form_deviations_logged": len(residues),
                                    "all_deviations_logged": complete,
                                    "acceptance_uses_oracle": self.oracle_only})

    # ---------------------------------------------------------- report

    def report(self, timing=None):
        timing = self.timing if timing is None else timing
        results = [self.results[c] for c in sorted(self.results)]
        return {
            "schema_version": SCHEMA_VERSION,
            "command": "verify-all",
            "seed": self.seed,
            "ns": list(self.ns) if self.ns else None,
            "passed": all(r.passed for r in results),
            "failed": [r.criterion for r in results if not r.passed],
            "checks": [r.as_dict(timing) for r in results],
            "deviation_log": self.deviation_log,
        }
