"""One test per acceptance criterion, run through the same pipeline as
``forge verify-all --seed 7``.  Each test records a one-line verdict that
is printed in the terminal summary."""
import pytest

import conftest
from forge.checks import Verifier

SEED = 7


@pytest.fixture(scope="module")
def verifier():
    v = Verifier(seed=SEED)
    v.run()
    return v


def _rows(details):
    for key, val in details.items():
        if key.startswith("n="):
            yield from (val if isinstance(val, list) else [val])


def _worst(details, key):
    return max(float(r[key]) for r in _rows(details))


def _summary(res):
    d = res.details
    c = res.criterion
    if c == 1:
        return ("curvature exactly zero for n=2,3,4: "
                + str(all(d[k]["curvature_zero"] for k in d if k.startswith("n=")))
                + f", {res.seconds:.1f}s (limit 120s)")
    if c == 2:
        return "off-diagonal zero and diagonal match exactly: " + str(res.passed)
    if c == 3:
        return f"max exponent deviation {_worst(d, 'max_exponent_deviation'):.2e} (tol 1e-9)"
    if c == 4:
        return (f"off-diagonal {float(d['max_off_diagonal']):.2e} (tol 1e-10), "
                f"diagonal {float(d['max_diagonal_deviation']):.2e} (tol 1e-9)")
    if c == 5:
        rows = list(_rows(d))
        worst = {}
        for r in rows:
            for lab, v in r["trace_deviation"].items():
                worst[lab] = max(worst.get(lab, 0.0), float(v))
        finite = max(v for lab, v in worst.items() if lab != "inf")
        return (f"det {max(float(r['max_det_deviation']) for r in rows):.1e}, "
                f"product {max(float(r['product_identity_error']) for r in rows):.1e}, "
                f"dihedral {all(r['dihedral'] for r in rows)}, "
                f"finite traces {finite:.1e}, trace at inf {worst['inf']:.2f} (tol 1e-6)")
    if c == 6:
        num = max(float(v) for r in _rows(d) for v in r["numeric"].values())
        exact = all(all(r["exact"].values()) for r in _rows(d))
        return f"numeric {num:.1e} (tol 1e-12), exact {exact}"
    if c == 7:
        return f"max trace variation {_worst(d, 'max_variation'):.1e} (tol 1e-6)"
    if c == 8:
        rows = list(_rows(d))
        return (f"max residual {max(float(r['residual']) for r in rows):.1e} (tol 1e-4) "
                f"at {len(rows)} points, O(h^2) {all(r['order2'] for r in rows)}")
    if c == 9:
        return (f"{d['systems']} systems, leading coefficient "
                f"{float(d['max_relative_leading']):.1e} (tol 1e-10)")
    return (f"log entries {d['entries']}, closed-form comparisons "
            f"{d['closed_form_poles_compared']}")


def _record(verifier, criterion):
    res = verifier.results[criterion]
    line = f"{res.line()}: {_summary(res)}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return res


@pytest.mark.parametrize("criterion", range(1, 11))
def test_criterion(verifier, criterion):
    res = _record(verifier, criterion)
    assert res.passed, res.line()
