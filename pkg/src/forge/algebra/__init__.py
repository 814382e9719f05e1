"""Exact algebra: scalars, polynomials, rational functions, forms."""
from .forms import Chart, OneForm, TwoForm, d, dlog, exterior_derivative, wedge
from .poly import Poly, PolyRing
from .rational import RationalFn, known_factors, register_factors, rf, rf_eval, split_known
from .scalar import I, ONE, ZERO, Q, Scalar, format_scalar, scalar, to_complex
from .text import format_form, format_rf, parse_poly, parse_rf, parse_scalar

__all__ = [
    "Chart", "OneForm", "TwoForm", "d", "dlog", "exterior_derivative", "wedge",
    "Poly", "PolyRing", "RationalFn", "known_factors", "register_factors", "rf",
    "rf_eval", "split_known", "I", "ONE", "ZERO", "Q", "Scalar", "format_scalar",
    "scalar", "to_complex", "format_form", "format_rf", "parse_poly", "parse_rf",
    "parse_scalar",
]
