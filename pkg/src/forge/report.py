"""Deterministic JSON and CSV emission.

Exact rationals become strings "p/q", Gaussian rationals a pair of such
strings, floats are printed with 17 significant digits and complex floats as
[re, im].  Key order is insertion order, so equal inputs give equal bytes.
"""
from __future__ import annotations

import json
import math

import mpmath as mp
import numpy as np

from .algebra.scalar import Scalar, imag_part, real_part

SCHEMA_VERSION = 1


def exact_text(q):
    return f"{q.numerator}/{q.denominator}"


def _float_text(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _is_mpq(x):
    return type(x).__name__ == "mpq"


def _encode(obj, out):
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif _is_mpq(obj):
        out.append(json.dumps(exact_text(obj)))
    elif isinstance(obj, Scalar):
        re, im = real_part(obj), imag_part(obj)
        out.append(f'["{exact_text(re)}", "{exact_text(im)}"]')
    elif isinstance(obj, (float, np.floating, mp.mpf)):
        out.append(_float_text(obj))
    elif isinstance(obj, (complex, np.complexfloating, mp.mpc)):
        z = complex(obj)
        out.append(f"[{_float_text(z.real)}, {_float_text(z.imag)}]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, mp.matrix):
        _encode([[obj[i, j] for j in range(obj.cols)] for i in range(obj.rows)], out)
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    out = []
    _encode(obj, out)
    return "".join(out)


def complex_text(z):
    z = complex(z)
    return f"{format(z.real, '.17g')}{'+' if z.imag >= 0 else '-'}{format(abs(z.imag), '.17g')}j"


def csv_text(header, rows):
    """Rows of floats, complex numbers or strings; complex values are written
    as ``re+imj``."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, complex):
                cells.append(complex_text(v))
            elif isinstance(v, float):
                cells.append(format(v, ".17g"))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
