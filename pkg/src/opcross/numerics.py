"""Dense linear-algebra kernel used by every other module.

Thin, contract-enforcing wrappers around numpy/scipy plus the JSON
matrix encoding.  All functions are pure; inputs are never mutated.
"""

import numpy as np
import scipy.linalg

from .errors import NonConvergence, Singular

# Relative singular-value threshold below which a matrix counts as singular.
SINGULAR_RTOL = 1e-12


def as_matrix(a, name="matrix"):
    """Coerce to a 2-d float/complex ndarray and reject non-finite entries."""
    m = np.asarray(a)
    if m.dtype.kind not in "fc":
        m = m.astype(float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_square(a, name="matrix"):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def fro(m):
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def eye_like(m):
    return np.eye(m.shape[0], dtype=m.dtype)


def check_invertible(a, rtol=SINGULAR_RTOL, what="matrix"):
    """Raise Singular unless the smallest singular value clears rtol * largest."""
    s = singular_values(a)
    if s[0] == 0.0 or s[-1] < rtol * s[0]:
        raise Singular(f"{what} is numerically singular "
                       f"(smallest/largest singular value = {s[-1]:.3e}/{s[0]:.3e})")


def solve(a, b):
    """Solve A X = B for X.  A must be square and well-conditioned."""
    a = as_square(a, "A")
    b = as_matrix(b, "B") if np.ndim(b) == 2 else np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"row count mismatch: A is {a.shape}, B has {b.shape[0]} rows")
    check_invertible(a, what="A")
    return np.linalg.solve(a, b)


def inv(a):
    a = as_square(a)
    check_invertible(a)
    return np.linalg.inv(a)


def eigenvalues(m):
    """Eigenvalues with multiplicity, sorted by (real, imag)."""
    m = as_square(m)
    try:
        w = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return sort_spectrum(w)


def sort_spectrum(w):
    """Lexicographic (real, imag) sort of a complex eigenvalue multiset."""
    w = np.asarray(w, dtype=complex)
    order = np.lexsort((w.imag, w.real))
    return w[order]


def spectra_close(w1, w2, tol):
    """Pointwise comparison of two sorted spectra."""
    w1 = sort_spectrum(w1)
    w2 = sort_spectrum(w2)
    if w1.shape != w2.shape:
        return False
    return bool(np.max(np.abs(w1 - w2), initial=0.0) <= tol)


def singular_values(m):
    """Singular values, descending."""
    m = as_matrix(m)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def expm(m):
    """Matrix exponential (scaling and squaring)."""
    m = as_square(m)
    return scipy.linalg.expm(m)


# --- JSON encoding -------------------------------------------------------
#
# {"rows": n, "cols": m, "data": [[row], [row], ...]}; a complex entry is
# a two-element [re, im] list.

def matrix_to_json(m):
    m = as_matrix(m)
    rows, cols = m.shape
    if np.iscomplexobj(m):
        data = [[[float(v.real), float(v.imag)] for v in row] for row in m]
    else:
        data = [[float(v) for v in row] for row in m]
    return {"rows": rows, "cols": cols, "data": data}


def _entry_from_json(v):
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValueError(f"bad matrix entry: {v!r}")


def matrix_from_json(obj):
    if not isinstance(obj, dict):
        raise ValueError("matrix JSON must be an object")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"matrix JSON missing/bad field: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise ValueError("matrix dimensions must be positive")
    if not isinstance(data, list) or len(data) != rows:
        raise ValueError(f"expected {rows} rows of data")
    entries = []
    for row in data:
        if not isinstance(row, list) or len(row) != cols:
            raise ValueError(f"expected rows of length {cols}")
        entries.append([_entry_from_json(v) for v in row])
    m = np.array(entries)
    return as_matrix(m)
