"""The operator cross-ratio of four subspaces, in its three presentations,
together with its permutation identities, the cocycle identity, the operator
angle and the pair-equivalence classifier.

The composition-of-projections form (dv_composition) is canonical: the other
formulas are chart expressions validated against it.  The matrix of the
composite is expressed in the stored orthonormal basis of the first subspace;
only spectra and traces of powers are meaningful across bases.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DegeneratePosition, NotPolarization, Singular
from .grassmann import (Subspace, check_complementary, principal_angles,
                        project_parallel, subspace_from_basis)

# The six coset labels of the permutation action (see dv_permuted).
PERMUTATION_LABELS = ("12,34", "34,12", "12,43", "14,32", "13,24", "14,23")


@dataclass(frozen=True)
class CrossRatioResult:
    """A cross-ratio operator with its conjugation invariants.

    matrix       -- the operator in the basis named by basis_space
    basis_space  -- which space carries the matrix ("P1", "chart", ...)
    spectrum     -- eigenvalue multiset, sorted by (real, imag)
    trace_powers -- tr(D^k) for k = 1..K
    """

    matrix: np.ndarray
    basis_space: str
    spectrum: np.ndarray
    trace_powers: np.ndarray

    @classmethod
    def from_matrix(cls, m, basis_space, kmax=None):
        m = numerics.as_square(m)
        if kmax is None:
            kmax = m.shape[0]
        spectrum = numerics.eigenvalues(m)
        traces = []
        power = np.eye(m.shape[0], dtype=m.dtype)
        for _ in range(kmax):
            power = power @ m
            traces.append(np.trace(power))
        traces = np.asarray(traces)
        if not np.iscomplexobj(m):
            traces = traces.real
        return cls(m, basis_space, spectrum, traces)

    @property
    def det(self):
        """Determinant of the operator (the tau-function analog)."""
        d = complex(np.prod(self.spectrum)) if len(self.spectrum) else 1.0
        if abs(d.imag) < 1e-12 * max(1.0, abs(d.real)):
            return d.real
        return d


def _inv_or_singular(m, what):
    s = numerics.singular_values(m)
    if s[0] == 0.0 or s[-1] <= 1e-10 * max(s[0], 1.0):
        raise Singular(f"{what} is not invertible")
    return np.linalg.inv(m)


def _composite_matrix(p1, p2, p3, p4):
    """Matrix of P1 ->(parallel to P4) P3 ->(parallel to P2) P1 in basis(P1)."""
    check_complementary(p1, p2, error=NotPolarization)
    check_complementary(p3, p4, error=NotPolarization)
    step1 = project_parallel(p1.basis, p3, p4)
    step2 = project_parallel(step1, p1, p2)
    return p1.basis.conj().T @ step2


def dv_composition(p1, p2, p3, p4, kmax=None):
    """Cross-ratio DV(P1,P2;P3,P4) as the composite of two oblique projections.

    Requires P1 + P2 = P3 + P4 = ambient (direct sums) and
    dim P1 = dim P3; use dv_unequal for mismatched dimensions.
    """
    if p1.dim != p3.dim:
        raise ValueError("dim P1 != dim P3; use dv_unequal for the reduction")
    return CrossRatioResult.from_matrix(_composite_matrix(p1, p2, p3, p4),
                                        "P1", kmax)


def dv_matrix(t1, t2, t3, t4, pol=None, kmax=None):
    """Chart formula (T1-T2)^-1 (T2-T3)(T3-T4)^-1 (T4-T1).

    The Ti are big-cell coordinates of the four subspaces (square for
    half-dimensional configurations); the result is similar to the
    composition form on the graphed subspaces.
    """
    mats = [numerics.as_matrix(t, f"T{i+1}") for i, t in enumerate((t1, t2, t3, t4))]
    if len({m.shape for m in mats}) != 1:
        raise ValueError("chart coordinates must share one shape")
    if mats[0].shape[0] != mats[0].shape[1]:
        raise ValueError("chart formula needs square (half-dimensional) coordinates")
    if pol is not None and mats[0].shape != (pol.vertical.dim, pol.horizontal.dim):
        raise ValueError("coordinate shape does not match the polarization")
    t1, t2, t3, t4 = mats
    d = _inv_or_singular(t1 - t2, "(T1 - T2)") @ (t2 - t3) \
        @ _inv_or_singular(t3 - t4, "(T3 - T4)") @ (t4 - t1)
    return CrossRatioResult.from_matrix(d, "chart", kmax)


def dv_mixed(p1, p2, p3, p4, kmax=None):
    """Mixed-chart formula (P2 P1 - I)^-1 (P2 P3 - I)(P4 P3 - I)^-1 (P4 P1 - I).

    P1, P3 are coordinates in the (horizontal -> vertical) chart; P2, P4 in
    the swapped (vertical -> horizontal) chart, so no difference of charts is
    ever inverted and the dimensions need not be equal halves.
    """
    p1 = numerics.as_matrix(p1, "P1")
    p2 = numerics.as_matrix(p2, "P2")
    p3 = numerics.as_matrix(p3, "P3")
    p4 = numerics.as_matrix(p4, "P4")
    if p1.shape != p3.shape or p2.shape != p4.shape or p2.shape != p1.shape[::-1]:
        raise ValueError("mixed-chart coordinate shapes are inconsistent")
    eye = np.eye(p1.shape[1])
    d = _inv_or_singular(p2 @ p1 - eye, "(P2 P1 - I)") @ (p2 @ p3 - eye) \
        @ _inv_or_singular(p4 @ p3 - eye, "(P4 P3 - I)") @ (p4 @ p1 - eye)
    return CrossRatioResult.from_matrix(d, "chart", kmax)


def dv_permuted(d, perm, kmax=None):
    """Value of the cross-ratio after permuting the four arguments.

    perm is one of the coset labels "12,34", "34,12", "12,43", "14,32",
    "13,24", "14,23"; with D = DV(P1,P2;P3,P4) the returned operator is the
    one dv_composition produces on the permuted argument order:

        12,34 -> D            34,12 -> D           12,43 -> I - D
        14,32 -> D^-1         13,24 -> (I - D^-1)^-1
        14,23 -> I - D^-1
    """
    m = numerics.as_square(d.matrix if isinstance(d, CrossRatioResult) else d)
    eye = np.eye(m.shape[0], dtype=m.dtype)
    if perm in ("12,34", "34,12"):
        out = m
    elif perm == "12,43":
        out = eye - m
    elif perm == "14,32":
        out = _inv_or_singular(m, "D")
    elif perm == "13,24":
        out = _inv_or_singular(eye - _inv_or_singular(m, "D"), "(I - D^-1)")
    elif perm == "14,23":
        out = eye - _inv_or_singular(m, "D")
    else:
        raise ValueError(f"unknown permutation label {perm!r}; "
                         f"expected one of {PERMUTATION_LABELS}")
    return CrossRatioResult.from_matrix(out, "P1", kmax)


def _restrict_to(space_basis, w, expected_dim, what):
    """Coordinates of a subspace of span(space_basis) in that orthonormal basis."""
    coords = space_basis.conj().T @ w
    sub = subspace_from_basis(coords)
    if sub.dim != expected_dim:
        raise DegeneratePosition(f"{what} has dimension {sub.dim}, expected {expected_dim}")
    # Confirm w really lies inside the space.
    if numerics.fro(w - space_basis @ coords) > 1e-8:
        raise DegeneratePosition(f"{what} does not lie in the invariant subspace")
    return sub


def dv_unequal(p1, p2, p3, p4, kmax=None):
    """Cross-ratio for arguments of unequal dimensions.

    The pair of smaller subspaces spans an invariant subspace S; the larger
    two are intersected with S and the cross-ratio is computed inside S.
    Coincides with dv_composition when all dimensions already agree.
    """
    from .grassmann import intersect_subspaces
    if p1.dim != p3.dim or p2.dim != p4.dim:
        raise ValueError("need dim P1 = dim P3 and dim P2 = dim P4")
    if p1.dim + p2.dim != p1.ambient_dim:
        raise NotPolarization("dim P1 + dim P2 != ambient dimension")
    if p1.dim == p2.dim:
        return dv_composition(p1, p2, p3, p4, kmax)
    if p1.dim < p2.dim:
        small_a, small_b, big_a, big_b = p1, p3, p2, p4
        order_in_s = "small_first"
    else:
        small_a, small_b, big_a, big_b = p2, p4, p1, p3
        order_in_s = "big_first"
    span = np.hstack([small_a.basis, small_b.basis])
    s = numerics.singular_values(span)
    if s[-1] <= 1e-8:
        raise DegeneratePosition("the two small subspaces are not in direct sum")
    s_basis, _, _ = np.linalg.svd(span, full_matrices=False)
    k = small_a.dim

    def in_s(w_basis, what):
        return _restrict_to(s_basis, w_basis, k, what)

    sa = in_s(small_a.basis, "first small subspace")
    sb = in_s(small_b.basis, "second small subspace")
    ia = intersect_subspaces(big_a, subspace_from_basis(s_basis))
    ib = intersect_subspaces(big_b, subspace_from_basis(s_basis))
    if ia.shape[1] != k or ib.shape[1] != k:
        raise DegeneratePosition(
            f"intersections have dims {ia.shape[1]}, {ib.shape[1]}; expected {k}")
    ba = in_s(ia, "first intersection")
    bb = in_s(ib, "second intersection")
    if order_in_s == "small_first":
        q1, q2, q3, q4 = sa, ba, sb, bb
    else:
        q1, q2, q3, q4 = ba, sa, bb, sb
    return dv_composition(q1, q2, q3, q4, kmax)


def cocycle_product(p1, p2, q1, q2, q3):
    """The product of the three transition cross-ratios, as a matrix on P1.

    Computed by chasing the basis of P1 through the six-arrow chain of
    oblique projections; equals the identity whenever every (Pi, Qj) is a
    polarization.  Returned for residual inspection.
    """
    for p in (p1, p2):
        for q in (q1, q2, q3):
            check_complementary(p, q, error=NotPolarization)
    x = p1.basis
    x = project_parallel(x, p2, q2)
    x = project_parallel(x, p1, q1)
    x = project_parallel(x, p2, q1)
    x = project_parallel(x, p1, q3)
    x = project_parallel(x, p2, q3)
    x = project_parallel(x, p1, q2)
    return p1.basis.conj().T @ x


def operator_angle(a, b, kmax=None):
    """Operator angle (I+A*A)^-1 (I+A*B)(I+B*B)^-1 (I+B*A) of two charts.

    Eigenvalues are the squared cosines of the principal angles between the
    graphed subspaces; (I+A*A) and (I+B*B) are positive definite, so no
    invertibility precondition is needed.
    """
    a = numerics.as_matrix(a, "A")
    b = numerics.as_matrix(b, "B")
    if a.shape != b.shape:
        raise ValueError("A and B must have the same shape")
    ah, bh = a.conj().T, b.conj().T
    eye = np.eye(a.shape[1])
    m = np.linalg.solve(eye + ah @ a, eye + ah @ b) \
        @ np.linalg.solve(eye + bh @ b, eye + bh @ a)
    return CrossRatioResult.from_matrix(m, "chart", kmax)


def comparable(v, w, tol=1e-8):
    """True iff W = alpha V beta for some unitary alpha, beta.

    At finite dimension this is exactly equality of the singular-value
    vectors, compared pointwise within tol.
    """
    v = numerics.as_matrix(v, "V")
    w = numerics.as_matrix(w, "W")
    if v.shape != w.shape:
        return False
    sv = numerics.singular_values(v)
    sw = numerics.singular_values(w)
    return bool(np.max(np.abs(sv - sw), initial=0.0) <= tol)


def comparability_witness(v, w):
    """Unitary alpha, beta with alpha V beta = W, from two full SVDs.

    V = U1 S V1*, W = U2 S V2* gives alpha = U2 U1*, beta = V1 V2*; the
    identity alpha V beta = W is exact whenever the singular values agree.
    """
    v = numerics.as_matrix(v, "V")
    w = numerics.as_matrix(w, "W")
    if v.shape != w.shape:
        raise ValueError("V and W must have the same shape")
    u1, _, v1h = np.linalg.svd(v)
    u2, _, v2h = np.linalg.svd(w)
    alpha = u2 @ u1.conj().T
    beta = v1h.conj().T @ v2h
    return alpha, beta


def pair_equivalent(p, q, s, t, tol=1e-6):
    """Whether pairs (P,Q) and (S,T) are related by one orthogonal map.

    The decision compares the principal-angle multisets (the chart-free
    form of the operator-angle criterion).  Pairs with mismatched
    dimensions are never equivalent.
    """
    if p.dim != s.dim or q.dim != t.dim:
        return False
    if p.ambient_dim != q.ambient_dim or s.ambient_dim != t.ambient_dim \
            or p.ambient_dim != s.ambient_dim:
        return False
    ang1 = principal_angles(p, q)
    ang2 = principal_angles(s, t)
    return bool(np.max(np.abs(ang1 - ang2), initial=0.0) <= tol)
