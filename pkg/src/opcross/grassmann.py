"""Subspaces, polarizations, oblique projections, graph coordinates and the
block Moebius action on them.

A subspace is always stored as an orthonormal basis; oblique (non-orthogonal)
structure lives in the operations, not the type.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import numerics
from .errors import NotComplementary, NotPolarization, OutsideChart, RankDeficient

# A stacked basis whose smallest singular value falls below this has an
# "infinitesimally small" angle between its two halves and is rejected.
COMPLEMENT_TOL = 1e-8


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional subspace of an n-dimensional inner-product space.

    ``basis`` is an n x k matrix with orthonormal columns.  Use
    :func:`subspace_from_basis` to build one from arbitrary spanning columns.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = numerics.as_matrix(self.basis, "basis")
        n, k = b.shape
        if not (1 <= k <= n):
            raise ValueError(f"need 1 <= dim <= ambient_dim, got basis shape {b.shape}")
        gram = b.conj().T @ b
        if numerics.fro(gram - np.eye(k)) > 1e-10:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        """The orthogonal projector onto the subspace."""
        return self.basis @ self.basis.conj().T

    def contains(self, x, tol=1e-8):
        x = np.asarray(x)
        return numerics.fro(x - self.projector() @ x) <= tol * max(1.0, numerics.fro(x))

    def to_json(self):
        return {"ambient": self.ambient_dim, "dim": self.dim,
                "basis": numerics.matrix_to_json(self.basis)}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "basis" not in obj:
            raise ValueError("subspace JSON must be an object with a 'basis' field")
        basis = numerics.matrix_from_json(obj["basis"])
        if "ambient" in obj and int(obj["ambient"]) != basis.shape[0]:
            raise ValueError("subspace 'ambient' disagrees with basis shape")
        if "dim" in obj and int(obj["dim"]) != basis.shape[1]:
            raise ValueError("subspace 'dim' disagrees with basis shape")
        return subspace_from_basis(basis)


def subspace_from_basis(cols):
    """Orthonormalize full-column-rank columns into a Subspace.

    Raises RankDeficient when the columns do not have full rank.
    """
    cols = numerics.as_matrix(cols, "cols")
    s = numerics.singular_values(cols)
    if s[0] == 0.0 or s[-1] <= 1e-10 * s[0]:
        raise RankDeficient(f"columns have numerical rank < {cols.shape[1]}")
    u, _, _ = np.linalg.svd(cols, full_matrices=False)
    return Subspace(u)


def same_subspace(w1, w2, tol=1e-8):
    """Projector-distance equality test."""
    if w1.ambient_dim != w2.ambient_dim:
        return False
    return numerics.fro(w1.projector() - w2.projector()) <= tol


def random_subspace(n, k, seed):
    """Deterministic random k-dim subspace of R^n from a seeded Gaussian."""
    if not (1 <= k < n):
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    return subspace_from_basis(rng.standard_normal((n, k)))


def _stacked(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    return np.hstack([a.basis, b.basis])


def check_complementary(onto, along, tol=COMPLEMENT_TOL, error=NotComplementary):
    """Verify onto + along = ambient as a direct sum with a definite angle."""
    if onto.dim + along.dim != onto.ambient_dim:
        raise error(f"dims {onto.dim}+{along.dim} != ambient {onto.ambient_dim}")
    stacked = _stacked(onto, along)
    s = numerics.singular_values(stacked)
    if s[-1] <= tol:
        raise error(f"stacked basis nearly singular (sigma_min = {s[-1]:.3e})")
    return stacked


@dataclass(frozen=True)
class Polarization:
    """An ordered direct-sum decomposition ambient = horizontal + vertical."""

    horizontal: Subspace
    vertical: Subspace

    def __post_init__(self):
        check_complementary(self.horizontal, self.vertical, error=NotPolarization)

    @property
    def ambient_dim(self):
        return self.horizontal.ambient_dim

    def swapped(self):
        return Polarization(self.vertical, self.horizontal)

    def frame(self):
        """The (invertible) n x n matrix [horizontal basis | vertical basis]."""
        return np.hstack([self.horizontal.basis, self.vertical.basis])

    def to_json(self):
        return {"horizontal": self.horizontal.to_json(),
                "vertical": self.vertical.to_json()}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise ValueError("polarization JSON must be an object")
        return cls(Subspace.from_json(obj["horizontal"]),
                   Subspace.from_json(obj["vertical"]))


def standard_polarization(n, k=None):
    """First-k-coordinates vs the rest; k defaults to ceil(n/2)."""
    if k is None:
        k = (n + 1) // 2
    eye = np.eye(n)
    return Polarization(Subspace(eye[:, :k]), Subspace(eye[:, k:]))


def project_parallel(x, onto, along):
    """Project x onto `onto` parallel to `along` (oblique projection).

    x may be a vector or a matrix of column vectors; the unique y in `onto`
    with x - y in `along` is returned.
    """
    stacked = check_complementary(onto, along)
    x = np.asarray(x)
    coeffs = np.linalg.solve(stacked, x)
    return onto.basis @ coeffs[: onto.dim]


def graph_coordinate(w, pol):
    """Chart coordinate T of w in the big cell of pol: w = {(f, T f)}.

    T maps horizontal coordinates to vertical coordinates and has shape
    vertical.dim x horizontal.dim.  Raises OutsideChart when w does not
    project isomorphically onto the horizontal subspace.
    """
    if w.ambient_dim != pol.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if w.dim != pol.horizontal.dim:
        raise OutsideChart(f"dim {w.dim} != horizontal dim {pol.horizontal.dim}")
    coords = np.linalg.solve(pol.frame(), w.basis)
    h = pol.horizontal.dim
    x, y = coords[:h], coords[h:]
    s = numerics.singular_values(x)
    if s[0] == 0.0 or s[-1] <= 1e-10 * max(s[0], 1.0):
        raise OutsideChart("projection onto the horizontal subspace is singular")
    return y @ np.linalg.inv(x)


def subspace_from_graph(t, pol):
    """Inverse of graph_coordinate: the span of {h + vertical(T h)}."""
    t = numerics.as_matrix(t, "T")
    h, v = pol.horizontal.dim, pol.vertical.dim
    if t.shape != (v, h):
        raise ValueError(f"T must be {v}x{h}, got {t.shape}")
    return subspace_from_basis(pol.horizontal.basis + pol.vertical.basis @ t)


@dataclass(frozen=True)
class BlockMobius:
    """Blocks (a, b; c, d) of an invertible matrix relative to a polarization.

    With pol = None the blocks act directly in ambient coordinates split as
    (first k, last n-k); otherwise they act in the polarization's frame.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    pol: Polarization | None = field(default=None)

    def __post_init__(self):
        a = numerics.as_matrix(self.a, "a")
        b = numerics.as_matrix(self.b, "b")
        c = numerics.as_matrix(self.c, "c")
        d = numerics.as_matrix(self.d, "d")
        if a.shape[0] != b.shape[0] or c.shape[0] != d.shape[0] \
                or a.shape[1] != c.shape[1] or b.shape[1] != d.shape[1]:
            raise ValueError("block shapes are inconsistent")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        m = self.assembled()
        s = numerics.singular_values(m)
        if s[0] == 0.0 or s[-1] <= 1e-10 * s[0]:
            raise ValueError("assembled block matrix is singular")

    def assembled(self):
        """The full matrix in the polarization's coordinate frame."""
        return np.block([[self.a, self.b], [self.c, self.d]])

    def ambient_matrix(self):
        """The action realized on ambient vectors."""
        m = self.assembled()
        if self.pol is None:
            return m
        f = self.pol.frame()
        return f @ m @ np.linalg.inv(f)

    @classmethod
    def from_matrix(cls, m, k, pol=None):
        m = numerics.as_square(m)
        return cls(m[:k, :k], m[:k, k:], m[k:, :k], m[k:, k:], pol)


def mobius_apply_coordinate(g, t):
    """Chart-level Moebius action T -> (c + d T)(a + b T)^-1."""
    t = numerics.as_matrix(t, "T")
    den = g.a + g.b @ t
    s = numerics.singular_values(den)
    if s[0] == 0.0 or s[-1] <= 1e-10 * max(s[0], 1.0):
        raise OutsideChart("(a + bT) is singular: image leaves the big cell")
    return (g.c + g.d @ t) @ np.linalg.inv(den)


def mobius_apply_subspace(g, w):
    """Image of the subspace under the assembled invertible matrix."""
    return subspace_from_basis(g.ambient_matrix() @ w.basis)


def principal_angles(w1, w2):
    """Ascending principal angles in [0, pi/2] between two subspaces."""
    if w1.ambient_dim != w2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    cosines = numerics.singular_values(w1.basis.conj().T @ w2.basis)
    cosines = np.clip(cosines, 0.0, 1.0)
    return np.sort(np.arccos(cosines))


def intersect_subspaces(w1, w2, tol=1e-8):
    """Orthonormal basis of the intersection; may be empty (n x 0).

    A vector lies in both spans iff (a, b) with B1 a = B2 b is in the null
    space of [B1 | -B2].
    """
    if w1.ambient_dim != w2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    stacked = np.hstack([w1.basis, -w2.basis])
    ns = scipy.linalg.null_space(stacked, rcond=tol)
    if ns.shape[1] == 0:
        return np.zeros((w1.ambient_dim, 0))
    cols = w1.basis @ ns[: w1.dim]
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.count_nonzero(s > tol))
    return u[:, :rank]
