import numpy as np
import pytest

import opcross as oc
from opcross import crossratio, grassmann
from opcross import schwarzian as sz


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_half_dim_charts(rng, n, need_invertible_verticals=False):
    """Four big-cell coordinates (k x k, k = n/2) giving an admissible
    cross-ratio configuration; optionally T2, T4 invertible so the swapped
    chart exists too."""
    k = n // 2
    pol = grassmann.standard_polarization(n, k)
    while True:
        ts = [rng.standard_normal((k, k)) for _ in range(4)]
        try:
            subs = [grassmann.subspace_from_graph(t, pol) for t in ts]
            crossratio.dv_composition(*subs)
            crossratio.dv_matrix(*ts)
            if need_invertible_verticals:
                grassmann.graph_coordinate(subs[1], pol.swapped())
                grassmann.graph_coordinate(subs[3], pol.swapped())
        except Exception:
            continue
        return ts, subs, pol


def random_conditioned(rng, n, cond_max=1e3):
    """Random invertible matrix with condition number below cond_max."""
    while True:
        m = rng.standard_normal((n, n))
        s = np.linalg.svd(m, compute_uv=False)
        if s[0] / s[-1] <= cond_max:
            return m


def polynomial_curve(rng, k, degree=4, scale=0.3):
    """Coefficients of a matrix-polynomial curve with z'(0) well conditioned,
    plus an exact jet evaluator."""
    from math import factorial

    coeffs = [scale * rng.standard_normal((k, k)) for _ in range(degree + 1)]
    coeffs[1] = np.eye(k) + scale * rng.standard_normal((k, k))

    def jet_at(t):
        def deriv(order):
            return sum(factorial(i) // factorial(i - order) * c * t ** (i - order)
                       for i, c in enumerate(coeffs) if i >= order)
        return sz.CurveJet(t, deriv(0), deriv(1), deriv(2), deriv(3))

    return coeffs, jet_at


def pair_with_angles(thetas, n, rng=None):
    """A subspace pair in R^n with the prescribed principal angles,
    optionally moved by a random orthogonal map."""
    k = len(thetas)
    assert 2 * k <= n
    pb = np.zeros((n, k))
    qb = np.zeros((n, k))
    for j, th in enumerate(thetas):
        pb[j, j] = 1.0
        qb[j, j] = np.cos(th)
        qb[k + j, j] = np.sin(th)
    p, q = oc.Subspace(pb), oc.subspace_from_basis(qb)
    if rng is not None:
        g = random_orthogonal(rng, n)
        p = oc.subspace_from_basis(g @ p.basis)
        q = oc.subspace_from_basis(g @ q.basis)
    return p, q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
