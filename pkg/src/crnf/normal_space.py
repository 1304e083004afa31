"""Remainder space for the complete formal normal form.

A hypersurface at a generic Levi degeneracy can be written

    im w = <z',zbar'>_{r,s} + 2 Re(zbar^n p_R(z)) + F(z, zbar, re w)

with F real and of weighted order >= 4.  The normalization procedure
removes everything from F except a remainder N lying in a prescribed
graded subspace, defined type by type ((k,l) = bidegree in (z, zbar),
s-powers handled slice by slice):

  * no (k,0) or (0,l) components at all;
  * N_11 in ker D,            D = <grad', gradbar'> = sum_j eps_j d_j dbar_j;
  * N_21 = zbar^n H_20 with H_20 independent of z^n;
  * N_31 in ker qbar(grad,gradbar) with q = <z',zbar'> p_R  (the Fischer
    complement of the line spanned by <z',zbar'> p_R);
  * N_22 = <z',zbar'> z^n zbar^n H_00 + H_22,  H_22 in ker D;
  * N_32 = <z',zbar'>^2 z^n H_00 + <z',zbar'> H_21 + H_32,
    H_21 in ker D (type (2,1)), H_32 in ker D;
  * N_42 = <z',zbar'> zbar^n H_30 + H_42, H_30 independent of z^n,
    H_42 in ker D;
  * N_33 = <z',zbar'>^2 (z^n H_01 + conj) + H_33,  H_33 in ker D^2;
  * N_k1 = zbar^n H_k0 (k >= 4) with H_k0 independent of z^n;
  * every other type is unconstrained.

These clauses were validated computationally: together with the
second-order-jet gauge conditions on the transformation they make the
degree-by-degree normalization system square and invertible (see
full_nf).  Each clause builder can be overridden through the
``clauses`` argument of the public functions.

All constructions are finite-dimensional linear algebra on coefficient
slices.  Real bases are kept in "stacked" coordinates (Re parts then Im
parts of the type-(k,l) coefficient vector, k >= l); for k > l the
type-(l,k) coefficients of a real series are implied by conjugation,
and for k = l bases are restricted to the conjugation-symmetric real
slice.
"""

from __future__ import annotations

import numpy as np

from .series import DEFAULT_TOL, STORE_TOL, MixedSeries
from .fischer import mons, type_basis
from .hypersurfaces import p_R_poly


# ---------------------------------------------------------------------------
# differential operators


def eps_signs(n, r):
    """Signs of the primed bilinear form: +1 (first r), -1 (rest)."""
    return [1.0] * r + [-1.0] * (n - 1 - r)


def bilinear_laplacian(F: MixedSeries, r) -> MixedSeries:
    """<grad', gradbar'> F = sum_{j<n} eps_j d^2 F / dz^j dzbar^j."""
    n = F.n
    out = MixedSeries.zero(n, F.trunc)
    for j, e in enumerate(eps_signs(n, r)):
        out = out + F.diff("z", j + 1).diff("zb", j + 1) * e
    return MixedSeries(n, F.trunc, out.coeffs)


def S_R_apply(u: MixedSeries, r, R) -> MixedSeries:
    """S_R u = -<grad', gradbar'>(p_R u); maps type (k-1,l+1) to (k,l)."""
    pr = p_R_poly(u.n, u.trunc, R)
    return bilinear_laplacian(pr * u, r) * (-1.0)


def p_R_grad(F: MixedSeries, R) -> MixedSeries:
    """p_R(grad) F with p_R(z) = z'^t R z' + (z^n)^2 (holomorphic slots)."""
    n = F.n
    R = np.asarray(R, dtype=complex)
    out = F.diff("z", n).diff("z", n)
    for i in range(n - 1):
        for j in range(n - 1):
            if abs(R[i, j]) > STORE_TOL:
                out = out + F.diff("z", i + 1).diff("z", j + 1) * R[i, j]
    return MixedSeries(n, F.trunc, out.coeffs)


# ---------------------------------------------------------------------------
# slice linear algebra helpers


def _op_matrix(op, n, trunc, src_basis, dst_basis):
    """Matrix of a series operator between two monomial slices."""
    cols = np.zeros((len(dst_basis), len(src_basis)), dtype=complex)
    index = {key: i for i, key in enumerate(dst_basis)}
    for j, key in enumerate(src_basis):
        img = op(MixedSeries(n, trunc, {key: 1.0}, _normalized=True))
        for k, v in img.coeffs.items():
            if k in index:
                cols[index[k], j] = v
    return cols


def _mult_cols(poly: MixedSeries, n, trunc, src_basis, dst_basis):
    """Columns spanned by poly * (src monomials), on the dst slice."""
    return _op_matrix(lambda e: poly * e, n, trunc, src_basis, dst_basis)


def _complex_nullspace(A, tol=1e-10):
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > tol * (s[0] if len(s) else 1.0)))
    return vh[rank:].conj().T


def _real_colspace(cols, tol=1e-10):
    """Orthonormal real column space basis (input real matrix)."""
    if cols.size == 0:
        return np.zeros((cols.shape[0], 0))
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > tol * (s[0] if len(s) else 1.0)))
    return u[:, :rank]


def _realize(B):
    """Complex basis (d x p) -> real basis (2d x 2p): columns v, iv."""
    d, p = B.shape
    out = np.zeros((2 * d, 2 * p))
    out[:d, :p] = B.real
    out[d:, :p] = B.imag
    out[:d, p:] = -B.imag
    out[d:, p:] = B.real
    return out


def _sigma_matrix(basis, n):
    """Conjugate-flip involution on a self-conjugate (k,k) slice, in
    stacked real coordinates: sigma(c)_(a,b,m) = conj(c_(b,a,m))."""
    d = len(basis)
    index = {key: i for i, key in enumerate(basis)}
    S = np.zeros((2 * d, 2 * d))
    for i, key in enumerate(basis):
        a, b, m = key[:n], key[n : 2 * n], key[2 * n]
        j = index[b + a + (m,)]
        S[j, i] = 1.0
        S[d + j, d + i] = -1.0
    return S


# ---------------------------------------------------------------------------
# clause builders

_QP_CACHE = {}


def _ctx_polys(n, r, R, trunc):
    key = (n, r, tuple(np.asarray(R, dtype=complex).ravel().round(14)), trunc)
    if key not in _QP_CACHE:
        z = [MixedSeries.variable(n, trunc, "z", i + 1) for i in range(n)]
        zb = [MixedSeries.variable(n, trunc, "zb", i + 1) for i in range(n)]
        Q = MixedSeries.zero(n, trunc)
        for j, e in enumerate(eps_signs(n, r)):
            Q = Q + z[j] * zb[j] * e
        pr = p_R_poly(n, trunc, R)
        _QP_CACHE[key] = (Q, pr, z[n - 1], zb[n - 1])
    return _QP_CACHE[key]


def _lap_null(n, r, trunc, k, l, m, power=1):
    basis = type_basis(n, k, l, m)
    if k < power or l < power:
        return np.eye(len(basis), dtype=complex)
    op = lambda e: bilinear_laplacian(e, r)
    if power == 2:
        inner = op
        op = lambda e: bilinear_laplacian(inner(e), r)
    A = _op_matrix(op, n, trunc, basis, type_basis(n, k - power, l - power, m))
    return _complex_nullspace(A)


def _clause_11(n, r, R, trunc, m):
    return _lap_null(n, r, trunc, 1, 1, m)


def _clause_21(n, r, R, trunc, m):
    # zbar^n H_20, H_20 independent of z^n
    basis = type_basis(n, 2, 1, m)
    index = {key: i for i, key in enumerate(basis)}
    en = tuple([0] * (n - 1) + [1])
    cols = []
    for a in mons(n, 2):
        if a[n - 1] == 0:
            v = np.zeros(len(basis), dtype=complex)
            v[index[a + en + (m,)]] = 1.0
            cols.append(v)
    return np.column_stack(cols) if cols else np.zeros((len(basis), 0), dtype=complex)


def _clause_31(n, r, R, trunc, m):
    # Fischer complement of the line C * (<z',zbar'> p_R)
    Q, pr, _, _ = _ctx_polys(n, r, R, trunc)
    q = Q * pr
    basis = type_basis(n, 3, 1, m)
    row = np.zeros((1, len(basis)), dtype=complex)
    fact = np.array([1, 1, 2, 6, 24, 120, 720], dtype=float)
    for i, key in enumerate(basis):
        a, b = key[:n], key[n : 2 * n]
        c = q.coeff(a, b, 0)
        # qbar(grad,gradbar) z^a zbar^b = conj(q_{a,b}) a! b!
        row[0, i] = np.conj(c) * np.prod(fact[list(a)]) * np.prod(fact[list(b)])
    return _complex_nullspace(row)


def _clause_22(n, r, R, trunc, m):
    Q, _, zn, znb = _ctx_polys(n, r, R, trunc)
    basis = type_basis(n, 2, 2, m)
    ker = _lap_null(n, r, trunc, 2, 2, m)
    extra = _mult_cols(
        Q * zn * znb, n, trunc, type_basis(n, 0, 0, m), basis
    )
    cols = np.column_stack([ker, extra])
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :rank]


def _clause_32(n, r, R, trunc, m):
    Q, _, zn, _ = _ctx_polys(n, r, R, trunc)
    basis = type_basis(n, 3, 2, m)
    parts = [
        _mult_cols(Q * Q * zn, n, trunc, type_basis(n, 0, 0, m), basis),
        _mult_cols(Q, n, trunc, type_basis(n, 2, 1, m), basis)
        @ _lap_null(n, r, trunc, 2, 1, m),
        _lap_null(n, r, trunc, 3, 2, m),
    ]
    cols = np.column_stack(parts)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :rank]


def _clause_42(n, r, R, trunc, m):
    Q, _, _, znb = _ctx_polys(n, r, R, trunc)
    basis = type_basis(n, 4, 2, m)
    h30 = [a + (0,) * n + (m,) for a in mons(n, 3) if a[n - 1] == 0]
    parts = [
        _mult_cols(Q * znb, n, trunc, h30, basis) if h30 else
        np.zeros((len(basis), 0), dtype=complex),
        _lap_null(n, r, trunc, 4, 2, m),
    ]
    cols = np.column_stack(parts)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :rank]


def _clause_k1(k):
    def build(n, r, R, trunc, m):
        basis = type_basis(n, k, 1, m)
        index = {key: i for i, key in enumerate(basis)}
        en = tuple([0] * (n - 1) + [1])
        cols = []
        for a in mons(n, k):
            if a[n - 1] == 0:
                v = np.zeros(len(basis), dtype=complex)
                v[index[a + en + (m,)]] = 1.0
                cols.append(v)
        return (
            np.column_stack(cols)
            if cols
            else np.zeros((len(basis), 0), dtype=complex)
        )

    return build


def _clause_33_real(n, r, R, trunc, m):
    """Real basis (stacked coords) of the (3,3) remainder slice:
    ker D^2 plus the real span of Q^2 (z^n H_01 + conj)."""
    Q, _, zn, _ = _ctx_polys(n, r, R, trunc)
    basis = type_basis(n, 3, 3, m)
    d = len(basis)
    cols = [_realize(_lap_null(n, r, trunc, 3, 3, m, power=2))]
    index = {key: i for i, key in enumerate(basis)}
    for j in range(n):
        e = [0] * n
        e[j] = 1
        h01 = MixedSeries(n, trunc, {(0,) * n + tuple(e) + (m,): 1.0}, _normalized=True)
        for coef in (1.0, 1.0j):
            elt = Q * Q * zn * h01 * coef
            elt = elt + elt.conj()
            v = np.zeros(2 * d)
            for kk, vv in elt.coeffs.items():
                if kk in index:
                    v[index[kk]] = vv.real
                    v[d + index[kk]] = vv.imag
            cols.append(v.reshape(-1, 1))
    return _real_colspace(np.column_stack(cols))


#: clause registry: (k,l) -> builder(n, r, R, trunc, m).
#: complex-valued builders return a complex basis of the (k,l) slice;
#: builders whose name ends in ``_real`` return stacked real bases.
DEFAULT_CLAUSES = {
    (1, 1): _clause_11,
    (2, 1): _clause_21,
    (3, 1): _clause_31,
    (2, 2): _clause_22,
    (3, 2): _clause_32,
    (4, 2): _clause_42,
    (3, 3): _clause_33_real,
}
_REAL_CLAUSES = {(3, 3)}


def _clause_for(k, l, clauses):
    if (k, l) in clauses:
        return clauses[(k, l)], (k, l) in _REAL_CLAUSES
    if l == 1 and k >= 4:
        return _clause_k1(k), False
    return None, False


_BASIS_CACHE = {}


def normal_slice_real_basis(n, r, R, k, l, m, trunc, clauses=None):
    """Orthonormal real basis (stacked coords, 2d rows) of the remainder
    subspace of the type-(k,l), s^m slice; requires k >= l >= 1.

    Unlisted types return the full slice; for k = l the basis spans the
    conjugation-symmetric real points only.
    """
    if k < l:
        raise ValueError("use k >= l; the (l,k) part follows by conjugation")
    reg = DEFAULT_CLAUSES if clauses is None else clauses
    cache_key = None
    if clauses is None:
        cache_key = (
            n, r, tuple(np.asarray(R, dtype=complex).ravel().round(14)), k, l, m
        )
        if cache_key in _BASIS_CACHE:
            return _BASIS_CACHE[cache_key]
    basis = type_basis(n, k, l, m)
    d = len(basis)
    builder, is_real = _clause_for(k, l, reg)
    if builder is None:
        out = _realize(np.eye(d, dtype=complex))
    elif is_real:
        out = builder(n, r, R, trunc, m)
    else:
        out = _realize(builder(n, r, R, trunc, m))
    if k == l:
        P = 0.5 * (np.eye(2 * d) + _sigma_matrix(basis, n))
        out = _real_colspace(P @ out)
    else:
        out = _real_colspace(out)
    if cache_key is not None:
        _BASIS_CACHE[cache_key] = out
    return out


# ---------------------------------------------------------------------------
# membership and projection


def _type_slices(F: MixedSeries):
    """Split into {(k,l,m): coefficient dict} pieces."""
    n = F.n
    out = {}
    for key, v in F.coeffs.items():
        k, l, m = sum(key[:n]), sum(key[n : 2 * n]), key[2 * n]
        out.setdefault((k, l, m), {})[key] = v
    return out


def _slice_vector(coeffs, basis):
    v = np.zeros(len(basis), dtype=complex)
    index = {key: i for i, key in enumerate(basis)}
    for key, val in coeffs.items():
        v[index[key]] = val
    return v


def _stack(v):
    return np.concatenate([v.real, v.imag])


def _unstack(x):
    d = len(x) // 2
    return x[:d] + 1j * x[d:]


def normal_space_report(F: MixedSeries, r, R, tol=DEFAULT_TOL, clauses=None):
    """Per-type membership certificates for the remainder space.

    Returns {(k,l,m): {"listed", "residual", "ok"}} for k >= l; the
    conjugate (l,k) parts are implied by reality of F.
    """
    if not F.is_real(tol):
        raise ValueError("input series must be real")
    n = F.n
    slices = _type_slices(F)
    report = {}
    for (k, l, m), coeffs in sorted(slices.items()):
        if k < l:
            continue
        scale = max(abs(v) for v in coeffs.values())
        if k == 0 or l == 0:
            report[(k, l, m)] = {
                "listed": True,
                "residual": scale,
                "ok": scale <= tol,
            }
            continue
        builder, _ = _clause_for(k, l, DEFAULT_CLAUSES if clauses is None else clauses)
        if builder is None:
            report[(k, l, m)] = {"listed": False, "residual": 0.0, "ok": True}
            continue
        B = normal_slice_real_basis(n, r, R, k, l, m, F.trunc, clauses)
        x = _stack(_slice_vector(coeffs, type_basis(n, k, l, m)))
        resid = float(np.linalg.norm(x - B @ (B.T @ x)))
        report[(k, l, m)] = {
            "listed": True,
            "residual": resid,
            "ok": resid <= tol * (1.0 + scale),
        }
    return report


def is_in_normal_space(F: MixedSeries, r, R, tol=DEFAULT_TOL, clauses=None):
    report = normal_space_report(F, r, R, tol, clauses)
    return all(entry["ok"] for entry in report.values())


def project_normal(F: MixedSeries, r, R, tol=DEFAULT_TOL, clauses=None):
    """Orthogonal projection (coefficient metric) onto the remainder
    space: returns (N, complement) with F = N + complement, N in the
    remainder space and complement orthogonal to it.

    F must be real; all type slices are processed.
    """
    if not F.is_real(tol):
        raise ValueError("input series must be real")
    n, trunc = F.n, F.trunc
    slices = _type_slices(F)
    N_coeffs = {}
    for (k, l, m), coeffs in slices.items():
        if k < l:
            continue  # filled by conjugation
        if k == 0 or l == 0:
            continue  # projection is zero
        builder, _ = _clause_for(k, l, DEFAULT_CLAUSES if clauses is None else clauses)
        basis = type_basis(n, k, l, m)
        if builder is None:
            proj = _slice_vector(coeffs, basis)
        else:
            B = normal_slice_real_basis(n, r, R, k, l, m, trunc, clauses)
            x = _stack(_slice_vector(coeffs, basis))
            proj = _unstack(B @ (B.T @ x))
        for key, val in zip(basis, proj):
            if abs(val) > STORE_TOL:
                N_coeffs[key] = complex(val)
                if k != l:
                    ck = key[n : 2 * n] + key[:n] + (key[2 * n],)
                    N_coeffs[ck] = complex(np.conj(val))
    N = MixedSeries(n, trunc, N_coeffs)
    return N, F - N


def normal_space_dim(n, r, R, nu, trunc, clauses=None):
    """Total real dimension of the remainder space at weighted degree nu."""
    total = 0
    for k in range(nu + 1):
        for l in range(k + 1):
            m2 = nu - k - l
            if m2 < 0 or m2 % 2:
                continue
            m = m2 // 2
            if k == 0 or l == 0:
                continue
            # the stacked real basis of the (k,l) slice already carries the
            # full real dimension of the conjugate pair {(k,l),(l,k)}
            B = normal_slice_real_basis(n, r, R, k, l, m, trunc, clauses)
            total += B.shape[1]
    return total
