"""CR frames, the iterated contraction operator on characteristic forms,
the filtration of first-order jet spaces E_j / F_k, finite
nondegeneracy, and the invariant tensors attached to a generic
submanifold at the origin.

All tensors are evaluated at the origin only; the intermediate objects
(vector-field and form coefficients) are truncated series in the
ambient coordinates (Z, Zbar).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import DEFAULT_TOL, MixedSeries
from .hypersurfaces import GenericSubmanifold, Hypersurface
from .linalg import orthonormal_basis, nullspace, principal_angle_gap


# ---------------------------------------------------------------------------
# frames


@dataclass
class CRFrame:
    """Basis of CR vector fields and characteristic (1,0)-forms.

    ``L[k]`` is a list of N series: the coefficients of the k-th CR field
    over (d/dZbar^1 .. d/dZbar^N).  ``theta[l]`` is a list of N series:
    coefficients of the l-th characteristic form over (dZ^1 .. dZ^N).
    """

    N: int
    d: int
    L: list
    theta: list

    @property
    def n(self):
        return self.N - self.d


def _series_matrix_inverse(W, W0inv, trunc):
    """Inverse of a d x d matrix of series with invertible constant part.

    W0inv is the numeric inverse of the constant term; returns the d x d
    list-of-lists of series via a truncated geometric series.
    """
    d = len(W)
    N = W[0][0].n
    const = [
        [MixedSeries.constant(N, trunc, complex(W0inv[i, j])) for j in range(d)]
        for i in range(d)
    ]
    # X = W0inv (W - W0), no constant term
    X = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = MixedSeries.zero(N, trunc)
            for k in range(d):
                acc = acc + const[i][k] * W[k][j]
            if i == j:
                acc = acc - 1.0
            row.append(acc)
        X.append(row)
    # inv = (sum_k (-X)^k) W0inv
    acc = [[MixedSeries.constant(N, trunc, 1.0 if i == j else 0.0) for j in range(d)] for i in range(d)]
    power = acc
    for _ in range(trunc):
        nxt = [[MixedSeries.zero(N, trunc) for _ in range(d)] for _ in range(d)]
        top = 0.0
        for i in range(d):
            for j in range(d):
                s = MixedSeries.zero(N, trunc)
                for k in range(d):
                    s = s + power[i][k] * (-1.0 * X[k][j])
                nxt[i][j] = s
                top = max(top, s.norm())
        if top == 0.0:
            break
        power = nxt
        acc = [[acc[i][j] + power[i][j] for j in range(d)] for i in range(d)]
    out = [[MixedSeries.zero(N, trunc) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            s = MixedSeries.zero(N, trunc)
            for k in range(d):
                s = s + acc[i][k] * const[k][j]
            out[i][j] = s
    return out


def cr_frame(M: GenericSubmanifold, tol=DEFAULT_TOL) -> CRFrame:
    """Frame L_k = d/dZbar^k + sum_j mu_{kj} d/dZbar^{n+j} with L_k rho = 0,
    and theta_l = 2i * sum_m (d rho_l / dZ^m) dZ^m."""
    N, d, n = M.N, M.d, M.n
    trunc = M.trunc
    W = [[M.rho_zb(l + 1, n + j + 1) for j in range(d)] for l in range(d)]
    W0inv = np.linalg.inv(M.dbar_block0())
    Winv = _series_matrix_inverse(W, W0inv, trunc)
    L = []
    for k in range(n):
        v = [M.rho_zb(l + 1, k + 1) for l in range(d)]
        coeffs = [MixedSeries.zero(N, trunc) for _ in range(N)]
        coeffs[k] = MixedSeries.constant(N, trunc, 1.0)
        for j in range(d):
            mu = MixedSeries.zero(N, trunc)
            for l in range(d):
                mu = mu + Winv[j][l] * v[l]
            coeffs[n + j] = -1.0 * mu
        L.append(coeffs)
    theta = []
    for l in range(d):
        theta.append([2j * M.rho_z(l + 1, m + 1) for m in range(N)])
    return CRFrame(N, d, L, theta)


def frame_residual(M: GenericSubmanifold, frame: CRFrame):
    """max norm of L_k rho_l and of <theta_l, L_k> over all k, l."""
    worst = 0.0
    for coeffs in frame.L:
        for r in M.rho:
            worst = max(worst, apply_field_bar(coeffs, r).norm())
        for th in frame.theta:
            # theta has only dZ components; L only d/dZbar: pairing is 0
            # structurally, nothing to check beyond L rho = 0
            pass
    return worst


def apply_field_bar(coeffs, F: MixedSeries) -> MixedSeries:
    """Apply sum_m coeffs[m] d/dZbar^m to F."""
    N = F.n
    out = MixedSeries.zero(N, F.trunc)
    for m in range(N):
        c = coeffs[m]
        if c.norm() == 0.0:
            continue
        out = out + c * F.diff("zb", m + 1)
    return out


def apply_word(frame: CRFrame, J, F: MixedSeries) -> MixedSeries:
    """Apply L^J = L_{J_1} ... L_{J_k} to F (indices 1-based)."""
    out = F
    for idx in reversed(J):
        out = apply_field_bar(frame.L[idx - 1], out)
    return out


def apply_T(M: GenericSubmanifold, J, l, frame: CRFrame | None = None):
    """Coefficient series of the iterated contraction of theta^l along the
    word J: the N series L^J(d rho_l / dZ^m); for empty J the theta^l
    coefficients themselves (with the 2i factor)."""
    if frame is None:
        frame = cr_frame(M)
    if len(J) + 1 > M.trunc:
        raise ValueError("truncation too small for this word length")
    if not J:
        return list(frame.theta[l - 1])
    return [apply_word(frame, J, M.rho_z(l, m + 1)) for m in range(M.N)]


def _value0(series_list):
    N = series_list[0].n
    zero = (0,) * N
    return np.array([complex(f.coeff(zero, zero, 0)) for f in series_list])


def _words(n, j):
    if j == 0:
        return [()]
    out = []
    for w in _words(n, j - 1):
        for k in range(1, n + 1):
            out.append(w + (k,))
    return out


@dataclass
class Subspace:
    ambient_dim: int
    basis: np.ndarray  # orthonormal columns
    tol: float = DEFAULT_TOL

    @property
    def dim(self):
        return self.basis.shape[1]


def E_spaces(M: GenericSubmanifold, kmax, frame: CRFrame | None = None, tol=DEFAULT_TOL):
    """Subspaces E_0 .. E_kmax spanned by the word-iterated form values at 0."""
    if frame is None:
        frame = cr_frame(M)
    n, d, N = M.n, M.d, M.N
    if kmax + 1 > M.trunc:
        raise ValueError("truncation too small for kmax")
    rho_z = [[M.rho_z(l + 1, m + 1) for m in range(N)] for l in range(d)]
    vectors = []  # (word length, value vector)
    for l in range(d):
        vectors.append((0, 2j * _value0(rho_z[l])))
    # iteratively apply single fields to keep series work shared per level
    level = {(): [[rho_z[l][m] for m in range(N)] for l in range(d)]}
    for j in range(1, kmax + 1):
        nxt = {}
        for w, mats in level.items():
            for k in range(1, n + 1):
                nmats = [
                    [apply_field_bar(frame.L[k - 1], mats[l][m]) for m in range(N)]
                    for l in range(d)
                ]
                nxt[w + (k,)] = nmats
                for l in range(d):
                    vectors.append((j, _value0(nmats[l])))
        level = nxt
    out = []
    for j in range(kmax + 1):
        vs = [v for (jl, v) in vectors if jl <= j]
        out.append(Subspace(N, orthonormal_basis(vs, tol), tol))
    return out


def gradient_spans(M: GenericSubmanifold, kmax, frame: CRFrame | None = None, tol=DEFAULT_TOL):
    """Spans of L^J (d rho_l / dZ)(0), |J| <= j, without the form factors.

    Used to cross-check the word-based computation of E_j.
    """
    if frame is None:
        frame = cr_frame(M)
    n, d, N = M.n, M.d, M.N
    out = []
    for j in range(kmax + 1):
        vs = []
        for jl in range(j + 1):
            for w in _words(n, jl):
                for l in range(1, d + 1):
                    vs.append(_value0([apply_word(frame, w, M.rho_z(l, m + 1)) for m in range(N)]))
        out.append(Subspace(N, orthonormal_basis(vs, tol), tol))
    return out


def random_frame(M: GenericSubmanifold, rng, frame: CRFrame | None = None):
    """A randomized CR frame: invertible constant mixing plus series-coefficient
    perturbations of a reference frame (still annihilates rho)."""
    if frame is None:
        frame = cr_frame(M)
    n, N, trunc = M.n, M.N, M.trunc
    A = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    if abs(np.linalg.det(A)) < 0.1:
        A = A + np.eye(n)
    newL = []
    for k in range(n):
        coeffs = [MixedSeries.zero(N, trunc) for _ in range(N)]
        for m in range(n):
            fac = MixedSeries.constant(N, trunc, complex(A[k, m]))
            # series-valued mixing: add a random linear coefficient
            for q in range(N):
                cz = 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
                fac = fac + cz * MixedSeries.variable(N, trunc, "z", q + 1)
            for m2 in range(N):
                c = frame.L[m][m2]
                if c.norm():
                    coeffs[m2] = coeffs[m2] + fac * c
        newL.append(coeffs)
    return CRFrame(N, M.d, newL, frame.theta)


def nondegeneracy(M: GenericSubmanifold, kmax, tol=DEFAULT_TOL):
    """Smallest k with dim E_k = N, or None if not reached by kmax."""
    Es = E_spaces(M, kmax, tol=tol)
    for k, E in enumerate(Es):
        if E.dim == M.N:
            return k
    return None


def vbar_basis(M: GenericSubmanifold, frame: CRFrame | None = None):
    """Values at 0 of the conjugated frame fields (vectors over d/dZ)."""
    if frame is None:
        frame = cr_frame(M)
    cols = []
    for coeffs in frame.L:
        cols.append(np.conj(_value0(coeffs)))
    return np.column_stack(cols)  # N x n


def F_space(M: GenericSubmanifold, k, frame: CRFrame | None = None, tol=DEFAULT_TOL) -> Subspace:
    """F_k = (annihilator of E_k) intersected with the conjugate CR space."""
    if frame is None:
        frame = cr_frame(M)
    E = E_spaces(M, k, frame, tol)[k]
    V = vbar_basis(M, frame)
    if E.dim == 0:
        return Subspace(M.N, orthonormal_basis([V[:, j] for j in range(V.shape[1])], tol), tol)
    # covector xi acts on vector v by xi . v (bilinear); E basis columns are
    # stored as vectors, so annihilation reads E^T v = 0
    A = E.basis.T @ V
    K = nullspace(A, tol)
    cols = [V @ K[:, j] for j in range(K.shape[1])]
    return Subspace(M.N, orthonormal_basis(cols, tol), tol)


# ---------------------------------------------------------------------------
# tensors


@dataclass
class TensorRep:
    order: int
    components: np.ndarray  # shape (n,)*order + (dimF, d)
    F_basis: np.ndarray  # N x dimF, orthonormal columns
    trivial: bool = False

    def symmetry_defect(self):
        j = self.order
        if j < 2 or self.components.size == 0:
            return 0.0
        worst = 0.0
        c = self.components
        for ax1 in range(j):
            for ax2 in range(ax1 + 1, j):
                worst = max(worst, float(np.max(np.abs(c - np.swapaxes(c, ax1, ax2)))))
        return worst

    def to_json(self):
        comp = self.components
        return {
            "order": self.order,
            "trivial": self.trivial,
            "shape": list(comp.shape),
            "re": np.real(comp).tolist(),
            "im": np.imag(comp).tolist(),
        }


_FACT = [1, 1, 2, 6, 24, 120, 720, 5040, 40320]


def psi(M: GenericSubmanifold, j, frame: CRFrame | None = None, tol=DEFAULT_TOL) -> TensorRep:
    """Invariant tensor of order j at 0.

    Components are 1/j! times the pairing of the word-iterated form
    coefficients L^J(d rho_l/dZ)(0) with an orthonormal basis of F_{j-1}.
    Indexing: (j frame indices, F_{j-1} basis index, defining-function
    index).
    """
    if frame is None:
        frame = cr_frame(M)
    if j < 1:
        raise ValueError("order must be >= 1")
    if j + 1 > M.trunc:
        raise ValueError("truncation too small for this order")
    n, d, N = M.n, M.d, M.N
    F = F_space(M, j - 1, frame, tol)
    if F.dim == 0:
        return TensorRep(j, np.zeros((n,) * j + (0, d), dtype=complex), F.basis, trivial=True)
    comp = np.zeros((n,) * j + (F.dim, d), dtype=complex)
    fac = 1.0 / _FACT[j]
    for w in _words(n, j):
        idx = tuple(k - 1 for k in w)
        for l in range(d):
            xi = _value0([apply_word(frame, w, M.rho_z(l + 1, m + 1)) for m in range(N)])
            for f in range(F.dim):
                comp[idx + (f, l)] = fac * (xi @ F.basis[:, f])
    return TensorRep(j, comp, F.basis)


def levi_form(M, frame=None, tol=DEFAULT_TOL) -> TensorRep:
    """Order-1 tensor (the Levi form) of a hypersurface or submanifold."""
    M = _as_generic(M)
    return psi(M, 1, frame, tol)


def third_tensor(M, frame=None, tol=DEFAULT_TOL) -> TensorRep:
    """Order-2 tensor with the last index running over an orthonormal basis
    of the annihilator of E_1 (the Levi-kernel directions)."""
    M = _as_generic(M)
    return psi(M, 2, frame, tol)


def _as_generic(M):
    return M.to_generic() if isinstance(M, Hypersurface) else M


def levi_matrix(M, tol=DEFAULT_TOL):
    """Hermitian n x n Levi matrix g of a hypersurface (d = 1)."""
    Mg = _as_generic(M)
    if Mg.d != 1:
        raise ValueError("Levi matrix requires a hypersurface")
    t = levi_form(Mg, tol=tol)
    n = Mg.n
    # F_0 basis is an orthonormalization of the conjugate frame values,
    # which at 0 are the coordinate directions e_beta
    g = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(t.components.shape[1]):
            g[a, b] = t.components[(a, b, 0)]
    return g


def basis_change(t: TensorRep, B, a) -> TensorRep:
    """Transform tensor components under a frame change.

    B[alpha, gamma] expresses the old frame in the new one (old_alpha =
    sum_gamma B[alpha, gamma] new_gamma) and `a` rescales the
    characteristic form.  The first `order` indices contract with B, the
    F-index with conj(B) restricted to the F-block when dimensions agree.
    """
    c = t.components.copy()
    B = np.asarray(B, dtype=complex)
    j = t.order
    for ax in range(j):
        c = np.tensordot(B, c, axes=([1], [ax]))
        c = np.moveaxis(c, 0, ax)
    dimF = c.shape[j]
    if dimF:
        if B.shape[0] == dimF:
            BF = B
        else:
            BF = B[-dimF:, -dimF:]
        c = np.tensordot(np.conj(BF), c, axes=([1], [j]))
        c = np.moveaxis(c, 0, j)
    c = a * c
    return TensorRep(t.order, c, t.F_basis, t.trivial)


# ---------------------------------------------------------------------------
# the cubic form via nested brackets


def _field_apply(X, F: MixedSeries) -> MixedSeries:
    """Apply a (2N)-component vector field (over d/dZ then d/dZbar) to F."""
    N = F.n
    out = MixedSeries.zero(N, F.trunc)
    for m in range(N):
        if X[m].norm():
            out = out + X[m] * F.diff("z", m + 1)
        if X[N + m].norm():
            out = out + X[N + m] * F.diff("zb", m + 1)
    return out


def _bracket(X, Y):
    """Lie bracket of two vector fields given by 2N coefficient series."""
    return [_field_apply(X, Ym) - _field_apply(Y, Xm) for Xm, Ym in zip(X, Y)]


#: empirical constant relating the raw nested-bracket pairing to the
#: normalized cubic form (fixed once by the model examples; see tests)
CUBIC_CALIBRATION = -0.25j


def cubic_form(M, frame=None, tol=DEFAULT_TOL) -> TensorRep:
    """Cubic form q(L_a, L_b, N) = <d rho, [L_b, [L_a, N]]> at 0, computed
    from nested brackets of the frame fields, normalized so that on a
    hypersurface already in third-order normal form q = (i/2) h holds
    componentwise."""
    Mg = _as_generic(M)
    if Mg.d != 1:
        raise ValueError("cubic form requires a hypersurface")
    if frame is None:
        frame = cr_frame(Mg)
    n, N = Mg.n, Mg.N
    F = F_space(Mg, 1, frame, tol)
    if F.dim == 0:
        return TensorRep(2, np.zeros((n, n, 0, 1), dtype=complex), F.basis, trivial=True)
    zero2N = [MixedSeries.zero(N, Mg.trunc) for _ in range(2 * N)]
    # frame fields as 2N-component vectors (antiholomorphic part only)
    Lbar = []
    for coeffs in frame.L:
        X = list(zero2N)
        for m in range(N):
            X[N + m] = coeffs[m]
        Lbar.append(X)
    # conjugate frame fields (holomorphic part only)
    Lconj = []
    for coeffs in frame.L:
        X = list(zero2N)
        for m in range(N):
            X[m] = coeffs[m].conj()
        Lconj.append(X)
    # F_1 vectors expressed in the conjugate frame: F.basis = Vbar @ cvec
    V = vbar_basis(Mg, frame)
    cvecs, *_ = np.linalg.lstsq(V, F.basis, rcond=None)
    rho_z0 = _value0([Mg.rho_z(1, m + 1) for m in range(N)])
    comp = np.zeros((n, n, F.dim, 1), dtype=complex)
    for f in range(F.dim):
        Nf = list(zero2N)
        for b in range(n):
            cb = complex(cvecs[b, f])
            if abs(cb) > 1e-15:
                for m in range(2 * N):
                    if Lconj[b][m].norm():
                        Nf[m] = Nf[m] + cb * Lconj[b][m]
        for al in range(n):
            inner = _bracket(Lbar[al], Nf)
            for be in range(n):
                outer = _bracket(Lbar[be], inner)
                val = _value0(outer[:N]) @ rho_z0
                comp[al, be, f, 0] = CUBIC_CALIBRATION * val
    return TensorRep(2, comp, F.basis)


# ---------------------------------------------------------------------------


def tensors_report(M, kmax=3, tol=DEFAULT_TOL):
    Mg = _as_generic(M)
    kmax = min(kmax, Mg.trunc - 1)
    Es = E_spaces(Mg, kmax, tol=tol)
    dims = [E.dim for E in Es]
    k = next((j for j, E in enumerate(Es) if E.dim == Mg.N), None)
    out_psi = {}
    for j in range(1, kmax + 1):
        t = psi(Mg, j, tol=tol)
        out_psi[str(j)] = t.to_json()
        if t.trivial:
            break
    return {"k_nondeg": k, "dims_E": dims, "psi": out_psi}
