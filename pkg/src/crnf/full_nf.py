"""Complete formal normal form at a generic Levi degeneracy.

Input is a hypersurface already brought to the third-order model form

    im w = <z',zbar'>_{r,s} + 2 Re(zbar^n p_R(z)) + F(z, zbar, re w)

(run partial_nf first).  The residual transformation freedom factors
uniquely as T o P where P is a finite-dimensional polynomial
"normalization" map (parameters c, A, B, a, b, d below) and T = id +
(f', f^n, g) has vanishing second/third-order jet constants (the "G0"
gauge).  For each weighted degree nu the correction solves the linear
equation

    L(f', f^n, g) = Re(i g + 2<f',zbar'> + 2(pbar_R + 2 z^n zbar^n) f^n)
                    |_{w -> s + i<z',zbar'>}  =  F_nu  mod  N_nu

with N_nu the remainder space of normal_space.  The solver assembles L
degreewise as a real linear system over monomial coefficients (map
unknowns under the gauge constraints plus remainder-space coordinates);
the system is square and invertible, and the smallest-singular-value
margin is reported per degree.  Lower-degree coupling is handled by
re-applying the actual polynomial map after each degree, which is
self-correcting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .series import DEFAULT_TOL, STORE_TOL, HoloSeries, MixedSeries
from .fischer import mons, type_basis
from .hypersurfaces import (
    Hypersurface,
    hermitian_quadric,
    p_R_poly,
)
from .maps import FormalMap, apply_map
from .normal_space import (
    S_R_apply,
    eps_signs,
    is_in_normal_space,
    normal_slice_real_basis,
    normal_space_report,
    project_normal,
)

__all__ = [
    "NormalizationP",
    "NormalFormResult",
    "NormalFormError",
    "S_R_apply",
    "is_in_normal_space",
    "project_normal",
    "validate_P",
    "check_G0",
    "solve_L",
    "normal_form",
    "factor_map",
    "model_phi",
    "detect_model",
]


class NormalFormError(RuntimeError):
    """Numerical failure of the graded solver (singular system)."""


# ---------------------------------------------------------------------------
# normalization parameters


def _real_cbrt(c):
    return math.copysign(abs(c) ** (1.0 / 3.0), c)


@dataclass
class NormalizationP:
    """Parameters of the residual polynomial map

        z' -> A z' + w B + (2i/c)(B* A z') A z' + q'(z, w)
        z^n -> c^(1/3) z^n + sum_{|I|=2} d_I z^I
        w  -> c w + 2i (B* A z') w

    with q'^beta = sum_{|J|=3} a3[beta,J] z^J
                   + (sum_{alpha<beta} bl[beta,alpha] (Az')^alpha
                      + cdiag[beta] (Az')^beta) w.

    c is nonzero real, cdiag is real; A must satisfy A* I_{r,s} A =
    c I_{r,s} and A / |c|^{1/3} must preserve R (see validate_P).
    """

    n: int
    c: float
    A: np.ndarray
    B: np.ndarray
    a3: np.ndarray  # (n-1, #{|J|=3}) over mons(n, 3)
    bl: np.ndarray  # (n-1, n-1), strict lower triangle used
    cdiag: np.ndarray  # (n-1,) real
    d2: np.ndarray  # (#{|I|=2},) over mons(n, 2)

    @classmethod
    def identity(cls, n):
        return cls(
            n=n,
            c=1.0,
            A=np.eye(n - 1, dtype=complex),
            B=np.zeros(n - 1, dtype=complex),
            a3=np.zeros((n - 1, len(mons(n, 3))), dtype=complex),
            bl=np.zeros((n - 1, n - 1), dtype=complex),
            cdiag=np.zeros(n - 1),
            d2=np.zeros(len(mons(n, 2)), dtype=complex),
        )

    def is_identity(self, tol=DEFAULT_TOL):
        ident = NormalizationP.identity(self.n)
        return (
            abs(self.c - 1.0) <= tol
            and np.linalg.norm(self.A - ident.A) <= tol
            and np.linalg.norm(self.B) <= tol
            and np.linalg.norm(self.a3) <= tol
            and np.linalg.norm(self.bl) <= tol
            and np.linalg.norm(self.cdiag) <= tol
            and np.linalg.norm(self.d2) <= tol
        )

    def to_map(self, trunc) -> FormalMap:
        n = self.n
        zs = [HoloSeries.variable(n, trunc, "z", j + 1) for j in range(n)]
        w = HoloSeries.variable(n, trunc, "w")
        Az = []
        for b in range(n - 1):
            comp = HoloSeries.zero(n, trunc)
            for j in range(n - 1):
                if abs(self.A[b, j]) > STORE_TOL:
                    comp = comp + self.A[b, j] * zs[j]
            Az.append(comp)
        sigma = HoloSeries.zero(n, trunc)
        for b in range(n - 1):
            if abs(self.B[b]) > STORE_TOL:
                sigma = sigma + np.conj(self.B[b]) * Az[b]
        fs = []
        for b in range(n - 1):
            f = Az[b] + self.B[b] * w + (2j / self.c) * (sigma * Az[b])
            for idx, J in enumerate(mons(n, 3)):
                v = self.a3[b, idx]
                if abs(v) > STORE_TOL:
                    f = f + HoloSeries.monomial(n, trunc, J, 0, v)
            lin = HoloSeries.zero(n, trunc)
            for a in range(b):
                if abs(self.bl[b, a]) > STORE_TOL:
                    lin = lin + self.bl[b, a] * Az[a]
            if abs(self.cdiag[b]) > STORE_TOL:
                lin = lin + float(self.cdiag[b]) * Az[b]
            f = f + lin * w
            fs.append(f)
        fn = _real_cbrt(self.c) * zs[n - 1]
        for idx, I in enumerate(mons(n, 2)):
            v = self.d2[idx]
            if abs(v) > STORE_TOL:
                fn = fn + HoloSeries.monomial(n, trunc, I, 0, v)
        fs.append(fn)
        g = float(self.c) * w + 2j * (sigma * w)
        return FormalMap(fs, g)

    def to_json_dict(self):
        from .linalg import matrix_to_json

        return {
            "n": self.n,
            "c": float(self.c),
            "A": matrix_to_json(self.A),
            "B": matrix_to_json(self.B.reshape(1, -1)),
            "a3": matrix_to_json(self.a3),
            "bl": matrix_to_json(self.bl),
            "cdiag": list(map(float, self.cdiag)),
            "d2": matrix_to_json(self.d2.reshape(1, -1)),
        }

    @classmethod
    def from_json_dict(cls, d):
        from .linalg import matrix_from_json

        return cls(
            n=int(d["n"]),
            c=float(d["c"]),
            A=matrix_from_json(d["A"]),
            B=matrix_from_json(d["B"]).ravel(),
            a3=matrix_from_json(d["a3"]),
            bl=matrix_from_json(d["bl"]),
            cdiag=np.asarray(d["cdiag"], dtype=float),
            d2=matrix_from_json(d["d2"]).ravel(),
        )


def validate_P(P: NormalizationP, r, R, tol=DEFAULT_TOL):
    """Group conditions on the linear parameters: A* I_{r,s} A = c I_{r,s}
    and A^t R A = |c|^{2/3} R (i.e. A/|c|^{1/3} preserves R); c real
    nonzero, cdiag real (by construction)."""
    n = P.n
    if abs(P.c) <= tol:
        return False
    R = np.asarray(R, dtype=complex)
    Irs = np.diag(eps_signs(n, r))
    scale = max(1.0, np.linalg.norm(P.A) ** 2)
    if np.linalg.norm(P.A.conj().T @ Irs @ P.A - P.c * Irs) > tol * scale:
        return False
    if np.linalg.norm(P.A.T @ R @ P.A - abs(P.c) ** (2.0 / 3.0) * R) > tol * max(
        1.0, np.linalg.norm(R)
    ) * scale:
        return False
    return True


def check_G0(T: FormalMap, tol=DEFAULT_TOL):
    """Second/third-order jet gauge: T = (z + f, w + g) with identity
    linear part, f' = O(3), f^n = O(2), g = O(4), and vanishing constant
    terms of d^2 f^n / dz^I, d^3 f^beta / dz^J, Re d^2 f^beta / dz^beta dw
    and d^2 f^beta / dz^alpha dw (alpha < beta)."""
    n = T.n
    A, c = T.jacobian0()
    if np.linalg.norm(A - np.eye(n)) > tol or abs(c - 1.0) > tol:
        return False
    zero = (0,) * n
    ident = FormalMap.identity(n, T.trunc)
    fs = [f - i for f, i in zip(T.fs, ident.fs)]
    g = T.g - ident.g
    md = g.min_wdeg()
    if md is not None and md < 4:
        return False
    mdn = fs[n - 1].min_wdeg()
    if mdn is not None and mdn < 2:
        return False
    for b in range(n - 1):
        mdb = fs[b].min_wdeg()
        if mdb is not None and mdb < 3:
            return False
        for J in mons(n, 3):
            if abs(fs[b].coeff(J, 0)) > tol:
                return False
        for a in range(n - 1):
            e = [0] * n
            e[a] = 1
            v = fs[b].coeff(tuple(e), 1)
            if a < b and abs(v) > tol:
                return False
            if a == b and abs(v.real) > tol:
                return False
    for I in mons(n, 2):
        if abs(fs[n - 1].coeff(I, 0)) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# the graded linear solver


def _canonical_rows(n, nu):
    """Canonical monomial keys at weighted degree nu with a >= b, plus a
    'self' flag; each key stands for one (a != b: two) real equations."""
    rows = []
    for m in range(nu // 2 + 1):
        d = nu - 2 * m
        for k in range(d + 1):
            l = d - k
            for a in mons(n, k):
                for b in mons(n, l):
                    if a > b or a == b:
                        rows.append((a + b + (m,), a == b))
    return rows


def _unknown_monomials(n, nu):
    """Gauge-admissible map unknowns at weighted degree nu: list of
    (slot, comp, a, j, parts) with parts in {"xy", "y"}."""
    out = []
    for beta in range(n - 1):
        for j in range((nu - 1) // 2 + 1):
            d = nu - 1 - 2 * j
            if d < 0:
                continue
            for a in mons(n, d):
                if d == 3 and j == 0:
                    continue  # a^beta_J constants live in P
                parts = "xy"
                if d == 1 and j == 1:
                    alpha = a.index(1)
                    if alpha < beta:
                        continue  # b^beta_alpha constants live in P
                    if alpha == beta:
                        parts = "y"  # real part is the c^beta constant
                out.append(("fp", beta, a, j, parts))
    for j in range((nu - 2) // 2 + 1):
        d = nu - 2 - 2 * j
        if d < 0:
            continue
        for a in mons(n, d):
            if d == 2 and j == 0:
                continue  # d_I constants live in P
            out.append(("fn", 0, a, j, "xy"))
    for j in range(nu // 2 + 1):
        d = nu - 2 * j
        if d < 0:
            continue
        for a in mons(n, d):
            out.append(("g", 0, a, j, "xy"))
    return out


class _LSystem:
    """Assembled real linear system for one weighted degree."""

    def __init__(self, n, r, R, nu):
        self.n, self.r, self.nu = n, r, nu
        self.R = np.asarray(R, dtype=complex)
        trunc = nu
        rows = _canonical_rows(n, nu)
        self.rows = rows
        row_index = {}
        pos = 0
        for key, selfconj in rows:
            row_index[key] = (pos, selfconj)
            pos += 1 if selfconj else 2
        self.row_index = row_index
        self.nrows = pos

        Q = hermitian_quadric(n, trunc, r=r, s=n - 1 - r)
        pr = p_R_poly(n, trunc, self.R)
        prefix_fn = 2.0 * (
            pr.conj()
            + 2.0
            * MixedSeries.variable(n, trunc, "z", n)
            * MixedSeries.variable(n, trunc, "zb", n)
        )
        zb = [MixedSeries.variable(n, trunc, "zb", j + 1) for j in range(n)]
        eps = eps_signs(n, r)
        svar = MixedSeries.variable(n, trunc, "s")
        sw = [MixedSeries.constant(n, trunc, 1.0)]
        for _ in range(nu // 2):
            sw.append(sw[-1] * (svar + 1j * Q))

        self.unknowns = []
        cols = []

        def add_col(series):
            v = np.zeros(self.nrows)
            for key, val in series.coeffs.items():
                a, b = key[:n], key[n : 2 * n]
                if a > b or a == b:
                    p, selfconj = row_index[key]
                    v[p] = val.real
                    if not selfconj:
                        v[p + 1] = val.imag
            cols.append(v)

        for slot, comp, a, j, parts in _unknown_monomials(n, nu):
            za = MixedSeries.monomial(n, trunc, a, (0,) * n, 0)
            if slot == "fp":
                base = (2.0 * eps[comp]) * (za * zb[comp]) * sw[j]
            elif slot == "fn":
                base = prefix_fn * za * sw[j]
            else:
                base = 1j * (za * sw[j])
            if "x" in parts:
                self.unknowns.append((slot, comp, a, j, "x"))
                add_col(base.re_part())
            self.unknowns.append((slot, comp, a, j, "y"))
            add_col((1j * base).re_part())

        # remainder-space coordinates
        self.n_cols_start = len(cols)
        self.n_unknown_info = []
        for k in range(nu + 1):
            for l in range(k + 1):
                m2 = nu - k - l
                if m2 < 0 or m2 % 2 or k == 0 or l == 0:
                    continue
                m = m2 // 2
                basis = type_basis(n, k, l, m)
                d = len(basis)
                Bmat = normal_slice_real_basis(n, r, self.R, k, l, m, trunc)
                for col in range(Bmat.shape[1]):
                    coeffs = {}
                    for i, key in enumerate(basis):
                        cval = Bmat[i, col] + 1j * Bmat[d + i, col]
                        if abs(cval) > STORE_TOL:
                            coeffs[key] = cval
                            if k != l:
                                ck = key[n : 2 * n] + key[:n] + (key[2 * n],)
                                coeffs[ck] = np.conj(cval)
                    self.n_unknown_info.append((k, l, m, col))
                    add_col(MixedSeries(n, trunc, coeffs, _normalized=True))

        self.mat = np.column_stack(cols) if cols else np.zeros((self.nrows, 0))
        if self.mat.shape[0] != self.mat.shape[1]:
            raise NormalFormError(
                f"graded system at degree {nu} is not square: "
                f"{self.mat.shape[0]} equations, {self.mat.shape[1]} unknowns"
            )
        sv = np.linalg.svd(self.mat, compute_uv=False)
        self.sigma_max = float(sv[0])
        self.sigma_min = float(sv[-1])
        if self.sigma_min <= 1e-10 * self.sigma_max:
            raise NormalFormError(
                f"graded system at degree {nu} is numerically singular "
                f"(sigma_min/sigma_max = {self.sigma_min / self.sigma_max:.3e})"
            )
        self.lu = scipy.linalg.lu_factor(self.mat)

    def rhs_of(self, F: MixedSeries):
        v = np.zeros(self.nrows)
        for key, val in F.coeffs.items():
            a, b = key[: self.n], key[self.n : 2 * self.n]
            if a > b or a == b:
                p, selfconj = self.row_index[key]
                v[p] = val.real
                if not selfconj:
                    v[p + 1] = val.imag
        return v


_SYSTEM_CACHE = {}


def _get_system(n, r, R, nu) -> _LSystem:
    key = (n, r, tuple(np.asarray(R, dtype=complex).ravel().round(14)), nu)
    if key not in _SYSTEM_CACHE:
        _SYSTEM_CACHE[key] = _LSystem(n, r, R, nu)
    return _SYSTEM_CACHE[key]


@dataclass
class GradedSolution:
    nu: int
    fp: list
    fn: HoloSeries
    g: HoloSeries
    N: MixedSeries
    sigma_min: float
    sigma_max: float
    residual: float
    dim: int

    def to_map(self, trunc) -> FormalMap:
        n = self.fn.n
        ident = FormalMap.identity(n, trunc)
        fs = [
            ident.fs[b] + HoloSeries(n, trunc, self.fp[b].coeffs)
            for b in range(n - 1)
        ]
        fs.append(ident.fs[n - 1] + HoloSeries(n, trunc, self.fn.coeffs))
        g = ident.g + HoloSeries(n, trunc, self.g.coeffs)
        return FormalMap(fs, g, check=False)


def solve_L(F_nu: MixedSeries, r, R, tol=DEFAULT_TOL) -> GradedSolution:
    """Solve L(f', f^n, g) + N = F_nu with the gauge constraints; F_nu
    must be real and weighted-homogeneous of degree nu >= 4."""
    n = F_nu.n
    degs = {d for d, comp in F_nu.weighted_decompose().items() if comp.norm() > 0}
    if len(degs) > 1:
        raise ValueError("input must be weighted homogeneous")
    nu = degs.pop() if degs else 4
    if nu < 4:
        raise ValueError("weighted degree must be at least 4")
    if not F_nu.is_real(tol):
        raise ValueError("input must be a real series")
    sys_ = _get_system(n, r, R, nu)
    rhs = sys_.rhs_of(F_nu)
    x = scipy.linalg.lu_solve(sys_.lu, rhs)
    residual = float(np.linalg.norm(sys_.mat @ x - rhs))

    trunc = max(F_nu.trunc, nu)
    fp_terms = [dict() for _ in range(n - 1)]
    fn_terms = {}
    g_terms = {}
    for val, (slot, comp, a, j, part) in zip(
        x[: sys_.n_cols_start], sys_.unknowns
    ):
        c = val if part == "x" else 1j * val
        key = a + (j,)
        if slot == "fp":
            fp_terms[comp][key] = fp_terms[comp].get(key, 0.0) + c
        elif slot == "fn":
            fn_terms[key] = fn_terms.get(key, 0.0) + c
        else:
            g_terms[key] = g_terms.get(key, 0.0) + c
    N_coeffs = {}
    ncols = sys_.mat[:, sys_.n_cols_start :]
    for idx, (k, l, m, col) in enumerate(sys_.n_unknown_info):
        val = x[sys_.n_cols_start + idx]
        if abs(val) <= STORE_TOL:
            continue
        basis = type_basis(n, k, l, m)
        Bmat = normal_slice_real_basis(n, r, R, k, l, m, nu)
        d = len(basis)
        for i, key in enumerate(basis):
            cval = val * (Bmat[i, col] + 1j * Bmat[d + i, col])
            if abs(cval) > STORE_TOL:
                N_coeffs[key] = N_coeffs.get(key, 0.0) + cval
                if k != l:
                    ck = key[n : 2 * n] + key[:n] + (key[2 * n],)
                    N_coeffs[ck] = N_coeffs.get(ck, 0.0) + np.conj(cval)
    return GradedSolution(
        nu=nu,
        fp=[HoloSeries(n, trunc, t) for t in fp_terms],
        fn=HoloSeries(n, trunc, fn_terms),
        g=HoloSeries(n, trunc, g_terms),
        N=MixedSeries(n, trunc, N_coeffs),
        sigma_min=sys_.sigma_min,
        sigma_max=sys_.sigma_max,
        residual=residual,
        dim=sys_.mat.shape[0],
    )


# ---------------------------------------------------------------------------
# model detection and the degree loop


def model_phi(n, trunc, r, R):
    """<z',zbar'>_{r,s} + 2 Re(zbar^n p_R(z))."""
    zbn = MixedSeries.variable(n, trunc, "zb", n)
    mixed = zbn * p_R_poly(n, trunc, R)
    return hermitian_quadric(n, trunc, r=r, s=n - 1 - r) + mixed + mixed.conj()


def detect_model(M: Hypersurface, tol=DEFAULT_TOL):
    """Extract (r, R) from the weighted <= 3 part of the graph function;
    raises if M is not in third-order model form."""
    n = M.n
    phi2 = M.phi.weighted_component(2)
    phi3 = M.phi.weighted_component(3)
    zero = (0,) * n
    g = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            ei = [0] * n
            ei[i] = 1
            ej = [0] * n
            ej[j] = 1
            g[i, j] = phi2.coeff(tuple(ej), tuple(ei), 0)
    diag = np.real(np.diag(g))
    if np.linalg.norm(g - np.diag(diag)) > tol:
        raise ValueError("second-order part is not diagonal; run partial_nf first")
    r = int(np.sum(diag > 0.5))
    expected = np.array(eps_signs(n, r) + [0.0])
    if np.linalg.norm(diag - expected) > tol:
        raise ValueError(
            "second-order part is not the signature model; run partial_nf first"
        )
    # cubic part: 2 Re(zbar^n p_R) with p_R = z'^t R z' + (z^n)^2
    R = np.zeros((n - 1, n - 1), dtype=complex)
    en = [0] * n
    en[n - 1] = 1
    en = tuple(en)
    for i in range(n - 1):
        for j in range(i, n - 1):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            v = phi3.coeff(tuple(e), en, 0)
            if i == j:
                R[i, i] = v
            else:
                R[i, j] = 0.5 * v
                R[j, i] = 0.5 * v
    check = model_phi(n, M.trunc, r, R)
    resid = (phi2 + phi3 - check.truncate(3)).norm()
    if resid > tol * (1.0 + phi3.norm()):
        raise ValueError(
            "third-order part is not of generic-degeneracy model form "
            f"(defect {resid:.3e}); run partial_nf first"
        )
    e2 = [0] * n
    e2[n - 1] = 2
    if abs(phi3.coeff(tuple(e2), en, 0) - 1.0) > tol:
        raise ValueError("the (z^n)^2 zbar^n cubic coefficient must be 1")
    return r, R


@dataclass
class NormalFormResult:
    N: MixedSeries
    T: FormalMap
    P_used: NormalizationP
    M_out: Hypersurface
    r: int
    R: np.ndarray
    diagnostics: list = field(default_factory=list)

    def to_json_dict(self):
        return {
            "N": self.N.to_json_dict(),
            "T": {
                "f": [f.to_json_dict() for f in self.T.fs],
                "g": self.T.g.to_json_dict(),
            },
            "diagnostics": {"per_degree": list(self.diagnostics)},
        }


def normal_form(M: Hypersurface, P: NormalizationP = None, degree=None,
                tol=DEFAULT_TOL) -> NormalFormResult:
    """Normalize M (already in third-order model form) through the given
    weighted degree; P fixes the residual transformation freedom."""
    n, trunc = M.n, M.trunc
    if degree is None:
        degree = trunc
    if degree > trunc:
        raise ValueError("degree cannot exceed the truncation order")
    if degree < 4:
        raise ValueError("degree must be at least 4")
    if P is None:
        P = NormalizationP.identity(n)
    if P.n != n:
        raise ValueError("normalization dimension mismatch")
    r, R = detect_model(M, tol)
    if not validate_P(P, r, R, tol):
        raise ValueError("normalization parameters violate the group conditions")
    phi0 = model_phi(n, trunc, r, R)
    cur = M
    T_total = None
    if not P.is_identity(tol):
        cur = apply_map(cur, P.to_map(trunc), tol)
        # form preservation (the content of the group conditions)
        r2, R2 = detect_model(cur, max(tol, 1e3 * tol))
        if r2 != r or np.linalg.norm(R2 - R) > 1e3 * tol * (1 + np.linalg.norm(R)):
            raise ValueError("normalization map did not preserve the model form")
    diagnostics = []
    for nu in range(4, degree + 1):
        D = (cur.phi - phi0).weighted_component(nu)
        if D.norm() <= STORE_TOL:
            diagnostics.append(
                {"nu": nu, "dim": 0, "sigma_min": float("inf"), "residual": 0.0}
            )
            continue
        sol = solve_L(D, r, R, tol)
        diagnostics.append(
            {
                "nu": nu,
                "dim": sol.dim,
                "sigma_min": sol.sigma_min,
                "residual": sol.residual,
            }
        )
        step = sol.to_map(trunc)
        cur = apply_map(cur, step, tol)
        T_total = step if T_total is None else step.compose(T_total)
        # exactness per degree: non-remainder components vanish through nu
        Dn = (cur.phi - phi0).weighted_component(nu)
        _, comp = project_normal(Dn, r, R, tol)
        scale = max(1.0, Dn.norm())
        if comp.norm() > 1e3 * tol * scale:
            raise NormalFormError(
                f"degree-{nu} correction left a non-remainder defect "
                f"{comp.norm():.3e}"
            )
    if T_total is None:
        T_total = FormalMap.identity(n, trunc)
    N = (cur.phi - phi0).truncate(degree)
    return NormalFormResult(
        N=N,
        T=T_total,
        P_used=P,
        M_out=cur,
        r=r,
        R=R,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# factorization of a form-preserving map into T o P


def factor_map(Phi: FormalMap, tol=DEFAULT_TOL):
    """Factor a form-preserving formal map uniquely as Phi = T o P with P
    a NormalizationP map and T in the gauge class; returns (T, P)."""
    n = Phi.n
    Afull, c = Phi.jacobian0()
    if abs(c.imag) > tol * max(1.0, abs(c)):
        raise ValueError("w-coefficient must be real for a form-preserving map")
    c = float(c.real)
    A = Afull[: n - 1, : n - 1].copy()
    if np.linalg.norm(Afull[n - 1, : n - 1]) > tol * max(
        1.0, np.linalg.norm(Afull)
    ) or np.linalg.norm(Afull[: n - 1, n - 1]) > tol * max(1.0, np.linalg.norm(Afull)):
        raise ValueError("linear part does not preserve the degeneracy splitting")
    B = np.array([f.coeff((0,) * n, 1) for f in Phi.fs[: n - 1]], dtype=complex)
    a3 = np.zeros((n - 1, len(mons(n, 3))), dtype=complex)
    for b in range(n - 1):
        for idx, J in enumerate(mons(n, 3)):
            a3[b, idx] = Phi.fs[b].coeff(J, 0)
    d2 = np.array([Phi.fs[n - 1].coeff(I, 0) for I in mons(n, 2)], dtype=complex)
    bl = np.zeros((n - 1, n - 1), dtype=complex)
    cdiag = np.zeros(n - 1)
    AinvT = np.linalg.inv(A).T
    for b in range(n - 1):
        mvec = np.zeros(n - 1, dtype=complex)
        for a in range(n - 1):
            e = [0] * n
            e[a] = 1
            mvec[a] = Phi.fs[b].coeff(tuple(e), 1)
        t = AinvT @ mvec
        for a in range(b):
            bl[b, a] = t[a]
        cdiag[b] = t[b].real
    P = NormalizationP(n=n, c=c, A=A, B=B, a3=a3, bl=bl, cdiag=cdiag, d2=d2)
    Pmap = P.to_map(Phi.trunc)
    T = Phi.compose(Pmap.inverse(tol))
    return T, P
