"""Truncated formal power series with weighted grading.

Two series types:

* :class:`MixedSeries` -- series in ``z = (z^1..z^n)``, the conjugate
  variables ``zbar``, and one real variable ``s``.  Weights: ``z`` and
  ``zbar`` have weight 1, ``s`` has weight 2.
* :class:`HoloSeries` -- series in ``(z, w)`` only (no conjugates),
  ``w`` of weight 2.  These hold transformation components.

Coefficients are complex binary64.  Series are immutable once built;
all operations return new objects.  Terms of weighted degree above
``trunc`` are discarded eagerly, and coefficients of modulus below
``STORE_TOL`` are never stored.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ._kernels import mul_arrays

#: default tolerance for zero tests and rank decisions
DEFAULT_TOL = 1e-9
#: storage threshold; smaller than DEFAULT_TOL so that decisions made at
#: DEFAULT_TOL are not perturbed by pruning
STORE_TOL = 1e-13

# threshold (pair count) below which plain dict loops beat array kernels
_SMALL_MUL = 600


# ---------------------------------------------------------------------------
# dict-level helpers shared by both series types.  A "termdict" maps an
# exponent tuple to a complex coefficient; `weights` is the per-slot weight
# vector.


def _wdeg(exp, weights):
    return sum(w * e for w, e in zip(weights, exp))


def _clean(terms, weights, trunc):
    return {
        k: complex(v)
        for k, v in terms.items()
        if abs(v) > STORE_TOL and _wdeg(k, weights) <= trunc
    }


def _add_into(acc, terms, factor=1.0):
    for k, v in terms.items():
        acc[k] = acc.get(k, 0.0) + factor * v


def _mul_dict(A, B, weights, trunc):
    """Cauchy product of two termdicts, truncated at weighted degree trunc."""
    if not A or not B:
        return {}
    if len(A) * len(B) <= _SMALL_MUL:
        out = {}
        for ka, va in A.items():
            wa = _wdeg(ka, weights)
            for kb, vb in B.items():
                if wa + _wdeg(kb, weights) > trunc:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0.0) + va * vb
        return {k: v for k, v in out.items() if abs(v) > STORE_TOL}
    expA = np.array(list(A.keys()), dtype=np.int64).reshape(len(A), len(weights))
    valA = np.fromiter(A.values(), dtype=np.complex128, count=len(A))
    expB = np.array(list(B.keys()), dtype=np.int64).reshape(len(B), len(weights))
    valB = np.fromiter(B.values(), dtype=np.complex128, count=len(B))
    warr = np.asarray(weights, dtype=np.int64)
    exps, vals = mul_arrays(expA, valA, expB, valB, warr, trunc)
    out = {}
    for row, v in zip(exps, vals):
        if abs(v) > STORE_TOL:
            out[tuple(int(e) for e in row)] = complex(v)
    return out


def _pow_dict(A, e, weights, trunc):
    if e == 0:
        raise ValueError("use explicit unit for zeroth power")
    out = A
    for _ in range(e - 1):
        out = _mul_dict(out, A, weights, trunc)
    return out


# ---------------------------------------------------------------------------
# generic composition engine
#
# `images` is a list with one entry per input slot:
#   ("mono", out_exp_tuple, coeff)          -- monomial image (incl. identity)
#   ("series", termdict_out)                -- general image
#   ("near", out_exp_tuple, coeff, termdict_out)
#                                           -- image = coeff*mono + delta;
#                                              evaluated by a Taylor scheme
# All "series"/"near" termdicts live purely in the *output* space, which makes
# sequential elimination of the pending slots sound (no images contain a
# pending slot).


def _compose_terms(terms, weights_in, images, nslots_out, weights_out, trunc):
    pend = [i for i, im in enumerate(images) if im[0] != "mono"]
    pend_pos = {i: p for p, i in enumerate(pend)}
    npend = len(pend)
    comb_weights = tuple(weights_in[i] for i in pend) + tuple(weights_out)
    ncomb = npend + nslots_out

    # phase 1: apply monomial images, keep pending exponents in front slots
    cur = {}
    for exp, c in terms.items():
        out = [0] * ncomb
        coeff = c
        alive = True
        for i, e in enumerate(exp):
            if e == 0:
                continue
            im = images[i]
            if im[0] == "mono":
                mexp, mc = im[1], im[2]
                if mc == 0:
                    alive = False
                    break
                coeff *= mc**e
                for c2, me in enumerate(mexp):
                    if me:
                        out[npend + c2] += me * e
            else:
                out[pend_pos[i]] = e
        if not alive:
            continue
        key = tuple(out)
        if _wdeg(key, comb_weights) > trunc:
            continue
        cur[key] = cur.get(key, 0.0) + coeff

    # phase 2: eliminate pending slots one at a time
    zero_out = (0,) * nslots_out
    for p in range(npend):
        if not cur:
            break
        im = images[pend[p]]
        groups: dict[int, dict] = {}
        for exp, c in cur.items():
            e = exp[p]
            rest = exp[:p] + (0,) + exp[p + 1 :]
            groups.setdefault(e, {})[rest] = c
        maxe = max(groups)
        if im[0] == "series":
            S = {(0,) * npend + k: v for k, v in im[1].items()}
            R: dict = {}
            for e in range(maxe, -1, -1):
                if R:
                    R = _mul_dict(R, S, comb_weights, trunc)
                blk = groups.get(e)
                if blk:
                    _add_into(R, blk)
            cur = R
        else:  # "near"
            bexp, bc, delta = im[1], im[2], im[3]
            D = {(0,) * npend + k: v for k, v in delta.items()}
            dpow = {(0,) * ncomb: 1.0}
            R: dict = {}
            for j in range(0, maxe + 1):
                if j > 0:
                    dpow = _mul_dict(dpow, D, comb_weights, trunc)
                    if not dpow:
                        break
                blk = {}
                for e in range(j, maxe + 1):
                    A_e = groups.get(e)
                    if not A_e:
                        continue
                    fac = math.comb(e, j) * (bc ** (e - j))
                    for k, v in A_e.items():
                        nk = list(k)
                        for c2, me in enumerate(bexp):
                            if me:
                                nk[npend + c2] += me * (e - j)
                        nk = tuple(nk)
                        if _wdeg(nk, comb_weights) > trunc:
                            continue
                        blk[nk] = blk.get(nk, 0.0) + v * fac
                if blk:
                    if j > 0:
                        blk = _mul_dict(blk, dpow, comb_weights, trunc)
                    _add_into(R, blk)
            cur = R

    out = {}
    for exp, c in cur.items():
        if abs(c) <= STORE_TOL:
            continue
        key = exp[npend:]
        out[key] = out.get(key, 0.0) + c
    return {k: v for k, v in out.items() if abs(v) > STORE_TOL}


def _as_image(img, base_exp, nslots_out):
    """Classify an image termdict as 'near' (identity-like) or 'series'."""
    if base_exp is not None and base_exp in img:
        bc = img[base_exp]
        delta = {k: v for k, v in img.items() if k != base_exp}
        return ("near", base_exp, bc, delta)
    return ("series", img)


# ---------------------------------------------------------------------------


class MixedSeries:
    """Truncated series in (z, zbar, s); exponent keys (a..., b..., m)."""

    __slots__ = ("n", "trunc", "coeffs")

    def __init__(self, n: int, trunc: int, coeffs=None, *, _normalized=False):
        self.n = n
        self.trunc = trunc
        if coeffs is None:
            coeffs = {}
        if not _normalized:
            coeffs = _clean(coeffs, self.weights, trunc)
        self.coeffs = coeffs

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, n, trunc):
        return cls(n, trunc, {}, _normalized=True)

    @classmethod
    def monomial(cls, n, trunc, a, b, m, coeff=1.0):
        a = tuple(a)
        b = tuple(b)
        key = a + b + (m,)
        return cls(n, trunc, {key: complex(coeff)})

    @classmethod
    def variable(cls, n, trunc, kind, k=None):
        """kind in {'z','zb','s'}; k is 1-based for z/zb."""
        e = [0] * (2 * n + 1)
        if kind == "s":
            e[2 * n] = 1
        elif kind == "z":
            e[k - 1] = 1
        elif kind == "zb":
            e[n + k - 1] = 1
        else:
            raise ValueError(f"unknown variable kind {kind!r}")
        return cls(n, trunc, {tuple(e): 1.0})

    @classmethod
    def constant(cls, n, trunc, c):
        if abs(c) <= STORE_TOL:
            return cls.zero(n, trunc)
        return cls(n, trunc, {(0,) * (2 * n + 1): complex(c)})

    # -- basic structure ----------------------------------------------

    @property
    def nslots(self):
        return 2 * self.n + 1

    @property
    def weights(self):
        return (1,) * (2 * self.n) + (2,)

    def terms(self):
        """Iterate (a, b, m, coeff)."""
        n = self.n
        for k, v in self.coeffs.items():
            yield k[:n], k[n : 2 * n], k[2 * n], v

    def coeff(self, a, b, m):
        return self.coeffs.get(tuple(a) + tuple(b) + (m,), 0.0 + 0.0j)

    def norm(self):
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def is_zero(self, tol=DEFAULT_TOL):
        return self.norm() <= tol

    def min_wdeg(self):
        w = self.weights
        return min((_wdeg(k, w) for k in self.coeffs), default=None)

    # -- arithmetic ----------------------------------------------------

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("mismatched number of variables")
        return min(self.trunc, other.trunc)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = MixedSeries.constant(self.n, self.trunc, other)
        t = self._check(other)
        out = dict(self.coeffs)
        _add_into(out, other.coeffs)
        return MixedSeries(self.n, t, out)

    __radd__ = __add__

    def __neg__(self):
        return MixedSeries(
            self.n, self.trunc, {k: -v for k, v in self.coeffs.items()}, _normalized=True
        )

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = MixedSeries.constant(self.n, self.trunc, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return MixedSeries(
                self.n,
                self.trunc,
                {k: v * other for k, v in self.coeffs.items()},
            )
        t = self._check(other)
        out = _mul_dict(self.coeffs, other.coeffs, self.weights, t)
        return MixedSeries(self.n, t, out, _normalized=True)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e == 0:
            return MixedSeries.constant(self.n, self.trunc, 1.0)
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def conj(self):
        """Formal conjugate: swap z/zbar exponents, conjugate coefficients."""
        n = self.n
        out = {}
        for k, v in self.coeffs.items():
            out[k[n : 2 * n] + k[:n] + (k[2 * n],)] = v.conjugate()
        return MixedSeries(self.n, self.trunc, out, _normalized=True)

    def re_part(self):
        return (self + self.conj()) * 0.5

    def im_part(self):
        return (self - self.conj()) * (-0.5j)

    def diff(self, kind, k=None):
        """Formal derivative; kind in {'z','zb','s'}, k 1-based."""
        n = self.n
        if kind == "s":
            slot, wt = 2 * n, 2
        elif kind == "z":
            slot, wt = k - 1, 1
        elif kind == "zb":
            slot, wt = n + k - 1, 1
        else:
            raise ValueError(f"unknown variable kind {kind!r}")
        out = {}
        for key, v in self.coeffs.items():
            e = key[slot]
            if e == 0:
                continue
            nk = key[:slot] + (e - 1,) + key[slot + 1 :]
            out[nk] = out.get(nk, 0.0) + e * v
        return MixedSeries(self.n, max(self.trunc - wt, 0), out, _normalized=True)

    # -- grading -------------------------------------------------------

    def weighted_component(self, nu):
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) == nu}
        return MixedSeries(self.n, self.trunc, out, _normalized=True)

    def weighted_decompose(self):
        w = self.weights
        parts = {}
        for k, v in self.coeffs.items():
            parts.setdefault(_wdeg(k, w), {})[k] = v
        return {
            nu: MixedSeries(self.n, self.trunc, t, _normalized=True)
            for nu, t in sorted(parts.items())
        }

    def type_component(self, k, l):
        n = self.n
        out = {
            key: v
            for key, v in self.coeffs.items()
            if sum(key[:n]) == k and sum(key[n : 2 * n]) == l
        }
        return MixedSeries(self.n, self.trunc, out, _normalized=True)

    def type_decompose(self):
        n = self.n
        parts = {}
        for key, v in self.coeffs.items():
            parts.setdefault((sum(key[:n]), sum(key[n : 2 * n])), {})[key] = v
        return {
            kl: MixedSeries(self.n, self.trunc, t, _normalized=True)
            for kl, t in sorted(parts.items())
        }

    def truncate(self, new_trunc):
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) <= new_trunc}
        return MixedSeries(self.n, new_trunc, out, _normalized=True)

    def drop_below(self, nu):
        """Remove all terms of weighted degree < nu."""
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) >= nu}
        return MixedSeries(self.n, self.trunc, out, _normalized=True)

    # -- reality -------------------------------------------------------

    def reality_defect(self):
        n = self.n
        worst = 0.0
        for k, v in self.coeffs.items():
            kc = k[n : 2 * n] + k[:n] + (k[2 * n],)
            partner = complex(self.coeffs.get(kc, 0.0))
            worst = max(worst, abs(v - partner.conjugate()))
        return worst

    def is_real(self, tol=DEFAULT_TOL):
        return self.reality_defect() <= tol

    def realified(self):
        """Average with own conjugate (projects onto real series)."""
        return self.re_part()

    # -- substitution ----------------------------------------------------

    def subs(self, z=None, zb=None, s=None, allow_const=False):
        """Simultaneous substitution.

        ``z``/``zb``: optional lists of n images (MixedSeries or None for
        identity); ``s``: optional image.  All images must live in a common
        output space.  Unless ``allow_const``, images must have no constant
        term.
        """
        n = self.n
        imgs: list = [None] * self.nslots
        given = []
        z = z or [None] * n
        zb = zb or [None] * n
        for i in range(n):
            imgs[i] = z[i]
            imgs[n + i] = zb[i]
        imgs[2 * n] = s
        for im in imgs:
            if im is not None:
                given.append(im)
        if not given:
            return self
        n_out = given[0].n
        trunc_out = min(self.trunc, min(im.trunc for im in given))
        for im in given:
            if im.n != n_out:
                raise ValueError("images live in different spaces")
            if not allow_const and abs(im.coeff((0,) * n_out, (0,) * n_out, 0)) > STORE_TOL:
                raise ValueError("image has a constant term (pass allow_const=True)")
        if s is not None and not allow_const:
            md = s.min_wdeg()
            if md is not None and md < 2:
                raise ValueError("image of s must be O(2) in weighted degree")
        if any(im is None for im in imgs) and n_out != n:
            raise ValueError("identity images require matching output space")
        nslots_out = 2 * n_out + 1
        weights_out = (1,) * (2 * n_out) + (2,)
        images = []
        for slot, im in enumerate(imgs):
            unit = [0] * nslots_out
            if slot < 2 * n and n_out == n:
                unit[slot] = 1
            elif slot == 2 * n and n_out == n:
                unit[2 * n_out] = 1
            else:
                unit = None
            unit = tuple(unit) if unit is not None else None
            if im is None:
                images.append(("mono", unit, 1.0))
            elif len(im.coeffs) == 1:
                (kk, vv), = im.coeffs.items()
                images.append(("mono", kk, vv))
            else:
                images.append(_as_image(im.coeffs, unit, nslots_out))
        out = _compose_terms(
            self.coeffs, self.weights, images, nslots_out, weights_out, trunc_out
        )
        return MixedSeries(n_out, trunc_out, out, _normalized=True)

    def shift_s(self, delta, sign=1.0):
        """Substitute s -> s + sign*delta (delta a MixedSeries, O(2))."""
        img = MixedSeries.variable(self.n, self.trunc, "s") + delta * sign
        return self.subs(s=img)

    # -- conversions -----------------------------------------------------

    def holo_lift(self):
        """Read a series with no zbar dependence as a HoloSeries (s -> w)."""
        n = self.n
        out = {}
        for k, v in self.coeffs.items():
            if any(k[n : 2 * n]):
                raise ValueError("series depends on conjugate variables")
            out[k[:n] + (k[2 * n],)] = v
        return HoloSeries(n, self.trunc, out, _normalized=True)

    # -- serialization ---------------------------------------------------

    def sorted_terms(self):
        n = self.n
        w = self.weights

        def keyf(item):
            k, _ = item
            return (_wdeg(k, w), k[:n], k[n : 2 * n], k[2 * n])

        return sorted(self.coeffs.items(), key=keyf)

    def to_json_dict(self):
        n = self.n
        terms = []
        for k, v in self.sorted_terms():
            terms.append(
                {
                    "z": list(k[:n]),
                    "zbar": list(k[n : 2 * n]),
                    "s": k[2 * n],
                    "re": float(v.real),
                    "im": float(v.imag),
                }
            )
        return {
            "n": self.n,
            "trunc": self.trunc,
            "real": self.is_real(),
            "terms": terms,
        }

    @classmethod
    def from_json_dict(cls, d):
        n = int(d["n"])
        trunc = int(d["trunc"])
        coeffs = {}
        for t in d.get("terms", []):
            a = tuple(int(x) for x in t["z"])
            b = tuple(int(x) for x in t["zbar"])
            m = int(t["s"])
            if len(a) != n or len(b) != n:
                raise ValueError("exponent length does not match n")
            key = a + b + (m,)
            coeffs[key] = coeffs.get(key, 0.0) + complex(t["re"], t["im"])
        return cls(n, trunc, coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        n = self.n
        parts = []
        for k, v in self.sorted_terms():
            factors = []
            for i in range(n):
                if k[i]:
                    factors.append(f"z{i+1}" + (f"^{k[i]}" if k[i] > 1 else ""))
            for i in range(n):
                e = k[n + i]
                if e:
                    factors.append(f"zb{i+1}" + (f"^{e}" if e > 1 else ""))
            if k[2 * n]:
                factors.append("s" + (f"^{k[2*n]}" if k[2 * n] > 1 else ""))
            mono = "*".join(factors) if factors else "1"
            parts.append(f"({v.real:+.6g}{v.imag:+.6g}i)*{mono}")
        return " + ".join(parts)

    __repr__ = __str__


class HoloSeries:
    """Truncated holomorphic series in (z, w); exponent keys (a..., m)."""

    __slots__ = ("n", "trunc", "coeffs")

    def __init__(self, n, trunc, coeffs=None, *, _normalized=False):
        self.n = n
        self.trunc = trunc
        if coeffs is None:
            coeffs = {}
        if not _normalized:
            coeffs = _clean(coeffs, self.weights, trunc)
        self.coeffs = coeffs

    @classmethod
    def zero(cls, n, trunc):
        return cls(n, trunc, {}, _normalized=True)

    @classmethod
    def monomial(cls, n, trunc, a, m, coeff=1.0):
        return cls(n, trunc, {tuple(a) + (m,): complex(coeff)})

    @classmethod
    def variable(cls, n, trunc, kind, k=None):
        e = [0] * (n + 1)
        if kind == "w":
            e[n] = 1
        elif kind == "z":
            e[k - 1] = 1
        else:
            raise ValueError(f"unknown variable kind {kind!r}")
        return cls(n, trunc, {tuple(e): 1.0})

    @property
    def nslots(self):
        return self.n + 1

    @property
    def weights(self):
        return (1,) * self.n + (2,)

    def terms(self):
        n = self.n
        for k, v in self.coeffs.items():
            yield k[:n], k[n], v

    def coeff(self, a, m):
        return self.coeffs.get(tuple(a) + (m,), 0.0 + 0.0j)

    def norm(self):
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def is_zero(self, tol=DEFAULT_TOL):
        return self.norm() <= tol

    def min_wdeg(self):
        w = self.weights
        return min((_wdeg(k, w) for k in self.coeffs), default=None)

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("mismatched number of variables")
        return min(self.trunc, other.trunc)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = HoloSeries(self.n, self.trunc, {(0,) * self.nslots: complex(other)})
        t = self._check(other)
        out = dict(self.coeffs)
        _add_into(out, other.coeffs)
        return HoloSeries(self.n, t, out)

    __radd__ = __add__

    def __neg__(self):
        return HoloSeries(
            self.n, self.trunc, {k: -v for k, v in self.coeffs.items()}, _normalized=True
        )

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            return self + (-other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return HoloSeries(
                self.n, self.trunc, {k: v * other for k, v in self.coeffs.items()}
            )
        t = self._check(other)
        out = _mul_dict(self.coeffs, other.coeffs, self.weights, t)
        return HoloSeries(self.n, t, out, _normalized=True)

    __rmul__ = __mul__

    def diff(self, kind, k=None):
        n = self.n
        if kind == "w":
            slot, wt = n, 2
        elif kind == "z":
            slot, wt = k - 1, 1
        else:
            raise ValueError(f"unknown variable kind {kind!r}")
        out = {}
        for key, v in self.coeffs.items():
            e = key[slot]
            if e == 0:
                continue
            nk = key[:slot] + (e - 1,) + key[slot + 1 :]
            out[nk] = out.get(nk, 0.0) + e * v
        return HoloSeries(self.n, max(self.trunc - wt, 0), out, _normalized=True)

    def weighted_component(self, nu):
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) == nu}
        return HoloSeries(self.n, self.trunc, out, _normalized=True)

    def truncate(self, new_trunc):
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) <= new_trunc}
        return HoloSeries(self.n, new_trunc, out, _normalized=True)

    def drop_below(self, nu):
        w = self.weights
        out = {k: v for k, v in self.coeffs.items() if _wdeg(k, w) >= nu}
        return HoloSeries(self.n, self.trunc, out, _normalized=True)

    def subs_holo(self, z_images, w_image, allow_const=False):
        """Compose with holomorphic images (HoloSeries); returns HoloSeries.

        None entries mean identity.
        """
        n = self.n
        imgs = list(z_images) + [w_image]
        given = [im for im in imgs if im is not None]
        if not given:
            return self
        n_out = given[0].n
        trunc_out = min(self.trunc, min(im.trunc for im in given))
        for im in given:
            if not allow_const and abs(im.coeff((0,) * n_out, 0)) > STORE_TOL:
                raise ValueError("image has a constant term")
        if w_image is not None and not allow_const:
            md = w_image.min_wdeg()
            if md is not None and md < 2:
                raise ValueError("image of w must be O(2) in weighted degree")
        nslots_out = n_out + 1
        weights_out = (1,) * n_out + (2,)
        images = []
        for slot, im in enumerate(imgs):
            unit = None
            if n_out == n:
                u = [0] * nslots_out
                u[slot] = 1
                unit = tuple(u)
            if im is None:
                if unit is None:
                    raise ValueError("identity image requires matching space")
                images.append(("mono", unit, 1.0))
            elif len(im.coeffs) == 1:
                (kk, vv), = im.coeffs.items()
                images.append(("mono", kk, vv))
            else:
                images.append(_as_image(im.coeffs, unit, nslots_out))
        out = _compose_terms(
            self.coeffs, self.weights, images, nslots_out, weights_out, trunc_out
        )
        return HoloSeries(n_out, trunc_out, out, _normalized=True)

    def eval_mixed(self, z_images, w_image):
        """Evaluate with MixedSeries images for each z^k and for w."""
        given = [im for im in list(z_images) + [w_image] if im is not None]
        n_out = given[0].n
        trunc_out = min(self.trunc, min(im.trunc for im in given))
        nslots_out = 2 * n_out + 1
        weights_out = (1,) * (2 * n_out) + (2,)
        images = []
        for slot, im in enumerate(list(z_images) + [w_image]):
            unit = None
            if im is None:
                raise ValueError("eval_mixed requires explicit images")
            if slot < self.n and im.n == n_out:
                u = [0] * nslots_out
                u[slot] = 1
                unit = tuple(u)
            elif slot == self.n:
                # natural base for w is s
                u = [0] * nslots_out
                u[2 * n_out] = 1
                unit = tuple(u)
            if len(im.coeffs) == 1:
                (kk, vv), = im.coeffs.items()
                images.append(("mono", kk, vv))
            else:
                images.append(_as_image(im.coeffs, unit, nslots_out))
        out = _compose_terms(
            self.coeffs, self.weights, images, nslots_out, weights_out, trunc_out
        )
        return MixedSeries(n_out, trunc_out, out, _normalized=True)

    def conj_mixed(self):
        """Formal conjugate as a function of (zbar, s - i*0): returns the
        MixedSeries obtained by reading w -> s and conjugating: used only
        through eval paths; provided for tests."""
        n = self.n
        out = {}
        for k, v in self.coeffs.items():
            out[(0,) * n + k[:n] + (k[n],)] = v.conjugate()
        return MixedSeries(n, self.trunc, out, _normalized=True)

    def to_mixed(self):
        """Read w -> s (used when w is evaluated on the real axis)."""
        n = self.n
        out = {}
        for k, v in self.coeffs.items():
            out[k[:n] + (0,) * n + (k[n],)] = v
        return MixedSeries(n, self.trunc, out, _normalized=True)

    def conj_coeffs(self):
        """HoloSeries with conjugated coefficients (formal bar of the map)."""
        return HoloSeries(
            self.n,
            self.trunc,
            {k: v.conjugate() for k, v in self.coeffs.items()},
            _normalized=True,
        )

    def sorted_terms(self):
        n = self.n
        w = self.weights

        def keyf(item):
            k, _ = item
            return (_wdeg(k, w), k[:n], k[n])

        return sorted(self.coeffs.items(), key=keyf)

    def to_json_dict(self):
        n = self.n
        terms = []
        for k, v in self.sorted_terms():
            terms.append(
                {
                    "z": list(k[:n]),
                    "zbar": [0] * n,
                    "s": k[n],
                    "re": float(v.real),
                    "im": float(v.imag),
                }
            )
        return {"n": n, "trunc": self.trunc, "real": False, "terms": terms}

    @classmethod
    def from_json_dict(cls, d):
        n = int(d["n"])
        coeffs = {}
        for t in d.get("terms", []):
            if any(int(x) for x in t["zbar"]):
                raise ValueError("holomorphic series cannot depend on zbar")
            key = tuple(int(x) for x in t["z"]) + (int(t["s"]),)
            coeffs[key] = coeffs.get(key, 0.0) + complex(t["re"], t["im"])
        return cls(n, int(d["trunc"]), coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        n = self.n
        parts = []
        for k, v in self.sorted_terms():
            factors = []
            for i in range(n):
                if k[i]:
                    factors.append(f"z{i+1}" + (f"^{k[i]}" if k[i] > 1 else ""))
            if k[n]:
                factors.append("w" + (f"^{k[n]}" if k[n] > 1 else ""))
            mono = "*".join(factors) if factors else "1"
            parts.append(f"({v.real:+.6g}{v.imag:+.6g}i)*{mono}")
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# graph form <-> complex form


def graph_to_complex(phi: MixedSeries, tol=DEFAULT_TOL) -> MixedSeries:
    """Solve im w = phi(z, zbar, re w) for w = Q(z, zbar, wbar).

    The result reuses the s-slot of MixedSeries for the variable wbar
    (same weight).  Q = wbar + 2i*phi(z, zbar, (Q + wbar)/2).
    """
    if not phi.is_real(tol):
        raise ValueError("phi must be a real series")
    n, trunc = phi.n, phi.trunc
    wbar = MixedSeries.variable(n, trunc, "s")
    Q = wbar
    for _ in range(trunc + 2):
        newQ = wbar + 2j * phi.subs(s=(Q + wbar) * 0.5)
        if (newQ - Q).norm() <= STORE_TOL:
            Q = newQ
            break
        Q = newQ
    return Q


def complex_to_graph(Q: MixedSeries, tol=DEFAULT_TOL) -> MixedSeries:
    """Inverse of graph_to_complex: recover phi with im w = phi(z,zbar,re w)."""
    n, trunc = Q.n, Q.trunc
    s = MixedSeries.variable(n, trunc, "s")
    phi = MixedSeries.zero(n, trunc)
    for _ in range(trunc + 2):
        # w = Q(z,zbar,wbar), wbar = s - i*phi  =>  phi = (Q - (s - i*phi))/(2i)
        rhs = (Q.subs(s=s - 1j * phi) - (s - 1j * phi)) * (-0.5j)
        if (rhs - phi).norm() <= STORE_TOL:
            phi = rhs
            break
        phi = rhs
    return phi.realified()
