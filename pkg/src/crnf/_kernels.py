"""Coefficient-array kernels for truncated series products.

The Cauchy product of two sparse exponent/coefficient arrays is the hot
loop of the whole package.  Two interchangeable implementations are
provided: a numba ``@njit`` kernel and a pure-numpy fallback.  numba is
used when importable, unless the environment variable
``CRNF_DISABLE_NUMBA`` is set to a non-empty value.

Exponent arrays are ``(k, nslots)`` int64; packing uses a mixed-radix
key with radix ``trunc + 2`` (every exponent of a truncated term is at
most ``trunc`` since all slot weights are >= 1).
"""

import os

import numpy as np

_DISABLED = bool(os.environ.get("CRNF_DISABLE_NUMBA"))

HAS_NUMBA = False
if not _DISABLED:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        pass


def _mul_numpy(expA, valA, expB, valB, weights, trunc):
    wa = expA @ weights
    wb = expB @ weights
    ii, jj = np.nonzero(wa[:, None] + wb[None, :] <= trunc)
    nc = expA.shape[1]
    if ii.size == 0:
        return np.empty((0, nc), dtype=np.int64), np.empty(0, dtype=np.complex128)
    exps = expA[ii] + expB[jj]
    vals = valA[ii] * valB[jj]
    radix = trunc + 2
    keys = np.zeros(exps.shape[0], dtype=np.int64)
    for c in range(nc):
        keys = keys * radix + exps[:, c]
    uk, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    out = np.zeros(uk.size, dtype=np.complex128)
    np.add.at(out, inv, vals)
    return exps[first], out


if HAS_NUMBA:

    @njit(cache=True)
    def _mul_numba(expA, valA, expB, valB, weights, trunc):  # pragma: no cover
        nA, nc = expA.shape
        nB = expB.shape[0]
        wa = np.empty(nA, np.int64)
        for i in range(nA):
            t = 0
            for c in range(nc):
                t += expA[i, c] * weights[c]
            wa[i] = t
        wb = np.empty(nB, np.int64)
        for j in range(nB):
            t = 0
            for c in range(nc):
                t += expB[j, c] * weights[c]
            wb[j] = t
        cnt = 0
        for i in range(nA):
            for j in range(nB):
                if wa[i] + wb[j] <= trunc:
                    cnt += 1
        keys = np.empty(cnt, np.int64)
        vals = np.empty(cnt, np.complex128)
        radix = trunc + 2
        k = 0
        for i in range(nA):
            for j in range(nB):
                if wa[i] + wb[j] <= trunc:
                    key = np.int64(0)
                    for c in range(nc):
                        key = key * radix + expA[i, c] + expB[j, c]
                    keys[k] = key
                    vals[k] = valA[i] * valB[j]
                    k += 1
        if cnt == 0:
            return np.empty((0, nc), np.int64), np.empty(0, np.complex128)
        order = np.argsort(keys)
        out_keys = np.empty(cnt, np.int64)
        out_vals = np.empty(cnt, np.complex128)
        m = 0
        idx = 0
        while idx < cnt:
            kk = keys[order[idx]]
            acc = vals[order[idx]]
            idx += 1
            while idx < cnt and keys[order[idx]] == kk:
                acc += vals[order[idx]]
                idx += 1
            out_keys[m] = kk
            out_vals[m] = acc
            m += 1
        exps = np.empty((m, nc), np.int64)
        for t in range(m):
            key = out_keys[t]
            for c in range(nc - 1, -1, -1):
                exps[t, c] = key % radix
                key //= radix
        return exps, out_vals[:m]

    mul_arrays = _mul_numba
else:
    mul_arrays = _mul_numpy
