"""Hot loops with a numba implementation and a pure numpy twin.

The numba versions are compiled lazily on first use.  Set HIERDU_BACKEND=numpy
to force the numpy path (useful for debugging and for the benchmark).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from ._config import backend

# ------------------------------------------------------------------ numpy


def _apply_two_site_np(psi: np.ndarray, U: np.ndarray, q: int, N: int, i: int, j: int) -> np.ndarray:
    T = psi.reshape((q,) * N)
    G = U.reshape(q, q, q, q)
    T = np.tensordot(G, T, axes=([2, 3], [i, j]))
    T = np.moveaxis(T, [0, 1], [i, j])
    return np.ascontiguousarray(T).reshape(-1)


def _reshuffle_index(q: int) -> np.ndarray:
    """For input column (cd) of a permutation gate, the flat position of R[(ac),(bd)] given output (ab)."""
    D = q * q
    out = np.empty((D, D), dtype=np.int64)
    for col in range(D):
        c, d = divmod(col, q)
        for row in range(D):
            a, b = divmod(row, q)
            out[col, row] = (a * q + c) * D + (b * q + d)
    return out


def _flat_perm_scan_np(q: int, start: int, count: int, chunk: int = 20000) -> np.ndarray:
    D = q * q
    pos = _reshuffle_index(q)
    mask = np.zeros(count, dtype=np.bool_)
    it = itertools.islice(itertools.permutations(range(D)), start, start + count)
    done = 0
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        B = len(block)
        R = np.zeros((B, D * D), dtype=np.int64)
        flat = pos[np.arange(D)[None, :], block]  # (B, D)
        np.put_along_axis(R, flat, 1, axis=1)
        R = R.reshape(B, D, D)
        G = R @ R.transpose(0, 2, 1)
        G2 = G @ G
        tr2 = np.einsum("bii->b", G2)
        mask[done:done + B] = np.all((D * G2 - tr2[:, None, None] * G) == 0, axis=(1, 2))
        done += B
    return mask


# ------------------------------------------------------------------ numba


@lru_cache(maxsize=1)
def _numba_kernels():
    from numba import njit

    @njit(cache=True)
    def apply_two_site(psi, U, q, N, i, j):
        out = np.empty_like(psi)
        si = q ** (N - 1 - i)
        sj = q ** (N - 1 - j)
        lo, hi = min(si, sj), max(si, sj)
        D = q * q
        buf = np.empty(D, dtype=np.complex128)
        off = np.empty(D, dtype=np.int64)
        for a in range(q):
            for b in range(q):
                off[a * q + b] = a * si + b * sj
        # index = outer * (q hi) + mid * (q lo) + inner with both digits zeroed
        n_mid = hi // (q * lo)
        n_out = q**N // (q * hi)
        for o in range(n_out):
            for m in range(n_mid):
                start = o * q * hi + m * q * lo
                for k in range(lo):
                    base = start + k
                    for c in range(D):
                        buf[c] = psi[base + off[c]]
                    for r in range(D):
                        acc = 0j
                        for c in range(D):
                            acc += U[r, c] * buf[c]
                        out[base + off[r]] = acc
        return out

    @njit(cache=True)
    def flat_perm_scan(q, start, count, pos):
        D = q * q
        # unrank the starting permutation (Lehmer code)
        perm = np.empty(D, dtype=np.int64)
        avail = np.arange(D)
        navail = D
        r = start
        for k in range(D):
            f = 1
            for t in range(2, D - k):
                f *= t
            idx = r // f
            r = r % f
            perm[k] = avail[idx]
            for t in range(idx, navail - 1):
                avail[t] = avail[t + 1]
            navail -= 1
        mask = np.zeros(count, dtype=np.bool_)
        R = np.zeros(D * D, dtype=np.int64)
        G = np.zeros((D, D), dtype=np.int64)
        for n in range(count):
            R[:] = 0
            for col in range(D):
                R[pos[col, perm[col]]] = 1
            Rm = R.reshape(D, D)
            for x in range(D):
                for y in range(x, D):
                    s = 0
                    for z in range(D):
                        s += Rm[x, z] * Rm[y, z]
                    G[x, y] = s
                    G[y, x] = s
            tr2 = 0
            for x in range(D):
                for y in range(D):
                    tr2 += G[x, y] * G[y, x]
            ok = True
            for x in range(D):
                if not ok:
                    break
                for y in range(D):
                    s = 0
                    for z in range(D):
                        s += G[x, z] * G[z, y]
                    if D * s != tr2 * G[x, y]:
                        ok = False
                        break
            mask[n] = ok
            # next permutation in lexicographic order
            k = D - 2
            while k >= 0 and perm[k] >= perm[k + 1]:
                k -= 1
            if k < 0:
                break
            l = D - 1
            while perm[l] <= perm[k]:
                l -= 1
            perm[k], perm[l] = perm[l], perm[k]
            lo, hi = k + 1, D - 1
            while lo < hi:
                perm[lo], perm[hi] = perm[hi], perm[lo]
                lo += 1
                hi -= 1
        return mask

    return apply_two_site, flat_perm_scan


# ------------------------------------------------------------------ dispatch


def apply_two_site(psi: np.ndarray, U: np.ndarray, q: int, N: int, i: int, j: int,
                   use: str | None = None) -> np.ndarray:
    """Apply a q^2 x q^2 gate to sites (i, j) of an N-site state vector (site 0 most significant)."""
    if (use or backend()) == "numba":
        return _numba_kernels()[0](np.ascontiguousarray(psi, dtype=np.complex128),
                                   np.ascontiguousarray(U, dtype=np.complex128), q, N, i, j)
    return _apply_two_site_np(psi, U, q, N, i, j)


def flat_perm_scan(q: int, start: int = 0, count: int | None = None, use: str | None = None) -> np.ndarray:
    """Boolean mask over permutations of q^2 symbols in lexicographic order.

    Entry n is true iff permutation gate number start+n has a flat operator
    Schmidt spectrum, tested exactly in integers as G^2 = c G with G = R R^T,
    R the reshuffled permutation matrix.
    """
    total = math.factorial(q * q)
    count = total - start if count is None else min(count, total - start)
    if (use or backend()) == "numba":
        return _numba_kernels()[1](q, start, count, _reshuffle_index(q))
    return _flat_perm_scan_np(q, start, count)


def nth_permutation(n: int, size: int) -> np.ndarray:
    avail = list(range(size))
    out = []
    for k in range(size):
        f = math.factorial(size - 1 - k)
        idx, n = divmod(n, f)
        out.append(avail.pop(idx))
    return np.array(out, dtype=np.int64)
