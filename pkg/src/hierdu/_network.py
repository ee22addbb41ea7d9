"""Column transfer sweeps over two-replica folded brickwork rectangles.

A rectangle of m x n gates is swept column by column.  One column stacks n
gates linked out_L -> in_R; it acts on the n "row" legs (in_L -> out_R) and
carries one leg from the bottom (in_R of the lowest gate) to the top (out_L
of the highest gate).  The sweep state is a tensor X[U1, U1*, U2, U2*] over
the two replicas of all n row legs, each axis of size q^n.
"""

from __future__ import annotations

import numpy as np

from ._config import check_budget

Pairing = str  # "circle" or "square"

# which replica slots share a contracted index: circle pairs (0,1)(2,3), square pairs (0,3)(1,2)
_SLOTS = {"circle": (0, 0, 1, 1), "square": (0, 1, 1, 0)}


def column_unitary(U: np.ndarray, q: int, n: int) -> np.ndarray:
    """C[u', k', u, k]: rows u (row 0 most significant), carry k at the bottom, k' on top."""
    G = np.asarray(U).reshape(q, q, q, q)
    N = q**n
    C = np.eye(N * q, dtype=np.complex128).reshape((q,) * (n + 1) + (N * q,))
    for j in range(n):
        C = np.tensordot(G, C, axes=([2, 3], [j, n]))
        C = np.moveaxis(C, [0, 1], [n, j])
    return C.reshape(N, q, N, q)


def pairing_state(q: int, n: int, kind: Pairing) -> np.ndarray:
    """Product of normalized single-leg pairings over n rows, in replica-major layout."""
    N = q**n
    X = np.zeros((N, N, N, N), dtype=np.complex128)
    idx = np.arange(N)
    if kind == "circle":
        X[idx[:, None], idx[:, None], idx[None, :], idx[None, :]] = q ** (-n)
    else:
        X[idx[:, None], idx[None, :], idx[None, :], idx[:, None]] = q ** (-n)
    return X


def read_out(X: np.ndarray, q: int, n: int, kind: Pairing) -> complex:
    sub = "aabb->" if kind == "circle" else "abba->"
    return complex(np.einsum(sub, X)) * q ** (-n)


def column_step(X: np.ndarray, C4: np.ndarray, cin: Pairing, cout: Pairing) -> np.ndarray:
    """Apply one folded column with pairing `cin` on the bottom carry and `cout` on top.

    Contracts the four replica copies one at a time so every intermediate
    carries at most three open carry indices.
    """
    q = C4.shape[1]
    labels: dict[tuple, int] = {}

    def lab(key: tuple) -> int:
        return labels.setdefault(key, len(labels))

    cur, cl = X, [lab(("row", r)) for r in range(4)]
    for r in range(4):
        M = C4 if r % 2 == 0 else C4.conj()
        ml = [lab(("new", r)), lab(("out", _SLOTS[cout][r])), lab(("row", r)), lab(("in", _SLOTS[cin][r]))]
        out = []
        for l in cl:
            if l == ml[2]:
                out.append(ml[0])
            elif l not in ml:
                out.append(l)
        out += [l for l in (ml[1], ml[3]) if l not in cl]
        cur = np.einsum(M, ml, cur, cl, out, optimize=True)
        cl = out
    return cur / q**2


def sweep(U: np.ndarray, q: int, n: int, m: int, init: Pairing, cin: Pairing, cout: Pairing,
          final: Pairing) -> list[float]:
    """Values of the rectangle network after each of m columns (n rows each)."""
    check_budget(3.0 * q ** (4 * n + 3), f"column sweep with {n} rows")
    C4 = column_unitary(U, q, n)
    X = pairing_state(q, n, init)
    out = []
    for _ in range(m):
        X = column_step(X, C4, cin, cout)
        out.append(read_out(X, q, n, final).real)
    return out


def z2_sweep(U: np.ndarray, q: int, n: int, m: int) -> list[float]:
    """Operator-purity network Z_2(j, n) for j = 1..m via four BLAS products per column.

    Boundaries: square on the lower-left and upper-left edges, circle on the
    lower-right and upper-right edges.
    """
    if n == 0:
        return [1.0] * m
    check_budget(3.0 * q ** (4 * n + 2), f"Z2 sweep with {n} rows")
    N = q**n
    C4 = column_unitary(U, q, n)
    Cc = C4.conj()
    X = pairing_state(q, n, "square")
    M1 = C4.transpose(1, 0, 3, 2).reshape(q * N * q, N)
    M2 = Cc.transpose(0, 1, 3, 2).reshape(N * q, q * N)
    M3 = C4.transpose(0, 3, 1, 2).reshape(N * q, q * N)
    M4 = Cc.transpose(0, 1, 3, 2).reshape(N, q, q * N)
    out = []
    for _ in range(m):
        Y = (M1 @ X.reshape(N, N**3)).reshape(q * N, q * N, N * N)
        Y = np.matmul(M2, Y).reshape(q * N * N, q * N, N)
        Y = np.matmul(M3, Y).reshape(q, N**3, q * N)
        Xn = Y[0] @ M4[:, 0, :].T
        for d in range(1, q):
            Xn += Y[d] @ M4[:, d, :].T
        X = Xn.reshape(N, N, N, N) / q**2
        out.append(read_out(X, q, n, "circle").real)
    return out


# ------------------------------------------------------------- layouts


def leg_major(X: np.ndarray, q: int, n: int) -> np.ndarray:
    """Replica-major (U1,U1*,U2,U2*) -> n legs of dim q^4, row 0 first."""
    perm = [c * n + j for j in range(n) for c in range(4)]
    return X.reshape((q,) * (4 * n)).transpose(perm).reshape((q**4,) * n)


def replica_major(Y: np.ndarray, q: int, n: int) -> np.ndarray:
    perm = np.argsort([c * n + j for j in range(n) for c in range(4)])
    return Y.reshape((q,) * (4 * n)).transpose(perm).reshape((q**n,) * 4)
