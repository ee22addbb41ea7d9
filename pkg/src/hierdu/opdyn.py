"""Operator growth: light-cone transfer matrices, staircase eigenvectors, OTOCs.

The light-cone transfer matrix (LCTM) acts on n two-replica folded legs and
is one column of the Z_2 sweep with a circle pairing on the incoming carry
and a square pairing on the outgoing one, rescaled by q.  With this
orientation the all-circle state is a fixed point for every unitary gate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from ._config import check_budget
from ._network import column_step, column_unitary, leg_major, pairing_state, replica_major
from .analysis import purity_B
from .membrane import cut_coordinates, z2_tilde, z_alpha_exact
from .tensor_core import UnitaryGate, _matrix, hermitian_basis


@dataclass
class LCTM:
    q: int
    n: int
    C4: np.ndarray
    _dense: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.q ** (4 * self.n)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Act on a replica-major state X[U1, U1*, U2, U2*]."""
        N = self.q**self.n
        return self.q * column_step(X.reshape(N, N, N, N), self.C4, "circle", "square")

    def apply_transpose(self, Y: np.ndarray) -> np.ndarray:
        N = self.q**self.n
        return self.q * column_step(Y.reshape(N, N, N, N), self.C4.transpose(2, 3, 0, 1), "square", "circle")

    @property
    def matrix(self) -> np.ndarray:
        """Dense matrix on the flattened replica-major space (n <= 3 at q = 2)."""
        if self._dense is None:
            self._dense = _dense_lctm(self.C4, self.q, self.n)
        return self._dense


def _dense_lctm(C4: np.ndarray, q: int, n: int) -> np.ndarray:
    N = q**n
    check_budget(3.0 * N**8, f"dense LCTM at n={n}")
    Cb = C4.transpose(1, 3, 0, 2)  # carry out, carry in, rows out, rows in
    M = np.zeros((N**4, N**4), dtype=np.complex128)
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    M += np.kron(np.kron(Cb[d, a], Cb[b, a].conj()), np.kron(Cb[b, c], Cb[d, c].conj()))
    return M / q


def lctm_build(U: "UnitaryGate | np.ndarray", n: int) -> LCTM:
    M, q = _matrix(U)
    if n < 1:
        raise ValueError("LCTM width must be >= 1")
    check_budget(4.0 * q ** (4 * n + 2), f"LCTM at n={n}")
    return LCTM(q, n, column_unitary(M, q, n))


def circle_state(q: int, n: int) -> np.ndarray:
    return pairing_state(q, n, "circle")


def leading_multiplicity(T: LCTM, tol: float = 1e-8) -> tuple[int, float]:
    """Number of eigenvalues within tol of 1, and the largest modulus among the rest."""
    ev = np.linalg.eigvals(T.matrix)
    lead = np.abs(ev - 1) < tol
    rest = np.abs(ev[~lead])
    return int(lead.sum()), float(rest.max()) if rest.size else 0.0


# ------------------------------------------------------------------ staircases


def _single_legs(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Leg-major one-site circle and square pairings (norm 1 each)."""
    eye = np.eye(q).reshape(-1) / np.sqrt(q)
    circ = np.kron(eye, eye)
    sq = np.zeros((q,) * 4)
    for a in range(q):
        for b in range(q):
            sq[a, b, b, a] = 1.0 / q
    return circ, sq.reshape(-1)


def _power_state(M: np.ndarray, q: int, k: int, steps: int, start: str, transpose: bool) -> np.ndarray:
    C4 = column_unitary(M, q, k)
    X = pairing_state(q, k, start)
    for _ in range(steps):
        if transpose:
            X = column_step(X, C4.transpose(2, 3, 0, 1), "square", "circle")
        else:
            X = column_step(X, C4, "circle", "square")
    return leg_major(X, q, k)


def _outer(parts: list[np.ndarray]) -> np.ndarray:
    out = np.ones(())
    for p in parts:
        out = np.multiply.outer(out, p)
    return out.reshape(-1)


@dataclass
class StaircaseBasis:
    q: int
    n: int
    height: int
    right: list[np.ndarray]
    left: list[np.ndarray]
    fixed_point_residual: float


@dataclass
class OverlapMatrix:
    gram: np.ndarray
    predicted: np.ndarray
    b: float
    rank: int
    max_error: float
    hankel_error: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gram"] = self.gram.real.tolist()
        d["predicted"] = self.predicted.tolist()
        return d


def staircase_basis(U: "UnitaryGate | np.ndarray", n: int, k: int = 2) -> StaircaseBasis:
    """Right fixed points |r_j> and left fixed points <l_j| of the LCTM with step height k-1.

    r_j: circles on the lowest n-j legs, then the staircase of j legs obtained
    by applying (k-1) j columns to squares.  l_j mirrors this with the
    transposed map, circles and squares exchanged.
    """
    M, q = _matrix(U)
    h = k - 1
    circ, sq = _single_legs(q)
    right, left = [], []
    for j in range(n + 1):
        if j == 0:
            s_r = s_l = np.ones(1)
        else:
            scale = float(q) ** ((h - 1) * j)
            s_r = scale * _power_state(M, q, j, h * j, "square", False).reshape(-1)
            s_l = scale * _power_state(M, q, j, h * j, "circle", True).reshape(-1)
        right.append(np.kron(_outer([circ] * (n - j)), s_r))
        left.append(np.kron(s_l, _outer([sq] * (n - j))))
    T = lctm_build(M, n)
    res = 0.0
    for r in right:
        X = replica_major(r, q, n)
        res = max(res, float(np.abs(leg_major(T.apply(X), q, n).reshape(-1) - r).max()))
    return StaircaseBasis(q, n, h, right, left, res)


def predicted_gram(q: int, n: int, b: float) -> np.ndarray:
    return np.array([[b ** max(0, i + j - n) / q**n for j in range(n + 1)] for i in range(n + 1)])


def staircase_overlaps(U: "UnitaryGate | np.ndarray", n: int, k: int = 2,
                       rank_tol: float = 1e-8) -> tuple[StaircaseBasis, OverlapMatrix]:
    M, q = _matrix(U)
    basis = staircase_basis(M, n, k)
    G = np.array([[l @ r for r in basis.right] for l in basis.left])
    b = purity_B(M, k - 1) / q**2
    P = predicted_gram(q, n, b)
    hank = 0.0
    for i in range(n + 1):
        for j in range(n + 1):
            for s in range(-n, n + 1):
                if 0 <= i + s <= n and 0 <= j - s <= n:
                    hank = max(hank, abs(G[i, j] - G[i + s, j - s]))
    sv = np.linalg.svd(G, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0]))
    return basis, OverlapMatrix(G, P, b, rank, float(np.abs(G - P).max()), float(hank))


# ------------------------------------------------------------------ OTOC


def otoc_window(x: int, t: int) -> tuple[int, int]:
    """Light-cone extents (m, n) of the causal diamond linking site 0 at time 0 to site x at time t."""
    if (t - x) % 2 == 0:
        return (t + x) // 2, (t - x + 2) // 2
    return (t + x + 1) // 2, (t - x + 1) // 2


def _site_operator(ops: dict[int, np.ndarray], L: int, q: int) -> np.ndarray:
    out = np.ones((1, 1))
    for s in range(L):
        out = np.kron(out, ops.get(s, np.eye(q)))
    return out


def otoc(U: "UnitaryGate | np.ndarray", sigma_a: np.ndarray, sigma_b: np.ndarray, x: int, t: int) -> complex:
    """q^-L tr[a(t) b a(t) b] with a(t) evolved through t brickwork layers, a at site 0 and b at site x.

    Only the gates in the causal diamond are applied; the rest cancel.
    """
    M, q = _matrix(U)
    m, n = otoc_window(x, t)
    if m <= 0 or n <= 0:
        return 1.0 + 0j
    lo, L = -(n - 1), m + n
    check_budget(3.0 * q ** (2 * L), f"OTOC window of {L} sites")
    # operator as a vector over 2L sites: outputs then inputs
    A = _site_operator({-lo: sigma_a}, L, q).reshape(-1)
    Mc = M.conj()
    for tau in range(1, t + 1):
        for i in range(m):
            j = tau - 1 - i
            if 0 <= j < n:
                s = i - j - lo
                A = _kernels.apply_two_site(A, M, q, 2 * L, s, s + 1)
                A = _kernels.apply_two_site(A, Mc, q, 2 * L, L + s, L + s + 1)
    D = q**L
    Am = A.reshape(D, D)
    B = _site_operator({x - lo: sigma_b}, L, q)
    AB = Am @ B
    return complex(np.sum(AB * AB.T) / D)


@dataclass
class OtocProfile:
    labels: tuple[int, int]
    xs: list[int]
    ts: list[int]
    values: np.ndarray  # (len(ts), len(xs))
    convention: str = ("m, n from the parity of t - x: even -> ((t+x)/2, (t-x+2)/2), "
                       "odd -> ((t+x+1)/2, (t-x+1)/2); C = 1 when either vanishes")

    def rows(self) -> list[dict]:
        return [{"x": x, "t": t, "C_real": self.values[a, b].real, "C_imag": self.values[a, b].imag}
                for a, t in enumerate(self.ts) for b, x in enumerate(self.xs)]


def otoc_profile(U: "UnitaryGate | np.ndarray", alpha: int = 0, beta: int = 0, x_max: int = 6,
                 t_max: int = 6, x_min: int | None = None) -> OtocProfile:
    """C(x, t) for the traceless Hermitian basis elements alpha, beta (q = 2: 0, 1, 2 = X, Y, Z)."""
    _, q = _matrix(U)
    basis = hermitian_basis(q)
    xs = list(range(-x_max if x_min is None else x_min, x_max + 1))
    ts = list(range(1, t_max + 1))
    vals = np.array([[otoc(U, basis[alpha], basis[beta], x, t) for x in xs] for t in ts])
    return OtocProfile((alpha, beta), xs, ts, vals)


# ------------------------------------------------------------------ tripartite information


def tripartite_info(U: "UnitaryGate | np.ndarray", x: int, t: int) -> float:
    """Renyi-2 tripartite information of the circuit as a state on inputs and outputs."""
    M, q = _matrix(U)
    c = cut_coordinates(x, t)
    z = z_alpha_exact(M, c.m, c.n)
    zt = z2_tilde(M, c.m, c.n)
    return float(math.log(q ** (c.m + c.n) * z) + math.log(zt))


# ------------------------------------------------------------------ Jordan blocks


@dataclass
class JordanProfile:
    sizes: dict[int, int | None]
    rank_sequences: dict[int, dict[float, list[int]]] = field(default_factory=dict)
    stable: bool = True


def _rank_sequence(T: LCTM, sketch: int, threshold: float, rng: np.random.Generator,
                   p_max: int) -> list[int] | None:
    """Ranks of M^p (1 - M) restricted to a random sketch, p = 0, 1, ...

    A sketch of k columns reports min(k, rank), so a saturated entry says
    nothing; None asks the caller for a wider sketch.
    """
    D = T.dim
    if sketch >= D:
        Om = np.eye(D, dtype=np.complex128)
    else:
        Om = rng.standard_normal((D, sketch)) + 1j * rng.standard_normal((D, sketch))
    step = lambda Z: np.stack([T.apply(z).reshape(-1) for z in Z.T], axis=1)  # noqa: E731
    Z = Om - step(Om)
    cap = Om.shape[1]
    out, scale = [], None
    for _ in range(p_max + 1):
        s = np.linalg.svd(Z, compute_uv=False)
        if scale is None:
            scale = s[0]
        out.append(int(np.sum(s > threshold * scale)))
        if _block_size(out, cap) is not None:
            return out
        Z = step(Z)
    return None if cap < D else out


def _block_size(ranks: list[int], cap: int | None = None) -> int | None:
    for p in range(len(ranks) - 1):
        if ranks[p] == ranks[p + 1] and (cap is None or ranks[p] < cap):
            return p
    return None


def jordan_profile(U: "UnitaryGate | np.ndarray", n_max: int = 3,
                   thresholds: tuple[float, ...] = (1e-6, 1e-8, 1e-10), seed: int = 0) -> JordanProfile:
    """Size of the largest Jordan block of the LCTM beyond its unit eigenspace.

    rank(M^p (1 - M)) drops by one per block still alive after p applications
    and stops changing once every nilpotent block is exhausted, so the block
    size is the first p at which the rank stops changing.  Ranks are read
    from a random sketch of the column space, widened when it saturates.
    """
    M, q = _matrix(U)
    profile = JordanProfile({})
    for n in range(1, n_max + 1):
        T = lctm_build(M, n)
        seqs: dict[float, list[int]] = {}
        sizes: set[int | None] = set()
        for th in thresholds:
            sketch = min(T.dim, 16)
            while True:
                seq = _rank_sequence(T, sketch, th, np.random.default_rng(seed), p_max=4 * n + 4)
                if seq is not None:
                    break
                sketch = min(T.dim, 4 * sketch)
            seqs[th] = seq
            sizes.add(_block_size(seq, sketch if sketch < T.dim else None))
        profile.rank_sequences[n] = seqs
        profile.sizes[n] = sizes.pop() if len(sizes) == 1 else None
        profile.stable &= profile.sizes[n] is not None
    return profile
