"""Dense tensor primitives for two-site gates.

Index convention: a two-site gate is a q^2 x q^2 matrix with composite
indices (ab) = a*q + b, site 1 being the most significant digit.  As a
4-tensor it is ``U[a, b, c, d]`` = (out_L, out_R, in_L, in_R).

Folded legs carry the replicas in the order (u_1, u_1*, u_2, u_2*, ...),
row-major, so a folded leg of replica count alpha has dimension q^(2 alpha).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from ._config import SCHMIDT_CUTOFF, TOL_UNIT, check_budget


class NonUnitaryError(ValueError):
    pass


def _infer_q(dim: int) -> int:
    q = int(round(np.sqrt(dim)))
    if q * q != dim or q < 2:
        raise ValueError(f"matrix of size {dim} is not a two-site gate")
    return q


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """A unitary on two q-level sites together with the recipe that built it."""

    q: int
    matrix: np.ndarray
    recipe: dict[str, Any] = field(default_factory=lambda: {"kind": "explicit", "params": {}})
    tol: float = TOL_UNIT

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        d = self.q * self.q
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix for q={self.q}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("gate has non-finite entries")
        res = unitarity_residual(m)
        if res > self.tol:
            raise NonUnitaryError(f"gate is not unitary (Frobenius residual {res:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def tensor(self) -> np.ndarray:
        q = self.q
        return self.matrix.reshape(q, q, q, q)

    @property
    def kind(self) -> str:
        return str(self.recipe.get("kind", "explicit"))

    def dagger(self) -> "UnitaryGate":
        return UnitaryGate(self.q, self.matrix.conj().T, {"kind": "dagger", "params": {"of": self.recipe}})

    def __repr__(self) -> str:
        return f"UnitaryGate(q={self.q}, kind={self.kind!r})"


def as_gate(U: "UnitaryGate | np.ndarray", q: int | None = None) -> UnitaryGate:
    if isinstance(U, UnitaryGate):
        return U
    U = np.asarray(U)
    return UnitaryGate(q or _infer_q(U.shape[0]), U)


def _matrix(U: "UnitaryGate | np.ndarray") -> tuple[np.ndarray, int]:
    if isinstance(U, UnitaryGate):
        return U.matrix, U.q
    U = np.asarray(U, dtype=np.complex128)
    return U, _infer_q(U.shape[0])


def encode_matrix(M: np.ndarray) -> list[list[float]]:
    """Row-major [re, im] pairs; exact for float64 through JSON."""
    flat = np.asarray(M, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def decode_matrix(pairs: list, dim: int | None = None) -> np.ndarray:
    a = np.asarray(pairs, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError("explicit matrix must be a list of [re, im] pairs")
    z = a[:, 0] + 1j * a[:, 1]
    dim = dim or int(round(np.sqrt(z.size)))
    if dim * dim != z.size:
        raise ValueError(f"{z.size} entries do not form a square matrix")
    return z.reshape(dim, dim)


def unitarity_residual(M: np.ndarray) -> float:
    M = np.asarray(M)
    return float(np.linalg.norm(M @ M.conj().T - np.eye(M.shape[0])))


def reshuffle(U: "UnitaryGate | np.ndarray") -> np.ndarray:
    """Space-time dual: R[(ab),(cd)] = U[(ac),(bd)]."""
    M, q = _matrix(U)
    return M.reshape(q, q, q, q).transpose(0, 2, 1, 3).reshape(q * q, q * q)


def partial_transpose(U: "UnitaryGate | np.ndarray") -> np.ndarray:
    """U^Gamma[(ab),(cd)] = U[(ad),(cb)]."""
    M, q = _matrix(U)
    return M.reshape(q, q, q, q).transpose(0, 3, 2, 1).reshape(q * q, q * q)


def reflect(U: "UnitaryGate | np.ndarray") -> np.ndarray:
    """Spatial mirror image SWAP U SWAP."""
    M, q = _matrix(U)
    return M.reshape(q, q, q, q).transpose(1, 0, 3, 2).reshape(q * q, q * q)


def reflected_gate(U: UnitaryGate) -> UnitaryGate:
    return UnitaryGate(U.q, reflect(U), {"kind": "reflected", "params": {"of": U.recipe}})


def swap_matrix(q: int) -> np.ndarray:
    return np.eye(q * q, dtype=np.complex128).reshape(q, q, q, q).transpose(1, 0, 2, 3).reshape(q * q, q * q)


# ---------------------------------------------------------------- folding


@dataclass(frozen=True, eq=False)
class FoldedGate:
    q: int
    alpha: int
    tensor: np.ndarray  # legs (out_L, out_R, in_L, in_R), each of dim q**(2*alpha)

    @property
    def leg_dim(self) -> int:
        return self.q ** (2 * self.alpha)


def _fold_tensor(T: np.ndarray, alpha: int) -> np.ndarray:
    q = T.shape[0]
    copies = [T if r % 2 == 0 else T.conj() for r in range(2 * alpha)]
    out = copies[0]
    for c in copies[1:]:
        out = np.multiply.outer(out, c)
    # axes are (copy, leg) flattened copy-major; regroup leg-major
    n = 2 * alpha
    perm = [c * 4 + leg for leg in range(4) for c in range(n)]
    D = q ** n
    return out.transpose(perm).reshape(D, D, D, D)


def fold(U: "UnitaryGate | np.ndarray", alpha: int = 1) -> FoldedGate:
    """Replicated gate (U x U*)^(x alpha) with each leg grouped to dim q^(2 alpha)."""
    if alpha < 1:
        raise ValueError("replica count must be >= 1")
    M, q = _matrix(U)
    check_budget(float(q) ** (8 * alpha), f"fold(q={q}, alpha={alpha})")
    return FoldedGate(q, alpha, _fold_tensor(M.reshape(q, q, q, q), alpha))


@dataclass(frozen=True, eq=False)
class BoundaryVector:
    kind: Literal["circle", "square"]
    q: int
    alpha: int
    data: np.ndarray


def pairing_vector(perm: list[int], q: int) -> np.ndarray:
    """Unnormalized pairing: leg u_r* is contracted with u_{perm[r]}."""
    alpha = len(perm)
    v = np.zeros((q,) * (2 * alpha))
    for idx in np.ndindex(*((q,) * alpha)):
        full = [0] * (2 * alpha)
        for r in range(alpha):
            full[2 * r] = idx[r]
            full[2 * perm[r] + 1] = idx[r]
        v[tuple(full)] = 1.0
    return v.reshape(-1)


def boundary_vector(kind: str, q: int, alpha: int = 1) -> BoundaryVector:
    if kind not in ("circle", "square"):
        raise ValueError(f"unknown boundary kind {kind!r}")
    if alpha < 1:
        raise ValueError("replica count must be >= 1")
    perm = list(range(alpha)) if kind == "circle" else [(r - 1) % alpha for r in range(alpha)]
    data = pairing_vector(perm, q) * q ** (-alpha / 2)
    return BoundaryVector(kind, q, alpha, data.astype(np.complex128))


# ---------------------------------------------------------------- Schmidt


@dataclass(frozen=True, eq=False)
class SchmidtData:
    values: np.ndarray
    rank: int
    left_basis: np.ndarray   # (q^2, q, q): X_i acting on site 1
    right_basis: np.ndarray  # (q^2, q, q): Y_i acting on site 2

    def reconstruct(self) -> np.ndarray:
        return sum(s * np.kron(X, Y) for s, X, Y in zip(self.values, self.left_basis, self.right_basis))

    def is_flat(self, tol: float = 1e-8) -> bool:
        nz = self.values[: self.rank]
        return bool(nz.max() / nz.min() - 1.0 <= tol)


def schmidt_values(U: "UnitaryGate | np.ndarray") -> np.ndarray:
    return np.linalg.svd(reshuffle(U), compute_uv=False)


def schmidt_rank(values: np.ndarray, cutoff: float = SCHMIDT_CUTOFF) -> int:
    return int(np.sum(values > cutoff * values[0]))


def schmidt_decompose(U: "UnitaryGate | np.ndarray", cutoff: float = SCHMIDT_CUTOFF) -> SchmidtData:
    """Operator Schmidt decomposition U = sum_i lambda_i X_i (x) Y_i."""
    M, q = _matrix(U)
    try:
        W, s, Vh = np.linalg.svd(reshuffle(M))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"SVD of the reshuffled gate failed: {exc}") from exc
    left = W.T.reshape(q * q, q, q)
    right = Vh.reshape(q * q, q, q)
    return SchmidtData(s, schmidt_rank(s, cutoff), left, right)


# ---------------------------------------------------------------- sampling


def haar_unitary(dim: int, seed: "int | np.random.Generator | None" = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix with phase fix."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def haar_gate(q: int, seed: "int | np.random.Generator | None" = None) -> UnitaryGate:
    s = int(seed) if isinstance(seed, (int, np.integer)) else None
    return UnitaryGate(q, haar_unitary(q * q, seed), {"kind": "haar", "params": {"seed": s, "q": q}})


def hermitian_basis(q: int) -> list[np.ndarray]:
    """Traceless Hermitian basis normalized to tr(s_a s_b) = q delta_ab.

    Generalized Gell-Mann order: symmetric, antisymmetric, then diagonal;
    for q = 2 this is (X, Y, Z).
    """
    out: list[np.ndarray] = []
    sym, asym = [], []
    for j in range(q):
        for k in range(j + 1, q):
            s = np.zeros((q, q), complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((q, q), complex)
            a[j, k], a[k, j] = -1j, 1j
            sym.append(s)
            asym.append(a)
    out = sym + asym
    for l in range(1, q):
        d = np.zeros(q)
        d[:l] = 1
        d[l] = -l
        out.append(np.diag(d * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    return [m * np.sqrt(q / 2.0) for m in out]
