"""Solvability predicates and entangling measures for two-site gates.

The hierarchical condition of level k is checked by contracting a diagonal
chain of k folded gates.  Gate i's out_R feeds gate i+1's in_L; every in_R
and the final out_R are capped by a boundary vector.  The condition holds
when that chain equals the (k-1)-chain with the extra out_L capped instead.
The "right" direction uses the gate as given, "left" its spatial mirror.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from ._config import TOL_UNIT, check_budget
from ._network import z2_sweep
from .tensor_core import (UnitaryGate, _matrix, boundary_vector, fold, partial_transpose, reflect,
                          encode_matrix, reshuffle, schmidt_values,
                          unitarity_residual)

Direction = Literal["left", "right"]


@dataclass(frozen=True)
class Check:
    ok: bool
    residual: float


@dataclass
class HierarchyReport:
    dual_unitary: Check
    t_dual: Check
    level_left: int | None
    level_right: int | None
    k_max: int
    tol: float
    monotone: bool = True
    residuals: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EntanglingMeasures:
    q: int
    B: list[float]
    b1: float
    EP: float
    GT: float
    schmidt_rank: int

    def to_dict(self) -> dict:
        return asdict(self)


def verify_unitary(U: "UnitaryGate | np.ndarray", tol: float = TOL_UNIT) -> Check:
    M, _ = _matrix(U)
    r = unitarity_residual(M)
    return Check(r <= tol, r)


def verify_dual_unitary(U: "UnitaryGate | np.ndarray", tol: float = TOL_UNIT) -> Check:
    r = unitarity_residual(reshuffle(U))
    return Check(r <= tol, r)


def verify_t_dual(U: "UnitaryGate | np.ndarray", tol: float = TOL_UNIT) -> Check:
    r = unitarity_residual(partial_transpose(U))
    return Check(r <= tol, r)


def _chain(Wc: np.ndarray, k: int) -> np.ndarray:
    """Legs (in_L of gate 1, out_L of gates 1..k, out_R of gate k)."""
    T = Wc.transpose(2, 0, 1)
    for _ in range(k - 1):
        T = np.tensordot(T, Wc, axes=([-1], [2]))
    return T


def lk_residual(U: "UnitaryGate | np.ndarray", k: int, direction: Direction = "right",
                alpha: int = 1, kind: str = "circle") -> float:
    """Normalized max-abs mismatch of the level-k diagonal identity."""
    if k < 2:
        raise ValueError("hierarchy level must be >= 2")
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    M, q = _matrix(U)
    if direction == "left":
        M = reflect(M)
    d = q ** (2 * alpha)
    check_budget(2.0 * d ** (k + 2), f"level-{k} chain at alpha={alpha}")
    W = fold(M, alpha).tensor
    c = boundary_vector(kind, q, alpha).data
    Wc = np.tensordot(W, c, axes=([3], [0]))
    lhs = np.tensordot(_chain(Wc, k), c, axes=([-1], [0]))
    rhs = np.multiply.outer(np.tensordot(_chain(Wc, k - 1), c, axes=([-1], [0])), c)
    return float(np.abs(lhs - rhs).max() / np.abs(rhs).max())


def verify_Lk(U: "UnitaryGate | np.ndarray", k: int, direction: Direction = "right",
              tol: float = TOL_UNIT) -> Check:
    r = lk_residual(U, k, direction)
    return Check(r <= tol, r)


def verify_Lk_replicas(U: "UnitaryGate | np.ndarray", k: int, direction: Direction = "right",
                       tol: float = TOL_UNIT) -> dict[str, Check]:
    """The level-k identity at two replicas with both pairings, next to the one-replica check."""
    out = {"alpha1_circle": verify_Lk(U, k, direction, tol)}
    for kind in ("circle", "square"):
        r = lk_residual(U, k, direction, alpha=2, kind=kind)
        out[f"alpha2_{kind}"] = Check(r <= tol, r)
    return out


def classify_hierarchy(U: "UnitaryGate | np.ndarray", k_max: int = 4,
                       tol: float = TOL_UNIT) -> HierarchyReport:
    """Smallest verified level per direction; the next level is also checked for monotonicity."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    residuals: dict[str, float] = {}
    levels: dict[str, int | None] = {}
    monotone = True
    for direction in ("left", "right"):
        level = None
        for k in range(2, k_max + 1):
            r = lk_residual(U, k, direction)
            residuals[f"k{k}_{direction}_circle"] = r
            if level is not None:
                monotone &= r <= tol
                break
            if r <= tol:
                level = k
        levels[direction] = level
    return HierarchyReport(verify_dual_unitary(U, tol), verify_t_dual(U, tol),
                           levels["left"], levels["right"], k_max, tol, monotone, residuals)


def purity_B(U: "UnitaryGate | np.ndarray", ell: int, direction: Direction = "right") -> float:
    """Operator purity of an ell-gate diagonal staircase, scaled so that B = 1 for dual-unitary gates."""
    if ell < 1:
        raise ValueError("staircase length must be >= 1")
    M, q = _matrix(U)
    if direction == "left":
        M = reflect(M)
    return float(q ** (ell + 1) * z2_sweep(M, q, 1, ell)[-1])


def b1_from_schmidt(U: "UnitaryGate | np.ndarray") -> float:
    _, q = _matrix(U)
    lam = schmidt_values(U)
    return float(np.sum(lam**4) / q**2)


def ep_gt(U: "UnitaryGate | np.ndarray", ell_max: int = 1) -> EntanglingMeasures:
    M, q = _matrix(U)
    lam = schmidt_values(M)
    gam = np.linalg.svd(partial_transpose(M), compute_uv=False)
    s4, g4 = np.sum(lam**4), np.sum(gam**4)
    d = q * q
    ep = d / (d - 1) * ((1 + 1 / d) - (s4 + g4) / d**2)
    gt = d / (2 * (d - 1)) * ((1 - 1 / d) - (s4 - g4) / d**2)
    B = [purity_B(M, ell) for ell in range(1, ell_max + 1)]
    rank = int(np.sum(lam > 1e-8 * lam[0]))
    return EntanglingMeasures(q, B, float(s4 / d**2), float(ep), float(gt), rank)


def local_dress(U: "UnitaryGate | np.ndarray", u_in_left=None, u_in_right=None,
                u_out_left=None, u_out_right=None) -> UnitaryGate:
    """(u_out_left x u_out_right) U (u_in_left x u_in_right); None means identity."""
    M, q = _matrix(U)
    eye = np.eye(q)
    mats = []
    for u in (u_in_left, u_in_right, u_out_left, u_out_right):
        u = eye if u is None else np.asarray(u, dtype=np.complex128)
        if u.shape != (q, q):
            raise ValueError(f"dressing unitary must be {q}x{q}, got {u.shape}")
        mats.append(u)
    V = np.kron(mats[2], mats[3]) @ M @ np.kron(mats[0], mats[1])
    base = U.recipe if isinstance(U, UnitaryGate) else {"kind": "explicit", "params": {"matrix": encode_matrix(M)}}
    names = ("u_in_left", "u_in_right", "u_out_left", "u_out_right")
    params = {"of": base, **{k: encode_matrix(u) for k, u in zip(names, mats)}}
    return UnitaryGate(q, V, {"kind": "dressed", "params": params})
