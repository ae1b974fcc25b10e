"""Irrep matrix coefficients: the U(1) rotation pair and the SU(4) adjoint.

The 15 non-identity two-qubit Paulis are enumerated as
``IX, IY, IZ, XI, XX, ..., ZZ`` (first letter = first qubit of the block).
That order is part of the public contract: :func:`su4_adjoint` rows and
columns, and the ``AdjointFactor`` indices stored in path series, use it.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ADJOINT_LABELS",
    "adjoint_index",
    "u1_pair_coeffs",
    "su4_adjoint",
    "su4_adjoint_batch",
    "haar_su4",
    "haar_su4_batch",
    "is_unitary",
]

_ORDER = "IXYZ"
ADJOINT_LABELS = tuple(a + b for a in _ORDER for b in _ORDER)[1:]

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_BLOCK_PAULIS = np.stack([np.kron(_PAULI_1Q[a], _PAULI_1Q[b]) for a, b in ADJOINT_LABELS])


def adjoint_index(first: str, second: str) -> int:
    """Index of the block Pauli ``first (x) second``; raises for ``II``."""
    k = 4 * _ORDER.index(first) + _ORDER.index(second) - 1
    if k < 0:
        raise ValueError("II is the trivial irrep, not part of the adjoint")
    return k


def u1_pair_coeffs(theta: float) -> tuple[float, float]:
    """``(cos 2θ, sin 2θ)``: the real 2-d irrep of ``exp(iθA)`` on ``{P, i A P}``."""
    return float(np.cos(2 * theta)), float(np.sin(2 * theta))


def is_unitary(g: np.ndarray, tol: float = 1e-10) -> bool:
    g = np.asarray(g)
    return bool(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))) <= tol)


def su4_adjoint_batch(gs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """``v[b, a, c] = tr(P_a g_b P_c g_b^dag) / 4`` for a stack of 4x4 unitaries."""
    gs = np.asarray(gs, dtype=complex)
    if gs.ndim == 2:
        gs = gs[None]
    if gs.shape[1:] != (4, 4):
        raise ValueError("expected 4x4 unitaries")
    defect = np.abs(np.einsum("bji,bjk->bik", gs.conj(), gs) - np.eye(4)).max()
    if defect > 1e-10:
        raise ValueError(f"input is not unitary (defect {defect:.2e})")
    conj = np.einsum("bij,cjk,blk->bcil", gs, _BLOCK_PAULIS, gs.conj())
    v = np.einsum("aji,bcij->bac", _BLOCK_PAULIS, conj) / 4
    if np.abs(v.imag).max() > tol:
        raise ValueError("adjoint matrix has an imaginary residue")
    return np.ascontiguousarray(v.real)


def su4_adjoint(g: np.ndarray) -> np.ndarray:
    """15x15 real orthogonal matrix of ``P -> g P g^dag`` on the block Paulis."""
    return su4_adjoint_batch(np.asarray(g)[None])[0]


def haar_su4_batch(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random 4x4 unitaries (U(4); the global phase drops out of the adjoint)."""
    z = (rng.standard_normal((size, 4, 4)) + 1j * rng.standard_normal((size, 4, 4))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_su4(rng: np.random.Generator) -> np.ndarray:
    return haar_su4_batch(rng, 1)[0]
