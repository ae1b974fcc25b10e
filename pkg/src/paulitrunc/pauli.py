"""Exact n-qubit Pauli algebra on symplectic bit masks.

A :class:`PauliString` is ``i**phase`` times a tensor product of the letters
I, X, Y, Z. Qubit ``j`` lives at bit ``j`` of the ``x`` and ``z`` masks
(``Y`` sets both). Python integers act as arbitrary-width bit vectors, so no
word packing is needed.

Text literals are written leftmost character = qubit 0, with an optional
leading sign: ``"-YZI"`` is ``-Y (x) Z (x) I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "PauliString",
    "mul",
    "commutes",
    "branch_partner",
    "diag_element",
    "marginal_sum",
    "popcount",
    "bits_from_string",
]

_LETTERS = "IXZY"  # index = x_bit + 2*z_bit
_SIGN_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """``i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}`` with ``P_j`` in {I,X,Y,Z}."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError(f"mask has bits beyond {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"XYZ"``, ``"-ZZ"``, ``"+iX"``. Leftmost letter is qubit 0."""
        s = label.strip()
        phase = 0
        if s.startswith("+"):
            s = s[1:]
        elif s.startswith("-"):
            phase = 2
            s = s[1:]
        if s.startswith("i"):
            phase += 1
            s = s[1:]
        x = z = 0
        for j, ch in enumerate(s.upper()):
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
        return cls(len(s), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliString:
        if not 0 <= qubit < n:
            raise IndexError(f"qubit {qubit} out of range for n={n}")
        letter = letter.upper()
        x = (1 << qubit) if letter in "XY" else 0
        z = (1 << qubit) if letter in "ZY" else 0
        return cls(n, x, z, 0)

    # -- queries -------------------------------------------------------------
    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.phase == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def unsigned(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, 0)

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.n, self.x, self.z, phase)

    def negate(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def inverse(self) -> PauliString:
        # Pauli letters square to I, so the inverse only conjugates the phase.
        return PauliString(self.n, self.x, self.z, -self.phase)

    def letters(self) -> str:
        return "".join(self.letter(j) for j in range(self.n))

    def __str__(self) -> str:
        prefix = _SIGN_PREFIX[self.phase]
        if prefix == "+":
            prefix = ""
        return prefix + self.letters()

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __mul__(self, other: PauliString) -> PauliString:
        return mul(self, other)

    def to_matrix(self):
        """Dense ``2**n x 2**n`` matrix (qubit 0 is the most significant factor)."""
        import numpy as np

        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for j in range(self.n):
            out = np.kron(out, mats[self.letter(j)])
        return (1j**self.phase) * out


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n} qubits")


def mul(p: PauliString, q: PauliString) -> PauliString:
    """Matrix product ``p @ q`` with the phase tracked exactly mod 4."""
    _check_sizes(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    # Convert letter form to X^x Z^z form (Y = i X Z), multiply, convert back.
    phase = (
        p.phase
        + q.phase
        + popcount(p.x & p.z)
        + popcount(q.x & q.z)
        + 2 * popcount(p.z & q.x)
        - popcount(x & z)
    )
    return PauliString(p.n, x, z, phase)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    return (popcount(p.x & q.z) + popcount(p.z & q.x)) % 2 == 0


def branch_partner(axis: PauliString, p: PauliString) -> PauliString:
    """Return ``q = i * axis * p`` for anticommuting Hermitian inputs.

    With this ``q``, ``exp(i t A) P exp(-i t A) = cos(2t) P + sin(2t) q``.
    """
    if not (axis.is_hermitian and p.is_hermitian):
        raise ValueError("branch_partner needs Hermitian inputs")
    if commutes(axis, p):
        raise ValueError(f"{axis} and {p} commute; no partner exists")
    prod = mul(axis, p)
    out = prod.with_phase(prod.phase + 1)
    assert out.is_hermitian
    return out


def bits_from_string(bits: str) -> int:
    """``"10"`` -> mask with qubit 0 set. Leftmost character is qubit 0."""
    v = 0
    for j, ch in enumerate(bits):
        if ch == "1":
            v |= 1 << j
        elif ch != "0":
            raise ValueError(f"bad bit {ch!r}")
    return v


def _as_mask(x, n: int) -> int:
    if isinstance(x, str):
        if len(x) != n:
            raise ValueError(f"bitstring length {len(x)} != {n}")
        return bits_from_string(x)
    x = int(x)
    if x >> n:
        raise ValueError("basis state has bits beyond n")
    return x


def diag_element(p: PauliString, x) -> int:
    """``<x|p|x>`` for a Hermitian Pauli; ``x`` is a bitstring or qubit mask."""
    xm = _as_mask(x, p.n)
    if p.x:
        return 0
    return p.sign * (-1 if popcount(p.z & xm) & 1 else 1)


def marginal_sum(p: PauliString, fixed: Mapping[int, int], free: int) -> int:
    """Sum of ``diag_element(p, x)`` over all settings of the ``free`` qubits.

    ``fixed`` maps qubit -> bit; ``free`` is a qubit mask. Together they must
    partition the register.
    """
    fixed_mask = 0
    xfixed = 0
    for q, b in fixed.items():
        if not 0 <= q < p.n:
            raise IndexError(f"qubit {q} out of range")
        fixed_mask |= 1 << q
        if b:
            xfixed |= 1 << q
    if fixed_mask & free:
        raise ValueError("fixed and free qubit sets overlap")
    if (fixed_mask | free) != (1 << p.n) - 1:
        raise ValueError("fixed and free must cover every qubit")
    if p.x or (p.z & free):
        return 0
    s = p.sign * (-1 if popcount(p.z & xfixed) & 1 else 1)
    return s << popcount(free)
