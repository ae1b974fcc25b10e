"""Pauli-diagonal noise channels and their spectral gap."""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .pauli import PauliString

__all__ = [
    "NoiseChannel",
    "GaplessNoiseWarning",
    "make_depolarizing",
    "make_table",
    "eigenvalue",
    "spectral_gap",
    "dephase_diagonal",
    "satisfies_gap_condition",
    "local_patterns",
    "table_to_json",
    "table_from_json",
]


class GaplessNoiseWarning(UserWarning):
    """A channel leaves a Pauli that is non-trivial on its support undamped."""


def _qubits(mask: int) -> tuple[int, ...]:
    return tuple(j for j in range(mask.bit_length()) if (mask >> j) & 1)


def local_patterns(k: int) -> list[str]:
    """All ``4**k`` letter patterns on ``k`` qubits, identity first."""
    return ["".join(t) for t in itertools.product("IXYZ", repeat=k)]


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    """A channel diagonal in the Pauli basis, acting on the qubits in ``support``.

    Exactly one of ``p`` (uniform depolarizing on the whole support) or
    ``table`` (pattern -> eigenvalue, patterns written over the support
    qubits in increasing order) is set.
    """

    support: int
    p: float | None = None
    table: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.support <= 0:
            raise ValueError("noise channel needs a non-empty support")
        if (self.p is None) == (self.table is None):
            raise ValueError("give exactly one of p or table")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability {self.p} outside [0, 1]")
        if self.table is not None:
            k = len(self.qubits)
            for pat, e in self.table.items():
                if len(pat) != k or any(c not in "IXYZ" for c in pat):
                    raise ValueError(f"bad pattern {pat!r} for a {k}-qubit support")
                if abs(e) > 1 + 1e-12:
                    raise ValueError(f"eigenvalue {e} outside the unit disk")
            if abs(self.table.get("I" * k, 1.0) - 1.0) > 0:
                raise ValueError("identity eigenvalue must be exactly 1")

    @property
    def qubits(self) -> tuple[int, ...]:
        return _qubits(self.support)

    @property
    def kind(self) -> str:
        return "depolarizing" if self.p is not None else "table"

    def pattern_of(self, pauli: PauliString) -> str:
        return "".join(pauli.letter(q) for q in self.qubits)

    def local_eigenvalues(self) -> dict[str, float]:
        """Every local pattern with its eigenvalue (raises on an incomplete table)."""
        return {pat: _pattern_eigenvalue(self, pat) for pat in local_patterns(len(self.qubits))}

    def __eq__(self, other):
        if not isinstance(other, NoiseChannel):
            return NotImplemented
        return self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def fingerprint(self) -> tuple:
        if self.p is not None:
            return ("dep", self.support, self.p)
        return ("tab", self.support, tuple(sorted(self.table.items())))


def make_depolarizing(support: int, p: float) -> NoiseChannel:
    """``rho -> (1-p) rho + p * tr_S(rho) (x) I_S / 2**k`` on the support ``S``."""
    return NoiseChannel(support=support, p=float(p))


def make_table(support: int, table: Mapping[str, float]) -> NoiseChannel:
    k = len(_qubits(support))
    full = dict(table)
    full.setdefault("I" * k, 1.0)
    return NoiseChannel(support=support, table=full)


def _pattern_eigenvalue(ch: NoiseChannel, pat: str) -> float:
    if set(pat) <= {"I"}:
        return 1.0
    if ch.p is not None:
        return 1.0 - ch.p
    try:
        return float(ch.table[pat])
    except KeyError:
        raise KeyError(f"pattern {pat!r} missing from explicit noise table") from None


def eigenvalue(ch: NoiseChannel, pauli: PauliString) -> float:
    """Transfer eigenvalue of ``pauli`` under ``ch`` (1 when trivial on the support)."""
    if ch.support >> pauli.n:
        raise ValueError("channel support exceeds the Pauli's register")
    if not (pauli.support & ch.support):
        return 1.0
    return _pattern_eigenvalue(ch, ch.pattern_of(pauli))


def spectral_gap(ch: NoiseChannel) -> float:
    """``1 - max |e|`` over eigenvalues with ``|e| != 1``; 1 if there are none."""
    mags = [abs(e) for e in ch.local_eigenvalues().values()]
    sub = [m for m in mags if abs(m - 1.0) > 1e-15]
    return 1.0 - max(sub) if sub else 1.0


def satisfies_gap_condition(ch: NoiseChannel) -> bool:
    """True iff every non-identity local pattern is strictly damped."""
    gamma = spectral_gap(ch)
    if gamma <= 0:
        return False
    for pat, e in ch.local_eigenvalues().items():
        if set(pat) <= {"I"}:
            continue
        if abs(e) > 1 - gamma + 1e-15:
            return False
    return True


def warn_if_gapless(channels) -> None:
    for ch in channels:
        if not satisfies_gap_condition(ch):
            warnings.warn(
                f"noise channel on qubits {ch.qubits} leaves a non-trivial Pauli undamped",
                GaplessNoiseWarning,
                stacklevel=3,
            )


def dephase_diagonal(transfer: np.ndarray, support: int,
                     basis: list[str] | None = None) -> tuple[NoiseChannel, float]:
    """Keep the diagonal of a Pauli transfer matrix; report the largest dropped entry.

    ``transfer[i, j] = tr(P_i N(P_j)) / 2**k`` in the ``basis`` order
    (default: :func:`local_patterns`, identity first).
    """
    k = len(_qubits(support))
    basis = basis or local_patterns(k)
    r = np.asarray(transfer, dtype=float)
    if r.shape != (len(basis), len(basis)):
        raise ValueError("transfer matrix does not match the basis size")
    ident = basis.index("I" * k)
    row = r[ident]
    expected = np.zeros(len(basis))
    expected[ident] = 1.0
    if np.max(np.abs(row - expected)) > 1e-9:
        raise ValueError("identity row not preserved: channel is not trace preserving")
    table = {pat: float(r[i, i]) for i, pat in enumerate(basis)}
    table["I" * k] = 1.0
    off = r - np.diag(np.diag(r))
    residual = float(np.max(np.abs(off))) if off.size else 0.0
    return NoiseChannel(support=support, table=table), residual


def table_to_json(ch: NoiseChannel) -> str:
    return json.dumps(ch.local_eigenvalues(), sort_keys=True)


def table_from_json(text: str, support: int) -> NoiseChannel:
    return make_table(support, {k: float(v) for k, v in json.loads(text).items()})
