"""Brute-force ground truth: dense statevector and density-matrix simulation.

Qubit ``j`` is tensor axis ``j``; flattened vectors put qubit 0 in the most
significant position, matching ``kron`` order and the Pauli literal order.
"""

from __future__ import annotations

import numpy as np

from .circuit import CircuitIR, CliffordLayer, HaarLayer, NoiseLayer, ParamPoint, RotationLayer
from .noise import NoiseChannel, local_patterns
from .pauli import PauliString

__all__ = [
    "OracleCapError",
    "MAX_STATEVECTOR_QUBITS",
    "MAX_DENSITY_QUBITS",
    "exact_expectation",
    "exact_distribution",
    "final_state",
    "final_density",
    "apply_channel",
    "pauli_transfer_matrix",
]

MAX_STATEVECTOR_QUBITS = 12
MAX_DENSITY_QUBITS = 7


class OracleCapError(ValueError):
    pass


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0 + 0j, -1.0])
_LETTER = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}
_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1.0, 1j]),
    "x": _X,
    "y": _Y,
    "z": _Z,
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _apply(t: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Contract a ``2**k x 2**k`` matrix into the listed tensor axes."""
    k = len(axes)
    u = u.reshape((2,) * (2 * k))
    out = np.tensordot(u, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_pauli(t: np.ndarray, p: PauliString, offset: int = 0, conj: bool = False) -> np.ndarray:
    """Left-multiply by ``p`` (or by ``conj(p)``, which right-multiplies column axes by ``p``)."""
    for j in range(p.n):
        letter = p.letter(j)
        if letter != "I":
            m = _LETTER[letter]
            t = _apply(t, m.conj() if conj else m, (offset + j,))
    ph = 1j ** p.phase
    return (np.conj(ph) if conj else ph) * t


class _Sim:
    """Shared layer walker; subclasses decide what a unitary does."""

    def __init__(self, n: int):
        self.n = n

    def unitary(self, u, qubits):  # pragma: no cover - abstract
        raise NotImplementedError

    def rotation(self, axis: PauliString, theta: float):  # pragma: no cover - abstract
        raise NotImplementedError

    def run(self, c: CircuitIR, params: ParamPoint, noisy: bool):
        params.check(c)
        layers = c.resolved_layers() if noisy else c.layers
        for layer in layers:
            if isinstance(layer, CliffordLayer):
                for name, *qs in layer.gates:
                    self.unitary(_GATES[name], tuple(qs))
            elif isinstance(layer, RotationLayer):
                self.rotation(layer.axis, params.thetas[layer.param])
            elif isinstance(layer, HaarLayer):
                self.unitary(params.su4s[layer.param], layer.qubits)
            elif isinstance(layer, NoiseLayer):
                if noisy:
                    for ch in layer.channels:
                        self.channel(ch)
            else:
                raise TypeError(type(layer))


class _StateSim(_Sim):
    def __init__(self, n: int):
        super().__init__(n)
        self.psi = np.zeros((2,) * n, dtype=complex)
        self.psi[(0,) * n] = 1.0

    def unitary(self, u, qubits):
        self.psi = _apply(self.psi, np.asarray(u), qubits)

    def rotation(self, axis, theta):
        self.psi = np.cos(theta) * self.psi + 1j * np.sin(theta) * _apply_pauli(self.psi, axis)

    def channel(self, ch):  # pragma: no cover - guarded by run()
        raise RuntimeError("statevector simulation cannot apply noise")


class _DensitySim(_Sim):
    def __init__(self, n: int):
        super().__init__(n)
        self.rho = np.zeros((2,) * (2 * n), dtype=complex)
        self.rho[(0,) * (2 * n)] = 1.0

    def unitary(self, u, qubits):
        u = np.asarray(u)
        self.rho = _apply(self.rho, u, qubits)
        self.rho = _apply(self.rho, u.conj(), tuple(self.n + q for q in qubits))

    def rotation(self, axis, theta):
        c, s = np.cos(theta), np.sin(theta)
        a_rho = _apply_pauli(self.rho, axis)
        rho_a = _apply_pauli(self.rho, axis, offset=self.n, conj=True)
        a_rho_a = _apply_pauli(a_rho, axis, offset=self.n, conj=True)
        self.rho = c * c * self.rho + 1j * c * s * (a_rho - rho_a) + s * s * a_rho_a

    def channel(self, ch: NoiseChannel):
        self.rho = apply_channel(self.rho, ch, self.n)


def apply_channel(rho: np.ndarray, ch: NoiseChannel, n: int) -> np.ndarray:
    """Apply a Pauli-diagonal channel to a ``(2,)*2n`` density tensor."""
    qs = ch.qubits
    k = len(qs)
    if ch.p is not None:
        # (1-p) rho + p * tr_S(rho) (x) I_S / 2^k
        rows = list(qs)
        cols = [n + q for q in qs]
        moved = np.moveaxis(rho, rows + cols, list(range(2 * k)))
        sh = moved.shape
        m = moved.reshape(2 ** k, 2 ** k, *sh[2 * k:])
        reduced = np.trace(m, axis1=0, axis2=1)
        mixed = np.einsum("ij,...->ij...", np.eye(2 ** k), reduced) / 2 ** k
        mixed = np.moveaxis(mixed.reshape(sh), list(range(2 * k)), rows + cols)
        return (1 - ch.p) * rho + ch.p * mixed
    # Pauli mixture q_Q = 4^-k sum_P e_P (-1)^{<P,Q>}, then rho -> sum_Q q_Q Q rho Q.
    eig = ch.local_eigenvalues()
    pats = local_patterns(k)
    out = np.zeros_like(rho)
    for qpat in pats:
        qlocal = PauliString.from_label(qpat)
        weight = 0.0
        for ppat in pats:
            sgn = -1 if _anticommute_local(ppat, qpat) else 1
            weight += eig[ppat] * sgn
        weight /= 4 ** k
        if abs(weight) < 1e-300:
            continue
        term = rho
        for slot, q in enumerate(qs):
            letter = qlocal.letter(slot)
            if letter != "I":
                term = _apply(term, _LETTER[letter], (q,))
                term = _apply(term, _LETTER[letter].conj(), (n + q,))
        out = out + weight * term
    return out


def _anticommute_local(a: str, b: str) -> bool:
    cnt = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return cnt % 2 == 1


def final_state(c: CircuitIR, params: ParamPoint) -> np.ndarray:
    if c.n > MAX_STATEVECTOR_QUBITS:
        raise OracleCapError(f"statevector oracle capped at {MAX_STATEVECTOR_QUBITS} qubits")
    sim = _StateSim(c.n)
    sim.run(c, params, noisy=False)
    return sim.psi


def final_density(c: CircuitIR, params: ParamPoint, noisy: bool = True) -> np.ndarray:
    if c.n > MAX_DENSITY_QUBITS:
        raise OracleCapError(f"density-matrix oracle capped at {MAX_DENSITY_QUBITS} qubits")
    sim = _DensitySim(c.n)
    sim.run(c, params, noisy=noisy)
    return sim.rho


def _use_density(c: CircuitIR, noisy: bool | None) -> bool:
    return c.is_noisy if noisy is None else bool(noisy)


def exact_expectation(c: CircuitIR, obs, params: ParamPoint, noisy: bool | None = None) -> float:
    """``tr(O rho_final)``; ``noisy=None`` means "noisy iff the circuit carries noise"."""
    total = 0.0
    if _use_density(c, noisy):
        rho = final_density(c, params, noisy=True)
        d = 2 ** c.n
        for coeff, p in obs.terms:
            total += coeff * np.trace(_apply_pauli(rho, p).reshape(d, d)).real
    else:
        psi = final_state(c, params)
        for coeff, p in obs.terms:
            total += coeff * np.vdot(psi, _apply_pauli(psi, p)).real
    return float(total)


def exact_distribution(c: CircuitIR, params: ParamPoint, noisy: bool | None = None) -> np.ndarray:
    if _use_density(c, noisy):
        rho = final_density(c, params, noisy=True)
        d = 2 ** c.n
        probs = np.diagonal(rho.reshape(d, d)).real.copy()
    else:
        probs = np.abs(final_state(c, params).reshape(-1)) ** 2
    return probs


def pauli_transfer_matrix(kraus_or_fn, k: int) -> np.ndarray:
    """``R[i, j] = tr(P_i N(P_j)) / 2**k`` over :func:`local_patterns` order.

    ``kraus_or_fn`` is a list of Kraus matrices or a callable on ``2**k`` matrices.
    """
    if callable(kraus_or_fn):
        fn = kraus_or_fn
    else:
        ks = [np.asarray(m) for m in kraus_or_fn]
        fn = lambda m: sum(a @ m @ a.conj().T for a in ks)  # noqa: E731
    mats = [PauliString.from_label(p).to_matrix() for p in local_patterns(k)]
    r = np.empty((len(mats), len(mats)))
    for j, pj in enumerate(mats):
        out = fn(pj)
        for i, pi in enumerate(mats):
            r[i, j] = np.trace(pi @ out).real / 2 ** k
    return r
