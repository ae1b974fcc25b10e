"""Clifford tableaus acting on Pauli strings by conjugation."""

from __future__ import annotations

from typing import Iterable, Sequence

from .pauli import PauliString, commutes, mul

__all__ = ["CliffordTableau", "tableau_from_gates", "conjugate", "compose", "GATE_ARITY"]

GATE_ARITY = {"h": 1, "s": 1, "x": 1, "y": 1, "z": 1, "cx": 2, "cz": 2, "swap": 2}


class CliffordTableau:
    """Images of ``X_j`` and ``Z_j`` under ``P -> W P W^dag``.

    The inverse tableau is built eagerly so that adjoint conjugation costs the
    same as forward conjugation.
    """

    __slots__ = ("n", "x_images", "z_images", "_inv_x", "_inv_z")

    def __init__(self, n: int, x_images: Sequence[PauliString], z_images: Sequence[PauliString],
                 _inverse: tuple | None = None):
        if len(x_images) != n or len(z_images) != n:
            raise ValueError("need one X image and one Z image per qubit")
        for im in (*x_images, *z_images):
            if im.n != n or not im.is_hermitian:
                raise ValueError(f"bad generator image {im}")
        self.n = n
        self.x_images = tuple(x_images)
        self.z_images = tuple(z_images)
        if _inverse is None:
            _inverse = _invert(self)
        self._inv_x, self._inv_z = _inverse

    @classmethod
    def identity(cls, n: int) -> CliffordTableau:
        xs = [PauliString.single(n, j, "X") for j in range(n)]
        zs = [PauliString.single(n, j, "Z") for j in range(n)]
        return cls(n, xs, zs, _inverse=(tuple(xs), tuple(zs)))

    def inverse(self) -> CliffordTableau:
        return CliffordTableau(self.n, self._inv_x, self._inv_z,
                               _inverse=(self.x_images, self.z_images))

    @property
    def is_identity(self) -> bool:
        return self == CliffordTableau.identity(self.n)

    def is_symplectic(self) -> bool:
        gens = [PauliString.single(self.n, j, c) for c in "XZ" for j in range(self.n)]
        ims = [*self.x_images, *self.z_images]
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                if commutes(gens[a], gens[b]) != commutes(ims[a], ims[b]):
                    return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return self.n == other.n and self.x_images == other.x_images and self.z_images == other.z_images

    def __hash__(self) -> int:
        return hash((self.n, self.x_images, self.z_images))

    def __repr__(self) -> str:
        xs = ",".join(str(p) for p in self.x_images)
        zs = ",".join(str(p) for p in self.z_images)
        return f"CliffordTableau(n={self.n}, X->[{xs}], Z->[{zs}])"


def _apply_images(n: int, x_images, z_images, p: PauliString) -> PauliString:
    # p = i^phase * prod_j (i^{x_j z_j} X_j^{x_j} Z_j^{z_j}); map each factor.
    out = PauliString(n, 0, 0, p.phase)
    bits = p.x | p.z
    while bits:
        low = bits & -bits
        j = low.bit_length() - 1
        bits ^= low
        xb = p.x & low
        zb = p.z & low
        if xb and zb:
            out = mul(mul(out, x_images[j]), z_images[j])
            out = out.with_phase(out.phase + 1)
        elif xb:
            out = mul(out, x_images[j])
        else:
            out = mul(out, z_images[j])
    return out


def _invert(t: CliffordTableau):
    """Inverse images from the symplectic inverse, signs fixed by round trip."""
    n = t.n
    # Columns of the 2n x 2n binary matrix M are the images of X_0.., Z_0..
    ims = [*t.x_images, *t.z_images]
    inv_x, inv_z = [], []
    for target in range(2 * n):
        # Solve M v = e_target: omega(e_target, image_d) = 1 iff the symplectic
        # partner of generator d appears in v.
        e_t = PauliString.single(n, target % n, "X" if target < n else "Z")
        x = z = 0
        for d, im in enumerate(ims):
            if not commutes(im, e_t):
                if d < n:
                    z |= 1 << d  # partner of X_d is Z_d
                else:
                    x |= 1 << (d - n)
        cand = PauliString(n, x, z, 0)
        back = _apply_images(n, t.x_images, t.z_images, cand)
        want = PauliString.single(n, target % n, "X" if target < n else "Z")
        if back.unsigned() != want or not back.is_hermitian:
            raise ValueError("tableau is not a valid Clifford")
        if back.phase == 2:
            cand = cand.negate()
        (inv_x if target < n else inv_z).append(cand)
    return tuple(inv_x), tuple(inv_z)


def conjugate(t: CliffordTableau, p: PauliString, direction: str = "forward") -> PauliString:
    """``W p W^dag`` (``forward``) or ``W^dag p W`` (``adjoint``)."""
    if p.n != t.n:
        raise ValueError(f"size mismatch: tableau on {t.n}, Pauli on {p.n}")
    if direction == "forward":
        return _apply_images(t.n, t.x_images, t.z_images, p)
    if direction == "adjoint":
        return _apply_images(t.n, t._inv_x, t._inv_z, p)
    raise ValueError(f"unknown direction {direction!r}")


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau of applying ``a`` first, then ``b``."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    xs = [conjugate(b, im) for im in a.x_images]
    zs = [conjugate(b, im) for im in a.z_images]
    inv_x = [conjugate(a, im, "adjoint") for im in b._inv_x]
    inv_z = [conjugate(a, im, "adjoint") for im in b._inv_z]
    return CliffordTableau(a.n, xs, zs, _inverse=(tuple(inv_x), tuple(inv_z)))


def _gate_tableau(n: int, name: str, qubits: Sequence[int]) -> CliffordTableau:
    P = lambda label: PauliString.from_label(label)  # noqa: E731

    def local(labels_x, labels_z):
        # labels are written over the gate qubits only; embed into n qubits.
        xs = [PauliString.single(n, j, "X") for j in range(n)]
        zs = [PauliString.single(n, j, "Z") for j in range(n)]
        for slot, q in enumerate(qubits):
            xs[q] = _embed(n, qubits, P(labels_x[slot]))
            zs[q] = _embed(n, qubits, P(labels_z[slot]))
        return CliffordTableau(n, xs, zs)

    if name == "h":
        return local(["Z"], ["X"])
    if name == "s":
        return local(["Y"], ["Z"])
    if name == "x":
        return local(["X"], ["-Z"])
    if name == "y":
        return local(["-X"], ["-Z"])
    if name == "z":
        return local(["-X"], ["Z"])
    if name == "cx":
        return local(["XX", "IX"], ["ZI", "ZZ"])
    if name == "cz":
        return local(["XZ", "ZX"], ["ZI", "IZ"])
    if name == "swap":
        return local(["IX", "XI"], ["IZ", "ZI"])
    raise ValueError(f"unknown Clifford gate {name!r}")


def _embed(n: int, qubits: Sequence[int], p: PauliString) -> PauliString:
    x = z = 0
    for slot, q in enumerate(qubits):
        if (p.x >> slot) & 1:
            x |= 1 << q
        if (p.z >> slot) & 1:
            z |= 1 << q
    return PauliString(n, x, z, p.phase)


def tableau_from_gates(n: int, gates: Iterable[tuple]) -> CliffordTableau:
    """Compose ``(name, *qubits)`` gates in application order."""
    t = CliffordTableau.identity(n)
    for gate in gates:
        name, *qubits = gate
        name = name.lower()
        if name not in GATE_ARITY:
            raise ValueError(f"unknown Clifford gate {name!r}")
        if len(qubits) != GATE_ARITY[name]:
            raise ValueError(f"{name} takes {GATE_ARITY[name]} qubit(s)")
        for q in qubits:
            if not 0 <= q < n:
                raise IndexError(f"qubit {q} out of range for n={n}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{name} needs distinct qubits")
        t = compose(t, _gate_tableau(n, name, qubits))
    return t
