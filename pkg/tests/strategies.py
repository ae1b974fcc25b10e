"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from paulitrunc.pauli import PauliString


@st.composite
def paulis(draw, n=None, hermitian=True, max_n=4):
    n = draw(st.integers(1, max_n)) if n is None else n
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    phase = draw(st.sampled_from([0, 2] if hermitian else [0, 1, 2, 3]))
    return PauliString(n, x, z, phase)


@st.composite
def pauli_pairs(draw, max_n=4, hermitian=False):
    n = draw(st.integers(1, max_n))
    return draw(paulis(n, hermitian)), draw(paulis(n, hermitian))


@st.composite
def gate_lists(draw, n, max_len=20):
    out = []
    for _ in range(draw(st.integers(0, max_len))):
        if n > 1 and draw(st.booleans()):
            name = draw(st.sampled_from(["cx", "cz", "swap"]))
            a = draw(st.integers(0, n - 1))
            b = draw(st.integers(0, n - 2))
            b = b if b < a else b + 1
            out.append((name, a, b))
        else:
            out.append((draw(st.sampled_from(["h", "s", "x", "y", "z"])), draw(st.integers(0, n - 1))))
    return out
