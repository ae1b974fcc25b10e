import json
import warnings

import numpy as np
import pytest

from paulitrunc.noise import (
    GaplessNoiseWarning,
    dephase_diagonal,
    eigenvalue,
    local_patterns,
    make_depolarizing,
    make_table,
    satisfies_gap_condition,
    spectral_gap,
    table_from_json,
    table_to_json,
    warn_if_gapless,
)
from paulitrunc.oracle import apply_channel, pauli_transfer_matrix
from paulitrunc.pauli import PauliString

P = PauliString.from_label


def channel_ptm(ch, k):
    """Transfer matrix of ``ch`` (support = all ``k`` qubits) via the oracle's channel."""

    def fn(m):
        t = m.reshape((2,) * (2 * k))
        return apply_channel(t, ch, k).reshape(2**k, 2**k)

    return pauli_transfer_matrix(fn, k)


class TestDepolarizing:
    def test_zero_is_identity(self):
        ch = make_depolarizing(0b1, 0.0)
        assert all(e == 1.0 for e in ch.local_eigenvalues().values())

    def test_single_qubit_eigenvalues(self):
        ch = make_depolarizing(0b1, 0.3)
        assert eigenvalue(ch, P("X")) == pytest.approx(0.7)
        assert eigenvalue(ch, P("I")) == 1.0
        r = channel_ptm(ch, 1)
        assert np.allclose(r, np.diag([1, 0.7, 0.7, 0.7]), atol=1e-12)

    def test_two_qubit_eigenvalues(self):
        ch = make_depolarizing(0b11, 0.15)
        assert eigenvalue(ch, P("XZ")) == pytest.approx(0.85)
        r = channel_ptm(ch, 2)
        want = [ch.local_eigenvalues()[p] for p in local_patterns(2)]
        assert np.abs(r - np.diag(want)).max() <= 1e-12

    def test_eigenvalue_on_register(self):
        ch = make_depolarizing(0b01, 0.1)
        assert eigenvalue(ch, P("ZI")) == pytest.approx(0.9)
        assert eigenvalue(ch, P("IZ")) == 1.0
        assert eigenvalue(ch, P("II")) == 1.0

    def test_out_of_range_p(self):
        with pytest.raises(ValueError):
            make_depolarizing(1, 1.5)

    def test_gap(self):
        assert spectral_gap(make_depolarizing(1, 0.25)) == pytest.approx(0.25)
        assert spectral_gap(make_depolarizing(1, 0.0)) == 1.0

    def test_multiplicative_on_disjoint_supports(self):
        a, b = make_depolarizing(0b01, 0.2), make_depolarizing(0b10, 0.3)
        p = P("XY")
        rho = np.random.default_rng(0).standard_normal((4, 4))
        rho = (rho + rho.T).astype(complex).reshape(2, 2, 2, 2)
        out = apply_channel(apply_channel(rho, a, 2), b, 2).reshape(4, 4)
        m = p.to_matrix()
        assert np.trace(m @ out).real == pytest.approx(
            eigenvalue(a, p) * eigenvalue(b, p) * np.trace(m @ rho.reshape(4, 4)).real)


class TestTable:
    def test_gap_example(self):
        table = {p: 0.9 for p in local_patterns(2)[1:]}
        table["XX"] = 0.8
        ch = make_table(0b11, table)
        assert spectral_gap(ch) == pytest.approx(0.1)
        assert satisfies_gap_condition(ch)

    def test_missing_pattern(self):
        ch = make_table(0b1, {"X": 0.5})
        with pytest.raises(KeyError):
            eigenvalue(ch, P("Z"))

    def test_identity_must_be_one(self):
        with pytest.raises(ValueError):
            make_table(0b1, {"I": 0.9, "X": 0.5, "Y": 0.5, "Z": 0.5})

    def test_oracle_agrees(self):
        ch = make_table(0b11, {p: 0.5 + 0.02 * i for i, p in enumerate(local_patterns(2)[1:])})
        r = channel_ptm(ch, 2)
        want = [ch.local_eigenvalues()[p] for p in local_patterns(2)]
        assert np.abs(r - np.diag(want)).max() <= 1e-12

    def test_json_round_trip(self):
        ch = make_table(0b1, {"X": 0.5, "Y": 0.25, "Z": -0.5})
        text = table_to_json(ch)
        assert json.loads(text)["Z"] == -0.5
        assert table_from_json(text, 0b1) == ch

    def test_equality_sees_table(self):
        a = make_table(0b1, {"X": 0.5, "Y": 0.5, "Z": 0.5})
        b = make_table(0b1, {"X": 0.5, "Y": 0.5, "Z": 0.4})
        assert a != b and len({a, b}) == 2


class TestGapCondition:
    def test_gapless_channel_warns(self):
        ch = make_table(0b1, {"X": 1.0, "Y": 0.5, "Z": 0.5})
        assert not satisfies_gap_condition(ch)
        with pytest.warns(GaplessNoiseWarning):
            warn_if_gapless([ch])

    def test_depolarizing_passes(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            warn_if_gapless([make_depolarizing(0b11, 0.1)])


class TestDephase:
    def test_diagonal_input(self):
        r = np.diag([1.0, 0.5, 0.4, 0.3])
        ch, res = dephase_diagonal(r, 0b1)
        assert res == 0.0
        assert ch.local_eigenvalues() == {"I": 1.0, "X": 0.5, "Y": 0.4, "Z": 0.3}

    def test_amplitude_damping(self):
        rate = 0.2
        k0 = np.array([[1, 0], [0, np.sqrt(1 - rate)]])
        k1 = np.array([[0, np.sqrt(rate)], [0, 0]])
        ch, res = dephase_diagonal(pauli_transfer_matrix([k0, k1], 1), 0b1)
        e = ch.local_eigenvalues()
        assert e["X"] == pytest.approx(np.sqrt(1 - rate), abs=1e-12)
        assert e["Y"] == pytest.approx(np.sqrt(1 - rate), abs=1e-12)
        assert e["Z"] == pytest.approx(1 - rate, abs=1e-12)
        assert res == pytest.approx(rate, abs=1e-12)

    def test_depolarizing_is_fixed_point(self):
        ch = make_depolarizing(0b11, 0.15)
        out, res = dephase_diagonal(channel_ptm(ch, 2), 0b11)
        assert res <= 1e-12
        for p, e in out.local_eigenvalues().items():
            assert e == pytest.approx(eigenvalue(ch, PauliString.from_label(p)), abs=1e-12)

    def test_not_trace_preserving(self):
        r = np.diag([0.9, 0.5, 0.5, 0.5])
        with pytest.raises(ValueError):
            dephase_diagonal(r, 0b1)
