import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paulitrunc.circuit import (
    CircuitIR,
    CircuitParseError,
    CliffordLayer,
    HaarLayer,
    NoiseLayer,
    NoisePolicy,
    ParamPoint,
    RotationLayer,
    gen_2d_lattice,
    gen_brickwork,
    gen_random,
    lattice_sublayers,
    parse,
    random_params,
    serialize,
    validate,
)
from paulitrunc.pauli import PauliString


class TestParse:
    def test_clifford_block(self):
        c = parse("qubits 2\nh 0\ncx 0 1")
        assert c.n == 2 and len(c.layers) == 1
        assert isinstance(c.layers[0], CliffordLayer)
        assert c.layers[0].gates == (("h", 0), ("cx", 0, 1))

    def test_rotation(self):
        c = parse("qubits 1\nrp Z t0")
        assert c.layers == (RotationLayer(PauliString.from_label("Z"), 0),)

    def test_haar_and_policy(self):
        c = parse("qubits 2\nhaar 0 1 g0\nnoise-policy depol2 0.1")
        assert c.layers == (HaarLayer((0, 1), 0),)
        assert c.noise_policy == NoisePolicy("depol2", 0.1)

    def test_comments_and_case(self):
        c = parse("# header\nQUBITS 2  # two\n\nH 1 # gate\nRp XY T0\n")
        assert c.n == 2 and c.n_theta == 1

    def test_explicit_noise(self):
        c = parse("qubits 3\nnoise depol1 0.05 0 2\nnoise depol2 0.1 1 2")
        assert [len(l.channels) for l in c.layers] == [2, 1]

    @pytest.mark.parametrize("text, line", [
        ("qubits 2\nfoo 0", 2),
        ("qubits 2\nh 5", 2),
        ("qubits 2\nqubits 3", 2),
        ("h 0", 1),
        ("qubits 2\nrp ZZZ t0", 2),
        ("qubits 2\nrp ZZ q0", 2),
        ("qubits 2\ncx 0 0", 2),
        ("qubits 2\nnoise depol1 1.5 0", 2),
        ("qubits 2\nnoise depol2 0.1 0", 2),
        ("qubits 2\n\nh 0\nhaar 0 1", 4),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(CircuitParseError) as info:
            parse(text)
        assert info.value.line == line

    def test_missing_header(self):
        with pytest.raises(CircuitParseError):
            parse("")


class TestValidate:
    def test_clean(self):
        assert validate(parse("qubits 2\nh 0\nrp ZX t0\nhaar 0 1 g0")) == []

    def test_identity_axis(self):
        c = CircuitIR(2, (RotationLayer(PauliString.identity(2), 0),))
        assert [d.code for d in validate(c)] == ["InvalidAxis"]

    def test_duplicate_qubit(self):
        c = CircuitIR(4, (HaarLayer((3, 3), 0),))
        assert [d.code for d in validate(c)] == ["DuplicateQubit"]

    def test_shared_and_gapped_params(self):
        z = PauliString.from_label("Z")
        shared = CircuitIR(1, (RotationLayer(z, 0), RotationLayer(z, 0)))
        assert "SharedParam" in {d.code for d in validate(shared)}
        gap = CircuitIR(1, (RotationLayer(z, 1),))
        assert [d.code for d in validate(gap)] == ["ParamGap"]

    def test_size_mismatch(self):
        c = CircuitIR(2, (RotationLayer(PauliString.from_label("Z"), 0),))
        assert [d.code for d in validate(c)] == ["SizeMismatch"]


class TestParamPoint:
    def test_count_mismatch(self):
        c = parse("qubits 1\nrp Z t0")
        with pytest.raises(ValueError):
            ParamPoint([0.1, 0.2]).check(c)

    def test_non_unitary(self):
        with pytest.raises(ValueError):
            ParamPoint([], [np.eye(4) * 1.01])

    def test_random_params_shape(self):
        c = parse("qubits 2\nrp ZI t0\nhaar 0 1 g0\nrp XX t1")
        p = random_params(c, np.random.default_rng(0))
        assert p.thetas.shape == (2,) and p.su4s.shape == (1, 4, 4)
        p.check(c)


class TestNoise:
    def test_policy_resolution(self):
        c = parse("qubits 3\nrp ZIX t0\nhaar 1 2 g0\nnoise-policy depol1 0.1")
        res = c.resolved_layers()
        assert [type(l).__name__ for l in res] == ["RotationLayer", "NoiseLayer", "HaarLayer", "NoiseLayer"]
        assert [ch.qubits for ch in res[1].channels] == [(0,), (2,)]
        c2 = c.with_policy(NoisePolicy("depol2", 0.1))
        assert [ch.qubits for ch in c2.resolved_layers()[3].channels] == [(1, 2)]

    def test_without_noise(self):
        c = parse("qubits 1\nrp Z t0\nnoise depol1 0.1 0")
        assert not c.without_noise().is_noisy and c.is_noisy


class TestGenerators:
    def test_brickwork_haar_small(self):
        assert gen_brickwork(2, 1).layers == (HaarLayer((0, 1), 0),)
        c = gen_brickwork(4, 2)
        assert [l.qubits for l in c.layers] == [(0, 1), (2, 3), (1, 2)]

    def test_brickwork_rotation_count(self):
        # three blocks, two angles each
        c = gen_brickwork(4, 2, "rotation", seed=0)
        assert c.n_theta == 6

    def test_brickwork_needs_two_qubits(self):
        with pytest.raises(ValueError):
            gen_brickwork(1, 1)

    def test_lattice_structure(self):
        c = gen_2d_lattice(1, 1)
        assert c.n == 4 and c.n_haar == 4
        subs = lattice_sublayers(2)
        assert len(subs) == 4 and len(subs[0]) == 8
        for edges in subs:
            qs = [q for e in edges for q in e]
            assert len(qs) == len(set(qs))

    def test_lattice_deterministic(self):
        assert gen_2d_lattice(2, 1, seed=3) == gen_2d_lattice(2, 1, seed=3)

    def test_random_deterministic(self):
        assert gen_random(3, 5, 5, seed=1) == gen_random(3, 5, 5, seed=1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 8), st.integers(0, 8), st.integers(0, 10**6))
    def test_generated_round_trip(self, n, rot, cl, seed):
        c = gen_random(n, rot, cl, seed, policy=NoisePolicy("depol1", 0.1))
        assert validate(c) == []
        assert parse(serialize(c)) == c

    @pytest.mark.parametrize("c", [
        gen_brickwork(5, 3, "rotation", 2, NoisePolicy("depol2", 0.2)),
        gen_brickwork(4, 3, "haar", 2),
        gen_2d_lattice(1, 2, 4),
    ])
    def test_round_trip_and_valid(self, c):
        assert validate(c) == []
        assert parse(serialize(c)) == c
        assert c.fingerprint() == parse(serialize(c)).fingerprint()

    def test_explicit_table_noise_has_fingerprint(self):
        from paulitrunc.noise import make_table

        ch = make_table(0b1, {"X": 0.5, "Y": 0.5, "Z": 0.5})
        c = CircuitIR(1, (NoiseLayer((ch,)),))
        assert len(c.fingerprint()) == 16
