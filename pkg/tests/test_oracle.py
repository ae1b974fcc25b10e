import numpy as np
import pytest

from paulitrunc.circuit import CircuitIR, NoiseLayer, NoisePolicy, ParamPoint, gen_brickwork, gen_random, parse, random_params
from paulitrunc.expectation import Observable
from paulitrunc.noise import make_depolarizing
from paulitrunc.oracle import (
    OracleCapError,
    exact_distribution,
    exact_expectation,
    final_density,
    final_state,
)


def obs(label):
    return Observable.parse(label)


def test_empty_circuit():
    c = CircuitIR(1, ())
    assert exact_expectation(c, obs("Z"), ParamPoint()) == 1.0
    assert np.array_equal(exact_distribution(CircuitIR(2, ()), ParamPoint()), [1, 0, 0, 0])


def test_rotation_convention():
    c = parse("qubits 1\nh 0\nrp Z t0")
    assert exact_expectation(c, obs("X"), ParamPoint([np.pi / 8])) == pytest.approx(0.7071068, abs=1e-7)
    # exp(i t Z) X exp(-i t Z) = cos 2t X - sin 2t Y
    assert exact_expectation(c, obs("Y"), ParamPoint([0.3])) == pytest.approx(-np.sin(0.6), abs=1e-12)


def test_hadamard_distribution():
    assert np.allclose(exact_distribution(parse("qubits 1\nh 0"), ParamPoint()), [0.5, 0.5])


def test_full_depolarizing():
    c = CircuitIR(2, (NoiseLayer((make_depolarizing(0b11, 1.0),)),))
    assert exact_expectation(c, obs("ZI"), ParamPoint()) == pytest.approx(0.0, abs=1e-15)


def test_bit_order():
    c = parse("qubits 3\nx 0")
    p = exact_distribution(c, ParamPoint())
    assert p[0b100] == pytest.approx(1.0)


def test_haar_block_order():
    # the first listed qubit is the high tensor factor of the 4x4 block
    c = parse("qubits 2\nhaar 1 0 g0")
    g = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))  # X on the high factor = qubit 1
    p = exact_distribution(c, ParamPoint([], [g]))
    assert p[0b01] == pytest.approx(1.0)


def test_noiseless_density_matches_statevector():
    rng = np.random.default_rng(0)
    for seed in range(4):
        c = gen_random(4, 6, 8, seed)
        p = random_params(c, rng)
        psi = final_state(c, p).reshape(-1)
        rho = final_density(c, p, noisy=False).reshape(16, 16)
        assert np.abs(rho - np.outer(psi, psi.conj())).max() <= 1e-12


def test_noisy_state_is_a_state():
    c = gen_brickwork(4, 3, "haar", 1, NoisePolicy("depol2", 0.2))
    rho = final_density(c, random_params(c, np.random.default_rng(1))).reshape(16, 16)
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.abs(rho - rho.conj().T).max() <= 1e-12
    assert np.linalg.eigvalsh(rho).min() >= -1e-10
    assert exact_distribution(c, random_params(c, np.random.default_rng(1))).sum() == pytest.approx(1, abs=1e-12)


def test_haar_distribution_deterministic():
    c = gen_brickwork(2, 1)
    a = exact_distribution(c, random_params(c, np.random.default_rng(11)))
    b = exact_distribution(c, random_params(c, np.random.default_rng(11)))
    assert np.array_equal(a, b)


def test_caps():
    with pytest.raises(OracleCapError):
        exact_distribution(CircuitIR(13, ()), ParamPoint())
    with pytest.raises(OracleCapError):
        final_density(CircuitIR(8, ()), ParamPoint())
