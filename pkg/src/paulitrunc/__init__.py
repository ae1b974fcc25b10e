"""Truncated Pauli-path simulation of noisy parametrized and random circuits."""

from .pauli import PauliString
from .circuit import CircuitIR, ParamPoint, parse, serialize

__all__ = ["PauliString", "CircuitIR", "ParamPoint", "parse", "serialize"]
__version__ = "0.1.0"
