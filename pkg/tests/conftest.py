"""Shared desk-scale circuit fixtures.

Everything here stays at n <= 2, depth <= 2 so any test can afford dense
linear algebra as its oracle.
"""

import numpy as np
import pytest

from clockless.circuit import layered


@pytest.fixture
def identity1():
    """One wire, one identity layer, the wire is an ancilla."""
    return layered(1, 1, [[("I", (0,))]])


@pytest.fixture
def hadamard1():
    return layered(1, 1, [[("H", (0,))]])


@pytest.fixture
def bell_circuit():
    """Two ancilla wires, H then CNOT: prepares a Bell pair from |00>."""
    return layered(2, 2, [[("H", (1,))], [("CNOT", (1, 0))]])


@pytest.fixture
def hcnot():
    """H then CNOT with one data wire; the clock-encoding fixture."""
    return layered(2, 1, [[("H", (0,))], [("CNOT", (0, 1))]])


@pytest.fixture
def rng():
    return np.random.default_rng(7)
