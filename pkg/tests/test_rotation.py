"""Rotated-frame closed forms for the grid Hamiltonian terms."""

import numpy as np
import pytest

from clockless.circuit import gate, layered
from clockless.hamiltonian import input_term, parent_spec, propagation_term
from clockless.linalg import embed_operator
from clockless.pauli import phi0, q_matrix
from clockless.peps import GridLayout
from clockless.rotation import (
    clifford_form,
    clifford_partners,
    last_layer_form,
    locality_residual,
    project_qubits,
    projected_bulk_form,
    projected_gap_check,
    rotate_term,
    teleport_coefficient,
    teleported_input_term,
)


def bulk_fixture(name, wires):
    """Two-wire depth-2 grid hosting one gate in the bulk (layer 1)."""
    return layered(2, 2, [[(name, wires)], [("I", (0,)), ("I", (1,))]])


def test_last_layer_form_matches_rotation(identity1):
    for delta in (0.2, 0.5):
        spec = parent_spec(identity1, delta)
        term = spec.terms[1]
        rotated = rotate_term(term, identity1)
        # the rotation drops the output leg of a last-layer term
        assert rotated.support == term.support[:2]
        residual = np.linalg.norm(rotated.block - last_layer_form(1, delta), 2)
        assert residual < 1e-10


@pytest.mark.parametrize("delta", [0.2, 0.5])
def test_last_layer_form_spectrum(delta):
    mat = last_layer_form(1, delta)
    eigs = np.sort(np.linalg.eigvalsh(mat))
    # one zero mode, the middle level at (1+3 delta^2)/4, two at 1
    expected = [0.0, (1.0 + 3.0 * delta**2) / 4.0, 1.0, 1.0]
    assert np.allclose(eigs, expected, atol=1e-12)
    # ground state is phi0
    v = phi0(delta)
    assert np.linalg.norm(mat @ v) < 1e-12


@pytest.mark.parametrize("name,wires", [
    ("H", (0,)),
    ("CNOT", (0, 1)),
    ("CNOT", (1, 0)),
    ("CZ", (0, 1)),
])
def test_clifford_bulk_closed_form(name, wires):
    c = bulk_fixture(name, wires)
    layout = GridLayout(2, 2)
    g = gate(name, wires)
    for delta in (0.2, 0.5):
        term = propagation_term(g, 1, delta, layout)
        rotated = rotate_term(term, c)
        residual = np.linalg.norm(
            rotated.block - clifford_form(g, delta, delta), 2
        )
        assert residual < 1e-10


def test_clifford_form_unequal_deltas():
    c = bulk_fixture("CNOT", (1, 0))
    layout = GridLayout(2, 2)
    g = gate("CNOT", (1, 0))
    term = propagation_term(g, 1, (0.3, 0.7), layout)
    rotated = rotate_term(term, c)
    residual = np.linalg.norm(rotated.block - clifford_form(g, 0.3, 0.7), 2)
    assert residual < 1e-10


def test_clifford_partners_cover_normalizer():
    g = gate("CNOT", (1, 0))
    pairs = clifford_partners(g)
    # 4^k row labels on each of (left, right), 4^k partners per row label
    rows = {}
    for row, col, phase in pairs:
        rows.setdefault(row, set()).add(col)
        assert abs(abs(phase) - 1.0) < 1e-12
    assert len(rows) == 4**4
    assert all(len(v) == 4**2 for v in rows.values())
    h = gate("T", (0,))
    with pytest.raises(ValueError):
        clifford_partners(h)


def test_projected_bulk_form(identity1):
    c = bulk_fixture("CNOT", (0, 1))
    layout = GridLayout(2, 2)
    g = gate("CNOT", (0, 1))
    delta = 0.5
    term = propagation_term(g, 1, delta, layout)
    rotated = rotate_term(term, c)
    # project both right pairs onto their single-pair ground state
    right = layout.site_qubits(2, 0) + layout.site_qubits(2, 1)
    local = np.kron(phi0(delta), phi0(delta))
    reduced, rest = project_qubits(rotated.block, rotated.support, right, local)
    assert rest == layout.site_qubits(1, 0) + layout.site_qubits(1, 1)
    residual = np.linalg.norm(reduced - projected_bulk_form(2, delta, delta), 2)
    assert residual < 1e-10


@pytest.mark.parametrize("delta", [0.2, 0.3, 0.5, 0.7, 1.0])
def test_projected_gap_k1_exact(delta):
    gap, floor, holds = projected_gap_check(1, delta)
    assert np.isclose(gap, delta**2, atol=1e-12)
    assert np.isclose(floor, 15.0 * delta**8)
    assert holds == (delta**2 >= 15.0 * delta**8 - 1e-15)


def test_projected_gap_k2_flag():
    # the 15 delta^8 floor is a diagnostic: it holds at small delta and
    # fails by delta = 0.5
    _, _, holds_03 = projected_gap_check(2, 0.3)
    assert holds_03
    gap, floor, holds_05 = projected_gap_check(2, 0.5)
    assert not holds_05
    assert gap < floor


def test_teleport_coefficient_values():
    assert np.isclose(teleport_coefficient(0.5), 4.0 / 7.0)
    assert np.isclose(teleport_coefficient(1.0), 1.0)
    for delta in (0.2, 0.5):
        assert np.isclose(
            teleport_coefficient(delta),
            4.0 * delta**2 / (1.0 + 3.0 * delta**2),
        )


def test_teleported_input_term(identity1):
    layout = GridLayout(1, 1)
    for delta in (0.2, 0.5):
        term = input_term(0, delta, layout)
        funneled = teleported_input_term(term, delta)
        assert funneled.kind == "input"
        # coefficient sits in the block: top-left entry is
        # teleport_coefficient * <0| (1 - |0><0|) |0> = 0, and the |1><1|
        # weight is the coefficient itself
        assert np.isclose(
            funneled.block[1, 1].real, teleport_coefficient(delta), atol=1e-10
        )
    with pytest.raises(ValueError):
        teleported_input_term(term, 0.9)  # wrong delta must not verify


def test_t_gate_rotation_spreads():
    c = layered(2, 2, [[("T", (0,)), ("I", (1,))], [("CZ", (0, 1))]])
    layout = GridLayout(2, 2)
    t_term = propagation_term(gate("T", (0,)), 1, 0.5, layout)
    residual = locality_residual(t_term, c)
    assert residual > 1e-3
    # frozen for regression; value measured from the dense rotation
    assert np.isclose(residual, 0.24135225711125646, atol=1e-12)
    h_term = propagation_term(gate("H", (0,)), 1, 0.5, layout)
    c2 = bulk_fixture("H", (0,))
    assert locality_residual(h_term, c2) < 1e-12


def test_rotate_term_rejects_leaky_support():
    c = layered(2, 2, [[("T", (0,)), ("I", (1,))], [("CZ", (0, 1))]])
    layout = GridLayout(2, 2)
    t_term = propagation_term(gate("T", (0,)), 1, 0.5, layout)
    with pytest.raises(ValueError):
        rotate_term(t_term, c, extraction_support=t_term.support)


def test_project_qubits_shape_check():
    mat = np.eye(4)
    with pytest.raises(ValueError):
        project_qubits(mat, (0, 1), (1,), np.ones(4))


def test_input_term_undressing_identity():
    # q_matrix conjugation inside teleported_input_term must recover the
    # bare |1><1| check: verify through the public path with both deltas
    layout = GridLayout(1, 1)
    term = input_term(0, 0.4, layout)
    funneled = teleported_input_term(term, 0.4)
    bare = np.diag([0.0, 1.0])
    assert np.allclose(
        funneled.block, teleport_coefficient(0.4) * bare, atol=1e-10
    )
