"""Parent Hamiltonian terms: frustration, spectra, and assembly."""

import numpy as np
import pytest

from clockless.circuit import gate, layered
from clockless.hamiltonian import (
    HamiltonianSpec,
    HamiltonianTerm,
    assemble,
    energy,
    input_term,
    output_term,
    parent_spec,
    propagation_term,
    stabilizer_terms,
    term_energy,
    with_output,
)
from clockless.linalg import is_psd
from clockless.peps import GridLayout, build_peps
from clockless.spectral import dense_spectrum


def test_term_validation():
    with pytest.raises(ValueError):
        HamiltonianTerm("mystery", (0,), np.eye(2), 1, (0,))
    with pytest.raises(ValueError):
        HamiltonianTerm("output", (1, 0), np.eye(4), 1, (0,))
    with pytest.raises(ValueError):
        HamiltonianTerm("output", (0,), np.array([[0.0, 1.0], [0.0, 0.0]]), 1, (0,))
    t = output_term(0, GridLayout(1, 1))
    assert t.locality == 1
    assert "output" in str(t)


def test_propagation_term_is_psd_and_local(hcnot):
    layout = GridLayout(2, 2)
    g = gate("CNOT", (0, 1))
    t = propagation_term(g, 1, 0.5, layout)
    assert t.kind == "propagation"
    assert is_psd(t.block, tol=1e-10)
    # bulk two-wire gate touches both rows' pairs at layers 1 and 2
    assert t.support == (0, 1, 2, 3, 5, 6, 7, 8)
    last = propagation_term(g, 2, 0.5, layout)
    assert last.support == (2, 3, 4, 7, 8, 9)
    with pytest.raises(ValueError):
        propagation_term(g, 3, 0.5, layout)


def test_input_term_defaults():
    layout = GridLayout(1, 1)
    t = input_term(0, 0.5, layout)
    assert t.kind == "input"
    assert t.support == (0, 1)
    assert is_psd(t.block)
    with pytest.raises(ValueError):
        input_term((0, 0), 0.5, layout)
    with pytest.raises(ValueError):
        input_term(0, 0.5, layout, check=np.array([[0.5, 0.0], [0.0, 0.0]]))


def test_stabilizer_terms_parse():
    layout = GridLayout(2, 1)
    terms = stabilizer_terms(["Z.Z", "-X.X"], 0.5, layout)
    assert [t.kind for t in terms] == ["stabilizer", "stabilizer"]
    for t in terms:
        assert is_psd(t.block, tol=1e-10)


def test_parent_spec_identity_example(identity1):
    spec = parent_spec(identity1, 0.5)
    assert spec.layout.num_qubits == 3
    assert spec.num_terms == 2
    assert [t.kind for t in spec.terms] == ["input", "propagation"]


def test_parent_spec_term_order(bell_circuit):
    spec = parent_spec(bell_circuit, 0.5)
    kinds = [t.kind for t in spec.terms]
    assert kinds == ["input", "input", "propagation", "propagation",
                     "propagation"]
    layers = [t.layer for t in spec.terms if t.kind == "propagation"]
    assert layers == [1, 1, 2]


def test_frustration_freeness(bell_circuit):
    for delta in (0.2, 0.8):
        spec = parent_spec(bell_circuit, delta)
        state = build_peps(bell_circuit, delta)
        report = energy(spec, state.amplitudes)
        assert report.total < 1e-12
        assert max(report.per_term) < 1e-12


def test_ground_space_and_gap(identity1):
    spec = parent_spec(identity1, 0.5)
    op = assemble(spec)
    report = dense_spectrum(op, vectors=1)
    assert report.ground_dim == 1
    # frozen from this construction at delta = 1/2 (dense oracle)
    assert abs(report.gap - 0.2805992406584801) < 1e-12
    state = build_peps(identity1, 0.5)
    fid = abs(np.vdot(report.eigenvectors[:, 0], state.amplitudes)) ** 2
    assert fid >= 1.0 - 1e-12


def test_gap_is_one_at_unit_delta(identity1):
    spec = parent_spec(identity1, 1.0)
    report = dense_spectrum(assemble(spec))
    assert abs(report.gap - 1.0) < 1e-12


def test_sparse_operator_agrees_with_dense(bell_circuit, rng):
    spec = parent_spec(bell_circuit, 0.3)
    op = assemble(spec)
    dense = op.dense()
    v = rng.normal(size=dense.shape[0]) + 1j * rng.normal(size=dense.shape[0])
    assert np.allclose(op.apply(v), dense @ v, atol=1e-10)
    lin = op.as_linear_operator()
    assert np.allclose(lin @ v, dense @ v, atol=1e-10)
    sp = op.to_sparse()
    assert np.allclose(sp @ v, dense @ v, atol=1e-10)


def test_output_scale_only_hits_output_terms(identity1):
    spec = parent_spec(identity1, 0.5)
    scaled = with_output(spec, [0], out_scale=3.0)
    assert scaled.num_terms == spec.num_terms + 1
    assert scaled.scales()[-1] == 3.0
    assert set(scaled.scales()[:-1]) == {1.0}
    state = build_peps(identity1, 0.5)
    report = energy(scaled, state.amplitudes)
    # per-term energies stay unscaled; the total applies the output scale
    out_energy = report.per_term[-1]
    others = sum(report.per_term[:-1])
    assert np.isclose(report.total, others + 3.0 * out_energy, atol=1e-12)


def test_term_energy_matches_expectation(identity1, rng):
    spec = parent_spec(identity1, 0.5)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    v /= np.linalg.norm(v)
    total = sum(term_energy(t, v, 3) for t in spec.terms)
    dense = assemble(spec).dense()
    assert np.isclose(total, np.vdot(v, dense @ v).real, atol=1e-10)


def test_spec_rejects_oversized_terms():
    layout = GridLayout(1, 1)
    stray = HamiltonianTerm("output", (5,), np.diag([1.0, 0.0]), 1, (0,))
    with pytest.raises(ValueError):
        HamiltonianSpec(layout, (stray,))
