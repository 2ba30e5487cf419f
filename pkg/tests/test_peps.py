"""Grid states: construction, expansion identity, and output marginals."""

import numpy as np
import pytest

from clockless.circuit import layered
from clockless.linalg import basis_state, trace_distance
from clockless.pauli import PauliWord
from clockless.peps import (
    GridLayout,
    PepsState,
    apply_injective_maps,
    base_state,
    build_peps,
    contract_observable,
    depolarizing_reference_marginal,
    expansion,
    output_marginal,
    reassemble_expansion,
    reduced_density,
    resolve_deltas,
    sample_pauli_patterns,
)


def test_grid_layout_indices():
    layout = GridLayout(2, 2)
    assert layout.columns == 5
    assert layout.num_qubits == 10
    assert layout.num_sites == 4
    assert layout.qubit_index(1, 3) == 8
    assert layout.input_qubit(1) == 5
    assert layout.output_qubit(0) == 4
    assert layout.site_qubits(1, 0) == (0, 1)
    assert layout.site_qubits(2, 1) == (7, 8)
    assert layout.choi_qubits(1, 0) == (1, 2)
    assert layout.sites() == [(1, 0), (1, 1), (2, 0), (2, 1)]
    assert layout.site_index(2, 1) == 3
    with pytest.raises(ValueError):
        layout.qubit_index(2, 0)
    with pytest.raises(ValueError):
        layout.site_index(3, 0)


def test_resolve_deltas():
    assert resolve_deltas(0.5, 3) == (0.5, 0.5, 0.5)
    assert resolve_deltas((0.2, 0.8), 2) == (0.2, 0.8)
    with pytest.raises(ValueError):
        resolve_deltas((0.2,), 2)
    with pytest.raises(ValueError):
        resolve_deltas(0.0, 1)
    with pytest.raises(ValueError):
        resolve_deltas(1.5, 1)


def test_peps_state_validation(identity1):
    layout = GridLayout(1, 1)
    with pytest.raises(ValueError):
        PepsState(layout, np.zeros(4), identity1, basis_state(0, 1))
    with pytest.raises(ValueError):
        PepsState(
            layout,
            np.full(8, 0.7, dtype=complex),
            identity1,
            basis_state(0, 1),
        )


def test_base_state_then_maps_matches_build(bell_circuit):
    base = base_state(bell_circuit)
    assert base.is_base and base.delta_per_layer is None
    mapped = apply_injective_maps(base, (0.5, 0.5))
    built = build_peps(bell_circuit, (0.5, 0.5))
    assert np.allclose(mapped.amplitudes, built.amplitudes)
    # Bell-frame coefficient mass is 4^(sites) times the physical norm
    ratio = mapped.bell_frame_norm_sq / mapped.norm_before_normalization**2
    assert np.isclose(ratio, 4.0**4, rtol=1e-12)


@pytest.mark.parametrize("delta", [0.2, 0.5])
def test_expansion_reassembles_built_state(bell_circuit, delta):
    result = expansion(bell_circuit, None, delta)
    assert result.truncation_bound == 0.0
    assert len(result) == 4**4
    reassembled = reassemble_expansion(bell_circuit, result)
    reassembled /= np.linalg.norm(reassembled)
    built = build_peps(bell_circuit, delta)
    fidelity = abs(np.vdot(reassembled, built.amplitudes)) ** 2
    assert fidelity >= 1.0 - 1e-12


def test_expansion_identity_word_carries_circuit_output(hcnot):
    result = expansion(hcnot, None, 0.5)
    word = PauliWord(("I",) * 4)
    coeff, out_state = result[word]
    assert np.isclose(coeff, 1.0)
    # H on wire 0 then CNOT(0->1): (|00> + |11>)/sqrt(2)
    assert np.allclose(out_state, np.array([1, 0, 0, 1]) / np.sqrt(2))
    # single-error coefficient carries one factor of delta
    one = PauliWord(("X", "I", "I", "I"))
    assert np.isclose(result[one][0], 0.5)


def test_expansion_truncation_bound(bell_circuit):
    full = expansion(bell_circuit, None, 0.3)
    cut = expansion(bell_circuit, None, 0.3, max_weight=1)
    assert cut.truncation_bound > 0.0
    dropped = sum(
        coeff**2
        for word, (coeff, _) in full.terms.items()
        if word.weight > 1
    )
    assert dropped <= cut.truncation_bound + 1e-12


def test_depolarizing_marginal_single_wire(identity1):
    state = build_peps(identity1, 0.5)
    rho = output_marginal(state)
    # (1 + delta^2)/(1 + 3 delta^2) at delta = 1/2
    assert abs(rho[0, 0].real - 5.0 / 7.0) < 1e-12
    reference = depolarizing_reference_marginal(identity1, None, 0.5)
    assert trace_distance(rho, reference) < 1e-10


def test_depolarizing_marginal_two_rounds():
    c = layered(2, 2, [[("I", (0,)), ("I", (1,))]] * 2)
    for delta in (0.2, 0.8):
        rho = output_marginal(build_peps(c, delta))
        reference = depolarizing_reference_marginal(c, None, delta)
        assert trace_distance(rho, reference) < 1e-10


def test_contract_observable_consistency(identity1):
    state = build_peps(identity1, 0.5)
    out = state.layout.output_qubit(0)
    z = np.diag([1.0, -1.0])
    value = contract_observable(state, z, (out,))
    rho = reduced_density(state, (out,))
    assert np.isclose(value, np.trace(rho @ z).real, atol=1e-12)
    # 2 * 5/7 - 1 = 3/7
    assert abs(value - 3.0 / 7.0) < 1e-12
    with pytest.raises(ValueError):
        contract_observable(state, np.array([[0.0, 1.0], [0.0, 0.0]]), (out,))


def test_reduced_density_qubit_cap(identity1):
    state = build_peps(identity1, 0.5)
    with pytest.raises(ValueError):
        reduced_density(state, range(7))


def test_sample_pauli_patterns_reproducible(bell_circuit):
    state = build_peps(bell_circuit, 0.4)
    a = sample_pauli_patterns(state, 5, seed=11)
    b = sample_pauli_patterns(state, 3, seed=11)
    assert a[:3] == b
    assert all(len(w) == 4 for w in a)
    c = sample_pauli_patterns(state, 5, seed=12)
    assert a != c


def test_sample_pauli_pattern_rates(identity1):
    state = build_peps(identity1, 0.5)
    words = sample_pauli_patterns(state, 2000, seed=3)
    rate = sum(w.weight for w in words) / len(words)
    # non-identity tag rate 3 delta^2/(1+3 delta^2) = 3/7 per site
    assert abs(rate - 3.0 / 7.0) < 0.05
