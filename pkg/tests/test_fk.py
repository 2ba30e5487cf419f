"""Unary-clock encoding and the two shallow verifier circuits."""

import numpy as np
import pytest

from clockless.circuit import apply_circuit, degree_reduce, layered
from clockless.fk import (
    ClockTerm,
    MeasurementPlan,
    accept_probability,
    build_dl_verifier,
    build_modified_fk,
    build_swap_test_verifier,
    dl_product,
    history_state,
    invalid_clock_state,
    swap_test_accept_probability,
    swap_test_state_pair,
    swap_test_witness,
)
from clockless.linalg import basis_state, product_state, random_state


@pytest.fixture
def reduced(hcnot):
    return degree_reduce(hcnot)


@pytest.fixture
def clock(reduced):
    return build_modified_fk(reduced)


def test_clock_term_validation():
    with pytest.raises(ValueError):
        ClockTerm("mystery", (0,), np.eye(2), 1)
    with pytest.raises(ValueError):
        ClockTerm("clock", (1, 0), np.eye(4), 1)
    t = ClockTerm("clock", (0, 1), np.eye(4), 2)
    assert t.locality == 2


def test_clock_register_layout(clock, reduced):
    assert clock.num_data == reduced.n == 4
    assert clock.num_steps == 4
    assert clock.num_qubits == 8
    assert clock.clock_qubit(1) == 4
    assert clock.clock_qubit(4) == 7
    with pytest.raises(ValueError):
        clock.clock_qubit(0)
    with pytest.raises(ValueError):
        clock.clock_qubit(5)


def test_clock_term_census(clock):
    kinds = {}
    for t in clock.terms:
        kinds[t.kind] = kinds.get(t.kind, 0) + 1
    assert kinds == {"input": 3, "propagation": 4, "clock": 3, "output": 1}
    assert len(clock.terms) == 11
    assert {t.locality for t in clock.terms} == {2, 3, 4, 5}


def test_degree_table_maximum_is_seven(clock):
    table = clock.degree_table()
    assert table == {0: 4, 1: 3, 2: 3, 3: 1, 4: 5, 5: 7, 6: 6, 7: 4}
    assert max(table.values()) == 7


def test_history_state_annihilates_everything_but_output(clock):
    psi = history_state(clock)
    assert np.isclose(np.linalg.norm(psi), 1.0, atol=1e-12)
    energies = clock.energies(psi)
    non_output = [
        e for t, e in zip(clock.terms, energies) if t.kind != "output"
    ]
    assert max(non_output) < 1e-10


def test_invalid_clock_pattern_violates_exactly_two_terms(clock):
    vec = invalid_clock_state(clock)
    bad = clock.violations(vec)
    assert len(bad) == 2
    kinds = sorted(clock.terms[i].kind for i in bad)
    assert kinds == ["clock", "propagation"]
    energies = clock.energies(vec)
    hit = sorted(energies[i] for i in bad)
    assert np.allclose(hit, [0.5, 1.0], atol=1e-12)


def test_identity_circuit_gets_one_padded_step():
    c = layered(1, 0, [[("I", (0,))]])
    ham = build_modified_fk(c)
    assert ham.num_steps == 1
    assert [t.kind for t in ham.terms] == ["propagation", "output"]
    # the output wire carries the witness: |0> scores the |0><0| penalty
    zero = history_state(ham, xi=basis_state(0, 1))
    one = history_state(ham, xi=basis_state(1, 1))
    out = [t for t in ham.terms if t.kind == "output"][0]
    idx = ham.terms.index(out)
    assert np.isclose(ham.energies(zero)[idx], 0.5)
    assert ham.energies(one)[idx] < 1e-12


def test_arity_and_degree_guards():
    ccz = layered(3, 0, [[("CCZ", (0, 1, 2))]])
    with pytest.raises(ValueError):
        build_modified_fk(ccz)
    crowded = layered(1, 0, [[("H", (0,))]] * 4)  # wire 0 meets 4 gates
    with pytest.raises(ValueError, match="degree_reduce"):
        build_modified_fk(crowded)


def test_operator_matches_energies(clock, rng):
    op = clock.operator()
    vec = random_state(clock.num_qubits, rng)
    total = float(np.real(np.vdot(vec, op.apply(vec))))
    assert np.isclose(total, sum(clock.energies(vec)), atol=1e-10)


def test_accept_probability_bit_convention(hadamard1):
    plan = MeasurementPlan(wires=(0,), accept_bits=(1,), postprocess="direct")
    p = accept_probability(hadamard1, plan)
    assert np.isclose(p, 0.5, atol=1e-12)


def test_dl_verifier_single_projector():
    term = ClockTerm("output", (0,), np.diag([0.0, 1.0]), 1)
    verifier, plan = build_dl_verifier([term], [(0,)])
    # accept = ||(1 - |1><1|) xi||^2
    assert np.isclose(accept_probability(verifier, plan, basis_state(0, 1)), 1.0)
    assert np.isclose(accept_probability(verifier, plan, basis_state(1, 1)), 0.0)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    assert np.isclose(accept_probability(verifier, plan, plus), 0.5, atol=1e-12)


def test_dl_verifier_matches_projector_product(clock):
    groups = []
    for i, t in enumerate(clock.terms):
        for g in groups:
            if all(
                not set(t.support) & set(clock.terms[j].support) for j in g
            ):
                g.append(i)
                break
        else:
            groups.append([i])
    grouping = [tuple(g) for g in groups]
    verifier, plan = build_dl_verifier(clock.terms, grouping)
    xi = history_state(clock)
    accept = accept_probability(verifier, plan, xi)
    product = dl_product(clock.terms, grouping, clock.num_qubits)
    direct = float(np.linalg.norm(product @ xi) ** 2)
    assert abs(accept - direct) < 1e-12
    # frozen: the history state of 4 steps keeps 1 - 1/5 after the sweep
    assert np.isclose(accept, 0.8, atol=1e-12)


def test_dl_verifier_rejects_bad_grouping(clock):
    with pytest.raises(ValueError):
        build_dl_verifier(clock.terms, [tuple(range(len(clock.terms)))])
    with pytest.raises(ValueError):
        build_dl_verifier(clock.terms, [(0,)])  # not a partition


def test_swap_test_probability_formula(rng):
    a = random_state(1, rng)
    b = random_state(1, rng)
    rho = swap_test_state_pair(a, b)
    p = swap_test_accept_probability(rho)
    assert np.isclose(p, 0.5 * (1.0 + abs(np.vdot(a, b)) ** 2), atol=1e-12)


def test_swap_test_on_maximally_mixed_pair():
    rho = np.eye(4) / 4.0
    assert np.isclose(swap_test_accept_probability(rho), 0.75, atol=1e-14)


def test_swap_test_fidelity_ceiling_guard():
    # a fabricated joint operator above the ceiling must be rejected
    swap = np.eye(4)[[0, 2, 1, 3]]
    rho = (np.eye(4) + 1.2 * swap) / 4.0
    with pytest.raises(ValueError):
        swap_test_accept_probability(rho)


def test_swap_verifier_honest_completeness(hcnot):
    verifier, plan = build_swap_test_verifier(hcnot)
    witness = swap_test_witness(hcnot)
    state = np.zeros(2**verifier.n, dtype=complex)
    # witness occupies the data registers; ancillas start at |0>
    ancillas = verifier.n - witness.size.bit_length() + 1
    state = product_state(
        [(witness, range(verifier.n - 1, ancillas - 1, -1)),
         (basis_state(0, ancillas), range(ancillas - 1, -1, -1))],
        verifier.n,
    )
    final = apply_circuit(verifier, state)
    probs = np.abs(final) ** 2
    accept = 0.0
    for idx, pr in enumerate(probs):
        bits = tuple((idx >> w) & 1 for w in plan.wires)
        if bits == plan.accept_bits:
            accept += pr
    # honest witness reproduces the bare circuit's accept probability (1/2)
    direct = apply_circuit(hcnot, basis_state(0, 2))
    p_direct = float(np.abs(direct[1 << 0]) ** 2 + np.abs(direct[0b11]) ** 2)
    assert np.isclose(accept, p_direct, atol=1e-10)
    assert np.isclose(accept, 0.5, atol=1e-10)


def test_swap_verifier_certainty_circuit():
    c = layered(1, 0, [[("X", (0,))]])
    verifier, plan = build_swap_test_verifier(c)
    witness = swap_test_witness(c)
    ancillas = verifier.n - 2
    state = product_state(
        [(witness, range(verifier.n - 1, ancillas - 1, -1)),
         (basis_state(0, ancillas), range(ancillas - 1, -1, -1))],
        verifier.n,
    )
    final = apply_circuit(verifier, state)
    accept = 0.0
    for idx, pr in enumerate(np.abs(final) ** 2):
        bits = tuple((idx >> w) & 1 for w in plan.wires)
        if bits == plan.accept_bits:
            accept += pr
    assert abs(accept - 1.0) < 1e-12
