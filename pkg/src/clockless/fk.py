"""Unary-clock satisfiability encoding and two shallow verifier circuits.

The first half turns a serialized circuit into a local Hamiltonian over a
unary clock register plus the data wires, keeping every qubit inside a
small constant number of terms. The second half builds measurement-based
verifiers for such term families: a constant-depth circuit that flips one
ancilla per violated term, and a log-depth consistency checker that swap
tests a chain of claimed intermediate states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import (
    Gate,
    LayeredCircuit,
    NAMED_GATES,
    _nontrivial_gates,
    apply_circuit,
    pad_identities,
    validate,
)
from .hamiltonian import SparseOperator, term_energy
from .linalg import (
    apply_matrix,
    density_fidelity,
    embed_operator,
    product_state,
)

_IDENTITY_STEP = Gate(wires=(0,), unitary=np.eye(2), name="I")

# Wires a single wire may meet before the clock-qubit degree budget breaks.
_WIRE_GATE_CAP = 3


@dataclass(frozen=True)
class ClockTerm:
    """One local block of a clock Hamiltonian.

    ``support`` lists the qubits ascending (data wires first by index,
    clock qubits above them) and the dense ``block`` indexes bit i as
    support[i], like the grid terms. ``step`` is the 1-based time step the
    term belongs to.
    """

    kind: str
    support: tuple[int, ...]
    block: np.ndarray
    step: int

    def __post_init__(self) -> None:
        if self.kind not in ("input", "propagation", "clock", "output"):
            raise ValueError(f"unknown clock term kind {self.kind!r}")
        support = tuple(int(q) for q in self.support)
        if list(support) != sorted(set(support)):
            raise ValueError(f"support must be strictly ascending, got {support}")
        block = np.asarray(self.block, dtype=np.complex128)
        dim = 2 ** len(support)
        if block.shape != (dim, dim):
            raise ValueError(
                f"block shape {block.shape} does not match {len(support)} qubits"
            )
        if np.abs(block - block.conj().T).max() > 1e-10:
            raise ValueError("term block must be Hermitian")
        block = 0.5 * (block + block.conj().T)
        block.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "block", block)

    @property
    def locality(self) -> int:
        return len(self.support)

    def __str__(self) -> str:
        return f"{self.kind}[step {self.step}, qubits {self.support}]"


def _assemble_block(
    components, support: tuple[int, ...]
) -> np.ndarray:
    """Sum of products of small operators, embedded over ``support``.

    Each component is a list of (matrix, qubit tuple MSB first) factors on
    disjoint qubits, all drawn from ``support``; factors multiply into one
    embedded product, components add.
    """
    index = {q: i for i, q in enumerate(support)}
    m = len(support)
    total = np.zeros((2**m, 2**m), dtype=np.complex128)
    for factors in components:
        part = np.eye(2**m, dtype=np.complex128)
        for mat, qubits in factors:
            local = tuple(index[q] for q in qubits)
            part = part @ embed_operator(np.asarray(mat), local, m)
        total += part
    return total


def _ketbra(bits_row: str, bits_col: str) -> np.ndarray:
    """|row><col| over len(bits) qubits, bit strings read MSB first."""
    dim = 2 ** len(bits_row)
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[int(bits_row, 2), int(bits_col, 2)] = 1.0
    return out


@dataclass(frozen=True)
class ClockHamiltonian:
    """All terms of one unary-clock encoding, plus its register geometry.

    Data wires keep their circuit indices 0..num_data-1; the clock qubit
    of step t sits at num_data + t - 1. ``steps`` lists the serialized
    gates, one per time step.
    """

    circuit: LayeredCircuit
    steps: tuple[Gate, ...]
    output_wire: int
    num_data: int
    num_steps: int
    terms: tuple[ClockTerm, ...]

    @property
    def num_qubits(self) -> int:
        return self.num_data + self.num_steps

    def clock_qubit(self, t: int) -> int:
        """Qubit index of the 1-based clock step ``t``."""
        if not 1 <= t <= self.num_steps:
            raise ValueError(f"step {t} outside 1..{self.num_steps}")
        return self.num_data + t - 1

    def degree_table(self) -> dict[int, int]:
        """How many terms act on each qubit (zero entries included)."""
        table = {q: 0 for q in range(self.num_qubits)}
        for term in self.terms:
            for q in term.support:
                table[q] += 1
        return table

    def operator(self) -> SparseOperator:
        """Term-wise applicable form, for spectra and energies."""
        return SparseOperator(
            self.num_qubits, self.terms, (1.0,) * len(self.terms)
        )

    def energies(self, vec: np.ndarray) -> tuple[float, ...]:
        return tuple(
            term_energy(term, vec, self.num_qubits) for term in self.terms
        )

    def violations(
        self, vec: np.ndarray, tol: float = 1e-9
    ) -> tuple[int, ...]:
        """Indices of terms with energy above ``tol`` on a unit vector."""
        return tuple(
            i for i, e in enumerate(self.energies(vec)) if e > tol
        )


def _require_valid(c: LayeredCircuit) -> None:
    problems = validate(c)
    if problems:
        listing = "; ".join(str(p) for p in problems)
        raise ValueError(f"invalid circuit: {listing}")


def _first_touch_steps(
    steps: tuple[Gate, ...], wires: int
) -> dict[int, int]:
    """First 1-based step touching each wire; untouched wires map to 1."""
    first = {w: 1 for w in range(wires)}
    seen: set[int] = set()
    for t, g in enumerate(steps, start=1):
        for w in g.wires:
            if w not in seen:
                first[w] = t
                seen.add(w)
    return first


def build_modified_fk(
    c: LayeredCircuit, output_wire: int = 0
) -> ClockHamiltonian:
    """Unary-clock Hamiltonian of a degree-reduced circuit.

    Serializes the non-identity gates layer by layer into time steps (a
    circuit with none gets a single explicit identity step) and emits four
    kinds of terms:

    * propagation, one per step, tying the clock transition to the gate;
      interior steps watch three clock qubits, the first and last steps
      two, a single-step encoding just one;
    * clock, one per adjacent qubit pair from step 2 on, penalizing the
      01 pattern that breaks unary order;
    * input, one per step that first touches ancilla wires, penalizing any
      1 among those wires while the clock still sits before that step;
    * output, penalizing a 0 on ``output_wire`` once the clock has passed
      the last step.

    Inputs must come out of ``degree_reduce`` (or already satisfy its
    guarantee): any wire meeting more than three non-identity gates is
    rejected, as are gates on more than two wires, since either would push
    a qubit past the intended term budget.
    """
    c = pad_identities(c)
    _require_valid(c)
    steps = tuple(_nontrivial_gates(c))
    meets: dict[int, int] = {}
    for g in steps:
        if g.arity > 2:
            raise ValueError(
                f"gate on wires {g.wires} acts on {g.arity} wires; the "
                "clock encoding handles one- and two-wire gates"
            )
        for w in g.wires:
            meets[w] = meets.get(w, 0) + 1
    crowded = {w: k for w, k in meets.items() if k > _WIRE_GATE_CAP}
    if crowded:
        worst = max(crowded, key=crowded.get)
        raise ValueError(
            f"wire {worst} meets {crowded[worst]} non-identity gates, more "
            f"than the degree-reduced cap of {_WIRE_GATE_CAP}; run "
            "degree_reduce first"
        )
    if not steps:
        steps = (_IDENTITY_STEP,)

    num_data = c.n
    num_steps = len(steps)
    cq = lambda t: num_data + t - 1  # noqa: E731

    one = np.array([[0.0, 0.0], [0.0, 1.0]])
    zero = np.array([[1.0, 0.0], [0.0, 0.0]])
    terms: list[ClockTerm] = []

    first_touch = _first_touch_steps(steps, num_data)
    by_step: dict[int, list[int]] = {}
    for wire in range(c.a):
        by_step.setdefault(first_touch[wire], []).append(wire)
    for t in sorted(by_step):
        wires = tuple(sorted(by_step[t]))
        # Wires first met by the same gate share one clock window, so a
        # single term covers them; splitting it would lift that window's
        # clock qubits past the seven-term budget.
        nonzero = np.eye(2 ** len(wires))
        nonzero[0, 0] = 0.0
        if t == 1:
            support = (*wires, cq(1))
            block = _assemble_block(
                [[(zero, (cq(1),)), (nonzero, wires)]], support
            )
        else:
            support = (*wires, cq(t - 1), cq(t))
            block = _assemble_block(
                [
                    [
                        (_ketbra("10", "10"), (cq(t - 1), cq(t))),
                        (nonzero, wires),
                    ]
                ],
                support,
            )
        terms.append(ClockTerm("input", support, block, t))

    for t, g in enumerate(steps, start=1):
        u = g.unitary
        ud = u.conj().T
        if num_steps == 1:
            support = tuple(sorted((*g.wires, cq(1))))
            hop = [
                [(_ketbra("1", "0"), (cq(1),)), (u, g.wires)],
                [(_ketbra("0", "1"), (cq(1),)), (ud, g.wires)],
            ]
            block = _assemble_block(hop, support)
            block = 0.5 * (np.eye(block.shape[0]) - block)
        else:
            if t == 1:
                clocks = (cq(1), cq(2))
                stay = [
                    [(_ketbra("00", "00"), clocks)],
                    [(_ketbra("10", "10"), clocks)],
                ]
                hop = [
                    [(_ketbra("10", "00"), clocks), (u, g.wires)],
                    [(_ketbra("00", "10"), clocks), (ud, g.wires)],
                ]
            elif t == num_steps:
                clocks = (cq(t - 1), cq(t))
                stay = [
                    [(_ketbra("10", "10"), clocks)],
                    [(_ketbra("11", "11"), clocks)],
                ]
                hop = [
                    [(_ketbra("11", "10"), clocks), (u, g.wires)],
                    [(_ketbra("10", "11"), clocks), (ud, g.wires)],
                ]
            else:
                clocks = (cq(t - 1), cq(t), cq(t + 1))
                stay = [
                    [(_ketbra("100", "100"), clocks)],
                    [(_ketbra("110", "110"), clocks)],
                ]
                hop = [
                    [(_ketbra("110", "100"), clocks), (u, g.wires)],
                    [(_ketbra("100", "110"), clocks), (ud, g.wires)],
                ]
            support = tuple(sorted((*g.wires, *clocks)))
            block = 0.5 * _assemble_block(stay, support) - 0.5 * _assemble_block(
                hop, support
            )
        terms.append(ClockTerm("propagation", support, block, t))

    for t in range(2, num_steps + 1):
        support = (cq(t - 1), cq(t))
        block = _assemble_block(
            [[(_ketbra("01", "01"), support)]], support
        )
        terms.append(ClockTerm("clock", support, block, t))

    if not 0 <= output_wire < num_data:
        raise ValueError(
            f"output wire {output_wire} outside 0..{num_data - 1}"
        )
    support = (output_wire, cq(num_steps))
    block = _assemble_block(
        [[(one, (cq(num_steps),)), (zero, (output_wire,))]], support
    )
    terms.append(ClockTerm("output", support, block, num_steps))

    return ClockHamiltonian(
        circuit=c,
        steps=steps,
        output_wire=output_wire,
        num_data=num_data,
        num_steps=num_steps,
        terms=tuple(terms),
    )


def _input_vector(n: int, a: int, xi) -> np.ndarray:
    """|0^a> (x) witness over n wires, bit j of the index = wire j."""
    free = n - a
    if xi is None:
        inner = np.zeros(2**free, dtype=np.complex128)
        inner[0] = 1.0
    else:
        inner = np.asarray(xi, dtype=np.complex128)
        if inner.shape != (2**free,):
            raise ValueError(
                f"witness must have dimension 2^{free}, got {inner.shape}"
            )
        norm = np.linalg.norm(inner)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("witness state must be unit norm")
    vec = np.zeros(2**n, dtype=np.complex128)
    for x in range(inner.shape[0]):
        vec[x << a] = inner[x]
    return vec


def history_state(ham: ClockHamiltonian, xi=None) -> np.ndarray:
    """The uniform superposition of clock times with their partial runs.

    Entry t of the sum pairs the unary pattern 1^t 0^(T-t) on the clock
    register with the input state pushed through the first t steps. The
    result is normalized and annihilates every propagation, clock, and
    input term of ``ham``; only output terms can see it.
    """
    n, big_t = ham.num_data, ham.num_steps
    data = _input_vector(n, ham.circuit.a, xi)
    out = np.zeros(2 ** (n + big_t), dtype=np.complex128)
    clock = np.zeros(2**big_t, dtype=np.complex128)
    clock[0] = 1.0
    out += np.kron(clock, data)
    for t, g in enumerate(ham.steps, start=1):
        data = apply_matrix(data, g.unitary, g.wires, n)
        clock = np.zeros(2**big_t, dtype=np.complex128)
        clock[2**t - 1] = 1.0
        out += np.kron(clock, data)
    return out / math.sqrt(big_t + 1.0)


def invalid_clock_state(ham: ClockHamiltonian) -> np.ndarray:
    """|0100...> on the clock register with all-zero data.

    The second clock qubit is set, the first is not: a pattern no unary
    count produces. Exactly two terms of the Hamiltonian notice it.
    """
    if ham.num_steps < 2:
        raise ValueError("the broken pattern needs at least two clock qubits")
    clock = np.zeros(2**ham.num_steps, dtype=np.complex128)
    clock[2] = 1.0  # bit 1 set: clock qubit of step 2
    data = np.zeros(2**ham.num_data, dtype=np.complex128)
    data[0] = 1.0
    return np.kron(clock, data)


@dataclass(frozen=True)
class MeasurementPlan:
    """Which wires a verifier measures and what counts as acceptance.

    ``wires[i]`` must read ``accept_bits[i]`` for the run to accept;
    ``postprocess`` spells out the classical stage in words.
    """

    wires: tuple[int, ...]
    accept_bits: tuple[int, ...]
    postprocess: str

    def __post_init__(self) -> None:
        if len(self.wires) != len(self.accept_bits):
            raise ValueError("one accept bit per measured wire")
        if any(b not in (0, 1) for b in self.accept_bits):
            raise ValueError("accept bits must be 0 or 1")


def accept_probability(
    c: LayeredCircuit, plan: MeasurementPlan, xi=None
) -> float:
    """Probability that running ``c`` on |0^a>|xi> satisfies the plan."""
    vec = _input_vector(c.n, c.a, xi)
    vec = apply_circuit(c, vec)
    probs = np.abs(vec) ** 2
    idx = np.arange(probs.size)
    keep = np.ones(probs.size, dtype=bool)
    for wire, bit in zip(plan.wires, plan.accept_bits):
        keep &= ((idx >> wire) & 1) == bit
    return float(probs[keep].sum())


def _require_projector(block: np.ndarray, what: str) -> np.ndarray:
    block = np.asarray(block, dtype=np.complex128)
    if np.abs(block @ block - block).max() > 1e-10:
        raise ValueError(f"{what} is not a projector")
    return block


def build_dl_verifier(
    terms, grouping
) -> tuple[LayeredCircuit, MeasurementPlan]:
    """Constant-depth satisfiability extractor for a family of projectors.

    ``terms`` is a sequence of objects with ``support`` and projector
    ``block`` attributes; ``grouping`` partitions their indices into
    layers whose members act on pairwise disjoint qubits (overlap inside
    a group is rejected). The circuit holds one fresh ancilla per term:
    layer by layer, a controlled flip writes each term's value onto its
    ancilla. Accepting means every ancilla reads zero, and the acceptance
    probability equals the squared norm of the group-ordered product of
    complements applied to the witness.

    Ancillas occupy wires 0..m-1 (one per term, in term order); the data
    register follows.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    m = len(terms)
    seen: set[int] = set()
    groups: list[tuple[int, ...]] = []
    for group in grouping:
        group = tuple(int(i) for i in group)
        used: set[int] = set()
        for i in group:
            if not 0 <= i < m:
                raise ValueError(f"term index {i} out of range")
            if i in seen:
                raise ValueError(f"term {i} appears in two groups")
            seen.add(i)
            support = set(terms[i].support)
            if support & used:
                raise ValueError(
                    f"group {group} members overlap on qubits "
                    f"{sorted(support & used)}"
                )
            used |= support
        groups.append(group)
    if seen != set(range(m)):
        raise ValueError(
            f"grouping misses terms {sorted(set(range(m)) - seen)}"
        )

    data = 1 + max(q for t in terms for q in t.support)
    layers = []
    for group in groups:
        gates = []
        for i in group:
            h = _require_projector(terms[i].block, f"term {i}")
            dim = h.shape[0]
            flip = np.kron(np.eye(dim) - h, np.eye(2)) + np.kron(
                h, NAMED_GATES["X"]
            )
            wires = tuple(m + q for q in reversed(terms[i].support)) + (i,)
            gates.append(Gate(wires=wires, unitary=flip, name=None))
        layers.append(tuple(gates))
    circuit = pad_identities(
        LayeredCircuit(n=m + data, a=m, layers=tuple(layers))
    )
    plan = MeasurementPlan(
        wires=tuple(range(m)),
        accept_bits=(0,) * m,
        postprocess=(
            "measure every flip ancilla; OR the bits in a balanced "
            "logarithmic-depth classical tree and accept on all zeros"
        ),
    )
    return circuit, plan


def dl_product(terms, grouping, num_qubits: int) -> np.ndarray:
    """Dense group-ordered product of term complements, first group first."""
    out = np.eye(2**num_qubits, dtype=np.complex128)
    for group in grouping:
        stage = np.eye(2**num_qubits, dtype=np.complex128)
        for i in group:
            term = terms[i]
            h = embed_operator(
                np.asarray(term.block),
                tuple(reversed(term.support)),
                num_qubits,
            )
            stage = (np.eye(2**num_qubits) - h) @ stage
        out = stage @ out
    return out


def _swap_matrix(dim: int) -> np.ndarray:
    out = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            out[i * dim + j, j * dim + i] = 1.0
    return out


_CSWAP = np.kron(np.diag([1.0, 0.0]), np.eye(4)) + np.kron(
    np.diag([0.0, 1.0]), _swap_matrix(2)
)


def build_swap_test_verifier(
    c: LayeredCircuit, output_wire: int = 0
) -> tuple[LayeredCircuit, MeasurementPlan]:
    """Log-depth consistency checker over a chain of claimed run states.

    The witness supplies 2T registers of the circuit's width: the input
    state, two copies of the state after each of the first T-1 steps, and
    the final state. One test layer compares the duplicate copies, then
    each step's gate is applied to one copy, and a second test layer
    compares every pushed state with the next claimed one. Each register
    comparison is an ancilla-controlled swap test (Hadamard, per-qubit
    controlled swaps, Hadamard); accepting means every test ancilla reads
    zero and the final register's output wire reads one. Controlled swaps
    of one test share their ancilla and run in sequence; everything else
    is parallel, so the depth grows with the register width, not with T.
    """
    c = pad_identities(c)
    _require_valid(c)
    steps = tuple(_nontrivial_gates(c)) or (_IDENTITY_STEP,)
    big_t = len(steps)
    w = c.n
    ancillas = 2 * big_t - 1
    reg = lambda r, j: ancillas + r * w + j  # noqa: E731

    h_gate = NAMED_GATES["H"]
    layers: list[list[Gate]] = []

    def swap_stage(pairs, first_ancilla):
        if not pairs:
            return
        used = [first_ancilla + k for k in range(len(pairs))]
        layers.append([Gate((q,), h_gate, "H") for q in used])
        for j in range(w):
            layers.append(
                [
                    Gate(
                        (used[k], reg(r, j), reg(s, j)),
                        _CSWAP,
                        "CSWAP",
                    )
                    for k, (r, s) in enumerate(pairs)
                ]
            )
        layers.append([Gate((q,), h_gate, "H") for q in used])

    swap_stage([(2 * t - 1, 2 * t) for t in range(1, big_t)], 0)

    gate_layer = [
        Gate(tuple(reg(0, j) for j in steps[0].wires), steps[0].unitary, steps[0].name)
    ]
    for t in range(1, big_t):
        g = steps[t]
        gate_layer.append(
            Gate(tuple(reg(2 * t, j) for j in g.wires), g.unitary, g.name)
        )
    layers.append(gate_layer)

    second = [(0, 1)] + [(2 * t, 2 * t + 1) for t in range(1, big_t)]
    swap_stage(second, big_t - 1)

    circuit = pad_identities(
        LayeredCircuit(
            n=ancillas + 2 * big_t * w,
            a=ancillas,
            layers=tuple(tuple(layer) for layer in layers),
        )
    )
    if not 0 <= output_wire < w:
        raise ValueError(f"output wire {output_wire} outside 0..{w - 1}")
    plan = MeasurementPlan(
        wires=tuple(range(ancillas)) + (reg(2 * big_t - 1, output_wire),),
        accept_bits=(0,) * ancillas + (1,),
        postprocess=(
            "measure the test ancillas and the final register's output "
            "wire; AND the checks in a balanced logarithmic-depth "
            "classical tree (every ancilla zero, output one)"
        ),
    )
    return circuit, plan


def swap_test_witness(c: LayeredCircuit, xi=None) -> np.ndarray:
    """The honest witness for ``build_swap_test_verifier``.

    Register 0 holds the circuit input, registers 2t-1 and 2t both hold
    the state after step t, and the last register holds the final state.
    """
    c = pad_identities(c)
    steps = tuple(_nontrivial_gates(c)) or (_IDENTITY_STEP,)
    big_t = len(steps)
    w = c.n
    states = [_input_vector(w, c.a, xi)]
    for g in steps:
        states.append(apply_matrix(states[-1], g.unitary, g.wires, w))
    registers = [states[0]]
    for t in range(1, big_t):
        registers.extend([states[t], states[t]])
    registers.append(states[big_t])
    factors = [
        (vec, list(range(r * w + w - 1, r * w - 1, -1)))
        for r, vec in enumerate(registers)
    ]
    return product_state(factors, 2 * big_t * w)


def swap_test_accept_probability(rho_joint: np.ndarray) -> float:
    """Exact accept probability of one swap test on a joint state.

    The test accepts with probability (1 + Tr[SWAP rho])/2, which never
    exceeds (1 + F)/2 for the fidelity F of the two marginals; the bound
    is verified here and a violation raises.
    """
    rho = np.asarray(rho_joint, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    d = math.isqrt(rho.shape[0])
    if d * d != rho.shape[0]:
        raise ValueError(
            f"joint dimension {rho.shape[0]} is not a square, so the "
            "subsystems cannot have equal dimension"
        )
    swap = _swap_matrix(d)
    prob = 0.5 * (1.0 + float(np.real(np.trace(swap @ rho))))
    four = rho.reshape(d, d, d, d)
    rho_a = np.einsum("ikjk->ij", four)
    rho_b = np.einsum("kikj->ij", four)
    ceiling = 0.5 * (1.0 + density_fidelity(rho_a, rho_b))
    if prob > ceiling + 1e-12:
        raise ValueError(
            f"accept probability {prob} exceeds the fidelity ceiling "
            f"{ceiling}"
        )
    return prob


def swap_test_state_pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Joint density matrix of two pure states, for the accept formula."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    joint = np.kron(a, b)
    return np.outer(joint, joint.conj())
