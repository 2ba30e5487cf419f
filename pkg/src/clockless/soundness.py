"""Fault-pattern states, error extraction, and randomized inequality suites.

Low-energy grid states factor into a frame of satisfied local checks plus
arbitrary payloads at a small set of faulted locations. This module builds
such states directly from a declared fault pattern, recovers the error
decomposition hiding inside them, measures the weight distribution of the
Bell frame, compares neighboring gate ground spaces, and packages the
inequality lemmas behind the soundness analysis into replayable randomized
suites.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import Gate, LayeredCircuit, layered, pad_identities, validate
from .hamiltonian import energy, parent_spec, propagation_term
from .linalg import (
    apply_matrix,
    partial_trace,
    product_state,
    random_projector,
    random_state,
    random_unitary,
)
from .pauli import (
    PAULI_TAGS,
    PauliWord,
    bell_basis_matrix,
    lambda_matrix,
    pauli_matrix,
    phi0,
    q_matrix,
)
from .peps import GridLayout, build_peps, choi_factor, resolve_deltas
from .rotation import RotationUnitary
from .spectral import (
    detectability_check,
    geometric_bound,
    jordan_angles,
    union_bound_check,
)

# Cap on the number of error words one extraction may enumerate.
_EXTRACTION_BUDGET = 4096


@dataclass(frozen=True)
class FaultPattern:
    """Which locations of a circuit the adversary corrupts.

    ``inputs`` lists wires whose initialization is faulted; only ancilla
    wires qualify, since witness wires carry no initialization check.
    ``layers`` holds one wire set per circuit layer; a gate is faulted when
    its wires appear there, and each layer set must cover whole gates.
    """

    inputs: frozenset[int]
    layers: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "inputs", frozenset(int(w) for w in self.inputs)
        )
        object.__setattr__(
            self,
            "layers",
            tuple(frozenset(int(w) for w in s) for s in self.layers),
        )

    @property
    def budget(self) -> int:
        """Total count of faulted wires, inputs plus every layer."""
        return len(self.inputs) + sum(len(s) for s in self.layers)


def _require_valid(c: LayeredCircuit) -> None:
    problems = validate(c)
    if problems:
        listing = "; ".join(str(p) for p in problems)
        raise ValueError(f"invalid circuit: {listing}")


def _faulted_gates(
    c: LayeredCircuit, fault: FaultPattern
) -> list[tuple[int, Gate]]:
    """Resolve per-layer fault wire sets into whole gates, or complain."""
    if len(fault.layers) != c.depth:
        raise ValueError(
            f"fault pattern has {len(fault.layers)} layers, circuit has "
            f"{c.depth}"
        )
    for w in fault.inputs:
        if not 0 <= w < c.a:
            raise ValueError(
                f"faulted input wire {w} is not an ancilla wire (a = {c.a})"
            )
    chosen: list[tuple[int, Gate]] = []
    for layer_idx, (layer, wires) in enumerate(
        zip(c.layers, fault.layers), start=1
    ):
        covered: set[int] = set()
        for g in layer:
            hit = set(g.wires) & wires
            if not hit:
                continue
            if set(g.wires) - wires:
                raise ValueError(
                    f"layer {layer_idx} fault set {sorted(wires)} covers "
                    f"gate wires {g.wires} only partially"
                )
            chosen.append((layer_idx, g))
            covered |= set(g.wires)
        stray = wires - covered
        if stray:
            raise ValueError(
                f"layer {layer_idx} fault set names wires {sorted(stray)} "
                "that no gate touches"
            )
    return chosen


def fault_locations(
    c: LayeredCircuit, fault: FaultPattern
) -> set[tuple]:
    """The declared fault locations as comparable (kind, ...) keys."""
    c = pad_identities(c)
    keys: set[tuple] = {("input", w) for w in fault.inputs}
    for layer_idx, g in _faulted_gates(c, fault):
        keys.add(("gate", layer_idx, g.wires))
    return keys


@dataclass(frozen=True)
class CombinatorialState:
    """A normalized grid state deviating only at declared fault locations."""

    layout: GridLayout
    amplitudes: np.ndarray
    circuit: LayeredCircuit
    fault: FaultPattern
    delta_per_layer: tuple[float, ...]
    xi: np.ndarray

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits


def _unit(vec, dim: int, what: str) -> np.ndarray:
    out = np.asarray(vec, dtype=np.complex128)
    if out.shape != (dim,):
        raise ValueError(
            f"{what} must have dimension {dim}, got shape {out.shape}"
        )
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise ValueError(f"{what} is numerically zero")
    return out / norm


def _basis1q(bit: int) -> np.ndarray:
    out = np.zeros(2, dtype=np.complex128)
    out[bit] = 1.0
    return out


def _resolve_witness(c: LayeredCircuit, xi) -> np.ndarray:
    free = c.n - c.a
    if xi is None:
        out = np.zeros(2**free, dtype=np.complex128)
        out[0] = 1.0
        return out
    return _unit(xi, 2**free, "witness state")


def build_combinatorial_state(
    c: LayeredCircuit,
    deltas,
    fault: FaultPattern,
    *,
    xi=None,
    input_payloads=None,
    gate_payloads=None,
) -> CombinatorialState:
    """Assemble the grid state of a computation faulted exactly at ``fault``.

    Satisfied locations carry their usual factors: |0> at ancilla inputs
    and the gate's Choi state on its leg qubits. Every faulted location
    must be handed a payload instead. Input payloads are single-qubit
    vectors keyed by wire; gate payloads are 4^k-dimensional vectors keyed
    by (layer, wires), in the index convention of ``choi_factor`` (output
    side bits most significant). Payloads are normalized here, so only
    their direction matters.
    """
    c = pad_identities(c)
    _require_valid(c)
    schedule = resolve_deltas(deltas, c.depth)
    layout = GridLayout(c.n, c.depth)
    faulted = _faulted_gates(c, fault)
    faulted_keys = {(layer, g.wires) for layer, g in faulted}

    input_payloads = dict(input_payloads or {})
    gate_payloads = dict(gate_payloads or {})
    missing_in = sorted(fault.inputs - input_payloads.keys())
    if missing_in:
        raise ValueError(f"missing input payloads for wires {missing_in}")
    stray_in = sorted(input_payloads.keys() - fault.inputs)
    if stray_in:
        raise ValueError(
            f"input payloads given for unfaulted wires {stray_in}"
        )
    missing_gates = sorted(faulted_keys - gate_payloads.keys())
    if missing_gates:
        raise ValueError(f"missing gate payloads for {missing_gates}")
    stray_gates = sorted(gate_payloads.keys() - faulted_keys)
    if stray_gates:
        raise ValueError(
            f"gate payloads given for unfaulted locations {stray_gates}"
        )

    xi = _resolve_witness(c, xi)
    factors: list[tuple[np.ndarray, list[int]]] = []
    if c.a < c.n:
        factors.append(
            (xi, [layout.input_qubit(row) for row in reversed(range(c.a, c.n))])
        )
    for wire in range(c.a):
        if wire in fault.inputs:
            vec = _unit(input_payloads[wire], 2, f"input payload for wire {wire}")
        else:
            vec = _basis1q(0)
        factors.append((vec, [layout.input_qubit(wire)]))
    for layer_idx, layer in enumerate(c.layers, start=1):
        for g in layer:
            ref, qubits = choi_factor(g, layer_idx, layout)
            if (layer_idx, g.wires) in faulted_keys:
                vec = _unit(
                    gate_payloads[(layer_idx, g.wires)],
                    ref.shape[0],
                    f"gate payload at layer {layer_idx} wires {g.wires}",
                )
                factors.append((vec, qubits))
            else:
                factors.append((ref, qubits))

    amps = product_state(factors, layout.num_qubits)
    for layer, row in layout.sites():
        lo, hi = layout.site_qubits(layer, row)
        amps = apply_matrix(
            amps, q_matrix(schedule[layer - 1]), (hi, lo), layout.num_qubits
        )
    amps = amps / np.linalg.norm(amps)
    return CombinatorialState(layout, amps, c, fault, schedule, xi)


def violated_locations(
    state: CombinatorialState, tol: float = 1e-9
) -> set[tuple]:
    """Locations whose Hamiltonian terms the state actually violates."""
    spec = parent_spec(state.circuit, state.delta_per_layer)
    report = energy(spec, state.amplitudes, tol)
    out: set[tuple] = set()
    for idx in report.violations:
        term = spec.terms[idx]
        if term.kind == "input":
            out.add(("input", term.wires[0]))
        elif term.kind == "propagation":
            out.add(("gate", term.layer, term.wires))
        else:
            out.add((term.kind, term.layer, term.wires))
    return out


def _contract_factors(
    vec: np.ndarray,
    factors,
    num_qubits: int,
) -> np.ndarray:
    """Partial inner products: contract each <factor| onto its qubits.

    Factors use the (vector, MSB-first qubit list) convention of
    ``product_state``. The residual keeps the remaining qubits in
    descending index order, so its flat form indexes the highest surviving
    qubit as the most significant bit.
    """
    psi = np.asarray(vec, dtype=np.complex128).reshape((2,) * num_qubits)
    axis_qubits = list(range(num_qubits - 1, -1, -1))
    for fac, qubits in factors:
        k = len(qubits)
        fac_t = np.asarray(fac, dtype=np.complex128).conj().reshape((2,) * k)
        psi_axes = [axis_qubits.index(q) for q in qubits]
        psi = np.tensordot(fac_t, psi, axes=(list(range(k)), psi_axes))
        dead = set(psi_axes)
        axis_qubits = [q for i, q in enumerate(axis_qubits) if i not in dead]
    return psi.reshape(-1)


def _gate_error_basis(
    g: Gate, layer: int, layout: GridLayout
) -> list[tuple[tuple[str, ...], np.ndarray, list[int]]]:
    """Orthonormal Choi-shifted basis at one gate: word, vector, qubits.

    Word tag i acts on the output leg of wire ``g.wires[i]`` after the
    gate, which shifts the Choi state without disturbing its input side.
    """
    _, qubits = choi_factor(g, layer, layout)
    k = g.arity
    out = []
    for word in itertools.product(PAULI_TAGS, repeat=k):
        shift = pauli_matrix(word[0])
        for tag in word[1:]:
            shift = np.kron(shift, pauli_matrix(tag))
        mat = shift @ g.unitary
        vec = np.zeros((2**k, 2**k), dtype=np.complex128)
        for x in range(2**k):
            vec[:, x] = mat[:, x]
        vec = vec.reshape(-1) / np.sqrt(2.0**k)
        out.append((word, vec, qubits))
    return out


@dataclass(frozen=True)
class AdversarialDecomposition:
    """Error expansion of a fault-pattern state after undressing the pairs.

    ``slots`` names the error positions, one tag per slot: the faulted
    input wires in ascending order (tags I or X only, flipping the
    initialized bit), then each faulted gate's wires in layer order.
    ``entries`` pairs each Pauli word over those slots with a nonnegative
    coefficient and the residual witness-register state it multiplies; the
    squared coefficients sum to one.
    """

    slots: tuple[tuple, ...]
    entries: tuple[tuple[PauliWord, float, np.ndarray], ...]
    fault: FaultPattern
    circuit: LayeredCircuit
    delta_per_layer: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def coefficient_norm_sq(self) -> float:
        return sum(c**2 for _, c, _ in self.entries)


def extract_decomposition(
    state: CombinatorialState, tol: float = 1e-12
) -> AdversarialDecomposition:
    """Read off the error words a fault-pattern state hides at its faults.

    Inverts the pair maps (applies the complementary diagonal at every
    site and renormalizes), then contracts the frame of satisfied factors
    together with an orthonormal error basis at each faulted location:
    {|0>, |1>} at inputs, the Pauli-shifted Choi states at gates. What
    survives each contraction is the residual witness state, whose norm is
    the coefficient. Words with coefficient at or below ``tol`` are
    dropped. Raises when the enumeration would exceed the module budget or
    when the state does not factor over the declared pattern.
    """
    c, layout, fault = state.circuit, state.layout, state.fault
    schedule = state.delta_per_layer
    amps = state.amplitudes
    for layer, row in layout.sites():
        lo, hi = layout.site_qubits(layer, row)
        amps = apply_matrix(
            amps,
            lambda_matrix(schedule[layer - 1]),
            (hi, lo),
            layout.num_qubits,
        )
    amps = amps / np.linalg.norm(amps)

    faulted = _faulted_gates(c, fault)
    faulted_keys = {(layer, g.wires) for layer, g in faulted}
    frame: list[tuple[np.ndarray, list[int]]] = []
    for wire in range(c.a):
        if wire not in fault.inputs:
            frame.append((_basis1q(0), [layout.input_qubit(wire)]))
    for layer_idx, layer in enumerate(c.layers, start=1):
        for g in layer:
            if (layer_idx, g.wires) not in faulted_keys:
                frame.append(choi_factor(g, layer_idx, layout))

    slots: list[tuple] = []
    groups: list[list[tuple[tuple[str, ...], np.ndarray, list[int]]]] = []
    for wire in sorted(fault.inputs):
        slots.append(("input", wire))
        q = layout.input_qubit(wire)
        groups.append(
            [(("I",), _basis1q(0), [q]), (("X",), _basis1q(1), [q])]
        )
    for layer_idx, g in faulted:
        slots.extend(("gate", layer_idx, w) for w in g.wires)
        groups.append(_gate_error_basis(g, layer_idx, layout))

    count = 1
    for group in groups:
        count *= len(group)
    if count > _EXTRACTION_BUDGET:
        raise ValueError(
            f"error-basis enumeration needs {count} words, budget is "
            f"{_EXTRACTION_BUDGET}"
        )

    entries = []
    total = 0.0
    for combo in itertools.product(*groups):
        bras = frame + [(vec, qubits) for _, vec, qubits in combo]
        residual = _contract_factors(amps, bras, layout.num_qubits)
        coeff = float(np.linalg.norm(residual))
        total += coeff**2
        if coeff > tol:
            tags = tuple(t for word, _, _ in combo for t in word)
            entries.append((PauliWord(tags), coeff, residual / coeff))
    if abs(total - 1.0) > 1e-8:
        raise ValueError(
            "state does not factor over the declared fault pattern "
            f"(recovered coefficient mass {total})"
        )
    return AdversarialDecomposition(
        tuple(slots), tuple(entries), fault, c, schedule
    )


def reassemble_decomposition(decomp: AdversarialDecomposition) -> np.ndarray:
    """Rebuild the normalized fault-pattern state from its decomposition."""
    c = decomp.circuit
    fault = decomp.fault
    layout = GridLayout(c.n, c.depth)
    faulted = _faulted_gates(c, fault)
    faulted_keys = {(layer, g.wires) for layer, g in faulted}
    frame: list[tuple[np.ndarray, list[int]]] = []
    for wire in range(c.a):
        if wire not in fault.inputs:
            frame.append((_basis1q(0), [layout.input_qubit(wire)]))
    for layer_idx, layer in enumerate(c.layers, start=1):
        for g in layer:
            if (layer_idx, g.wires) not in faulted_keys:
                frame.append(choi_factor(g, layer_idx, layout))

    groups: list[dict[tuple[str, ...], tuple[np.ndarray, list[int]]]] = []
    widths: list[int] = []
    for wire in sorted(fault.inputs):
        q = layout.input_qubit(wire)
        groups.append(
            {("I",): (_basis1q(0), [q]), ("X",): (_basis1q(1), [q])}
        )
        widths.append(1)
    for layer_idx, g in faulted:
        table = {
            word: (vec, qubits)
            for word, vec, qubits in _gate_error_basis(g, layer_idx, layout)
        }
        groups.append(table)
        widths.append(g.arity)

    witness_qubits = [
        layout.input_qubit(row) for row in reversed(range(c.a, c.n))
    ]
    amps = np.zeros(2**layout.num_qubits, dtype=np.complex128)
    for word, coeff, xi in decomp.entries:
        tags = tuple(word)
        factors = list(frame)
        pos = 0
        for width, table in zip(widths, groups):
            factors.append(table[tags[pos : pos + width]])
            pos += width
        scale = coeff
        if witness_qubits:
            factors.append((xi, witness_qubits))
        else:
            scale = coeff * complex(xi[0])
        amps = amps + scale * product_state(factors, layout.num_qubits)

    schedule = decomp.delta_per_layer
    for layer, row in layout.sites():
        lo, hi = layout.site_qubits(layer, row)
        amps = apply_matrix(
            amps, q_matrix(schedule[layer - 1]), (hi, lo), layout.num_qubits
        )
    return amps / np.linalg.norm(amps)


def _bell_frame(
    amps: np.ndarray, layout: GridLayout, adjoint: bool = False
) -> np.ndarray:
    """Rotate every site pair into (or out of) the Bell index basis."""
    b = bell_basis_matrix()
    mat = b if adjoint else b.conj().T
    out = amps
    for layer, row in layout.sites():
        lo, hi = layout.site_qubits(layer, row)
        out = apply_matrix(out, mat, (hi, lo), layout.num_qubits)
    return out


def _grid_state_parts(state) -> tuple[GridLayout, np.ndarray, tuple]:
    layout = state.layout
    schedule = state.delta_per_layer
    if schedule is None or getattr(state, "is_base", False):
        raise ValueError(
            "expected a normalized grid state with its pair maps applied"
        )
    return layout, state.amplitudes, schedule


def _resolve_region(layout: GridLayout, region) -> list[tuple[int, int]]:
    all_sites = list(layout.sites())
    if region is None:
        return all_sites
    chosen = [(int(layer), int(row)) for layer, row in region]
    known = set(all_sites)
    for site in chosen:
        if site not in known:
            raise ValueError(f"site {site} is outside the grid")
    return chosen


def binomial_tail(rates, threshold: int) -> float:
    """P[X >= threshold] for a sum of independent Bernoulli variables.

    Exact, by convolving the per-site distributions; with equal rates this
    is the plain binomial tail.
    """
    dist = np.array([1.0])
    for r in rates:
        r = float(r)
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {r}")
        dist = np.convolve(dist, [1.0 - r, r])
    if threshold <= 0:
        return 1.0
    if threshold >= dist.size:
        return 0.0
    return float(dist[threshold:].sum())


def site_rate(delta: float) -> float:
    """Non-identity Bell tag probability of one pair, 3 delta^2/(1+3 delta^2)."""
    return 3.0 * delta**2 / (1.0 + 3.0 * delta**2)


def high_weight_mass(
    state, threshold: int, region=None
) -> tuple[float, float]:
    """Bell-frame mass at tag weight >= ``threshold`` over ``region`` sites.

    Accepts any normalized grid state carrying its schedule (a PepsState
    after the pair maps, or a CombinatorialState). Also returns the exact
    independent-site reference tail: fault-free states match it to float
    precision because their per-site tag marginals are independent with
    non-identity rate ``site_rate(delta)``, whatever the circuit and the
    witness.
    """
    layout, amps, schedule = _grid_state_parts(state)
    sites = _resolve_region(layout, region)
    rotated = _bell_frame(amps, layout)
    probs = np.abs(rotated) ** 2
    idx = np.arange(probs.size)
    weights = np.zeros(probs.size, dtype=np.int64)
    for layer, row in sites:
        lo, _ = layout.site_qubits(layer, row)
        weights += (((idx >> lo) & 3) != 0).astype(np.int64)
    mass = float(probs[weights >= threshold].sum())
    reference = binomial_tail(
        [site_rate(schedule[layer - 1]) for layer, _ in sites], threshold
    )
    return mass, reference


@dataclass(frozen=True)
class TruncationResult:
    """A renormalized state with its high-weight words removed."""

    amplitudes: np.ndarray
    removed_mass: float


def truncate_high_weight(
    state, threshold: int, region=None
) -> TruncationResult:
    """Project out Bell-frame words of weight >= ``threshold``, renormalize.

    The removed mass bounds how much any observable can move: for pure
    states the fidelity with the original is exactly 1 minus the removed
    mass, so trace distances of reduced states stay below its square root.
    """
    layout, amps, _ = _grid_state_parts(state)
    sites = _resolve_region(layout, region)
    rotated = _bell_frame(amps, layout)
    idx = np.arange(rotated.size)
    weights = np.zeros(rotated.size, dtype=np.int64)
    for layer, row in sites:
        lo, _ = layout.site_qubits(layer, row)
        weights += (((idx >> lo) & 3) != 0).astype(np.int64)
    kept = rotated.copy()
    kept[weights >= threshold] = 0.0
    kept_mass = float(np.linalg.norm(kept) ** 2)
    if kept_mass < 1e-30:
        raise ValueError("truncation removed the whole state")
    back = _bell_frame(kept, layout, adjoint=True)
    return TruncationResult(back / np.sqrt(kept_mass), 1.0 - kept_mass)


def ground_space_characterization(u, delta: float) -> np.ndarray:
    """Closed-form orthonormal kernel basis of a single-wire bulk term.

    The kernel of the dressed hole on two pairs is spanned, over
    single-qubit matrices M, by

        sum over tag pairs (P, R) of
        delta^(|P| + |R|) Tr[M R U P] (Bell_P left pair)(Bell_R right pair)

    with the left tag acting before the gate and the right tag after it.
    Columns are orthonormal over 4 qubits with the left pair on the low
    bits, matching the dense block of the corresponding term.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError(f"expected a one-qubit unitary, got shape {u.shape}")
    b = bell_basis_matrix()
    weights = np.array([1.0, delta, delta, delta])
    columns = []
    for r_idx in range(2):
        for s_idx in range(2):
            m = np.zeros((2, 2), dtype=np.complex128)
            m[r_idx, s_idx] = 1.0
            vec = np.zeros(16, dtype=np.complex128)
            for i, p_tag in enumerate(PAULI_TAGS):
                for j, r_tag in enumerate(PAULI_TAGS):
                    coeff = np.trace(
                        m @ pauli_matrix(r_tag) @ u @ pauli_matrix(p_tag)
                    )
                    if abs(coeff) < 1e-15:
                        continue
                    pair = np.kron(b[:, j], b[:, i])
                    vec += weights[i] * weights[j] * coeff * pair
            columns.append(vec)
    basis = np.column_stack(columns)
    q, rmat = np.linalg.qr(basis)
    keep = np.abs(np.diag(rmat)) > 1e-9
    if int(keep.sum()) != 4:
        raise ValueError(
            f"characterization span has rank {int(keep.sum())}, expected 4"
        )
    return np.ascontiguousarray(q[:, keep])


@dataclass(frozen=True)
class IndistinguishabilityResult:
    """Overlap of two single-wire bulk ground spaces against its ceiling."""

    overlap: float
    bound: float
    holds: bool
    characterization_residual: float


def local_indistinguishability_experiment(
    u1, u2, delta: float
) -> IndistinguishabilityResult:
    """Largest principal cosine between the kernels of two bulk terms.

    Both kernels are computed twice, numerically from the dense terms and
    in closed form from ``ground_space_characterization``; the worst
    subspace disagreement is reported as the residual. The ceiling
    1 - delta^6/2 is the claimed separation for checks that differ by a
    single-qubit phase flip, meaningful for delta below one quarter.
    """
    layout = GridLayout(1, 2)
    bases = []
    residual = 0.0
    for u in (np.asarray(u1), np.asarray(u2)):
        term = propagation_term(
            Gate(wires=(0,), unitary=u, name=None),
            1,
            (delta, delta),
            layout,
        )
        eigs, vecs = np.linalg.eigh(term.block)
        kernel = np.ascontiguousarray(vecs[:, eigs < 1e-9])
        if kernel.shape[1] != 4:
            raise ValueError(
                f"bulk kernel has dimension {kernel.shape[1]}, expected 4"
            )
        closed = ground_space_characterization(u, delta)
        gap = np.linalg.norm(
            kernel @ kernel.conj().T - closed @ closed.conj().T, 2
        )
        residual = max(residual, float(gap))
        bases.append(kernel)
    sing = np.linalg.svd(bases[0].conj().T @ bases[1], compute_uv=False)
    overlap = float(sing[0])
    bound = 1.0 - delta**6 / 2.0
    return IndistinguishabilityResult(
        overlap=overlap,
        bound=bound,
        holds=bool(overlap <= bound + 1e-12),
        characterization_residual=residual,
    )


@dataclass(frozen=True)
class LemmaRecord:
    """One evaluated hypothesis/conclusion pair of an inequality lemma.

    ``slack`` is oriented so that nonnegative means the conclusion holds;
    hypothesis values are measured from the state, never assumed.
    """

    name: str
    location: tuple
    hypothesis: dict
    lhs: float
    rhs: float
    slack: float
    holds: bool


def _lemma_record(name, location, hypothesis, lhs, rhs) -> LemmaRecord:
    slack = lhs - rhs
    return LemmaRecord(
        name=name,
        location=location,
        hypothesis=hypothesis,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        holds=bool(slack >= -1e-12),
    )


@dataclass(frozen=True)
class LowEnergyReport:
    """Soundness handles of one state: overlaps, energies, lemma records."""

    total_energy: float
    energy_density: float
    site_overlaps: dict
    output_zero_weights: dict
    records: tuple[LemmaRecord, ...]

    @property
    def failures(self) -> tuple[LemmaRecord, ...]:
        return tuple(r for r in self.records if not r.holds)


def _pair_overlap(
    rotated: np.ndarray,
    layout: GridLayout,
    sites,
    schedule,
) -> float:
    """Squared overlap of the rotated state with the product of pair
    ground states on the listed sites."""
    factors = []
    for layer, row in sites:
        lo, hi = layout.site_qubits(layer, row)
        factors.append((phi0(schedule[layer - 1]), [hi, lo]))
    residual = _contract_factors(rotated, factors, layout.num_qubits)
    return float(np.linalg.norm(residual) ** 2)


def low_energy_probe(
    c: LayeredCircuit, deltas, state, tol: float = 1e-9
) -> LowEnergyReport:
    """Measure a state against every locally checkable soundness handle.

    Rotates the state into the product frame and records the per-site
    overlap with the single-pair ground state plus the per-ancilla
    output-column zero weight, then evaluates each applicable inequality
    with its hypothesis values measured from the same state:

    * last column: a trivially gated last-layer row with term energy a has
      final-site overlap at least 1 - 4a;
    * bulk forwarding, for two-wire gates below the last layer at uniform
      neighbouring deltas: right-layer overlap deficit e and term energy a
      give four-site overlap at least 1 - e/delta^8 - a/delta^16;
    * input teleportation, per ancilla wire: first-layer overlap deficit e
      and input-term energy a give output zero weight at least
      1 - (e + a)/delta^2.

    Rows or gates outside a lemma's stated shape are skipped, not forced.
    """
    c = pad_identities(c)
    _require_valid(c)
    schedule = resolve_deltas(deltas, c.depth)
    layout = GridLayout(c.n, c.depth)
    vec = state.amplitudes if hasattr(state, "amplitudes") else state
    vec = np.asarray(vec, dtype=np.complex128)
    spec = parent_spec(c, schedule)
    report = energy(spec, vec, tol)
    rotated = RotationUnitary(c).apply(vec, adjoint=True)

    site_overlaps: dict[tuple[int, int], float] = {}
    for layer, row in layout.sites():
        site_overlaps[(layer, row)] = _pair_overlap(
            rotated, layout, [(layer, row)], schedule
        )
    output_zero_weights: dict[int, float] = {}
    for wire in range(c.a):
        rho = partial_trace(
            rotated, (layout.output_qubit(wire),), layout.num_qubits
        )
        output_zero_weights[wire] = float(np.real(rho[0, 0]))

    by_location: dict[tuple, int] = {}
    for idx, term in enumerate(spec.terms):
        by_location[(term.kind, term.layer, term.wires)] = idx

    records: list[LemmaRecord] = []
    depth = c.depth
    for g in c.layers[depth - 1]:
        if g.arity != 1 or not g.is_trivial:
            continue
        row = g.wires[0]
        alpha = report.per_term[by_location[("propagation", depth, g.wires)]]
        records.append(
            _lemma_record(
                "last_column",
                ("row", row),
                {"alpha": alpha},
                site_overlaps[(depth, row)],
                1.0 - 4.0 * alpha,
            )
        )
    for layer_idx in range(1, depth):
        if abs(schedule[layer_idx - 1] - schedule[layer_idx]) > 1e-12:
            continue
        d = schedule[layer_idx - 1]
        for g in c.layers[layer_idx - 1]:
            if g.arity != 2:
                continue
            i, j = g.wires
            alpha = report.per_term[
                by_location[("propagation", layer_idx, g.wires)]
            ]
            eta = 1.0 - _pair_overlap(
                rotated,
                layout,
                [(layer_idx + 1, i), (layer_idx + 1, j)],
                schedule,
            )
            lhs = _pair_overlap(
                rotated,
                layout,
                [
                    (layer_idx, i),
                    (layer_idx, j),
                    (layer_idx + 1, i),
                    (layer_idx + 1, j),
                ],
                schedule,
            )
            records.append(
                _lemma_record(
                    "bulk_forwarding",
                    ("gate", layer_idx, g.wires),
                    {"eta": eta, "alpha": alpha},
                    lhs,
                    1.0 - eta / d**8 - alpha / d**16,
                )
            )
    d1 = schedule[0]
    for wire in range(c.a):
        alpha = report.per_term[by_location[("input", 1, (wire,))]]
        eta = 1.0 - site_overlaps[(1, wire)]
        records.append(
            _lemma_record(
                "input_teleport",
                ("wire", wire),
                {"eta": eta, "alpha": alpha},
                output_zero_weights[wire],
                1.0 - (eta + alpha) / d1**2,
            )
        )
    return LowEnergyReport(
        total_energy=report.total,
        energy_density=report.density,
        site_overlaps=site_overlaps,
        output_zero_weights=output_zero_weights,
        records=tuple(records),
    )


@dataclass(frozen=True)
class InstanceRecord:
    """One suite instance: parameters, both sides, oriented slack.

    Nonnegative slack means the inequality held; ``holds`` allows a float
    cushion of 1e-12.
    """

    suite: str
    index: int
    parameters: dict
    lhs: float
    rhs: float
    slack: float
    holds: bool


@dataclass(frozen=True)
class SuiteResult:
    """All records of one suite run plus what is needed to replay it."""

    suite: str
    seed: int
    records: tuple[InstanceRecord, ...]

    @property
    def failures(self) -> tuple[InstanceRecord, ...]:
        return tuple(r for r in self.records if not r.holds)

    def manifest(self) -> dict:
        """Replay recipe: suite name, seed, count, and failure indices."""
        return {
            "suite": self.suite,
            "seed": self.seed,
            "instances": len(self.records),
            "failures": [r.index for r in self.failures],
        }


def _record(suite, index, parameters, lhs, rhs, slack) -> InstanceRecord:
    return InstanceRecord(
        suite=suite,
        index=index,
        parameters=parameters,
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        holds=bool(slack >= -1e-12),
    )


def _noncommuting_degree(projectors) -> int:
    worst = 0
    for i, p in enumerate(projectors):
        count = 0
        for j, q in enumerate(projectors):
            if i != j and np.abs(p @ q - q @ p).max() > 1e-10:
                count += 1
        worst = max(worst, count)
    return max(worst, 1)


def _random_projector_family(rng):
    num_qubits = int(rng.integers(3, 6))
    dim = 2**num_qubits
    count = int(rng.integers(2, 6))
    projectors = [
        random_projector(dim, int(rng.integers(1, dim)), rng)
        for _ in range(count)
    ]
    state = random_state(num_qubits, rng)
    return dim, projectors, state


def _detectability_instance(suite, index, rng) -> InstanceRecord:
    dim, projectors, state = _random_projector_family(rng)
    g = _noncommuting_degree(projectors)
    lhs, rhs, _ = detectability_check(projectors, g, state)
    params = {"dim": dim, "terms": len(projectors), "g": g}
    return _record(suite, index, params, lhs, rhs, rhs - lhs)


def _union_bound_instance(suite, index, rng) -> InstanceRecord:
    dim, projectors, state = _random_projector_family(rng)
    lhs, rhs, _ = union_bound_check(projectors, state)
    params = {"dim": dim, "terms": len(projectors)}
    return _record(suite, index, params, lhs, rhs, lhs - rhs)


def _random_psd_with_kernel(dim, rng) -> tuple[np.ndarray, int]:
    kernel = int(rng.integers(1, dim // 2 + 1))
    eigs = np.concatenate(
        [np.zeros(kernel), rng.uniform(0.2, 2.0, size=dim - kernel)]
    )
    v = random_unitary(dim, rng)
    return (v * eigs) @ v.conj().T, kernel


def _geometric_instance(suite, index, rng) -> InstanceRecord:
    dim = 2 ** int(rng.integers(2, 5))
    a, ka = _random_psd_with_kernel(dim, rng)
    b, kb = _random_psd_with_kernel(dim, rng)
    gb = geometric_bound(a, b)
    params = {
        "dim": dim,
        "kernel_a": ka,
        "kernel_b": kb,
        "gamma": gb.gamma,
        "theta": gb.theta,
    }
    return _record(suite, index, params, gb.min_eig, gb.bound, gb.min_eig - gb.bound)


def _jordan_instance(suite, index, rng) -> InstanceRecord:
    dim = int(rng.integers(8, 33))
    p1 = random_projector(dim, int(rng.integers(1, dim)), rng)
    p2 = random_projector(dim, int(rng.integers(1, dim)), rng)
    dec = jordan_angles(p1, p2)
    residual = dec.max_residual
    for side, target in (("left", p1), ("right", p2)):
        residual = max(
            residual, float(np.abs(dec.reconstruct(side) - target).max())
        )
    params = {"dim": dim, "blocks": len(dec.blocks)}
    tol = 1e-9
    return _record(suite, index, params, residual, tol, tol - residual)


_ONE_QUBIT_POOL = ("I", "H", "T", "S", "X", "Z")
_TWO_QUBIT_POOL = ("CNOT", "CZ", "SWAP")


def _random_layer(n, rng, two_qubit_ok=True):
    if n >= 2 and two_qubit_ok and rng.random() < 0.5:
        name = _TWO_QUBIT_POOL[int(rng.integers(len(_TWO_QUBIT_POOL)))]
        return [(name, (0, 1))]
    return [
        (_ONE_QUBIT_POOL[int(rng.integers(len(_ONE_QUBIT_POOL)))], (w,))
        for w in range(n)
    ]


def _noisy_ground(c, delta, rng):
    """A ground vector of the unpenalized spec plus a random push."""
    xi = random_state(c.n - c.a, rng) if c.a < c.n else None
    ground = build_peps(c, delta, xi=xi)
    epsilon = float(10.0 ** rng.uniform(-6.0, -0.5))
    push = random_state(c.n * (2 * c.depth + 1), rng)
    vec = ground.amplitudes + epsilon * push
    return vec / np.linalg.norm(vec), epsilon


def _last_column_instance(suite, index, rng) -> InstanceRecord:
    n = int(rng.integers(1, 3))
    depth = int(rng.integers(1, 3))
    a = int(rng.integers(0, n + 1))
    delta = float(rng.uniform(0.3, 0.95))
    specs = [_random_layer(n, rng) for _ in range(depth - 1)]
    specs.append([("I", (w,)) for w in range(n)])
    c = layered(n, a, specs)
    vec, epsilon = _noisy_ground(c, delta, rng)
    probe = low_energy_probe(c, delta, vec)
    row = int(rng.integers(n))
    rec = next(
        r
        for r in probe.records
        if r.name == "last_column" and r.location == ("row", row)
    )
    params = {
        "n": n,
        "a": a,
        "depth": depth,
        "delta": delta,
        "epsilon": epsilon,
        "row": row,
        "alpha": rec.hypothesis["alpha"],
    }
    return _record(suite, index, params, rec.lhs, rec.rhs, rec.slack)


def _bulk_forwarding_instance(suite, index, rng) -> InstanceRecord:
    n, depth = 2, 2
    a = int(rng.integers(0, 3))
    delta = float(rng.uniform(0.5, 0.95))
    if rng.random() < 0.5:
        first = [
            (
                _TWO_QUBIT_POOL[int(rng.integers(len(_TWO_QUBIT_POOL)))],
                (0, 1),
            )
        ]
        gate_label = first[0][0]
    else:
        first = [(random_unitary(4, rng), (0, 1))]
        gate_label = "haar"
    c = layered(n, a, [first, [("I", (0,)), ("I", (1,))]])
    vec, epsilon = _noisy_ground(c, delta, rng)
    probe = low_energy_probe(c, delta, vec)
    rec = next(r for r in probe.records if r.name == "bulk_forwarding")
    params = {
        "a": a,
        "delta": delta,
        "epsilon": epsilon,
        "gate": gate_label,
        "eta": rec.hypothesis["eta"],
        "alpha": rec.hypothesis["alpha"],
    }
    return _record(suite, index, params, rec.lhs, rec.rhs, rec.slack)


def _input_teleport_instance(suite, index, rng) -> InstanceRecord:
    n = int(rng.integers(1, 3))
    depth = int(rng.integers(1, 3))
    a = int(rng.integers(1, n + 1))
    delta = float(rng.uniform(0.3, 0.95))
    specs = [_random_layer(n, rng) for _ in range(depth)]
    c = layered(n, a, specs)
    vec, epsilon = _noisy_ground(c, delta, rng)
    probe = low_energy_probe(c, delta, vec)
    wire = int(rng.integers(a))
    rec = next(
        r
        for r in probe.records
        if r.name == "input_teleport" and r.location == ("wire", wire)
    )
    params = {
        "n": n,
        "a": a,
        "depth": depth,
        "delta": delta,
        "epsilon": epsilon,
        "wire": wire,
        "eta": rec.hypothesis["eta"],
        "alpha": rec.hypothesis["alpha"],
    }
    return _record(suite, index, params, rec.lhs, rec.rhs, rec.slack)


_SUITES = {
    "detectability": (1, _detectability_instance),
    "union_bound": (2, _union_bound_instance),
    "geometric": (3, _geometric_instance),
    "jordan": (4, _jordan_instance),
    "robust_last_column": (5, _last_column_instance),
    "robust_bulk_forwarding": (6, _bulk_forwarding_instance),
    "robust_input_teleport": (7, _input_teleport_instance),
}

SUITE_NAMES = tuple(_SUITES)


def _worker_count(explicit=None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("CLOCKLESS_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run_suite(
    name: str, instances: int = 200, seed: int = 0, max_workers=None
) -> SuiteResult:
    """Run one named inequality suite over seeded random instances.

    Instance ``i`` derives its generator from (seed, suite salt, i), so
    any single row can be replayed in isolation; results are merged in
    index order regardless of how many workers ran them. Worker count
    falls back to the CLOCKLESS_THREADS environment variable.
    """
    try:
        salt, fn = _SUITES[name]
    except KeyError:
        raise ValueError(
            f"unknown suite {name!r}; known: {sorted(_SUITES)}"
        ) from None

    def one(index: int) -> InstanceRecord:
        rng = np.random.default_rng((seed, salt, index))
        return fn(name, index, rng)

    workers = _worker_count(max_workers)
    if workers == 1 or instances <= 1:
        records = [one(i) for i in range(instances)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, range(instances)))
    return SuiteResult(name, seed, tuple(records))


def replay_instance(name: str, seed: int, index: int) -> InstanceRecord:
    """Recompute one suite row from its manifest coordinates."""
    salt, fn = _SUITES[name]
    rng = np.random.default_rng((seed, salt, index))
    return fn(name, index, rng)
