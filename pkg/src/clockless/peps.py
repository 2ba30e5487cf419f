"""The injective grid state: construction, expansion, marginals, sampling.

Geometry: a circuit with n wires and D layers lives on an n x (2D+1) grid of
qubits, row-major, qubit_index(row, col) = row*(2D+1) + col, with qubit 0 the
least significant amplitude bit. Column 0 holds the input |0^a> (x) |xi>.
Layer l (1-based) contributes one Choi state per gate on columns (2l-1, 2l)
and one perturbed pair per row on columns (2l-2, 2l-1); the perturbation Q
at injectivity delta_l is applied on those shifted pairs. Column 2D is the
output column and belongs to no pair.

The central identity, verified wholesale by the expansion round trip: the
built state is proportional to

    sum over Pauli words P of  prod_l delta_l^{|P_l|} |B_P> (x) W_D P_D ... W_1 P_1 |0^a, xi>

with |B_P> the Bell pattern on the shifted pairs and the error factors acting
on the output register before each layer. Two norms are recorded: the
physical l2 norm of the unnormalized state, and the Bell-frame coefficient
sum  sum_P prod delta^(2|P|)  which is 4^(n D) times the squared physical
norm (each Bell contraction contributes a factor 1/2 per site).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuit import LayeredCircuit, apply_circuit, layer_unitary, validate
from .linalg import apply_matrix, embed_operator, is_hermitian, partial_trace, product_state
from .pauli import PAULI_TAGS, PauliWord, bell_state, pauli_matrix, q_matrix

__all__ = [
    "ExpansionResult",
    "GridLayout",
    "PepsState",
    "apply_injective_maps",
    "base_state",
    "build_peps",
    "choi_factor",
    "contract_observable",
    "depolarizing_reference_marginal",
    "expansion",
    "output_marginal",
    "reassemble_expansion",
    "reduced_density",
    "resolve_deltas",
    "sample_pauli_patterns",
]

_ENUMERATION_BUDGET = 4**10


@dataclass(frozen=True)
class GridLayout:
    """Row/column bookkeeping for the n x (2D+1) grid."""

    n: int
    depth: int

    @property
    def columns(self) -> int:
        return 2 * self.depth + 1

    @property
    def num_qubits(self) -> int:
        return self.n * self.columns

    @property
    def num_sites(self) -> int:
        """Number of shifted (perturbed) pairs: one per wire per layer."""
        return self.n * self.depth

    def qubit_index(self, row: int, col: int) -> int:
        if not 0 <= row < self.n:
            raise ValueError(f"row {row} out of range for n={self.n}")
        if not 0 <= col < self.columns:
            raise ValueError(f"column {col} out of range for {self.columns} columns")
        return row * self.columns + col

    def input_qubit(self, row: int) -> int:
        return self.qubit_index(row, 0)

    def output_qubit(self, row: int) -> int:
        return self.qubit_index(row, 2 * self.depth)

    def site_index(self, layer: int, row: int) -> int:
        """Flat index of the shifted pair at (layer, row); layers are 1-based."""
        if not 1 <= layer <= self.depth:
            raise ValueError(f"layer {layer} out of range 1..{self.depth}")
        return (layer - 1) * self.n + row

    def site_qubits(self, layer: int, row: int) -> tuple[int, int]:
        """(lower, higher) qubit of the shifted pair at (layer, row)."""
        lo = self.qubit_index(row, 2 * layer - 2)
        return (lo, lo + 1)

    def sites(self) -> list[tuple[int, int]]:
        """All (layer, row) pairs in flat site order."""
        return [
            (layer, row)
            for layer in range(1, self.depth + 1)
            for row in range(self.n)
        ]

    def choi_qubits(self, layer: int, wire: int) -> tuple[int, int]:
        """(input-side, output-side) qubit of a gate leg at (layer, wire)."""
        lo = self.qubit_index(wire, 2 * layer - 1)
        return (lo, lo + 1)


@dataclass(frozen=True)
class PepsState:
    """A state vector on the grid plus the metadata needed to reason about it.

    ``delta_per_layer`` is None for bare base states that have not been run
    through the injective maps yet. ``norm_before_normalization`` is the
    physical l2 norm of Q^(x nD) applied to the base state;
    ``bell_frame_norm_sq`` is the Bell-frame coefficient sum (see module
    docstring), which equals 4^(nD) times the squared physical norm.
    """

    layout: GridLayout
    amplitudes: np.ndarray
    circuit: LayeredCircuit
    xi: np.ndarray
    delta_per_layer: tuple[float, ...] | None = None
    normalized: bool = True
    is_base: bool = True
    norm_before_normalization: float | None = None
    bell_frame_norm_sq: float | None = None

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.layout.num_qubits,):
            raise ValueError(
                f"amplitude vector length {amps.shape} does not match "
                f"{self.layout.num_qubits} qubits"
            )
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError("state flagged normalized but norm is off by > 1e-12")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def resolve_deltas(deltas, depth: int) -> tuple[float, ...]:
    """Broadcast a scalar delta, or validate a per-layer schedule."""
    if np.isscalar(deltas):
        schedule = (float(deltas),) * depth
    else:
        schedule = tuple(float(d) for d in deltas)
        if len(schedule) != depth:
            raise ValueError(
                f"delta schedule has {len(schedule)} entries for depth {depth}"
            )
    for d in schedule:
        if not 0.0 < d <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {d}")
    return schedule


def _require_valid(c: LayeredCircuit) -> None:
    problems = validate(c)
    if problems:
        listing = "; ".join(str(p) for p in problems)
        raise ValueError(f"invalid circuit: {listing}")


def _resolve_xi(c: LayeredCircuit, xi) -> np.ndarray:
    free = c.n - c.a
    if xi is None:
        out = np.zeros(2**free, dtype=np.complex128)
        out[0] = 1.0
        return out
    out = np.asarray(xi, dtype=np.complex128)
    if out.shape != (2**free,):
        raise ValueError(
            f"witness must have dimension 2^{free} = {2**free}, got {out.shape}"
        )
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("witness state must be unit norm")
    return out


def _input_column_vector(c: LayeredCircuit, xi: np.ndarray) -> np.ndarray:
    """|0^a> (x) |xi> over the n input wires, bit j of the index = wire j."""
    vec = np.zeros(2**c.n, dtype=np.complex128)
    for x in range(xi.shape[0]):
        vec[x << c.a] = xi[x]
    return vec


def choi_factor(g, layer: int, layout: GridLayout) -> tuple[np.ndarray, list[int]]:
    """Choi state (I (x) U)|B_I>^(x k) of one gate, with its qubit list.

    Index layout of the returned vector: the k output-side bits first
    (most significant, ordered like the gate's wires) then the k input-side
    bits in the same wire order.
    """
    k = g.arity
    u = g.unitary
    vec = np.zeros((2**k, 2**k), dtype=np.complex128)
    for x in range(2**k):
        vec[:, x] = u[:, x]
    vec = vec.reshape(-1) / np.sqrt(2.0**k)
    qubits = [layout.choi_qubits(layer, w)[1] for w in g.wires] + [
        layout.choi_qubits(layer, w)[0] for w in g.wires
    ]
    return vec, qubits


def base_state(c: LayeredCircuit, xi=None, deltas=None) -> PepsState:
    """Product of the input column with one Choi state per gate.

    ``xi`` is the witness on wires a..n-1 (bit 0 of its index is wire a);
    defaults to the all-zeros state. ``deltas`` may be attached now or later
    at apply_injective_maps time.
    """
    _require_valid(c)
    xi = _resolve_xi(c, xi)
    layout = GridLayout(c.n, c.depth)
    factors = [
        (
            _input_column_vector(c, xi),
            [layout.input_qubit(row) for row in reversed(range(c.n))],
        )
    ]
    for layer_idx, layer in enumerate(c.layers, start=1):
        for g in layer:
            factors.append(choi_factor(g, layer_idx, layout))
    amps = product_state(factors, layout.num_qubits)
    schedule = None if deltas is None else resolve_deltas(deltas, c.depth)
    return PepsState(layout, amps, c, xi, delta_per_layer=schedule)


def apply_injective_maps(s: PepsState, deltas=None) -> PepsState:
    """Apply Q(delta_l) at every shifted pair, renormalize, record both norms."""
    if not s.is_base:
        raise ValueError("injective maps were already applied to this state")
    if deltas is None:
        if s.delta_per_layer is None:
            raise ValueError("no delta schedule attached and none supplied")
        schedule = s.delta_per_layer
    else:
        schedule = resolve_deltas(deltas, s.layout.depth)
    amps = s.amplitudes
    for layer, row in s.layout.sites():
        lo, hi = s.layout.site_qubits(layer, row)
        amps = apply_matrix(
            amps, q_matrix(schedule[layer - 1]), (hi, lo), s.layout.num_qubits
        )
    norm = float(np.linalg.norm(amps))
    return PepsState(
        s.layout,
        amps / norm,
        s.circuit,
        s.xi,
        delta_per_layer=schedule,
        normalized=True,
        is_base=False,
        norm_before_normalization=norm,
        bell_frame_norm_sq=norm**2 * 4.0**s.layout.num_sites,
    )


def build_peps(c: LayeredCircuit, deltas, xi=None) -> PepsState:
    """base_state followed by apply_injective_maps, in one call."""
    return apply_injective_maps(base_state(c, xi=xi, deltas=deltas))


@dataclass(frozen=True)
class ExpansionResult:
    """Pauli-word expansion: word -> (coefficient, output-register state).

    Coefficients are prod_l delta_l^(weight at layer l); the output states
    are unit vectors on the n circuit wires. ``truncation_bound`` upper
    bounds the Bell-frame coefficient mass of all words dropped by a weight
    cutoff (zero when the enumeration was exhaustive).
    """

    terms: dict[PauliWord, tuple[float, np.ndarray]]
    truncation_bound: float
    deltas: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __getitem__(self, word: PauliWord) -> tuple[float, np.ndarray]:
        return self.terms[word]


def _words_up_to_weight(num_sites: int, max_weight: int):
    nontrivial = [t for t in PAULI_TAGS if t != "I"]
    for weight in range(max_weight + 1):
        for positions in itertools.combinations(range(num_sites), weight):
            for tags in itertools.product(nontrivial, repeat=weight):
                entries = ["I"] * num_sites
                for pos, tag in zip(positions, tags):
                    entries[pos] = tag
                yield tuple(entries)


def expansion(c: LayeredCircuit, xi, deltas, max_weight: int | None = None) -> ExpansionResult:
    """Enumerate the Pauli-word expansion of the grid state.

    With ``max_weight`` set, only words up to that weight are produced and
    the dropped coefficient mass is bounded by a binomial tail; otherwise the
    full 4^(nD) enumeration runs, guarded by a fixed budget.
    """
    _require_valid(c)
    xi = _resolve_xi(c, xi)
    schedule = resolve_deltas(deltas, c.depth)
    layout = GridLayout(c.n, c.depth)
    num_sites = layout.num_sites
    if max_weight is None:
        if 4**num_sites > _ENUMERATION_BUDGET:
            raise ValueError(
                f"4^{num_sites} words exceed the enumeration budget; "
                "pass max_weight to truncate"
            )
        words = itertools.product(PAULI_TAGS, repeat=num_sites)
        truncation = 0.0
    else:
        words = _words_up_to_weight(num_sites, max_weight)
        dmax = max(schedule) ** 2
        truncation = sum(
            math.comb(num_sites, w) * (3.0 * dmax) ** w
            for w in range(max_weight + 1, num_sites + 1)
        )

    input_vec = _input_column_vector(c, xi)
    terms: dict[PauliWord, tuple[float, np.ndarray]] = {}
    for entries in words:
        word = PauliWord(tuple(entries))
        coeff = 1.0
        for layer in range(1, c.depth + 1):
            layer_weight = sum(
                1
                for row in range(c.n)
                if entries[layout.site_index(layer, row)] != "I"
            )
            coeff *= schedule[layer - 1] ** layer_weight
        state = input_vec
        for layer in range(1, c.depth + 1):
            for row in range(c.n):
                tag = entries[layout.site_index(layer, row)]
                if tag != "I":
                    state = apply_matrix(state, pauli_matrix(tag), (row,), c.n)
            state = layer_unitary(c, layer - 1).apply(state)
        terms[word] = (coeff, state)
    return ExpansionResult(terms, truncation, schedule)


def reassemble_expansion(c: LayeredCircuit, result: ExpansionResult) -> np.ndarray:
    """Rebuild sum coeff * |B_P> (x) |output> on the grid (unnormalized)."""
    layout = GridLayout(c.n, c.depth)
    total = np.zeros(2**layout.num_qubits, dtype=np.complex128)
    for word, (coeff, out_state) in result.terms.items():
        factors = []
        for flat, (layer, row) in enumerate(layout.sites()):
            lo, hi = layout.site_qubits(layer, row)
            factors.append((bell_state(word.entries[flat]), (hi, lo)))
        factors.append(
            (out_state, [layout.output_qubit(row) for row in reversed(range(c.n))])
        )
        total += coeff * product_state(factors, layout.num_qubits)
    return total


def reduced_density(s: PepsState, sites) -> np.ndarray:
    """Reduced density matrix on up to 6 grid qubits; sites[0] is the MSB."""
    sites = list(sites)
    if len(sites) > 6:
        raise ValueError(f"reduced_density supports at most 6 qubits, got {len(sites)}")
    rho = partial_trace(s.amplitudes, sites, s.layout.num_qubits)
    return rho / np.trace(rho).real


def output_marginal(s: PepsState) -> np.ndarray:
    """Output-column density matrix with bit j of the index = wire j."""
    qubits = [s.layout.output_qubit(row) for row in reversed(range(s.layout.n))]
    rho = partial_trace(s.amplitudes, qubits, s.layout.num_qubits)
    return rho / np.trace(rho).real


def contract_observable(s: PepsState, obs: np.ndarray, support) -> float:
    """Normalized expectation value of a Hermitian observable on few qubits."""
    obs = np.asarray(obs, dtype=np.complex128)
    support = list(support)
    if obs.shape != (2 ** len(support),) * 2:
        raise ValueError("observable shape does not match its support")
    if not is_hermitian(obs, tol=1e-12):
        raise ValueError("observable must be Hermitian within 1e-12")
    rho = reduced_density(s, support)
    value = complex(np.trace(rho @ obs))
    if abs(value.imag) > 1e-12:
        raise AssertionError(
            f"expectation of a Hermitian observable came out complex: {value}"
        )
    return float(value.real)


def sample_pauli_patterns(s: PepsState, count: int, seed: int) -> list[PauliWord]:
    """i.i.d. samples of the Bell-basis measurement pattern on all pairs.

    The Bell components of the built state carry unit-norm output factors,
    so the pattern distribution factorizes exactly over sites: each non-I
    tag occurs with probability delta_l^2/(1+3 delta_l^2) at a layer-l site,
    independent of the circuit and the witness. Sampling is keyed by
    (seed, sample index) through a counter-based generator, so any slice of
    the sequence is reproducible in isolation.
    """
    if s.delta_per_layer is None:
        raise ValueError("state carries no delta schedule; build it first")
    if count < 0:
        raise ValueError(f"sample count must be nonnegative, got {count}")
    layout = s.layout
    cumulative = []
    for layer, _row in layout.sites():
        d2 = s.delta_per_layer[layer - 1] ** 2
        norm = 1.0 + 3.0 * d2
        probs = np.array([1.0, d2, d2, d2]) / norm
        cumulative.append(np.cumsum(probs))
    out = []
    for index in range(count):
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
        )
        draws = rng.random(layout.num_sites)
        entries = tuple(
            PAULI_TAGS[int(np.searchsorted(cumulative[site], draws[site]))]
            for site in range(layout.num_sites)
        )
        out.append(PauliWord(entries))
    return out


def depolarizing_reference_marginal(c: LayeredCircuit, xi, deltas) -> np.ndarray:
    """Channel-composition oracle for the output marginal of identity circuits.

    Applies, per layer and per wire, the channel that leaves the state alone
    with probability 1-3p and applies one of X, XZ, Z with probability p
    each, p = delta_l^2/(1+3 delta_l^2). Only meaningful when every gate is
    the identity, so that is enforced.
    """
    _require_valid(c)
    if any(not g.is_trivial for g in c.gates()):
        raise ValueError("the depolarizing reference applies to identity circuits only")
    xi = _resolve_xi(c, xi)
    schedule = resolve_deltas(deltas, c.depth)
    vec = _input_column_vector(c, xi)
    rho = np.outer(vec, vec.conj())
    for delta in schedule:
        p = delta**2 / (1.0 + 3.0 * delta**2)
        for wire in range(c.n):
            kicked = np.zeros_like(rho)
            for tag in ("X", "XZ", "Z"):
                e = embed_operator(pauli_matrix(tag), (wire,), c.n)
                kicked += e @ rho @ e.conj().T
            rho = (1.0 - 3.0 * p) * rho + p * kicked
    return rho
