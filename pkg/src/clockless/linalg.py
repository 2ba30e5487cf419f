"""Dense state-vector helpers shared across the package.

Conventions, fixed once and used everywhere: a state over N qubits is a numpy
vector of length 2**N with qubit 0 as the least significant bit of the
amplitude index. Operator matrices list their wires most-significant-first,
so ``apply_matrix(psi, CNOT, (0, 1), 2)`` has wire 0 as the control. Nothing
in this module knows about grids, circuits, or Hamiltonians.

All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

__all__ = [
    "apply_matrix",
    "basis_state",
    "bit_placement",
    "density_fidelity",
    "embed_operator",
    "is_hermitian",
    "is_projector",
    "is_psd",
    "is_unitary",
    "overlap",
    "partial_trace",
    "product_state",
    "psd_sqrt",
    "random_projector",
    "random_state",
    "random_unitary",
    "trace_distance",
    "trace_norm",
]

# Dense embeddings above this many qubits would allocate gigabytes; refuse.
_EMBED_QUBIT_CAP = 13


def basis_state(index: int, num_qubits: int) -> np.ndarray:
    """Computational basis vector |index> over ``num_qubits`` qubits."""
    if not 0 <= index < 2**num_qubits:
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    vec = np.zeros(2**num_qubits, dtype=np.complex128)
    vec[index] = 1.0
    return vec


def bit_placement(positions: Sequence[int]) -> np.ndarray:
    """Indices of all bit patterns over the listed bit positions.

    Entry ``i`` spreads the bits of the local index ``i`` (bit ``b`` of ``i``
    goes to global bit ``positions[b]``) and is zero everywhere else. Useful
    for embedding small blocks into larger registers without reshapes.
    """
    local = np.arange(2 ** len(positions), dtype=np.int64)
    out = np.zeros_like(local)
    for b, q in enumerate(positions):
        out += ((local >> b) & 1) << q
    return out


def _check_wires(wires: Sequence[int], num_qubits: int) -> None:
    if len(set(wires)) != len(wires):
        raise ValueError(f"wires must be distinct, got {tuple(wires)}")
    for w in wires:
        if not 0 <= w < num_qubits:
            raise ValueError(f"wire {w} out of range for {num_qubits} qubits")


def apply_matrix(
    state: np.ndarray,
    op: np.ndarray,
    wires: Sequence[int],
    num_qubits: int,
) -> np.ndarray:
    """Apply a k-qubit operator to selected wires of a state vector.

    ``state`` has shape ``(2**num_qubits,)`` or ``(2**num_qubits, batch)``;
    the batch axis, when present, is carried through untouched (this is how
    dense embeddings are produced in one shot). ``wires`` are listed
    most-significant-first with respect to the operator's index convention.
    """
    op = np.asarray(op, dtype=np.complex128)
    k = len(wires)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} wires")
    _check_wires(wires, num_qubits)
    if state.shape[0] != 2**num_qubits:
        raise ValueError(
            f"state length {state.shape[0]} does not match {num_qubits} qubits"
        )
    batched = state.ndim == 2
    work = state if batched else state[:, None]
    batch = work.shape[1]
    tensor = np.asarray(work, dtype=np.complex128).reshape(
        (2,) * num_qubits + (batch,)
    )
    # Axis j of the reshaped tensor corresponds to qubit num_qubits-1-j.
    axes = [num_qubits - 1 - w for w in wires]
    tensor = np.moveaxis(tensor, axes, range(k))
    tail = tensor.shape[k:]
    tensor = (op @ tensor.reshape(2**k, -1)).reshape((2,) * k + tail)
    tensor = np.moveaxis(tensor, range(k), axes)
    out = tensor.reshape(work.shape)
    return out if batched else out[:, 0]


def embed_operator(
    op: np.ndarray, wires: Sequence[int], num_qubits: int
) -> np.ndarray:
    """Dense 2**N x 2**N embedding of ``op`` on ``wires``, identity elsewhere."""
    if num_qubits > _EMBED_QUBIT_CAP:
        raise ValueError(
            f"refusing dense embedding on {num_qubits} qubits "
            f"(cap {_EMBED_QUBIT_CAP})"
        )
    eye = np.eye(2**num_qubits, dtype=np.complex128)
    return apply_matrix(eye, op, wires, num_qubits)


def product_state(
    factors: Iterable[tuple[np.ndarray, Sequence[int]]], num_qubits: int
) -> np.ndarray:
    """Assemble a tensor product of factors living on disjoint qubit sets.

    Each factor is ``(vector, qubits)`` with the qubits listed
    most-significant-first for that factor's own index convention. The qubit
    sets must partition ``range(num_qubits)`` exactly.
    """
    order: list[int] = []
    tensor = np.ones((), dtype=np.complex128)
    for vec, qubits in factors:
        vec = np.asarray(vec, dtype=np.complex128)
        k = len(qubits)
        if vec.shape != (2**k,):
            raise ValueError(
                f"factor on {k} qubits must have length {2**k}, got {vec.shape}"
            )
        tensor = np.multiply.outer(tensor, vec.reshape((2,) * k))
        order.extend(qubits)
    if sorted(order) != list(range(num_qubits)):
        raise ValueError("factor qubit sets must partition the qubit range")
    pos = {q: i for i, q in enumerate(order)}
    perm = [pos[num_qubits - 1 - j] for j in range(num_qubits)]
    return tensor.transpose(perm).reshape(-1)


def partial_trace(
    state: np.ndarray, keep: Sequence[int], num_qubits: int
) -> np.ndarray:
    """Reduced density matrix of a pure state on the ``keep`` qubits.

    The returned matrix indexes ``keep[0]`` as its most significant bit,
    matching the wire convention of apply_matrix.
    """
    keep = list(keep)
    _check_wires(keep, num_qubits)
    psi = np.asarray(state, dtype=np.complex128).reshape((2,) * num_qubits)
    keep_axes = [num_qubits - 1 - q for q in keep]
    traced = [ax for ax in range(num_qubits) if ax not in keep_axes]
    rho = np.tensordot(psi, psi.conj(), axes=(traced, traced))
    remaining = sorted(keep_axes)
    perm = [remaining.index(ax) for ax in keep_axes]
    k = len(keep)
    rho = rho.transpose(perm + [p + k for p in perm])
    return rho.reshape(2**k, 2**k)


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for two state vectors (phase-insensitive)."""
    return float(abs(np.vdot(a, b)))


def random_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector over ``num_qubits`` qubits."""
    dim = 2**num_qubits
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary, QR of a complex Gaussian with phase fixing."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_projector(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Random rank-``rank`` orthogonal projector on a ``dim``-dim space."""
    if not 0 <= rank <= dim:
        raise ValueError(f"rank {rank} out of range for dimension {dim}")
    u = random_unitary(dim, rng)[:, :rank]
    return u @ u.conj().T


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    eye = np.eye(m.shape[0])
    return bool(np.max(np.abs(m.conj().T @ m - eye)) <= tol)


def is_projector(m: np.ndarray, tol: float = 1e-12) -> bool:
    return is_hermitian(m, tol) and bool(np.max(np.abs(m @ m - m)) <= tol)


def is_psd(m: np.ndarray, tol: float = 1e-12) -> bool:
    if not is_hermitian(m, tol):
        return False
    eigs = np.linalg.eigvalsh(m)
    return bool(eigs[0] >= -tol)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Matrix square root of a PSD Hermitian matrix via eigendecomposition."""
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * trace_norm(rho - sigma)


def density_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1 of two density matrices."""
    return trace_norm(psd_sqrt(rho) @ psd_sqrt(sigma))
