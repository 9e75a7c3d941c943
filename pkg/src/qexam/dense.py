"""Dense brute-force reference for cross-checking the sparse engine.

Every operation of :mod:`qexam.states` is reimplemented here on full
2**n amplitude vectors with plain numpy array manipulation.  The two
implementations share nothing except the sampling convention (one
``rng.random()`` draw per measured qubit, outcome 1 / +1 when the draw
falls below that outcome's probability), so running both against the
same generator must reproduce identical outcomes and amplitudes.

Vectors are indexed with qubit 0 as the most significant bit, matching
``states.dense_oracle``.  Everything here is test machinery; the
protocol itself never touches dense vectors.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .states import Basis

__all__ = [
    "prepare_phi_dense",
    "prepare_decoy_dense",
    "tensor_dense",
    "apply_cnot_dense",
    "measure_dense",
    "measure_all_dense",
    "reduced_density_dense",
    "discard_qubit_dense",
    "vectors_equal",
]

SQRT_HALF = math.sqrt(0.5)


def prepare_phi_dense(s: Sequence[int]) -> np.ndarray:
    bits = [int(b) for b in s]
    n = len(bits) + 1
    vector = np.zeros(1 << n, dtype=complex)
    index0 = 0
    for position, bit in enumerate([0] + bits):
        if bit:
            index0 |= 1 << (n - 1 - position)
    index1 = ~index0 & ((1 << n) - 1)
    vector[index0] = SQRT_HALF
    vector[index1] = SQRT_HALF
    return vector


def prepare_decoy_dense(sign: int) -> np.ndarray:
    return np.array([SQRT_HALF, sign * SQRT_HALF], dtype=complex)


def tensor_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Qubit 0 is the MSB, so the left factor occupies the high bits.
    return np.kron(a, b)


def _as_grid(vector: np.ndarray, n: int) -> np.ndarray:
    return vector.reshape([2] * n)


def apply_cnot_dense(vector: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    grid = _as_grid(vector, n)
    out = grid.copy()
    sel10 = [slice(None)] * n
    sel11 = [slice(None)] * n
    sel10[control] = sel11[control] = 1
    sel10[target], sel11[target] = 0, 1
    out[tuple(sel10)] = grid[tuple(sel11)]
    out[tuple(sel11)] = grid[tuple(sel10)]
    return out.reshape(-1)


def measure_dense(vector: np.ndarray, n: int, qubit: int, basis: Basis, rng) -> tuple[int, np.ndarray]:
    grid = _as_grid(vector, n)
    sel0 = [slice(None)] * n
    sel1 = [slice(None)] * n
    sel0[qubit], sel1[qubit] = 0, 1
    v0, v1 = grid[tuple(sel0)], grid[tuple(sel1)]
    out = np.zeros_like(grid)
    if basis is Basis.Z:
        p_one = float(np.sum(np.abs(v1) ** 2))
        value = 1 if rng.random() < p_one else 0
        prob = p_one if value else 1.0 - p_one
        scale = 1.0 / math.sqrt(prob)
        if value:
            out[tuple(sel1)] = v1 * scale
        else:
            out[tuple(sel0)] = v0 * scale
        return value, out.reshape(-1)
    plus = (v0 + v1) * SQRT_HALF
    p_plus = float(np.sum(np.abs(plus) ** 2))
    if rng.random() < p_plus:
        value, branch, prob = 1, plus, p_plus
    else:
        value, branch, prob = -1, (v0 - v1) * SQRT_HALF, 1.0 - p_plus
    scale = SQRT_HALF / math.sqrt(prob)
    out[tuple(sel0)] = branch * scale
    out[tuple(sel1)] = value * branch * scale
    return value, out.reshape(-1)


def measure_all_dense(vector: np.ndarray, n: int, basis: Basis, rng) -> tuple[list[int], np.ndarray]:
    values = []
    for qubit in range(n):
        value, vector = measure_dense(vector, n, qubit, basis, rng)
        values.append(value)
    return values, vector


def reduced_density_dense(vector: np.ndarray, n: int, qubit: int) -> np.ndarray:
    grid = np.moveaxis(_as_grid(vector, n), qubit, 0).reshape(2, -1)
    return grid @ grid.conj().T


def discard_qubit_dense(vector: np.ndarray, n: int, qubit: int) -> np.ndarray:
    grid = np.moveaxis(_as_grid(vector, n), qubit, 0).reshape(2, -1)
    weights = np.sum(np.abs(grid) ** 2, axis=1)
    if min(weights) > 1e-18:
        raise ValueError("qubit is not in a definite computational state; refusing to discard")
    keep = int(np.argmax(weights))
    shape = [2] * n
    del shape[0]
    return grid[keep].reshape(-1)


def vectors_equal(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """Term-by-term equality up to one global phase."""
    if a.shape != b.shape:
        return False
    ref = int(np.argmax(np.abs(a)))
    if abs(b[ref]) < 1e-15:
        return False
    phase = b[ref] / a[ref]
    if abs(abs(phase) - 1.0) > tol:
        return False
    return bool(np.all(np.abs(a * phase - b) <= tol))
