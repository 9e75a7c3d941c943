"""Sparse exact simulator for few-term multiqubit pure states.

Every state this package manipulates (carrier states, attack ancillas,
decoy qubits) is a superposition of at most a handful of computational
basis strings, and the only gate in play is CNOT, which permutes basis
strings.  States are therefore stored as a map from basis string, packed
into an int with qubit 0 in the least significant bit, to complex
amplitude.  Gate and measurement cost scales with the number of nonzero
terms rather than 2**n, so the number of participants can grow without
exponential cost.

Measurements follow the Born rule and collapse in place: a Z measurement
keeps the matching terms, an X measurement projects the measured qubit
onto |+> or |-> (which stays inside the sparse representation, at the
price of one extra term per projected qubit).  Randomness always comes
from an injected generator exposing ``random() -> float in [0, 1)``.

The dense brute-force reference used to cross-check this module lives in
:mod:`qexam.dense`.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ResourceLimitError

__all__ = [
    "Basis",
    "MeasurementOutcome",
    "PureState",
    "prepare_phi",
    "prepare_decoy",
    "tensor",
    "apply_cnot",
    "measure",
    "measure_all",
    "reduced_density",
    "states_equal",
    "discard_qubit",
    "dense_oracle",
    "maximally_mixed",
]

SQRT_HALF = math.sqrt(0.5)
PRUNE_EPS = 1e-15   # stored amplitudes below this magnitude are dropped
NORM_TOL = 1e-12    # allowed drift of sum |amplitude|^2 from 1
DENSE_MAX_QUBITS = 20


class Basis(Enum):
    """Measurement basis: Z is {|0>,|1>}, X is {|+>,|->}."""

    Z = "Bz"
    X = "Bx"


class MeasurementOutcome(NamedTuple):
    """One measurement result; ``value`` is 0/1 for Z and +1/-1 for X."""

    basis: Basis
    value: int


class PureState:
    """Normalized sparse pure state of ``num_qubits`` qubits.

    ``terms`` maps packed basis strings to amplitudes.  Instances are
    treated as immutable: every operation returns a new state.
    """

    __slots__ = ("num_qubits", "terms")

    def __init__(self, num_qubits: int, terms: dict[int, complex]):
        if num_qubits < 1:
            raise ValueError("a state needs at least one qubit")
        pruned = {key: complex(amp) for key, amp in terms.items() if abs(amp) >= PRUNE_EPS}
        if not pruned:
            raise ValueError("state has no amplitude left after pruning")
        limit = 1 << num_qubits
        for key in pruned:
            if not 0 <= key < limit:
                raise ValueError(f"basis string {key} does not fit in {num_qubits} qubits")
        norm_sq = sum(amp.real * amp.real + amp.imag * amp.imag for amp in pruned.values())
        if abs(norm_sq - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized (sum |amp|^2 = {norm_sq!r})")
        self.num_qubits = num_qubits
        self.terms = pruned

    @classmethod
    def _unsafe(cls, num_qubits: int, terms: dict[int, complex]) -> "PureState":
        # Internal fast path: caller guarantees pruning, range and norm.
        state = object.__new__(cls)
        state.num_qubits = num_qubits
        state.terms = terms
        return state

    @classmethod
    def from_bits(cls, bits: Sequence[int] | str) -> "PureState":
        """Basis state |bits>, qubit 0 first."""
        values = [int(b) for b in bits]
        if any(b not in (0, 1) for b in values):
            raise ValueError("bits must be 0 or 1")
        return cls(len(values), {pack_bits(values): 1.0 + 0.0j})

    def norm_squared(self) -> float:
        return sum(a.real * a.real + a.imag * a.imag for a in self.terms.values())

    def num_terms(self) -> int:
        return len(self.terms)

    def amplitude(self, bits: Sequence[int] | str) -> complex:
        """Amplitude of the basis string ``bits`` (qubit 0 first)."""
        values = [int(b) for b in bits]
        if len(values) != self.num_qubits:
            raise ValueError("bit string length does not match qubit count")
        return self.terms.get(pack_bits(values), 0.0 + 0.0j)

    def bitstrings(self) -> dict[str, complex]:
        """Terms keyed by bit string with qubit 0 leftmost."""
        return {format_key(key, self.num_qubits): amp for key, amp in sorted(self.terms.items())}

    def __repr__(self) -> str:
        parts = ", ".join(
            f"|{format_key(key, self.num_qubits)}>: {amp:.6g}" for key, amp in sorted(self.terms.items())
        )
        return f"PureState({self.num_qubits} qubits, {{{parts}}})"


def pack_bits(bits: Iterable[int]) -> int:
    """Pack a bit sequence (qubit 0 first) into an int key."""
    key = 0
    for index, bit in enumerate(bits):
        if bit:
            key |= 1 << index
    return key


def format_key(key: int, num_qubits: int) -> str:
    """Render an int key as a bit string with qubit 0 leftmost."""
    return "".join("1" if key >> i & 1 else "0" for i in range(num_qubits))


def prepare_phi(s: Sequence[int]) -> PureState:
    """Carrier state over N+1 qubits for the secret vector ``s``.

    Qubit 0 is the collector's qubit; qubit n (1-based) goes to
    participant n.  The state is an equal superposition of |0 s1..sN>
    and |1 ~s1..~sN>.
    """
    bits = [int(b) for b in s]
    if not bits:
        raise ValueError("the secret vector must have at least one bit")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("secret bits must be 0 or 1")
    n = len(bits) + 1
    key0 = 0
    for index, bit in enumerate(bits):
        if bit:
            key0 |= 1 << (index + 1)
    key1 = ~key0 & ((1 << n) - 1)
    return PureState._unsafe(n, {key0: SQRT_HALF + 0.0j, key1: SQRT_HALF + 0.0j})


def prepare_decoy(sign: int) -> PureState:
    """Single check qubit |+> for sign +1 or |-> for sign -1."""
    if sign == 1:
        return PureState._unsafe(1, {0: SQRT_HALF + 0.0j, 1: SQRT_HALF + 0.0j})
    if sign == -1:
        return PureState._unsafe(1, {0: SQRT_HALF + 0.0j, 1: -SQRT_HALF + 0.0j})
    raise ValueError(f"decoy sign must be +1 or -1, got {sign!r}")


def tensor(a: PureState, b: PureState) -> PureState:
    """Tensor product; ``b``'s qubits are appended after ``a``'s."""
    shift = a.num_qubits
    terms: dict[int, complex] = {}
    for key_b, amp_b in b.terms.items():
        high = key_b << shift
        for key_a, amp_a in a.terms.items():
            terms[high | key_a] = amp_a * amp_b
    return PureState._unsafe(a.num_qubits + b.num_qubits, terms)


def _check_qubit(state: PureState, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")


def apply_cnot(state: PureState, control: int, target: int) -> PureState:
    """CNOT with the given control and target; flips the target bit where the control bit is 1."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    cbit = 1 << control
    tbit = 1 << target
    terms = {(key ^ tbit if key & cbit else key): amp for key, amp in state.terms.items()}
    return PureState._unsafe(state.num_qubits, terms)


def _measure_z_terms(terms: dict[int, complex], qubit: int, rng) -> tuple[int, dict[int, complex]]:
    bit = 1 << qubit
    p_one = 0.0
    for key, amp in terms.items():
        if key & bit:
            p_one += amp.real * amp.real + amp.imag * amp.imag
    outcome = 1 if rng.random() < p_one else 0
    prob = p_one if outcome else 1.0 - p_one
    scale = 1.0 / math.sqrt(prob)
    want = bit if outcome else 0
    collapsed = {key: amp * scale for key, amp in terms.items() if key & bit == want}
    return outcome, collapsed


def _project_x_terms(terms: dict[int, complex], qubit: int, sign: int) -> dict[int, complex]:
    # Apply |s><s| on `qubit` with s in {+, -}; output expressed in the Z basis.
    bit = 1 << qubit
    projected: dict[int, complex] = {}
    for key, amp in terms.items():
        low = key & ~bit
        half = 0.5 * amp
        if sign < 0 and key & bit:
            half = -half
        projected[low] = projected.get(low, 0.0) + half
        high = low | bit
        contrib = half if sign > 0 else -half
        projected[high] = projected.get(high, 0.0) + contrib
    return {key: amp for key, amp in projected.items() if abs(amp) >= PRUNE_EPS}


def _measure_x_terms(terms: dict[int, complex], qubit: int, rng) -> tuple[int, dict[int, complex]]:
    plus = _project_x_terms(terms, qubit, +1)
    p_plus = sum(amp.real * amp.real + amp.imag * amp.imag for amp in plus.values())
    if rng.random() < p_plus:
        outcome, collapsed, prob = 1, plus, p_plus
    else:
        collapsed = _project_x_terms(terms, qubit, -1)
        outcome, prob = -1, 1.0 - p_plus
    scale = 1.0 / math.sqrt(prob)
    return outcome, {key: amp * scale for key, amp in collapsed.items()}


def measure(state: PureState, qubit: int, basis: Basis, rng) -> tuple[MeasurementOutcome, PureState]:
    """Measure one qubit; returns the outcome and the collapsed state.

    The outcome is sampled by the Born rule from ``rng`` (one draw per
    call).  The collapsed state keeps all qubits; the measured one is left
    in the observed eigenstate.
    """
    _check_qubit(state, qubit)
    if basis is Basis.Z:
        value, terms = _measure_z_terms(state.terms, qubit, rng)
    else:
        value, terms = _measure_x_terms(state.terms, qubit, rng)
    return MeasurementOutcome(basis, value), PureState._unsafe(state.num_qubits, terms)


def measure_all(state: PureState, basis: Basis, rng) -> tuple[list[int], PureState]:
    """Measure every qubit in index order; returns outcome values and the final state.

    Equivalent to chaining :func:`measure` over qubits 0..n-1 with the
    same generator, just without intermediate state objects.
    """
    terms = state.terms
    values: list[int] = []
    if basis is Basis.Z:
        for qubit in range(state.num_qubits):
            value, terms = _measure_z_terms(terms, qubit, rng)
            values.append(value)
    else:
        for qubit in range(state.num_qubits):
            value, terms = _measure_x_terms(terms, qubit, rng)
            values.append(value)
    return values, PureState._unsafe(state.num_qubits, terms)


def reduced_density(state: PureState, qubit: int) -> np.ndarray:
    """Single-qubit reduced density matrix (partial trace over the rest)."""
    _check_qubit(state, qubit)
    bit = 1 << qubit
    pairs: dict[int, list[complex]] = {}
    for key, amp in state.terms.items():
        rest = key & ~bit
        slot = pairs.setdefault(rest, [0.0 + 0.0j, 0.0 + 0.0j])
        slot[1 if key & bit else 0] = amp
    rho = np.zeros((2, 2), dtype=complex)
    for a0, a1 in pairs.values():
        rho[0, 0] += a0 * a0.conjugate()
        rho[0, 1] += a0 * a1.conjugate()
        rho[1, 0] += a1 * a0.conjugate()
        rho[1, 1] += a1 * a1.conjugate()
    return rho


def maximally_mixed() -> np.ndarray:
    """The single-qubit state carrying no basis information, identity / 2."""
    return np.eye(2, dtype=complex) / 2.0


def states_equal(a: PureState, b: PureState, tol: float = 1e-12) -> bool:
    """True if the states agree term by term up to one global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different qubit counts")
    ref_key = max(a.terms, key=lambda key: abs(a.terms[key]))
    ref_b = b.terms.get(ref_key)
    if ref_b is None or abs(ref_b) < PRUNE_EPS:
        return False
    phase = ref_b / a.terms[ref_key]
    if abs(abs(phase) - 1.0) > tol:
        return False
    for key in a.terms.keys() | b.terms.keys():
        if abs(a.terms.get(key, 0.0) * phase - b.terms.get(key, 0.0)) > tol:
            return False
    return True


def discard_qubit(state: PureState, qubit: int) -> PureState:
    """Drop a qubit whose value is the same computational bit in every term.

    Used to retire a measured ancilla.  Raises ``ValueError`` if the qubit
    is still in superposition or entangled (its bit varies across terms).
    """
    _check_qubit(state, qubit)
    if state.num_qubits == 1:
        raise ValueError("cannot discard the only qubit")
    bit = 1 << qubit
    values = {1 if key & bit else 0 for key in state.terms}
    if len(values) != 1:
        raise ValueError("qubit is not in a definite computational state; refusing to discard")
    low_mask = bit - 1
    terms = {
        (key & low_mask) | ((key >> 1) & ~low_mask): amp for key, amp in state.terms.items()
    }
    return PureState._unsafe(state.num_qubits - 1, terms)


def dense_oracle(state: PureState) -> np.ndarray:
    """Expand to a dense 2**n amplitude vector (qubit 0 most significant).

    Capped at 20 qubits; beyond that a ``ResourceLimitError`` is raised
    rather than allocating gigabyte vectors.
    """
    n = state.num_qubits
    if n > DENSE_MAX_QUBITS:
        raise ResourceLimitError(f"dense expansion refused for {n} qubits (cap {DENSE_MAX_QUBITS})")
    vector = np.zeros(1 << n, dtype=complex)
    for key, amp in state.terms.items():
        vector[key_to_index(key, n)] = amp
    return vector


def key_to_index(key: int, num_qubits: int) -> int:
    """Convert a packed key (qubit 0 = LSB) to a dense index (qubit 0 = MSB)."""
    index = 0
    for i in range(num_qubits):
        if key >> i & 1:
            index |= 1 << (num_qubits - 1 - i)
    return index


def index_to_key(index: int, num_qubits: int) -> int:
    """Inverse of :func:`key_to_index`."""
    return key_to_index(index, num_qubits)
