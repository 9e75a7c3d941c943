"""Dishonest-participant attack: ancilla CNOT tap, key reconstruction, theft.

Participant r taps the distribution channels of participant k and of
himself.  Per carrier state he prepares an ancilla |0>, applies a CNOT
from qubit k and another from qubit r onto it, and reads the ancilla in
Z.  The two CNOTs cancel on the carrier, so nothing any honest check can
see changes, while the ancilla bit equals the XOR of the two hidden
secret bits for that round.  Combining those parities with his own
measured key reveals participant k's key, and with it k's one-time-pad
ciphertext.

The first CNOT can be delegated to an accomplice sitting in k's channel
who forwards the ancilla; :func:`order_operations` renders both
placements as explicit schedules, which are observationally identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InconsistentTranscriptError
from .states import Basis, PureState, apply_cnot, discard_qubit, measure, tensor

__all__ = [
    "AttackConfig",
    "AttackRecord",
    "CnotStep",
    "DecoyTap",
    "attack_round",
    "order_operations",
    "filter_key_parities",
    "reconstruct_target_key",
    "steal_solution",
]

ATTACK_ALL = 1.0


@dataclass(frozen=True)
class AttackConfig:
    """Who attacks whom, and how the taps are placed.

    ``attack_fraction`` is the fraction of transmitted items tapped;
    1.0 means every item (the default, since the attacker cannot tell
    check qubits from carrier qubits anyway).
    """

    attacker: int
    target: int
    charlie_assisted: bool = False
    attack_fraction: float = ATTACK_ALL

    def __post_init__(self) -> None:
        if self.attacker == self.target:
            raise ValueError("attacker and target must be different participants")
        if self.attacker < 1 or self.target < 1:
            raise ValueError("participant indices are 1-based")
        if not 0.0 <= self.attack_fraction <= 1.0:
            raise ValueError("attack_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class CnotStep:
    """One scheduled CNOT onto the ancilla: whose qubit controls it, and where."""

    control: str  # "target" or "attacker"
    site: str


@dataclass
class DecoyTap:
    """A tap that happened to hit an inserted check qubit."""

    bob: int
    position: int
    ancilla_bit: int


@dataclass
class AttackRecord:
    """Everything the attacker accumulates during one protocol execution.

    ``ancilla_bits`` maps round index to the measured parity for rounds
    whose carrier was tapped on both channels.  ``decoy_taps`` lists taps
    that landed on check qubits instead.  Serialized lines carry
    (index, ancilla bit, decoy flag) per tap.
    """

    ancilla_bits: dict[int, int] = field(default_factory=dict)
    decoy_taps: list[DecoyTap] = field(default_factory=list)
    touched_decoys: int = 0
    key_parities: tuple[int, ...] = ()
    reconstructed_key: tuple[int, ...] = ()
    stolen_solution: tuple[int, ...] | None = None

    def to_lines(self) -> list[str]:
        lines = [f"{p} {bit} 0" for p, bit in sorted(self.ancilla_bits.items())]
        lines.extend(f"{tap.position} {tap.ancilla_bit} 1" for tap in self.decoy_taps)
        return lines


def order_operations(config: AttackConfig) -> list[CnotStep]:
    """CNOT schedule for the configured tap placement.

    With an accomplice, the target-controlled CNOT happens in the
    target's channel segment and the ancilla is relayed to the attacker;
    otherwise both CNOTs happen at one tap point.  The gate order is the
    same either way, so the resulting states are identical.
    """
    if config.charlie_assisted:
        return [
            CnotStep("target", f"bob{config.target}-channel"),
            CnotStep("attacker", f"bob{config.attacker}-channel"),
        ]
    return [CnotStep("target", "single-tap"), CnotStep("attacker", "single-tap")]


def attack_round(
    state: PureState,
    target: int,
    attacker: int,
    rng,
    schedule: Sequence[CnotStep] | None = None,
) -> tuple[PureState, int]:
    """Tap one carrier state; returns (carrier unchanged, parity bit).

    Appends an ancilla |0>, applies the scheduled CNOTs controlled by
    qubits ``target`` and ``attacker``, measures the ancilla in Z and
    discards it.  The measured bit equals the XOR of the two secret bits
    for this round, with certainty, and the carrier comes back exactly
    as it went in.
    """
    if target == attacker:
        raise ValueError("attacker and target must be different participants")
    if not (1 <= target < state.num_qubits and 1 <= attacker < state.num_qubits):
        raise ValueError("participant index out of range for this carrier state")
    controls = {"target": target, "attacker": attacker}
    steps = schedule if schedule is not None else order_operations(
        AttackConfig(attacker=attacker, target=target)
    )
    joint = tensor(state, PureState.from_bits([0]))
    ancilla = joint.num_qubits - 1
    for step in steps:
        joint = apply_cnot(joint, controls[step.control], ancilla)
    outcome, joint = measure(joint, ancilla, Basis.Z, rng)
    return discard_qubit(joint, ancilla), outcome.value


def filter_key_parities(
    ancilla_bits: Mapping[int, int],
    check_rounds: frozenset[int] | set[int],
    num_rounds: int,
) -> tuple[int, ...]:
    """Drop the check-round entries; keep key-round parities in round order."""
    parities = []
    for p in range(num_rounds):
        if p in check_rounds:
            continue
        bit = ancilla_bits.get(p)
        if bit is None:
            raise InconsistentTranscriptError(f"no ancilla outcome recorded for key round {p}")
        parities.append(bit)
    return tuple(parities)


def reconstruct_target_key(parities: Sequence[int], own_key: Sequence[int]) -> tuple[int, ...]:
    """Target's key bits: parity XOR own key bit, position by position."""
    if len(parities) != len(own_key):
        raise ValueError("parity and key lengths differ")
    return tuple(p ^ k for p, k in zip(parities, own_key))


def steal_solution(ciphertext: Sequence[int], key: Sequence[int]) -> tuple[int, ...]:
    """Decrypt the target's one-time-pad ciphertext with the reconstructed key."""
    from .protocol import otp_decrypt  # local import: avoids a module cycle

    return otp_decrypt(ciphertext, key)
