"""Decoy-qubit countermeasure: planning, attack exposure, verification.

Before sending each participant's qubit sequence, the collector inserts
extra single qubits at secret random positions, each prepared as |+> or
|-> uniformly.  A transmitted decoy and a transmitted carrier qubit have
the same reduced density matrix (identity over 2), so the attacker
cannot steer around them; any CNOT tap on a decoy entangles it with the
ancilla and its later X-basis verification then disagrees with the
prepared sign with probability exactly one half.

Positions are sampled independently per participant.  After delivery the
collector reveals the positions, every participant measures his decoys
in X, and the reported signs are compared against the plan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

from .adversary import AttackConfig, AttackRecord, DecoyTap, attack_round
from .errors import InconsistentTranscriptError
from .states import Basis, PureState, apply_cnot, discard_qubit, measure, prepare_decoy, tensor

if TYPE_CHECKING:
    from .protocol import ExamConfig

__all__ = [
    "Decoy",
    "DecoyPlan",
    "DecoyVerdict",
    "insert_decoys",
    "carrier_positions",
    "attach_probe",
    "attack_under_decoys",
    "verify_decoys",
    "reveal_and_verify",
]


@dataclass(frozen=True)
class Decoy:
    """One planned check qubit: where it sits and which X eigenstate it carries."""

    position: int
    sign: int


@dataclass(frozen=True)
class DecoyPlan:
    """Per-participant decoy placements over extended sequences of ``rounds + d`` items."""

    rounds: int
    per_bob: dict[int, tuple[Decoy, ...]]

    @classmethod
    def empty(cls, rounds: int, num_bobs: int) -> "DecoyPlan":
        return cls(rounds=rounds, per_bob={n: () for n in range(1, num_bobs + 1)})

    @property
    def decoys_per_bob(self) -> int:
        return len(next(iter(self.per_bob.values()))) if self.per_bob else 0

    @property
    def extended_length(self) -> int:
        return self.rounds + self.decoys_per_bob

    def total_decoys(self) -> int:
        return sum(len(decoys) for decoys in self.per_bob.values())


@dataclass
class DecoyVerdict:
    """Verification outcome: per-participant counts and the overall error rate."""

    per_bob: dict[int, tuple[int, int]]  # bob -> (measured, mismatched)

    @property
    def total_measured(self) -> int:
        return sum(measured for measured, _ in self.per_bob.values())

    @property
    def total_mismatched(self) -> int:
        return sum(mismatched for _, mismatched in self.per_bob.values())

    @property
    def error_rate(self) -> float:
        measured = self.total_measured
        return self.total_mismatched / measured if measured else 0.0

    def to_lines(self) -> list[str]:
        lines = []
        for bob, (measured, mismatched) in sorted(self.per_bob.items()):
            rate = mismatched / measured if measured else 0.0
            lines.append(f"bob{bob} measured={measured} mismatched={mismatched} rate={rate:.6f}")
        return lines


def insert_decoys(config: "ExamConfig", rng) -> DecoyPlan:
    """Sample a fresh plan: d distinct positions and random signs per participant."""
    d = config.decoy_count
    length = config.rounds + d
    if d < 0 or d > length:
        raise ValueError(f"cannot place {d} decoys in a sequence of {length} items")
    per_bob: dict[int, tuple[Decoy, ...]] = {}
    for bob in range(1, config.num_bobs + 1):
        positions = sorted(rng.sample(range(length), d))
        per_bob[bob] = tuple(
            Decoy(position, 1 if rng.random() < 0.5 else -1) for position in positions
        )
    return DecoyPlan(rounds=config.rounds, per_bob=per_bob)


def carrier_positions(plan: DecoyPlan, bob: int) -> list[int]:
    """Position of each carrier round inside this participant's extended sequence."""
    taken = {decoy.position for decoy in plan.per_bob[bob]}
    return [position for position in range(plan.extended_length) if position not in taken]


def attach_probe(state: PureState) -> PureState:
    """CNOT the (single-qubit) item onto a fresh |0> ancilla; returns the joint state."""
    joint = tensor(state, PureState.from_bits([0]))
    return apply_cnot(joint, 0, 1)


def _tap_decoy(sign: int, rng) -> tuple[PureState, int]:
    # The attacker cannot tell this item from a carrier qubit, so it gets
    # the same treatment: entangle with an ancilla, read the ancilla in Z.
    joint = attach_probe(prepare_decoy(sign))
    outcome, joint = measure(joint, 1, Basis.Z, rng)
    return discard_qubit(joint, 1), outcome.value


def attack_under_decoys(
    round_states: list[PureState],
    plan: DecoyPlan,
    attack: AttackConfig,
    strategy_rng,
    attack_rng,
) -> tuple[list[PureState], dict[tuple[int, int], PureState], AttackRecord]:
    """Run the tap campaign against extended sequences holding decoys.

    The attacker picks a set of item positions up front (all of them at
    ``attack_fraction`` 1.0, else a uniform sample).  A carrier round is
    harvested, exactly as in the plain attack, when its item is tapped in
    both the target's and the attacker's sequence.  Tapped positions that
    hold decoys get probed with their own ancilla; the collapsed decoy
    states are returned for later verification, keyed by (bob, position).
    """
    rounds = plan.rounds
    length = plan.extended_length
    if attack.attack_fraction >= 1.0:
        chosen = None  # every position
    else:
        size = round(length * attack.attack_fraction)
        chosen = set(strategy_rng.sample(range(length), size))

    def tapped(position: int) -> bool:
        return chosen is None or position in chosen

    target_positions = carrier_positions(plan, attack.target)
    attacker_positions = carrier_positions(plan, attack.attacker)

    record = AttackRecord()
    states = list(round_states)
    for p in range(rounds):
        if tapped(target_positions[p]) and tapped(attacker_positions[p]):
            states[p], bit = attack_round(states[p], attack.target, attack.attacker, attack_rng)
            record.ancilla_bits[p] = bit

    probed: dict[tuple[int, int], PureState] = {}
    for bob in (attack.target, attack.attacker):
        for decoy in plan.per_bob[bob]:
            if tapped(decoy.position):
                probed[(bob, decoy.position)], bit = _tap_decoy(decoy.sign, attack_rng)
                record.decoy_taps.append(DecoyTap(bob, decoy.position, bit))
    record.touched_decoys = len(probed)
    return states, probed, record


def verify_decoys(
    plan: DecoyPlan,
    probed: Mapping[tuple[int, int], PureState],
    rng,
) -> DecoyVerdict:
    """Measure every planned decoy in X and compare against the plan."""
    measured: dict[int, list[tuple[int, int]]] = {}
    for bob, decoys in plan.per_bob.items():
        results = []
        for decoy in decoys:
            state = probed.get((bob, decoy.position))
            if state is None:
                state = prepare_decoy(decoy.sign)
            outcome, _ = measure(state, 0, Basis.X, rng)
            results.append((decoy.position, outcome.value))
        measured[bob] = results
    return reveal_and_verify(plan, measured)


def reveal_and_verify(
    plan: DecoyPlan,
    measured: Mapping[int, list[tuple[int, int]]],
) -> DecoyVerdict:
    """Count sign mismatches between the plan and the reported measurements."""
    per_bob: dict[int, tuple[int, int]] = {}
    for bob, decoys in plan.per_bob.items():
        reported = dict(measured.get(bob, []))
        mismatched = 0
        for decoy in decoys:
            sign = reported.get(decoy.position)
            if sign is None:
                raise InconsistentTranscriptError(
                    f"decoy at position {decoy.position} of bob{bob} was never measured"
                )
            if sign != decoy.sign:
                mismatched += 1
        per_bob[bob] = (len(decoys), mismatched)
    return DecoyVerdict(per_bob=per_bob)
