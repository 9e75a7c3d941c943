"""Solution-collecting protocol: carrier rounds, checks, keys, one-time pads.

One execution runs P rounds.  Per round the collector (Alice) draws a
secret bit vector s, prepares the matching carrier state, keeps qubit 0
and hands qubit n to participant n.  A random half of the rounds is
spent on checks: everybody measures in a coin-flipped common basis and
the outcomes must satisfy the Z correlation (participant bit = Alice bit
XOR secret bit) or the X parity (product of all signs is +1).  The
remaining rounds are measured in Z and the bits become per-party keys.
Every participant then one-time-pad encrypts his solution; Alice
reconstructs each participant's key from her own bits and the secrets
and decrypts.

Scenario hooks splice in the dishonest-participant tap and the decoy
countermeasure.  All randomness flows through purpose-labelled streams
derived from one master seed, so a configuration and seed pin down the
whole transcript bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .adversary import (
    AttackConfig,
    AttackRecord,
    filter_key_parities,
    reconstruct_target_key,
)
from .decoys import DecoyPlan, DecoyVerdict, attack_under_decoys, insert_decoys, verify_decoys
from .errors import ConfigurationError, KeyExhaustedError
from .seeding import spawn_rng
from .states import Basis, PureState, measure_all, prepare_phi

__all__ = [
    "Scenario",
    "ExamConfig",
    "KeyMaterial",
    "RoundRecord",
    "Transcript",
    "ExamResult",
    "generate_secrets",
    "distribute_round",
    "select_check_rounds",
    "run_check_round",
    "run_key_round",
    "alice_recover_bob_key",
    "otp_encrypt",
    "otp_decrypt",
    "run_exam",
]


class Scenario(Enum):
    HONEST = "honest"
    ATTACKED = "attacked"
    ATTACKED_WITH_DECOYS = "attacked_with_decoys"


@dataclass(frozen=True)
class ExamConfig:
    """Sizes, fractions and the master seed of one protocol execution.

    ``decoy_tolerance`` is the number of decoy mismatches the collector
    tolerates before declaring the run compromised (0: abort on any).
    """

    num_bobs: int = 3
    rounds: int = 256
    check_fraction: float = 0.5
    decoy_count: int = 0
    seed: int = 0
    solution_length: int = 64
    decoy_tolerance: int = 0

    def __post_init__(self) -> None:
        if self.num_bobs < 1:
            raise ConfigurationError("need at least one participant")
        if self.rounds < 1:
            raise ConfigurationError("need at least one round")
        if not 0.0 < self.check_fraction < 1.0:
            raise ConfigurationError("check_fraction must lie strictly between 0 and 1")
        if self.decoy_count < 0:
            raise ConfigurationError("decoy_count cannot be negative")
        if self.solution_length < 1:
            raise ConfigurationError("solutions must carry at least one bit")
        if self.decoy_tolerance < 0:
            raise ConfigurationError("decoy_tolerance cannot be negative")
        if self.num_key_rounds < self.solution_length:
            raise ConfigurationError(
                f"{self.num_key_rounds} key rounds cannot carry a "
                f"{self.solution_length}-bit solution"
            )

    @property
    def num_check_rounds(self) -> int:
        return round(self.rounds * self.check_fraction)

    @property
    def num_key_rounds(self) -> int:
        return self.rounds - self.num_check_rounds


@dataclass(frozen=True)
class KeyMaterial:
    """Ordered key bits belonging to one party."""

    owner: str
    bits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(slots=True)
class RoundRecord:
    """What one round contributed to the transcript."""

    index: int
    role: str  # "check" or "key"
    basis: Basis
    alice: int
    bobs: tuple[int, ...]
    verdict: bool | None  # None for key rounds


@dataclass
class Transcript:
    """Complete per-round record of one execution plus the final keys."""

    num_bobs: int
    rounds: list[RoundRecord]
    check_rounds: tuple[int, ...]
    alice_key: KeyMaterial
    bob_keys: dict[int, KeyMaterial]

    def check_failures(self) -> int:
        return sum(1 for r in self.rounds if r.verdict is False)

    def to_lines(self) -> list[str]:
        """One line per round: index, role, basis, Alice outcome, Bob outcomes, verdict."""
        lines = []
        for r in self.rounds:
            alice = _format_outcome(r.basis, r.alice)
            bobs = ",".join(_format_outcome(r.basis, b) for b in r.bobs)
            verdict = "-" if r.verdict is None else ("pass" if r.verdict else "fail")
            lines.append(f"{r.index} {r.role} {r.basis.value} {alice} {bobs} {verdict}")
        return lines


def _format_outcome(basis: Basis, value: int) -> str:
    return str(value) if basis is Basis.Z else f"{value:+d}"


@dataclass
class ExamResult:
    """Transcript plus the outcome summary of one scenario execution."""

    scenario: Scenario
    config: ExamConfig
    transcript: Transcript
    check_failures: int
    key_agreement: dict[int, bool]
    otp_roundtrip_ok: dict[int, bool]
    solutions: dict[int, tuple[int, ...]]
    ciphertexts: dict[int, tuple[int, ...]]
    decoy_plan: DecoyPlan | None = None
    decoy_verdict: DecoyVerdict | None = None
    attack_record: AttackRecord | None = None
    attacker_key_accuracy: float | None = None
    attacker_solution_accuracy: float | None = None
    detected: bool = False

    @property
    def touched_decoys(self) -> int:
        return self.attack_record.touched_decoys if self.attack_record else 0


def generate_secrets(config: ExamConfig, rng) -> list[tuple[int, ...]]:
    """Draw one uniform secret bit vector per round."""
    n = config.num_bobs
    if n < 1:
        raise ValueError("need at least one participant")
    secrets = []
    for _ in range(config.rounds):
        word = rng.getrandbits(n)
        secrets.append(tuple(word >> i & 1 for i in range(n)))
    return secrets


def distribute_round(s: Sequence[int]) -> tuple[PureState, dict[int, str]]:
    """Prepare one carrier state and say which qubit goes to whom."""
    state = prepare_phi(s)
    ownership = {0: "alice"}
    for n in range(1, len(s) + 1):
        ownership[n] = f"bob{n}"
    return state, ownership


def select_check_rounds(rounds: int, fraction: float, rng, min_key_rounds: int = 0) -> frozenset[int]:
    """Uniform subset of round indices of size round(rounds * fraction)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("check fraction must lie strictly between 0 and 1")
    size = round(rounds * fraction)
    if rounds - size < min_key_rounds:
        raise ConfigurationError(
            f"only {rounds - size} key rounds left, {min_key_rounds} needed"
        )
    return frozenset(rng.sample(range(rounds), size))


def run_check_round(
    state: PureState, basis: Basis, s: Sequence[int], rng
) -> tuple[bool, int, tuple[int, ...]]:
    """Measure every qubit in ``basis`` and test the correlation laws.

    Z: every participant bit must equal Alice's bit XOR the round secret.
    X: Alice's sign must equal the product of the participants' signs.
    """
    values, _ = measure_all(state, basis, rng)
    alice = values[0]
    bobs = tuple(values[1:])
    if basis is Basis.Z:
        ok = all(bob == alice ^ bit for bob, bit in zip(bobs, s))
    else:
        product = alice
        for sign in bobs:
            product *= sign
        ok = product == 1
    return ok, alice, bobs


def run_key_round(state: PureState, rng) -> tuple[int, tuple[int, ...]]:
    """Measure every qubit in Z; the bits extend each party's key."""
    values, _ = measure_all(state, Basis.Z, rng)
    return values[0], tuple(values[1:])


def alice_recover_bob_key(
    alice_key: KeyMaterial, secrets: Sequence[Sequence[int]], n: int
) -> KeyMaterial:
    """Participant n's key as Alice derives it: her bit XOR the secret bit, per key round."""
    if len(alice_key.bits) != len(secrets):
        raise ValueError("key length and secret count differ")
    bits = tuple(a ^ s[n - 1] for a, s in zip(alice_key.bits, secrets))
    return KeyMaterial(owner=f"bob{n}", bits=bits)


def _key_bits(key: KeyMaterial | Sequence[int]) -> Sequence[int]:
    return key.bits if isinstance(key, KeyMaterial) else key


def otp_encrypt(solution: Sequence[int], key: KeyMaterial | Sequence[int]) -> tuple[int, ...]:
    """XOR the solution with a prefix of the key."""
    bits = _key_bits(key)
    if len(bits) < len(solution):
        raise KeyExhaustedError(
            f"key has {len(bits)} bits, solution needs {len(solution)}"
        )
    return tuple(s ^ k for s, k in zip(solution, bits))


def otp_decrypt(ciphertext: Sequence[int], key: KeyMaterial | Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`otp_encrypt` (XOR is an involution)."""
    return otp_encrypt(ciphertext, key)


def _random_bits(rng, length: int) -> tuple[int, ...]:
    word = rng.getrandbits(length)
    return tuple(word >> i & 1 for i in range(length))


def run_exam(
    config: ExamConfig,
    scenario: Scenario | str,
    attack: AttackConfig | None = None,
    seed: int | None = None,
) -> ExamResult:
    """Execute one full protocol run under the given scenario.

    ``seed`` overrides ``config.seed`` as the master seed; every random
    choice comes from a purpose-labelled stream derived from it, so the
    returned transcript is a pure function of (config, scenario, attack,
    seed).  Setting ``decoy_count`` to zero makes the decoy scenario
    coincide, stream for stream, with the plain attacked scenario.
    """
    scenario = Scenario(scenario)
    master = config.seed if seed is None else seed
    attacked = scenario is not Scenario.HONEST
    if attacked:
        if attack is None:
            raise ConfigurationError("attacked scenarios require an AttackConfig")
        if config.num_bobs < 2:
            raise ConfigurationError("an inside attack needs at least two participants")
        for role, index in (("attacker", attack.attacker), ("target", attack.target)):
            if not 1 <= index <= config.num_bobs:
                raise ConfigurationError(f"{role} index {index} outside 1..{config.num_bobs}")
    if scenario is Scenario.ATTACKED and config.decoy_count > 0:
        raise ConfigurationError(
            "the plain attacked scenario models the original protocol; use "
            "attacked_with_decoys when decoy_count > 0"
        )

    rng_secrets = spawn_rng(master, "secrets")
    rng_select = spawn_rng(master, "check-select")
    rng_basis = spawn_rng(master, "check-basis")
    rng_measure = spawn_rng(master, "measure")
    rng_strategy = spawn_rng(master, "attack-strategy")
    rng_attack = spawn_rng(master, "attack")
    rng_plan = spawn_rng(master, "decoy-plan")
    rng_verify = spawn_rng(master, "decoy-verify")
    rng_solutions = spawn_rng(master, "solutions")

    secrets = generate_secrets(config, rng_secrets)
    check_set = select_check_rounds(
        config.rounds, config.check_fraction, rng_select, min_key_rounds=config.solution_length
    )

    use_decoys = config.decoy_count > 0
    plan = (
        insert_decoys(config, rng_plan)
        if use_decoys
        else DecoyPlan.empty(config.rounds, config.num_bobs)
    )

    round_states = [prepare_phi(s) for s in secrets]

    attack_record = None
    probed = {}
    if attacked:
        round_states, probed, attack_record = attack_under_decoys(
            round_states, plan, attack, rng_strategy, rng_attack
        )

    decoy_verdict = verify_decoys(plan, probed, rng_verify) if use_decoys else None

    records: list[RoundRecord] = []
    alice_bits: list[int] = []
    bob_bits: dict[int, list[int]] = {n: [] for n in range(1, config.num_bobs + 1)}
    key_secrets: list[tuple[int, ...]] = []
    check_failures = 0
    for p in range(config.rounds):
        state = round_states[p]
        if p in check_set:
            basis = Basis.Z if rng_basis.random() < 0.5 else Basis.X
            ok, alice, bobs = run_check_round(state, basis, secrets[p], rng_measure)
            records.append(RoundRecord(p, "check", basis, alice, bobs, ok))
            if not ok:
                check_failures += 1
        else:
            alice, bobs = run_key_round(state, rng_measure)
            records.append(RoundRecord(p, "key", Basis.Z, alice, bobs, None))
            alice_bits.append(alice)
            for n in range(1, config.num_bobs + 1):
                bob_bits[n].append(bobs[n - 1])
            key_secrets.append(secrets[p])

    alice_key = KeyMaterial("alice", tuple(alice_bits))
    bob_keys = {n: KeyMaterial(f"bob{n}", tuple(bits)) for n, bits in bob_bits.items()}
    transcript = Transcript(
        num_bobs=config.num_bobs,
        rounds=records,
        check_rounds=tuple(sorted(check_set)),
        alice_key=alice_key,
        bob_keys=bob_keys,
    )

    solutions = {
        n: _random_bits(rng_solutions, config.solution_length)
        for n in range(1, config.num_bobs + 1)
    }
    ciphertexts = {n: otp_encrypt(solutions[n], bob_keys[n]) for n in solutions}
    key_agreement = {}
    otp_ok = {}
    for n in range(1, config.num_bobs + 1):
        recovered = alice_recover_bob_key(alice_key, key_secrets, n)
        key_agreement[n] = recovered.bits == bob_keys[n].bits
        otp_ok[n] = otp_decrypt(ciphertexts[n], recovered) == solutions[n]

    attacker_key_accuracy = None
    attacker_solution_accuracy = None
    if attack_record is not None:
        # Rounds the tap missed contribute no parity; the attacker falls
        # back to parity 0 (his best guess is that the secrets matched).
        filled = {p: attack_record.ancilla_bits.get(p, 0) for p in range(config.rounds)}
        parities = filter_key_parities(filled, check_set, config.rounds)
        own_key = bob_keys[attack.attacker].bits
        reconstructed = reconstruct_target_key(parities, own_key)
        stolen = otp_decrypt(ciphertexts[attack.target], reconstructed)
        attack_record.key_parities = parities
        attack_record.reconstructed_key = reconstructed
        attack_record.stolen_solution = stolen
        target_key = bob_keys[attack.target].bits
        attacker_key_accuracy = _fraction_equal(reconstructed, target_key)
        attacker_solution_accuracy = _fraction_equal(stolen, solutions[attack.target])

    mismatches = decoy_verdict.total_mismatched if decoy_verdict else 0
    detected = check_failures > 0 or mismatches > config.decoy_tolerance

    return ExamResult(
        scenario=scenario,
        config=config,
        transcript=transcript,
        check_failures=check_failures,
        key_agreement=key_agreement,
        otp_roundtrip_ok=otp_ok,
        solutions=solutions,
        ciphertexts=ciphertexts,
        decoy_plan=plan if use_decoys else None,
        decoy_verdict=decoy_verdict,
        attack_record=attack_record,
        attacker_key_accuracy=attacker_key_accuracy,
        attacker_solution_accuracy=attacker_solution_accuracy,
        detected=detected,
    )


def _fraction_equal(a: Sequence[int], b: Sequence[int]) -> float:
    if len(a) != len(b):
        raise ValueError("sequences differ in length")
    matches = sum(1 for x, y in zip(a, b) if x == y)
    return matches / len(a) if a else 1.0
