"""Multiparty entanglement-based key distribution with an inside attacker.

Simulates the solution-collecting protocol of a quantum exam: GHZ-like
carrier states shared between a collector and N participants, Z/X check
rounds, Z-basis key rounds and one-time-pad solution collection.  The
package also implements the dishonest-participant CNOT tap that steals a
fellow participant's key without disturbing any check, and the decoy
qubit countermeasure that exposes each tapped decoy with probability
one half.
"""

from .adversary import (
    AttackConfig,
    AttackRecord,
    attack_round,
    filter_key_parities,
    order_operations,
    reconstruct_target_key,
    steal_solution,
)
from .decoys import (
    DecoyPlan,
    DecoyVerdict,
    attack_under_decoys,
    insert_decoys,
    reveal_and_verify,
    verify_decoys,
)
from .errors import (
    ConfigurationError,
    InconsistentTranscriptError,
    KeyExhaustedError,
    ResourceLimitError,
)
from .harness import (
    Report,
    ScenarioResult,
    ScenarioSpec,
    TrialDetail,
    emit_report,
    replay_trial,
    run_scenario,
    run_scenarios,
    run_trial,
    wilson_interval,
)
from .protocol import (
    ExamConfig,
    ExamResult,
    KeyMaterial,
    RoundRecord,
    Scenario,
    Transcript,
    alice_recover_bob_key,
    distribute_round,
    generate_secrets,
    otp_decrypt,
    otp_encrypt,
    run_check_round,
    run_exam,
    run_key_round,
    select_check_rounds,
)
from .states import (
    Basis,
    MeasurementOutcome,
    PureState,
    apply_cnot,
    dense_oracle,
    discard_qubit,
    maximally_mixed,
    measure,
    measure_all,
    prepare_decoy,
    prepare_phi,
    reduced_density,
    states_equal,
    tensor,
)

__version__ = "0.1.0"
