"""Monte-Carlo driver: repeated scenario runs, aggregates, reports.

Trials of one scenario are independent executions whose master seeds are
derived from the scenario seed and the trial index alone, so results do
not depend on the worker count and any single trial can be replayed in
isolation.  Aggregation is an ordered fold over trial index.  Detection
rates carry 95% Wilson score intervals.

Reports serialize to CSV or JSON lines with a fixed field order: one
summary record per scenario plus one detail record per trial.
"""

from __future__ import annotations

import csv
import json
import math
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .adversary import AttackConfig
from .errors import ConfigurationError
from .protocol import ExamConfig, ExamResult, Scenario, run_exam
from .seeding import derive_seed

__all__ = [
    "ScenarioSpec",
    "TrialDetail",
    "ScenarioResult",
    "Report",
    "wilson_interval",
    "run_trial",
    "run_scenario",
    "run_scenarios",
    "replay_trial",
    "emit_report",
    "SUMMARY_FIELDS",
    "TRIAL_FIELDS",
]

Z_95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ScenarioSpec:
    """One batch of identical trials: configuration, scenario, attack, count."""

    label: str
    config: ExamConfig
    scenario: Scenario
    attack: AttackConfig | None = None
    trials: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigurationError("a scenario needs at least one trial")
        if self.scenario is not Scenario.HONEST and self.attack is None:
            raise ConfigurationError("attacked scenarios require an AttackConfig")


@dataclass
class TrialDetail:
    """Per-trial outcome summary, sufficient to replay and to aggregate."""

    trial: int
    seed: int
    check_failures: int
    decoys_measured: int
    decoy_mismatches: int
    touched_decoys: int
    detected: bool
    key_agreement_ok: bool
    otp_roundtrip_ok: bool
    attacker_key_accuracy: float | None
    attacker_solution_accuracy: float | None


@dataclass
class ScenarioResult:
    """Aggregates over all trials of one scenario."""

    label: str
    scenario: str
    config: ExamConfig | None
    attack: AttackConfig | None
    trials: int
    error: str | None = None
    check_failure_trials: int = 0
    check_failures_total: int = 0
    decoys_measured: int = 0
    decoy_mismatches: int = 0
    touched_decoys_mean: float = 0.0
    detected_trials: int = 0
    detection_wilson: tuple[float, float] = (0.0, 0.0)
    key_agreement_trials: int = 0
    otp_roundtrip_trials: int = 0
    attacker_key_accuracy_mean: float | None = None
    attacker_solution_accuracy_mean: float | None = None
    details: list[TrialDetail] = field(default_factory=list)

    @property
    def detection_rate(self) -> float:
        return self.detected_trials / self.trials if self.trials else 0.0

    @property
    def check_failure_rate(self) -> float:
        return self.check_failure_trials / self.trials if self.trials else 0.0

    @property
    def decoy_mismatch_rate(self) -> float:
        return self.decoy_mismatches / self.decoys_measured if self.decoys_measured else 0.0


@dataclass
class Report:
    """Results of one batch of scenarios."""

    scenarios: list[ScenarioResult]


def _detail_from_result(trial: int, seed: int, result: ExamResult) -> TrialDetail:
    verdict = result.decoy_verdict
    return TrialDetail(
        trial=trial,
        seed=seed,
        check_failures=result.check_failures,
        decoys_measured=verdict.total_measured if verdict else 0,
        decoy_mismatches=verdict.total_mismatched if verdict else 0,
        touched_decoys=result.touched_decoys,
        detected=result.detected,
        key_agreement_ok=all(result.key_agreement.values()),
        otp_roundtrip_ok=all(result.otp_roundtrip_ok.values()),
        attacker_key_accuracy=result.attacker_key_accuracy,
        attacker_solution_accuracy=result.attacker_solution_accuracy,
    )


def run_trial(spec: ScenarioSpec, trial: int) -> TrialDetail:
    """Execute one trial; its seed depends only on the scenario seed and index."""
    seed = derive_seed(spec.config.seed, "trial", trial)
    result = run_exam(spec.config, spec.scenario, spec.attack, seed=seed)
    return _detail_from_result(trial, seed, result)


def replay_trial(spec: ScenarioSpec, trial: int) -> TrialDetail:
    """Recompute a single recorded trial; identical to its original run."""
    if not 0 <= trial < spec.trials:
        raise ConfigurationError(f"trial {trial} outside 0..{spec.trials - 1}")
    return run_trial(spec, trial)


_WORKER_SPEC: ScenarioSpec | None = None


def _init_worker(spec: ScenarioSpec) -> None:
    global _WORKER_SPEC
    _WORKER_SPEC = spec


def _worker_trial(trial: int) -> TrialDetail:
    assert _WORKER_SPEC is not None
    return run_trial(_WORKER_SPEC, trial)


def run_scenario(spec: ScenarioSpec, workers: int = 1, keep_details: bool = True) -> ScenarioResult:
    """Run all trials of one scenario and fold the aggregates in trial order."""
    if workers > 1 and spec.trials > 1:
        chunk = max(1, spec.trials // (workers * 8))
        with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(spec,)) as pool:
            details = pool.map(_worker_trial, range(spec.trials), chunksize=chunk)
    else:
        details = [run_trial(spec, trial) for trial in range(spec.trials)]

    result = ScenarioResult(
        label=spec.label,
        scenario=spec.scenario.value,
        config=spec.config,
        attack=spec.attack,
        trials=spec.trials,
    )
    key_acc_sum = 0.0
    sol_acc_sum = 0.0
    attacked = 0
    touched_sum = 0
    for detail in details:
        result.check_failures_total += detail.check_failures
        result.check_failure_trials += 1 if detail.check_failures else 0
        result.decoys_measured += detail.decoys_measured
        result.decoy_mismatches += detail.decoy_mismatches
        touched_sum += detail.touched_decoys
        result.detected_trials += 1 if detail.detected else 0
        result.key_agreement_trials += 1 if detail.key_agreement_ok else 0
        result.otp_roundtrip_trials += 1 if detail.otp_roundtrip_ok else 0
        if detail.attacker_key_accuracy is not None:
            attacked += 1
            key_acc_sum += detail.attacker_key_accuracy
            sol_acc_sum += detail.attacker_solution_accuracy or 0.0
    result.touched_decoys_mean = touched_sum / spec.trials
    result.detection_wilson = wilson_interval(result.detected_trials, spec.trials)
    if attacked:
        result.attacker_key_accuracy_mean = key_acc_sum / attacked
        result.attacker_solution_accuracy_mean = sol_acc_sum / attacked
    if keep_details:
        result.details = details
    return result


def run_scenarios(
    specs: Sequence[ScenarioSpec], workers: int = 1, keep_details: bool = True
) -> Report:
    """Run a batch; a scenario that fails to configure is reported, not fatal."""
    results = []
    for spec in specs:
        try:
            results.append(run_scenario(spec, workers=workers, keep_details=keep_details))
        except (ConfigurationError, ValueError) as exc:
            results.append(
                ScenarioResult(
                    label=spec.label,
                    scenario=spec.scenario.value,
                    config=spec.config,
                    attack=spec.attack,
                    trials=spec.trials,
                    error=str(exc),
                )
            )
    return Report(scenarios=results)


SUMMARY_FIELDS = [
    "label",
    "scenario",
    "num_bobs",
    "rounds",
    "check_fraction",
    "decoy_count",
    "solution_length",
    "seed",
    "attacker",
    "target",
    "attack_fraction",
    "trials",
    "error",
    "check_failure_trials",
    "check_failures_total",
    "check_failure_rate",
    "decoys_measured",
    "decoy_mismatches",
    "decoy_mismatch_rate",
    "touched_decoys_mean",
    "detected_trials",
    "detection_rate",
    "detection_wilson_low",
    "detection_wilson_high",
    "key_agreement_trials",
    "otp_roundtrip_trials",
    "attacker_key_accuracy_mean",
    "attacker_solution_accuracy_mean",
]

TRIAL_FIELDS = [
    "label",
    "trial",
    "seed",
    "check_failures",
    "decoys_measured",
    "decoy_mismatches",
    "touched_decoys",
    "detected",
    "key_agreement_ok",
    "otp_roundtrip_ok",
    "attacker_key_accuracy",
    "attacker_solution_accuracy",
]


def _summary_record(result: ScenarioResult) -> dict:
    config = result.config
    attack = result.attack
    return {
        "label": result.label,
        "scenario": result.scenario,
        "num_bobs": config.num_bobs if config else None,
        "rounds": config.rounds if config else None,
        "check_fraction": config.check_fraction if config else None,
        "decoy_count": config.decoy_count if config else None,
        "solution_length": config.solution_length if config else None,
        "seed": config.seed if config else None,
        "attacker": attack.attacker if attack else None,
        "target": attack.target if attack else None,
        "attack_fraction": attack.attack_fraction if attack else None,
        "trials": result.trials,
        "error": result.error,
        "check_failure_trials": result.check_failure_trials,
        "check_failures_total": result.check_failures_total,
        "check_failure_rate": result.check_failure_rate,
        "decoys_measured": result.decoys_measured,
        "decoy_mismatches": result.decoy_mismatches,
        "decoy_mismatch_rate": result.decoy_mismatch_rate,
        "touched_decoys_mean": result.touched_decoys_mean,
        "detected_trials": result.detected_trials,
        "detection_rate": result.detection_rate,
        "detection_wilson_low": result.detection_wilson[0],
        "detection_wilson_high": result.detection_wilson[1],
        "key_agreement_trials": result.key_agreement_trials,
        "otp_roundtrip_trials": result.otp_roundtrip_trials,
        "attacker_key_accuracy_mean": result.attacker_key_accuracy_mean,
        "attacker_solution_accuracy_mean": result.attacker_solution_accuracy_mean,
    }


def _trial_record(label: str, detail: TrialDetail) -> dict:
    return {
        "label": label,
        "trial": detail.trial,
        "seed": detail.seed,
        "check_failures": detail.check_failures,
        "decoys_measured": detail.decoys_measured,
        "decoy_mismatches": detail.decoy_mismatches,
        "touched_decoys": detail.touched_decoys,
        "detected": detail.detected,
        "key_agreement_ok": detail.key_agreement_ok,
        "otp_roundtrip_ok": detail.otp_roundtrip_ok,
        "attacker_key_accuracy": detail.attacker_key_accuracy,
        "attacker_solution_accuracy": detail.attacker_solution_accuracy,
    }


def _write_csv(path: Path, fields: list[str], records: Iterable[dict]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        for record in records:
            writer.writerow({k: ("" if v is None else v) for k, v in record.items()})


def _write_jsonl(path: Path, records: Iterable[dict]) -> None:
    with path.open("w") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=False) + "\n")


def emit_report(report: Report, out_dir: str | Path, format: str = "json") -> list[Path]:
    """Write the summary and per-trial detail files; returns the paths."""
    if format not in ("json", "csv"):
        raise ConfigurationError(f"unknown report format {format!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = [_summary_record(result) for result in report.scenarios]
    trials = [
        _trial_record(result.label, detail)
        for result in report.scenarios
        for detail in result.details
    ]
    if format == "csv":
        summary_path = out / "summary.csv"
        trials_path = out / "trials.csv"
        _write_csv(summary_path, SUMMARY_FIELDS, summaries)
        _write_csv(trials_path, TRIAL_FIELDS, trials)
    else:
        summary_path = out / "summary.jsonl"
        trials_path = out / "trials.jsonl"
        _write_jsonl(summary_path, summaries)
        _write_jsonl(trials_path, trials)
    return [summary_path, trials_path]
