"""Sequential trial engine: treat a cohort, tally DLTs, ask the configured
design for a move, apply the safety rules, repeat until the sample size is
exhausted or the lowest dose proves too toxic, then select an MTD.

A trial run is a pure function of (spec, truth, seed); no state is shared
between runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .designs import (
    HISTORY_DESIGNS,
    DesignConfig,
    decide_from_tallies,
    decide_tally,
)
from .framework import DEESCALATE, ESCALATE, STAY, Action, DoseState
from .numerics import BetaParams, pava_isotonic, reg_inc_beta

__all__ = [
    "TrialSpec",
    "TrialState",
    "excess_toxicity_prob",
    "apply_safety",
    "run_trial",
    "select_mtd",
    "STOP_SAFETY",
    "STOP_MAX_N",
]

STOP_SAFETY = "safety-stop"
STOP_MAX_N = "max-n"

# cohort_log decision tokens: E/S/D moves, DU for a forced exclusion
# de-escalation, and the two stop markers.
_TOKEN_DU = "DU"


@dataclass(frozen=True)
class TrialSpec:
    """Immutable description of one simulated trial."""

    design: DesignConfig
    n_doses: int
    max_n: int = 30
    cohort_size: int = 3
    start_dose: int = 1

    def __post_init__(self) -> None:
        if self.n_doses < 1:
            raise ValueError("need at least one dose level")
        if not self.max_n >= self.cohort_size >= 1:
            raise ValueError(
                f"need max_n >= cohort_size >= 1, got "
                f"{self.max_n}, {self.cohort_size}"
            )
        if not 1 <= self.start_dose <= self.n_doses:
            raise ValueError(f"start_dose {self.start_dose} outside dose range")
        object.__setattr__(self, "design", self.design.for_doses(self.n_doses))


@dataclass
class TrialState:
    """Mutable record of one trial in progress. Dose indices are 1-based."""

    n_doses: int
    current_dose: int
    n: list[int] = field(default_factory=list)
    y: list[int] = field(default_factory=list)
    excluded: list[bool] = field(default_factory=list)
    stopped: str | None = None
    cohort_log: list[tuple[int, int, int, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.n:
            self.n = [0] * self.n_doses
            self.y = [0] * self.n_doses
            self.excluded = [False] * self.n_doses

    def dose_state(self, dose: int) -> DoseState:
        return DoseState(n=self.n[dose - 1], y=self.y[dose - 1])

    def tallies(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.n, self.y))

    def total_n(self) -> int:
        return sum(self.n)

    def exclude_from(self, dose: int) -> None:
        """Exclude a dose and everything above it, permanently."""
        for d in range(dose - 1, self.n_doses):
            self.excluded[d] = True

    def lowest_excluded(self) -> int | None:
        for d, flag in enumerate(self.excluded, start=1):
            if flag:
                return d
        return None

    def last_cohort_rate(self) -> float | None:
        if not self.cohort_log:
            return None
        _, size, dlts, _ = self.cohort_log[-1]
        return dlts / size

    def cohort_lines(self) -> list[str]:
        """One auditable line per cohort: dose,size,DLTs,decision."""
        return [
            f"{dose},{size},{dlts},{decision}"
            for dose, size, dlts, decision in self.cohort_log
        ]


def excess_toxicity_prob(state: DoseState, p_T: float) -> float:
    """Posterior probability that the dose's toxicity exceeds the target,
    under a uniform prior: 1 - I_pT(1+y, 1+n-y)."""
    post = BetaParams(1.0 + state.y, 1.0 + state.n - state.y)
    return 1.0 - reg_inc_beta(post, p_T)


def _as_target(raw: Action, current: int) -> int:
    if raw == ESCALATE:
        return current + 1
    if raw == STAY:
        return current
    if raw == DEESCALATE:
        return current - 1
    if isinstance(raw, int):
        return raw
    raise ValueError(f"unrecognized action {raw!r}")


def apply_safety(
    raw: Action | None, trial: TrialState, spec: TrialSpec
) -> int | None:
    """Run the safety rules against a proposed move and return the next
    dose, or None when the trial stops (or when raw is None, meaning no
    further cohort is planned and only the exclusion/stop rules apply).

    In order: (1) exclude the current and all higher doses when the current
    dose is too toxic, stopping outright at dose 1 and otherwise forcing a
    de-escalation; (2) cap escalation at one level; (3) veto escalation
    right after a cohort with an empirical DLT rate above the target;
    (4) clamp to the dose range and never move onto an excluded dose.
    """
    cfg = spec.design
    d = trial.current_dose
    rule1 = (
        excess_toxicity_prob(trial.dose_state(d), cfg.p_T)
        > cfg.safety_threshold
    )
    if rule1:
        trial.exclude_from(d)
        if d == 1:
            trial.stopped = STOP_SAFETY
            return None
    if raw is None:
        return None
    if rule1:
        target = d - 1
    else:
        target = _as_target(raw, d)
        if target > d + 1:
            target = d + 1
        rate = trial.last_cohort_rate()
        if rate is not None and rate > cfg.p_T and target > d:
            target = d
    target = min(target, spec.n_doses)
    lowest = trial.lowest_excluded()
    if lowest is not None and target >= lowest:
        target = lowest - 1
    return max(target, 1)


def _raw_decision(spec: TrialSpec, trial: TrialState) -> Action:
    cfg = spec.design
    if cfg.design in HISTORY_DESIGNS:
        return decide_from_tallies(cfg, trial.tallies())
    d = trial.current_dose
    return decide_tally(cfg, trial.n[d - 1], trial.y[d - 1])


def _decision_token(rule1: bool, target: int, current: int) -> str:
    if rule1:
        return _TOKEN_DU
    if target > current:
        return ESCALATE
    if target < current:
        return DEESCALATE
    return STAY


def _run_replay(
    spec: TrialSpec, truth: tuple[float, ...], uniforms: np.ndarray
) -> TrialState:
    """Drive a trial off a precomputed (cohorts x cohort_size) uniform
    matrix, so that designs sharing a seed see identical patient outcomes."""
    if len(truth) != spec.n_doses:
        raise ValueError(
            f"truth has {len(truth)} doses, spec has {spec.n_doses}"
        )
    trial = TrialState(n_doses=spec.n_doses, current_dose=spec.start_dose)
    for cohort in range(uniforms.shape[0]):
        d = trial.current_dose
        dlts = int(np.count_nonzero(uniforms[cohort] < truth[d - 1]))
        trial.n[d - 1] += spec.cohort_size
        trial.y[d - 1] += dlts
        last = trial.total_n() + spec.cohort_size > spec.max_n
        raw = None if last else _raw_decision(spec, trial)
        was_excluded = trial.excluded[d - 1]
        nxt = apply_safety(raw, trial, spec)
        rule1 = trial.excluded[d - 1] and not was_excluded
        if trial.stopped == STOP_SAFETY:
            trial.cohort_log.append((d, spec.cohort_size, dlts, STOP_SAFETY))
            break
        if last:
            trial.stopped = STOP_MAX_N
            trial.cohort_log.append((d, spec.cohort_size, dlts, STOP_MAX_N))
            break
        token = _decision_token(rule1, nxt, d)
        trial.cohort_log.append((d, spec.cohort_size, dlts, token))
        trial.current_dose = nxt
    return trial


def run_trial(
    spec: TrialSpec,
    truth: tuple[float, ...],
    rng: np.random.Generator | int,
) -> tuple[TrialState, int | None]:
    """Simulate one trial against a true toxicity curve; returns the final
    state and the selected MTD (None when no dose is declared)."""
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    max_cohorts = spec.max_n // spec.cohort_size
    uniforms = rng.random((max_cohorts, spec.cohort_size))
    trial = _run_replay(spec, truth, uniforms)
    return trial, select_mtd(trial, spec)


def select_mtd(trial: TrialState, spec: TrialSpec) -> int | None:
    """Pick the MTD from a finished trial.

    Safety-stopped trials declare none. Model-based designs take their
    model's recommendation over the non-excluded doses. Interval and
    rule-based designs take isotonic-regression estimates of the per-dose
    toxicity (posterior means under uniform priors, inverse-variance
    weights) and pick the treated, non-excluded dose closest to the target.
    Tied distances go to the highest dose when every tied estimate sits
    below the target (isotonic pooling ties a run of safe doses, and the
    strongest of them is the right recommendation), and otherwise to the
    lowest.
    """
    if trial.stopped == STOP_SAFETY:
        return None
    cfg = spec.design
    allowed = [d for d in range(1, spec.n_doses + 1) if not trial.excluded[d - 1]]
    if not allowed:
        return None
    if cfg.design in HISTORY_DESIGNS:
        return decide_from_tallies(cfg, trial.tallies(), tuple(allowed))
    candidates = [d for d in allowed if trial.n[d - 1] > 0]
    if not candidates:
        return None
    treated = [d for d in range(1, spec.n_doses + 1) if trial.n[d - 1] > 0]
    means = []
    weights = []
    for d in treated:
        a = 1.0 + trial.y[d - 1]
        b = 1.0 + trial.n[d - 1] - trial.y[d - 1]
        means.append(a / (a + b))
        var = a * b / ((a + b) ** 2 * (a + b + 1.0))
        weights.append(1.0 / var)
    iso = dict(zip(treated, pava_isotonic(means, weights)))
    best_dist = min(abs(iso[d] - cfg.p_T) for d in candidates)
    tied = [d for d in candidates if abs(iso[d] - cfg.p_T) <= best_dist + 1e-12]
    if all(iso[d] < cfg.p_T for d in tied):
        return tied[-1]
    return tied[0]
