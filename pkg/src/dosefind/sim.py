"""Scenario generation and Monte Carlo evaluation.

A scenario is a monotone true toxicity curve plus the identity of its MTD.
`evaluate` replays every (scenario, replicate) pair through each configured
design, reusing one random stream per pair so that design comparisons are
paired and threshold-equivalent designs produce bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .designs import DesignConfig
from .trial import TrialSpec, _run_replay, select_mtd

__all__ = [
    "Scenario",
    "OperatingCharacteristics",
    "MetricSummary",
    "METRIC_NAMES",
    "random_scenario",
    "fixed_scenarios",
    "classify_mtd",
    "evaluate",
    "scenarios_from_lines",
    "scenarios_to_lines",
]

METRIC_NAMES = (
    "correct_sel",
    "sel_over",
    "pat_at_mtd",
    "pat_over",
    "tox",
    "none_sel",
)

# Share of random scenarios in which every dose is too toxic (no MTD) or
# every dose sits below the equivalence interval (MTD effectively at or
# beyond the top dose). Kept small: real dose grids are chosen so that the
# MTD usually lies inside them.
P_NONE_ABOVE = 0.01
P_NONE_BELOW = 0.02

# Minimum margins, in |prob - p_T| distance, between the anchored MTD and
# its neighbors. The dose below stays clearly distinguishable at trial
# sample sizes; the dose above is allowed closer, which is what makes
# over-selection a live error mode.
MARGIN_BELOW = 0.13
MARGIN_ABOVE = 0.045

# The dose immediately above the MTD lands within this span of its floor,
# like the ~0.1-0.2 spacing of practical dose grids; doses beyond it spread
# toward 1. This is what makes over-selection a realistic error rate rather
# than a vanishing one.
ADJACENT_ABOVE_SPREAD = 0.25


def classify_mtd(
    probs: tuple[float, ...], p_T: float, ei: tuple[float, float]
) -> int | None:
    """The scenario's MTD: none when even the lowest dose sits above the
    equivalence interval, otherwise the dose closest to the target (ties to
    the lower dose)."""
    if probs[0] >= ei[1]:
        return None
    best = 1
    for d in range(2, len(probs) + 1):
        if abs(probs[d - 1] - p_T) < abs(probs[best - 1] - p_T) - 1e-12:
            best = d
    return best


@dataclass(frozen=True)
class Scenario:
    """A true toxicity curve (nondecreasing) and its MTD."""

    probs: tuple[float, ...]
    mtd: int | None
    label: str = ""

    def __post_init__(self) -> None:
        if any(not 0.0 <= p <= 1.0 for p in self.probs):
            raise ValueError("toxicity probabilities must lie in [0,1]")
        if any(b < a for a, b in zip(self.probs, self.probs[1:])):
            raise ValueError(f"toxicity must be nondecreasing: {self.probs}")
        if self.mtd is not None and not 1 <= self.mtd <= len(self.probs):
            raise ValueError(f"mtd {self.mtd} outside dose range")

    @property
    def n_doses(self) -> int:
        return len(self.probs)


def make_scenario(
    probs: tuple[float, ...],
    p_T: float = 0.3,
    ei: tuple[float, float] = (0.25, 0.35),
    label: str = "",
) -> Scenario:
    return Scenario(probs=probs, mtd=classify_mtd(probs, p_T, ei), label=label)


def random_scenario(
    n_doses: int,
    p_T: float,
    ei: tuple[float, float],
    rng: np.random.Generator,
) -> Scenario:
    """Draw one random scenario.

    With small probabilities the whole curve lands above or below the
    equivalence interval; otherwise an MTD position is uniform over the
    doses, its probability is uniform inside the interval, and the other
    doses fill [0, anchor] and [anchor, 1] as sorted uniforms clipped so
    that no neighbor comes closer to the target than the anchor (by at
    least MARGIN_BELOW below and MARGIN_ABOVE above).
    """
    if n_doses < 2:
        raise ValueError("need at least 2 doses")
    lo, hi = ei
    u = rng.random()
    if u < P_NONE_ABOVE:
        probs = np.sort(rng.uniform(hi, min(hi + 0.55, 0.97), n_doses))
    elif u < P_NONE_ABOVE + P_NONE_BELOW:
        probs = np.sort(rng.uniform(0.01, lo, n_doses))
    else:
        position = int(rng.integers(1, n_doses + 1))
        anchor = rng.uniform(lo, hi)
        mirror_lo = min(anchor, 2.0 * p_T - anchor)
        mirror_hi = max(anchor, 2.0 * p_T - anchor)
        below_cap = max(mirror_lo - MARGIN_BELOW, 0.01)
        above_floor = min(mirror_hi + MARGIN_ABOVE, 0.95)
        lower = np.sort(rng.uniform(0.0, below_cap, position - 1))
        n_above = n_doses - position
        if n_above > 0:
            first = rng.uniform(
                above_floor, min(above_floor + ADJACENT_ABOVE_SPREAD, 0.97)
            )
            rest = np.sort(rng.uniform(first, 0.97, n_above - 1))
            upper = np.concatenate([[first], rest])
        else:
            upper = np.empty(0)
        probs = np.concatenate([lower, [anchor], upper])
    return make_scenario(tuple(float(p) for p in probs), p_T, ei)


def fixed_scenarios() -> list[Scenario]:
    """The bundled curated scenario set: five curves each for 4, 5, and 6
    dose levels, targeting p_T = 0.3 with equivalence interval (0.25, 0.35)."""
    from importlib.resources import files

    text = files("dosefind.data").joinpath("fixed_scenarios.csv").read_text()
    return scenarios_from_lines(text.splitlines())


def scenarios_from_lines(lines: list[str]) -> list[Scenario]:
    """Parse scenarios from text records: `label,p1,p2,...` with an
    optionally empty label; blank lines and #-comments are skipped."""
    out = []
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        label = parts[0]
        try:
            probs = tuple(float(p) for p in parts[1:])
        except ValueError as exc:
            raise ValueError(f"scenario line {i}: {exc}") from None
        if len(probs) < 2:
            raise ValueError(f"scenario line {i}: needs at least 2 doses")
        out.append(make_scenario(probs, label=label))
    return out


def scenarios_to_lines(scenarios: list[Scenario]) -> list[str]:
    return [
        s.label + "," + ",".join(f"{p:.6g}" for p in s.probs)
        for s in scenarios
    ]


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Across-scenario mean and sd of the six trial metrics."""

    correct_sel: MetricSummary
    sel_over: MetricSummary
    pat_at_mtd: MetricSummary
    pat_over: MetricSummary
    tox: MetricSummary
    none_sel: MetricSummary

    def metric(self, name: str) -> MetricSummary:
        return getattr(self, name)


def _scenario_metrics(
    spec: TrialSpec,
    scenario: Scenario,
    uniform_blocks: list[np.ndarray],
) -> tuple[float, ...]:
    """Per-scenario metric means over the replicate uniforms provided."""
    mtd = scenario.mtd
    reps = len(uniform_blocks)
    correct = over = none = 0
    at_patients = over_patients = dlt = total = 0
    for uniforms in uniform_blocks:
        trial = _run_replay(spec, scenario.probs, uniforms)
        selected = select_mtd(trial, spec)
        if selected is None:
            none += 1
        elif mtd is None:
            over += 1
        elif selected == mtd:
            correct += 1
        elif selected > mtd:
            over += 1
        total += trial.total_n()
        dlt += sum(trial.y)
        if mtd is None:
            over_patients += trial.total_n()
        else:
            at_patients += trial.n[mtd - 1]
            over_patients += sum(trial.n[mtd:])
    return (
        correct / reps,
        over / reps,
        at_patients / total,
        over_patients / total,
        dlt / total,
        none / reps,
    )


def _replicate_uniforms(
    seed: int, scenario_idx: int, replicates: int, max_cohorts: int, cohort: int
) -> list[np.ndarray]:
    """One uniform block per replicate, keyed by (scenario, replicate) only
    so every design replays identical patient outcomes."""
    blocks = []
    for rep in range(replicates):
        ss = np.random.SeedSequence(seed, spawn_key=(1, scenario_idx, rep))
        rng = np.random.default_rng(ss)
        blocks.append(rng.random((max_cohorts, cohort)))
    return blocks


def _eval_one_scenario(args) -> list[tuple[float, ...]]:
    designs, scenario, si, replicates, seed, max_n, cohort_size, start_dose = args
    blocks = _replicate_uniforms(
        seed, si, replicates, max_n // cohort_size, cohort_size
    )
    rows = []
    for cfg in designs:
        spec = TrialSpec(
            design=cfg,
            n_doses=scenario.n_doses,
            max_n=max_n,
            cohort_size=cohort_size,
            start_dose=start_dose,
        )
        rows.append(_scenario_metrics(spec, scenario, blocks))
    return rows


def evaluate(
    designs: list[DesignConfig],
    scenarios: list[Scenario],
    replicates: int,
    seed: int,
    max_n: int = 30,
    cohort_size: int = 3,
    start_dose: int = 1,
    workers: int = 1,
) -> tuple[dict[str, OperatingCharacteristics], dict[str, list[tuple[float, ...]]]]:
    """Run every design over every scenario.

    Returns (summary per design, per-scenario metric rows per design); rows
    are ordered like `scenarios` and hold the six metrics of METRIC_NAMES.
    Deterministic for a fixed seed regardless of worker count.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if len({cfg.design for cfg in designs}) != len(designs):
        raise ValueError("designs must have distinct names")
    tasks = [
        (designs, sc, si, replicates, seed, max_n, cohort_size, start_dose)
        for si, sc in enumerate(scenarios)
    ]
    if workers > 1:
        with get_context("spawn").Pool(workers) as pool:
            per_scenario_rows = pool.map(_eval_one_scenario, tasks)
    else:
        per_scenario_rows = [_eval_one_scenario(t) for t in tasks]

    per_design: dict[str, list[tuple[float, ...]]] = {
        cfg.design: [] for cfg in designs
    }
    for rows in per_scenario_rows:
        for cfg, row in zip(designs, rows):
            per_design[cfg.design].append(row)

    summaries = {}
    for cfg in designs:
        table = np.asarray(per_design[cfg.design])
        cols = {}
        for j, name in enumerate(METRIC_NAMES):
            col = table[:, j]
            cols[name] = MetricSummary(
                mean=float(col.mean()),
                sd=float(col.std(ddof=1)) if len(col) > 1 else 0.0,
            )
        summaries[cfg.design] = OperatingCharacteristics(**cols)
    return summaries, per_design
