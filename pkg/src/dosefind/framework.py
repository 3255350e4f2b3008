"""Generic decision engine: a partition of a parameter space into labeled
intervals, a hierarchical prior (uniform over intervals, plus a within-
interval distribution), a binomial tally, and the posterior-mode decision
rule under 0-1 loss.

Every interval design in this package is this engine with a particular
partition and within-interval prior; the design modules also carry the
published closed-form shortcuts, and the equivalence of the two routes is
checked exhaustively in `dosefind.verify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .numerics import BetaParams, Quadrature, integrate, reg_inc_beta

__all__ = [
    "Action",
    "Interval",
    "PartitionSpec",
    "DoseState",
    "TruncatedBetaPrior",
    "PointMassPrior",
    "TruncatedNormalPrior",
    "IntervalPrior",
    "model_evidence",
    "bayes_decide",
    "zero_one_loss",
    "argmax_action",
    "ESCALATE",
    "STAY",
    "DEESCALATE",
    "TIE_RTOL",
]

# Up-and-down action tags. Model-index action spaces use 1-based ints.
ESCALATE = "E"
STAY = "S"
DEESCALATE = "D"

Action = Union[str, int]

# Relative tolerance under which two model evidences count as tied. Large
# enough to absorb root-finding error in numerically derived prior atoms,
# small enough that no two genuinely distinct tally states collide at the
# sample sizes used here (n <= 30).
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """One interval of a partition, with explicit endpoint membership."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval out of order: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo:
            return self.lo_closed
        if x == self.hi:
            return self.hi_closed
        return True


@dataclass(frozen=True)
class DoseState:
    """Per-dose tally: n patients treated, y of them with a DLT."""

    n: int
    y: int

    def __post_init__(self) -> None:
        if not 0 <= self.y <= self.n:
            raise ValueError(f"need 0 <= y <= n, got n={self.n}, y={self.y}")


@dataclass(frozen=True)
class PartitionSpec:
    """Ordered, pairwise-disjoint intervals that exactly cover a parameter
    space, one action label per interval."""

    intervals: tuple[Interval, ...]
    labels: tuple[Action, ...]

    def __post_init__(self) -> None:
        if len(self.intervals) != len(self.labels):
            raise ValueError("one label per interval required")
        if len(self.intervals) < 2:
            raise ValueError("a partition needs at least 2 intervals")
        prev = None
        for iv in self.intervals:
            if prev is not None:
                if iv.lo != prev.hi:
                    raise ValueError(
                        f"gap or overlap between {prev} and {iv}"
                    )
                if prev.hi_closed == iv.lo_closed:
                    raise ValueError(
                        f"shared endpoint {iv.lo} must belong to exactly "
                        f"one of {prev} and {iv}"
                    )
            prev = iv
        if not self.intervals[0].lo_closed or not self.intervals[-1].hi_closed:
            raise ValueError("outer endpoints of the space must be included")

    @property
    def lo(self) -> float:
        return self.intervals[0].lo

    @property
    def hi(self) -> float:
        return self.intervals[-1].hi

    def index_of(self, x: float) -> int:
        """Index of the unique interval containing x."""
        for i, iv in enumerate(self.intervals):
            if iv.contains(x):
                return i
        raise ValueError(f"{x} lies outside the partitioned space "
                         f"[{self.lo}, {self.hi}]")

    def label_for(self, x: float) -> Action:
        return self.labels[self.index_of(x)]

    def interval_of(self, label: Action) -> Interval:
        return self.intervals[self.labels.index(label)]


@dataclass(frozen=True)
class TruncatedBetaPrior:
    """Within each interval, a Beta(alpha, beta) density renormalized to
    that interval."""

    params: BetaParams = BetaParams(1.0, 1.0)
    model_weights: tuple[float, ...] | None = None


@dataclass(frozen=True)
class PointMassPrior:
    """Within interval k, all prior mass sits on the atom phi_k; each atom
    must lie inside its interval."""

    atoms: tuple[float, ...]
    model_weights: tuple[float, ...] | None = None


@dataclass(frozen=True)
class TruncatedNormalPrior:
    """Within each interval, a N(0, sigma^2) density renormalized to that
    interval."""

    sigma: float
    model_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


IntervalPrior = Union[TruncatedBetaPrior, PointMassPrior, TruncatedNormalPrior]


def _weights(prior: IntervalPrior, k_count: int) -> tuple[float, ...]:
    w = prior.model_weights
    if w is None:
        return tuple(1.0 / k_count for _ in range(k_count))
    if len(w) != k_count:
        raise ValueError(
            f"{len(w)} model weights for {k_count} intervals"
        )
    total = sum(w)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"model weights sum to {total}, expected 1")
    return tuple(w)


def _check_atoms(prior: PointMassPrior, partition: PartitionSpec) -> None:
    if len(prior.atoms) != len(partition.intervals):
        raise ValueError(
            f"{len(prior.atoms)} atoms for {len(partition.intervals)} "
            f"intervals"
        )
    for atom, iv in zip(prior.atoms, partition.intervals):
        if not (iv.lo < atom < iv.hi):
            raise ValueError(
                f"atom {atom} not interior to [{iv.lo}, {iv.hi}]"
            )


def model_evidence(
    k: int,
    prior: IntervalPrior,
    partition: PartitionSpec,
    state: DoseState,
) -> float:
    """Marginal likelihood of the tally under interval model k: the binomial
    kernel p^y (1-p)^(n-y) integrated against the within-interval prior.

    For truncated-beta priors this is exact via incomplete-beta differences;
    the point-mass case is a direct evaluation; the truncated-normal case
    falls back to quadrature.
    """
    iv = partition.intervals[k]
    n, y = state.n, state.y
    if isinstance(prior, PointMassPrior):
        _check_atoms(prior, partition)
        phi = prior.atoms[k]
        return phi**y * (1.0 - phi) ** (n - y)
    if iv.length == 0.0:
        raise ValueError(
            f"zero-length interval [{iv.lo}, {iv.hi}] with a continuous prior"
        )
    if isinstance(prior, TruncatedBetaPrior):
        a, b = prior.params.alpha, prior.params.beta
        post = BetaParams(a + y, b + n - y)
        post_mass = reg_inc_beta(post, iv.hi) - reg_inc_beta(post, iv.lo)
        prior_mass = (
            reg_inc_beta(prior.params, iv.hi)
            - reg_inc_beta(prior.params, iv.lo)
        )
        if prior_mass <= 0.0:
            raise ValueError(
                f"prior mass vanishes on [{iv.lo}, {iv.hi}]"
            )
        # B(a+y, b+n-y)/B(a, b) carries the binomial kernel's normalization
        log_bratio = (
            math.lgamma(a + y)
            + math.lgamma(b + n - y)
            - math.lgamma(a + b + n)
            - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
        )
        return math.exp(log_bratio) * post_mass / prior_mass
    if isinstance(prior, TruncatedNormalPrior):
        sig = prior.sigma

        def density(t: float) -> float:
            return math.exp(-0.5 * (t / sig) ** 2)

        def kernel(t: float) -> float:
            return t**y * (1.0 - t) ** (n - y) * density(t)

        quad = Quadrature()
        z = integrate(density, iv.lo, iv.hi, quad)
        if z <= 0.0:
            raise ValueError(f"prior mass vanishes on [{iv.lo}, {iv.hi}]")
        return integrate(kernel, iv.lo, iv.hi, quad) / z
    raise TypeError(f"unsupported prior kind: {type(prior).__name__}")


def argmax_action(scores: Sequence[float], labels: Sequence[Action]) -> Action:
    """Pick the label of the maximal score, resolving near-ties.

    For E/S/D labels, ties resolve to the boundary-crossing action (D first,
    then E): the published threshold designs include their boundaries in the
    escalate/de-escalate regions, so the stay action loses evidence ties.
    For integer model indices, ties resolve to the lowest index.
    """
    best = max(scores)
    floor = best - TIE_RTOL * abs(best)
    tied = [lab for s, lab in zip(scores, labels) if s >= floor]
    if len(tied) == 1:
        return tied[0]
    if all(isinstance(lab, int) for lab in tied):
        return min(tied)
    for preferred in (DEESCALATE, ESCALATE, STAY):
        if preferred in tied:
            return preferred
    return tied[0]


def bayes_decide(
    prior: IntervalPrior,
    partition: PartitionSpec,
    state: DoseState,
) -> Action:
    """Posterior-mode decision: the label of the interval with the highest
    posterior model probability. Under the 0-1 loss this minimizes posterior
    expected loss, and it is invariant to rescaling all evidences by a
    positive constant."""
    k_count = len(partition.intervals)
    weights = _weights(prior, k_count)
    scores = [
        weights[k] * model_evidence(k, prior, partition, state)
        for k in range(k_count)
    ]
    return argmax_action(scores, partition.labels)


def zero_one_loss(action: Action, p: float, partition: PartitionSpec) -> int:
    """0 if p falls in the interval labeled by the action, else 1."""
    if action not in partition.labels:
        raise ValueError(f"unknown action {action!r}")
    return 0 if partition.interval_of(action).contains(p) else 1
