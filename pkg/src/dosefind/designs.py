"""Concrete dose-finding decision rules.

Five rules are instantiations of the generic engine in `dosefind.framework`
(mTPI, mTPI-2, BOIN, CCD with tally-only decisions; Int-CRM with a
dose-response model), and two benchmarks sit outside it (the classic CRM,
and the rule-based i3+3). Each rule is implemented in its published
closed form here; `dosefind.verify` checks the engine equivalences
exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np

from .framework import (
    DEESCALATE,
    ESCALATE,
    STAY,
    Action,
    DoseState,
    Interval,
    PartitionSpec,
    argmax_action,
)
from .numerics import BetaParams, bisect, reg_inc_beta, std_normal_cdf

__all__ = [
    "MTPI",
    "MTPI2",
    "BOIN",
    "CCD",
    "INTCRM",
    "CRM",
    "I3PLUS3",
    "TALLY_DESIGNS",
    "HISTORY_DESIGNS",
    "DESIGNS",
    "DesignConfig",
    "ThetaIntervals",
    "upm",
    "mtpi_decide",
    "mtpi2_partition",
    "mtpi2_decide",
    "boin_xi",
    "xi_inverse",
    "boin_decide",
    "ccd_decide",
    "default_skeleton",
    "solve_theta_intervals",
    "intcrm_decide",
    "crm_decide",
    "i3p3_decide",
    "decide_tally",
    "decide_from_tallies",
]

MTPI = "mTPI"
MTPI2 = "mTPI2"
BOIN = "BOIN"
CCD = "CCD"
INTCRM = "IntCRM"
CRM = "CRM"
I3PLUS3 = "i3plus3"

# Designs whose decision is a function of the current dose's (n, y) tally
# alone; the rest need the full assignment history.
TALLY_DESIGNS = frozenset({MTPI, MTPI2, BOIN, CCD, I3PLUS3})
HISTORY_DESIGNS = frozenset({INTCRM, CRM})
DESIGNS = TALLY_DESIGNS | HISTORY_DESIGNS

# Absolute slack for empirical-rate threshold comparisons (y versus
# n * lambda). Prior atoms recovered by root finding carry ~1e-13 error;
# this keeps rates that sit exactly on a boundary on the inclusive side.
BOUNDARY_ATOL = 1e-9

# Extreme-curve bounds for the dose-response parameter: theta ranges over
# curves from "every dose fully toxic" down to "every dose toxicity-free".
_CURVE_EXTREME = 1e-5

_UNIT_POSTERIOR = BetaParams(1.0, 1.0)


@dataclass(frozen=True)
class DesignConfig:
    """A design identity plus every hyperparameter any rule needs.

    Interval designs read p_T and the equivalence-interval half-widths;
    BOIN may carry explicit prior atoms (otherwise they are recovered from
    the interval bounds); the model-based designs carry a skeleton (or the
    half-width delta and prior MTD index used to generate one per dose
    count) and the prior variance sigma2.
    """

    design: str
    p_T: float = 0.3
    eps1: float = 0.05
    eps2: float = 0.05
    boin_phi_E: float | None = None
    boin_phi_D: float | None = None
    skeleton: tuple[float, ...] | None = None
    delta: float = 0.05
    sigma2: float = 1.34
    prior_mtd: int | None = None
    safety_threshold: float = 0.95

    def __post_init__(self) -> None:
        if self.design not in DESIGNS:
            raise ValueError(
                f"unknown design {self.design!r}; expected one of "
                f"{sorted(DESIGNS)}"
            )
        if not 0.0 < self.p_T < 1.0:
            raise ValueError(f"p_T must lie in (0,1), got {self.p_T}")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1 and eps2 must be positive")
        if not (0.0 < self.p_T - self.eps1 and self.p_T + self.eps2 < 1.0):
            raise ValueError(
                f"equivalence interval ({self.p_T - self.eps1}, "
                f"{self.p_T + self.eps2}) must sit strictly inside (0,1)"
            )
        if (self.boin_phi_E is None) != (self.boin_phi_D is None):
            raise ValueError("boin_phi_E and boin_phi_D come as a pair")
        if self.boin_phi_E is not None:
            if not 0.0 < self.boin_phi_E < self.p_T:
                raise ValueError(
                    f"boin_phi_E={self.boin_phi_E} must lie in (0, p_T)"
                )
            if not self.p_T < self.boin_phi_D < 1.0:
                raise ValueError(
                    f"boin_phi_D={self.boin_phi_D} must lie in (p_T, 1)"
                )
        if self.skeleton is not None:
            if len(self.skeleton) < 2:
                raise ValueError("skeleton needs at least 2 doses")
            if any(not 0.0 < q < 1.0 for q in self.skeleton):
                raise ValueError("skeleton values must lie in (0,1)")
            if any(
                b <= a for a, b in zip(self.skeleton, self.skeleton[1:])
            ):
                raise ValueError("skeleton must be strictly increasing")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.prior_mtd is not None and self.prior_mtd < 1:
            raise ValueError("prior_mtd is a 1-based dose index")
        if not 0.0 < self.safety_threshold < 1.0:
            raise ValueError("safety_threshold must lie in (0,1)")

    @property
    def ei(self) -> tuple[float, float]:
        return (self.p_T - self.eps1, self.p_T + self.eps2)

    @cached_property
    def partition3(self) -> PartitionSpec:
        """[0, p_T-eps1] / (p_T-eps1, p_T+eps2) / [p_T+eps2, 1]."""
        lo, hi = self.ei
        return PartitionSpec(
            intervals=(
                Interval(0.0, lo, True, True),
                Interval(lo, hi, False, False),
                Interval(hi, 1.0, True, True),
            ),
            labels=(ESCALATE, STAY, DEESCALATE),
        )

    @cached_property
    def fine_partition(self) -> PartitionSpec:
        return mtpi2_partition(self)

    @cached_property
    def boin_atoms(self) -> tuple[float, float, float]:
        """Prior atoms (phi_E, phi_S, phi_D); defaults place the empirical
        boundaries exactly at the equivalence-interval edges."""
        if self.boin_phi_E is not None:
            return (self.boin_phi_E, self.p_T, self.boin_phi_D)
        return self.ccd_atoms

    @cached_property
    def ccd_atoms(self) -> tuple[float, float, float]:
        lo, hi = self.ei
        return (xi_inverse(lo, self.p_T), self.p_T, xi_inverse(hi, self.p_T))

    @cached_property
    def boin_lambdas(self) -> tuple[float, float]:
        phi_e, phi_s, phi_d = self.boin_atoms
        return (boin_xi(phi_e, phi_s), boin_xi(phi_d, phi_s))

    def for_doses(self, n_doses: int) -> "DesignConfig":
        """Resolve the skeleton for a trial with n_doses dose levels.

        No-op for tally designs and for configs with an explicit skeleton
        of matching length.
        """
        if self.design in TALLY_DESIGNS:
            return self
        if self.skeleton is not None:
            if len(self.skeleton) != n_doses:
                raise ValueError(
                    f"skeleton has {len(self.skeleton)} doses, trial has "
                    f"{n_doses}"
                )
            return self
        nu = self.prior_mtd if self.prior_mtd is not None else (n_doses + 1) // 2
        if nu > n_doses:
            raise ValueError(
                f"prior_mtd={nu} exceeds the dose count {n_doses}"
            )
        return replace(
            self,
            skeleton=default_skeleton(n_doses, self.p_T, self.delta, nu),
        )

    def _require_skeleton(self) -> tuple[float, ...]:
        if self.skeleton is None:
            raise ValueError(
                f"{self.design} needs a skeleton; call for_doses() first"
            )
        return self.skeleton

    @cached_property
    def theta_intervals(self) -> "ThetaIntervals":
        return solve_theta_intervals(self)


# ---------------------------------------------------------------------------
# mTPI


def upm(interval: Interval, state: DoseState) -> float:
    """Unit probability mass: posterior Beta(1+y, 1+n-y) mass on the
    interval divided by the interval's length."""
    if interval.length <= 0.0:
        raise ValueError(f"zero-length interval [{interval.lo}, {interval.hi}]")
    post = BetaParams(1.0 + state.y, 1.0 + state.n - state.y)
    mass = reg_inc_beta(post, interval.hi) - reg_inc_beta(post, interval.lo)
    return mass / interval.length


def mtpi_decide(cfg: DesignConfig, state: DoseState) -> Action:
    """Escalate/stay/de-escalate by the largest unit probability mass over
    the three toxicity intervals."""
    part = cfg.partition3
    scores = [upm(iv, state) for iv in part.intervals]
    return argmax_action(scores, part.labels)


# ---------------------------------------------------------------------------
# mTPI-2


def mtpi2_partition(cfg: DesignConfig) -> PartitionSpec:
    """Refine the three-interval partition into equal-length subintervals.

    The equivalence interval keeps its place; the regions below and above
    are tiled outward from its edges with subintervals of the same width,
    and any shorter remainder becomes the outermost subinterval (touching 0
    or 1). Labels are model indices 1..K ordered left to right.
    """
    lo, hi = cfg.ei
    width = cfg.eps1 + cfg.eps2

    def edges_below() -> list[float]:
        edges = [lo]
        while edges[-1] - width > 1e-12:
            edges.append(edges[-1] - width)
        if edges[-1] > 1e-12:
            edges.append(0.0)
        else:
            edges[-1] = 0.0
        return edges[::-1]

    def edges_above() -> list[float]:
        edges = [hi]
        while edges[-1] + width < 1.0 - 1e-12:
            edges.append(edges[-1] + width)
        if edges[-1] < 1.0 - 1e-12:
            edges.append(1.0)
        else:
            edges[-1] = 1.0
        return edges

    below = edges_below()
    above = edges_above()
    intervals: list[Interval] = []
    for i in range(len(below) - 1):
        intervals.append(
            Interval(below[i], below[i + 1], lo_closed=(i == 0), hi_closed=True)
        )
    intervals.append(Interval(lo, hi, False, False))
    last = len(above) - 2
    for i in range(len(above) - 1):
        intervals.append(
            Interval(above[i], above[i + 1], lo_closed=True, hi_closed=(i == last))
        )
    labels = tuple(range(1, len(intervals) + 1))
    return PartitionSpec(intervals=tuple(intervals), labels=labels)


def mtpi2_decide(cfg: DesignConfig, state: DoseState) -> Action:
    """Largest unit probability mass over the refined partition, mapped to
    an up-and-down action by where the winning subinterval sits relative to
    the equivalence interval."""
    part = cfg.fine_partition
    scores = [upm(iv, state) for iv in part.intervals]
    winner = argmax_action(scores, part.labels)
    return _position_action(part.intervals[winner - 1], cfg)


def _position_action(interval: Interval, cfg: DesignConfig) -> Action:
    lo, hi = cfg.ei
    if interval.hi <= lo + 1e-12:
        return ESCALATE
    if interval.lo >= hi - 1e-12:
        return DEESCALATE
    return STAY


# ---------------------------------------------------------------------------
# BOIN / CCD


def boin_xi(phi_i: float, phi_j: float) -> float:
    """Empirical-rate boundary separating two candidate toxicity values:
    log((1-phi_i)/(1-phi_j)) / log(phi_j(1-phi_i)/(phi_i(1-phi_j))).
    Always strictly between phi_i and phi_j."""
    for name, phi in (("phi_i", phi_i), ("phi_j", phi_j)):
        if not 0.0 < phi < 1.0:
            raise ValueError(f"{name} must lie in (0,1), got {phi}")
    if phi_i == phi_j:
        raise ValueError("boundary undefined for phi_i == phi_j")
    num = math.log((1.0 - phi_i) / (1.0 - phi_j))
    den = math.log(phi_j * (1.0 - phi_i) / (phi_i * (1.0 - phi_j)))
    return num / den


def xi_inverse(target: float, p_T: float) -> float:
    """The prior atom phi with boundary boin_xi(phi, p_T) == target.

    Solved by bisection on the side of p_T that contains the target.
    """
    if not 0.0 < target < 1.0 or target == p_T:
        raise ValueError(
            f"target boundary must lie in (0,1) away from p_T, got {target}"
        )
    if target < p_T:
        lo, hi = 1e-12, p_T - 1e-12
    else:
        lo, hi = p_T + 1e-12, 1.0 - 1e-12
    return bisect(lambda phi: boin_xi(phi, p_T) - target, lo, hi, tol=1e-14)


def _threshold_rule(n: int, y: int, lam1: float, lam2: float) -> Action:
    if n < 1:
        raise ValueError("empirical-rate rules need at least one patient")
    if y <= n * lam1 + BOUNDARY_ATOL:
        return ESCALATE
    if y >= n * lam2 - BOUNDARY_ATOL:
        return DEESCALATE
    return STAY


def boin_decide(cfg: DesignConfig, state: DoseState) -> Action:
    """Threshold rule on the empirical DLT rate y/n: escalate at or below
    the lower boundary, de-escalate at or above the upper one."""
    lam1, lam2 = cfg.boin_lambdas
    return _threshold_rule(state.n, state.y, lam1, lam2)


def ccd_decide(cfg: DesignConfig, state: DoseState) -> Action:
    """Threshold rule with the equivalence-interval edges as boundaries."""
    lo, hi = cfg.ei
    return _threshold_rule(state.n, state.y, lo, hi)


# ---------------------------------------------------------------------------
# Dose-response model shared by Int-CRM and CRM: F(d, theta) = q_d^exp(theta)


def default_skeleton(
    n_doses: int, p_T: float, delta: float, prior_mtd: int
) -> tuple[float, ...]:
    """Indifference-interval skeleton: dose prior_mtd gets p_T; walking up,
    the next dose is placed so that when the current dose's curve passes
    p_T - delta the next one passes p_T + delta (and symmetrically walking
    down). Adjacent doses' indifference ranges then abut with half-width
    delta."""
    if not 1 <= prior_mtd <= n_doses:
        raise ValueError(f"prior_mtd {prior_mtd} outside 1..{n_doses}")
    if not 0.0 < p_T - delta < p_T + delta < 1.0:
        raise ValueError(f"delta={delta} too wide for p_T={p_T}")
    q = [0.0] * n_doses
    q[prior_mtd - 1] = p_T
    log_lo = math.log(p_T - delta)
    log_hi = math.log(p_T + delta)
    for d in range(prior_mtd - 1, n_doses - 1):
        # exp(b) solving q_d^exp(b) = p_T - delta, then q_{d+1}^exp(b) = p_T + delta
        q[d + 1] = math.exp(log_hi * math.log(q[d]) / log_lo)
    for d in range(prior_mtd - 1, 0, -1):
        q[d - 1] = math.exp(log_lo * math.log(q[d]) / log_hi)
    return tuple(q)


def power_curve(q: float, theta: float) -> float:
    """Toxicity probability q^exp(theta) of a dose with skeleton value q."""
    return q ** math.exp(theta)


@dataclass(frozen=True)
class ThetaIntervals:
    """Boundaries psi_1 < ... < psi_{T+1} cutting the dose-response
    parameter space into one region per dose, where that dose's toxicity is
    the closest to the target."""

    psi: tuple[float, ...]

    @property
    def n_doses(self) -> int:
        return len(self.psi) - 1

    def bounds(self, k: int) -> tuple[float, float]:
        """Region of dose k (1-based)."""
        return (self.psi[k - 1], self.psi[k])


def theta_bounds(skeleton: tuple[float, ...]) -> tuple[float, float]:
    """Parameter range spanning response curves from constantly ~1 down to
    constantly ~0."""
    a_lo = math.log(math.log1p(-_CURVE_EXTREME) / math.log(skeleton[0]))
    a_hi = math.log(math.log(_CURVE_EXTREME) / math.log(skeleton[-1]))
    return (a_lo, a_hi)


def solve_theta_intervals(cfg: DesignConfig) -> ThetaIntervals:
    """Solve each interior boundary psi_k from
    F(k-1, psi_k) + F(k, psi_k) = 2 p_T by bisection."""
    skeleton = cfg._require_skeleton()
    a_lo, a_hi = theta_bounds(skeleton)
    psi = [a_lo]
    for k in range(2, len(skeleton) + 1):
        q_prev, q_here = skeleton[k - 2], skeleton[k - 1]

        def residual(t: float) -> float:
            return power_curve(q_prev, t) + power_curve(q_here, t) - 2.0 * cfg.p_T

        psi.append(bisect(residual, a_lo, a_hi, tol=1e-12))
    psi.append(a_hi)
    out = tuple(psi)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"theta boundaries not increasing: {out}")
    return ThetaIntervals(psi=out)


class _PowerModelGrid:
    """Fixed quadrature grid over the dose-response parameter, with the
    per-dose log response precomputed. Composite Simpson weights make the
    per-decision work a handful of vector operations."""

    def __init__(
        self,
        skeleton: tuple[float, ...],
        sigma2: float,
        lo: float,
        hi: float,
        nodes_per_panel: int,
        panels: tuple[float, ...],
    ):
        # `panels` are ascending breakpoints lo..hi; each panel gets its own
        # composite Simpson rule so panel edges are honored exactly.
        nodes: list[np.ndarray] = []
        weights: list[np.ndarray] = []
        self.panel_slices: list[slice] = []
        start = 0
        m = nodes_per_panel if nodes_per_panel % 2 == 1 else nodes_per_panel + 1
        for a, b in zip(panels, panels[1:]):
            x = np.linspace(a, b, m)
            h = (b - a) / (m - 1)
            w = np.full(m, 2.0)
            w[1::2] = 4.0
            w[0] = w[-1] = 1.0
            w *= h / 3.0
            nodes.append(x)
            weights.append(w)
            self.panel_slices.append(slice(start, start + m))
            start += m
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        sigma = math.sqrt(sigma2)
        self.prior = np.exp(-0.5 * (self.nodes / sigma) ** 2) / (
            sigma * math.sqrt(2.0 * math.pi)
        )
        expo = np.exp(self.nodes)[None, :]
        q = np.asarray(skeleton)[:, None]
        self.curve = q**expo  # (T, G) toxicity probabilities
        # clamp the logs: at extreme parameters the curve underflows to
        # exactly 0 or 1, and 0 * -inf would poison tallies with y=0 or y=n
        with np.errstate(divide="ignore"):
            self.log_curve = np.maximum(np.log(self.curve), -745.0)
            self.log_one_minus = np.maximum(np.log1p(-self.curve), -745.0)

    def log_likelihood(self, tallies: tuple[tuple[int, int], ...]) -> np.ndarray:
        y = np.array([t[1] for t in tallies], dtype=float)
        miss = np.array([t[0] - t[1] for t in tallies], dtype=float)
        return y @ self.log_curve + miss @ self.log_one_minus


@lru_cache(maxsize=64)
def _intcrm_grid(cfg: DesignConfig) -> _PowerModelGrid:
    ti = cfg.theta_intervals
    return _PowerModelGrid(
        cfg.skeleton, cfg.sigma2, ti.psi[0], ti.psi[-1],
        nodes_per_panel=201, panels=ti.psi,
    )


@lru_cache(maxsize=64)
def _crm_grid(cfg: DesignConfig) -> _PowerModelGrid:
    skeleton = cfg._require_skeleton()
    a_lo, a_hi = theta_bounds(skeleton)
    spread = 8.5 * math.sqrt(cfg.sigma2)
    lo, hi = min(a_lo, -spread), max(a_hi, spread)
    return _PowerModelGrid(
        skeleton, cfg.sigma2, lo, hi, nodes_per_panel=4001, panels=(lo, hi)
    )


def _history_tallies(
    history: list[tuple[int, int]], n_doses: int
) -> tuple[tuple[int, int], ...]:
    n = [0] * n_doses
    y = [0] * n_doses
    for dose, dlt in history:
        if not 1 <= dose <= n_doses:
            raise ValueError(f"dose index {dose} outside 1..{n_doses}")
        if dlt not in (0, 1):
            raise ValueError(f"DLT flag must be 0 or 1, got {dlt}")
        n[dose - 1] += 1
        y[dose - 1] += dlt
    return tuple(zip(n, y))


def intcrm_decide(cfg: DesignConfig, history: list[tuple[int, int]]) -> int:
    """Recommend the dose whose parameter region carries the highest
    marginal likelihood of the (dose, DLT) history under a truncated-normal
    prior. An empty history recommends dose 1, the trial's starting point."""
    skeleton = cfg._require_skeleton()
    if not history:
        return 1
    return decide_from_tallies(cfg, _history_tallies(history, len(skeleton)))


def _intcrm_from_tallies(
    cfg: DesignConfig,
    tallies: tuple[tuple[int, int], ...],
    allowed: tuple[int, ...] | None,
) -> int:
    grid = _intcrm_grid(cfg)
    log_l = grid.log_likelihood(tallies)
    # one shared rescale keeps exp() representable without moving the argmax
    scaled = np.exp(log_l - log_l.max())
    integrand = grid.weights * scaled * grid.prior
    sigma = math.sqrt(cfg.sigma2)
    psi = cfg.theta_intervals.psi
    scores: list[float] = []
    labels: list[int] = []
    for k, sl in enumerate(grid.panel_slices):
        dose = k + 1
        if allowed is not None and dose not in allowed:
            continue
        num = float(integrand[sl].sum())
        z = std_normal_cdf(psi[k + 1] / sigma) - std_normal_cdf(psi[k] / sigma)
        scores.append(num / z)
        labels.append(dose)
    return argmax_action(scores, tuple(labels))


def crm_decide(cfg: DesignConfig, history: list[tuple[int, int]]) -> int:
    """Classic reassessment rule: posterior-mean toxicity per dose under an
    unrestricted normal prior on the curve parameter, then the dose closest
    to the target. Ties go to the lower dose."""
    skeleton = cfg._require_skeleton()
    tallies = _history_tallies(history, len(skeleton))
    return decide_from_tallies(cfg, tallies)


def _crm_from_tallies(
    cfg: DesignConfig,
    tallies: tuple[tuple[int, int], ...],
    allowed: tuple[int, ...] | None,
) -> int:
    grid = _crm_grid(cfg)
    log_l = grid.log_likelihood(tallies)
    scaled = np.exp(log_l - log_l.max())
    base = grid.weights * scaled * grid.prior
    denom = float(base.sum())
    post_mean = (grid.curve @ base) / denom
    best = None
    best_dist = float("inf")
    for dose in range(1, len(post_mean) + 1):
        if allowed is not None and dose not in allowed:
            continue
        dist = abs(float(post_mean[dose - 1]) - cfg.p_T)
        if dist < best_dist - 1e-12:
            best, best_dist = dose, dist
    if best is None:
        raise ValueError("no dose available for recommendation")
    return best


@lru_cache(maxsize=200_000)
def decide_from_tallies(
    cfg: DesignConfig,
    tallies: tuple[tuple[int, int], ...],
    allowed: tuple[int, ...] | None = None,
) -> int:
    """Memoized history-design decision from per-dose (n, y) tallies,
    optionally restricted to a subset of doses."""
    if cfg.design == INTCRM:
        return _intcrm_from_tallies(cfg, tallies, allowed)
    if cfg.design == CRM:
        return _crm_from_tallies(cfg, tallies, allowed)
    raise ValueError(f"{cfg.design} does not decide from history tallies")


# ---------------------------------------------------------------------------
# i3+3 benchmark


def i3p3_decide(cfg: DesignConfig, state: DoseState) -> Action:
    """Rule-based comparison of the empirical rate against the (closed)
    equivalence interval; a rate just above it still counts as a stay when
    removing a single DLT would land below the interval."""
    n, y = state.n, state.y
    if n < 1:
        raise ValueError("i3+3 needs at least one patient")
    lo, hi = cfg.ei
    if y < n * lo - BOUNDARY_ATOL:
        return ESCALATE
    if y <= n * hi + BOUNDARY_ATOL:
        return STAY
    if y - 1 < n * lo - BOUNDARY_ATOL:
        return STAY
    return DEESCALATE


# ---------------------------------------------------------------------------
# Dispatch


_TALLY_RULES = {
    MTPI: mtpi_decide,
    MTPI2: mtpi2_decide,
    BOIN: boin_decide,
    CCD: ccd_decide,
    I3PLUS3: i3p3_decide,
}


@lru_cache(maxsize=200_000)
def decide_tally(cfg: DesignConfig, n: int, y: int) -> Action:
    """Memoized tally-design decision for the current dose's (n, y)."""
    try:
        rule = _TALLY_RULES[cfg.design]
    except KeyError:
        raise ValueError(
            f"{cfg.design} decisions depend on the full history, not a "
            f"single tally"
        ) from None
    return rule(cfg, DoseState(n=n, y=y))
