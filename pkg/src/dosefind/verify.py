"""Machine verification that the closed-form design rules coincide with the
generic posterior-mode engine, plus the numerical contracts of the
dose-response intervals. Each check scans its full input space and reports
the first counterexample on failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .designs import (
    DesignConfig,
    INTCRM,
    MTPI,
    _threshold_rule,
    intcrm_decide,
    mtpi2_decide,
    mtpi_decide,
    power_curve,
    solve_theta_intervals,
)
from .framework import (
    DEESCALATE,
    ESCALATE,
    STAY,
    DoseState,
    Interval,
    PartitionSpec,
    PointMassPrior,
    TruncatedBetaPrior,
    argmax_action,
    bayes_decide,
)

__all__ = [
    "CheckResult",
    "check_mtpi_vs_bayes",
    "check_boin_vs_point_mass",
    "check_ccd_vs_point_mass",
    "check_mtpi2_map",
    "check_loss_enumeration",
    "check_intcrm_vs_riemann",
    "check_theta_boundaries",
    "standard_checks",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    counterexample: str | None = None
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{self.name}: {status} ({self.seconds:.2f}s) {self.detail}"
        if self.counterexample:
            out += f" first counterexample: {self.counterexample}"
        return out


def _tally_states(max_n: int) -> Iterator[DoseState]:
    for n in range(1, max_n + 1):
        for y in range(0, n + 1):
            yield DoseState(n=n, y=y)


def _timed(name: str, detail: str, scan) -> CheckResult:
    start = time.perf_counter()
    counterexample = scan()
    elapsed = time.perf_counter() - start
    return CheckResult(
        name=name,
        passed=counterexample is None,
        detail=detail,
        counterexample=counterexample,
        seconds=elapsed,
    )


def _point_mass_partition(
    atoms: tuple[float, float, float], boundaries: tuple[float, float]
) -> PartitionSpec:
    """Three intervals split at the decision boundaries; each prior atom is
    interior to its interval by construction."""
    b1, b2 = boundaries
    if not atoms[0] < b1 < atoms[1] < b2 < atoms[2]:
        raise ValueError(
            f"boundaries {boundaries} do not separate atoms {atoms}"
        )
    return PartitionSpec(
        intervals=(
            Interval(0.0, b1, True, True),
            Interval(b1, b2, False, False),
            Interval(b2, 1.0, True, True),
        ),
        labels=(ESCALATE, STAY, DEESCALATE),
    )


def check_mtpi_vs_bayes(cfg: DesignConfig, max_n: int = 30) -> CheckResult:
    """The unit-probability-mass argmax must equal the posterior-mode engine
    under uniform truncated priors, exactly, on every tally."""
    prior = TruncatedBetaPrior()
    part = cfg.partition3

    def scan() -> str | None:
        for state in _tally_states(max_n):
            lhs = mtpi_decide(cfg, state)
            rhs = bayes_decide(prior, part, state)
            if lhs != rhs:
                return f"(n={state.n}, y={state.y}): {lhs} != {rhs}"
        return None

    return _timed(
        "mtpi-upm-vs-interval-bayes",
        f"exhaustive over n<=1..{max_n}",
        scan,
    )


def check_boin_vs_point_mass(
    cfg: DesignConfig,
    max_n: int = 30,
    lambda_override: tuple[float, float] | None = None,
    label: str = "boin-thresholds-vs-point-mass-bayes",
) -> CheckResult:
    """The empirical-rate threshold rule must equal the posterior-mode
    engine under point-mass priors at the design's atoms, boundary tallies
    included. lambda_override perturbs the thresholds (for mutation
    testing) without moving the atoms."""
    atoms = cfg.boin_atoms
    lam1, lam2 = (
        lambda_override if lambda_override is not None else cfg.boin_lambdas
    )
    prior = PointMassPrior(atoms=atoms)
    part = _point_mass_partition(atoms, cfg.boin_lambdas)

    def scan() -> str | None:
        for state in _tally_states(max_n):
            lhs = _threshold_rule(state.n, state.y, lam1, lam2)
            rhs = bayes_decide(prior, part, state)
            if lhs != rhs:
                return f"(n={state.n}, y={state.y}): {lhs} != {rhs}"
        return None

    return _timed(label, f"atoms={tuple(round(a, 6) for a in atoms)}", scan)


def check_ccd_vs_point_mass(cfg: DesignConfig, max_n: int = 30) -> CheckResult:
    """The interval-edge threshold rule must equal the posterior-mode engine
    under point-mass priors at the inverse-boundary atoms."""
    atoms = cfg.ccd_atoms
    lo, hi = cfg.ei
    prior = PointMassPrior(atoms=atoms)
    part = _point_mass_partition(atoms, (lo, hi))

    def scan() -> str | None:
        for state in _tally_states(max_n):
            lhs = _threshold_rule(state.n, state.y, lo, hi)
            rhs = bayes_decide(prior, part, state)
            if lhs != rhs:
                return f"(n={state.n}, y={state.y}): {lhs} != {rhs}"
        return None

    return _timed(
        "ccd-thresholds-vs-point-mass-bayes",
        f"atoms={tuple(round(a, 6) for a in atoms)}",
        scan,
    )


def check_mtpi2_map(cfg: DesignConfig, max_n: int = 30) -> CheckResult:
    """The refined-partition rule must equal the position map applied to the
    posterior-mode winner over the fine partition."""
    prior = TruncatedBetaPrior()
    part = cfg.fine_partition
    lo, hi = cfg.ei

    def position(k: int) -> str:
        iv = part.intervals[k - 1]
        if iv.hi <= lo + 1e-12:
            return ESCALATE
        if iv.lo >= hi - 1e-12:
            return DEESCALATE
        return STAY

    def scan() -> str | None:
        for state in _tally_states(max_n):
            lhs = mtpi2_decide(cfg, state)
            rhs = position(bayes_decide(prior, part, state))
            if lhs != rhs:
                return f"(n={state.n}, y={state.y}): {lhs} != {rhs}"
        return None

    return _timed(
        "mtpi2-map-vs-fine-partition-bayes",
        f"K={len(part.intervals)} subintervals",
        scan,
    )


def check_loss_enumeration(
    cfg: DesignConfig, max_n: int = 12, grid_per_interval: int = 4001
) -> CheckResult:
    """Minimizing grid-enumerated posterior expected 0-1 loss must agree
    with maximizing the interval posterior probabilities."""
    prior = TruncatedBetaPrior()
    part = cfg.partition3
    grids = []
    for iv in part.intervals:
        # midpoint rule inside each interval; grid points never touch edges
        step = iv.length / grid_per_interval
        grids.append(np.linspace(iv.lo + step / 2, iv.hi - step / 2,
                                 grid_per_interval))

    def scan() -> str | None:
        for n in range(0, max_n + 1):
            for y in range(0, n + 1):
                state = DoseState(n=n, y=y)
                # posterior mass per interval on the grid; uniform prior
                # over intervals, flat within each (Beta(1,1)), so each
                # interval's prior density is 1/(3 * length)
                masses = []
                for iv, ts in zip(part.intervals, grids):
                    kern = ts**y * (1.0 - ts) ** (n - y)
                    masses.append(kern.mean() / 3.0)
                total = sum(masses)
                losses = [1.0 - m / total for m in masses]
                lhs = argmax_action([-l for l in losses], part.labels)
                rhs = bayes_decide(prior, part, state)
                if lhs != rhs:
                    return f"(n={n}, y={y}): loss argmin {lhs} != {rhs}"
        return None

    return _timed(
        "expected-loss-enumeration-vs-posterior-mode",
        f"grid {grid_per_interval}/interval, n<=0..{max_n}",
        scan,
    )


def check_intcrm_vs_riemann(
    cfg: DesignConfig,
    n_histories: int = 50,
    seed: int = 902140,
    grid_points: int = 100_000,
    max_patients: int = 30,
) -> CheckResult:
    """The production decision must match a flat Riemann-sum posterior over
    the full parameter range, history by history."""
    cfg = cfg.for_doses(len(cfg.skeleton) if cfg.skeleton else 5)
    skeleton = np.asarray(cfg.skeleton)
    n_doses = len(skeleton)
    ti = solve_theta_intervals(cfg)
    lo, hi = ti.psi[0], ti.psi[-1]
    h = (hi - lo) / grid_points
    ts = lo + (np.arange(grid_points) + 0.5) * h
    curve = skeleton[:, None] ** np.exp(ts)[None, :]
    log_curve = np.log(curve)
    log_miss = np.log1p(-curve)
    sigma = math.sqrt(cfg.sigma2)
    pdf = np.exp(-0.5 * (ts / sigma) ** 2)
    interval_of = np.searchsorted(np.asarray(ti.psi[1:-1]), ts, side="right")

    def oracle(history: list[tuple[int, int]]) -> int:
        n = np.zeros(n_doses)
        y = np.zeros(n_doses)
        for dose, dlt in history:
            n[dose - 1] += 1
            y[dose - 1] += dlt
        log_l = y @ log_curve + (n - y) @ log_miss
        w = np.exp(log_l - log_l.max()) * pdf
        scores = []
        for k in range(n_doses):
            mask = interval_of == k
            scores.append(float(w[mask].sum() / pdf[mask].sum()))
        return argmax_action(scores, tuple(range(1, n_doses + 1)))

    rng = np.random.default_rng(seed)

    def scan() -> str | None:
        for i in range(n_histories):
            n_pat = int(rng.integers(1, max_patients + 1))
            doses = rng.integers(1, n_doses + 1, n_pat)
            flags = (rng.random(n_pat) < 0.3).astype(int)
            history = list(zip(doses.tolist(), flags.tolist()))
            lhs = intcrm_decide(cfg, history)
            rhs = oracle(history)
            if lhs != rhs:
                return f"history #{i} (n={n_pat}): {lhs} != {rhs}"
        return None

    return _timed(
        "intcrm-vs-riemann-oracle",
        f"{n_histories} random histories, {grid_points}-point oracle",
        scan,
    )


def check_theta_boundaries(
    p_T: float = 0.3,
    delta: float = 0.05,
    dose_counts: tuple[int, ...] = (4, 5, 6),
    residual_tol: float = 1e-8,
    grid_points: int = 10_000,
) -> CheckResult:
    """Every solved boundary must satisfy its defining equation to within
    residual_tol, and between boundaries the owning dose must be strictly
    closest to the target on a dense parameter grid."""

    def scan() -> str | None:
        for T in dose_counts:
            cfg = DesignConfig(design=INTCRM, p_T=p_T, delta=delta).for_doses(T)
            ti = solve_theta_intervals(cfg)
            q = cfg.skeleton
            for k in range(2, T + 1):
                psi = ti.psi[k - 1]
                res = abs(
                    power_curve(q[k - 2], psi)
                    + power_curve(q[k - 1], psi)
                    - 2.0 * p_T
                )
                if res >= residual_tol:
                    return f"T={T}, boundary {k}: residual {res:.3g}"
            ts = np.linspace(ti.psi[0], ti.psi[-1], grid_points + 2)[1:-1]
            for t in ts:
                if any(abs(t - psi) < 1e-9 for psi in ti.psi):
                    continue
                dists = [abs(power_curve(qd, t) - p_T) for qd in q]
                owner = 0
                while t >= ti.psi[owner + 1]:
                    owner += 1
                if min(range(T), key=lambda d: dists[d]) != owner:
                    return (
                        f"T={T}, theta={t:.6f}: dose {owner + 1} not closest"
                    )
        return None

    return _timed(
        "theta-boundary-residuals",
        f"T in {dose_counts}, tol {residual_tol:g}, {grid_points}-point grid",
        scan,
    )


def standard_checks(
    p_T: float = 0.3,
    eps1: float = 0.05,
    eps2: float = 0.05,
    generic_atoms: tuple[float, float] = (0.2, 0.4),
    n_doses: int = 5,
    delta: float = 0.05,
    sigma2: float = 1.34,
) -> list[CheckResult]:
    """The full verification battery with the given trial settings."""
    interval = DesignConfig(design=MTPI, p_T=p_T, eps1=eps1, eps2=eps2)
    boin_generic = DesignConfig(
        design="BOIN", p_T=p_T, eps1=eps1, eps2=eps2,
        boin_phi_E=generic_atoms[0], boin_phi_D=generic_atoms[1],
    )
    model = DesignConfig(
        design=INTCRM, p_T=p_T, delta=delta, sigma2=sigma2
    ).for_doses(n_doses)
    return [
        check_mtpi_vs_bayes(interval),
        check_boin_vs_point_mass(interval),
        check_boin_vs_point_mass(
            boin_generic, label="boin-generic-atoms-vs-point-mass-bayes"
        ),
        check_ccd_vs_point_mass(interval),
        check_mtpi2_map(interval),
        check_loss_enumeration(interval),
        check_intcrm_vs_riemann(model),
        check_theta_boundaries(p_T=p_T, delta=delta),
    ]
