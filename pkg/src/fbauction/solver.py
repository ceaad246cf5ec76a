"""Fictitious bidding: iterated best replies against an averaged profile.

Every iteration, each agent computes a best reply to the *current* strategy
profile (the same snapshot for all agents), then mixes a point mass at that
reply into its strategy:

    w_next = (1 - eta_k) * w + eta_k * point_mass(best reply)

With ``eta_k = 1/(k+1)`` the profile is the running empirical frequency of
past best replies (classical fictitious play); with constant ``eta`` it is an
exponential moving average that progressively forgets the initialization.
Best-reply ties break to the lowest grid index, so runs are deterministic.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .model import AuctionInstance, InvalidInstanceError, StrategyProfile, validate_instance
from .payoff import PayoffEngine, engine_for
from .verify import EquilibriumCertificate, certify

DRIFT_TOL = 1e-9

INIT_UNIFORM = "uniform"
INIT_ZERO_BID = "point-mass-at-zero"


@dataclass(frozen=True)
class LearningSchedule:
    """Step-size sequence: ``c / (k+1)`` (harmonic) or constant ``c``.

    The default, harmonic with coefficient 1, weighs every past best reply
    equally and wipes the initialization on the first step; small
    coefficients leave most of the initialization in place forever, so use
    them deliberately.
    """

    kind: str = "harmonic"
    coefficient: float = 1.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not 0.0 < self.coefficient <= 1.0:
            raise ValueError("coefficient must lie in (0, 1] so every step stays a convex mix")

    @classmethod
    def harmonic(cls, coefficient: float = 1.0) -> "LearningSchedule":
        return cls("harmonic", coefficient)

    @classmethod
    def constant(cls, coefficient: float) -> "LearningSchedule":
        return cls("constant", coefficient)

    def rate(self, k: int) -> float:
        if self.kind == "harmonic":
            return self.coefficient / (k + 1)
        return self.coefficient


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """Everything needed to reproduce a solver run.

    ``init`` is ``"uniform"``, ``"point-mass-at-zero"``, or an explicit
    :class:`StrategyProfile`. An epsilon certificate is computed every
    ``check_interval`` iterations (each check costs about one iteration);
    when ``epsilon_target`` is set the run stops at the first check that
    reaches it. ``independent_player_cache`` lets agents with identical
    rival structure share payoff aggregation -- results are bit-identical
    either way.
    """

    schedule: LearningSchedule = field(default_factory=LearningSchedule)
    max_iterations: int = 100_000
    epsilon_target: float | None = None
    check_interval: int = 1000
    init: str | StrategyProfile = INIT_UNIFORM
    independent_player_cache: bool = False

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if isinstance(self.init, str) and self.init not in (INIT_UNIFORM, INIT_ZERO_BID):
            raise ValueError(f"unknown initialization {self.init!r}")
        if self.epsilon_target is not None and self.epsilon_target < 0:
            raise ValueError("epsilon_target must be >= 0")

    def echo(self) -> dict:
        """JSON-friendly snapshot of the configuration."""
        init = self.init if isinstance(self.init, str) else "explicit"
        return {
            "schedule": {"kind": self.schedule.kind, "coefficient": self.schedule.coefficient},
            "max_iterations": self.max_iterations,
            "epsilon_target": self.epsilon_target,
            "check_interval": self.check_interval,
            "init": init,
            "independent_player_cache": self.independent_player_cache,
        }


@dataclass(frozen=True, eq=False)
class SolverResult:
    """Final profile plus the certificate and sampled epsilon history."""

    profile: StrategyProfile
    iterations_run: int
    certificate: EquilibriumCertificate
    trajectory: tuple[tuple[int, float], ...]
    renormalizations: int = 0


def classical_fp_mode(config: SolverConfig) -> SolverConfig:
    """Variant of ``config`` whose averaging weighs all past replies equally.

    Uses the harmonic schedule with coefficient 1 and a point-mass start; the
    first step then overwrites the initialization entirely, so after ``k``
    steps each weight equals (times the bid was the best reply) / k.
    """
    return dataclasses.replace(config, schedule=LearningSchedule.harmonic(1.0), init=INIT_ZERO_BID)


def _initial_matrix(config: SolverConfig, n_agents: int, n_bids: int) -> np.ndarray:
    if isinstance(config.init, StrategyProfile):
        w = config.init.as_matrix()
        if w.shape != (n_agents, n_bids):
            raise ValueError(f"explicit initialization has shape {w.shape}, instance needs ({n_agents}, {n_bids})")
        return w
    if config.init == INIT_ZERO_BID:
        return StrategyProfile.point_mass(n_agents, n_bids).as_matrix()
    return StrategyProfile.uniform(n_agents, n_bids).as_matrix()


def best_response(agent: int, profile: StrategyProfile, instance: AuctionInstance) -> tuple[int, float]:
    """Lowest grid index maximizing the agent's payoff curve, and that payoff."""
    curve = engine_for(instance).curves(profile.as_matrix())[agent]
    index = int(np.argmax(curve))
    return index, float(curve[index])


def fb_step(profile: StrategyProfile, k: int, config: SolverConfig, instance: AuctionInstance) -> StrategyProfile:
    """One simultaneous fictitious-bidding update of every agent's strategy."""
    w = profile.as_matrix()
    curves = engine_for(instance).curves(w)
    best = np.argmax(curves, axis=1)
    eta = config.schedule.rate(k)
    w *= 1.0 - eta
    w[np.arange(w.shape[0]), best] += eta
    return StrategyProfile.from_matrix(w)


def run(instance: AuctionInstance, config: SolverConfig) -> SolverResult:
    """Run fictitious bidding on ``instance`` until the budget or target is hit.

    Raises :class:`InvalidInstanceError` if the instance fails validation.
    The returned certificate always describes the returned profile.
    """
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstanceError(problems)

    engine = PayoffEngine(instance, dedup=config.independent_player_cache)
    n, n_bids = instance.n_agents, instance.n_bids
    w = _initial_matrix(config, n, n_bids)
    rows = np.arange(n)

    renormalizations = 0
    trajectory: list[tuple[int, float]] = []
    certificate: EquilibriumCertificate | None = None
    certified_at = -1
    iterations = 0

    for k in range(config.max_iterations):
        curves = engine.curves(w)
        best = np.argmax(curves, axis=1)
        eta = config.schedule.rate(k)
        w *= 1.0 - eta
        w[rows, best] += eta
        iterations = k + 1

        # the update is an exact convex mix, so rounding drift is ~1e-16 per
        # step and this guard should essentially never fire
        sums = w.sum(axis=1)
        off = np.abs(sums - 1.0)
        if off.max() > DRIFT_TOL:
            bad = off > DRIFT_TOL
            w[bad] /= sums[bad, None]
            renormalizations += int(bad.sum())

        if iterations % config.check_interval == 0:
            certificate = certify(StrategyProfile.from_matrix(w), instance)
            certified_at = iterations
            trajectory.append((iterations, certificate.epsilon))
            if config.epsilon_target is not None and certificate.epsilon <= config.epsilon_target:
                break

    if certificate is None or certified_at != iterations:
        certificate = certify(StrategyProfile.from_matrix(w), instance)
        trajectory.append((iterations, certificate.epsilon))

    return SolverResult(
        profile=StrategyProfile.from_matrix(w),
        iterations_run=iterations,
        certificate=certificate,
        trajectory=tuple(trajectory),
        renormalizations=renormalizations,
    )
