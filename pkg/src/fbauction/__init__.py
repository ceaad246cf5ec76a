"""Approximate Bayes-Nash equilibria of sealed-bid auctions with correlated values.

The auction is modeled in agent form: one agent per (bidder, value)
realization, with a probability distribution over which agent subsets
participate. Strategies are probability vectors over a discrete bid grid,
solved by fictitious bidding (iterated best replies mixed into an averaged
profile) and certified exactly against all pure deviations on the grid.
"""

from .model import (
    FIRST_PRICE,
    AgentPartition,
    AuctionInstance,
    BidGrid,
    InvalidInstanceError,
    MixedStrategy,
    PaymentRule,
    PlayerAuction,
    Scenario,
    StrategyProfile,
    convert_player_to_agent,
    participation_probabilities,
    player_payoff,
    validate_instance,
)
from .payoff import (
    ConditionalScenarioTable,
    PayoffEngine,
    StrictCdfTable,
    all_payoff_curves,
    brute_force_payoff,
    conditional_scenarios,
    expected_payoff,
    mixed_payoff,
    payoff_curve,
    strict_cdf,
)
from .solver import (
    INIT_UNIFORM,
    INIT_ZERO_BID,
    LearningSchedule,
    SolverConfig,
    SolverResult,
    best_response,
    classical_fp_mode,
    fb_step,
    run,
)
from .verify import EquilibriumCertificate, cdf_distance, certificate_to_json, certify
from .instances import (
    BUILTIN_EXAMPLES,
    NamedInstance,
    example_1,
    example_2,
    example_3,
    example_4,
    example_5,
    fixture_path,
    get_example,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    random_instance,
    save_instance,
)

__version__ = "0.1.0"

__all__ = [
    "AgentPartition",
    "AuctionInstance",
    "BidGrid",
    "BUILTIN_EXAMPLES",
    "ConditionalScenarioTable",
    "EquilibriumCertificate",
    "FIRST_PRICE",
    "INIT_UNIFORM",
    "INIT_ZERO_BID",
    "InvalidInstanceError",
    "LearningSchedule",
    "MixedStrategy",
    "NamedInstance",
    "PayoffEngine",
    "PaymentRule",
    "PlayerAuction",
    "Scenario",
    "SolverConfig",
    "SolverResult",
    "StrategyProfile",
    "StrictCdfTable",
    "all_payoff_curves",
    "best_response",
    "brute_force_payoff",
    "cdf_distance",
    "certificate_to_json",
    "certify",
    "classical_fp_mode",
    "conditional_scenarios",
    "convert_player_to_agent",
    "example_1",
    "example_2",
    "example_3",
    "example_4",
    "example_5",
    "expected_payoff",
    "fb_step",
    "fixture_path",
    "get_example",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "mixed_payoff",
    "participation_probabilities",
    "payoff_curve",
    "player_payoff",
    "random_instance",
    "run",
    "save_instance",
    "strict_cdf",
    "validate_instance",
]
