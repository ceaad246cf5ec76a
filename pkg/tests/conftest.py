"""Shared generators and reference oracles for the test suite."""
from __future__ import annotations

import itertools

import numpy as np

from fbauction import (
    AuctionInstance,
    BidGrid,
    PaymentRule,
    PlayerAuction,
    Scenario,
    StrategyProfile,
)


def random_small_instance(rng, max_agents=4, max_scenarios=5, max_grid=20, alpha=1.0) -> AuctionInstance:
    """Valid random instance small enough for brute-force enumeration."""
    n = int(rng.integers(2, max_agents + 1))
    members_seen: dict[frozenset[int], float] = {}
    for _ in range(200):
        members_seen.clear()
        for _ in range(int(rng.integers(1, max_scenarios + 1))):
            size = int(rng.integers(1, n + 1))
            members = frozenset(int(m) for m in rng.choice(n, size=size, replace=False))
            members_seen[members] = members_seen.get(members, 0.0) + 1.0
        if set().union(*members_seen) == set(range(n)):
            break
    probs = rng.random(len(members_seen)) + 0.05
    probs /= probs.sum()
    scenarios = tuple(Scenario(m, float(p)) for m, p in zip(members_seen, probs))
    n_bids = int(rng.integers(2, max_grid + 1))
    interior = np.unique(rng.random(n_bids - 1))
    grid = BidGrid(np.concatenate(([0.0], interior)))
    values = rng.random(n) * 1.2
    return AuctionInstance(values, scenarios, grid, PaymentRule(alpha))


def random_profile(rng, n_agents: int, n_bids: int) -> StrategyProfile:
    """Random mixed strategies with sparse supports and occasional point masses.

    Sparse supports put rival mass exactly on grid levels the deviator also
    uses, which exercises the ties-lose rule.
    """
    w = rng.random((n_agents, n_bids))
    w *= rng.random((n_agents, n_bids)) < 0.7
    for a in range(n_agents):
        if rng.random() < 0.25 or w[a].sum() == 0.0:
            w[a] = 0.0
            w[a, int(rng.integers(n_bids))] = 1.0
    w /= w.sum(axis=1, keepdims=True)
    return StrategyProfile.from_matrix(w)


def exhaustive_player_payoffs(
    players: PlayerAuction,
    agent_weights: list[np.ndarray],
    grid_bids: np.ndarray,
    alpha: float,
) -> np.ndarray:
    """Player expected payoffs by enumerating every value profile and bid combo.

    ``agent_weights`` is indexed by converted agent id (player-major, value
    order), so ``agent_weights[offset_i + t]`` is the bid distribution player
    ``i`` uses when holding its ``t``-th value.
    """
    sizes = [vs.size for vs in players.value_sets]
    offsets = np.concatenate(([0], np.cumsum(sizes)))[:-1]
    n_players = players.n_players
    n_bids = len(grid_bids)
    totals = np.zeros(n_players)
    for vidx in np.ndindex(*players.joint.shape):
        f = float(players.joint[vidx])
        if f == 0.0:
            continue
        strats = [agent_weights[int(offsets[i]) + int(vidx[i])] for i in range(n_players)]
        for combo in itertools.product(range(n_bids), repeat=n_players):
            weight = f
            for i in range(n_players):
                weight *= strats[i][combo[i]]
            if weight == 0.0:
                continue
            bids = [grid_bids[c] for c in combo]
            for i in range(n_players):
                rivals = bids[:i] + bids[i + 1:]
                top = max(rivals) if rivals else 0.0
                if not rivals or bids[i] > top:
                    payment = alpha * bids[i] + (1.0 - alpha) * top
                    totals[i] += weight * (players.value_sets[i][vidx[i]] - payment)
    return totals


def random_player_auction(rng, max_players=3, max_values=3) -> PlayerAuction:
    """Random discrete player-based auction with a dense random joint table."""
    n_players = int(rng.integers(1, max_players + 1))
    sizes = [int(rng.integers(1, max_values + 1)) for _ in range(n_players)]
    value_sets = []
    for size in sizes:
        vs = np.sort(rng.random(size))
        while np.any(np.diff(vs) <= 0):
            vs = np.sort(rng.random(size))
        value_sets.append(vs)
    joint = rng.random(tuple(sizes)) + 0.05
    # sprinkle in a zero-probability profile to exercise sparse conversion,
    # but only where every value keeps positive marginal mass
    if n_players >= 2 and min(sizes) >= 2 and rng.random() < 0.5:
        flat = joint.reshape(-1)
        flat[int(rng.integers(flat.size))] = 0.0
    joint /= joint.sum()
    return PlayerAuction(tuple(value_sets), joint)


def symmetric_binary_analytic_profile(instance: AuctionInstance) -> StrategyProfile:
    """Discretized closed-form equilibrium of the bundled symmetric instance:
    value-0 agents bid 0, value-1 agents follow CDF 1/(1-b) - 1 on [0, 1/2]."""
    bids = instance.grid.bids
    ref = np.minimum(1.0 / (1.0 - np.minimum(bids, 0.5)) - 1.0, 1.0)
    g_weights = np.diff(np.concatenate(([0.0], ref)))
    zero = np.zeros(bids.size)
    zero[0] = 1.0
    return StrategyProfile.from_matrix(np.vstack([zero, zero, g_weights, g_weights]))


def instances_match(a: AuctionInstance, b: AuctionInstance) -> bool:
    return (
        np.array_equal(a.values, b.values)
        and a.scenarios == b.scenarios
        and np.array_equal(a.grid.bids, b.grid.bids)
        and a.rule == b.rule
    )
