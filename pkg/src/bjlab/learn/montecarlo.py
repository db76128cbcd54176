"""First-visit Monte Carlo control on the base hit/stand game.

``mc_on_policy`` averages first-visit returns with exploring starts and acts
greedily on the current estimates. ``mc_off_policy`` learns the greedy target
policy from episodes generated by an epsilon-soft behaviour policy, using
weighted importance sampling.
"""

from __future__ import annotations

import random

from ..basic_strategy import StrategyChart
from ..seeding import derive_seed
from .envs import BASE_ACTIONS, BASE_STATE_FIELDS, BaseBlackjackEnv, base_states
from .qlearning import Hyperparams, base_chart, greedy_policy
from .qtable import QTable

MC_DEFAULTS = Hyperparams(alpha=1.0, gamma=1.0, train_episodes=500_000)


def _generate(env: BaseBlackjackEnv, act, start=None):
    """Run one episode; returns ``[(state, action, reward), ...]``."""
    steps = []
    first_action = None
    if start is None:
        s = env.reset()
    else:
        s, first_action = env.reset(start[0]), start[1]
    while True:
        if first_action is not None:
            a, first_action = first_action, None
        else:
            a = act(s)
        s2, r, done = env.step(a)
        steps.append((s, a, r))
        if done:
            return steps
        s = s2


def _first_visit_returns(steps, gamma):
    """Returns following the first occurrence of each (state, action)."""
    g = 0.0
    out = []
    for s, a, r in reversed(steps):
        g = gamma * g + r
        out.append((s, a, g))
    out.reverse()
    seen = set()
    first = []
    for s, a, g in out:
        if (s, a) not in seen:
            seen.add((s, a))
            first.append((s, a, g))
    return first


def mc_on_policy_q(hp: Hyperparams = MC_DEFAULTS, epsilon: float = 0.0,
                   exploring_starts: bool = True) -> QTable:
    """Action values from first-visit MC control.

    With exploring starts each episode begins at a uniformly chosen
    (state, action) pair; afterwards the agent follows the greedy policy
    (epsilon-greedy when ``epsilon > 0``). Q holds sample means of returns.
    """
    env = BaseBlackjackEnv(derive_seed(hp.seed, "shoe"))
    rng = random.Random(derive_seed(hp.seed, "policy"))
    q = QTable(BASE_STATE_FIELDS)
    starts = base_states()
    gamma = hp.gamma

    def act(s):
        if epsilon > 0 and rng.random() < epsilon:
            return BASE_ACTIONS[int(rng.random() * 2)]
        return q.greedy(s, BASE_ACTIONS)

    for _ in range(hp.train_episodes):
        start = None
        if exploring_starts:
            start = (starts[int(rng.random() * len(starts))], BASE_ACTIONS[int(rng.random() * 2)])
        for s, a, g in _first_visit_returns(_generate(env, act, start), gamma):
            vals = q.row(s)
            n = q.visit_counts[s][a] + 1
            q.visit_counts[s][a] = n
            vals[a] += (g - vals[a]) / n
    return q


def mc_on_policy(hp: Hyperparams = MC_DEFAULTS, epsilon: float = 0.0,
                 exploring_starts: bool = True) -> tuple[StrategyChart, dict]:
    """Greedy policy chart and state values V(s) = Q(s, pi(s))."""
    q = mc_on_policy_q(hp, epsilon, exploring_starts)
    policy = greedy_policy(q)
    values = {s: q.get(s, a) for s, a in policy.items()}
    return base_chart(policy, "mc_on_policy"), values


def mc_off_policy(hp: Hyperparams = MC_DEFAULTS, epsilon: float = 0.1,
                  weights_out: dict | None = None) -> tuple[StrategyChart, QTable]:
    """Off-policy first-visit MC control with weighted importance sampling.

    Behaviour is epsilon-greedy around the current target (greedy) policy.
    Each episode is processed backwards, stopping at the first action the
    target would not take. ``weights_out``, if given, receives the cumulative
    importance weight per (state, action).
    """
    env = BaseBlackjackEnv(derive_seed(hp.seed, "shoe"))
    rng = random.Random(derive_seed(hp.seed, "policy"))
    q = QTable(BASE_STATE_FIELDS)
    cum = weights_out if weights_out is not None else {}
    gamma = hp.gamma
    p_greedy = 1.0 - epsilon + epsilon / 2
    p_other = epsilon / 2

    def act(s):
        if epsilon > 0 and rng.random() < epsilon:
            return BASE_ACTIONS[int(rng.random() * 2)]
        return q.greedy(s, BASE_ACTIONS)

    for _ in range(hp.train_episodes):
        steps = _generate(env, act)
        # behaviour probabilities under the policy that generated the episode
        probs = [p_greedy if a == q.greedy(s, BASE_ACTIONS) else p_other for s, a, _ in steps]
        first_index = {}
        for t, (s, a, _) in enumerate(steps):
            first_index.setdefault((s, a), t)
        g, w = 0.0, 1.0
        for t in range(len(steps) - 1, -1, -1):
            s, a, r = steps[t]
            g = gamma * g + r
            if first_index[(s, a)] == t:
                c = cum.get((s, a), 0.0) + w
                cum[(s, a)] = c
                vals = q.row(s)
                vals[a] += (w / c) * (g - vals[a])
                q.visit_counts[s][a] += 1
            if a != q.greedy(s, BASE_ACTIONS):
                break
            w /= probs[t]
    return base_chart(greedy_policy(q), "mc_off_policy"), q


def state_values(q: QTable) -> dict:
    """V(s) = max over hit/stand of Q(s, .) for every visited state."""
    return {s: q.max_value(s, BASE_ACTIONS) for s in q.visited_states()}

