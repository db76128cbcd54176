"""Tabular action values with visit counts, the one-step Q-learning update
and epsilon-greedy action selection."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from pathlib import Path

from ..rules import Action

N_ACTIONS = len(Action)
ACTION_ORDER = tuple(Action)  # canonical tie-break order
TERMINAL = None


class QTable:
    """Action values keyed by state; each state holds one slot per Action.

    States never written to read as all zeros, which is also the value of the
    terminal state.
    """

    def __init__(self, state_fields: tuple[str, ...] = ()):
        self.state_fields = tuple(state_fields)
        self.values: dict[tuple, list[float]] = {}
        self.visit_counts: dict[tuple, list[int]] = {}

    def row(self, state) -> list[float]:
        vals = self.values.get(state)
        if vals is None:
            vals = self.values[state] = [0.0] * N_ACTIONS
            self.visit_counts[state] = [0] * N_ACTIONS
        return vals

    def get(self, state, action) -> float:
        if state is TERMINAL:
            return 0.0
        vals = self.values.get(state)
        return 0.0 if vals is None else vals[action]

    def set(self, state, action, value: float) -> None:
        self.row(state)[action] = value

    def visits(self, state, action) -> int:
        v = self.visit_counts.get(state)
        return 0 if v is None else v[action]

    def max_value(self, state, legal: Iterable[Action]) -> float:
        if state is TERMINAL:
            return 0.0
        vals = self.values.get(state)
        if vals is None:
            return 0.0
        return max(vals[a] for a in legal)

    def greedy(self, state, legal: Iterable[Action]) -> Action:
        """Highest-valued legal action; ties go to the earliest in canonical order."""
        vals = self.values.get(state)
        legal = sorted(legal)
        if vals is None:
            return Action(legal[0])
        best = legal[0]
        best_v = vals[best]
        for a in legal[1:]:
            if vals[a] > best_v:
                best, best_v = a, vals[a]
        return Action(best)

    def states(self) -> list:
        return list(self.values)

    def visited_states(self) -> list:
        return [s for s, v in self.visit_counts.items() if any(v)]

    def copy(self) -> QTable:
        q = QTable(self.state_fields)
        q.values = {s: list(v) for s, v in self.values.items()}
        q.visit_counts = {s: list(v) for s, v in self.visit_counts.items()}
        return q

    def __eq__(self, other):
        return (isinstance(other, QTable) and self.values == other.values
                and self.visit_counts == other.visit_counts)

    def __len__(self):
        return len(self.values)

    def to_csv(self, path=None, actions: Iterable[Action] = ACTION_ORDER) -> str:
        """``state_fields..., action, q_value, visits``; rows sorted by state."""
        actions = tuple(actions)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.state_fields, "action", "q_value", "visits"])
        for state in sorted(self.values, key=_state_key):
            vals, vis = self.values[state], self.visit_counts[state]
            for a in actions:
                w.writerow([*_fmt_state(state), a.label, repr(vals[a]), vis[a]])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> QTable:
        if isinstance(source, (str, Path)):
            with open(source, newline="") as fh:
                return cls.from_csv(fh)
        reader = csv.reader(source)
        header = next(reader)
        fields = tuple(header[:-3])
        q = cls(fields)
        for rec in reader:
            state = tuple(_parse_field(x) for x in rec[:len(fields)])
            a = Action.parse(rec[len(fields)])
            q.row(state)[a] = float(rec[-2])
            q.visit_counts[state][a] = int(rec[-1])
        return q


def _state_key(state):
    return tuple((0, x, "") if isinstance(x, int) else (1, 0, str(x)) for x in state)


def _fmt_state(state):
    return [int(x) if isinstance(x, bool) else x for x in state]


def _parse_field(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def q_update(q: QTable, s, a: Action, r: float, s_next, alpha: float, gamma: float,
             next_legal: Iterable[Action] = (Action.STAND, Action.HIT)) -> QTable:
    """One-step Q-learning: Q(s,a) += alpha * (r + gamma * max Q(s', .) - Q(s,a)).

    ``s_next`` is None for a terminal transition. Mutates and returns ``q``.
    """
    vals = q.row(s)
    target = r if s_next is TERMINAL else r + gamma * q.max_value(s_next, next_legal)
    vals[a] += alpha * (target - vals[a])
    q.visit_counts[s][a] += 1
    return q


def select_action(q: QTable, s, legal: Iterable[Action], eps: float, rng) -> Action:
    """Epsilon-greedy: uniform over ``legal`` with probability ``eps``, else greedy.

    ``rng`` is a ``random.Random``.
    """
    legal = sorted(legal)
    if not legal:
        raise ValueError("no legal actions to choose from")
    if eps > 0 and rng.random() < eps:
        return Action(legal[int(rng.random() * len(legal))])
    return q.greedy(s, legal)
