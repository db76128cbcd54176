from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EpsilonSchedule:
    """Piecewise-linear epsilon decay.

    Epsilon starts at ``initial`` and moves linearly to each target over the
    matching fraction of the run; the last segment ends exactly on the final
    episode so epsilon is 0 there with the default targets.
    """

    initial: float = 1.0
    fractions: tuple = (0.30, 0.40, 0.30)
    targets: tuple = (0.9, 0.2, 0.0)

    def __post_init__(self):
        if len(self.fractions) != len(self.targets) or not self.fractions:
            raise ValueError("fractions and targets must be non-empty and the same length")
        if abs(sum(self.fractions) - 1.0) > 1e-9 or min(self.fractions) < 0:
            raise ValueError("segment fractions must be non-negative and sum to 1")

    def knots(self, total: int) -> list[tuple[float, float]]:
        xs, acc = [0.0], 0.0
        for f in self.fractions[:-1]:
            acc += f
            xs.append(min(acc * total, total - 1))
        xs.append(float(total - 1))
        return list(zip(xs, (self.initial, *self.targets)))

    def __call__(self, episode: int, total: int) -> float:
        return epsilon_at(self, episode, total)


def epsilon_at(schedule: EpsilonSchedule, episode: int, total: int) -> float:
    if total < 2:
        raise ValueError("an epsilon schedule needs at least 2 episodes")
    if not 0 <= episode < total:
        raise IndexError(f"episode {episode} outside [0, {total})")
    knots = schedule.knots(total)
    # short runs squeeze several knots onto the last episode; the latest
    # segment containing the episode wins so the final value is the last target
    for (x0, y0), (x1, y1) in reversed(list(zip(knots, knots[1:]))):
        if x0 <= episode <= x1:
            if x1 == x0:
                return y1
            return y0 + (y1 - y0) * (episode - x0) / (x1 - x0)
    return knots[-1][1]


def epsilon_curve(schedule: EpsilonSchedule, total: int) -> list[float]:
    """Epsilon for every episode of a run, computed segment by segment."""
    return [epsilon_at(schedule, i, total) for i in range(total)]


DEFAULT_SCHEDULE = EpsilonSchedule()
