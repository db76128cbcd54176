"""Experiment plumbing: resolved configs, manifests, sweeps and CSV emission.

Every run is described by a flat ``key=value`` config. The resolved config is
written back out as ``manifest.txt`` next to the outputs, and feeding that
manifest to ``--config`` reproduces the same CSV bytes.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .counting import SYSTEMS
from .learn import Hyperparams, LearnMetrics, backtest, epsilon_at, train_q_ext
from .learn.schedule import DEFAULT_SCHEDULE, EpsilonSchedule
from .rules import RulesConfig
from .seeding import derive_seed

log = logging.getLogger(__name__)

COMMANDS = ("train", "backtest", "tablesim", "sweep", "chart")
SWEEP_COLUMNS = ("decks", "system", "winning_odds_pct", "avg_payoff", "seed")
CURVE_COLUMNS = ("episode", "cumulative_payoff", "epsilon")
METRICS_COLUMNS = ("phase", "episodes", "wins", "draws", "losses", "winning_odds_pct",
                   "draws_pct", "loss_pct", "average_payoff", "total_payoff")


# -- config values -------------------------------------------------------------

def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_int_range(text) -> list[int]:
    """``"6"``, ``"4..8"`` (inclusive) or ``"4,6,8"``."""
    if isinstance(text, list):
        return text
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(x) for x in part.split("..", 1))
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise ValueError(f"deck counts must be positive integers, got {text!r}")
    return out


def parse_systems(text) -> list[str]:
    if isinstance(text, list):
        return text
    names = [s.strip() for s in str(text).split(",") if s.strip()]
    for n in names:
        if n not in SYSTEMS:
            raise ValueError(f"unknown counting system {n!r}; choose from {', '.join(SYSTEMS)}")
    if not names:
        raise ValueError("no counting systems given")
    return names


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        if all(isinstance(v, int) for v in value) and value == list(range(value[0], value[-1] + 1)) \
                and len(value) > 1:
            return f"{value[0]}..{value[-1]}"
        return ",".join(str(v) for v in value)
    return str(value)


def read_config_file(path) -> dict:
    """Flat ``key = value`` text; blank lines and ``#`` comments ignored."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


@dataclass
class ExperimentConfig:
    """Fully resolved settings for one command."""

    command: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def rules(self, num_decks: int | None = None) -> RulesConfig:
        decks = num_decks if num_decks is not None else self.values["decks"][0]
        return RulesConfig(num_decks=decks, dealer_hits_soft17=self.values["h17"])

    def hyperparams(self) -> Hyperparams:
        v = self.values
        return Hyperparams(alpha=v["alpha"], gamma=v["gamma"], train_episodes=v["episodes"],
                           backtest_episodes=v.get("backtest_episodes", 0), seed=v["seed"])

    def manifest_text(self) -> str:
        lines = [f"command={self.command}"]
        lines += [f"{k}={format_value(v)}" for k, v in sorted(self.values.items()) if k != "out"]
        return "\n".join(lines) + "\n"

    def write_manifest(self, out_dir) -> Path:
        path = Path(out_dir) / "manifest.txt"
        path.write_text(self.manifest_text())
        return path


# -- CSV emitters ----------------------------------------------------------------

def _write(text: str, path) -> str:
    if path is not None:
        Path(path).write_text(text)
    return text


def emit_learning_curve(metrics: LearnMetrics, path=None,
                        schedule: EpsilonSchedule = DEFAULT_SCHEDULE) -> str:
    """CSV ``episode, cumulative_payoff, epsilon``, one row per episode.

    Epsilon comes from the run when it was recorded; otherwise it is
    recomputed from ``schedule``.
    """
    curve = metrics.cumulative_payoff_curve
    eps = metrics.epsilons
    n = len(curve)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for i, payoff in enumerate(curve):
        e = eps[i] if i < len(eps) else (epsilon_at(schedule, i, n) if n > 1 else 0.0)
        w.writerow([i, repr(float(payoff)), repr(float(e))])
    return _write(buf.getvalue(), path)


def metrics_rows(rows: list[tuple[str, LearnMetrics]], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_COLUMNS)
    for phase, m in rows:
        w.writerow([phase, m.episodes, m.wins, m.draws, m.losses, f"{m.winning_odds_pct:.6f}",
                    f"{m.draws_pct:.6f}", f"{m.loss_pct:.6f}", f"{m.average_payoff:.6f}",
                    f"{m.total_payoff:.6f}"])
    return _write(buf.getvalue(), path)


# -- sweep -----------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    decks: int
    system: str
    seed: int
    hp: Hyperparams
    h17: bool = False
    use_count: bool = True


def cell_seed(root: int, decks: int, system: str) -> int:
    return derive_seed(root, "sweep", decks, system)


def run_cell(cell: SweepCell) -> tuple:
    rules = RulesConfig(num_decks=cell.decks, dealer_hits_soft17=cell.h17)
    hp = Hyperparams(cell.hp.alpha, cell.hp.gamma, cell.hp.train_episodes,
                     cell.hp.backtest_episodes, cell.seed)
    q = train_q_ext(rules, cell.system, hp, use_count=cell.use_count)
    m = backtest(q, rules, cell.system, hp.backtest_episodes, cell.seed,
                 use_count=cell.use_count, curve=False)
    return (cell.decks, cell.system, f"{m.winning_odds_pct:.4f}", f"{m.average_payoff:.6f}", cell.seed)


def run_sweep(decks, systems, hp: Hyperparams, path=None, workers: int = 1, h17: bool = False,
              use_count: bool = True) -> list[tuple]:
    """Train and backtest every (decks, system) cell.

    Rows come back ordered by (decks, system) whatever order the workers
    finish in. Each cell's seed is derived from ``hp.seed`` and the cell
    coordinates, so a cell can be rerun on its own. If a cell fails, the rows
    finished before it are written followed by an ``# incomplete`` marker,
    and the error propagates.
    """
    cells = [SweepCell(d, s, cell_seed(hp.seed, d, s), hp, h17, use_count)
             for d in sorted(decks) for s in systems]
    rows: list[tuple] = []
    error = None
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_cell, c) for c in cells]
            for c, f in zip(cells, futures):
                try:
                    rows.append(f.result())
                except Exception as exc:  # keep finished rows, then re-raise
                    error = (c, exc)
                    for g in futures:
                        g.cancel()
                    break
    else:
        for c in cells:
            try:
                rows.append(run_cell(c))
            except Exception as exc:
                error = (c, exc)
                break
            log.info("sweep cell decks=%d system=%s done", c.decks, c.system)
    text = sweep_csv(rows)
    if error is not None:
        c, exc = error
        text += f"# incomplete: cell decks={c.decks} system={c.system} failed: {exc}\n"
        _write(text, path)
        raise RuntimeError(f"sweep cell decks={c.decks} system={c.system} failed") from exc
    _write(text, path)
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()
