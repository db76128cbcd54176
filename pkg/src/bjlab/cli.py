"""Command-line entry point: ``bjlab {train,backtest,tablesim,sweep,chart}``.

Settings resolve as built-in defaults, then ``--config`` file, then flags.
Exit status is 0 on success, 2 on a usage error and 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import harness
from .basic_strategy import chart as standard_chart
from .basic_strategy import compare_charts
from .harness import ExperimentConfig, parse_bool, parse_int_range, parse_systems
from .learn import (QTable, backtest, evaluate_base, extract_strategy, mc_off_policy,
                    mc_on_policy_q, random_baseline, train_q_base, train_q_ext)
from .learn.qlearning import LearnMetrics
from .rules import Action
from .tablesim import TableConfig, run_table

log = logging.getLogger("bjlab")

MODELS = ("base", "extended", "mc_on", "mc_off")


def _model(text):
    if text not in MODELS:
        raise ValueError(f"model must be one of {', '.join(MODELS)}")
    return text


def _scheme(text):
    if text not in ("shaped", "monetary"):
        raise ValueError("reward_scheme must be 'shaped' or 'monetary'")
    return text


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


def _system(text):
    return parse_systems(text)[0]


# key -> (converter, help)
OPTIONS = {
    "seed": (_seed, "root seed (unsigned 64-bit)"),
    "workers": (_positive_int, "parallel workers for sweeps"),
    "model": (_model, "base | extended | mc_on | mc_off"),
    "episodes": (_positive_int, "training episodes (rounds played for backtest)"),
    "backtest_episodes": (_positive_int, "greedy evaluation episodes after training"),
    "alpha": (float, "learning rate"),
    "gamma": (float, "discount factor"),
    "decks": (parse_int_range, "deck count, list or inclusive range such as 4..8"),
    "system": (_system, "counting system"),
    "systems": (parse_systems, "comma-separated counting systems"),
    "reward_scheme": (_scheme, "shaped | monetary training rewards"),
    "use_count": (parse_bool, "put the true-count bucket in the learner's state"),
    "infinite_deck": (parse_bool, "deal with replacement instead of from a shoe"),
    "qtable": (str, "Q-table CSV written by 'train --model extended'"),
    "players": (_positive_int, "players at the table (1-7)"),
    "sims": (_positive_int, "number of simulations"),
    "bankroll": (int, "starting bankroll of each player"),
    "unit": (_positive_int, "card counter's betting unit"),
    "table_min": (_positive_int, "table minimum bet"),
    "table_max": (_positive_int, "table maximum bet"),
    "dealer_ratio": (float, "dealer bankroll as a multiple of a player's"),
    "h17": (parse_bool, "dealer hits soft 17"),
}

COMMON = {"seed": 0, "workers": 1}
DEFAULTS = {
    "train": {"model": "base", "episodes": 1000, "backtest_episodes": 1000, "alpha": 0.05,
              "gamma": 0.1, "decks": [6], "h17": False, "system": "hi_lo",
              "reward_scheme": "shaped", "use_count": True, "infinite_deck": False},
    "backtest": {"qtable": None, "episodes": 10_000, "decks": [6], "h17": False,
                 "system": "hi_lo", "use_count": True, "infinite_deck": False},
    "tablesim": {"players": 4, "decks": [6], "h17": False, "sims": 1000, "bankroll": 100_000,
                 "unit": 10_000, "table_min": 1, "table_max": 100_000, "dealer_ratio": 200.0},
    "sweep": {"decks": [4, 5, 6, 7, 8], "systems": ["hi_lo", "zen", "uston_apc"],
              "episodes": 50_000, "backtest_episodes": 10_000, "alpha": 0.05, "gamma": 0.1,
              "h17": False, "use_count": True},
    "chart": {"episodes": 1_000_000, "alpha": 0.01, "gamma": 0.1, "decks": [6], "h17": True,
              "system": "none", "use_count": False, "infinite_deck": True},
}
EXTENDED_TRAIN_DEFAULTS = {"episodes": 50_000, "backtest_episodes": 10_000}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bjlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in harness.COMMANDS:
        p = sub.add_parser(command, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="flat key=value settings file (flags win)")
        p.add_argument("--out", help="output directory (default: current directory)")
        keys = [*COMMON, *DEFAULTS[command]]
        for key in keys:
            if key == "h17":
                g = p.add_mutually_exclusive_group()
                g.add_argument("--h17", dest="h17", action="store_const", const=True,
                               help="dealer hits soft 17")
                g.add_argument("--s17", dest="h17", action="store_const", const=False,
                               help="dealer stands on soft 17")
                continue
            conv, text = OPTIONS[key]
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=_argtype(conv), help=text)
    return parser


def _argtype(conv):
    def f(text):
        try:
            return conv(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    f.__name__ = getattr(conv, "__name__", "value")
    return f


def resolve(args: argparse.Namespace) -> tuple[ExperimentConfig, Path]:
    command = args.command
    values = dict(COMMON)
    values.update(DEFAULTS[command])
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out", "verbose")}
    file_values = {}
    if getattr(args, "config", None):
        try:
            raw = harness.read_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        file_command = raw.pop("command", command)
        if file_command != command:
            raise UsageError(f"config is for '{file_command}', not '{command}'")
        for key, text in raw.items():
            if key not in values:
                raise UsageError(f"unknown setting {key!r} for '{command}'")
            try:
                file_values[key] = OPTIONS[key][0](text)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
    model = flags.get("model", file_values.get("model", values.get("model")))
    if command == "train" and model != "base":
        values.update(EXTENDED_TRAIN_DEFAULTS)
    values.update(file_values)
    values.update(flags)
    if command != "sweep" and len(values["decks"]) != 1:
        raise UsageError(f"'{command}' takes a single deck count")
    if command == "backtest" and not values["qtable"]:
        raise UsageError("backtest needs --qtable")
    if command == "tablesim" and not 1 <= values["players"] <= 7:
        raise UsageError("--players must be between 1 and 7")
    out = Path(getattr(args, "out", None) or ".")
    return ExperimentConfig(command, values), out


# -- commands --------------------------------------------------------------------

def cmd_train(cfg: ExperimentConfig, out: Path) -> None:
    v = cfg.values
    hp = cfg.hyperparams()
    if v["model"] == "base":
        q, training = train_q_base(hp)
        greedy = evaluate_base(q, v["backtest_episodes"], v["seed"])
        rand = random_baseline(v["backtest_episodes"], v["seed"])
        harness.emit_learning_curve(training, out / "curve.csv")
        rows = [("training", training), ("greedy", greedy), ("random", rand)]
    elif v["model"] == "extended":
        rules = cfg.rules()
        training = LearnMetrics()
        q = train_q_ext(rules, v["system"], hp, reward_scheme=v["reward_scheme"],
                        use_count=v["use_count"], infinite_deck=v["infinite_deck"], metrics=training)
        bt = backtest(q, rules, v["system"], v["backtest_episodes"], v["seed"],
                      use_count=v["use_count"], infinite_deck=v["infinite_deck"], curve=False)
        harness.emit_learning_curve(training, out / "curve.csv")
        rows = [("training", training), ("backtest", bt)]
    else:
        if v["model"] == "mc_on":
            q = mc_on_policy_q(hp)
        else:
            _, q = mc_off_policy(hp)
        rows = [("greedy", evaluate_base(q, v["backtest_episodes"], v["seed"]))]
    q.to_csv(out / "qtable.csv")
    extract_strategy(q, v["model"]).to_csv(out / "chart.csv")
    harness.metrics_rows(rows, out / "metrics.csv")
    for phase, m in rows:
        print(f"{phase}: episodes={m.episodes} win%={m.winning_odds_pct:.2f} "
              f"avg_payoff={m.average_payoff:.4f} total={m.total_payoff:.1f}")


def cmd_backtest(cfg: ExperimentConfig, out: Path) -> None:
    v = cfg.values
    q = QTable.from_csv(v["qtable"])
    if q.state_fields != ("hand_kind", "row_key", "dealer_up", "tc_bucket"):
        raise ValueError("backtest needs an extended-model Q table")
    m = backtest(q, cfg.rules(), v["system"], v["episodes"], v["seed"], use_count=v["use_count"],
                 infinite_deck=v["infinite_deck"], curve=False)
    harness.metrics_rows([("backtest", m)], out / "metrics.csv")
    print(f"backtest: episodes={m.episodes} win%={m.winning_odds_pct:.2f} "
          f"draw%={m.draws_pct:.2f} loss%={m.loss_pct:.2f} avg_payoff={m.average_payoff:.4f}")


def cmd_tablesim(cfg: ExperimentConfig, out: Path) -> None:
    v = cfg.values
    tc = TableConfig(num_players=v["players"], num_decks=v["decks"][0], dealer_hits_soft17=v["h17"],
                     num_simulations=v["sims"], player_bankroll=v["bankroll"],
                     dealer_bankroll_ratio=v["dealer_ratio"], betting_unit=v["unit"],
                     table_min_bet=v["table_min"], table_max_bet=v["table_max"], seed=v["seed"])
    report = run_table(tc)
    text = report.to_csv(out / "tablesim.csv")
    print(f"rounds={report.rounds_played} simulations={report.simulations_completed}")
    print(text, end="")


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> None:
    v = cfg.values
    rows = harness.run_sweep(v["decks"], v["systems"], cfg.hyperparams(), out / "metrics.csv",
                             workers=v["workers"], h17=v["h17"], use_count=v["use_count"])
    print(harness.sweep_csv(rows), end="")


def cmd_chart(cfg: ExperimentConfig, out: Path) -> None:
    v = cfg.values
    rules = cfg.rules()
    q = train_q_ext(rules, v["system"], cfg.hyperparams(), use_count=v["use_count"],
                    infinite_deck=v["infinite_deck"])
    learned = extract_strategy(q, "H17" if v["h17"] else "S17")
    learned.to_csv(out / "chart.csv")
    q.to_csv(out / "qtable.csv")
    agree = compare_charts(learned, standard_chart("h17" if v["h17"] else "s17"))
    surrender = sum(1 for c in learned.cells.values() if c.primary == Action.SURRENDER)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("matched_cells", "total_cells", "agreement_pct", "unreached_cells", "surrender_cells"))
    w.writerow((agree.matched_cells, agree.total_cells, f"{agree.agreement_pct:.4f}",
                agree.unreached_cells, surrender))
    (out / "metrics.csv").write_text(buf.getvalue())
    print(f"agreement with the standard chart: {agree.agreement_pct:.2f}% "
          f"({agree.matched_cells}/{agree.total_cells}), surrender cells: {surrender}")


HANDLERS = {"train": cmd_train, "backtest": cmd_backtest, "tablesim": cmd_tablesim,
            "sweep": cmd_sweep, "chart": cmd_chart}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, out = resolve(args)
        out.mkdir(parents=True, exist_ok=True)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bjlab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bjlab: error: {exc}", file=sys.stderr)
        return 1
    try:
        HANDLERS[cfg.command](cfg, out)
        cfg.write_manifest(out)
    except Exception as exc:
        log.debug("command failed", exc_info=True)
        print(f"bjlab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
