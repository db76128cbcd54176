"""Basic-strategy charts: loading, lookup and chart-to-chart agreement.

A chart has three sub-tables indexed by (row key, dealer up card), with the
dealer's ace as 11:

* ``hard``: hard totals 4-21
* ``soft``: soft totals 13-21
* ``pair``: pair card value 2-11 (11 = aces; any two equal ten-valued ranks
  use row 10)

Each cell holds a primary action and an optional fallback used when the
primary is not legal (e.g. "double, else hit"). Charts are stored as CSV with
columns ``table_kind,row_key,dealer_up,primary_action,fallback_action``;
learned charts may mark cells ``unreached``.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Optional

from .exceptions import InvalidComparison, InvalidHand
from .rules import Action, hand_value
from .shoe import Card

CHART_COLUMNS = ("table_kind", "row_key", "dealer_up", "primary_action", "fallback_action")
UNREACHED = "unreached"
DEALER_UPS = tuple(range(2, 12))
ROWS = {
    "hard": tuple(range(4, 22)),
    "soft": tuple(range(13, 22)),
    "pair": tuple(range(2, 12)),
}
VARIANTS = ("S17", "H17")


class Cell(NamedTuple):
    primary: Action
    fallback: Optional[Action] = None


def standard_domain() -> frozenset:
    return frozenset((kind, row, up) for kind, rows in ROWS.items() for row in rows for up in DEALER_UPS)


@dataclass(frozen=True)
class StrategyChart:
    """Immutable strategy chart. ``cells`` maps (kind, row, up) -> Cell;
    keys listed in ``unreached`` belong to the domain but carry no action."""

    cells: Mapping[tuple, Cell]
    variant: str = "S17"
    unreached: frozenset = field(default_factory=frozenset)

    @property
    def domain(self) -> frozenset:
        return frozenset(self.cells) | self.unreached

    def action(self, kind: str, row: int, up: int) -> Optional[Action]:
        cell = self.cells.get((kind, row, up))
        return None if cell is None else cell.primary

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CHART_COLUMNS)
        for key in sorted(self.domain, key=_cell_order):
            kind, row, up = key
            cell = self.cells.get(key)
            if cell is None:
                w.writerow([kind, row, up, UNREACHED, ""])
            else:
                w.writerow([kind, row, up, cell.primary.label,
                            cell.fallback.label if cell.fallback is not None else ""])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _cell_order(key):
    kind, row, up = key
    return (("hard", "soft", "pair").index(kind) if kind in ROWS else 3, kind, row, up)


class ChartAgreement(NamedTuple):
    matched_cells: int
    total_cells: int
    agreement_pct: float
    unreached_cells: int = 0


def read_chart(source, variant: str = "S17") -> StrategyChart:
    """Parse chart CSV from a path or an open text stream."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_chart(fh, variant)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != CHART_COLUMNS:
        raise ValueError(f"chart CSV must have columns {CHART_COLUMNS}, got {reader.fieldnames}")
    cells, unreached = {}, set()
    for row in reader:
        key = (row["table_kind"], int(row["row_key"]), int(row["dealer_up"]))
        if key in cells or key in unreached:
            raise ValueError(f"duplicate chart cell {key}")
        if row["primary_action"] == UNREACHED:
            unreached.add(key)
            continue
        fb = row["fallback_action"].strip()
        cells[key] = Cell(Action.parse(row["primary_action"]), Action.parse(fb) if fb else None)
    return StrategyChart(cells, variant, frozenset(unreached))


_CHART_CACHE: dict[str, StrategyChart] = {}


def chart(variant: str = "S17") -> StrategyChart:
    """The encoded basic-strategy chart for a dealer-stands (S17) or
    dealer-hits (H17) soft-17 game."""
    variant = variant.upper()
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if variant not in _CHART_CACHE:
        res = resources.files("bjlab") / "data" / f"basic_strategy_{variant.lower()}.csv"
        with res.open("r", newline="") as fh:
            _CHART_CACHE[variant] = read_chart(fh, variant)
    return _CHART_CACHE[variant]


def chart_for(dealer_hits_soft17: bool) -> StrategyChart:
    return chart("H17" if dealer_hits_soft17 else "S17")


def _pick(cell: Optional[Cell], legal) -> Optional[Action]:
    if cell is None:
        return None
    if cell.primary in legal:
        return cell.primary
    if cell.fallback is not None and cell.fallback in legal:
        return cell.fallback
    return None


def lookup(chart: StrategyChart, hand: Sequence[Card], dealer_up: Card, legal: Iterable[Action]) -> Action:
    """Chart action for ``hand`` against ``dealer_up`` restricted to ``legal``.

    Pairs consult the pair table first; if neither its primary nor fallback
    is legal (typically a split after a split) the hand is looked up by total.
    An illegal double or surrender with no legal fallback degrades to hit.
    Soft 12 (only A-A) is not charted and is always hit.
    """
    legal = frozenset(legal)
    hv = hand_value(hand)
    if hv.is_bust:
        raise InvalidHand("cannot look up a bust hand")
    up = dealer_up.chart_value
    if hv.is_pair:
        act = _pick(chart.cells.get(("pair", hand[0].chart_value, up)), legal)
        if act is not None:
            return act
    if hv.is_soft:
        key = ("soft", hv.total, up) if hv.total >= 13 else None
    else:
        key = ("hard", hv.total, up)
    cell = chart.cells.get(key) if key is not None else Cell(Action.HIT)
    act = _pick(cell, legal)
    if act is not None:
        return act
    if Action.HIT in legal and (cell is None or cell.primary != Action.STAND):
        return Action.HIT
    if Action.STAND in legal:
        return Action.STAND
    return min(legal)


def compare_charts(a: StrategyChart, b: StrategyChart) -> ChartAgreement:
    """Share of cells where both charts name the same primary action.

    Only cells defined in both charts are scored; cells unreached in either
    are counted separately.
    """
    if a.domain != b.domain:
        raise InvalidComparison("charts cover different cell domains")
    both = set(a.cells) & set(b.cells)
    matched = sum(1 for k in both if a.cells[k].primary == b.cells[k].primary)
    total = len(both)
    pct = 100.0 * matched / total if total else 0.0
    return ChartAgreement(matched, total, pct, len(a.domain) - total)


def chart_diff(a: StrategyChart, b: StrategyChart) -> list[tuple]:
    """Cells whose primary action differs, as (key, a_action, b_action)."""
    keys = sorted(set(a.cells) & set(b.cells), key=_cell_order)
    return [(k, a.cells[k].primary, b.cells[k].primary) for k in keys
            if a.cells[k].primary != b.cells[k].primary]
