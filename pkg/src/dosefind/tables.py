"""Pre-tabulated decision tables for the tally-driven designs.

A table holds one entry per reachable (n, y): the design's up-and-down move,
or DU where the dose-exclusion safety rule fires first. Emission is
byte-stable so tables can be frozen as goldens and carried into the clinic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .designs import TALLY_DESIGNS, DesignConfig, decide_tally
from .framework import DoseState
from .trial import excess_toxicity_prob

__all__ = ["DecisionTable", "build_table", "emit", "parse_csv", "ENTRY_DU"]

ENTRY_DU = "DU"
_FORMATS = ("csv", "txt")


@dataclass(frozen=True)
class DecisionTable:
    """Entries for all 1 <= n <= max_n, 0 <= y <= n."""

    design: DesignConfig
    max_n: int
    cells: dict[tuple[int, int], str]

    def entry(self, n: int, y: int) -> str:
        return self.cells[(n, y)]


def build_table(cfg: DesignConfig, max_n: int = 30) -> DecisionTable:
    """Tabulate the design decision for every tally, substituting DU where
    the current dose would be excluded as too toxic."""
    if cfg.design not in TALLY_DESIGNS:
        raise ValueError(
            f"{cfg.design} decisions depend on the assignment history and "
            f"cannot be tabulated by (n, y)"
        )
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    cells = {}
    for n in range(1, max_n + 1):
        for y in range(0, n + 1):
            excess = excess_toxicity_prob(DoseState(n=n, y=y), cfg.p_T)
            if excess > cfg.safety_threshold:
                cells[(n, y)] = ENTRY_DU
            else:
                cells[(n, y)] = str(decide_tally(cfg, n, y))
    return DecisionTable(design=cfg, max_n=max_n, cells=cells)


def emit(table: DecisionTable, fmt: str = "csv") -> str:
    """Render a table with one column per n and one row per y.

    The csv form round-trips through parse_csv; the txt form is an aligned
    display for humans. Both are deterministic.
    """
    if fmt not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}, got {fmt!r}")
    header = ["y\\n"] + [str(n) for n in range(1, table.max_n + 1)]
    rows = [header]
    for y in range(0, table.max_n + 1):
        row = [str(y)]
        for n in range(1, table.max_n + 1):
            row.append(table.cells[(n, y)] if y <= n else "")
        rows.append(row)
    if fmt == "csv":
        return "\n".join(",".join(row) for row in rows) + "\n"
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_csv(text: str, cfg: DesignConfig) -> DecisionTable:
    """Rebuild a DecisionTable from its csv emission."""
    lines = [line for line in text.splitlines() if line]
    header = lines[0].split(",")
    ns = [int(tok) for tok in header[1:]]
    if ns != list(range(1, len(ns) + 1)):
        raise ValueError(f"malformed header: {header}")
    max_n = ns[-1]
    cells = {}
    for line in lines[1:]:
        toks = line.split(",")
        y = int(toks[0])
        for n, tok in zip(ns, toks[1:]):
            if tok:
                cells[(n, y)] = tok
    expected = {(n, y) for n in range(1, max_n + 1) for y in range(n + 1)}
    if set(cells) != expected:
        raise ValueError("parsed cells do not cover all (n, y)")
    return DecisionTable(design=cfg, max_n=max_n, cells=cells)
