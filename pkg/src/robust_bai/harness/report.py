"""Complexity table of the benchmark setups and CSV output of error-rate reports."""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass
from pathlib import Path

from ..complexity import h_bob, h_sr, h_unif, round_half_away
from ..core import gaps_from_means
from ..environments import PRESET_IDS, PRESET_NAMES, preset

# Published integer values of (H_SR, H_BOB, H_UNIF) per setup.
PUBLISHED = {
    "A": (2000, 2000, 2000),
    "B": (1389, 2083, 3125),
    "C": (5540, 5540, 11080),
    "D": (400, 500, 938),
    "E": (3200, 3200, 24000),
    "F": (5000, 7692, 50000),
    "G": (4082, 5714, 12000),
    "H": (3200, 22627, 160000),
}

MEASURES = ("h_sr", "h_bob", "h_unif")


@dataclass(frozen=True)
class Table1Row:
    setup: str
    name: str
    values: tuple[float, float, float]
    published: tuple[int, int, int]

    @property
    def rounded(self) -> tuple[int, int, int]:
        return tuple(round_half_away(v) for v in self.values)

    @property
    def matches(self) -> tuple[bool, bool, bool]:
        return tuple(r == p for r, p in zip(self.rounded, self.published))


def table1(rounded_gaps: bool = False, setup_e_mode: str = "table") -> list[Table1Row]:
    """Complexities of the eight setups next to their published values.

    ``rounded_gaps`` rounds setup C's gaps to three decimals first.
    """
    rows = []
    for s in PRESET_IDS:
        means = preset(s, setup_e_mode=setup_e_mode, setup_c_gaps="rounded3" if rounded_gaps else "exact")
        p = gaps_from_means(means)
        rows.append(Table1Row(s, PRESET_NAMES[s], (h_sr(p), h_bob(p), h_unif(p)), PUBLISHED[s]))
    return rows


def format_table1(rows: list[Table1Row]) -> str:
    lines = [f"{'setup':<6}{'H_SR':>10}{'H_BOB':>10}{'H_UNIF':>10}   published            match"]
    for r in rows:
        vals = "".join(f"{v:>10}" for v in r.rounded)
        pub = "/".join(str(v) for v in r.published)
        flag = "yes" if all(r.matches) else "NO (" + ",".join(m for m, ok in zip(MEASURES, r.matches) if not ok) + ")"
        lines.append(f"{r.setup:<6}{vals}   {pub:<20} {flag}")
    return "\n".join(lines) + "\n"


CSV_HEADER = ("setup", "learner", "n", "repetitions", "errors", "error_rate", "ci_low", "ci_high", "theory_bound", "vacuous", "seed")


def _num(x) -> str:
    return "" if x is None else "%.10g" % x


def csv_text(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.rows:
        vac = r.vacuous
        w.writerow([
            r.setup, r.learner, r.n, r.repetitions, r.errors,
            _num(r.error_rate), _num(r.ci_low), _num(r.ci_high), _num(r.theory_bound),
            "" if vac is None else str(vac).lower(), r.seed,
        ])
    return buf.getvalue()


def emit_csv(report, path=None) -> None:
    """Write the report as UTF-8 CSV with LF line endings; stdout when ``path`` is None."""
    text = csv_text(report)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_bytes(text.encode("utf-8"))
