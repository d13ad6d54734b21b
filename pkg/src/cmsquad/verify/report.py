"""Check reports: measured constants per n, a worst-case witness, pass flag."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

STABILITY_FACTOR = 2.0


@dataclass
class CheckReport:
    name: str
    constants: dict = field(default_factory=dict)  # n -> {constant name: value}
    witness: dict | None = None
    passed: bool = True
    tolerance: float = 0.0
    gating: bool = True
    notes: list = field(default_factory=list)

    def add(self, n, key, value):
        self.constants.setdefault(n, {})[key] = float(value)

    def fail(self, note):
        self.passed = False
        self.notes.append(note)

    def text(self):
        lines = [f"[{self.name}] {'PASS' if self.passed else 'FAIL'}" + ("" if self.gating else " (report only)")]
        lines.append(f"  tolerance: {self.tolerance:g}")
        for n in sorted(self.constants):
            vals = ", ".join(f"{k}={v:.6g}" for k, v in sorted(self.constants[n].items()))
            lines.append(f"  n={n}: {vals}")
        if self.witness:
            lines.append("  witness: " + ", ".join(f"{k}={_short(v)}" for k, v in self.witness.items()))
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)

    def rows(self):
        for n in sorted(self.constants):
            for k, v in sorted(self.constants[n].items()):
                yield [self.name, n, k, f"{v:.17g}", int(self.passed), int(self.gating)]


def _short(v):
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def stable(values, factor=STABILITY_FACTOR, base=None):
    """Every value within ``factor`` of the baseline (the smallest-n value).

    ``values`` maps n to a measured constant. Non-positive baselines make the
    ratio meaningless; they pass only if every value is also non-positive.
    """
    ns = sorted(values)
    if not ns:
        return True
    ref = values[ns[0]] if base is None else values[base]
    if not math.isfinite(ref):
        return False
    if ref <= 0:
        return all(values[n] <= 0 for n in ns)
    return all(ref / factor <= values[n] <= ref * factor for n in ns)


def band_stable(lows, highs, factor=STABILITY_FACTOR):
    """The [low, high] band at the smallest n, widened by ``factor``, contains
    the bands at every larger n."""
    ns = sorted(lows)
    lo0, hi0 = lows[ns[0]], highs[ns[0]]
    return all(lows[n] >= lo0 / factor and highs[n] <= hi0 * factor for n in ns)


def text_report(reports):
    return "\n\n".join(r.text() for r in sorted(reports, key=lambda r: r.name)) + "\n"


def csv_report(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "n", "constant", "value", "passed", "gating"])
    for r in sorted(reports, key=lambda r: r.name):
        for row in r.rows():
            w.writerow(row)
    return buf.getvalue()


def all_passed(reports):
    return all(r.passed for r in reports if r.gating)
