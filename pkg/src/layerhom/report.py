"""Keyed diagnostic rows with CSV and JSON-summary output."""
import csv
import json
import math
from dataclasses import dataclass, field


@dataclass
class Row:
    epsilon: float
    quantity: str
    value: float
    baseline: float = math.nan
    ratio: float = math.nan
    passed: bool = True
    meta: dict = field(default_factory=dict)


@dataclass
class DiagnosticsReport:
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, epsilon, quantity, value, baseline=math.nan, ratio=math.nan, passed=True, **meta):
        row = Row(float(epsilon), quantity, float(value), float(baseline), float(ratio), bool(passed), meta)
        self.rows.append(row)
        return row

    def series(self, quantity):
        """(epsilons, values) for one quantity, in insertion order."""
        rs = [r for r in self.rows if r.quantity == quantity]
        return [r.epsilon for r in rs], [r.value for r in rs]

    def quantities(self):
        seen = []
        for r in self.rows:
            if r.quantity not in seen:
                seen.append(r.quantity)
        return seen

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def failures(self):
        return [r for r in self.rows if not r.passed]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "quantity", "value", "baseline", "ratio", "pass"])
            for r in self.rows:
                w.writerow([_fmt(r.epsilon), r.quantity, _fmt(r.value), _fmt(r.baseline),
                            _fmt(r.ratio), int(r.passed)])

    def summary(self):
        return {
            "passed": self.passed,
            "n_rows": len(self.rows),
            "failures": [f"{r.quantity}@{r.epsilon:g}" for r in self.failures()],
            "notes": list(self.notes),
        }

    def write_summary(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def _fmt(x):
    return repr(float(x))
