"""IEEE format mapping and per-program report figures.

Widths map to the smallest IEEE 754 binary format whose significand (with
the implicit bit) can hold them: 11 (binary16), 24 (binary32), 53
(binary64), 113 (binary128). Savings are measured against a
double-precision baseline of 53 bits per counted label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import Unrepresentable
from .frontend import LabeledProgram, all_labels_by_kind

BASELINE_BITS = 53


class IeeeFormat(Enum):
    FP16 = 11
    FP32 = 24
    FP64 = 53
    FP128 = 113

    @property
    def significand(self) -> int:
        return self.value


def to_format(nsb: int) -> IeeeFormat:
    """Smallest format whose significand holds max(nsb, 1) bits."""
    if nsb > 113:
        raise Unrepresentable(nsb)
    need = max(nsb, 1)
    for fmt in IeeeFormat:
        if fmt.significand >= need:
            return fmt
    raise Unrepresentable(nsb)  # pragma: no cover


@dataclass
class FormatCounts:
    fp16: int = 0
    fp32: int = 0
    fp64: int = 0
    fp128: int = 0
    mp: int = 0

    def total(self) -> int:
        return self.fp16 + self.fp32 + self.fp64 + self.fp128


@dataclass
class SavingsReport:
    var_savings_pct: Fraction
    op_savings_pct: Fraction
    baseline_bits: int


def def_labels(program: LabeledProgram) -> List[int]:
    kinds, _ = all_labels_by_kind(program)
    return sorted(l for l, k in kinds.items() if k == "def")


def op_labels(program: LabeledProgram) -> List[int]:
    kinds, _ = all_labels_by_kind(program)
    return sorted(l for l, k in kinds.items() if k in ("op", "fun"))


def summarize(tuning, program: LabeledProgram) -> Tuple[FormatCounts, SavingsReport]:
    """Format census over variable definitions plus bit savings.

    Counts one entry per textual definition (assignments and input
    declarations). mp is the largest width over all labels. Savings compare
    the assigned bits against 53 per label, separately for variable
    definitions and for operators.
    """
    kinds, _ = all_labels_by_kind(program)
    counts = FormatCounts()
    dsum = 0
    defs = def_labels(program)
    for l in defs:
        t = tuning.get(l, 0)
        dsum += t
        fmt = to_format(t)
        if fmt is IeeeFormat.FP16:
            counts.fp16 += 1
        elif fmt is IeeeFormat.FP32:
            counts.fp32 += 1
        elif fmt is IeeeFormat.FP64:
            counts.fp64 += 1
        else:
            counts.fp128 += 1
    counts.mp = max((tuning.get(l, 0) for l, k in kinds.items() if k != "stmt"),
                    default=0)
    ops = op_labels(program)
    osum = sum(tuning.get(l, 0) for l in ops)
    var_pct = Fraction(100) * (1 - Fraction(dsum, BASELINE_BITS * len(defs))) if defs else Fraction(100)
    op_pct = Fraction(100) * (1 - Fraction(osum, BASELINE_BITS * len(ops))) if ops else Fraction(100)
    return counts, SavingsReport(var_pct, op_pct, BASELINE_BITS)


def pct_str(p: Fraction) -> str:
    """Exact two-decimal rendering; deterministic across runs."""
    q = round(p * 100)   # integer hundredths, ties to even
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 100}.{q % 100:02d}"


CSV_HEADER = ("program,requirement,mode,objective,uniform,mp,msum,mop,"
              "fp16,fp32,fp64,fp128,var_savings_pct,op_savings_pct,"
              "policy_iterations,validated")


def csv_row(program_name: str, requirement: int, mode: str, objective: str,
            uniform: bool, stats, counts: FormatCounts, savings: SavingsReport,
            validated: Optional[bool]) -> str:
    return ",".join([
        program_name, str(requirement), mode, objective,
        "uniform" if uniform else "mixed",
        str(stats.mp), str(stats.msum), str(stats.mop),
        str(counts.fp16), str(counts.fp32), str(counts.fp64), str(counts.fp128),
        pct_str(savings.var_savings_pct), pct_str(savings.op_savings_pct),
        str(stats.policy_iterations),
        "" if validated is None else ("pass" if validated else "FAIL"),
    ])


def tuning_to_json(tuning, system, stats, objective: str, uniform: bool) -> str:
    """Serialized tuning: every label with kind, name, width and format."""
    labels = []
    for l in sorted(system.vars):
        kind = system.kinds.get(l, "var")
        if kind in ("use", "def"):
            kind_out = "var"
        elif kind in ("op", "fun"):
            kind_out = "op"
        else:
            kind_out = "const"
        t = tuning.get(l, 0)
        labels.append({
            "id": l,
            "kind": kind_out,
            "name": system.names.get(l),
            "nsb": t,
            "format": to_format(t).name,
        })
    return json.dumps({
        "labels": labels,
        "mp": stats.mp,
        "msum": stats.msum,
        "mop": stats.mop,
        "policy_iterations": stats.policy_iterations,
        "objective": objective,
        "uniform": uniform,
    }, indent=2)


def tuning_from_json(text: str) -> Dict[int, int]:
    data = json.loads(text)
    return {entry["id"]: entry["nsb"] for entry in data["labels"]}
