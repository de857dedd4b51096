"""Mixed-precision emulation and the end-to-end accuracy check.

round_to is the single rounding primitive: nearest, ties to even on the
retained last bit, exact integer arithmetic throughout so results are
bit-reproducible across platforms. emulate() runs a program with every
labeled value rounded to its assigned width while a shadow reference
execution (128 significand bits) decides control flow; validate() compares
the two executions of the required variable against the accuracy contract

    |x_mixed - x_ref| <= 2 ** (ufp(x_ref) - n + 1)

which is exactly the error budget an n-significant-bit result is allowed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import bigfloat as bf
from .bigfloat import REF_BITS, Val
from .frontend import LabeledProgram
from .interp import Execution
from .ranges import input_trials


@dataclass(frozen=True)
class MixedValue:
    """A finite value at a known significand width: significand * 2**exponent
    with |significand| < 2**nsb_used and the significand odd (or zero)."""

    significand: int
    exponent: int
    nsb_used: int

    @property
    def value(self) -> Val:
        return (self.significand, self.exponent)

    def __float__(self) -> float:
        return bf.to_float(self.value)


def round_to(x, nsb: int) -> MixedValue:
    """Round x (float, int or (man, exp) pair) to nsb significant bits.

    Round to nearest, ties to even on the retained last bit; exact whenever
    x is representable in nsb bits. nsb must be >= 1.
    """
    if nsb < 1:
        raise ValueError("nsb must be >= 1")
    v = x if isinstance(x, tuple) else bf.from_float(float(x))
    out, _ = bf.round_nsb(v, nsb)
    return MixedValue(out[0], out[1], nsb)


def emulate(program: LabeledProgram, tuning, inputs: Optional[Dict[str, Val]] = None,
            iter_cap: int = 100000, strict_zero: bool = False, trial: int = 0):
    """Run the mixed and reference executions together.

    tuning is a label -> nsb mapping (anything with .get or indexing).
    Labels assigned 0 bits are rounded at 1 bit when reached unless
    strict_zero is set, in which case reaching one raises ReachedZeroNsb.
    Returns the finished Execution; .mix and .ref hold final variable values.
    """
    lookup = tuning.get if hasattr(tuning, "get") else tuning
    ex = Execution(program, inputs=inputs or {}, tuning=lambda l: lookup(l) or 0,
                   iter_cap=iter_cap, strict_zero=strict_zero, trial=trial)
    return ex.run()


@dataclass
class TrialRow:
    trial: int
    err: Val
    bound: Val
    passed: bool

    @property
    def ratio(self) -> float:
        if self.bound[0] == 0:
            return 0.0 if self.err[0] == 0 else float("inf")
        q, _ = bf.div(self.err, self.bound, 53)
        return bf.to_float(q)


@dataclass
class ValidationReport:
    target_var: str
    nsb_required: int
    trials: int
    observed_err: Val
    bound: Val
    passed: bool
    rows: List[TrialRow] = field(default_factory=list)

    def to_json(self, program_name: str = "") -> str:
        return json.dumps({
            "program": program_name,
            "var": self.target_var,
            "nsb_required": self.nsb_required,
            "trials": self.trials,
            "max_err": bf.to_decimal_str(self.observed_err),
            "bound": bf.to_decimal_str(self.bound),
            "pass": self.passed,
        }, indent=2)


def validate(program: LabeledProgram, tuning, requirement: Tuple[str, int],
             trials: int = 100, seed: int = 12345, iter_cap: int = 100000) -> ValidationReport:
    """Check the accuracy contract on the required variable.

    Runs mixed and reference executions on identical inputs; every trial
    must satisfy |mixed - ref| <= 2^(ufp(ref) - n + 1). For input-free
    programs a single run suffices. The reported error/bound pair belongs to
    the worst trial (largest error-to-bound ratio).
    """
    var, n = requirement
    rows: List[TrialRow] = []
    worst: Optional[TrialRow] = None
    for trial, inputs in enumerate(input_trials(program, trials, seed)):
        ex = emulate(program, tuning, inputs=inputs, iter_cap=iter_cap, trial=trial)
        if var not in ex.ref:
            raise KeyError(f"program never assigns required variable '{var}'")
        ref = ex.ref[var][0]
        mix = ex.mix[var]
        err = bf.abs_val(bf.sub(mix, ref))
        bound = bf.pow2(bf.ufp(ref) - n + 1) if ref[0] != 0 else bf.pow2(1 - n)
        ok = bf.cmp(err, bound) <= 0
        row = TrialRow(trial, err, bound, ok)
        rows.append(row)
        if worst is None or _worse(row, worst):
            worst = row
    assert worst is not None
    return ValidationReport(var, n, len(rows), worst.err, worst.bound,
                            all(r.passed for r in rows), rows)


def _worse(a: TrialRow, b: TrialRow) -> bool:
    # compare a.err/a.bound > b.err/b.bound exactly: cross-multiply
    lhs = bf.mul(a.err, b.bound)
    rhs = bf.mul(b.err, a.bound)
    return bf.cmp(lhs, rhs) > 0
