"""Dynamic range determination by high-precision execution.

The program is run repeatedly in the 128-bit reference arithmetic, sampling
declared inputs uniformly from their intervals. For every labeled site the
analysis records the extreme magnitudes seen across all executions and all
dynamic visits, from which the integer ufp (leading-bit weight of the
largest magnitude) and lfp (leading-bit weight of the smallest nonzero
magnitude) are derived. These integers are the only inputs constraint
generation needs; the exactness data additionally drives the carry-bit
refinement.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, Optional

from . import bigfloat as bf
from .bigfloat import Val
from .frontend import LabeledProgram
from .interp import Execution, Observer


def ufp_of(x) -> int:
    """floor(log2 |x|) computed from the binary representation; 0 for x = 0.

    Accepts ints, floats, Fractions and (man, exp) pairs.
    """
    if isinstance(x, tuple):
        return bf.ufp(x)
    if isinstance(x, int):
        return abs(x).bit_length() - 1 if x else 0
    if isinstance(x, float):
        return bf.ufp(bf.from_float(x))
    if isinstance(x, Fraction):
        if x == 0:
            return 0
        num, den = abs(x.numerator), x.denominator
        e = num.bit_length() - den.bit_length()
        # 2^e <= num/den < 2^(e+2); settle the boundary exactly.
        if (num >> e if e >= 0 else num << -e) >= den:
            if (num >> (e + 1) if e + 1 >= 0 else num << -(e + 1)) >= den:
                return e + 1
            return e
        return e - 1
    raise TypeError(f"unsupported operand type {type(x)!r}")


@dataclass
class RangeInfo:
    """Observed magnitude statistics for one label."""

    max_abs: Optional[Val] = None
    min_abs: Optional[Val] = None
    always_zero: bool = True
    exact: bool = True
    exact_bits: int = 0        # max significand width over visits while exact
    unreached: bool = True
    deriv_max: Optional[Val] = None   # unary nodes: max |f'| over visited args

    @property
    def ufp(self) -> int:
        if self.unreached or self.always_zero:
            return 0
        return bf.ufp(self.max_abs)

    @property
    def lfp(self) -> Optional[int]:
        if self.min_abs is None or self.min_abs[0] == 0:
            return None
        return bf.ufp(self.min_abs)

    @property
    def deriv_ufp(self) -> int:
        if self.deriv_max is None or self.deriv_max[0] == 0:
            return 0
        return bf.ufp(self.deriv_max)

    def observe(self, v: Val, exact: bool):
        self.unreached = False
        a = bf.abs_val(v)
        if v[0] != 0:
            self.always_zero = False
            if self.max_abs is None or bf.cmp(a, self.max_abs) > 0:
                self.max_abs = a
        if self.min_abs is None or bf.cmp(a, self.min_abs) < 0:
            self.min_abs = a
        if exact:
            self.exact_bits = max(self.exact_bits, bf.width(v))
        else:
            self.exact = False

    def observe_deriv(self, d: Val):
        if self.deriv_max is None or bf.cmp(d, self.deriv_max) > 0:
            self.deriv_max = d


class RangeMap:
    """Label -> RangeInfo, total over the labels visited during analysis."""

    def __init__(self):
        self.info: Dict[int, RangeInfo] = {}

    def __getitem__(self, label: int) -> RangeInfo:
        return self.info.setdefault(label, RangeInfo())

    def __contains__(self, label: int) -> bool:
        return label in self.info

    def get(self, label: int) -> Optional[RangeInfo]:
        return self.info.get(label)

    def items(self):
        return sorted(self.info.items())

    def dump(self) -> str:
        """One record per label: id, extremes (decimal), ufp, lfp, flags."""
        lines = []
        for label, ri in self.items():
            if ri.unreached:
                lines.append(f"{label} unreached")
                continue
            mx = bf.to_decimal_str(ri.max_abs) if ri.max_abs else "0"
            mn = bf.to_decimal_str(ri.min_abs) if ri.min_abs else "0"
            lfp = ri.lfp if ri.lfp is not None else "-"
            flags = []
            if ri.always_zero:
                flags.append("zero")
            if ri.exact:
                flags.append(f"exact:{ri.exact_bits}")
            if ri.deriv_max is not None:
                flags.append(f"dufp:{ri.deriv_ufp}")
            lines.append(f"{label} {mx} {mn} {ri.ufp} {lfp} {','.join(flags) or '-'}")
        return "\n".join(lines) + "\n"


class _Recorder(Observer):
    def __init__(self, rmap: RangeMap):
        self.rmap = rmap

    def site(self, label, value, exact):
        self.rmap[label].observe(value, exact)

    def unary_arg(self, label, fun, arg):
        from .interp import _deriv_bound
        # result for sqrt is needed; recompute cheaply at low precision
        result = bf.sqrt(arg, 64)[0] if fun == "sqrt" and arg[0] >= 0 else bf.ZERO
        self.rmap[label].observe_deriv(_deriv_bound(fun, arg, result))


def _touch_all_labels(prog: LabeledProgram, rmap: RangeMap):
    from .frontend import all_labels_by_kind
    kinds, _ = all_labels_by_kind(prog)
    for label, kind in kinds.items():
        if kind != "stmt":
            rmap[label]  # materialize defaults (unreached) for dead labels


def sample_inputs(prog: LabeledProgram, seed: int, trial: int) -> Dict[str, Val]:
    """Uniform draw of every declared input for one trial; deterministic in
    (seed, trial) so range analysis and validation see identical points."""
    rng = random.Random(seed * 1000003 + trial)
    out: Dict[str, Val] = {}
    for decl in prog.inputs():
        lo = float(Fraction(decl.lo))
        hi = float(Fraction(decl.hi))
        out[decl.var] = bf.from_float(rng.uniform(lo, hi))
    return out


def input_trials(prog: LabeledProgram, trials: int, seed: int) -> Iterator[Dict[str, Val]]:
    if not prog.inputs():
        yield {}
        return
    for t in range(trials):
        yield sample_inputs(prog, seed, t)


def analyze(program: LabeledProgram, trials: int = 100, seed: int = 12345,
            iter_cap: int = 100000) -> RangeMap:
    """Execute the program and collect per-label ranges.

    Input-free programs run once regardless of trials. Raises
    DivergenceError or MathDomainError from the underlying execution.
    """
    rmap = RangeMap()
    recorder = _Recorder(rmap)
    for trial, inputs in enumerate(input_trials(program, trials, seed)):
        Execution(program, inputs=inputs, observer=recorder,
                  iter_cap=iter_cap, trial=trial).run()
    _touch_all_labels(program, rmap)
    return rmap
