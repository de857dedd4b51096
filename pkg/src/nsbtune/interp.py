"""Tree-walking evaluator shared by range analysis and mixed emulation.

The walker always maintains a reference execution (values rounded to
REF_BITS, exactness tracked). When a tuning is supplied it additionally
maintains a mixed value for every variable, rounding each labeled site --
constant loads, variable reads and writes, operator results -- to its
assigned width. Control flow (loop and branch conditions) is always decided
by the reference values, so both executions traverse the same path and the
final values are directly comparable.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional, Tuple

from . import bigfloat as bf
from .bigfloat import REF_BITS, Val
from .errors import DivergenceError, MathDomainError, ReachedZeroNsb
from .frontend import (
    Assign, BinOp, Cond, Const, If, InputDecl, LabeledProgram, Require, UnFun,
    Var, While,
)

# (value, exact) for the reference side
RefV = Tuple[Val, bool]


class Observer:
    """Per-label measurement hooks; the default does nothing."""

    def site(self, label: int, value: Val, exact: bool):
        pass

    def unary_arg(self, label: int, fun: str, arg: Val):
        pass


def _deriv_bound(fun: str, arg: Val, result: Val) -> Val:
    """|f'(arg)|, good to ~60 bits; feeds a ufp so low precision is fine."""
    if fun == "sqrt":
        if result[0] == 0:
            return bf.ZERO
        d, _ = bf.div((1, -1), result, 64)
        return bf.abs_val(d)
    if fun == "sin":
        c, _ = bf.cos(arg, 64)
        return bf.abs_val(c)
    if fun == "cos":
        s, _ = bf.sin(arg, 64)
        return bf.abs_val(s)
    # atan: 1/(1 + x^2)
    den = bf.add(bf.from_int(1), bf.mul(arg, arg))
    d, _ = bf.div(bf.from_int(1), den, 64)
    return bf.abs_val(d)


class Execution:
    def __init__(self, program: LabeledProgram,
                 inputs: Optional[Dict[str, Val]] = None,
                 tuning: Optional[Callable[[int], int]] = None,
                 observer: Optional[Observer] = None,
                 iter_cap: int = 100000,
                 trial: int = 0,
                 strict_zero: bool = False):
        self.program = program
        self.inputs = inputs or {}
        self.tuning = tuning
        self.observer = observer or Observer()
        self.iter_cap = iter_cap
        self.trial = trial
        self.strict_zero = strict_zero
        self.ref: Dict[str, RefV] = {}
        self.mix: Dict[str, Val] = {}

    # -- mixed-side rounding ------------------------------------------------

    def _round_site(self, label: int, v: Val) -> Val:
        nsb = self.tuning(label)
        if nsb <= 0:
            if self.strict_zero:
                raise ReachedZeroNsb(label)
            nsb = 1
        out, _ = bf.round_nsb(v, nsb)
        return out

    # -- expression evaluation ----------------------------------------------

    def eval_ref(self, e) -> RefV:
        """Reference-only evaluation (used for condition subtrees)."""
        if isinstance(e, Const):
            return bf.from_decimal(e.text, REF_BITS)[0], True
        if isinstance(e, Var):
            return self.ref[e.name]
        if isinstance(e, BinOp):
            a, ea = self.eval_ref(e.lhs)
            b, eb = self.eval_ref(e.rhs)
            v, inexact = self._apply_ref(e.op, a, b, e.label)
            return v, ea and eb and not inexact
        a, ea = self.eval_ref(e.arg)
        v, inexact = self._apply_fun_ref(e.fun, a, e.label)
        return v, ea and not inexact

    def _apply_ref(self, op: str, a: Val, b: Val, label) -> Tuple[Val, bool]:
        if op == "+":
            return bf.round_nsb(bf.add(a, b), REF_BITS)
        if op == "-":
            return bf.round_nsb(bf.sub(a, b), REF_BITS)
        if op == "*":
            return bf.round_nsb(bf.mul(a, b), REF_BITS)
        if b[0] == 0:
            raise MathDomainError("division by zero", label, self.trial)
        return bf.div(a, b, REF_BITS)

    def _apply_fun_ref(self, fun: str, a: Val, label) -> Tuple[Val, bool]:
        if fun == "sqrt":
            if a[0] < 0:
                raise MathDomainError("sqrt of negative value", label, self.trial)
            return bf.sqrt(a, REF_BITS)
        if fun == "sin":
            return bf.sin(a, REF_BITS)
        if fun == "cos":
            return bf.cos(a, REF_BITS)
        return bf.atan(a, REF_BITS)

    def eval_expr(self, e) -> Tuple[RefV, Optional[Val]]:
        """Evaluate a labeled expression on both sides."""
        mixed = self.tuning is not None
        if isinstance(e, Const):
            v, _ = bf.from_decimal(e.text, REF_BITS)
            self.observer.site(e.label, v, True)
            m = self._round_site(e.label, v) if mixed else None
            return (v, True), m
        if isinstance(e, Var):
            rv = self.ref[e.name]
            self.observer.site(e.label, rv[0], rv[1])
            m = self._round_site(e.label, self.mix[e.name]) if mixed else None
            return rv, m
        if isinstance(e, BinOp):
            (a, ea), ma = self.eval_expr(e.lhs)
            (b, eb), mb = self.eval_expr(e.rhs)
            v, inexact = self._apply_ref(e.op, a, b, e.label)
            exact = ea and eb and not inexact
            self.observer.site(e.label, v, exact)
            m = None
            if mixed:
                m = self._apply_mix(e.op, ma, mb, e.label)
            return (v, exact), m
        (a, ea), ma = self.eval_expr(e.arg)
        v, inexact = self._apply_fun_ref(e.fun, a, e.label)
        exact = ea and not inexact
        self.observer.site(e.label, v, exact)
        self.observer.unary_arg(e.label, e.fun, a)
        m = None
        if mixed:
            m = self._apply_fun_mix(e.fun, ma, e.label)
        return (v, exact), m

    def _apply_mix(self, op: str, a: Val, b: Val, label: int) -> Val:
        nsb = max(self.tuning(label), 1)
        if op == "+":
            raw = bf.add(a, b)
        elif op == "-":
            raw = bf.sub(a, b)
        elif op == "*":
            raw = bf.mul(a, b)
        else:
            if b[0] == 0:
                raise MathDomainError("division by zero", label, self.trial)
            q, _ = bf.div(a, b, nsb)
            return self._round_site(label, q)
        return self._round_site(label, raw)

    def _apply_fun_mix(self, fun: str, a: Val, label: int) -> Val:
        nsb = max(self.tuning(label), 1)
        if fun == "sqrt":
            if a[0] < 0:
                raise MathDomainError("sqrt of negative value", label, self.trial)
            v, _ = bf.sqrt(a, nsb)
        elif fun == "sin":
            v, _ = bf.sin(a, nsb + 8)
        elif fun == "cos":
            v, _ = bf.cos(a, nsb + 8)
        else:
            v, _ = bf.atan(a, nsb + 8)
        return self._round_site(label, v)

    # -- statements -----------------------------------------------------------

    def _cond(self, c: Cond) -> bool:
        a, _ = self.eval_ref(c.lhs)
        b, _ = self.eval_ref(c.rhs)
        s = bf.cmp(a, b)
        return {"<": s < 0, ">": s > 0, "<=": s <= 0, ">=": s >= 0, "==": s == 0}[c.op]

    def run(self):
        self._block(self.program.body)
        return self

    def _block(self, body):
        mixed = self.tuning is not None
        for s in body:
            if isinstance(s, Assign):
                (v, exact), m = self.eval_expr(s.rhs)
                self.observer.site(s.label, v, exact)
                self.ref[s.var] = (v, exact)
                if mixed:
                    self.mix[s.var] = self._round_site(s.label, m)
            elif isinstance(s, InputDecl):
                v = self.inputs[s.var]
                self.observer.site(s.label, v, True)
                self.ref[s.var] = (v, True)
                if mixed:
                    self.mix[s.var] = self._round_site(s.label, v)
            elif isinstance(s, While):
                count = 0
                while self._cond(s.cond):
                    count += 1
                    if count > self.iter_cap:
                        raise DivergenceError(s.label, self.iter_cap)
                    self._block(s.body)
            elif isinstance(s, If):
                if self._cond(s.cond):
                    self._block(s.then)
                else:
                    self._block(s.orelse)
            # Require: no runtime effect
