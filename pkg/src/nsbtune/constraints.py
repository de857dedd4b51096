"""Integer constraint system over per-label significand widths.

For every value-carrying label l the system has one integer variable T(l).
Lower-bound constraints come from accuracy directives; difference
constraints encode first-order rounding-error propagation, with all
constants derived from the observed ranges:

    z = x + y | x - y :  T(x) >= T(z) + u(x) - u(z) + xi(z)      (same for y)
    z = x * y         :  T(x) >= T(z) + u(x) + u(y) + 1 - u(z) + xi(z)
    z = x / y         :  T(x) >= T(z) + u(x) - l(y) - u(z) + xi(z)
                         T(y) >= T(z) + u(x) + u(y) - 2*l(y) - u(z) + xi(z)
    z = f(x)          :  T(x) >= T(z) + u(x) + K_f - u(z) + 1
    v := e at def d   :  T(root(e)) >= T(d)
    use u, def d      :  T(d) >= T(u) + u(d) - u(u)
    require_nsb(v, n) :  T(d) >= n for every reaching definition d

u(l) is the observed ufp, l(y) the observed lfp of the divisor, K_f the ufp
of the largest |f'| over the visited arguments, and xi the per-operator
carry bit (an exact-literal or always-zero operand forces xi = 0). The
def-use link carries the ufp difference of the two sites, which reduces to
the plain T(d) >= T(u) whenever both sites peak in the same binade.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .errors import DivisorMayVanish, MissingRange
from .frontend import (
    Assign, BinOp, Const, DefUseMap, If, InputDecl, LabeledProgram, Require,
    UnFun, Var, While, all_labels_by_kind,
)
from .ranges import RangeMap


@dataclass(frozen=True)
class ErrInfo:
    """Position of a value's rounding error: leading and trailing bit
    weights. None encodes an exact value (no error at all)."""

    ufp_e: Optional[int]
    ulp_e: Optional[int]

    @property
    def exact(self) -> bool:
        return self.ufp_e is None


EXACT = ErrInfo(None, None)


def carry_bit(x: ErrInfo, y: ErrInfo) -> int:
    """1 if the operand errors can overlap and propagate a carry, else 0.

    Disjoint error bit-ranges (one error's lowest bit at or above the
    other's highest) cannot carry; an exact operand never can.
    """
    if x.exact or y.exact:
        return 0
    if x.ulp_e >= y.ufp_e or y.ulp_e >= x.ufp_e:
        return 0
    return 1


@dataclass
class CarryPolicy:
    """Per-operator carry bit; total over the binary-operator labels."""

    xi: Dict[int, int]

    @staticmethod
    def all_ones(op_labels) -> "CarryPolicy":
        return CarryPolicy({l: 1 for l in op_labels})

    def __getitem__(self, label: int) -> int:
        return self.xi.get(label, 1)

    def with_zeros(self, labels) -> "CarryPolicy":
        xi = dict(self.xi)
        for l in labels:
            xi[l] = 0
        return CarryPolicy(xi)

    def __eq__(self, other):
        return isinstance(other, CarryPolicy) and self.xi == other.xi


@dataclass(frozen=True)
class LowerBound:
    var: int
    const: int


@dataclass(frozen=True)
class Difference:
    """T(var) >= T(other) + const."""

    var: int
    other: int
    const: int
    origin: Optional[int] = None    # operator label whose xi sits in const
    xi: int = 0                     # active carry-bit share of const (0 or 1)


@dataclass(frozen=True)
class Equal:
    a: int
    b: int


@dataclass
class ConstraintSystem:
    vars: Set[int] = field(default_factory=set)
    constraints: List = field(default_factory=list)
    op_labels: Set[int] = field(default_factory=set)
    var_occurrences: Dict[str, FrozenSet[int]] = field(default_factory=dict)
    requirements: List[Tuple[int, int]] = field(default_factory=list)
    reached: Set[int] = field(default_factory=set)
    kinds: Dict[int, str] = field(default_factory=dict)
    names: Dict[int, Optional[str]] = field(default_factory=dict)

    def dump(self) -> str:
        """Text form, one constraint per line, solver-independent."""
        lines = []
        for c in self.constraints:
            if isinstance(c, LowerBound):
                lines.append(f"T{c.var} >= {c.const}")
            elif isinstance(c, Difference):
                if c.const == 0:
                    lines.append(f"T{c.var} >= T{c.other}")
                elif c.const < 0:
                    lines.append(f"T{c.var} >= T{c.other} - {-c.const}")
                else:
                    lines.append(f"T{c.var} >= T{c.other} + {c.const}")
            else:
                lines.append(f"T{c.a} == T{c.b}")
        return "\n".join(lines) + "\n"


def parse_dump(text: str) -> List:
    """Inverse of ConstraintSystem.dump, for round-trip tests."""
    out = []
    for line in text.strip().splitlines():
        parts = line.split()
        if "==" in parts:
            out.append(Equal(int(parts[0][1:]), int(parts[2][1:])))
        elif parts[2].startswith("T"):
            c = 0
            if len(parts) == 5:
                c = int(parts[4]) if parts[3] == "+" else -int(parts[4])
            out.append(Difference(int(parts[0][1:]), int(parts[2][1:]), c))
        else:
            out.append(LowerBound(int(parts[0][1:]), int(parts[2])))
    return out


def _operand_forces_zero(node, ranges: RangeMap) -> bool:
    # Source literals are exact by convention; a value observed as always
    # zero carries no error either way.
    if isinstance(node, Const):
        return True
    ri = ranges.get(node.label)
    return ri is not None and not ri.unreached and ri.always_zero


def generate(program: LabeledProgram, ranges: RangeMap, defuse: DefUseMap,
             policy: CarryPolicy, extra_requirement_bits: int = 0,
             relaxations: Optional[Dict[Tuple[int, int], int]] = None) -> ConstraintSystem:
    """Emit the constraint system for a program under a fixed carry policy.

    Unreached labels generate nothing (their widths stay unconstrained).
    extra_requirement_bits is added to every accuracy directive; the
    relaxations map lowers individual difference constants (loop-carry
    amortization, managed by the solver).

    Raises MissingRange for labels the range analysis never saw and
    DivisorMayVanish when a reached divisor's magnitude was observed at 0.
    """
    relax = relaxations or {}
    sys = ConstraintSystem()
    kinds, names = all_labels_by_kind(program)
    sys.kinds = {l: k for l, k in kinds.items() if k != "stmt"}
    sys.names = {l: names[l] for l in sys.kinds}
    sys.vars = set(sys.kinds)
    sys.var_occurrences = dict(defuse.occurrences)

    def info(label):
        ri = ranges.get(label)
        if ri is None:
            raise MissingRange(label)
        return ri

    def reached(label) -> bool:
        return not info(label).unreached

    def u(label) -> int:
        return info(label).ufp

    sys.reached = {l for l in sys.vars if reached(l)}

    def add_diff(var, other, const, origin=None, xi=0):
        const -= relax.get((var, other), 0)
        sys.constraints.append(Difference(var, other, const, origin, xi))

    def visit_expr(e):
        if isinstance(e, (Const, Var)):
            return
        if isinstance(e, UnFun):
            visit_expr(e.arg)
            if not reached(e.label):
                return
            k_f = info(e.label).deriv_ufp
            x = e.arg.label
            add_diff(x, e.label, u(x) + k_f - u(e.label) + 1)
            return
        visit_expr(e.lhs)
        visit_expr(e.rhs)
        if not reached(e.label):
            return
        z = e.label
        x, y = e.lhs.label, e.rhs.label
        xi = policy[z]
        if _operand_forces_zero(e.lhs, ranges) or _operand_forces_zero(e.rhs, ranges):
            xi = 0
        if e.op in "+-":
            add_diff(x, z, u(x) - u(z) + xi, origin=z, xi=xi)
            add_diff(y, z, u(y) - u(z) + xi, origin=z, xi=xi)
        elif e.op == "*":
            add_diff(x, z, u(x) + u(y) + 1 - u(z) + xi, origin=z, xi=xi)
            add_diff(y, z, u(x) + u(y) + 1 - u(z) + xi, origin=z, xi=xi)
        else:
            ly = info(y).lfp
            if ly is None:
                raise DivisorMayVanish(y)
            add_diff(x, z, u(x) - ly - u(z) + xi, origin=z, xi=xi)
            add_diff(y, z, u(x) + u(y) - 2 * ly - u(z) + xi, origin=z, xi=xi)

    def visit_stmts(body):
        for s in body:
            if isinstance(s, Assign):
                visit_expr(s.rhs)
                if reached(s.label):
                    add_diff(s.rhs.label, s.label, 0)
            elif isinstance(s, While):
                visit_stmts(s.body)
            elif isinstance(s, If):
                visit_stmts(s.then)
                visit_stmts(s.orelse)
            elif isinstance(s, Require):
                for d in defuse.require_defs[s.label]:
                    if reached(d):
                        n = s.nsb + extra_requirement_bits
                        sys.constraints.append(LowerBound(d, n))
                        sys.requirements.append((d, n))

    visit_stmts(program.body)

    # definition feeding a use: the stored value must carry at least the
    # bits the reader assumes, adjusted for the two sites' binades
    for use, defs in defuse.use_defs.items():
        if use not in sys.vars or not reached(use):
            continue
        for d in defs:
            if reached(d):
                add_diff(d, use, u(d) - u(use))

    sys.op_labels = {l for l in sys.vars
                     if sys.kinds[l] in ("op", "fun") and l in sys.reached}
    return sys


def uniformize(system: ConstraintSystem) -> ConstraintSystem:
    """Add equality chains forcing one width per variable (all reached
    occurrences). Idempotent: existing equalities are not duplicated."""
    existing = {(c.a, c.b) for c in system.constraints if isinstance(c, Equal)}
    new = list(system.constraints)
    for _, occs in sorted(system.var_occurrences.items()):
        live = sorted(l for l in occs if l in system.reached)
        for a, b in zip(live, live[1:]):
            key = (min(a, b), max(a, b))
            if key not in existing:
                existing.add(key)
                new.append(Equal(*key))
    return replace(system, constraints=new)


def _operand_sources(program: LabeledProgram, defuse: DefUseMap) -> Dict[int, List[int]]:
    """Label -> labels whose errors flow into it."""
    src: Dict[int, List[int]] = {}

    def expr(e):
        if isinstance(e, Const):
            src[e.label] = []
        elif isinstance(e, Var):
            src[e.label] = sorted(defuse.use_defs.get(e.label, ()))
        elif isinstance(e, BinOp):
            src[e.label] = [e.lhs.label, e.rhs.label]
            expr(e.lhs)
            expr(e.rhs)
        else:
            src[e.label] = [e.arg.label]
            expr(e.arg)

    def stmts(body):
        for s in body:
            if isinstance(s, Assign):
                src[s.label] = [s.rhs.label]
                expr(s.rhs)
            elif isinstance(s, InputDecl):
                src[s.label] = []
            elif isinstance(s, While):
                stmts(s.body)
            elif isinstance(s, If):
                stmts(s.then)
                stmts(s.orelse)

    stmts(program.body)
    return src


def derive_errinfo(program: LabeledProgram, ranges: RangeMap, defuse: DefUseMap,
                   tuning) -> Dict[int, ErrInfo]:
    """Error-shape estimate for every label under a solved tuning.

    A label is exact when its value is a source literal, always zero, or an
    exactly-representable value stored with enough bits. Otherwise its error
    tops out at u - T and bottoms out at the smallest contributing ulp,
    propagated to a fixpoint through the def-use graph.
    """
    kinds, _ = all_labels_by_kind(program)
    sources = _operand_sources(program, defuse)
    ufp_e: Dict[int, Optional[int]] = {}
    ulp_e: Dict[int, Optional[int]] = {}

    def t_of(label) -> int:
        t = tuning.get(label) if hasattr(tuning, "get") else tuning(label)
        return t or 0

    for label, kind in kinds.items():
        if kind == "stmt":
            continue
        ri = ranges.get(label)
        if ri is None or ri.unreached:
            ufp_e[label] = ulp_e[label] = None
            continue
        if kind == "const" or ri.always_zero or (ri.exact and ri.exact_bits <= t_of(label)):
            ufp_e[label] = ulp_e[label] = None
            continue
        own = ri.ufp - t_of(label)
        ufp_e[label] = own
        ulp_e[label] = own

    changed = True
    while changed:
        changed = False
        for label, ops in sources.items():
            if ufp_e.get(label) is None:
                continue
            lo = ulp_e[label]
            for o in ops:
                v = ulp_e.get(o)
                if v is not None and v < lo:
                    lo = v
            if lo != ulp_e[label]:
                ulp_e[label] = lo
                changed = True

    return {l: (EXACT if ufp_e[l] is None else ErrInfo(ufp_e[l], ulp_e[l]))
            for l in ufp_e}


def policy_from_errors(program: LabeledProgram, ranges: RangeMap,
                       errs: Dict[int, ErrInfo], current: CarryPolicy) -> CarryPolicy:
    """Recompute the carry policy from derived errors, flipping 1 -> 0 only."""
    xi = dict(current.xi)

    def visit(e):
        if isinstance(e, BinOp):
            if xi.get(e.label, 1) == 1:
                ex = errs.get(e.lhs.label, EXACT)
                ey = errs.get(e.rhs.label, EXACT)
                xi[e.label] = min(xi.get(e.label, 1), carry_bit(ex, ey))
            visit(e.lhs)
            visit(e.rhs)
        elif isinstance(e, UnFun):
            visit(e.arg)

    def stmts(body):
        for s in body:
            if isinstance(s, Assign):
                visit(s.rhs)
            elif isinstance(s, While):
                stmts(s.body)
            elif isinstance(s, If):
                stmts(s.then)
                stmts(s.orelse)

    stmts(program.body)
    return CarryPolicy(xi)
