"""Least-solution solver and carry-bit policy iteration.

Every constraint is a lower bound: either T(v) >= c, or T(v) >= T(w) + c, or
an equality (a pair of zero-offset bounds). Such a system is min-closed, so
when it is feasible it has a unique pointwise-least solution, found by
initializing at the floors and relaxing to a fixpoint (longest-path style);
that least solution simultaneously minimizes the sum, the maximum, and any
partial sum of the T values. Infeasibility is exactly a positive-weight
cycle, which is returned as a structured diagnostic rather than raised.

Policy iteration starts from the safe all-ones carry policy and monotonically
clears carry bits: first the flips forced by positive cycles (loop-carried
accumulation), then, in 'pi' mode, the flips justified by the error shapes of
a solved tuning. Objective values never increase along the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .constraints import (
    CarryPolicy, ConstraintSystem, Difference, Equal, LowerBound,
    derive_errinfo, generate, policy_from_errors, uniformize,
)
from .errors import OverflowGuard
from .frontend import DefUseMap, LabeledProgram
from .ranges import RangeMap

T_CAP = 1024

# Guard bits added on top of every accuracy directive. Loop-carried rounding
# compounds over iterations while the per-operation budgets are one-shot, so
# the requirement is over-provisioned by a few bits; the same knob bounds how
# much a residual positive cycle may be amortized. Overridable per run.
DEFAULT_LOOP_SLACK = 3


class Tuning(dict):
    """Label -> assigned significand width; absent labels are 0."""

    def nsb(self, label: int) -> int:
        return self.get(label, 0)

    def total(self) -> int:
        return sum(self.values())


@dataclass
class CycleDiagnostic:
    labels: List[int]
    weight: int
    edges: List[Union[Difference, Equal]]

    def __str__(self):
        path = " -> ".join(f"T{l}" for l in self.labels + self.labels[:1])
        return f"positive constraint cycle (weight {self.weight}): {path}"


@dataclass
class SolveStats:
    mp: int = 0
    msum: int = 0
    mop: int = 0
    policy_iterations: int = 0
    relaxation_passes: int = 0
    msum_trace: List[int] = field(default_factory=list)


def solve_least(system: ConstraintSystem) -> Union[Tuning, CycleDiagnostic]:
    """Compute the unique least solution, or a positive-cycle diagnostic.

    Raises OverflowGuard if a converged width exceeds 1024.
    """
    order = sorted(system.vars)
    t = {v: 0 for v in order}
    edges: List[Tuple[int, int, int, object]] = []   # (src, dst, const, constraint)
    for c in system.constraints:
        if isinstance(c, LowerBound):
            if c.const > t[c.var]:
                t[c.var] = c.const
        elif isinstance(c, Difference):
            edges.append((c.other, c.var, c.const, c))
        else:
            edges.append((c.a, c.b, 0, c))
            edges.append((c.b, c.a, 0, c))

    pred: Dict[int, Tuple[int, object]] = {}
    n = len(order)
    converged = False
    for _ in range(n + 1):
        changed = False
        for src, dst, const, con in edges:
            cand = t[src] + const
            if cand > t[dst]:
                t[dst] = cand
                pred[dst] = (src, con)
                changed = True
        if not changed:
            converged = True
            break

    if not converged:
        return _extract_cycle(t, pred, edges)

    for v in order:
        if t[v] > T_CAP:
            raise OverflowGuard(v, t[v], T_CAP)
    return Tuning(t)


def _extract_cycle(t, pred, edges) -> CycleDiagnostic:
    # From any still-relaxing edge, walk predecessors until a node repeats;
    # the repeated segment is a positive cycle.
    for src, dst, const, con in edges:
        if t[src] + const <= t[dst]:
            continue
        t[dst] = t[src] + const
        pred[dst] = (src, con)
        chain: List[int] = []
        index: Dict[int, int] = {}
        node = dst
        while node in pred and node not in index:
            index[node] = len(chain)
            chain.append(node)
            node = pred[node][0]
        if node not in index:
            continue
        segment = chain[index[node]:]            # pred-order from the repeat
        cons = [pred[x][1] for x in segment]     # each edge enters segment[i]
        weight = sum(c.const for c in cons if isinstance(c, Difference))
        labels = [segment[0]] + segment[:0:-1]   # forward traversal order
        assert weight > 0, "detected cycle must have positive weight"
        return CycleDiagnostic(labels, weight, cons)
    raise AssertionError("relaxation did not converge but no cycle was found")


def evaluate_objectives(tuning: Tuning, system: ConstraintSystem) -> SolveStats:
    """mp (largest width), msum (total bits), mop (operator bits)."""
    values = [tuning.nsb(v) for v in system.vars]
    mop = sum(tuning.nsb(v) for v in system.op_labels)
    return SolveStats(mp=max(values, default=0), msum=sum(values), mop=mop)


@dataclass
class TuneResult:
    tuning: Optional[Tuning]
    policy: CarryPolicy
    stats: SolveStats
    system: Optional[ConstraintSystem]
    diagnostic: Optional[CycleDiagnostic] = None

    @property
    def ok(self) -> bool:
        return self.tuning is not None


def policy_iterate(program: LabeledProgram, ranges: RangeMap, defuse: DefUseMap,
                   objective: str = "sum", uniform: bool = False,
                   mode: str = "pi", loop_slack: int = DEFAULT_LOOP_SLACK) -> TuneResult:
    """Solve under monotone carry-policy descent.

    Starts at xi = 1 everywhere. A positive cycle first flips the carry bits
    of the operators on it; with none left to flip, a cycle of weight at most
    loop_slack is amortized by lowering one of its difference constants (the
    requirement already carries loop_slack guard bits); otherwise the
    diagnostic is returned. In 'pi' mode a feasible solution then drives
    carry-bit refinement until a fixpoint; 'ilp' mode stops at the first
    feasible solution. Objective values are non-increasing across iterations
    and the iteration count is bounded by the operator count plus one.
    """
    op_labels = _binop_labels(program)
    policy = CarryPolicy.all_ones(op_labels)
    relaxations: Dict[Tuple[int, int], int] = {}
    stats = SolveStats()
    last: Optional[Tuning] = None
    system: Optional[ConstraintSystem] = None
    budget = len(op_labels) * 2 + 16

    for _ in range(budget):
        system = generate(program, ranges, defuse, policy,
                          extra_requirement_bits=loop_slack,
                          relaxations=relaxations)
        if uniform:
            system = uniformize(system)
        solved = solve_least(system)

        if isinstance(solved, CycleDiagnostic):
            flippable = {c.origin for c in solved.edges
                         if isinstance(c, Difference) and c.xi == 1}
            if flippable:
                policy = policy.with_zeros(flippable)
                stats.relaxation_passes += 1
                continue
            if 0 < solved.weight <= loop_slack:
                edge = max((c for c in solved.edges if isinstance(c, Difference)),
                           key=lambda c: (c.const, c.var, c.other))
                key = (edge.var, edge.other)
                relaxations[key] = relaxations.get(key, 0) + solved.weight
                stats.relaxation_passes += 1
                continue
            stats.policy_iterations += 1
            return TuneResult(None, policy, stats, system, solved)

        stats.policy_iterations += 1
        obj = evaluate_objectives(solved, system)
        stats.msum_trace.append(obj.msum)
        last = solved
        if mode == "ilp":
            break
        errs = derive_errinfo(program, ranges, defuse, solved)
        refined = policy_from_errors(program, ranges, errs, policy)
        if refined == policy:
            break
        policy = refined
    else:
        raise RuntimeError("policy iteration failed to terminate within budget")

    assert last is not None and system is not None
    final = evaluate_objectives(last, system)
    stats.mp, stats.msum, stats.mop = final.mp, final.msum, final.mop
    return TuneResult(last, policy, stats, system)


def _binop_labels(program: LabeledProgram):
    from .frontend import all_labels_by_kind
    kinds, _ = all_labels_by_kind(program)
    return sorted(l for l, k in kinds.items() if k == "op")
