"""Grouping strategies that keep control precision low.

Grouping many cubic terms on one pair ancilla saves ancillas but inflates
the penalty weight delta, and with it the largest coefficient the device
must resolve: the penalty contributes 3*delta, and the pair term becomes
alpha(b) + delta.  The greedy planner here trades the other way: each
cubic term is routed to the pair whose ancilla it burdens least.

For a term a and a candidate pair b inside it, the burden is the largest
coefficient the grouping would create around b's ancilla,

    w(a, b) = max(3 * d, |alpha(b) + d|),   d = delta_for_group(Theta),

where Theta collects the coefficients of the terms already assigned to b
plus a's own.  Each round scores every remaining term by its best pair
(ties broken toward pairs contained in the fewest remaining terms, then
lexicographically), then commits the *hardest* term first, so expensive
terms claim cheap pairs before the cheap terms use them up.  Penalty
weights are not accumulated here; the final plan derives them from the
finished assignment.

`arbitrary_plan` is the do-nothing baseline: every term picks one of its
three pairs uniformly at random (seed-deterministic).  Benchmarks measure
the greedy planner against it; in dense regimes the greedy roughly halves
the mean control-precision increase.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations

from puboforge.gadgets import (
    GadgetMode,
    Pair,
    ReductionPlan,
    Triple,
    delta_for_group,
)
from puboforge.poly import Polynomial


@dataclass
class GreedyState:
    """Remaining terms and the assignment built so far."""

    poly: Polynomial
    remaining: set[Triple]
    assignments: dict[Pair, set[int]] = field(default_factory=dict)

    def group_coefficients(self, b: Pair) -> list[int]:
        cubic = self.poly.cubic_terms()
        return [
            cubic[tuple(sorted(b + (k,)))] for k in sorted(self.assignments.get(b, ()))
        ]


def cost_w(state: GreedyState, a: Triple, b: Pair) -> int:
    """Largest coefficient created around b's ancilla if term a joins it."""
    cubic = state.poly.cubic_terms()
    theta = state.group_coefficients(b) + [cubic[a]]
    delta = delta_for_group(theta)
    return max(3 * delta, abs(state.poly.pair_coefficient(*b) + delta))


def _best_pair(state: GreedyState, a: Triple) -> tuple[Pair, int]:
    """Cheapest pair for a; ties prefer rarer pairs, then lexicographic order."""
    scored = [(cost_w(state, a, b), b) for b in combinations(a, 2)]
    low = min(w for w, _ in scored)
    tied = [b for w, b in scored if w == low]
    if len(tied) > 1:
        occurrence = {
            b: sum(1 for t in state.remaining if set(b) <= set(t)) for b in tied
        }
        fewest = min(occurrence.values())
        tied = [b for b in tied if occurrence[b] == fewest]
    return min(tied), low


def greedy_precision_plan(poly: Polynomial, mode: GadgetMode = GadgetMode.SINGLE) -> ReductionPlan:
    """Precision-aware grouping: hardest term first onto its cheapest pair."""
    state = GreedyState(poly, set(poly.cubic_terms()))
    while state.remaining:
        choices = {a: _best_pair(state, a) for a in sorted(state.remaining)}
        hardest = max(w for _, w in choices.values())
        d = min(a for a, (_, w) in choices.items() if w == hardest)
        pair = choices[d][0]
        third = (set(d) - set(pair)).pop()
        state.assignments.setdefault(pair, set()).add(third)
        state.remaining.remove(d)
    return ReductionPlan.from_assignment(poly, state.assignments, mode)


def arbitrary_plan(
    poly: Polynomial, seed: int = 0, mode: GadgetMode = GadgetMode.SINGLE
) -> ReductionPlan:
    """Baseline: each cubic term picks one of its three pairs at random."""
    rng = random.Random(f"arbitrary:{seed}")
    assignments: dict[Pair, set[int]] = {}
    for t in sorted(poly.cubic_terms()):
        pairs = list(combinations(t, 2))
        pair = pairs[rng.randrange(3)]
        third = (set(t) - set(pair)).pop()
        assignments.setdefault(pair, set()).add(third)
    return ReductionPlan.from_assignment(poly, assignments, mode)
