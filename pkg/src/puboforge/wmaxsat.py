"""Ancilla selection for degree-3/4 instances as weighted MaxSAT.

Once quartic terms enter the picture, "which conjunctions get an ancilla"
stops being a plain set cover: a quartic term x_i x_j x_k x_l can be
rewritten with two disjoint pair ancillas (z_ij * z_kl) or by chaining a
triple ancilla (z_ijk * x_l), and a triple ancilla in turn needs one of
its own sub-pairs.  Those rules become clauses over one Boolean selector
per candidate ancilla:

* variables: one per pair that occurs inside some degree-3/4 term, one
  per triple inside a quartic term;
* soft clauses, weight 1: each selector prefers to be off (so the optimum
  is the minimum number of ancillas);
* hard clauses: a selected triple needs a selected sub-pair; each cubic
  term needs a selected pair inside it; each quartic term needs a fully
  selected disjoint-pair split or a selected triple inside it (expressed
  as 8 clauses, one per way of picking one pair from each of the three
  disjoint splits).

The hard weight is |variables| + 1 so no soft trade-off can pay for a
hard violation.  `solve_wmaxsat_exact` is a small branch-and-bound over
the selectors; `apply_quartic_plan` turns a satisfying selection into an
exact quadratic reduction, with penalty weights sized transitively (a
term riding on a chained triple ancilla burdens the base pair as well).
The DIMACS-style ``.wcnf`` emitter lets an external MaxSAT solver do the
selection instead; `parse_model` reads its answer back.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from puboforge.gadgets import (
    AncillaRegistry,
    Pair,
    PairAncilla,
    ReducedInstance,
    Triple,
    TripleAncilla,
    penalty_s,
)
from puboforge.poly import Monomial, ParseError, Polynomial, PuboError, avar, monomial, xvar

Clause = tuple[int, ...]


@dataclass(frozen=True)
class WmaxsatInstance:
    """Selector variables and clauses for one ancilla-selection problem.

    Variables are numbered from 1: pairs first in lexicographic order,
    then triples.  Clauses are literal tuples; a negative literal negates
    the variable with that index.
    """

    pairs: tuple[Pair, ...]
    triples: tuple[Triple, ...]
    soft: tuple[Clause, ...]
    hard: tuple[Clause, ...]
    top: int

    @property
    def num_vars(self) -> int:
        return len(self.pairs) + len(self.triples)

    def index_of(self, candidate: Pair | Triple) -> int:
        if len(candidate) == 2:
            return 1 + self.pairs.index(candidate)  # type: ignore[arg-type]
        return 1 + len(self.pairs) + self.triples.index(candidate)  # type: ignore[arg-type]

    def descriptor(self, index: int) -> Pair | Triple:
        if not 1 <= index <= self.num_vars:
            raise ValueError(f"selector index {index} out of range")
        if index <= len(self.pairs):
            return self.pairs[index - 1]
        return self.triples[index - 1 - len(self.pairs)]


def build_wmaxsat(poly: Polynomial) -> WmaxsatInstance:
    """Encode the ancilla-selection problem for poly's degree-3/4 terms."""
    cubic = sorted(poly.cubic_terms())
    quartic = sorted(poly.quartic_terms())
    pair_set: set[Pair] = set()
    for term in cubic + quartic:  # type: ignore[operator]
        pair_set.update(combinations(term, 2))
    triple_set: set[Triple] = set()
    for term in quartic:
        triple_set.update(combinations(term, 3))
    pairs = tuple(sorted(pair_set))
    triples = tuple(sorted(triple_set))
    index: dict[tuple[int, ...], int] = {p: i + 1 for i, p in enumerate(pairs)}
    index.update({t: len(pairs) + 1 + i for i, t in enumerate(triples)})

    soft = tuple((-v,) for v in range(1, len(pairs) + len(triples) + 1))
    hard: list[Clause] = []
    for t in triples:
        hard.append((-index[t],) + tuple(index[b] for b in combinations(t, 2)))
    for term in cubic:
        hard.append(tuple(index[b] for b in combinations(term, 2)))
    for term in quartic:
        i, j, k, l = term
        splits = (
            ((i, j), (k, l)),
            ((i, k), (j, l)),
            ((i, l), (j, k)),
        )
        inner = tuple(index[t] for t in combinations(term, 3))
        for choice in product(*splits):
            hard.append(tuple(index[b] for b in choice) + inner)
    top = len(pairs) + len(triples) + 1
    return WmaxsatInstance(pairs, triples, soft, tuple(hard), top)


# ---------------------------------------------------------------------------
# Exact solver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WmaxsatResult:
    selection: frozenset[int]
    cost: int
    proven_optimal: bool
    nodes: int


def solve_wmaxsat_exact(instance: WmaxsatInstance, node_budget: int = 10**6) -> WmaxsatResult:
    """Minimize the number of selected ancillas subject to the hard clauses.

    Branch and bound: branch on the free selector appearing in the most
    currently unsatisfied hard clauses, trying False first.  The bound
    adds, to the selections already made, a greedy packing of unsatisfied
    clauses over disjoint free variables; clauses with a free negative
    literal cost nothing (switch that selector off) and are skipped.
    Exhausting the node budget returns the incumbent unproven.
    """
    nvars = instance.num_vars
    if nvars == 0:
        return WmaxsatResult(frozenset(), 0, True, 0)
    hard = instance.hard
    best_true: frozenset[int] = frozenset(range(1, nvars + 1))
    best_cost = nvars
    nodes = 0
    exhausted = False

    def propagate(assignment: dict[int, bool]) -> bool:
        """Force unit hard clauses until fixpoint; False on conflict."""
        changed = True
        while changed:
            changed = False
            for clause in hard:
                satisfied = False
                free: list[int] = []
                for lit in clause:
                    value = assignment.get(abs(lit))
                    if value is None:
                        free.append(lit)
                    elif value == (lit > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not free:
                    return False
                if len(free) == 1:
                    lit = free[0]
                    assignment[abs(lit)] = lit > 0
                    changed = True
        return True

    def lower_bound(assignment: dict[int, bool], trues: int) -> int:
        used: set[int] = set()
        extra = 0
        for clause in hard:
            satisfied = False
            free: list[int] = []
            for lit in clause:
                value = assignment.get(abs(lit))
                if value is None:
                    free.append(lit)
                elif value == (lit > 0):
                    satisfied = True
                    break
            if satisfied or any(lit < 0 for lit in free):
                continue
            free_vars = {lit for lit in free}
            if free_vars & used:
                continue
            used |= free_vars
            extra += 1
        return trues + extra

    def branch_variable(assignment: dict[int, bool]) -> int | None:
        score: dict[int, int] = {}
        for clause in hard:
            satisfied = False
            free: list[int] = []
            for lit in clause:
                value = assignment.get(abs(lit))
                if value is None:
                    free.append(abs(lit))
                elif value == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            for v in free:
                score[v] = score.get(v, 0) + 1
        if score:
            return min(score, key=lambda v: (-score[v], v))
        for v in range(1, nvars + 1):
            if v not in assignment:
                return v
        return None

    def dfs(assignment: dict[int, bool]) -> None:
        nonlocal best_true, best_cost, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > node_budget:
            exhausted = True
            return
        if not propagate(assignment):
            return
        trues = sum(1 for v in assignment.values() if v)
        if lower_bound(assignment, trues) >= best_cost:
            return
        v = branch_variable(assignment)
        if v is None:
            if trues < best_cost:
                best_cost = trues
                best_true = frozenset(k for k, val in assignment.items() if val)
            return
        for value in (False, True):
            child = dict(assignment)
            child[v] = value
            dfs(child)

    dfs({})
    return WmaxsatResult(best_true, best_cost, not exhausted, nodes)


def selection_satisfies(instance: WmaxsatInstance, selection: frozenset[int]) -> bool:
    """True when every hard clause is satisfied by the given selection."""
    for clause in instance.hard:
        if not any((lit > 0) == (abs(lit) in selection) for lit in clause):
            return False
    return True


# ---------------------------------------------------------------------------
# Turning a selection into an exact quadratic reduction
# ---------------------------------------------------------------------------


def decode_ancilla_set(
    instance: WmaxsatInstance, selection: frozenset[int]
) -> tuple[list[Pair], dict[Triple, Pair]]:
    """Selected pairs, and for each selected triple its base pair.

    The base pair must itself be selected; among the selected sub-pairs,
    the one contained in the most other selected triples wins (so chains
    share bases where possible), ties going to the smallest pair.
    """
    selected_pairs = [p for p in instance.pairs if instance.index_of(p) in selection]
    selected_triples = [t for t in instance.triples if instance.index_of(t) in selection]
    pair_set = set(selected_pairs)
    via: dict[Triple, Pair] = {}
    for t in selected_triples:
        options = [b for b in combinations(t, 2) if b in pair_set]
        if not options:
            raise PuboError(f"selected triple {t} has no selected sub-pair")
        def sharing(b: Pair) -> int:
            return sum(1 for u in selected_triples if u != t and set(b) <= set(u))
        best = max(sharing(b) for b in options)
        via[t] = min(b for b in options if sharing(b) == best)
    return selected_pairs, via


def apply_quartic_plan(
    poly: Polynomial, instance: WmaxsatInstance, selection: frozenset[int]
) -> ReducedInstance:
    """Reduce a degree-<=4 polynomial using the selected ancillas.

    Cubic terms ride on the smallest selected pair inside them.  Quartic
    terms prefer the smallest fully selected disjoint-pair split (a
    product of two pair ancillas); otherwise they chain through the
    smallest selected triple.  Every selected ancilla is materialized,
    used or not, so the ancilla count always equals the selection size.

    Penalty weights: each ancilla's delta is 1 plus the sum of |alpha|
    over the terms that depend on it, where a chained term depends on
    both the triple ancilla and its base pair.
    """
    if poly.degree() > 4:
        raise PuboError("only degree <= 4 polynomials can be reduced")
    selected_pairs, via = decode_ancilla_set(instance, selection)
    pair_set = set(selected_pairs)
    chained = sorted(via)

    acc: dict[Monomial, int] = {m: c for m, c in poly if len(m) < 3}
    pair_load: dict[Pair, int] = {p: 0 for p in selected_pairs}
    triple_load: dict[Triple, int] = {t: 0 for t in chained}

    registry = AncillaRegistry()
    pair_var = {p: avar(registry.add(PairAncilla(*p))) for p in selected_pairs}
    triple_var = {
        t: avar(registry.add(TripleAncilla(via[t], (set(t) - set(via[t])).pop())))
        for t in chained
    }

    def add(m: Monomial, coeff: int) -> None:
        acc[m] = acc.get(m, 0) + coeff

    for term, alpha in sorted(poly.cubic_terms().items()):
        options = [b for b in combinations(term, 2) if b in pair_set]
        if not options:
            raise PuboError(f"selection cannot reduce cubic term {term}")
        base = min(options)
        k = (set(term) - set(base)).pop()
        add(monomial([pair_var[base], xvar(k)]), alpha)
        pair_load[base] += abs(alpha)

    for term, alpha in sorted(poly.quartic_terms().items()):
        i, j, k, l = term
        splits = (((i, j), (k, l)), ((i, k), (j, l)), ((i, l), (j, k)))
        split = next((s for s in splits if s[0] in pair_set and s[1] in pair_set), None)
        if split is not None:
            add(monomial([pair_var[split[0]], pair_var[split[1]]]), alpha)
            pair_load[split[0]] += abs(alpha)
            pair_load[split[1]] += abs(alpha)
            continue
        inner = [t for t in combinations(term, 3) if t in via]
        if not inner:
            raise PuboError(f"selection cannot reduce quartic term {term}")
        t = min(inner)
        rest = (set(term) - set(t)).pop()
        add(monomial([triple_var[t], xvar(rest)]), alpha)
        triple_load[t] += abs(alpha)
        pair_load[via[t]] += abs(alpha)

    penalties = Polynomial.zero(poly.n)
    for p in selected_pairs:
        delta = 1 + pair_load[p]
        penalties = penalties + delta * penalty_s(xvar(p[0]), xvar(p[1]), pair_var[p], poly.n)
    for t in chained:
        delta = 1 + triple_load[t]
        extra = (set(t) - set(via[t])).pop()
        penalties = penalties + delta * penalty_s(
            pair_var[via[t]], xvar(extra), triple_var[t], poly.n
        )
    quadratic = Polynomial(poly.n, acc) + penalties
    return ReducedInstance(quadratic, registry, poly.n)


# ---------------------------------------------------------------------------
# .wcnf text format (DIMACS weighted CNF, with a selector map in comments)
# ---------------------------------------------------------------------------


def emit_wcnf(instance: WmaxsatInstance) -> str:
    """Serialize to DIMACS wcnf; comments record what each selector means."""
    lines = [f"p wcnf {instance.num_vars} {len(instance.hard) + len(instance.soft)} {instance.top}"]
    for v in range(1, instance.num_vars + 1):
        desc = instance.descriptor(v)
        kind = "pair" if len(desc) == 2 else "triple"
        lines.append(f"c var {v} = {kind} {' '.join(str(i) for i in desc)}")
    for clause in instance.hard:
        lines.append(f"{instance.top} {' '.join(str(lit) for lit in clause)} 0")
    for clause in instance.soft:
        lines.append(f"1 {' '.join(str(lit) for lit in clause)} 0")
    return "\n".join(lines) + "\n"


def parse_wcnf(text: str) -> WmaxsatInstance:
    """Parse wcnf text produced by `emit_wcnf` (selector comments required)."""
    top: int | None = None
    declared_vars = declared_clauses = 0
    pairs: list[Pair] = []
    triples: list[Triple] = []
    hard: list[Clause] = []
    soft: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "p":
            if top is not None:
                raise ParseError("duplicate header", lineno)
            if len(fields) != 5 or fields[1] != "wcnf":
                raise ParseError("expected 'p wcnf <vars> <clauses> <top>'", lineno)
            try:
                declared_vars, declared_clauses, top = (int(f) for f in fields[2:])
            except ValueError:
                raise ParseError("header fields must be integers", lineno) from None
            continue
        if fields[0] == "c":
            if len(fields) >= 5 and fields[1] == "var" and fields[3] == "=":
                try:
                    index = int(fields[2])
                    kind = fields[4]
                    ints = tuple(int(f) for f in fields[5:])
                except ValueError:
                    raise ParseError("malformed selector comment", lineno) from None
                if kind == "pair" and len(ints) == 2:
                    if triples or index != len(pairs) + 1:
                        raise ParseError("selector comments out of order", lineno)
                    pairs.append(ints)  # type: ignore[arg-type]
                elif kind == "triple" and len(ints) == 3:
                    if index != len(pairs) + len(triples) + 1:
                        raise ParseError("selector comments out of order", lineno)
                    triples.append(ints)  # type: ignore[arg-type]
                else:
                    raise ParseError("malformed selector comment", lineno)
            continue
        if top is None:
            raise ParseError("clause before header", lineno)
        try:
            numbers = [int(f) for f in fields]
        except ValueError:
            raise ParseError(f"unrecognized line {line!r}", lineno) from None
        if len(numbers) < 2 or numbers[-1] != 0:
            raise ParseError("clause lines are '<weight> <literals> 0'", lineno)
        weight, lits = numbers[0], tuple(numbers[1:-1])
        for lit in lits:
            if lit == 0 or abs(lit) > declared_vars:
                raise ParseError(f"literal {lit} out of range", lineno)
        if weight == top:
            hard.append(lits)
        elif weight == 1:
            soft.append(lits)
        else:
            raise ParseError(f"unsupported clause weight {weight}", lineno)
    if top is None:
        raise ParseError("missing 'p wcnf' header", 1)
    if len(pairs) + len(triples) != declared_vars:
        raise ParseError(
            f"header declares {declared_vars} selectors but comments define "
            f"{len(pairs) + len(triples)}",
            1,
        )
    if len(hard) + len(soft) != declared_clauses:
        raise ParseError(
            f"header declares {declared_clauses} clauses but found {len(hard) + len(soft)}", 1
        )
    return WmaxsatInstance(tuple(pairs), tuple(triples), tuple(soft), tuple(hard), top)


def parse_model(text: str) -> frozenset[int]:
    """Read a MaxSAT solver model: true selector indices from 'v' lines.

    Accepts the usual output style: 'v' lines listing signed literals
    (possibly 0-terminated), 'c'/'s'/'o' lines ignored.  Lines that are
    nothing but signed integers are accepted too.
    """
    true_vars: set[int] = set()
    saw_values = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] in {"c", "s", "o", "p"}:
            continue
        if fields[0] == "v":
            fields = fields[1:]
        try:
            values = [int(f) for f in fields]
        except ValueError:
            continue
        saw_values = True
        true_vars.update(v for v in values if v > 0)
    if not saw_values:
        raise PuboError("model text contains no literal values")
    return frozenset(true_vars)


def selection_from_model(instance: WmaxsatInstance, model: frozenset[int]) -> frozenset[int]:
    """Validate an external model against the hard clauses."""
    for v in model:
        if not 1 <= v <= instance.num_vars:
            raise PuboError(f"model names selector {v}, but there are {instance.num_vars}")
    if not selection_satisfies(instance, model):
        raise PuboError("model does not satisfy the hard clauses")
    return model
