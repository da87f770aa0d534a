"""Quadratic gadgets that rewrite cubic terms exactly.

The workhorse is the conjunction penalty

    s(x, y, z) = 3z + xy - 2xz - 2yz

which is 0 exactly when z == x*y and at least 1 otherwise.  An exhaustive
search over small integer quadratics (`exhaustive_penalty_search`) confirms
that no valid penalty of this shape gets away with coefficients smaller in
magnitude than 3.

A cubic term a*x_i*x_j*x_k becomes a quadratic term a*z*x_k plus a scaled
copy of s binding z to x_i*x_j.  Two gadget modes are supported:

* single-ancilla: one z per pair (i, j); all cubic terms sharing the pair
  ride on the same ancilla, and the penalty weight is
  delta = 1 + max(sum of positive coefficients, -(sum of negatives)),
  the smallest integer making wrong ancilla values strictly uncompetitive.
* triple-ancilla: three copies z^(1..3) per pair, with each coefficient a
  split into three near-equal integers b1+b2+b3 = a.  Every introduced
  coefficient then stays within a factor ~3 of the per-copy delta, which is
  what keeps control precision low on crowded instances.

A `ReductionPlan` records which pair absorbs each cubic term and the penalty
weights; `apply_plan` materializes it into a quadratic `ReducedInstance`.
This module also owns the `.qubo` text format, which carries the quadratic
together with the ancilla map needed to interpret it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

import numpy as np

from puboforge.poly import (
    DegreeError,
    Monomial,
    ParseError,
    Polynomial,
    PuboError,
    Var,
    avar,
    monomial,
    xvar,
)

Pair = tuple[int, int]
Triple = tuple[int, int, int]


class PlanError(PuboError):
    """A reduction plan does not match the polynomial it is applied to."""


class GadgetMode(str, Enum):
    SINGLE = "single"
    TRIPLE = "triple"


# ---------------------------------------------------------------------------
# Ancilla bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairAncilla:
    """Ancilla representing the conjunction x_i * x_j."""

    i: int
    j: int

    def describe(self) -> str:
        return f"pair({self.i},{self.j})"


@dataclass(frozen=True)
class PairCopyAncilla:
    """Copy m of the pair conjunction, used by the triple-ancilla gadget."""

    i: int
    j: int
    copy: int

    def describe(self) -> str:
        return f"pair({self.i},{self.j})#{self.copy}"


@dataclass(frozen=True)
class TripleAncilla:
    """Ancilla for x_i*x_j*x_k, chained through the pair ancilla for `pair`."""

    pair: Pair
    k: int

    def triple(self) -> Triple:
        return tuple(sorted(self.pair + (self.k,)))  # type: ignore[return-value]

    def describe(self) -> str:
        t = self.triple()
        return f"triple({t[0]},{t[1]},{t[2]}) via ({self.pair[0]},{self.pair[1]})"


AncillaDef = PairAncilla | PairCopyAncilla | TripleAncilla


class AncillaRegistry:
    """Ordered collection of ancilla definitions; slot order is creation order.

    In every serialization ancillas are numbered after the computational
    variables, in slot order, so identical plans always produce identical
    files.
    """

    def __init__(self, defs: Iterable[AncillaDef] = ()) -> None:
        self._defs: list[AncillaDef] = []
        self._index: dict[AncillaDef, int] = {}
        for d in defs:
            self.add(d)

    def add(self, definition: AncillaDef) -> int:
        if definition in self._index:
            raise PlanError(f"duplicate ancilla definition {definition.describe()}")
        slot = len(self._defs)
        self._defs.append(definition)
        self._index[definition] = slot
        return slot

    def var_for(self, definition: AncillaDef) -> Var:
        return avar(self._index[definition])

    def definition(self, slot: int) -> AncillaDef:
        return self._defs[slot]

    def __len__(self) -> int:
        return len(self._defs)

    def __iter__(self) -> Iterator[AncillaDef]:
        return iter(self._defs)

    def __contains__(self, definition: AncillaDef) -> bool:
        return definition in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AncillaRegistry):
            return NotImplemented
        return self._defs == other._defs

    def __repr__(self) -> str:
        return f"AncillaRegistry([{', '.join(d.describe() for d in self._defs)}])"


# ---------------------------------------------------------------------------
# The conjunction penalty and its minimality
# ---------------------------------------------------------------------------


def penalty_s(x: Var, y: Var, z: Var, n: int) -> Polynomial:
    """The penalty 3z + xy - 2xz - 2yz over distinct variables x, y, z."""
    if len({x, y, z}) != 3:
        raise ValueError("penalty arguments must be three distinct variables")
    return Polynomial(
        n,
        {
            monomial([z]): 3,
            monomial([x, y]): 1,
            monomial([x, z]): -2,
            monomial([y, z]): -2,
        },
    )


@dataclass(frozen=True)
class PenaltySearchResult:
    """Outcome of the exhaustive search over candidate conjunction penalties.

    Coefficient vectors are (c_x, c_y, c_z, c_xy, c_xz, c_yz) for
    f = c_x x + c_y y + c_z z + c_xy xy + c_xz xz + c_yz yz.
    """

    min_max_coeff: int | None
    optima: tuple[tuple[int, ...], ...]


# Assignment rows (x, y, z); the first four satisfy z == x*y.
_PENALTY_ROWS = [
    (0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1),
    (0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 0),
]


def exhaustive_penalty_search(bound: int = 6) -> PenaltySearchResult:
    """Search every integer quadratic over (x, y, z) with |coeffs| <= bound.

    A candidate is a valid conjunction penalty when it is 0 on all rows with
    z == x*y and >= 1 on the other rows.  Returns the minimum over valid
    candidates of max |coefficient| together with every optimum attaining it.
    """
    basis = np.array(
        [[x, y, z, x * y, x * z, y * z] for x, y, z in _PENALTY_ROWS], dtype=np.int16
    )
    span = np.arange(-bound, bound + 1, dtype=np.int16)
    tail = np.stack(np.meshgrid(*([span] * 5), indexing="ij"), axis=-1).reshape(-1, 5)
    best: int | None = None
    optima: list[tuple[int, ...]] = []
    for c0 in span:
        cand = np.empty((tail.shape[0], 6), dtype=np.int16)
        cand[:, 0] = c0
        cand[:, 1:] = tail
        values = cand @ basis.T
        valid = (values[:, :4] == 0).all(axis=1) & (values[:, 4:] >= 1).all(axis=1)
        if not valid.any():
            continue
        maxabs = np.abs(cand[valid]).max(axis=1)
        chunk_best = int(maxabs.min())
        if best is None or chunk_best < best:
            best = chunk_best
            optima = []
        if chunk_best == best:
            for row in cand[valid][maxabs == best]:
                optima.append(tuple(int(v) for v in row))
    return PenaltySearchResult(best, tuple(sorted(optima)))


def verify_penalty_minimality() -> int:
    """Minimum max-|coefficient| of any valid conjunction penalty (= 3)."""
    result = exhaustive_penalty_search(bound=6)
    if result.min_max_coeff is None:
        raise PuboError("no valid conjunction penalty found within the search bound")
    return result.min_max_coeff


# ---------------------------------------------------------------------------
# Penalty weights and coefficient splitting
# ---------------------------------------------------------------------------


def delta_for_group(coeffs: Iterable[int]) -> int:
    """Smallest penalty weight that strictly dominates a coefficient group.

    For the cubic terms sharing one pair ancilla, wrong ancilla values can
    harvest at most max(sum of positive coefficients, -(sum of negatives));
    one more than that makes every wrong value strictly worse.
    """
    cs = list(coeffs)
    if not cs:
        raise ValueError("delta is undefined for an empty coefficient group")
    return 1 + max(sum(c for c in cs if c > 0), -sum(c for c in cs if c < 0))


def beta_split(alpha: int) -> tuple[int, int, int]:
    """Split alpha into three integers summing to alpha, each within 1 of alpha/3."""
    r = alpha % 3
    if r == 0:
        b = alpha // 3
        return (b, b, b)
    if r == 1:
        return ((alpha + 2) // 3, (alpha - 1) // 3, (alpha - 1) // 3)
    return ((alpha + 1) // 3, (alpha + 1) // 3, (alpha - 2) // 3)


def reduce_single_term(alpha: int, triple: Triple, pair: Pair, ancilla: Var, n: int) -> Polynomial:
    """Quadratic fragment replacing alpha*x_i*x_j*x_k via one fresh ancilla.

    The fragment is alpha*(z*x_k) + (1+|alpha|)*s(x_i, x_j, z) with (i, j)
    the chosen pair and k the remaining index of the triple.
    """
    if alpha == 0:
        raise ValueError("cannot reduce a zero term")
    i, j = pair
    rest = set(triple) - {i, j}
    if len(set(triple)) != 3 or len(rest) != 1 or not {i, j} <= set(triple):
        raise ValueError(f"pair {pair} is not inside triple {triple}")
    (k,) = rest
    fragment = Polynomial(n, {monomial([ancilla, xvar(k)]): alpha})
    return fragment + (1 + abs(alpha)) * penalty_s(xvar(i), xvar(j), ancilla, n)


# ---------------------------------------------------------------------------
# Reduction plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionPlan:
    """Assignment of every cubic term to a pair, plus penalty weights.

    ``assignments`` maps a pair (i, j) to the set of third indices k whose
    cubic terms ride on that pair's ancilla.  ``deltas`` maps (pair, copy) to
    the penalty weight; the single-ancilla gadget only uses copy 1.
    Construct with `from_assignment` to get validated, minimal deltas; direct
    construction is deliberately unchecked so tests can build unsound plans.
    """

    mode: GadgetMode
    assignments: Mapping[Pair, frozenset[int]]
    deltas: Mapping[tuple[Pair, int], int]

    @classmethod
    def from_assignment(
        cls,
        poly: Polynomial,
        assignments: Mapping[Pair, Iterable[int]],
        mode: GadgetMode = GadgetMode.SINGLE,
    ) -> "ReductionPlan":
        mode = GadgetMode(mode)
        normalized = {
            (min(p), max(p)): frozenset(ks) for p, ks in assignments.items() if ks
        }
        plan = cls(mode, normalized, {})
        plan.validate(poly)
        cubic = poly.cubic_terms()
        deltas: dict[tuple[Pair, int], int] = {}
        for pair in sorted(normalized):
            alphas = [
                cubic[tuple(sorted(pair + (k,)))] for k in sorted(normalized[pair])
            ]
            if mode is GadgetMode.SINGLE:
                deltas[(pair, 1)] = delta_for_group(alphas)
            else:
                for m in range(1, 4):
                    deltas[(pair, m)] = delta_for_group(
                        [beta_split(a)[m - 1] for a in alphas]
                    )
        return cls(mode, normalized, deltas)

    def pairs(self) -> list[Pair]:
        return sorted(self.assignments)

    def copies(self) -> range:
        return range(1, 4) if self.mode is GadgetMode.TRIPLE else range(1, 2)

    def ancilla_count(self) -> int:
        return len(self.assignments) * (3 if self.mode is GadgetMode.TRIPLE else 1)

    def validate(self, poly: Polynomial) -> None:
        """Check exactly-once coverage of the polynomial's cubic terms."""
        if poly.degree() > 3:
            raise DegreeError("plans cover cubic terms only; reduce degree-4 input via the quartic pipeline")
        cubic = poly.cubic_terms()
        seen: dict[Triple, Pair] = {}
        for pair, ks in self.assignments.items():
            i, j = pair
            if not (1 <= i < j <= poly.n):
                raise PlanError(f"pair {pair} is not an ordered pair within 1..{poly.n}")
            if not ks:
                raise PlanError(f"pair {pair} has an empty term group")
            for k in ks:
                if not 1 <= k <= poly.n or k in pair:
                    raise PlanError(f"index {k} invalid for pair {pair}")
                t: Triple = tuple(sorted((i, j, k)))  # type: ignore[assignment]
                if t not in cubic:
                    raise PlanError(f"plan covers {t}, which is not a cubic term of the polynomial")
                if t in seen:
                    raise PlanError(f"cubic term {t} covered twice (pairs {seen[t]} and {pair})")
                seen[t] = pair
        missing = set(cubic) - set(seen)
        if missing:
            raise PlanError(f"cubic terms not covered by the plan: {sorted(missing)}")


# ---------------------------------------------------------------------------
# Applying a plan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedInstance:
    """A quadratic polynomial plus the ancilla map that explains it."""

    quadratic: Polynomial
    registry: AncillaRegistry
    source_n: int

    def __post_init__(self) -> None:
        if self.quadratic.degree() > 2:
            raise ValueError("reduced instance must be quadratic")
        if self.quadratic.n != self.source_n:
            raise ValueError("quadratic must be declared over the source variables")
        for v in self.quadratic.referenced_ancillas():
            if v.index >= len(self.registry):
                raise ValueError(f"quadratic references undefined ancilla slot {v.index}")

    def total_variables(self) -> int:
        return self.source_n + len(self.registry)

    def ancilla_count(self) -> int:
        return len(self.registry)

    def intended_ancilla_bits(self, x: Mapping[Var, int]) -> dict[Var, int]:
        """The conjunction value each ancilla is meant to take under x."""
        out: dict[Var, int] = {}
        for slot, d in enumerate(self.registry):
            if isinstance(d, (PairAncilla, PairCopyAncilla)):
                out[avar(slot)] = x[xvar(d.i)] * x[xvar(d.j)]
            else:
                i, j, k = d.triple()
                out[avar(slot)] = x[xvar(i)] * x[xvar(j)] * x[xvar(k)]
        return out

    def decode_assignment(self, full: Mapping[Var, int]) -> dict[Var, int]:
        """Project a full assignment back onto the computational variables."""
        return {xvar(i): full[xvar(i)] for i in range(1, self.source_n + 1)}


def apply_plan(poly: Polynomial, plan: ReductionPlan) -> ReducedInstance:
    """Materialize a plan: quadratic polynomial + ancilla registry.

    Ancillas are created in sorted (i, j, copy) order.  Non-cubic source
    terms pass through unchanged; each pair contributes its grouped product
    terms and one scaled penalty per ancilla copy.
    """
    plan.validate(poly)
    cubic = poly.cubic_terms()
    acc: dict[Monomial, int] = {m: c for m, c in poly if len(m) < 3}
    registry = AncillaRegistry()
    penalties = Polynomial.zero(poly.n)
    for pair in plan.pairs():
        i, j = pair
        ks = sorted(plan.assignments[pair])
        if plan.mode is GadgetMode.SINGLE:
            z = avar(registry.add(PairAncilla(i, j)))
            for k in ks:
                alpha = cubic[tuple(sorted((i, j, k)))]
                m = monomial([z, xvar(k)])
                acc[m] = acc.get(m, 0) + alpha
            key = (pair, 1)
            if key not in plan.deltas:
                raise PlanError(f"plan is missing a delta for {key}")
            penalties = penalties + plan.deltas[key] * penalty_s(xvar(i), xvar(j), z, poly.n)
        else:
            copies = [avar(registry.add(PairCopyAncilla(i, j, m))) for m in (1, 2, 3)]
            for k in ks:
                betas = beta_split(cubic[tuple(sorted((i, j, k)))])
                for z, beta in zip(copies, betas):
                    if beta:
                        m = monomial([z, xvar(k)])
                        acc[m] = acc.get(m, 0) + beta
            for m_index, z in enumerate(copies, start=1):
                key = (pair, m_index)
                if key not in plan.deltas:
                    raise PlanError(f"plan is missing a delta for {key}")
                penalties = penalties + plan.deltas[key] * penalty_s(xvar(i), xvar(j), z, poly.n)
    quadratic = Polynomial(poly.n, acc) + penalties
    return ReducedInstance(quadratic, registry, poly.n)


def max_introduced_coefficient(plan: ReductionPlan, poly: Polynomial) -> int:
    """Largest |coefficient| among the terms a plan adds or modifies.

    Per pair these are the penalty coefficients (3*delta dominates) and the
    merged x_i*x_j coefficient (source alpha_ij plus the sum of deltas);
    the grouped product coefficients are always strictly below 3*delta.
    """
    best = 0
    for pair in plan.pairs():
        i, j = pair
        total_delta = 0
        for m in plan.copies():
            d = plan.deltas[(pair, m)]
            best = max(best, 3 * d)
            total_delta += d
        best = max(best, abs(poly.pair_coefficient(i, j) + total_delta))
    return best


# ---------------------------------------------------------------------------
# .qubo text format
#
#   p qubo <total_vars> <computational_vars>
#   c <offset>
#   <coeff> <i> <j>                  i <= j; i == j encodes a linear term
#   a <idx> pair <i> <j> [<copy>]
#   a <idx> triple <i> <j> <k> via <p> <q>
#
# Ancilla indices run from computational_vars+1 to total_vars in slot order.
# ---------------------------------------------------------------------------


def _line_index(v: Var, n: int) -> int:
    return n + 1 + v.index if v.is_ancilla else v.index


def emit_qubo(reduced: ReducedInstance) -> str:
    """Serialize a reduced instance to canonical ``.qubo`` text."""
    n = reduced.source_n
    lines = [f"p qubo {reduced.total_variables()} {n}"]
    offset = reduced.quadratic.constant()
    if offset:
        lines.append(f"c {offset}")
    for m, c in reduced.quadratic:
        if not m:
            continue
        if len(m) == 1:
            i = j = _line_index(m[0], n)
        else:
            i, j = (_line_index(v, n) for v in m)
        lines.append(f"{c} {i} {j}")
    for slot, d in enumerate(reduced.registry):
        idx = n + 1 + slot
        if isinstance(d, PairAncilla):
            lines.append(f"a {idx} pair {d.i} {d.j}")
        elif isinstance(d, PairCopyAncilla):
            lines.append(f"a {idx} pair {d.i} {d.j} {d.copy}")
        else:
            i, j, k = d.triple()
            lines.append(f"a {idx} triple {i} {j} {k} via {d.pair[0]} {d.pair[1]}")
    return "\n".join(lines) + "\n"


def parse_qubo(text: str) -> ReducedInstance:
    """Parse ``.qubo`` text back into a reduced instance."""
    total: int | None = None
    n = 0
    acc: dict[Monomial, int] = {}
    defs: dict[int, AncillaDef] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if total is None:
            if fields[0] != "p" or len(fields) != 4 or fields[1] != "qubo":
                raise ParseError("expected header 'p qubo <total> <computational>'", lineno)
            try:
                total, n = int(fields[2]), int(fields[3])
            except ValueError:
                raise ParseError("header counts must be integers", lineno) from None
            if not 0 <= n <= total:
                raise ParseError(f"invalid variable counts total={total} computational={n}", lineno)
            continue
        if fields[0] == "c":
            if len(fields) != 2:
                raise ParseError(f"malformed constant line {line!r}", lineno)
            acc[()] = acc.get((), 0) + int(fields[1])
            continue
        if fields[0] == "a":
            try:
                idx = int(fields[1])
            except (IndexError, ValueError):
                raise ParseError(f"malformed ancilla line {line!r}", lineno) from None
            if not n < idx <= total:
                raise ParseError(f"ancilla index {idx} outside {n + 1}..{total}", lineno)
            if idx in defs:
                raise ParseError(f"duplicate ancilla definition for index {idx}", lineno)
            kind = fields[2] if len(fields) > 2 else ""
            if kind == "pair" and len(fields) in (5, 6):
                i, j = int(fields[3]), int(fields[4])
                if not 1 <= i < j <= n:
                    raise ParseError(f"pair ({i},{j}) is not an ordered computational pair", lineno)
                if len(fields) == 6:
                    copy = int(fields[5])
                    if copy not in (1, 2, 3):
                        raise ParseError(f"pair copy must be 1..3, got {copy}", lineno)
                    defs[idx] = PairCopyAncilla(i, j, copy)
                else:
                    defs[idx] = PairAncilla(i, j)
            elif kind == "triple" and len(fields) == 9 and fields[6] == "via":
                i, j, k = int(fields[3]), int(fields[4]), int(fields[5])
                p, q = int(fields[7]), int(fields[8])
                if not 1 <= i < j < k <= n:
                    raise ParseError(f"triple ({i},{j},{k}) is not sorted within 1..{n}", lineno)
                if not {p, q} < {i, j, k} or p >= q:
                    raise ParseError(f"via pair ({p},{q}) is not inside the triple", lineno)
                defs[idx] = TripleAncilla((p, q), k=(({i, j, k} - {p, q}).pop()))
            else:
                raise ParseError(f"malformed ancilla line {line!r}", lineno)
            continue
        if len(fields) != 3:
            raise ParseError(f"malformed term line {line!r}", lineno)
        try:
            coeff, i, j = int(fields[0]), int(fields[1]), int(fields[2])
        except ValueError:
            raise ParseError(f"malformed term line {line!r}", lineno) from None
        if not 1 <= i <= j <= total:
            raise ParseError(f"term indices ({i},{j}) must satisfy 1 <= i <= j <= {total}", lineno)

        def to_var(idx: int) -> Var:
            return xvar(idx) if idx <= n else avar(idx - n - 1)

        m = monomial([to_var(i)]) if i == j else monomial([to_var(i), to_var(j)])
        acc[m] = acc.get(m, 0) + coeff
    if total is None:
        raise ParseError("empty input: missing 'p qubo' header")
    missing = [idx for idx in range(n + 1, total + 1) if idx not in defs]
    if missing:
        raise ParseError(f"missing ancilla definitions for indices {missing}")
    registry = AncillaRegistry(defs[idx] for idx in range(n + 1, total + 1))
    return ReducedInstance(Polynomial(n, acc), registry, n)
