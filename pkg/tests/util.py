"""Shared test helpers: instance builders and brute-force oracles.

The oracles here use only Polynomial.evaluate plus exhaustive enumeration,
independent of the reduction code paths under test.
"""

from itertools import combinations, product

from puboforge.poly import Polynomial, avar, monomial, xvar


def poly_of(n, entries, const=0):
    """Build a polynomial from {index-tuple: coeff}; () keys not allowed here."""
    terms = {monomial([xvar(i) for i in mono]): c for mono, c in entries.items()}
    if const:
        terms[()] = const
    return Polynomial(n, terms)


def random_poly(rng, n, nterms, max_degree=4, allow_constant=True, coeff_range=8):
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0 if allow_constant else 1, min(max_degree, n))
        if d == 0:
            terms[()] = rng.randint(-coeff_range, coeff_range)
            continue
        mono = monomial([xvar(i) for i in rng.sample(range(1, n + 1), d)])
        terms[mono] = rng.choice([c for c in range(-coeff_range, coeff_range + 1) if c])
    return Polynomial(n, terms)


def random_cubic_poly(rng, n, lam, coeff_range=8, quadratic_layer=False):
    """lam distinct cubic terms; optionally every quadratic term as well."""
    nonzero = [c for c in range(-coeff_range, coeff_range + 1) if c]
    triples = sorted(combinations(range(1, n + 1), 3))
    chosen = rng.sample(triples, lam)
    terms = {}
    if quadratic_layer:
        for pair in combinations(range(1, n + 1), 2):
            terms[monomial([xvar(i) for i in pair])] = rng.choice(nonzero)
    for t in sorted(chosen):
        terms[monomial([xvar(i) for i in t])] = rng.choice(nonzero)
    return Polynomial(n, terms)


def computational_assignments(n):
    for bits in product((0, 1), repeat=n):
        yield bits, {xvar(i + 1): bits[i] for i in range(n)}


def min_over_ancilla(reduced, x):
    """Minimum of the reduced quadratic over all ancilla bits, x fixed."""
    slots = len(reduced.registry)
    best = None
    for abits in product((0, 1), repeat=slots):
        full = dict(x)
        full.update({avar(s): abits[s] for s in range(slots)})
        value = reduced.quadratic.evaluate(full)
        if best is None or value < best:
            best = value
    return best


def pointwise_matches(original, reduced):
    """True iff min over ancilla equals the original value at every point."""
    for _, x in computational_assignments(original.n):
        if min_over_ancilla(reduced, x) != original.evaluate(x):
            return False
    return True


def strictly_dominant(reduced, x):
    """At fixed x: intended ancilla bits are the unique minimizer."""
    intended = reduced.intended_ancilla_bits(x)
    full = dict(x)
    full.update(intended)
    target = reduced.quadratic.evaluate(full)
    slots = len(reduced.registry)
    for abits in product((0, 1), repeat=slots):
        alt = {avar(s): abits[s] for s in range(slots)}
        if alt == intended:
            continue
        full = dict(x)
        full.update(alt)
        if reduced.quadratic.evaluate(full) <= target:
            return False
    return True
