"""Shared helpers for the test suite: seeded random polynomial soup."""

from fractions import Fraction

from bfvkit.galg import GaussRat


def random_coeff(rng, imaginary=True):
    num = rng.randint(-6, 6) or 1
    den = rng.choice([1, 1, 2, 3])
    if imaginary and rng.random() < 0.25:
        return GaussRat(0, Fraction(num, den))
    return GaussRat(Fraction(num, den))


def random_poly(alg, rng, nterms=4, max_len=3, parity=None, imaginary=True):
    """A random canonical polynomial, optionally of fixed parity."""
    terms = []
    gens = alg.gens
    for _ in range(nterms):
        length = rng.randint(0, max_len)
        factors = []
        for _ in range(length):
            g = rng.choice(gens)
            e = 1 if g.parity else rng.randint(1, 2)
            factors.append((g.name, e))
        terms.append((random_coeff(rng, imaginary), factors))
    p = alg.poly(terms)
    if parity is None:
        return p
    ev, od = p.parity_parts()
    return od if parity else ev


def random_homogeneous(alg, rng, nterms=6, max_len=3, imaginary=True):
    """Random polynomial, then the largest homogeneous piece of it."""
    p = random_poly(alg, rng, nterms=nterms, max_len=max_len, imaginary=imaginary)
    by_degree = {}
    for c, factors in p.iter_terms():
        d = sum(alg.by_name[n].degree * e for n, e in factors)
        by_degree.setdefault(d, []).append((c, factors))
    if not by_degree:
        return p
    best = max(by_degree.values(), key=len)
    return alg.poly(best)
