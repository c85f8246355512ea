"""Exact univariate polynomials over the rationals.

Polynomials are tuples of ``Fraction`` in ascending degree order, trimmed so the
last coefficient is nonzero (the zero polynomial is the empty tuple). Only what
the cosine-polynomial minimiser needs is here: arithmetic, gcd, Sturm chains and
real-root isolation.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = tuple


def trim(p: Sequence) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(Fraction(c) for c in p)


def degree(p: Poly) -> int:
    return len(p) - 1


def add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def sub(a: Poly, b: Poly) -> Poly:
    return add(a, scale(b, -1))


def scale(p: Poly, s) -> Poly:
    return trim([c * s for c in p])


def mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def deriv(p: Poly) -> Poly:
    return trim([i * p[i] for i in range(1, len(p))])


def divmod_(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        f = rem[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            rem[i + shift] -= f * c
        rem = list(trim(rem))
    return trim(q), trim(rem)


def monic(p: Poly) -> Poly:
    return scale(p, 1 / p[-1]) if p else p


def gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def evaluate(p: Poly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def evaluate_float(p: Poly, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def squarefree(p: Poly) -> Poly:
    """Product of the distinct irreducible factors of ``p`` (monic)."""
    if degree(p) < 1:
        return monic(p)
    g = gcd(p, deriv(p))
    return monic(divmod_(p, g)[0])


def odd_multiplicity_part(p: Poly) -> Poly:
    """Monic product of the irreducible factors of odd multiplicity (Yun)."""
    if degree(p) < 1:
        return (Fraction(1),)
    out = (Fraction(1),)
    a0 = monic(p)
    b = gcd(a0, deriv(a0))
    c = divmod_(a0, b)[0]
    d = sub(divmod_(deriv(a0), b)[0], deriv(c))
    i = 1
    while degree(c) > 0:
        a = gcd(c, d)
        if i % 2 == 1:
            out = mul(out, a)
        c = divmod_(c, a)[0]
        d = sub(divmod_(d, a)[0], deriv(c))
        i += 1
    return monic(out)


def sturm_chain(p: Poly) -> list[Poly]:
    chain = [p, deriv(p)]
    while chain[-1]:
        r = divmod_(chain[-2], chain[-1])[1]
        if not r:
            break
        chain.append(scale(r, -1))
    return [c for c in chain if c]


def _sign_changes(chain: list[Poly], x) -> int:
    signs = []
    for q in chain:
        v = evaluate(q, x)
        if v != 0:
            signs.append(v > 0)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def count_roots(p: Poly, lo, hi, chain: list[Poly] | None = None) -> int:
    """Distinct real roots of squarefree ``p`` in the half-open interval (lo, hi]."""
    if degree(p) < 1:
        return 0
    chain = chain if chain is not None else sturm_chain(p)
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def isolate_roots(p: Poly, lo, hi) -> list[tuple[Fraction, Fraction]]:
    """Isolating intervals for the real roots of ``p`` in the closed interval [lo, hi].

    Returns sorted ``(a, b)`` pairs with ``a == b`` for a root hit exactly;
    otherwise the root lies strictly inside ``(a, b)`` and neither endpoint
    is a root.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    sq = squarefree(p)
    if degree(sq) < 1:
        return []
    chain = sturm_chain(sq)
    found = []
    if evaluate(sq, lo) == 0:
        found.append((lo, lo))
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        n = count_roots(sq, a, b, chain)
        if n == 0:
            continue
        if n == 1:
            if evaluate(sq, b) == 0:
                found.append((b, b))
                continue
            if evaluate(sq, a) != 0:
                found.append((a, b))
                continue
        m = (a + b) / 2
        stack.append((a, m))
        stack.append((m, b))
    return sorted(found)


def refine_root(p: Poly, a: Fraction, b: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval of a simple sign-changing root to ``width``."""
    if a == b:
        return a, b
    sq = squarefree(p)
    sa = evaluate(sq, a) > 0
    while b - a > width:
        m = (a + b) / 2
        v = evaluate(sq, m)
        if v == 0:
            return m, m
        if (v > 0) == sa:
            a = m
        else:
            b = m
    return a, b


def abs_coeff_derivative_bound(p: Poly) -> Fraction:
    """Upper bound on ``|p'(x)|`` for ``|x| <= 1``."""
    return sum((i * abs(c) for i, c in enumerate(p)), Fraction(0))
