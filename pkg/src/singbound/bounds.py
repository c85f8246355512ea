"""Closed-form bound curves for the lazy-coin and +-1/+-2 matrix families.

Every curve is ``base(mu)`` where the singularity probability is
``(base + o(1))^n``. Bases are either a rational polynomial in ``mu`` or the
square root of one, so values are kept exactly as :class:`BaseValue` and only
turned into decimals for output.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import mpmath
import sympy

from .dist import DiscreteDist, as_fraction
from .errors import DomainError, ResourceError

DECIMAL_DIGITS = 30


@dataclass(frozen=True, order=False)
class BaseValue:
    """``radicand`` itself, or its square root when ``root`` is set. Always >= 0."""

    radicand: Fraction
    root: bool = False

    def squared(self) -> Fraction:
        return self.radicand if self.root else self.radicand ** 2

    def exact(self):
        """A Fraction when the value is rational, else ``None``."""
        if not self.root:
            return self.radicand
        n, d = self.radicand.numerator, self.radicand.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        return Fraction(rn, rd) if rn * rn == n and rd * rd == d else None

    def __float__(self):
        return math.sqrt(self.radicand) if self.root else float(self.radicand)

    def decimal(self, digits: int = DECIMAL_DIGITS) -> str:
        with mpmath.workdps(digits + 5):
            x = mpmath.mpf(self.radicand.numerator) / self.radicand.denominator
            if self.root:
                x = mpmath.sqrt(x)
            return mpmath.nstr(x, digits)

    def sympy(self):
        r = sympy.Rational(self.radicand.numerator, self.radicand.denominator)
        return sympy.sqrt(r) if self.root else r

    def __lt__(self, other):
        return self.squared() < _sq(other)

    def __le__(self, other):
        return self.squared() <= _sq(other)

    def __gt__(self, other):
        return self.squared() > _sq(other)

    def __ge__(self, other):
        return self.squared() >= _sq(other)

    def __eq__(self, other):
        if isinstance(other, (BaseValue, int, Fraction)):
            return self.squared() == _sq(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.squared())

    def __repr__(self):
        return f"sqrt({self.radicand})" if self.root else str(self.radicand)


def _sq(x) -> Fraction:
    if isinstance(x, BaseValue):
        return x.squared()
    x = as_fraction(x)
    if x < 0:
        raise DomainError("bases are nonnegative")
    return x * x


@dataclass(frozen=True)
class BoundCurve:
    """``mu -> poly(mu)`` (or its square root) on the closed interval ``domain``."""

    name: str
    kind: str
    domain: tuple
    coeffs: tuple
    root: bool = False

    def applies(self, mu) -> bool:
        return self.domain[0] <= mu <= self.domain[1]

    def base(self, mu) -> BaseValue:
        mu = as_fraction(mu)
        if not self.applies(mu):
            raise DomainError(f"{self.name} is defined on {self.domain}, not at {mu}")
        v = sum((c * mu ** i for i, c in enumerate(self.coeffs)), Fraction(0))
        return BaseValue(v, self.root)

    def sympy(self, mu):
        expr = sum(sympy.Rational(c.numerator, c.denominator) * mu ** i for i, c in enumerate(self.coeffs))
        return sympy.sqrt(expr) if self.root else expr


F = Fraction
_HALF, _ONE = F(1, 2), F(1)

FIGURE1 = (
    BoundCurve("upper_exp1_small", "upper", (F(0), _HALF), (F(1), F(-1))),
    BoundCurve("upper_exp1_large", "upper", (_HALF, _ONE), (F(1, 4), F(1, 2))),
    BoundCurve("upper_exp2", "upper", (F(0), _ONE), (F(1), F(-2), F(3, 2)), root=True),
    BoundCurve("lower_zero_row", "lower", (F(0), _ONE), (F(1), F(-1))),
    BoundCurve("lower_two_row", "lower", (F(0), _ONE), (F(1), F(-2), F(3, 2))),
)

FIGURE2 = (
    BoundCurve("upper_exp1", "upper", (F(0), F(16, 25)), (F(1), F(-1))),
    BoundCurve("upper_exp2", "upper", (F(0), _ONE), (F(1), F(-2), F(5, 4)), root=True),
    BoundCurve("lower_zero_row", "lower", (F(0), _ONE), (F(1), F(-1))),
    BoundCurve("lower_two_row", "lower", (F(0), _ONE), (F(1), F(-2), F(5, 4))),
)

FIGURES = {1: FIGURE1, 2: FIGURE2}
# domain endpoints that are not curve crossings but matter for plotting
BREAKPOINTS = {1: (_HALF,), 2: (F(16, 25),)}


def _check_mu(mu) -> Fraction:
    mu = as_fraction(mu)
    if not 0 <= mu <= 1:
        raise DomainError("mu must lie in [0, 1]")
    return mu


def _curves(figure: int, kind: str, mu) -> dict:
    mu = _check_mu(mu)
    return {c.name: c.base(mu) for c in FIGURES[figure] if c.kind == kind and c.applies(mu)}


def upper_bounds_gamma(mu) -> dict:
    """Applicable upper-bound bases for the lazy-coin matrix, by curve name."""
    return _curves(1, "upper", mu)


def lower_bounds_gamma(mu) -> dict:
    return _curves(1, "lower", mu)


def upper_bounds_pm2(mu) -> dict:
    return _curves(2, "upper", mu)


def lower_bounds_pm2(mu) -> dict:
    return _curves(2, "lower", mu)


@dataclass(frozen=True)
class Crossing:
    figure: int
    pair: tuple
    mu: object

    def decimal(self, digits: int = DECIMAL_DIGITS) -> str:
        return str(sympy.N(self.mu, digits))

    def __float__(self):
        return float(self.mu)


def crossing_points(figure: int = 1) -> list:
    """Exact crossings of every pair of same-kind curves inside their common domain.

    Roots are found by sympy on the polynomial equation obtained by squaring,
    then kept only if they satisfy the unsquared equation exactly.
    """
    m = sympy.Symbol("mu", real=True)
    out = []
    seen = set()
    curves = FIGURES[figure]
    for a, b in itertools.combinations(curves, 2):
        if a.kind != b.kind:
            continue
        lo = max(a.domain[0], b.domain[0])
        hi = min(a.domain[1], b.domain[1])
        if lo > hi:
            continue
        ea, eb = a.sympy(m), b.sympy(m)
        poly = sympy.expand(_unroot(ea, a.root, b.root) - _unroot(eb, b.root, a.root))
        if poly == 0:
            continue
        for root in sympy.Poly(poly, m).real_roots():
            root = sympy.nsimplify(sympy.radsimp(root))
            if not (sympy.Rational(lo) <= root <= sympy.Rational(hi)):
                continue
            root = sympy.radsimp(root)
            if (a.name, b.name, root) in seen:
                continue
            if sympy.simplify(ea.subs(m, root) - eb.subs(m, root)) == 0:
                seen.add((a.name, b.name, root))
                out.append(Crossing(figure, (a.name, b.name), root))
    out.sort(key=lambda c: (float(c.mu), c.pair))
    return out


def _unroot(expr, root_self, root_other):
    # square both sides when either side is a square root
    if root_self or root_other:
        return sympy.expand(expr ** 2)
    return expr


def gamma_exp_crossing():
    """The exponent-1/exponent-2 upper-curve crossing, ``(9 - sqrt 6)/10``."""
    return (9 - sympy.sqrt(6)) / 10


# dependency oracle

def _scaled_sum_dist(dist: DiscreteDist, coeffs) -> dict:
    """Law of ``sum_i c_i x_i`` for independent copies ``x_i`` of ``dist``."""
    acc = {0: Fraction(1)}
    for c in coeffs:
        nxt: dict = {}
        for s, ps in acc.items():
            for v, pv in dist.atoms:
                key = s + c * v
                nxt[key] = nxt.get(key, 0) + ps * pv
        acc = nxt
    return acc


def dependency_patterns(k: int, coeff_bound: int = 2):
    """Coefficient vectors in ``[-b, b]^k`` with no zero entry, gcd 1, first entry positive."""
    vals = [c for c in range(-coeff_bound, coeff_bound + 1) if c != 0]
    for vec in itertools.product(vals, repeat=k):
        if vec[0] < 0:
            continue
        if reduce(math.gcd, (abs(v) for v in vec)) != 1:
            continue
        yield vec


def dependency_lower_bound(dist: DiscreteDist, k: int, n: int, pattern=None,
                           coeff_bound: int = 2, max_patterns: int = 100_000,
                           return_pattern: bool = False):
    """Exact ``Pr(c_1 R_1 + ... + c_k R_k = 0)`` for i.i.d. rows ``R_i`` of length ``n``.

    Columns are independent, so this is ``Pr(sum c_i x_i = 0)^n``. Without an
    explicit ``pattern`` the maximum over :func:`dependency_patterns` is
    returned.
    """
    if not 1 <= k <= 5:
        raise DomainError("k must lie in 1..5")
    if n < 1:
        raise DomainError("n must be positive")
    if pattern is not None:
        pats = [tuple(pattern)]
        if len(pats[0]) != k or any(c == 0 for c in pats[0]):
            raise DomainError("pattern must have k nonzero entries")
    else:
        count = (2 * coeff_bound) ** k
        if count > max_patterns:
            raise ResourceError(f"{count} coefficient patterns exceed the budget of {max_patterns}")
        pats = list(dependency_patterns(k, coeff_bound))
    best, best_pat = Fraction(-1), None
    for pat in pats:
        col = _scaled_sum_dist(dist, pat).get(0, Fraction(0))
        if col > best:
            best, best_pat = col, pat
    value = best ** n
    return (value, best_pat) if return_pattern else value


# figure data

def _fmt(x) -> str:
    return format(float(x), ".12g")


def figure_columns(figure: int) -> list:
    return ["mu"] + [c.name for c in FIGURES[figure]] + ["best_upper", "best_lower", "marker"]


def figure_rows(figure: int, resolution: int, include_crossings: bool = False) -> list:
    """Rows of ``(mu, marker, {curve: BaseValue or None})`` in increasing ``mu``."""
    if figure not in FIGURES:
        raise DomainError(f"unknown figure {figure}")
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    pts = [(Fraction(i, resolution - 1), "") for i in range(resolution)]
    if include_crossings:
        for c in crossing_points(figure):
            if float(c.mu) > 0:
                pts.append((c.mu, "crossing:" + "/".join(c.pair)))
        for b in BREAKPOINTS[figure]:
            pts.append((b, "breakpoint"))
    pts.sort(key=lambda p: float(p[0]))
    rows = []
    for mu, marker in pts:
        vals = {}
        for c in FIGURES[figure]:
            if isinstance(mu, Fraction):
                vals[c.name] = c.base(mu) if c.applies(mu) else None
            else:
                inside = c.domain[0] <= mu <= c.domain[1]
                vals[c.name] = c.sympy(mu) if inside else None
        rows.append((mu, marker, vals))
    return rows


def emit_figure(figure: int, resolution: int, include_crossings: bool = False) -> str:
    """CSV text with a header and one row per ``mu = i/(resolution - 1)``.

    Values use 12 significant digits; curves outside their domain are blank.
    With ``include_crossings`` extra rows mark curve crossings and domain
    breakpoints.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(figure_columns(figure))
    kinds = {c.name: c.kind for c in FIGURES[figure]}
    for mu, marker, vals in figure_rows(figure, resolution, include_crossings):
        ups = [float(v) for k, v in vals.items() if v is not None and kinds[k] == "upper"]
        lows = [float(v) for k, v in vals.items() if v is not None and kinds[k] == "lower"]
        row = [_fmt(mu)] + ["" if v is None else _fmt(v) for v in vals.values()]
        row += [_fmt(min(ups)) if ups else "", _fmt(max(lows)) if lows else "", marker]
        w.writerow(row)
    return buf.getvalue()
