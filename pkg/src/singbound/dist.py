"""Finitely supported integer distributions and their characteristic functions.

Everything here is exact: probabilities are ``Fraction`` and a characteristic
function of a symmetric variable is a :class:`CosinePoly`, a finite sum
``c0 + sum_k c_k cos(2 pi k t)`` with rational coefficients.

The one non-trivial routine is :func:`min_on_period`. Substituting
``c = cos(2 pi t)`` turns a cosine polynomial into an ordinary polynomial on
``[-1, 1]`` (via Chebyshev polynomials), whose minimum is decided exactly with
Sturm sequences.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import mpmath

from . import _poly
from .errors import DomainError, PrecisionError


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings exactly; floats via their repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a probability")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class DiscreteDist:
    """A random variable on finitely many integers with exact rational masses."""

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Iterable):
        if isinstance(atoms, Mapping):
            atoms = atoms.items()
        items = []
        seen = set()
        for v, p in atoms:
            if isinstance(v, float) and not v.is_integer():
                raise DomainError(f"atom value {v!r} is not an integer")
            v = int(v)
            p = as_fraction(p)
            if v in seen:
                raise DomainError(f"duplicate atom value {v}")
            if p <= 0 or p > 1:
                raise DomainError(f"atom probability {p} outside (0, 1]")
            seen.add(v)
            items.append((v, p))
        if not items:
            raise DomainError("a distribution needs at least one atom")
        total = sum(p for _, p in items)
        if total != 1:
            raise DomainError(f"probabilities sum to {total}, not 1")
        self._atoms = tuple(sorted(items))

    @property
    def atoms(self) -> tuple:
        return self._atoms

    @property
    def support(self) -> tuple:
        return tuple(v for v, _ in self._atoms)

    @property
    def probs(self) -> tuple:
        return tuple(p for _, p in self._atoms)

    def prob(self, x: int) -> Fraction:
        for v, p in self._atoms:
            if v == x:
                return p
        return Fraction(0)

    def max_prob(self) -> Fraction:
        return max(self.probs)

    def min_prob(self) -> Fraction:
        return min(self.probs)

    def is_symmetric(self, center: int = 0) -> bool:
        return all(self.prob(2 * center - v) == p for v, p in self._atoms)

    def symmetry_center(self):
        """Integer ``c`` with the law symmetric about ``c``, or ``None``."""
        lo, hi = self._atoms[0][0], self._atoms[-1][0]
        if (lo + hi) % 2:
            return None
        c = (lo + hi) // 2
        return c if self.is_symmetric(c) else None

    def shift(self, k: int) -> "DiscreteDist":
        return DiscreteDist((v + k, p) for v, p in self._atoms)

    def scale(self, s: int) -> "DiscreteDist":
        if s == 0:
            raise DomainError("scale factor must be nonzero")
        return DiscreteDist((v * s, p) for v, p in self._atoms)

    def difference(self) -> "DiscreteDist":
        """Law of ``X - X'`` for an independent copy ``X'``."""
        acc: dict = {}
        for v1, p1 in self._atoms:
            for v2, p2 in self._atoms:
                acc[v1 - v2] = acc.get(v1 - v2, 0) + p1 * p2
        return DiscreteDist(acc.items())

    def to_json(self) -> dict:
        return {"atoms": [[v, _frac_str(p)] for v, p in self._atoms]}

    @classmethod
    def from_json(cls, doc) -> "DiscreteDist":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls((v, p) for v, p in doc["atoms"])

    def __eq__(self, other):
        return isinstance(other, DiscreteDist) and self._atoms == other._atoms

    def __hash__(self):
        return hash(self._atoms)

    def __repr__(self):
        body = ", ".join(f"{v}: {p}" for v, p in self._atoms)
        return f"DiscreteDist({{{body}}})"


class SymmetricDist:
    """A law symmetric about 0: mass ``zero_prob`` at 0 and ``w`` at each of ``+-b``."""

    __slots__ = ("_zero", "_pairs")

    def __init__(self, zero_prob, pairs: Iterable):
        zero = as_fraction(zero_prob)
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        out = []
        seen = set()
        for b, w in pairs:
            b = int(b)
            w = as_fraction(w)
            if b <= 0:
                raise DomainError(f"pair value {b} must be a positive integer")
            if b in seen:
                raise DomainError(f"duplicate pair value {b}")
            if w <= 0:
                raise DomainError(f"pair probability {w} must be positive")
            seen.add(b)
            out.append((b, w))
        if zero < 0:
            raise DomainError("zero probability must be nonnegative")
        if zero + 2 * sum(w for _, w in out) != 1:
            raise DomainError("zero_prob + 2 * sum(pair probs) must equal 1")
        self._zero = zero
        self._pairs = tuple(sorted(out))

    @property
    def zero_prob(self) -> Fraction:
        return self._zero

    @property
    def pairs(self) -> tuple:
        return self._pairs

    @property
    def mu(self) -> Fraction:
        return 1 - self._zero

    def atom_probs(self) -> list:
        """Probabilities of every atom of the induced law, including 0 when charged."""
        out = [w for _, w in self._pairs for _ in (0, 1)]
        if self._zero > 0:
            out.append(self._zero)
        return out

    def to_discrete(self) -> DiscreteDist:
        atoms = [(0, self._zero)] if self._zero > 0 else []
        for b, w in self._pairs:
            atoms += [(b, w), (-b, w)]
        return DiscreteDist(atoms)

    @classmethod
    def from_discrete(cls, d: DiscreteDist) -> "SymmetricDist":
        if not d.is_symmetric(0):
            raise DomainError("distribution is not symmetric about 0")
        return cls(d.prob(0), [(v, p) for v, p in d.atoms if v > 0])

    def with_mu(self, mu) -> "SymmetricDist":
        """Rescale the nonzero part so that ``Pr(0) = 1 - mu``."""
        mu = as_fraction(mu)
        if not 0 <= mu <= 1:
            raise DomainError("mu must lie in [0, 1]")
        if mu == 0:
            return SymmetricDist(1, [])
        if self.mu == 0:
            raise DomainError("cannot rescale a point mass at 0")
        f = mu / self.mu
        return SymmetricDist(1 - mu, [(b, w * f) for b, w in self._pairs])

    def scale(self, s: int) -> "SymmetricDist":
        s = abs(int(s))
        if s == 0:
            raise DomainError("scale factor must be nonzero")
        return SymmetricDist(self._zero, [(b * s, w) for b, w in self._pairs])

    def to_json(self) -> dict:
        return self.to_discrete().to_json()

    @classmethod
    def from_json(cls, doc) -> "SymmetricDist":
        return cls.from_discrete(DiscreteDist.from_json(doc))

    def __eq__(self, other):
        return isinstance(other, SymmetricDist) and (self._zero, self._pairs) == (other._zero, other._pairs)

    def __hash__(self):
        return hash((self._zero, self._pairs))

    def __repr__(self):
        body = ", ".join(f"+-{b}: {w}" for b, w in self._pairs)
        return f"SymmetricDist(0: {self._zero}, {body})"


# common laws

def gamma(mu) -> DiscreteDist:
    """The lazy coin: 0 with probability ``1 - mu`` and ``+-1`` with ``mu/2`` each."""
    mu = as_fraction(mu)
    if not 0 <= mu <= 1:
        raise DomainError("mu must lie in [0, 1]")
    atoms = [(-1, mu / 2), (1, mu / 2)] if mu > 0 else []
    if mu < 1:
        atoms.append((0, 1 - mu))
    return DiscreteDist(atoms)


def bernoulli() -> DiscreteDist:
    return gamma(1)


def pm2(mu) -> DiscreteDist:
    """0 with probability ``1 - mu`` and each of ``+-1, +-2`` with ``mu/4``."""
    mu = as_fraction(mu)
    if not 0 <= mu <= 1:
        raise DomainError("mu must lie in [0, 1]")
    atoms = [(v, mu / 4) for v in (-2, -1, 1, 2)] if mu > 0 else []
    if mu < 1:
        atoms.append((0, 1 - mu))
    return DiscreteDist(atoms)


def uniform(k: int) -> DiscreteDist:
    """Uniform on ``{-k, ..., k}``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return DiscreteDist((v, Fraction(1, 2 * k + 1)) for v in range(-k, k + 1))


def point_mass(v: int = 0) -> DiscreteDist:
    return DiscreteDist([(v, 1)])


class CosinePoly:
    """``t -> c0 + sum_{k>=1} c_k cos(2 pi k t)``.

    Coefficients are normally ``Fraction``; floats are tolerated and switch
    :func:`min_on_period` to its certified grid fallback.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping | Iterable = ()):
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        acc: dict = {}
        for k, c in coeffs:
            k = abs(int(k))
            if not isinstance(c, float):
                c = as_fraction(c)
            acc[k] = acc.get(k, 0) + c
        self._c = tuple(sorted((k, c) for k, c in acc.items() if c != 0))

    @classmethod
    def constant(cls, c) -> "CosinePoly":
        return cls({0: c})

    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def coeff(self, k: int):
        return dict(self._c).get(k, Fraction(0))

    @property
    def degree(self) -> int:
        return self._c[-1][0] if self._c else 0

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for _, c in self._c)

    def at_zero(self):
        return sum((c for _, c in self._c), Fraction(0))

    def __add__(self, other):
        if not isinstance(other, CosinePoly):
            other = CosinePoly.constant(other)
        return CosinePoly(self._c + other._c)

    __radd__ = __add__

    def __neg__(self):
        return CosinePoly((k, -c) for k, c in self._c)

    def __sub__(self, other):
        if not isinstance(other, CosinePoly):
            other = CosinePoly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CosinePoly):
            s = other if isinstance(other, float) else as_fraction(other)
            return CosinePoly((k, c * s) for k, c in self._c)
        out = []
        for k1, c1 in self._c:
            for k2, c2 in other._c:
                # cos a cos b = (cos(a+b) + cos(a-b)) / 2
                if k1 == 0 or k2 == 0:
                    out.append((k1 + k2, c1 * c2))
                else:
                    half = c1 * c2 / 2
                    out.append((k1 + k2, half))
                    out.append((abs(k1 - k2), half))
        return CosinePoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise DomainError("only nonnegative integer powers are supported")
        out = CosinePoly.constant(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def dilate(self, s: int) -> "CosinePoly":
        """``t -> p(s t)``."""
        s = abs(int(s))
        if s == 0:
            return CosinePoly.constant(self.at_zero())
        return CosinePoly((k * s, c) for k, c in self._c)

    def __call__(self, t, dps=None):
        return eval_cos(self, t, dps)

    def __eq__(self, other):
        if not isinstance(other, CosinePoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        terms = []
        for k, c in self._c:
            terms.append(f"{c}" if k == 0 else f"{c}*cos(2pi*{k}t)")
        return "CosinePoly(" + (" + ".join(terms) or "0") + ")"

    def to_json(self) -> dict:
        return {"coeffs": {str(k): (_frac_str(c) if isinstance(c, Fraction) else c) for k, c in self._c}}

    @classmethod
    def from_json(cls, doc) -> "CosinePoly":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls((int(k), v) for k, v in doc["coeffs"].items())


def char_fn_symmetric(d: SymmetricDist) -> CosinePoly:
    """``E e(beta t) = (1 - mu) + sum_s 2 w_s cos(2 pi b_s t)``."""
    return CosinePoly([(0, d.zero_prob)] + [(b, 2 * w) for b, w in d.pairs])


def char_fn_real(d: DiscreteDist) -> CosinePoly:
    """Characteristic function of a law symmetric about 0 (which is real)."""
    return char_fn_symmetric(SymmetricDist.from_discrete(d))


def abs_char_sq(d: DiscreteDist) -> CosinePoly:
    """``|E e(alpha t)|^2``, the characteristic function of ``alpha - alpha'``."""
    atoms = d.atoms
    terms = [(0, sum((p * p for _, p in atoms), Fraction(0)))]
    for i, (v1, p1) in enumerate(atoms):
        for v2, p2 in atoms[i + 1:]:
            terms.append((v2 - v1, 2 * p1 * p2))
    return CosinePoly(terms)


def eval_cos(p: CosinePoly, t, dps=None):
    """Evaluate ``p`` at ``t``; a float by default, an mpf with ``dps`` digits otherwise."""
    if dps is None:
        t = float(t)
        return math.fsum(float(c) * math.cos(2 * math.pi * k * t) for k, c in p._c)
    with mpmath.workdps(dps):
        t = mpmath.mpf(t.numerator) / t.denominator if isinstance(t, Fraction) else mpmath.mpf(t)
        acc = mpmath.mpf(0)
        for k, c in p._c:
            cc = mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(c)
            acc += cc * mpmath.cos(2 * mpmath.pi * k * t)
        return +acc


@lru_cache(maxsize=None)
def chebyshev_t(k: int) -> tuple:
    """Coefficients of ``T_k`` in ascending powers of ``c``."""
    if k == 0:
        return (Fraction(1),)
    if k == 1:
        return (Fraction(0), Fraction(1))
    a, b = chebyshev_t(k - 2), chebyshev_t(k - 1)
    return _poly.sub(_poly.mul((Fraction(0), Fraction(2)), b), a)


def to_algebraic(p: CosinePoly) -> tuple:
    """The polynomial ``P`` with ``p(t) = P(cos 2 pi t)``."""
    out: tuple = ()
    for k, c in p._c:
        out = _poly.add(out, _poly.scale(chebyshev_t(k), c))
    return out


@dataclass(frozen=True)
class PeriodMinimum:
    """Global minimum of a cosine polynomial over a period.

    ``lower <= min <= upper`` always holds; ``value`` is set when the minimum
    is known exactly. ``argmin_t`` lies in ``[0, 1/2]`` (the function is even).
    ``sign`` is the exact sign of the minimum (-1, 0, 1) when decided.
    """

    lower: object
    upper: object
    value: object
    argmin_t: float
    sign: object
    exact: bool

    @property
    def nonnegative(self):
        return None if self.sign is None else self.sign >= 0

    def approx(self) -> float:
        return float(self.value) if self.value is not None else (float(self.lower) + float(self.upper)) / 2


def _c_to_t(c) -> float:
    return math.acos(max(-1.0, min(1.0, float(c)))) / (2 * math.pi)


class _Critical:
    """One isolated critical point of ``P`` inside ``[-1, 1]`` with a value enclosure."""

    def __init__(self, P, sqd, lip, a, b, zero_root):
        self.P, self.sqd, self.lip = P, sqd, lip
        self.a, self.b = a, b
        self.zero = zero_root
        self._enclose()

    def _enclose(self):
        if self.zero:
            self.lo = self.hi = Fraction(0)
        elif self.a == self.b:
            self.lo = self.hi = _poly.evaluate(self.P, self.a)
        else:
            m = (self.a + self.b) / 2
            v = _poly.evaluate(self.P, m)
            r = self.lip * (self.b - self.a) / 2
            self.lo, self.hi = v - r, v + r

    @property
    def exact(self):
        return self.lo == self.hi

    def refine(self, width):
        self.a, self.b = _poly.refine_root(self.sqd, self.a, self.b, width)
        self._enclose()

    def sign(self):
        # the critical value is nonzero unless flagged, so refinement terminates
        width = self.b - self.a
        while not self.exact and self.lo <= 0 <= self.hi:
            width /= 2 ** 16
            self.refine(width)
        return (self.lo > 0) - (self.hi < 0) if not (self.exact and self.lo == 0) else 0

    @property
    def t(self):
        return _c_to_t((self.a + self.b) / 2)


def min_on_period(p: CosinePoly, tol=Fraction(1, 2 ** 64), decide_sign: bool = True,
                  max_grid: int = 10 ** 7) -> PeriodMinimum:
    """Global minimum of ``p`` over ``t in [0, 1)``.

    Rational coefficients give an exact sign decision and either the exact
    minimum or an enclosure of width at most ``tol``. Float coefficients use a
    certified grid with Lipschitz bound ``2 pi sum k |c_k|`` and raise
    :class:`PrecisionError` when more than ``max_grid`` points are needed.
    """
    if not p.is_exact:
        return _grid_minimum(p, float(tol), max_grid)
    P = to_algebraic(p)
    if _poly.degree(P) < 1:
        v = P[0] if P else Fraction(0)
        return PeriodMinimum(v, v, v, 0.0, (v > 0) - (v < 0), True)
    tol = as_fraction(tol)
    dP = _poly.deriv(P)
    sqd = _poly.squarefree(dP)
    lip = _poly.abs_coeff_derivative_bound(P)
    common = _poly.squarefree(_poly.gcd(P, dP)) if _poly.degree(_poly.gcd(P, dP)) >= 1 else None
    common_chain = _poly.sturm_chain(common) if common is not None else None

    cands = []
    for a, b in _poly.isolate_roots(dP, -1, 1):
        zero = False
        if common is not None:
            if a == b:
                zero = _poly.evaluate(common, a) == 0
            else:
                zero = _poly.count_roots(common, a, b, common_chain) > 0
        c = _Critical(P, sqd, lip, a, b, zero)
        if c.a != c.b:
            c.refine(tol / (lip + 1))
        cands.append(c)
    ends = [(Fraction(1), _poly.evaluate(P, 1)), (Fraction(-1), _poly.evaluate(P, -1))]

    lower = min([v for _, v in ends] + [c.lo for c in cands])
    upper = min([v for _, v in ends] + [c.hi for c in cands])

    best_end = min(ends, key=lambda e: e[1])
    if best_end[1] == upper:
        best_t = _c_to_t(best_end[0])
    else:
        best_t = min(cands, key=lambda c: c.hi).t
    value = upper if lower == upper else None

    sign = None
    if value is not None:
        sign = (value > 0) - (value < 0)
    elif decide_sign:
        if upper < 0:
            sign = -1
        elif lower > 0:
            sign = 1
        else:
            signs = [1 if v > 0 else (0 if v == 0 else -1) for _, v in ends]
            signs += [c.sign() for c in cands]
            sign = min(signs)
            lower = min([v for _, v in ends] + [c.lo for c in cands])
            upper = min([v for _, v in ends] + [c.hi for c in cands])
            if sign == 0:
                value = Fraction(0)
                lower = upper = value
    return PeriodMinimum(lower, upper, value, best_t, sign, value is not None)


def _grid_minimum(p: CosinePoly, tol: float, max_grid: int) -> PeriodMinimum:
    import numpy as np

    lip = 2 * math.pi * sum(k * abs(float(c)) for k, c in p._c)
    # every t in [0, 1/2] is within h/2 of a grid point
    n = max(2, int(math.ceil(lip / (4 * tol))) + 1) if lip > 0 else 2
    if n > max_grid:
        raise PrecisionError(f"certified grid needs {n} points, budget is {max_grid}")
    ts = np.linspace(0.0, 0.5, n)
    vals = np.zeros(n)
    for k, c in p._c:
        vals += float(c) * np.cos(2 * np.pi * k * ts)
    i = int(np.argmin(vals))
    h = 0.5 / (n - 1)
    upper = float(vals[i])
    lower = upper - lip * h / 2
    sign = 1 if lower > 0 else (-1 if upper < 0 else None)
    return PeriodMinimum(lower, upper, None, float(ts[i]), sign, False)
