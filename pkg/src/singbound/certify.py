"""Checking and searching for p-bounded certificates of exponent r.

A certificate for an integer random variable ``alpha`` is a symmetric ``beta``
with ``Pr(beta = 0) = p`` such that

    |E e(alpha t)|^r <= E e(beta t)     for every real t,

together with the mass conditions on ``alpha`` and ``beta``. The comparison
of the two sides is a nonnegativity question for a cosine polynomial, which
:func:`singbound.dist.min_on_period` answers exactly.

:func:`find_certificate` proposes candidates with a grid LP and only returns
one that passes :func:`verify`.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .dist import (CosinePoly, DiscreteDist, PeriodMinimum, SymmetricDist, abs_char_sq,
                   as_fraction, char_fn_real, char_fn_symmetric, min_on_period)
from .errors import DomainError, Infeasible, UnsupportedExponent

log = logging.getLogger(__name__)

GRID_POINTS = 4096
BACKOFF_DELTA = Fraction(1, 2 ** 20)
BACKOFF_STEPS = 40
DEFAULT_Q_FLOOR = Fraction(1, 10 ** 6)


@dataclass(frozen=True)
class Certificate:
    """``(p, q, r, beta)`` with optional strict margin ``eps_{-1}``.

    ``beta.zero_prob`` must equal ``p``; the bracketing ``q <= min atom <= max
    atom <= p`` is checked by :func:`verify`, not here, so that invalid
    certificates can still be represented and reported on.
    """

    p: Fraction
    q: Fraction
    r: int
    beta: SymmetricDist
    strict_margin: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "p", as_fraction(self.p))
        object.__setattr__(self, "q", as_fraction(self.q))
        object.__setattr__(self, "strict_margin", as_fraction(self.strict_margin))
        if not isinstance(self.r, int) or self.r < 1:
            raise DomainError("r must be a positive integer")
        if not 0 < self.p <= 1:
            raise DomainError("p must lie in (0, 1]")
        if not 0 < self.q <= self.p:
            raise DomainError("q must lie in (0, p]")
        if self.beta.zero_prob != self.p:
            raise DomainError("beta must take the value 0 with probability p")
        if self.strict_margin < 0:
            raise DomainError("strict margin must be nonnegative")

    @property
    def mu(self) -> Fraction:
        return 1 - self.p

    @classmethod
    def from_beta(cls, beta: SymmetricDist, r: int, q=None, strict_margin=0) -> "Certificate":
        if q is None:
            q = min(beta.atom_probs())
        return cls(beta.zero_prob, q, r, beta, strict_margin)

    def to_json(self) -> dict:
        return {
            "p": _fs(self.p),
            "q": _fs(self.q),
            "r": self.r,
            "beta": self.beta.to_json(),
            "strict_margin": _fs(self.strict_margin),
        }

    @classmethod
    def from_json(cls, doc) -> "Certificate":
        return cls(Fraction(doc["p"]), Fraction(doc["q"]), int(doc["r"]),
                   SymmetricDist.from_json(doc["beta"]), Fraction(doc.get("strict_margin", "0")))


def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class CertificateReport:
    valid: bool
    worst_t: float
    slack_min: PeriodMinimum
    conditions: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        m = self.slack_min
        return {
            "valid": self.valid,
            "worst_t": self.worst_t,
            "slack_min": {
                "exact": m.exact,
                "value": _fs(m.value) if m.value is not None else None,
                "lower": _num(m.lower),
                "upper": _num(m.upper),
                "sign": m.sign,
            },
            "conditions": dict(self.conditions),
        }


def _num(x):
    return _fs(x) if isinstance(x, Fraction) else float(x)


def majorant_targets(alpha: DiscreteDist, r: int) -> list[CosinePoly]:
    """Cosine polynomials that ``E e(beta t)`` must dominate.

    Even ``r`` gives the single target ``|phi|^r``. Odd ``r`` needs ``alpha``
    symmetric about some integer ``c``; then ``|phi| = |phi_0|`` for the
    centred law and both ``phi_0^r`` and ``-phi_0^r`` are targets.
    """
    if r % 2 == 0:
        return [abs_char_sq(alpha) ** (r // 2)]
    c = alpha.symmetry_center()
    if c is None:
        raise UnsupportedExponent(f"odd exponent r={r} needs a symmetric alpha")
    phi = char_fn_real(alpha.shift(-c)) ** r
    return [phi, -phi]


def verify(alpha: DiscreteDist, cert: Certificate, literal_i: bool = False) -> CertificateReport:
    """Exact check of the three certificate clauses (and the strict margin if set).

    Clause (i) is checked as ``max_x Pr(alpha = x)^r <= p``, which is what
    the exponent-r bound ``p^(n/r)`` needs and what the known exponent-2
    lazy-coin certificates satisfy. ``literal_i=True`` uses
    ``max_x Pr(alpha = x) <= p`` instead.
    """
    mx = alpha.max_prob()
    cond_i = mx <= cert.p if literal_i else mx ** cert.r <= cert.p
    probs = cert.beta.atom_probs()
    cond_ii = cert.q <= min(probs) and max(probs) <= cert.p
    rhs = char_fn_symmetric(cert.beta)
    mins = [min_on_period(rhs - target) for target in majorant_targets(alpha, cert.r)]
    worst = min(mins, key=lambda m: (m.sign if m.sign is not None else 0, m.upper))
    cond_iii = worst.sign is not None and worst.sign >= 0
    conditions = {"i": bool(cond_i), "ii": bool(cond_ii), "iii": bool(cond_iii)}
    if cert.strict_margin > 0:
        mm = min_on_period(rhs - cert.strict_margin)
        conditions["strict_margin"] = mm.sign == 1
    return CertificateReport(all(conditions.values()), worst.argmin_t, worst, conditions)


def certificate_bound(cert: Certificate, n: int):
    """Leading-order bound ``p^(n/r)``; a Fraction when ``r`` divides ``n``, else a float."""
    if n < 1:
        raise DomainError("n must be positive")
    if n % cert.r == 0:
        return cert.p ** (n // cert.r)
    return float(cert.p) ** (n / cert.r)


def slacken(cert: Certificate, mu) -> Certificate:
    """Shrink ``mu`` to get a certificate whose right side is strictly positive.

    ``E e(beta^mu' t) = (1 - mu'/mu) + (mu'/mu) E e(beta^mu t)`` is a convex
    combination with 1, so clause (iii) survives and the new right side is at
    least ``1 - mu'/mu`` wherever the old one was nonnegative.
    """
    mu = as_fraction(mu)
    if not 0 < mu < cert.mu:
        raise DomainError("new mu must lie strictly between 0 and the current mu")
    beta = cert.beta.with_mu(mu)
    m = min_on_period(char_fn_symmetric(beta))
    margin = Fraction(m.lower) / 2 if m.lower > 0 else Fraction(0)
    return Certificate.from_beta(beta, cert.r, q=min(cert.q, min(beta.atom_probs())), strict_margin=margin)


# search

class _LP:
    """Grid LP over per-sign masses ``w_1..w_B`` of a candidate ``beta``."""

    def __init__(self, alpha: DiscreteDist, r: int, B: int, grid: int = GRID_POINTS):
        self.B = B
        targets = majorant_targets(alpha, r)
        freq = max(t.degree for t in targets)
        if B < freq:
            raise DomainError(f"support bound {B} is below the target frequency {freq}")
        ts = np.linspace(0.0, 0.5, grid)
        s = np.arange(1, B + 1)
        G = 2.0 * (1.0 - np.cos(2 * np.pi * np.outer(ts, s)))
        rows, rhs = [], []
        for tgt in targets:
            vals = np.zeros_like(ts)
            for k, c in tgt.coeffs.items():
                vals += float(c) * np.cos(2 * np.pi * k * ts)
            rows.append(G)
            rhs.append(1.0 - vals)
        # clause (ii): each w_s <= p = 1 - 2 sum w
        rows.append(np.eye(B) + 2.0)
        rhs.append(np.ones(B))
        # clause (i): 2 sum w <= 1 - max_prob^r
        rows.append(np.full((1, B), 2.0))
        rhs.append(np.array([1.0 - float(alpha.max_prob() ** r)]))
        self.A = np.vstack(rows)
        self.b = np.concatenate(rhs)

    def solve(self, support=None, floor: float = 0.0):
        support = range(1, self.B + 1) if support is None else support
        bounds = [(0.0, 0.0)] * self.B
        for s in support:
            bounds[s - 1] = (floor, None)
        res = linprog(-np.ones(self.B), A_ub=self.A, b_ub=self.b, bounds=bounds,
                      method="highs-ds", options={"presolve": False})
        if res.status != 0:
            return None
        return np.maximum(res.x, 0.0)


def max_mu_lp(alpha: DiscreteDist, r: int, support_bound: int) -> float:
    """Optimal ``mu`` of the grid LP, without exact verification."""
    w = _LP(alpha, r, support_bound).solve()
    return 0.0 if w is None else float(2 * w.sum())


def _smallest_support(lp: _LP, w_opt, q_floor: float, rel_tol: float = 1e-9):
    """First support (by size, then lexicographically) reaching the optimal mu."""
    target = 2 * w_opt.sum() * (1 - rel_tol) - 1e-12
    tried = 0
    for size in range(1, lp.B + 1):
        for sup in itertools.combinations(range(1, lp.B + 1), size):
            tried += 1
            if tried > 512:
                return None, None
            w = lp.solve(sup, q_floor)
            if w is not None and 2 * w.sum() >= target:
                return sup, w
    return None, None


def _candidate(w, support, q_floor: Fraction):
    pairs = [(s, w_s) for s, w_s in zip(support, w) if w_s > 0]
    if not pairs:
        return None
    zero = 1 - 2 * sum(x for _, x in pairs)
    if zero <= 0 or any(x < q_floor for _, x in pairs):
        return None
    return SymmetricDist(zero, pairs)


def _snaps(w_float, support):
    for den in (2, 4, 8, 16, 32, 64, 100, 128, 256, 1000, 1024, 10 ** 4, 2 ** 16, 10 ** 6, 2 ** 30):
        yield [Fraction(float(w_float[s - 1])).limit_denominator(den) for s in support]


def find_certificate(alpha: DiscreteDist, r: int, support_bound: int,
                     q_floor=DEFAULT_Q_FLOOR) -> Certificate:
    """Search for a certificate with the largest ``mu`` (smallest ``p``) on ``1..B``.

    The grid LP proposes per-sign masses, ties are broken toward the smallest
    support, and the proposal is rounded to nearby rationals. If no rounding
    verifies exactly, ``mu`` is shrunk by ``mu (1 - delta 2^k)`` for
    ``k = 0, 1, ...`` until one does.
    """
    q_floor = as_fraction(q_floor)
    if alpha.max_prob() == 1:
        # |phi_alpha| = 1 everywhere, so only the point mass beta = 0 (p = 1) works
        cert = Certificate.from_beta(SymmetricDist(1, []), r, q=1)
        if verify(alpha, cert).valid:
            return cert
    lp = _LP(alpha, r, support_bound)
    w = lp.solve()
    if w is None or 2 * w.sum() <= 1e-12:
        raise Infeasible("no certificate with positive mu on this support")
    support, w_sup = _smallest_support(lp, w, float(q_floor))
    if support is None:
        support = tuple(s for s in range(1, lp.B + 1) if w[s - 1] > 0)
        w_sup = w
    best = None
    for ws in _snaps(w_sup, support):
        beta = _candidate(ws, support, q_floor)
        if beta is None:
            continue
        cert = Certificate.from_beta(beta, r, q=min(beta.atom_probs()))
        if verify(alpha, cert).valid and (best is None or cert.p < best.p):
            best = cert
    if best is not None:
        return best
    base = [Fraction(float(w_sup[s - 1])) for s in support]
    for k in range(BACKOFF_STEPS):
        lam = 1 - BACKOFF_DELTA * 2 ** k
        if lam <= 0:
            break
        for den in (10 ** 6, 2 ** 40):
            ws = [(x * lam).limit_denominator(den) for x in base]
            beta = _candidate(ws, support, q_floor)
            if beta is None:
                continue
            cert = Certificate.from_beta(beta, r, q=min(beta.atom_probs()))
            if verify(alpha, cert).valid:
                log.debug("certificate verified after %d back-off steps", k + 1)
                return cert
    raise Infeasible("grid LP proposal never verified exactly within the back-off budget")


# known certificates for the lazy coin and the +-1, +-2 variable

def gamma_cert_small_mu(mu) -> Certificate:
    """``beta = gamma^mu`` itself, exponent 1 (valid for ``mu <= 1/2``)."""
    mu = as_fraction(mu)
    beta = SymmetricDist(1 - mu, [(1, mu / 2)] if mu > 0 else [])
    return Certificate.from_beta(beta, 1)


def gamma_cert_large_mu(mu) -> Certificate:
    """Exponent 1 with zero mass ``(2 mu + 1)/4`` (valid for ``mu >= 1/2``)."""
    mu = as_fraction(mu)
    pairs = [(1, (1 - mu) / 2), (2, (2 * mu - 1) / 8)]
    beta = SymmetricDist((2 * mu + 1) / 4, [(b, w) for b, w in pairs if w > 0])
    return Certificate.from_beta(beta, 1)


def gamma_cert_exponent2(mu) -> Certificate:
    """``beta = gamma^mu - gamma^mu'``, exponent 2 (valid for every ``mu``)."""
    mu = as_fraction(mu)
    pairs = [(1, (1 - mu) * mu), (2, mu ** 2 / 4)]
    beta = SymmetricDist(1 - 2 * mu + Fraction(3, 2) * mu ** 2, [(b, w) for b, w in pairs if w > 0])
    return Certificate.from_beta(beta, 2)


def pm2_cert(mu) -> Certificate:
    """``beta`` equal to the +-1, +-2 variable itself, exponent 1 (valid for ``mu <= 16/25``)."""
    mu = as_fraction(mu)
    beta = SymmetricDist(1 - mu, [(1, mu / 4), (2, mu / 4)] if mu > 0 else [])
    return Certificate.from_beta(beta, 1)


def symmetrized_cert(alpha: DiscreteDist) -> Certificate:
    """Exponent 2 with ``beta = alpha - alpha'``; works for every ``alpha``."""
    beta = SymmetricDist.from_discrete(alpha.difference())
    return Certificate.from_beta(beta, 2)
