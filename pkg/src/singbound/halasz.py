"""Finite Halász-type machinery over Z/Q: hit probabilities, combinatorial
dimension, exceptional hyperplanes, the functionals f, f_j, g_k, the spectrum,
Lambda-norms, and Littlewood-Offord and Odlyzko-type checks.

Everything here evaluates or checks finite inequalities at concrete ``(n, Q)``.
Probabilities are exact rationals. Trigonometric quantities are floats, and
inequalities between them are compared with relative tolerance ``REL_TOL``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np
from scipy.integrate import quad

from .certify import Certificate
from .dist import DiscreteDist, as_fraction, char_fn_symmetric, min_on_period
from .errors import DomainError, NegativeBase, PrecisionError, ResourceError
from .fieldq import MatrixQ, PrimeField

REL_TOL = 1e-12
CONV_BUDGET = 10 ** 8
SPECTRUM_MAX_Q = 10 ** 6
FLOOR_EXPONENT = 320_000
LOE_SAFETY = 1.05
BOHR_RADIUS = Fraction(1, 100)


def _le(a: float, b: float) -> bool:
    return a <= b + REL_TOL * max(1.0, abs(a), abs(b))


class HyperplaneQ:
    """``{x in (Z/Q)^n : x . a = 0}`` for a nonzero normal ``a``."""

    def __init__(self, normal, field: PrimeField | int):
        if not isinstance(field, PrimeField):
            field = PrimeField(field)
        self.field = field
        self.normal = tuple(int(x) % field.Q for x in normal)
        if not any(self.normal):
            raise DomainError("normal vector must be nonzero mod Q")

    @property
    def n(self) -> int:
        return len(self.normal)

    @property
    def Q(self) -> int:
        return self.field.Q

    def contains(self, x) -> bool:
        if len(x) != self.n:
            raise DomainError("dimension mismatch")
        return sum(int(a) * int(b) for a, b in zip(x, self.normal)) % self.Q == 0

    def to_json(self) -> dict:
        return {"Q": self.Q, "normal": list(self.normal)}

    @classmethod
    def from_json(cls, doc) -> "HyperplaneQ":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(doc["normal"], int(doc["Q"]))

    def __repr__(self):
        return f"HyperplaneQ({list(self.normal)}, Q={self.Q})"


class RowModel:
    """A row of independent coordinates ``alpha_j``, each with a certificate.

    The certificates share ``mu``, ``q`` and ``r``. ``mu_bar = mu - eps0/100``.
    """

    def __init__(self, alphas, certs, eps0=Fraction(1, 100)):
        alphas, certs = list(alphas), list(certs)
        if not alphas or len(alphas) != len(certs):
            raise DomainError("need one certificate per coordinate")
        if len({(c.p, c.q, c.r) for c in certs}) != 1:
            raise DomainError("certificates must share p, q and r")
        self.alphas = alphas
        self.certs = certs
        self.eps0 = as_fraction(eps0)
        if self.eps0 <= 0:
            raise DomainError("eps0 must be positive")
        # a point-mass row has nothing to lower; mu_bar stays 0
        self.mu_bar = self.mu - self.eps0 / 100 if self.mu > 0 else Fraction(0)
        if self.mu_bar < 0:
            raise DomainError("eps0/100 exceeds mu")
        self.betas = [c.beta for c in certs]
        self.betas_bar = [b.with_mu(self.mu_bar) for b in self.betas]

    @classmethod
    def iid(cls, alpha: DiscreteDist, cert: Certificate, n: int, eps0=Fraction(1, 100)) -> "RowModel":
        return cls([alpha] * n, [cert] * n, eps0)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def mu(self) -> Fraction:
        return self.certs[0].mu

    @property
    def p(self) -> Fraction:
        return self.certs[0].p

    @property
    def q(self) -> Fraction:
        return self.certs[0].q

    @property
    def r(self) -> int:
        return self.certs[0].r

    @property
    def ratio(self) -> Fraction:
        """``mu_bar / mu``, taken as 1 for a point-mass row."""
        return self.mu_bar / self.mu if self.mu > 0 else Fraction(1)

    def to_json(self) -> dict:
        return {
            "eps0": f"{self.eps0.numerator}/{self.eps0.denominator}",
            "coordinates": [{"alpha": a.to_json(), "certificate": c.to_json()}
                            for a, c in zip(self.alphas, self.certs)],
        }

    @classmethod
    def from_json(cls, doc) -> "RowModel":
        if isinstance(doc, str):
            doc = json.loads(doc)
        coords = doc["coordinates"]
        return cls([DiscreteDist.from_json(c["alpha"]) for c in coords],
                   [Certificate.from_json(c["certificate"]) for c in coords],
                   Fraction(doc.get("eps0", "1/100")))


@dataclass
class HalaszParams:
    """Small constants. ``eps2`` is kept as its logarithm since admissible values underflow."""

    eps_m1: Fraction = Fraction(0)
    eps0: Fraction = Fraction(1, 100)
    eps1: Fraction = Fraction(1, 100)
    log_eps2: float = math.log(0.5)
    c0: Fraction = Fraction(1, 50)
    c_L: Fraction = Fraction(1)
    C_LOE: float = 1.0
    c_m: Fraction = Fraction(1, 100)

    @property
    def eps2(self) -> float:
        return math.exp(self.log_eps2)

    @classmethod
    def auto(cls, model: RowModel, eps1=Fraction(1, 100), **kw) -> "HalaszParams":
        """Choose ``eps2`` so that ``1 - eps2^(1 - mu_bar/mu) / eps1 >= 1/2``, and ``eps_m1`` from the certificates."""
        eps1 = as_fraction(eps1)
        theta = 1 - model.ratio
        log_eps2 = math.log(float(eps1) / 2) / float(theta) if theta > 0 else math.log(0.5)
        kw.setdefault("eps_m1", strict_margin(model))
        return cls(eps0=model.eps0, eps1=eps1, log_eps2=log_eps2, **kw)

    def eps2_condition(self, model: RowModel) -> bool:
        theta = float(1 - model.ratio)
        return 1 - math.exp(theta * self.log_eps2) / float(self.eps1) >= 0.5 - REL_TOL


def strict_margin(model: RowModel) -> Fraction:
    """Largest ``eps`` with every characteristic function of ``beta_j`` at least ``eps``."""
    out = None
    for cert, beta in zip(model.certs, model.betas):
        m = cert.strict_margin
        if m == 0:
            low = min_on_period(char_fn_symmetric(beta)).lower
            m = max(Fraction(low), Fraction(0))
        out = m if out is None else min(out, m)
    return out


# hit probabilities

def _law_denominator(d: DiscreteDist) -> int:
    return reduce(math.lcm, (p.denominator for p in d.probs), 1)


def _convolve_mod(laws, weights, Q: int) -> dict:
    budget = Q * sum(len(d.atoms) for d in laws)
    if budget > CONV_BUDGET:
        raise ResourceError(f"convolution cost {budget} exceeds budget")
    acc = {0: Fraction(1)}
    for d, a in zip(laws, weights):
        a %= Q
        if a == 0:
            continue
        nxt: dict = {}
        for s, ps in acc.items():
            for v, pv in d.atoms:
                key = (s + v * a) % Q
                nxt[key] = nxt.get(key, 0) + ps * pv
        acc = nxt
    return acc


def _fourier_hit(laws, weights, Q: int, target: int = 0) -> Fraction:
    xi = np.arange(Q, dtype=np.int64)
    total = np.ones(Q, dtype=complex)
    for d, a in zip(laws, weights):
        a %= Q
        if a == 0:
            continue
        ph = np.zeros(Q, dtype=complex)
        for v, p in d.atoms:
            ph += float(p) * np.exp(2j * np.pi * ((v * a * xi) % Q) / Q)
        total *= ph
    total *= np.exp(-2j * np.pi * ((target * xi) % Q) / Q)
    val = total.real.sum() / Q
    D = math.prod(_law_denominator(d) for d, a in zip(laws, weights) if a % Q)
    num = round(val * D)
    if abs(val * D - num) > 1e-6:
        raise PrecisionError("character sum did not reconstruct to a rational")
    return Fraction(num, D)


def hit_probability_laws(laws, weights, Q: int, method: str = "convolution") -> Fraction:
    """``Pr(sum_j x_j a_j = 0 mod Q)`` for independent ``x_j ~ laws[j]``."""
    if method == "convolution":
        return _convolve_mod(laws, weights, Q).get(0, Fraction(0))
    if method == "fourier":
        if Q * len(laws) > CONV_BUDGET:
            raise ResourceError("character sum too large")
        return _fourier_hit(laws, weights, Q)
    raise DomainError(f"unknown method {method!r}")


def hit_probability(model: RowModel, V: HyperplaneQ, method: str = "convolution") -> Fraction:
    _check(model, V)
    return hit_probability_laws(model.alphas, V.normal, V.Q, method)


def _check(model: RowModel, V: HyperplaneQ):
    if model.n != V.n:
        raise DomainError("model and hyperplane dimensions differ")


def _rows(models) -> list:
    return [models] if isinstance(models, RowModel) else list(models)


def max_row_hit(models, V: HyperplaneQ) -> tuple:
    """``(max_i Pr(X_i in V), first maximising row index)``, rows 1-based."""
    probs = [hit_probability(m, V) for m in _rows(models)]
    best = max(probs)
    return best, probs.index(best) + 1


def combinatorial_dimension(models, V: HyperplaneQ, p) -> Fraction:
    """The ``d`` in ``{a/n}`` with ``p^(n - d + 1/n) < max_i Pr(X_i in V) <= p^(n - d)``, or 0."""
    p = as_fraction(p)
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    n = V.n
    m, _ = max_row_hit(models, V)
    if m <= p ** n:
        return Fraction(0)
    # largest j with m^n <= p^j, so p^((j+1)/n) < m <= p^(j/n)
    mn = m ** n
    j = 0
    while j < n * n and p ** (j + 1) >= mn:
        j += 1
    return Fraction(n * n - j, n)


# segments and the exceptional classification

def segment_bounds(n: int, r: int, k: int) -> tuple:
    """1-based inclusive ``(start, end)`` of the k-th of r segments."""
    if not 1 <= k <= r:
        raise IndexError(f"segment {k} outside 1..{r}")
    return (k - 1) * n // r + 1, k * n // r


def segment_vector(model: RowModel, k: int, r: int | None = None) -> list:
    """Laws of ``Z*_k``: ``beta^mu_bar`` on segment k, the point mass 0 elsewhere."""
    r = model.r if r is None else r
    lo, hi = segment_bounds(model.n, r, k)
    zero = DiscreteDist([(0, 1)])
    return [model.betas_bar[j].to_discrete() if lo <= j + 1 <= hi else zero for j in range(model.n)]


def segment_hit(model: RowModel, V: HyperplaneQ, k: int, r: int | None = None) -> Fraction:
    return hit_probability_laws(segment_vector(model, k, r), V.normal, V.Q)


@dataclass
class Classification:
    exceptional: bool
    witness: tuple | None
    row_max: int
    max_hit: Fraction
    segment_hits: dict = field(default_factory=dict)


def classify_exceptional(models, V: HyperplaneQ, params: HalaszParams, r: int | None = None) -> Classification:
    """Unexceptional when some ``(i, k)`` has ``max_j Pr(X_j in V) < eps1 Pr(Z*_{i,k} in V)``."""
    rows = _rows(models)
    r = rows[0].r if r is None else r
    eps1 = as_fraction(params.eps1)
    m, imax = max_row_hit(rows, V)
    hits = {}
    for i, model in enumerate(rows, 1):
        for k in range(1, r + 1):
            hits[(i, k)] = segment_hit(model, V, k, r)
            if m < eps1 * hits[(i, k)]:
                return Classification(False, (i, k), imax, m, hits)
    return Classification(True, None, imax, m, hits)


# the functionals f, f_j, g_k

def _char_table(betas, normal, Q: int, xi=None) -> np.ndarray:
    """``E e(beta_j a_j xi / Q)`` as an array of shape ``(len(xi), n)``."""
    xi = np.arange(Q, dtype=np.int64) if xi is None else np.atleast_1d(np.asarray(xi, dtype=np.int64))
    out = np.empty((xi.size, len(betas)))
    for j, (beta, a) in enumerate(zip(betas, normal)):
        t = ((a % Q) * (xi % Q)) % Q
        col = np.full(xi.size, float(beta.zero_prob))
        for b, w in beta.pairs:
            col += 2 * float(w) * np.cos(2 * np.pi * ((b * t) % Q) / Q)
        out[:, j] = col
    if (out < -REL_TOL).any():
        raise NegativeBase("a characteristic function of beta is negative; the certificate is invalid")
    return np.clip(out, 0.0, None)


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def log_f_values(model: RowModel, V: HyperplaneQ, xi=None, bar: bool = False) -> np.ndarray:
    _check(model, V)
    tab = _char_table(model.betas_bar if bar else model.betas, V.normal, V.Q, xi)
    return _log(tab).sum(axis=1) / model.r


def f_values(model: RowModel, V: HyperplaneQ, xi=None) -> np.ndarray:
    return np.exp(log_f_values(model, V, xi))


def f_eval(model: RowModel, V: HyperplaneQ, xi: int) -> float:
    """``f(xi) = prod_j (1 - mu + mu sum_s p_s cos(2 pi b_s a_j xi / Q))^(1/r)``."""
    return float(f_values(model, V, [xi])[0])


def f_j_eval(model: RowModel, V: HyperplaneQ, xi: int, j: int) -> float:
    """The j-th factor of ``f``, with ``j`` 1-based."""
    _check(model, V)
    if not 1 <= j <= model.n:
        raise IndexError(f"coordinate {j} outside 1..{model.n}")
    tab = _char_table([model.betas[j - 1]], [V.normal[j - 1]], V.Q, [xi])
    return float(tab[0, 0] ** (1 / model.r))


def log_g_values(model: RowModel, V: HyperplaneQ, xi=None) -> np.ndarray:
    """``log g_k`` of shape ``(len(xi), r)``; ``g_k`` is the segment product of the mu_bar characteristic functions."""
    _check(model, V)
    tab = _log(_char_table(model.betas_bar, V.normal, V.Q, xi))
    out = np.empty((tab.shape[0], model.r))
    for k in range(1, model.r + 1):
        lo, hi = segment_bounds(model.n, model.r, k)
        out[:, k - 1] = tab[:, lo - 1:hi].sum(axis=1)
    return out


def g_k_eval(model: RowModel, V: HyperplaneQ, xi: int, k: int) -> float:
    segment_bounds(model.n, model.r, k)
    return float(np.exp(log_g_values(model, V, [xi])[0, k - 1]))


# spectrum and Lambda-norms

def spectrum(model: RowModel, V: HyperplaneQ, params: HalaszParams) -> list:
    """``{xi : f(xi) >= eps2}`` in increasing order."""
    _check(model, V)
    if V.Q > SPECTRUM_MAX_Q:
        raise ResourceError(f"Q={V.Q} too large to enumerate")
    lf = log_f_values(model, V)
    keep = lf >= params.log_eps2 - REL_TOL
    return [int(x) for x in np.nonzero(keep)[0]]


def sumset(A, Q: int, times: int) -> list:
    """The ``times``-fold sumset of ``A`` in Z/Q."""
    if times < 1:
        raise DomainError("times must be positive")
    A = np.unique(np.asarray(list(A), dtype=np.int64) % Q)
    cur = np.zeros(Q, dtype=bool)
    cur[A] = True
    for _ in range(times - 1):
        nxt = np.zeros(Q, dtype=bool)
        for a in A:
            nxt |= np.roll(cur, int(a))
        cur = nxt
    return [int(x) for x in np.nonzero(cur)[0]]


def _torus_sq(x: int, Q: int) -> Fraction:
    x %= Q
    d = min(x, Q - x)
    return Fraction(d * d, Q * Q)


def _difference_counts(Lam, Q: int) -> dict:
    L = np.asarray(sorted(set(int(x) % Q for x in Lam)), dtype=np.int64)
    diffs = (L[:, None] - L[None, :]) % Q
    vals, counts = np.unique(diffs, return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist())), len(L)


def lambda_norm_sq(x: int, Lam, Q: int) -> Fraction:
    """Exact ``||x||_Lambda^2 = |Lambda|^-2 sum_{xi, xi'} ||x (xi - xi') / Q||^2``."""
    counts, size = _difference_counts(Lam, Q)
    if size == 0:
        raise DomainError("Lambda must be nonempty")
    total = sum(c * _torus_sq(x * d, Q) for d, c in counts.items())
    return total / (size * size)


def lambda_norm(x: int, Lam, Q: int) -> float:
    return math.sqrt(lambda_norm_sq(x, Lam, Q))


def lambda_norm_sq_upper(x: int, Lam, Q: int) -> Fraction:
    """Square of ``2 (|Lambda|^-1 sum_xi ||x xi / Q||^2)^(1/2)``."""
    L = set(int(v) % Q for v in Lam)
    return 4 * sum(_torus_sq(x * v, Q) for v in L) / len(L)


def bohr_set(Lam, Q: int, radius=BOHR_RADIUS) -> list:
    """``{x : ||x||_Lambda < radius}``."""
    radius = as_fraction(radius)
    counts, size = _difference_counts(Lam, Q)
    if size == 0:
        raise DomainError("Lambda must be nonempty")
    bound = radius * radius * size * size * Q * Q
    ds = np.asarray(list(counts), dtype=np.int64)
    cs = np.asarray(list(counts.values()), dtype=object)
    out = []
    for x in range(Q):
        t = (x * ds) % Q
        t = np.minimum(t, Q - t).astype(object)
        if (cs * t * t).sum() < bound:
            out.append(x)
    return out


def sqrt_triangle_holds(a: Fraction, b: Fraction, c: Fraction) -> bool:
    """Exact test of ``sqrt(a) <= sqrt(b) + sqrt(c)`` for nonnegative rationals."""
    s = a - b - c
    return s <= 0 or s * s <= 4 * b * c


# finite inequality checks

@dataclass
class HolderChain:
    hit: Fraction
    sum_abs: float
    sum_f: float
    sum_f_bar: float
    segment_product: float

    @property
    def holds(self) -> bool:
        h = float(self.hit)
        return (_le(h, self.sum_abs) and _le(self.sum_abs, self.sum_f)
                and _le(self.sum_f, self.sum_f_bar) and _le(self.sum_f_bar, self.segment_product))


def holder_chain(model: RowModel, V: HyperplaneQ) -> HolderChain:
    """``Pr(X in V) <= Q^-1 sum prod |E e(alpha a xi)| <= Q^-1 sum f <= (mu_bar version) <= prod_k Pr(Z*_k in V)^(1/r)``."""
    _check(model, V)
    Q = V.Q
    xi = np.arange(Q, dtype=np.int64)
    absprod = np.ones(Q)
    for d, a in zip(model.alphas, V.normal):
        ph = np.zeros(Q, dtype=complex)
        for v, p in d.atoms:
            ph += float(p) * np.exp(2j * np.pi * ((v * a * xi) % Q) / Q)
        absprod *= np.abs(ph)
    sum_f = float(np.exp(log_f_values(model, V)).sum() / Q)
    sum_f_bar = float(np.exp(log_f_values(model, V, bar=True)).sum() / Q)
    seg = math.prod(float(segment_hit(model, V, k)) ** (1 / model.r) for k in range(1, model.r + 1))
    return HolderChain(hit_probability(model, V), float(absprod.sum() / Q), sum_f, sum_f_bar, seg)


def segment_domination_holds(model: RowModel, V: HyperplaneQ, xi=None) -> np.ndarray:
    """Pointwise ``prod_j f_j^(r mu_bar / mu) <= prod_k g_k``, as a boolean array over ``xi``."""
    theta = float(model.ratio)
    lhs = model.r * theta * log_f_values(model, V, xi)
    rhs = log_g_values(model, V, xi).sum(axis=1)
    with np.errstate(invalid="ignore"):
        ok = np.exp(lhs) <= np.exp(rhs) + REL_TOL
    return ok


@dataclass
class SpectrumReport:
    spectrum: list
    size: int
    sum_f: float
    lower: float
    upper: float
    exceptional_lower: float | None
    checks: dict

    def to_json(self) -> dict:
        return {
            "spectrum": self.spectrum,
            "size": self.size,
            "sum_f_on_spectrum": self.sum_f,
            "eps2_times_size": self.lower,
            "segment_upper": self.upper,
            "exceptional_lower": self.exceptional_lower,
            "checks": self.checks,
        }


def spectrum_sandwich(model: RowModel, V: HyperplaneQ, params: HalaszParams) -> SpectrumReport:
    """``eps2 |Lambda| <= sum_Lambda f <= Q prod_k Pr(Z*_k in V)^(1/r)``, plus the
    exceptional lower bound ``Q Pr(X in V) (1 - eps2^(1 - mu_bar/mu) / eps1)``."""
    Lam = spectrum(model, V, params)
    f = np.exp(log_f_values(model, V))
    s = float(f[Lam].sum())
    lower = params.eps2 * len(Lam)
    seg = math.prod(float(segment_hit(model, V, k)) ** (1 / model.r) for k in range(1, model.r + 1))
    upper = V.Q * seg
    checks = {"lower": _le(lower, s), "upper": _le(s, upper)}
    cls = classify_exceptional(model, V, params)
    exc = None
    if cls.exceptional:
        theta = float(1 - model.ratio)
        exc = V.Q * float(cls.max_hit) * (1 - math.exp(theta * params.log_eps2) / float(params.eps1))
        checks["exceptional_lower"] = _le(exc, s)
    return SpectrumReport(Lam, len(Lam), s, lower, upper, exc, checks)


def log_floor_constant(params: HalaszParams) -> float:
    """``log((eps2 eps_m1^ln(1/eps2))^320000)``; ``-inf`` when ``eps_m1 = 0``."""
    if params.eps_m1 <= 0:
        return -math.inf
    return FLOOR_EXPONENT * (params.log_eps2 - params.log_eps2 * math.log(params.eps_m1))


def floor_on_4lambda(model: RowModel, V: HyperplaneQ, params: HalaszParams) -> tuple:
    """``(holds, |4 Lambda|, min log f on 4 Lambda, log floor)``."""
    Lam = spectrum(model, V, params)
    four = sumset(Lam, V.Q, 4)
    lf = log_f_values(model, V, four)
    floor = log_floor_constant(params)
    low = float(lf.min())
    return bool(low >= floor), len(four), low, floor


# Littlewood-Offord

def loe_integral(q, r: int, k: int) -> float:
    """``int_0^1 (1 - 2q + 2q cos 2 pi t)^(k/r) dt``."""
    q = float(q)

    def h(t):
        return max(1 - 2 * q + 2 * q * math.cos(2 * math.pi * t), 0.0) ** (k / r)

    val, _ = quad(h, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-11)
    return val


@lru_cache(maxsize=256)
def loe_constant(q, r: int, n: int, safety: float = LOE_SAFETY) -> float:
    """Smallest ``C`` with ``integral + 1/n <= C sqrt(r/(q k))`` for ``1 <= k <= n``, times ``safety``."""
    qf = float(q)
    best = max((loe_integral(q, r, k) + 1 / n) * math.sqrt(qf * k / r) for k in range(1, n + 1))
    return safety * best


def loe_bound(weights, model: RowModel, r: int | None = None, q=None) -> float:
    """``C_LOE sqrt(r / (q k))`` with ``k`` the number of nonzero weights."""
    r = model.r if r is None else r
    q = model.q if q is None else as_fraction(q)
    k = sum(1 for w in weights if w != 0)
    if k < 1:
        raise DomainError("need at least one nonzero weight")
    C = loe_constant(Fraction(q), r, len(weights))
    return C * math.sqrt(r / (float(q) * k))


def loe_exact(weights, model: RowModel | None = None, laws=None, Q: int | None = None) -> Fraction:
    """``max_x Pr(sum_j alpha_j v_j = x)`` by exact convolution (over Z, or Z/Q when given)."""
    laws = model.alphas if laws is None else list(laws)
    if len(laws) != len(weights):
        raise DomainError("one weight per coordinate")
    acc = {0: Fraction(1)}
    for d, v in zip(laws, weights):
        v = int(v)
        if v == 0:
            continue
        nxt: dict = {}
        for s, ps in acc.items():
            for x, px in d.atoms:
                key = s + x * v
                if Q is not None:
                    key %= Q
                nxt[key] = nxt.get(key, 0) + ps * px
        acc = nxt
    return max(acc.values())


# weighted Odlyzko

def subspace_hit(laws, basis, field: PrimeField, budget: int = 10 ** 6) -> Fraction:
    """Exact ``Pr(Z in span(basis))`` over Z/Q by enumerating outcomes of ``Z``."""
    basis = [[int(x) % field.Q for x in row] for row in basis]
    d = MatrixQ(basis, field).rank() if basis else 0
    if d < len(basis):
        raise DomainError("basis vectors are dependent")
    total = math.prod(len(law.atoms) for law in laws)
    if total > budget:
        raise ResourceError(f"{total} outcomes exceed budget")
    out = Fraction(0)
    for combo in itertools.product(*(law.atoms for law in laws)):
        z = [v for v, _ in combo]
        if MatrixQ(basis + [z], field).rank() == d:
            out += math.prod(p for _, p in combo)
    return out


def odlyzko_bound(model: RowModel, k: int, dim: int) -> Fraction:
    """``(1 - mu_bar)^(s - dim)`` with ``s`` the number of random coordinates in segment ``k``.

    When ``r`` divides ``n``, ``s = n/r``.
    """
    lo, hi = segment_bounds(model.n, model.r, k)
    return (1 - model.mu_bar) ** max(0, hi - lo + 1 - dim)


def odlyzko_check(model: RowModel, k: int, basis, field: PrimeField) -> tuple:
    """``(Pr(Z*_k in W), bound, holds)`` for ``W = span(basis)``."""
    prob = subspace_hit(segment_vector(model, k), basis, field)
    bound = odlyzko_bound(model, k, len(basis))
    return prob, bound, prob <= bound
