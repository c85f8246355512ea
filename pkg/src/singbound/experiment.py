"""Reproducible singularity experiments: Monte Carlo, exhaustive oracles, Schur reduction.

Trials are split into fixed-size blocks. Block ``b`` draws from
``SeedSequence(master_seed, spawn_key=(b,))``, so the tally does not depend on
how many workers process the blocks.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.stats import binomtest
from sklearn.base import BaseEstimator

from . import bounds
from .dist import DiscreteDist, gamma, pm2
from .errors import DependentFixedRows, DomainError, ResourceError
from .fieldq import PrimeField, det_integer, primes_for_bound, rank_rational, singular_batch

DEFAULT_BLOCK = 1024
EXHAUSTIVE_BUDGET = 2_000_000


@dataclass
class ExperimentConfig:
    n: int
    trials: int = 10_000
    master_seed: int = 0
    dist: DiscreteDist | None = None
    entry_dists: list | None = None
    fixed_rows: list | None = None
    prime: int | str = "auto"
    mode: str = "singularity"
    k: int | None = None
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.trials < 0:
            raise DomainError("trials must be nonnegative")
        if self.mode not in ("singularity", "rational-eigenvalue"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if (self.dist is None) == (self.entry_dists is None):
            raise DomainError("give exactly one of dist or entry_dists")
        f = len(self.fixed_rows or [])
        if self.entry_dists is not None:
            shape = (len(self.entry_dists), {len(r) for r in self.entry_dists})
            if shape != (self.n - f, {self.n}):
                raise DomainError("entry_dists must have one law per random entry")
        if self.fixed_rows:
            if any(len(r) != self.n for r in self.fixed_rows) or f > self.n:
                raise DomainError("fixed rows must have length n")
            if rank_rational(self.fixed_rows) < f:
                raise DependentFixedRows("fixed rows are linearly dependent")
        if self.mode == "rational-eigenvalue":
            if self.fixed_rows:
                raise DomainError("rational-eigenvalue mode has no fixed rows")
            k = self.k if self.k is not None else max(abs(v) for d in self.laws() for v in d.support)
            if any(abs(v) > k for d in self.laws() for v in d.support):
                raise DomainError(f"entries must lie in [-{k}, {k}]")
            self.k = k
        if self.prime != "auto":
            PrimeField(int(self.prime))
        if self.block_size < 1:
            raise DomainError("block_size must be positive")

    def laws(self) -> list:
        if self.dist is not None:
            return [self.dist]
        return [d for row in self.entry_dists for d in row]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "dist": self.dist.to_json() if self.dist is not None else None,
            "entry_dists": [[d.to_json() for d in row] for row in self.entry_dists] if self.entry_dists else None,
            "fixed_rows": self.fixed_rows,
            "prime": self.prime,
            "mode": self.mode,
            "k": self.k,
            "block_size": self.block_size,
        }

    @classmethod
    def from_json(cls, doc) -> "ExperimentConfig":
        if isinstance(doc, str):
            doc = json.loads(doc)
        doc = dict(doc)
        if doc.get("dist") is not None:
            doc["dist"] = DiscreteDist.from_json(doc["dist"])
        if doc.get("entry_dists") is not None:
            doc["entry_dists"] = [[DiscreteDist.from_json(d) for d in row] for row in doc["entry_dists"]]
        return cls(**doc)


@dataclass
class ExperimentResult:
    trials: int
    singular_count: int
    estimate: Fraction
    wilson: tuple
    seeds: dict
    bound_comparison: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "singular_count": self.singular_count,
            "estimate": f"{self.estimate.numerator}/{self.estimate.denominator}",
            "estimate_float": float(self.estimate),
            "wilson95": [float(self.wilson[0]), float(self.wilson[1])],
            "seeds": self.seeds,
            "bound_comparison": self.bound_comparison,
            **self.extra,
        }


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    if trials <= 0:
        raise DomainError("no trials")
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


# sampling

class _Sampler:
    """Draws integer matrices exactly from rational laws via a common denominator."""

    def __init__(self, laws: list):
        self.tables = []
        for d in laws:
            D = reduce(math.lcm, (p.denominator for p in d.probs), 1)
            if D >= 2 ** 62:
                raise DomainError("probability denominators too large for exact sampling")
            cum = np.cumsum([int(p * D) for p in d.probs])
            self.tables.append((D, cum, np.asarray(d.support, dtype=np.int64)))

    def draw(self, rng: np.random.Generator, count: int, which: int = 0) -> np.ndarray:
        D, cum, vals = self.tables[which]
        u = rng.integers(0, D, size=count, dtype=np.int64)
        return vals[np.searchsorted(cum, u, side="right")]


def _sample_random_rows(cfg: ExperimentConfig, sampler: _Sampler, rng, T: int) -> np.ndarray:
    rows = cfg.n - len(cfg.fixed_rows or [])
    if cfg.dist is not None:
        # column-major fill per trial
        flat = sampler.draw(rng, T * rows * cfg.n)
        return flat.reshape(T, cfg.n, rows).transpose(0, 2, 1)
    out = np.empty((T, rows, cfg.n), dtype=np.int64)
    for j in range(cfg.n):
        for i in range(rows):
            out[:, i, j] = sampler.draw(rng, T, i * cfg.n + j)
    return out


def _hadamard_from_rows(fixed, rows: int, n: int, K: int) -> int:
    prod = 1
    for r in fixed or []:
        prod *= sum(int(x) ** 2 for x in r)
    prod *= (n * K * K) ** rows
    r = math.isqrt(prod)
    return r if r * r == prod else r + 1


def _primes(cfg: ExperimentConfig, shift: int = 0) -> list:
    if cfg.prime != "auto":
        return [PrimeField(int(cfg.prime))]
    K = max(abs(v) for d in cfg.laws() for v in d.support) + shift
    f = len(cfg.fixed_rows or [])
    H = _hadamard_from_rows(cfg.fixed_rows, cfg.n - f, cfg.n, max(K, 1))
    return [PrimeField(p) for p in primes_for_bound(H)]


def _singular_mask(mats: np.ndarray, fields: list) -> np.ndarray:
    """Singular over Z iff singular mod every prime when their product beats the Hadamard bound."""
    mask = singular_batch(mats, fields[0])
    for f in fields[1:]:
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            break
        mask[idx] = singular_batch(mats[idx], f)
    return mask


def _full_matrices(cfg: ExperimentConfig, rand: np.ndarray) -> np.ndarray:
    if not cfg.fixed_rows:
        return rand
    fixed = np.broadcast_to(np.asarray(cfg.fixed_rows, dtype=np.int64), (rand.shape[0], len(cfg.fixed_rows), cfg.n))
    return np.concatenate([fixed, rand], axis=1)


def _block_seed(master: int, block: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(block,))


def _run_blocks(cfg: ExperimentConfig, work, threads: int) -> int:
    nblocks = -(-cfg.trials // cfg.block_size)
    sizes = [min(cfg.block_size, cfg.trials - b * cfg.block_size) for b in range(nblocks)]

    def one(b):
        rng = np.random.default_rng(_block_seed(cfg.master_seed, b))
        return work(rng, sizes[b])

    if threads <= 1 or nblocks <= 1:
        counts = [one(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            counts = list(ex.map(one, range(nblocks)))
    return int(sum(counts))


def _seed_record(cfg: ExperimentConfig) -> dict:
    return {
        "master_seed": cfg.master_seed,
        "scheme": "numpy SeedSequence(master_seed, spawn_key=(block,))",
        "block_size": cfg.block_size,
        "blocks": -(-cfg.trials // cfg.block_size),
    }


def reference_bases(dist: DiscreteDist, n: int) -> dict:
    """Known ``(base, base^n)`` reference values for an i.i.d. entry law."""
    out = {}
    p0 = dist.prob(0)
    coll = sum(p * p for p in dist.probs)
    mu = 1 - p0
    family = None
    if dist == gamma(mu):
        family = (bounds.upper_bounds_gamma(mu), bounds.lower_bounds_gamma(mu))
    elif dist == pm2(mu):
        family = (bounds.upper_bounds_pm2(mu), bounds.lower_bounds_pm2(mu))
    if family:
        for kind, curves in zip(("upper", "lower"), family):
            for name, v in curves.items():
                out[name] = {"kind": kind, "base": float(v), "power_n": float(v) ** n}
    out.setdefault("upper_symmetrized", {"kind": "upper", "base": math.sqrt(coll),
                                         "power_n": math.sqrt(coll) ** n})
    out.setdefault("lower_zero_row", {"kind": "lower", "base": float(p0), "power_n": float(p0) ** n})
    out.setdefault("lower_two_row", {"kind": "lower", "base": float(coll), "power_n": float(coll) ** n})
    return out


def run_singularity(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Monte Carlo estimate of ``Pr(det = 0)`` (full matrix, fixed rows on top)."""
    if cfg.mode != "singularity":
        raise DomainError("config is not in singularity mode")
    sampler = _Sampler(cfg.laws())
    fields = _primes(cfg)

    def work(rng, T):
        mats = _full_matrices(cfg, _sample_random_rows(cfg, sampler, rng, T))
        return int(_singular_mask(mats, fields).sum())

    count = _run_blocks(cfg, work, threads)
    comp = reference_bases(cfg.dist, cfg.n) if cfg.dist is not None and not cfg.fixed_rows else {}
    return ExperimentResult(cfg.trials, count, Fraction(count, cfg.trials), wilson_interval(count, cfg.trials),
                            _seed_record(cfg), comp, {"primes": [f.Q for f in fields]})


def eigen_window(n: int, k: int) -> range:
    """Integer eigenvalue candidates ``-nk..nk``."""
    return range(-n * k, n * k + 1)


def _has_integer_eigenvalue(mats: np.ndarray, k: int, fields: list) -> np.ndarray:
    n = mats.shape[1]
    hit = np.zeros(mats.shape[0], dtype=bool)
    eye = np.eye(n, dtype=np.int64)
    for lam in eigen_window(n, k):
        todo = np.nonzero(~hit)[0]
        if todo.size == 0:
            break
        hit[todo] = _singular_mask(mats[todo] - lam * eye, fields)
    return hit


def run_rational_eigenvalue(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Monte Carlo estimate of ``Pr(M has a rational eigenvalue)`` by scanning ``-nk..nk``."""
    if cfg.mode != "rational-eigenvalue":
        raise DomainError("config is not in rational-eigenvalue mode")
    sampler = _Sampler(cfg.laws())
    fields = _primes(cfg, shift=cfg.n * cfg.k)

    def work(rng, T):
        mats = _sample_random_rows(cfg, sampler, rng, T)
        return int(_has_integer_eigenvalue(mats, cfg.k, fields).sum())

    count = _run_blocks(cfg, work, threads)
    c = cfg.k * max(d.max_prob() for d in cfg.laws())
    base = math.sqrt(float(c / cfg.k))
    comp = {
        "reference": {"c": float(c), "base": base, "power_n": base ** cfg.n},
        "union_bound": {"power_n": (2 * cfg.n * cfg.k + 1) * base ** cfg.n},
    }
    return ExperimentResult(cfg.trials, count, Fraction(count, cfg.trials), wilson_interval(count, cfg.trials),
                            _seed_record(cfg), comp,
                            {"primes": [f.Q for f in fields], "window": [-cfg.n * cfg.k, cfg.n * cfg.k]})


def run(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if cfg.mode == "singularity":
        return run_singularity(cfg, threads)
    return run_rational_eigenvalue(cfg, threads)


# exhaustive oracles

def _enumerate(dist: DiscreteDist, cells: int, budget: int, chunk: int = 1 << 16):
    """Yield ``(values, weights)`` over all assignments of ``cells`` i.i.d. entries.

    Weights are exact integers relative to ``D^cells``.
    """
    m = len(dist.atoms)
    total = m ** cells
    if total > budget:
        raise ResourceError(f"{total} outcomes exceed the enumeration budget {budget}")
    D = reduce(math.lcm, (p.denominator for p in dist.probs), 1)
    vals = np.asarray(dist.support, dtype=np.int64)
    w = [int(p * D) for p in dist.probs]
    radix = m ** np.arange(cells - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % m
        weights = [math.prod(w[d] for d in row) for row in digits.tolist()]
        yield vals[digits], weights
    return D


def exhaustive_singularity(n: int, dist: DiscreteDist, fixed_rows=None, budget: int = EXHAUSTIVE_BUDGET) -> Fraction:
    """Exact ``Pr(det = 0)`` by enumerating every outcome of the random rows."""
    if n < 1:
        raise DomainError("n must be positive")
    fixed = [list(map(int, r)) for r in (fixed_rows or [])]
    f = len(fixed)
    rows = n - f
    if rows == 0:
        return Fraction(int(det_integer(fixed) == 0))
    cfg_like = ExperimentConfig(n=n, trials=0, dist=dist, fixed_rows=fixed or None)
    fields = _primes(cfg_like)
    D = reduce(math.lcm, (p.denominator for p in dist.probs), 1)
    num = 0
    for vals, weights in _enumerate(dist, rows * n, budget):
        mats = _full_matrices(cfg_like, vals.reshape(-1, rows, n))
        mask = _singular_mask(mats, fields)
        num += sum(wt for wt, s in zip(weights, mask.tolist()) if s)
    return Fraction(num, D ** (rows * n))


def exhaustive_rational_eigenvalue(n: int, dist: DiscreteDist, k: int | None = None,
                                   budget: int = EXHAUSTIVE_BUDGET) -> Fraction:
    k = k if k is not None else max(abs(v) for v in dist.support)
    cfg_like = ExperimentConfig(n=n, trials=0, dist=dist, mode="rational-eigenvalue", k=k)
    fields = _primes(cfg_like, shift=n * k)
    D = reduce(math.lcm, (p.denominator for p in dist.probs), 1)
    num = 0
    for vals, weights in _enumerate(dist, n * n, budget):
        mask = _has_integer_eigenvalue(vals.reshape(-1, n, n), k, fields)
        num += sum(wt for wt, s in zip(weights, mask.tolist()) if s)
    return Fraction(num, D ** (n * n))


def has_rational_eigenvalue(M) -> bool:
    """Exact test on one integer matrix, scanning ``|lambda| <= n * max|entry|``."""
    a = np.asarray(M, dtype=np.int64)
    n = a.shape[0]
    k = int(np.abs(a).max()) if a.size else 0
    return any(det_integer((a - lam * np.eye(n, dtype=np.int64)).tolist()) == 0 for lam in eigen_window(n, k))


# Schur reduction

def _adjugate(A: list) -> list:
    f = len(A)
    if f == 1:
        return [[1]]
    adj = [[0] * f for _ in range(f)]
    for i in range(f):
        for j in range(f):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(A) if r != i]
            adj[j][i] = (-1) ** (i + j) * det_integer(minor)
    return adj


class SchurReducer(BaseEstimator):
    """Reduce ``[[A, B], [C, D]]`` (fixed rows on top) to ``-C adj(A) B + det(A) D``.

    The full matrix is singular iff the reduced one is. ``fit`` picks the
    invertible ``f x f`` minor ``A`` from the pivot columns of the fixed rows.
    """

    def fit(self, fixed, y=None):
        fixed = [[int(x) for x in row] for row in fixed]
        f = len(fixed)
        n = len(fixed[0]) if f else 0
        piv = _pivot_columns(fixed)
        if len(piv) < f:
            raise DependentFixedRows("fixed rows are linearly dependent")
        rest = [j for j in range(n) if j not in piv]
        A = [[row[j] for j in piv] for row in fixed]
        B = [[row[j] for j in rest] for row in fixed]
        self.fixed_ = fixed
        self.pivots_ = piv
        self.rest_ = rest
        self.det_A_ = det_integer(A) if f else 1
        # adj(A) B, an f x (n - f) integer matrix
        adjA = _adjugate(A) if f else []
        self.adjA_B_ = [[sum(adjA[i][t] * B[t][j] for t in range(f)) for j in range(len(rest))]
                        for i in range(f)]
        return self

    def transform(self, random_rows) -> np.ndarray:
        R = np.asarray(random_rows)
        single = R.ndim == 2
        if single:
            R = R[None]
        C = R[:, :, self.pivots_].astype(object)
        Dm = R[:, :, self.rest_].astype(object)
        if self.pivots_:
            K = np.asarray(self.adjA_B_, dtype=object).reshape(len(self.pivots_), len(self.rest_))
            red = -np.einsum("tif,fj->tij", C, K) + self.det_A_ * Dm
        else:
            red = Dm
        return red[0] if single else red

    def fit_transform(self, fixed, random_rows):
        return self.fit(fixed).transform(random_rows)


def _pivot_columns(rows: list) -> list:
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    m = len(a[0]) if n else 0
    piv, r = [], 0
    for c in range(m):
        p = next((i for i in range(r, n) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(r + 1, n):
            fct = a[i][c] / a[r][c]
            a[i] = [x - fct * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
        if r == n:
            break
    return piv


def schur_reduce(fixed, random_part):
    """Wrap a sampler ``(rng, T) -> (T, n - f, n)`` into a sampler of reduced matrices."""
    red = SchurReducer().fit(fixed)
    return lambda rng, T: red.transform(random_part(rng, T))


def is_singular_exact(M) -> bool:
    M = np.asarray(M, dtype=object)
    if M.shape[0] == 0:
        return False
    return det_integer(M.tolist()) == 0
