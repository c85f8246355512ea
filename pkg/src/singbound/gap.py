"""Generalized arithmetic progressions in Z/Q.

A GAP is ``{v0 + m_1 v_1 + ... + m_rho v_rho : |m_i| < M_i/2}``. Membership,
properness and coefficient maps are computed by enumerating the coefficient
box, which is cheap at the sizes used here (at most ``ENUM_BUDGET`` tuples).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
import sympy

from .errors import AlreadySpanning, DomainError, NotMember, ResourceError
from .fieldq import PrimeField

ENUM_BUDGET = 10 ** 7


def _half(M: int) -> int:
    """Largest ``|m|`` with ``|m| < M/2``."""
    return (M - 1) // 2


@dataclass(frozen=True)
class CoefficientVector:
    m: tuple

    def __iter__(self):
        return iter(self.m)

    def __len__(self):
        return len(self.m)

    def scaled(self, k: int) -> "CoefficientVector":
        return CoefficientVector(tuple(k * x for x in self.m))


class Gap:
    """An immutable GAP over ``Z/Q``; symmetric when ``v0 = 0``."""

    __slots__ = ("field", "v0", "basis", "dims", "_table")

    def __init__(self, field, basis, dims, v0: int = 0):
        if not isinstance(field, PrimeField):
            field = PrimeField(field)
        basis = tuple(int(v) % field.Q for v in basis)
        dims = tuple(int(M) for M in dims)
        if len(basis) != len(dims):
            raise DomainError("one dimension per basis vector")
        if any(M < 1 for M in dims):
            raise DomainError("dimensions must be positive integers")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "v0", int(v0) % field.Q)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "_table", None)

    def __setattr__(self, key, value):
        raise AttributeError("Gap is immutable")

    @property
    def Q(self) -> int:
        return self.field.Q

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def symmetric(self) -> bool:
        return self.v0 == 0

    def box_size(self) -> int:
        return math.prod(2 * _half(M) + 1 for M in self.dims)

    def volume(self) -> int:
        return math.prod(self.dims)

    def coefficient_box(self):
        return itertools.product(*(range(-_half(M), _half(M) + 1) for M in self.dims))

    def value(self, coeffs) -> int:
        return (self.v0 + sum(c * v for c, v in zip(coeffs, self.basis))) % self.Q

    def _values(self) -> np.ndarray:
        """Element of every coefficient tuple, in :meth:`coefficient_box` order."""
        if self.box_size() > ENUM_BUDGET:
            raise ResourceError(f"coefficient box of size {self.box_size()} exceeds {ENUM_BUDGET}")
        Q = self.Q
        acc = np.array([self.v0], dtype=np.int64)
        for v, M in zip(self.basis, self.dims):
            h = _half(M)
            step = (np.arange(-h, h + 1, dtype=np.int64) * v) % Q
            acc = ((acc[:, None] + step[None, :]) % Q).reshape(-1)
        return acc

    def _lookup(self) -> dict:
        if self._table is None:
            table: dict = {}
            for coeffs, val in zip(self.coefficient_box(), self._values().tolist()):
                table.setdefault(val, []).append(coeffs)
            object.__setattr__(self, "_table", table)
        return self._table

    def __contains__(self, a) -> bool:
        return int(a) % self.Q in self._lookup()

    def __eq__(self, other):
        return isinstance(other, Gap) and (self.Q, self.v0, self.basis, self.dims) == (
            other.Q, other.v0, other.basis, other.dims)

    def __hash__(self):
        return hash((self.Q, self.v0, self.basis, self.dims))

    def __repr__(self):
        return f"Gap(Q={self.Q}, v0={self.v0}, basis={list(self.basis)}, dims={list(self.dims)})"

    def to_json(self) -> dict:
        return {"Q": self.Q, "v0": self.v0, "basis": list(self.basis), "dims": list(self.dims)}

    @classmethod
    def from_json(cls, doc) -> "Gap":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(int(doc["Q"]), doc["basis"], doc["dims"], int(doc.get("v0", 0)))


def enumerate_gap(P: Gap) -> set:
    """The element set of ``P``, as residues in ``[0, Q)``."""
    return set(P._lookup())


def symmetric_residue(x: int, Q: int) -> int:
    x %= Q
    return x - Q if x > Q // 2 else x


@dataclass
class Properness:
    proper: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.proper


def is_proper(P: Gap) -> Properness:
    """Brute-force uniqueness of coefficients; on failure, ``(element, coeffs_a, coeffs_b)``."""
    for val, reps in P._lookup().items():
        if len(reps) > 1:
            return Properness(False, (val, reps[0], reps[1]))
    return Properness(True)


def _require_proper(P: Gap):
    if not is_proper(P):
        raise DomainError("the GAP is not proper")


def phi(P: Gap, a: int) -> CoefficientVector:
    """The unique coefficient vector of ``a`` in the proper GAP ``P``."""
    _require_proper(P)
    reps = P._lookup().get(int(a) % P.Q)
    if reps is None:
        raise NotMember(f"{a} is not in the progression")
    return CoefficientVector(tuple(reps[0]))


def p_norm_sq(P: Gap, a: int) -> Fraction:
    if not P.symmetric:
        raise DomainError("the P-norm needs a symmetric GAP")
    m = phi(P, a)
    return sum((Fraction(mi, Mi) ** 2 for mi, Mi in zip(m, P.dims)), Fraction(0))


def p_norm(P: Gap, a: int) -> float:
    """``(sum_i (m_i / M_i)^2)^(1/2)`` for the coefficients ``m`` of ``a``."""
    return math.sqrt(p_norm_sq(P, a))


@dataclass
class KxResult:
    proper: bool
    phi_x: CoefficientVector
    phi_kx: CoefficientVector

    def __bool__(self):
        return self.proper


def is_kx_proper(P: Gap, x: int, k: int) -> KxResult:
    """Whether ``phi(k x) = k phi(x)``; the two vectors are returned as the witness."""
    px = phi(P, x)
    pkx = phi(P, k * x)
    return KxResult(pkx == px.scaled(k), px, pkx)


def multiples_in(P: Gap, x: int, k: int) -> bool:
    """Whether ``l x`` lies in ``P`` for every ``1 <= l <= k``."""
    return all(l * x in P for l in range(1, k + 1))


def sumset(P: Gap, m: int) -> set:
    """The m-fold sumset ``{x_1 + ... + x_m : x_i in P}`` computed directly."""
    if m < 1:
        raise DomainError("m must be positive")
    Q = P.Q
    base = np.zeros(Q, dtype=bool)
    base[list(enumerate_gap(P))] = True
    elems = np.nonzero(base)[0]
    cur = base.copy()
    for _ in range(m - 1):
        nxt = np.zeros(Q, dtype=bool)
        for e in elems:
            nxt |= np.roll(cur, int(e))
        cur = nxt
    return set(int(x) for x in np.nonzero(cur)[0])


def sumset_iterate(P: Gap, m: int) -> Gap:
    """``mP`` as a GAP with the same basis, base point ``m v0``, and box ``|c_i| <= m h_i``.

    ``h_i`` is the largest coefficient allowed by ``M_i``, so the new dimension
    is ``2 m h_i + 1``; the element set is exactly the m-fold sumset.
    """
    if m < 1:
        raise DomainError("m must be positive")
    if m == 1:
        return P
    return Gap(P.field, P.basis, [2 * m * _half(M) + 1 for M in P.dims], m * P.v0)


# spanning rank reduction

def _primitive_kernel_vector(rows: list, rho: int) -> tuple:
    """A primitive integer vector orthogonal to every row, first nonzero entry positive."""
    if not rows:
        vec = [0] * rho
        vec[-1] = 1
        return tuple(vec)
    A = sympy.Matrix(rows)
    null = A.nullspace()
    if not null:
        raise AlreadySpanning("coefficient vectors span the full space")
    candidates = []
    for v in null:
        den = reduce(math.lcm, (sympy.fraction(x)[1] for x in v), 1)
        ints = [int(x * den) for x in v]
        g = reduce(math.gcd, (abs(x) for x in ints))
        ints = [x // g for x in ints]
        lead = next(x for x in ints if x)
        if lead < 0:
            ints = [-x for x in ints]
        candidates.append(tuple(ints))
    return min(candidates)


def reduce_rank_spanning(P: Gap, B) -> Gap:
    """Drop one generator of a proper symmetric ``P`` when ``phi_P(B)`` is degenerate.

    Takes a primitive integer ``alpha`` orthogonal to ``phi_P(B)``, a pivot ``t``
    with ``alpha_t`` invertible mod Q (the last such index), and returns the GAP
    with basis ``v_i - alpha_i v_t / alpha_t`` (``i != t``) and the same
    remaining dimensions. Every element whose coefficients are orthogonal to
    ``alpha``, in particular all of ``B``, lies in the result.
    """
    if not P.symmetric:
        raise DomainError("spanning reduction needs a symmetric GAP")
    _require_proper(P)
    rows = [list(phi(P, b)) for b in B]
    rho = P.rank
    if rows and sympy.Matrix(rows).rank() == rho:
        raise AlreadySpanning("coefficient vectors span the full space")
    alpha = _primitive_kernel_vector(rows, rho)
    Q = P.Q
    piv = next((i for i in reversed(range(rho)) if alpha[i] % Q), None)
    if piv is None:
        raise DomainError("no coefficient of alpha is invertible mod Q")
    w = P.basis[piv] * pow(alpha[piv], -1, Q) % Q
    basis = [(P.basis[i] - alpha[i] * w) % Q for i in range(rho) if i != piv]
    dims = [P.dims[i] for i in range(rho) if i != piv]
    return Gap(P.field, basis, dims)


# structure checker

@dataclass
class StructureReport:
    membership: bool
    norm_sum: Fraction | None
    norm_ok: bool
    volume: int
    volume_ok: bool
    failing: list

    @property
    def passed(self) -> bool:
        return not self.failing

    def to_json(self) -> dict:
        return {
            "membership": self.membership,
            "norm_sum": None if self.norm_sum is None else float(self.norm_sum),
            "norm_ok": self.norm_ok,
            "volume": self.volume,
            "volume_ok": self.volume_ok,
            "failing": self.failing,
        }


def check_structure_conclusions(P: Gap, coords, C, hit_probability) -> StructureReport:
    """Check the three structure clauses for a supplied ``(P, coords, C)``.

    (i) every coordinate lies in ``P``; (ii) the squared P-norms sum to at most
    ``C``; (iii) ``M_1 ... M_rho <= C / Pr(X in V)``.
    """
    C = Fraction(C)
    hit = Fraction(hit_probability)
    failing = []
    member = all(c in P for c in coords)
    if not member:
        failing.append("membership")
    norm_sum, norm_ok = None, False
    if member and P.symmetric and is_proper(P):
        norm_sum = sum((p_norm_sq(P, c) for c in coords), Fraction(0))
        norm_ok = norm_sum <= C
    if not norm_ok:
        failing.append("bounded_norm")
    vol = P.volume()
    vol_ok = hit == 0 or vol * hit <= C
    if not vol_ok:
        failing.append("volume")
    return StructureReport(member, norm_sum, norm_ok, vol, vol_ok, failing)
