"""Dense linear algebra over Z/Q for a word-sized prime Q.

Primes below 2^31 go through numba-compiled elimination on int64 arrays
(products of two residues fit in 62 bits). Larger primes, up to 2^61, use a
pure-Python path on arbitrary-precision ints.
"""
from __future__ import annotations

import cmath
import math
import struct
from functools import reduce

import numba
import numpy as np
import sympy

from .dist import DiscreteDist, as_fraction
from .errors import BadPrime, DomainError

SMALL_PRIME_LIMIT = 2 ** 31
MAX_PRIME = 2 ** 61
_HEADER = struct.Struct("<QQ")


class PrimeField:
    """Z/Q for an odd prime ``Q <= 2^61``."""

    __slots__ = ("Q", "small")

    def __init__(self, Q: int):
        Q = int(Q)
        if Q <= 2 or Q > MAX_PRIME or not sympy.isprime(Q):
            raise BadPrime(f"{Q} is not an odd prime at most 2^61")
        self.Q = Q
        self.small = Q < SMALL_PRIME_LIMIT

    def reduce(self, x: int) -> int:
        return int(x) % self.Q

    def inv(self, x: int) -> int:
        x %= self.Q
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, -1, self.Q)

    def symmetric(self, x: int) -> int:
        """Representative in ``(-Q/2, Q/2)``."""
        x %= self.Q
        return x - self.Q if x > self.Q // 2 else x

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.Q == self.Q

    def __hash__(self):
        return hash(self.Q)

    def __repr__(self):
        return f"PrimeField({self.Q})"


class MatrixQ:
    """A dense matrix with entries reduced mod ``field.Q``."""

    __slots__ = ("field", "entries")

    def __init__(self, entries, field: PrimeField):
        self.field = field
        if field.small:
            arr = np.asarray(entries, dtype=object) % field.Q
            self.entries = np.ascontiguousarray(arr.astype(np.int64))
        else:
            self.entries = np.asarray([[int(x) % field.Q for x in row] for row in entries], dtype=object)
        if self.entries.ndim != 2:
            raise DomainError("matrix entries must be two-dimensional")

    @property
    def shape(self):
        return self.entries.shape

    def rank(self) -> int:
        return rank(self)

    def det(self) -> int:
        return det(self)

    def tolist(self):
        return [[int(x) for x in row] for row in self.entries]

    def __eq__(self, other):
        return isinstance(other, MatrixQ) and other.field == self.field and self.tolist() == other.tolist()

    def to_bytes(self) -> bytes:
        """Header ``(n, Q)`` as little-endian u64, then ``n*n`` little-endian i64 entries."""
        n, m = self.shape
        if n != m:
            raise DomainError("only square matrices serialize")
        body = np.asarray(self.tolist(), dtype="<i8").reshape(-1)
        return _HEADER.pack(n, self.field.Q) + body.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "MatrixQ":
        n, Q = _HEADER.unpack_from(data, 0)
        body = np.frombuffer(data, dtype="<i8", offset=_HEADER.size, count=n * n)
        return cls(body.reshape(n, n).tolist(), PrimeField(Q))

    def __repr__(self):
        return f"MatrixQ({self.tolist()}, Q={self.field.Q})"


# numba kernels

@numba.njit(cache=True, nogil=True)
def _powmod(b, e, Q):
    r = 1
    b %= Q
    while e > 0:
        if e & 1:
            r = (r * b) % Q
        b = (b * b) % Q
        e >>= 1
    return r


@numba.njit(cache=True, nogil=True)
def _eliminate(a, Q):
    """In-place row reduction; returns (rank, det) where det is meaningful for square input."""
    n, m = a.shape
    r = 0
    d = 1
    for c in range(m):
        if r == n:
            break
        piv = -1
        for i in range(r, n):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            d = 0
            continue
        if piv != r:
            for j in range(m):
                tmp = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = tmp
            d = (Q - d) % Q
        pv = a[r, c]
        d = (d * pv) % Q
        inv = _powmod(pv, Q - 2, Q)
        for i in range(r + 1, n):
            f = (a[i, c] * inv) % Q
            if f == 0:
                continue
            for j in range(c, m):
                a[i, j] = (a[i, j] + (Q - f) * a[r, j]) % Q
        r += 1
    if r < n:
        d = 0
    return r, d


@numba.njit(cache=True, nogil=True)
def _singular_batch(mats, Q, out):
    work = np.empty((mats.shape[1], mats.shape[2]), dtype=np.int64)
    for t in range(mats.shape[0]):
        for i in range(mats.shape[1]):
            for j in range(mats.shape[2]):
                work[i, j] = mats[t, i, j] % Q
        r, _ = _eliminate(work, Q)
        out[t] = r < mats.shape[1]


def _eliminate_py(rows: list, Q: int):
    a = [list(r) for r in rows]
    n = len(a)
    m = len(a[0]) if n else 0
    r, d = 0, 1
    for c in range(m):
        if r == n:
            break
        piv = next((i for i in range(r, n) if a[i][c]), None)
        if piv is None:
            d = 0
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            d = -d
        pv = a[r][c]
        d = d * pv % Q
        inv = pow(pv, -1, Q)
        for i in range(r + 1, n):
            f = a[i][c] * inv % Q
            if f:
                a[i] = [(x - f * y) % Q for x, y in zip(a[i], a[r])]
        r += 1
    if r < n:
        d = 0
    return r, d % Q


def _run(m: MatrixQ):
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0, 1
    if m.field.small:
        return _eliminate(m.entries.copy(), np.int64(m.field.Q))
    return _eliminate_py(m.entries.tolist(), m.field.Q)


def rank(m: MatrixQ) -> int:
    return int(_run(m)[0])


def det(m: MatrixQ) -> int:
    n, k = m.shape
    if n != k:
        raise DomainError("determinant needs a square matrix")
    return int(_run(m)[1]) % m.field.Q


def singular_batch(mats: np.ndarray, field: PrimeField) -> np.ndarray:
    """Boolean mask of singular matrices mod Q for a stack of shape ``(T, n, n)``."""
    mats = np.asarray(mats)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise DomainError("expected a (T, n, n) stack")
    out = np.zeros(mats.shape[0], dtype=np.bool_)
    if mats.shape[1] == 0:
        return out
    if field.small:
        _singular_batch(np.ascontiguousarray(mats, dtype=np.int64), np.int64(field.Q), out)
    else:
        for t in range(mats.shape[0]):
            out[t] = _eliminate_py((mats[t].astype(object) % field.Q).tolist(), field.Q)[0] < mats.shape[1]
    return out


# integer and rational helpers

def clear_denominators(entries) -> list:
    """Scale each row by the lcm of its denominators, giving an integer matrix."""
    out = []
    for row in entries:
        row = [as_fraction(x) for x in row]
        L = reduce(math.lcm, (x.denominator for x in row), 1)
        out.append([int(x * L) for x in row])
    return out


def reduce_rational_matrix(entries, field: PrimeField) -> MatrixQ:
    """Clear denominators row by row, then reduce mod Q.

    Row scaling by nonzero integers preserves singularity over the rationals;
    the mod-Q image agrees with it once Q exceeds :func:`hadamard_bound` of
    the cleared matrix.
    """
    rows = [[as_fraction(x) for x in row] for row in entries]
    for row in rows:
        for x in row:
            if x.denominator % field.Q == 0:
                raise BadPrime(f"denominator {x.denominator} is divisible by Q={field.Q}")
    return MatrixQ(clear_denominators(rows), field)


def hadamard_bound(entries) -> int:
    """``ceil(prod_i ||row_i||)``, an upper bound on ``|det|`` of an integer matrix."""
    prod = 1
    for row in entries:
        prod *= sum(int(x) ** 2 for x in row)
    r = math.isqrt(prod)
    return r if r * r == prod else r + 1


def det_integer(entries) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    a = [[int(x) for x in row] for row in entries]
    n = len(a)
    if any(len(r) != n for r in a):
        raise DomainError("determinant needs a square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k]), None)
            if sw is None:
                return 0
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank_rational(entries) -> int:
    """Exact rank over the rationals."""
    a = [[as_fraction(x) for x in row] for row in entries]
    n = len(a)
    m = len(a[0]) if n else 0
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, n):
            f = a[i][c] / a[r][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == n:
            break
    return r


def primes_for_bound(H: int, start: int = SMALL_PRIME_LIMIT) -> list:
    """Distinct primes below ``start`` whose product exceeds ``H``."""
    out, prod, p = [], 1, start
    while prod <= H:
        p = sympy.prevprime(p)
        out.append(p)
        prod *= p
    return out or [sympy.prevprime(start)]


def char_sum(dist: DiscreteDist, a: int, field: PrimeField) -> complex:
    """``sum_x Pr(x) e(x a / Q)``."""
    Q = field.Q
    a %= Q
    return sum(float(p) * cmath.exp(2j * math.pi * ((x * a) % Q) / Q) for x, p in dist.atoms)
