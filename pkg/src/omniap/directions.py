"""Fixed enumeration of rational directions on the unit sphere.

Directions are primitive integer vectors ``z`` (gcd of entries is 1). They are
ordered by sup-norm shell ``H = max|z_i|`` and lexicographically inside a
shell, each coordinate running from ``-H`` to ``H``. Antipodes are distinct.

Index arithmetic never walks the enumeration prefix: the number of primitive
vectors below a shell, or lexicographically before a vector, is counted with
Moebius inversion over the divisors of the shell height. Python integers are
unbounded, so the counts cannot wrap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class DirectionError(ValueError):
    pass


@dataclass(frozen=True)
class RationalDirection:
    integer_vector: tuple
    # derived from integer_vector, so it takes no part in equality or hashing
    unit: np.ndarray = field(compare=False)
    index: int | None = None

    @classmethod
    def from_vector(cls, z, index=None):
        z = tuple(int(v) for v in z)
        if not is_primitive(z):
            raise DirectionError(f"not primitive: {z}")
        zf = np.array(z, dtype=np.float64)
        unit = zf / np.linalg.norm(zf)
        unit.setflags(write=False)
        return cls(z, unit, index)

    @property
    def d(self):
        return len(self.integer_vector)


@dataclass(frozen=True)
class OrientationTuple:
    directions: tuple
    index: int


def is_primitive(z) -> bool:
    g = 0
    for v in z:
        g = math.gcd(g, int(v))
    return g == 1


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


@lru_cache(maxsize=4096)
def _squarefree_divisors(n: int) -> tuple:
    divs = [g for g in range(1, math.isqrt(n) + 1) if n % g == 0]
    divs = sorted(set(divs + [n // g for g in divs]))
    return tuple((g, _mobius(g)) for g in divs if _mobius(g) != 0)


_SIEVE_CAP = 1 << 23
_sieve = {"limit": 0, "mertens": np.zeros(1, dtype=np.int64)}
_mertens_memo: dict = {}


def _mertens_table(limit: int) -> np.ndarray:
    # prefix sums of the Moebius function, extended on demand
    if limit > _sieve["limit"]:
        limit = max(limit, 2 * _sieve["limit"], 1024)
        mu = np.ones(limit + 1, dtype=np.int64)
        rest = np.arange(limit + 1, dtype=np.int64)
        root = math.isqrt(limit)
        small = np.ones(root + 1, dtype=bool)
        small[:2] = False
        for p in range(2, math.isqrt(root) + 1):
            if small[p]:
                small[p * p::p] = False
        for p in np.flatnonzero(small):
            p = int(p)
            mu[::p] *= -1
            rest[::p] //= p
            mu[::p * p] = 0
        # whatever is left of n after removing primes <= sqrt(limit) is 1 or one prime
        mu[rest > 1] *= -1
        mu[0] = 0
        _sieve["limit"] = limit
        _sieve["mertens"] = np.cumsum(mu)
        _mertens_memo.clear()
    return _sieve["mertens"]


def _mertens(x: int) -> int:
    table = _sieve["mertens"]
    if x <= _sieve["limit"]:
        return int(table[x])
    if x in _mertens_memo:
        return _mertens_memo[x]
    # M(x) = 1 - sum_{k=2..x} M(x // k), summed over blocks of equal quotient
    total, k = 1, 2
    while k <= x:
        q = x // k
        k2 = x // q
        total -= (k2 - k + 1) * _mertens(q)
        k = k2 + 1
    _mertens_memo[x] = total
    return total


def count_primitive_upto(d: int, n: int) -> int:
    """Number of primitive vectors in Z^d with sup-norm at most ``n``.

    Moebius inversion over the common divisor, grouped by equal ``n // g``,
    so the cost is about ``n^(2/3)`` rather than ``n``.
    """
    if n <= 0:
        return 0
    _mertens_table(min(_SIEVE_CAP, int(round(n ** (2.0 / 3.0))) + 1))
    total, g, prev = 0, 1, 0
    while g <= n:
        q = n // g
        g2 = n // q
        cur = _mertens(g2)
        total += (cur - prev) * ((2 * q + 1) ** d - 1)
        prev = cur
        g = g2 + 1
    return total


def _shell_with_prefix(h: int, prefix, d: int) -> int:
    # integer vectors with sup-norm exactly h whose leading entries are `prefix`
    if any(abs(v) > h for v in prefix):
        return 0
    rest = d - len(prefix)
    if any(abs(v) == h for v in prefix):
        return (2 * h + 1) ** rest
    return (2 * h + 1) ** rest - (2 * h - 1) ** rest


def count_shell_prefix(H: int, prefix, d: int) -> int:
    """Primitive vectors of shell ``H`` starting with ``prefix``."""
    total = 0
    for g, mu in _squarefree_divisors(H):
        if all(v % g == 0 for v in prefix):
            total += mu * _shell_with_prefix(H // g, [v // g for v in prefix], d)
    return total


def _lex_before_scaled(h: int, z, g: int, d: int) -> int:
    # #{w in Z^d : |w|_inf = h, g*w <lex z}
    total = 0
    hit = False
    for i in range(d):
        rest = d - i - 1
        upper = min(h, -((-z[i]) // g) - 1)  # largest v with g*v < z_i
        n_total = upper + h + 1
        if n_total > 0:
            full = (2 * h + 1) ** rest
            if hit:
                total += n_total * full
            else:
                shell = full - (2 * h - 1) ** rest
                total += full + (n_total - 1) * shell  # v = -h reaches the shell
        if z[i] % g:
            break
        v = z[i] // g
        if abs(v) > h:
            break
        hit = hit or abs(v) == h
    return total


def lex_rank_in_shell(z) -> int:
    z = tuple(int(v) for v in z)
    H = max(abs(v) for v in z)
    return sum(mu * _lex_before_scaled(H // g, z, g, len(z)) for g, mu in _squarefree_divisors(H))


def index_of(z) -> int:
    z = tuple(int(v) for v in z)
    if not any(z):
        raise DirectionError("zero vector has no direction")
    if not is_primitive(z):
        raise DirectionError(f"not primitive: {z}")
    H = max(abs(v) for v in z)
    return count_primitive_upto(len(z), H - 1) + lex_rank_in_shell(z)


@lru_cache(maxsize=65536)
def _vector_at(d: int, index: int) -> tuple:
    if index < 0:
        raise DirectionError("index must be nonnegative")
    if d == 1:
        if index > 1:
            raise DirectionError("only two directions exist in dimension 1")
        return ((-1,), (1,))[index]
    hi = 1
    while count_primitive_upto(d, hi) <= index:
        hi *= 2
    lo = hi // 2  # count(lo) <= index < count(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if count_primitive_upto(d, mid) <= index:
            lo = mid
        else:
            hi = mid
    H = hi
    rank = index - count_primitive_upto(d, H - 1)
    prefix = []
    for _ in range(d):
        for v in range(-H, H + 1):
            c = count_shell_prefix(H, prefix + [v], d)
            if rank < c:
                prefix.append(v)
                break
            rank -= c
    return tuple(prefix)


def direction_at(d: int, index: int) -> RationalDirection:
    """The ``index``-th element of the fixed enumeration, decoded directly."""
    return RationalDirection.from_vector(_vector_at(d, int(index)), index)


def _shell_vectors(d: int, H: int):
    for z in itertools.product(range(-H, H + 1), repeat=d):
        if max(abs(v) for v in z) == H and is_primitive(z):
            yield z


def iter_directions(d: int):
    if d < 1:
        raise DirectionError("dimension must be at least 1")
    index = 0
    H = 1
    while True:
        for z in _shell_vectors(d, H):
            yield RationalDirection.from_vector(z, index)
            index += 1
        if d == 1:
            return
        H += 1


def enumerate_directions(d: int, count: int) -> list:
    if count < 1:
        raise DirectionError("count must be positive")
    return list(itertools.islice(iter_directions(d), count))


def approximate_direction(e, delta: float) -> RationalDirection:
    """A rational direction within ``delta`` of the unit vector ``e``.

    Rounds ``q * e`` with ``q = ceil(2 sqrt(d) / delta)``; the rounding error is at
    most ``sqrt(d) / (2q) <= delta / 4`` and normalising at most doubles it.
    """
    e = np.asarray(e, dtype=np.float64).reshape(-1)
    if not delta > 0:
        raise DirectionError("delta must be positive")
    if abs(float(np.linalg.norm(e)) - 1.0) > 1e-12:
        raise DirectionError("e must be a unit vector")
    q = math.ceil(2.0 * math.sqrt(e.size) / delta)
    z = [int(round(float(v) * q)) for v in e]
    g = 0
    for v in z:
        g = math.gcd(g, v)
    z = [v // g for v in z]
    xi = RationalDirection.from_vector(z, index_of(z))
    if not float(np.linalg.norm(e - xi.unit)) < delta:
        raise DirectionError("rational approximation missed its target")  # unreachable by the bound
    return xi


# ---------------------------------------------------------------------------
# m-fold products via iterated Cantor pairing
# ---------------------------------------------------------------------------

def cantor_pair(a: int, b: int) -> int:
    # antidiagonal walk (0,0),(0,1),(1,0),(0,2),(1,1),(2,0),...
    w = a + b
    return w * (w + 1) // 2 + a


def cantor_unpair(n: int) -> tuple:
    w = (math.isqrt(8 * n + 1) - 1) // 2
    a = n - w * (w + 1) // 2
    return a, w - a


def tuple_to_index(indices) -> int:
    indices = list(indices)
    n = indices[-1]
    for a in reversed(indices[:-1]):
        n = cantor_pair(a, n)
    return n


def index_to_tuple(n: int, m: int) -> tuple:
    out = []
    for _ in range(m - 1):
        a, n = cantor_unpair(n)
        out.append(a)
    out.append(n)
    return tuple(out)


def orientation_tuple_at(d: int, m: int, index: int) -> OrientationTuple:
    if not 1 <= m <= d:
        raise DirectionError(f"need 1 <= m <= d, got m={m}, d={d}")
    subs = index_to_tuple(int(index), m)
    return OrientationTuple(tuple(direction_at(d, s) for s in subs), int(index))


def enumerate_orientation_tuples(d: int, m: int, count: int) -> list:
    if count < 1:
        raise DirectionError("count must be positive")
    return [orientation_tuple_at(d, m, n) for n in range(count)]
