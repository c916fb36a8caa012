"""
Exact-integer algorithms for resonance sub-modules of Z^n.

Bounded Bezout coefficients, unimodular completion of a primitive vector,
Smith normal form, module volumes, the upper bounds on the constants of the
rank-one Smith factorization, and rational points of short intervals.

All arithmetic is done on Python ints and Fractions; cofactors grow like
n! K^(n-1) and overflow fixed-width integers quickly.
"""

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

from ..errors import DomainError, NekholabError
from ..utils.logger import get_logger

IntMatrix = List[List[int]]
MatrixLike = Sequence[Sequence[int]]
RealLike = Union[int, float, Fraction]


def _as_int(value) -> int:
    try:
        return operator.index(value)
    except TypeError:
        raise DomainError(f"Expected an integer, got {value!r}") from None


@dataclass(frozen=True)
class IntVector:
    """Integer vector k of Z^n with its l1-norm |k| = |k_1| + ... + |k_n|."""

    components: Tuple[int, ...]

    def __post_init__(self):
        comps = tuple(_as_int(c) for c in self.components)
        if len(comps) < 1:
            raise DomainError("IntVector needs at least one component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *components: int) -> "IntVector":
        return cls(tuple(components))

    @property
    def ell1(self) -> int:
        return sum(abs(c) for c in self.components)

    @property
    def n(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components)

    def to_list(self) -> List[int]:
        return list(self.components)

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, index):
        return self.components[index]


def as_int_vector(k: Union[IntVector, Sequence[int]]) -> IntVector:
    return k if isinstance(k, IntVector) else IntVector(tuple(k))


def _as_matrix(m: MatrixLike) -> IntMatrix:
    rows = [[_as_int(x) for x in row] for row in m]
    if not rows or not rows[0]:
        raise DomainError("Empty matrix")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise DomainError("Ragged matrix rows")
    return rows


@dataclass(frozen=True)
class SubmoduleBasis:
    """Row basis of a sub-module of Z^n, as an r x n integer matrix."""

    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = _as_matrix(self.rows)
        if len(rows) > len(rows[0]):
            raise DomainError(
                f"Rank {len(rows)} exceeds ambient dimension {len(rows[0])}"
            )
        object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))

    @classmethod
    def from_rows(cls, rows: MatrixLike) -> "SubmoduleBasis":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def to_lists(self) -> IntMatrix:
        return [list(r) for r in self.rows]


@dataclass(frozen=True)
class UnimodularMatrix:
    """Square integer matrix with determinant +1 or -1."""

    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = _as_matrix(self.entries)
        if len(rows) != len(rows[0]):
            raise DomainError("Unimodular matrix must be square")
        det = exact_determinant(rows)
        if abs(det) != 1:
            raise DomainError(f"Determinant {det} is not +1 or -1")
        object.__setattr__(self, "entries", tuple(tuple(r) for r in rows))

    @classmethod
    def from_rows(cls, rows: MatrixLike) -> "UnimodularMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def det(self) -> int:
        return exact_determinant(self.entries)

    def to_lists(self) -> IntMatrix:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class SmithDecomposition:
    """L = B . Delta . A with B, A unimodular and d_1 | d_2 | ... | d_r."""

    b: UnimodularMatrix
    diag: Tuple[int, ...]
    a: UnimodularMatrix

    @property
    def delta(self) -> IntMatrix:
        """The r x n diagonal factor."""
        r, n = len(self.diag), self.a.n
        return [[self.diag[i] if i == j else 0 for j in range(n)] for i in range(r)]

    def reconstruct(self) -> IntMatrix:
        return matmul_int(matmul_int(self.b.entries, self.delta), self.a.entries)

    def divisibility_chain_holds(self) -> bool:
        for prev, nxt in zip(self.diag, self.diag[1:]):
            if prev == 0:
                if nxt != 0:
                    return False
            elif nxt % prev != 0:
                return False
        return True


@dataclass(frozen=True)
class Rational:
    """Reduced fraction p/q with q >= 1."""

    p: int
    q: int

    def __post_init__(self):
        p, q = _as_int(self.p), _as_int(self.q)
        if q < 1:
            raise DomainError(f"Denominator must be positive, got {q}")
        if math.gcd(abs(p), q) != 1:
            raise DomainError(f"{p}/{q} is not reduced")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Rational":
        return cls(value.numerator, value.denominator)

    @property
    def height(self) -> int:
        """|p| + q"""
        return abs(self.p) + self.q

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------

def matmul_int(a: MatrixLike, b: MatrixLike) -> IntMatrix:
    """Exact product of two integer matrices."""
    if len(a[0]) != len(b):
        raise DomainError("Incompatible shapes for matrix product")
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def identity_int(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matrix_l1_norm(m: MatrixLike) -> int:
    """Largest row l1-norm, the |A| of the Smith factorization bounds."""
    return max(sum(abs(x) for x in row) for row in m)


def exact_determinant(m: MatrixLike) -> int:
    """Fraction-free (Bareiss) determinant of a square integer matrix."""
    a = [[_as_int(x) for x in row] for row in m]
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise DomainError("Determinant of a non-square matrix")

    sign = 1
    prev = 1
    for i in range(n - 1):
        if a[i][i] == 0:
            swap = next((r for r in range(i + 1, n) if a[r][i] != 0), None)
            if swap is None:
                return 0
            a[i], a[swap] = a[swap], a[i]
            sign = -sign
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) // prev
        prev = a[i][i]
    return sign * a[n - 1][n - 1]


def is_unimodular(m: MatrixLike) -> bool:
    rows = _as_matrix(m)
    return len(rows) == len(rows[0]) and abs(exact_determinant(rows)) == 1


# ---------------------------------------------------------------------------
# Bezout and primitivity
# ---------------------------------------------------------------------------

def _ext_euclid(x: int, y: int) -> Tuple[int, int, int]:
    """Return (d, u, v) with u*x + v*y = d = gcd(|x|, |y|) > 0."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def ext_gcd_bounded(x: int, y: int) -> Tuple[int, int, int]:
    """
    Bezout coefficients of least |u|.

    Returns (d, u, v) with u*x + v*y = d = gcd(|x|, |y|). When x and y are
    both non-zero, |u| <= |y|/d and |v| <= |x|/d. For y = 0 the result is
    (|x|, sign(x), 0); for x = 0 it is (|y|, 0, sign(y)).

    Raises:
        DomainError: if x = y = 0
    """
    x, y = _as_int(x), _as_int(y)
    if x == 0 and y == 0:
        raise DomainError("ext_gcd_bounded(0, 0) is undefined")
    if y == 0:
        return abs(x), (1 if x > 0 else -1), 0

    d, u0, _ = _ext_euclid(x, y)
    period = abs(y) // d
    # solutions are u = u0 - t*(y/d); take the representative nearest zero
    r = u0 % period
    u = r - period if period - r < r else r
    v = (d - u * x) // y
    return d, u, v


def gcd_of(components: Sequence[int]) -> int:
    return reduce(math.gcd, (abs(_as_int(c)) for c in components), 0)


def is_primitive(k: Union[IntVector, Sequence[int]]) -> bool:
    """
    True iff the components of k are coprime.

    Raises:
        DomainError: for the zero vector
    """
    k = as_int_vector(k)
    if k.is_zero():
        raise DomainError("The zero vector has no primitivity")
    return gcd_of(k.components) == 1


def _require_primitive(k: IntVector):
    if k.is_zero():
        raise DomainError("Resonance vector must be non-zero")
    g = gcd_of(k.components)
    if g != 1:
        raise DomainError(
            f"Vector {k.to_list()} is not primitive (invariant factor {g})"
        )


# ---------------------------------------------------------------------------
# Unimodular completion
# ---------------------------------------------------------------------------

def _complete(k: List[int]) -> IntMatrix:
    n = len(k)
    if n == 1:
        return [[k[0]]]

    head, last = k[:-1], k[-1]

    if all(c == 0 for c in head):
        # k = (0, ..., 0, +-1): move the last column to the front, complete,
        # and move it back
        sub = _complete([last] + head)
        return [row[1:] + row[:1] for row in sub]

    d = gcd_of(head)
    sub = _complete([c // d for c in head])
    _, u, v_bezout = ext_gcd_bounded(d, last)
    sign = -1 if (n - 1) % 2 else 1
    middle = [row + [0] for row in sub[1:]]

    # u*d + v*k_n = 1 leaves det = +-(u*d - v*k_n); the companion pair with
    # v flipped always gives +-1
    for v in (v_bezout, -v_bezout):
        last_row = [sign * v * (c // d) for c in head] + [sign * u]
        rows = [list(k)] + middle + [last_row]
        if abs(exact_determinant(rows)) == 1:
            return rows

    raise NekholabError(f"Completion of {k} failed the determinant check")


def unimodular_completion(k: Union[IntVector, Sequence[int]]) -> UnimodularMatrix:
    """
    Complete a primitive k into A in GL(n, Z) with first row k.

    Every row of A has l1-norm at most |k|, so the max-row-l1 norm of the
    integer inverse is at most n! |k|^(n-1).

    Raises:
        DomainError: if k is zero or not primitive
    """
    k = as_int_vector(k)
    _require_primitive(k)
    rows = _complete(k.to_list())
    return UnimodularMatrix.from_rows(rows)


def inverse_unimodular(a: Union[UnimodularMatrix, MatrixLike]) -> UnimodularMatrix:
    """
    Exact inverse of a unimodular matrix through its adjugate.

    Raises:
        DomainError: if |det a| != 1
    """
    rows = _as_matrix(a.entries if isinstance(a, UnimodularMatrix) else a)
    n = len(rows)
    if n != len(rows[0]):
        raise DomainError("Inverse of a non-square matrix")
    det = exact_determinant(rows)
    if abs(det) != 1:
        raise DomainError(f"Determinant {det} is not +1 or -1")

    if n == 1:
        return UnimodularMatrix.from_rows([[det]])

    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(rows) if r != i]
            cofactor = (-1) ** (i + j) * exact_determinant(minor)
            # adj[j][i] = cofactor(i, j); dividing by det = +-1 is multiplying
            inv[j][i] = cofactor * det
    return UnimodularMatrix.from_rows(inv)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

class _SmithReducer:
    """Elementary reduction keeping L = B . D . A at every step."""

    def __init__(self, rows: IntMatrix):
        self.r = len(rows)
        self.n = len(rows[0])
        self.d = [list(row) for row in rows]
        self.b = identity_int(self.r)
        self.a = identity_int(self.n)

    def swap_rows(self, i: int, j: int):
        if i == j:
            return
        self.d[i], self.d[j] = self.d[j], self.d[i]
        for row in self.b:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i: int, j: int):
        if i == j:
            return
        for row in self.d:
            row[i], row[j] = row[j], row[i]
        self.a[i], self.a[j] = self.a[j], self.a[i]

    def add_row(self, target: int, source: int, c: int):
        """row_target += c * row_source"""
        self.d[target] = [x + c * y for x, y in zip(self.d[target], self.d[source])]
        for row in self.b:
            row[source] -= c * row[target]

    def add_col(self, target: int, source: int, c: int):
        """col_target += c * col_source"""
        for row in self.d:
            row[target] += c * row[source]
        self.a[source] = [x - c * y for x, y in zip(self.a[source], self.a[target])]

    def negate_row(self, i: int):
        self.d[i] = [-x for x in self.d[i]]
        for row in self.b:
            row[i] = -row[i]

    def _min_pivot(self, s: int) -> Optional[Tuple[int, int]]:
        best = None
        for i in range(s, self.r):
            for j in range(s, self.n):
                x = abs(self.d[i][j])
                if x and (best is None or x < best[0]):
                    best = (x, i, j)
        return None if best is None else (best[1], best[2])

    def reduce(self) -> Tuple[IntMatrix, List[int], IntMatrix]:
        for s in range(self.r):
            while True:
                pivot = self._min_pivot(s)
                if pivot is None:
                    raise DomainError(
                        f"Rank-deficient basis: rank {s} < {self.r} rows"
                    )
                self.swap_rows(s, pivot[0])
                self.swap_cols(s, pivot[1])
                p = self.d[s][s]

                clean = True
                for i in range(s + 1, self.r):
                    q = self.d[i][s] // p
                    if q:
                        self.add_row(i, s, -q)
                    if self.d[i][s]:
                        clean = False
                for j in range(s + 1, self.n):
                    q = self.d[s][j] // p
                    if q:
                        self.add_col(j, s, -q)
                    if self.d[s][j]:
                        clean = False
                if not clean:
                    continue

                offender = next(
                    (i for i in range(s + 1, self.r)
                     for j in range(s + 1, self.n) if self.d[i][j] % p),
                    None,
                )
                if offender is None:
                    break
                self.add_row(s, offender, 1)

            if self.d[s][s] < 0:
                self.negate_row(s)

        diag = [self.d[i][i] for i in range(self.r)]
        return self.b, diag, self.a


def smith_normal_form(l: Union[SubmoduleBasis, MatrixLike]) -> SmithDecomposition:
    """
    Smith factorization L = B . Delta . A of a full-row-rank basis matrix.

    Raises:
        DomainError: if the rows are linearly dependent
    """
    basis = l if isinstance(l, SubmoduleBasis) else SubmoduleBasis.from_rows(l)
    b, diag, a = _SmithReducer(basis.to_lists()).reduce()
    return SmithDecomposition(
        b=UnimodularMatrix.from_rows(b),
        diag=tuple(diag),
        a=UnimodularMatrix.from_rows(a),
    )


# ---------------------------------------------------------------------------
# Volumes and constant bounds
# ---------------------------------------------------------------------------

def module_volume(basis: Union[SubmoduleBasis, MatrixLike]) -> float:
    """
    Volume sqrt(det(M M^T)) of the module spanned by the rows of M.

    Raises:
        DomainError: if the rows are linearly dependent
    """
    basis = basis if isinstance(basis, SubmoduleBasis) else SubmoduleBasis.from_rows(basis)
    rows = basis.to_lists()
    gram = matmul_int(rows, [list(c) for c in zip(*rows)])
    det = exact_determinant(gram)
    if det <= 0:
        raise DomainError("Rank-deficient basis has zero volume")
    return math.sqrt(det)


def lochak_bounds(k: Union[IntVector, Sequence[int]],
                  n: Optional[int] = None) -> Tuple[int, int]:
    """
    Upper bounds (n! K^(n-1), K) on the constants of the rank-one
    factorization generated by k, with K = |k|.

    Raises:
        DomainError: if k is not primitive or n disagrees with len(k)
    """
    k = as_int_vector(k)
    if n is None:
        n = k.n
    if n != k.n:
        raise DomainError(f"Dimension {n} does not match vector length {k.n}")
    _require_primitive(k)
    big_k = k.ell1
    return math.factorial(n) * big_k ** (n - 1), big_k


# ---------------------------------------------------------------------------
# Rational points of short intervals
# ---------------------------------------------------------------------------

def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def simplest_rational_in(lo: RealLike, hi: RealLike) -> Fraction:
    """
    Rational of least denominator in the closed interval [lo, hi].

    It also has the least |numerator| of all rationals in the interval, so it
    minimizes |p| + q. Computed by the continued-fraction (Stern-Brocot)
    descent.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise DomainError(f"Empty interval [{lo}, {hi}]")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational_in(-hi, -lo)

    fl = _floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_rational_in(1 / (hi - fl), 1 / (lo - fl))


def dirichlet_bound(length: RealLike) -> float:
    """4 sqrt(2) l^(-1/2)"""
    return 4.0 * math.sqrt(2.0) / math.sqrt(float(length))


def dirichlet_candidate(center: RealLike, length: RealLike) -> Tuple[Rational, bool]:
    """
    The rational dirichlet_rational returns, with a flag set when the direct
    construction missed and the simplest rational was used. Nothing is logged.

    Raises:
        DomainError: if l <= 0 or the interval leaves [-1, 1]
    """
    c, l = Fraction(center), Fraction(length)
    if l <= 0:
        raise DomainError(f"Interval length must be positive, got {float(l)}")
    lo, hi = c - l / 2, c + l / 2
    if lo < -1 or hi > 1:
        raise DomainError(
            f"Interval [{float(lo)}, {float(hi)}] is not contained in [-1, 1]"
        )

    target = 2 / l
    ceil_target = -((-target.numerator) // target.denominator)
    q = math.isqrt(ceil_target - 1) + 1 if ceil_target > 1 else 1
    candidate = Fraction(round(c * q), q)
    if lo <= candidate <= hi:
        return Rational.from_fraction(candidate), False
    return Rational.from_fraction(simplest_rational_in(lo, hi)), True


def dirichlet_rational(center: RealLike, length: RealLike) -> Rational:
    """
    A reduced p/q in [center - l/2, center + l/2] with small |p| + q.

    Takes q the least integer with q >= sqrt(2/l) and p the nearest integer
    to q*center. When that candidate misses the interval the simplest
    rational of the interval is returned instead, with a warning; it has the
    least |p| + q available, so |p| + q < 4 sqrt(2) l^(-1/2) holds whenever
    any rational of the interval satisfies it.

    Raises:
        DomainError: if l <= 0 or the interval leaves [-1, 1]
    """
    r, missed = dirichlet_candidate(center, length)
    if missed:
        get_logger().warning(
            "Dirichlet construction missed the interval, using simplest rational",
            center=float(center), length=float(length), result=str(r),
        )
    return r
