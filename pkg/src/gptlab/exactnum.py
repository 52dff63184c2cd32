"""Exact scalars and small tensor algebra.

Rationals are stdlib ``Fraction`` values.  Real quadratic surds ``a + b*sqrt(d)``
with rational ``a, b`` are provided by :class:`QuadSurd`; :class:`Surd2` is the
``d = 2`` case.  Flat tensors carry rational entries together with per-axis
extents and support outer products, inner products and matrix-style
contraction.

Hot loops elsewhere in the package work on integer matrices obtained with
:func:`int_rows`; the helpers for that live here too so that every module
scales rationals the same way.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence

import numpy as np

Rational = Fraction

__all__ = [
    "Rational",
    "rat",
    "fmt_rat",
    "QuadSurd",
    "Surd2",
    "surd_cmp",
    "FlatTensor",
    "tensor",
    "dot",
    "int_rows",
    "int_vector",
    "safe_matmul",
    "primitive",
    "rref",
    "rank",
    "nullspace",
    "independent_subset",
    "solve_square",
]

_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def rat(value) -> Fraction:
    """Coerce ``value`` to a Fraction.  Strings use the ``p/q`` form."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RAT_RE.match(value)
        if not m:
            raise ValueError(f"malformed rational: {value!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator: {value!r}")
        return Fraction(num, den)
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact input")
    return Fraction(value)


def fmt_rat(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


@dataclass(frozen=True)
class QuadSurd:
    """The real number ``a + b*sqrt(d)`` for a square-free integer ``d > 1``."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "a", rat(self.a))
        object.__setattr__(self, "b", rat(self.b))
        if self.d < 2 or math.isqrt(self.d) ** 2 == self.d:
            raise ValueError("radicand must be a positive non-square integer")

    def _lift(self, other) -> "QuadSurd":
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise ValueError("radicand mismatch")
            return other
        return QuadSurd(rat(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._lift(other)
        return QuadSurd(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return QuadSurd.__add__(-self, other)

    def __mul__(self, other):
        o = self._lift(other)
        return QuadSurd(self.a * o.a + self.d * self.b * o.b,
                        self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadSurd":
        return QuadSurd(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def __truediv__(self, other):
        o = self._lift(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        num = self * o.conjugate()
        return QuadSurd(num.a / n, num.b / n, self.d)

    def __rtruediv__(self, other):
        return QuadSurd.__truediv__(self._lift(other), self)

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with d*b^2
        diff = self.a * self.a - self.d * self.b * self.b
        return sa * _sign(diff)

    def _cmp(self, other) -> int:
        return (self - self._lift(other)).sign()

    def __eq__(self, other):
        if isinstance(other, (QuadSurd, int, Fraction)):
            try:
                return self._cmp(other) == 0
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def to_text(self) -> str:
        return f"{fmt_rat(self.a)} + {fmt_rat(self.b)}*sqrt({self.d})"

    __str__ = to_text

    @classmethod
    def parse(cls, text: str) -> "QuadSurd":
        m = re.match(r"^\s*(\S+)\s*\+\s*(\S+)\*sqrt\((\d+)\)\s*$", text)
        if not m:
            raise ValueError(f"malformed surd: {text!r}")
        return cls(rat(m.group(1)), rat(m.group(2)), int(m.group(3)))

    def approx(self, digits: int = 60):
        """Decimal approximation, for display and cross-checks only."""
        from decimal import Decimal, localcontext

        with localcontext() as ctx:
            ctx.prec = digits + 10
            root = Decimal(self.d).sqrt()
            a = Decimal(self.a.numerator) / Decimal(self.a.denominator)
            b = Decimal(self.b.numerator) / Decimal(self.b.denominator)
            return +(a + b * root)


class Surd2(QuadSurd):
    """``a + b*sqrt(2)``."""

    def __init__(self, a, b=0):
        super().__init__(rat(a), rat(b), 2)

    def _wrap(self, q: QuadSurd) -> "Surd2":
        return Surd2(q.a, q.b)

    def __add__(self, other):
        return self._wrap(QuadSurd.__add__(self, other))

    __radd__ = __add__

    def __neg__(self):
        return Surd2(-self.a, -self.b)

    def __sub__(self, other):
        return self._wrap(QuadSurd.__sub__(self, other))

    def __rsub__(self, other):
        return self._wrap(QuadSurd.__rsub__(self, other))

    def __mul__(self, other):
        return self._wrap(QuadSurd.__mul__(self, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(QuadSurd.__truediv__(self, other))

    def __rtruediv__(self, other):
        return self._wrap(QuadSurd.__rtruediv__(self, other))

    def __repr__(self):
        return f"Surd2({fmt_rat(self.a)}, {fmt_rat(self.b)})"

    @classmethod
    def parse(cls, text: str) -> "Surd2":
        q = QuadSurd.parse(text)
        if q.d != 2:
            raise ValueError("not a sqrt(2) surd")
        return cls(q.a, q.b)


def surd_cmp(x, y) -> int:
    """Exact three-way comparison of surds (or rationals) sharing a radicand."""
    if not isinstance(x, QuadSurd):
        if not isinstance(y, QuadSurd):
            return _sign(rat(x) - rat(y))
        x = QuadSurd(rat(x), 0, y.d)
    return x._cmp(y)


# ---------------------------------------------------------------- tensors


@dataclass(frozen=True)
class FlatTensor:
    entries: tuple
    shape: tuple

    def __post_init__(self):
        ents = tuple(rat(e) for e in self.entries)
        shape = tuple(int(s) for s in self.shape)
        if math.prod(shape) != len(ents):
            raise ValueError(f"{len(ents)} entries do not fit shape {shape}")
        object.__setattr__(self, "entries", ents)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def scalar(cls, value=1) -> "FlatTensor":
        return cls((rat(value),), ())

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def scale(self, c) -> "FlatTensor":
        c = rat(c)
        return FlatTensor(tuple(c * e for e in self.entries), self.shape)

    def __add__(self, other: "FlatTensor") -> "FlatTensor":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return FlatTensor(tuple(a + b for a, b in zip(self.entries, other.entries)), self.shape)

    def __sub__(self, other: "FlatTensor") -> "FlatTensor":
        return self + other.scale(-1)

    def matrix(self) -> list:
        """Rows/columns split after the first axis (for bipartite tables)."""
        if len(self.shape) < 1:
            raise ValueError("scalar has no matrix form")
        rows = self.shape[0]
        cols = len(self.entries) // rows
        return [list(self.entries[r * cols:(r + 1) * cols]) for r in range(rows)]


def tensor(u: FlatTensor, v: FlatTensor) -> FlatTensor:
    ents = tuple(a * b for a in u.entries for b in v.entries)
    return FlatTensor(ents, u.shape + v.shape)


def dot(u, v) -> Fraction:
    ue = u.entries if isinstance(u, FlatTensor) else tuple(u)
    ve = v.entries if isinstance(v, FlatTensor) else tuple(v)
    if isinstance(u, FlatTensor) and isinstance(v, FlatTensor) and u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    if len(ue) != len(ve):
        raise ValueError("length mismatch")
    return sum((a * b for a, b in zip(ue, ve)), Fraction(0))


# ------------------------------------------------------- integer scaling

_INT64_SAFE = 2 ** 62


def _lcm(values: Iterable[int]) -> int:
    return reduce(math.lcm, values, 1)


def int_vector(vec: Sequence) -> tuple[list[int], int]:
    """Return integers ``z`` and ``den > 0`` with ``vec == z / den``."""
    fr = [rat(v) for v in vec]
    den = _lcm(f.denominator for f in fr)
    return [f.numerator * (den // f.denominator) for f in fr], den


def int_rows(rows: Sequence[Sequence], common: bool = False):
    """Scale rational rows to integers.

    Returns ``(matrix, dens)``: ``matrix[i] == rows[i] * dens[i]``.  With
    ``common`` all rows share a single denominator.  The array is int64 when
    every entry fits comfortably, otherwise object-dtype Python ints.
    """
    scaled = []
    dens = []
    for r in rows:
        z, d = int_vector(r)
        scaled.append(z)
        dens.append(d)
    if common and dens:
        big = _lcm(dens)
        scaled = [[x * (big // d) for x in z] for z, d in zip(scaled, dens)]
        dens = [big] * len(dens)
    width = len(rows[0]) if rows else 0
    peak = max((abs(x) for z in scaled for x in z), default=0)
    dtype = np.int64 if peak < 2 ** 31 else object
    arr = np.array(scaled, dtype=dtype).reshape(len(scaled), width)
    return arr, dens


def safe_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer product, falling back to Python ints on possible overflow."""
    inner = a.shape[-1]
    if a.dtype != object and b.dtype != object and a.size and b.size:
        bound = int(np.abs(a).max()) * int(np.abs(b).max()) * max(inner, 1)
        if bound < _INT64_SAFE:
            return a @ b
    return a.astype(object) @ b.astype(object)


def primitive(vec: Sequence[int]) -> tuple:
    """Divide an integer vector by the gcd of its entries."""
    g = 0
    for x in vec:
        g = math.gcd(g, int(x))
        if g == 1:
            break
    if g <= 1:
        return tuple(int(x) for x in vec)
    return tuple(int(x) // g for x in vec)


# ------------------------------------------------------ linear algebra


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns, exactly."""
    M = [[rat(v) for v in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        if pv != 1:
            M[r] = [v / pv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                fac = M[i][c]
                M[i] = [a - fac * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None) -> list[list[Fraction]]:
    """Basis of ``{x : rows . x = 0}``."""
    if not rows:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, piv = rref(rows)
    n = len(rows[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(piv):
            v[pc] = -R[r][fc]
        basis.append(v)
    return basis


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal independent subset, chosen greedily in order."""
    chosen: list[int] = []
    reduced: list[tuple[list[Fraction], int]] = []
    for idx, vec in enumerate(vectors):
        v = [rat(x) for x in vec]
        for br, pc in reduced:
            if v[pc] != 0:
                fac = v[pc] / br[pc]
                v = [a - fac * b for a, b in zip(v, br)]
        pc = next((j for j, x in enumerate(v) if x != 0), -1)
        if pc >= 0:
            reduced.append((v, pc))
            chosen.append(idx)
    return chosen


def solve_square(A: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    n = len(A)
    R, piv = rref([list(A[i]) + [rhs[i]] for i in range(n)])
    if piv[:n] != list(range(n)):
        raise ValueError("singular system")
    return [R[i][n] for i in range(n)]
