"""Exact linear programming.

The solver is a two-phase primal simplex with Bland's anti-cycling rule.  The
tableau is kept fraction free: every entry is an integer and the true tableau
is the integer matrix divided by a single running denominator (the previous
pivot).  Divisions in the update step are exact because each entry is a minor
of the original integer matrix.

Problems are stated as ``maximize f.x  s.t.  C x <= b, x >= 0`` and every
answer comes with a certificate: an optimal primal/dual pair, a Farkas vector
for infeasibility, or an improving ray for unboundedness.

For very tall constraint matrices :func:`solve` falls back to row generation:
a small exact LP over a working subset of rows is solved, the full row set is
scanned for violations, and violated rows are added until the working optimum
is feasible for everything.  The final dual is the working dual padded with
zeros, so certificates are exact either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .exactnum import fmt_rat, int_rows, int_vector, rat, safe_matmul

__all__ = [
    "LPProblem",
    "DualCertificate",
    "LPError",
    "Infeasible",
    "Unbounded",
    "solve",
    "solve_standard",
    "solve_with_oracle",
    "verify_certificate",
    "convex_combination",
    "build_coupler_lp",
    "dump_problem",
    "load_problem",
    "dump_certificate",
    "load_certificate",
]


# ----------------------------------------------------------------- types


@dataclass
class LPProblem:
    f: list
    C: list
    b: list

    def __post_init__(self):
        self.f = [rat(v) for v in self.f]
        self.b = [rat(v) for v in self.b]
        self.C = [[rat(v) for v in row] for row in self.C]
        n = len(self.f)
        if len(self.C) != len(self.b):
            raise ValueError("C and b disagree on the number of rows")
        for row in self.C:
            if len(row) != n:
                raise ValueError("row length differs from objective length")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.b), len(self.f)


@dataclass
class DualCertificate:
    x: list
    y: list
    value: Fraction
    meta: dict = field(default_factory=dict)


class LPError(Exception):
    pass


class Infeasible(LPError):
    def __init__(self, farkas: list):
        super().__init__("primal infeasible")
        self.farkas = farkas


class Unbounded(LPError):
    def __init__(self, ray: list, point: Optional[list] = None):
        super().__init__("primal unbounded")
        self.ray = ray
        self.point = point


# --------------------------------------------------- fraction-free tableau


class _Tableau:
    """Integer tableau for ``min c.x, A x = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, rows: list[list[int]], rhs: list[int], ncols: int):
        # rows already integer; column index ncols holds the right-hand side
        self.M = [r + [v] for r, v in zip(rows, rhs)]
        self.m = len(rows)
        self.n = ncols
        self.D = 1
        self.basis = [-1] * self.m
        self.obj: list[int] = [0] * (ncols + 1)
        self.blocked: set[int] = set()

    def pivot(self, r: int, c: int) -> None:
        M, D = self.M, self.D
        prow = M[r]
        p = prow[c]
        width = self.n + 1
        nz = [j for j in range(width) if prow[j]]
        for i in range(self.m):
            if i == r:
                continue
            row = M[i]
            a = row[c]
            if a == 0:
                if p != D:
                    for j in range(width):
                        if row[j]:
                            row[j] = row[j] * p // D
                continue
            newrow = [x * p for x in row]
            for j in nz:
                newrow[j] -= a * prow[j]
            if D != 1:
                newrow = [x // D for x in newrow]
            M[i] = newrow
        obj = self.obj
        a = obj[c]
        if a == 0:
            if p != D:
                self.obj = [x * p // D for x in obj]
        else:
            newobj = [x * p for x in obj]
            for j in nz:
                newobj[j] -= a * prow[j]
            if D != 1:
                newobj = [x // D for x in newobj]
            self.obj = newobj
        self.D = p
        self.basis[r] = c
        if p < 0:
            self.D = -p
            self.M = [[-x for x in row] for row in self.M]
            self.obj = [-x for x in self.obj]

    def set_objective(self, cost: Sequence[Fraction]) -> None:
        """Install reduced costs of ``cost`` for the current basis."""
        den = 1
        for v in cost:
            den = math.lcm(den, Fraction(v).denominator)
        ci = [int(Fraction(v) * den) for v in cost] + [0]
        D = self.D
        obj = [D * x for x in ci]
        for i, bj in enumerate(self.basis):
            cb = ci[bj]
            if cb:
                row = self.M[i]
                for j in range(self.n + 1):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self.obj = obj

    def run(self, max_pivots: int = 10 ** 7) -> Optional[int]:
        """Bland's rule.  Returns ``None`` at optimum or an unbounded column."""
        for _ in range(max_pivots):
            obj = self.obj
            enter = -1
            for j in range(self.n):
                if obj[j] < 0 and j not in self.blocked:
                    enter = j
                    break
            if enter < 0:
                return None
            leave = -1
            best_num = best_den = 0
            for i in range(self.m):
                a = self.M[i][enter]
                if a > 0:
                    rhs = self.M[i][self.n]
                    if leave < 0:
                        leave, best_num, best_den = i, rhs, a
                        continue
                    lhs = rhs * best_den
                    rhs_ = best_num * a
                    if lhs < rhs_ or (lhs == rhs_ and self.basis[i] < self.basis[leave]):
                        leave, best_num, best_den = i, rhs, a
            if leave < 0:
                return enter
            self.pivot(leave, enter)
        raise LPError("pivot limit exceeded")

    def value(self, j: int) -> Fraction:
        for i, bj in enumerate(self.basis):
            if bj == j:
                return Fraction(self.M[i][self.n], self.D)
        return Fraction(0)

    def drop_row(self, i: int) -> None:
        del self.M[i]
        del self.basis[i]
        self.m -= 1


def _solve_linear(A: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve a square nonsingular system exactly (Gauss-Jordan)."""
    n = len(A)
    M = [list(map(Fraction, A[i])) + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [a - fac * b for a, b in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


@dataclass
class _StdResult:
    status: str
    x: list
    duals: list
    value: Fraction
    farkas: Optional[list] = None
    ray: Optional[list] = None


def solve_standard(A: Sequence[Sequence], b: Sequence, c: Sequence,
                   phase_one_only: bool = False) -> _StdResult:
    """Minimize ``c.x`` subject to ``A x = b``, ``x >= 0``.

    Returns duals ``pi`` with ``A^T pi <= c`` at optimum, or a Farkas vector
    ``y`` with ``A^T y >= 0``, ``b.y < 0`` when infeasible.
    """
    m = len(A)
    n = len(c)
    A = [[rat(v) for v in row] for row in A]
    b = [rat(v) for v in b]
    c = [rat(v) for v in c]
    flip = [bi < 0 for bi in b]
    # one common scale for every row keeps the phase-one objective uniform
    scale = 1
    for i in range(m):
        for v in A[i]:
            scale = math.lcm(scale, v.denominator)
        scale = math.lcm(scale, b[i].denominator)
    rows = []
    rhs = []
    for i in range(m):
        s = -scale if flip[i] else scale
        rows.append([int(s * v) for v in A[i]])
        rhs.append(int(s * b[i]))
    # one artificial column per row, placed after the structural columns
    ncols = n + m
    full = []
    for i in range(m):
        art = [0] * m
        art[i] = 1
        full.append(rows[i] + art)
    tab = _Tableau(full, rhs, ncols)
    for i in range(m):
        tab.pivot(i, n + i)
    tab.set_objective([Fraction(0)] * n + [Fraction(1)] * m)
    tab.run()
    phase1 = Fraction(-tab.obj[ncols], tab.D)
    if phase1 != 0:
        # Farkas vector from phase-one duals, expressed for the original rows
        w = _duals(tab, A, b, flip, [Fraction(0)] * n + [Fraction(1)] * m, n)
        y = [-v for v in w]
        return _StdResult("infeasible", [], [], phase1, farkas=y)
    # drive artificials out of the basis
    i = 0
    while i < tab.m:
        if tab.basis[i] >= n:
            row = tab.M[i]
            j = next((j for j in range(n) if row[j] != 0), -1)
            if j < 0:
                tab.drop_row(i)
                continue
            tab.pivot(i, j)
        i += 1
    tab.blocked = set(range(n, ncols))
    if phase_one_only:
        x = [tab.value(j) for j in range(n)]
        return _StdResult("optimal", x, [], Fraction(0))
    tab.set_objective(c + [Fraction(0)] * m)
    col = tab.run()
    x = [tab.value(j) for j in range(n)]
    if col is not None:
        ray = [Fraction(0)] * n
        ray[col] = Fraction(1)
        for i, bj in enumerate(tab.basis):
            if bj < n:
                ray[bj] = Fraction(-tab.M[i][col], tab.D)
        return _StdResult("unbounded", x, [], Fraction(0), ray=ray)
    pi = _duals(tab, A, b, flip, c + [Fraction(0)] * m, n)
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return _StdResult("optimal", x, pi, value)


def _duals(tab: _Tableau, A, b, flip, cost, n) -> list[Fraction]:
    """Solve ``B^T pi = c_B`` for the current basis, in original row signs."""
    m_all = len(A)
    basis = tab.basis
    # build B from the original (flipped) columns
    def column(j):
        if j < n:
            return [(-A[i][j] if flip[i] else A[i][j]) for i in range(m_all)]
        col = [Fraction(0)] * m_all
        col[j - n] = Fraction(1)
        return col
    cols = [column(j) for j in basis]
    if len(cols) < m_all:
        # redundant rows were dropped: pick rows making B square and regular
        keep = _independent_rows(cols, m_all)
    else:
        keep = list(range(m_all))
    Bt = [[cols[k][i] for i in keep] for k in range(len(cols))]
    cb = [cost[j] for j in basis]
    sol = _solve_linear(Bt, cb) if Bt else []
    pi = [Fraction(0)] * m_all
    for idx, i in enumerate(keep):
        pi[i] = -sol[idx] if flip[i] else sol[idx]
    return pi


def _independent_rows(cols: list[list[Fraction]], m: int) -> list[int]:
    """Indices of ``len(cols)`` rows on which the given columns are regular."""
    k = len(cols)
    mat = [[cols[c][i] for c in range(k)] for i in range(m)]
    chosen: list[int] = []
    basis_rows: list[list[Fraction]] = []
    for i in range(m):
        v = list(mat[i])
        for br, pc in basis_rows:
            if v[pc] != 0:
                fac = v[pc] / br[pc]
                v = [a - fac * bb for a, bb in zip(v, br)]
        pc = next((j for j in range(k) if v[j] != 0), -1)
        if pc >= 0:
            basis_rows.append((v, pc))
            chosen.append(i)
            if len(chosen) == k:
                break
    return chosen


# ---------------------------------------------------------- public solve


def _solve_dense(p: LPProblem) -> DualCertificate:
    m, n = p.shape
    A = [list(row) + [Fraction(1) if k == i else Fraction(0) for k in range(m)]
         for i, row in enumerate(p.C)]
    c = [-v for v in p.f] + [Fraction(0)] * m
    res = solve_standard(A, p.b, c)
    if res.status == "infeasible":
        raise Infeasible(res.farkas)
    if res.status == "unbounded":
        raise Unbounded(res.ray[:n], res.x[:n])
    x = res.x[:n]
    y = [-v for v in res.duals]
    value = sum((fi * xi for fi, xi in zip(p.f, x)), Fraction(0))
    return DualCertificate(x, y, value, {"method": "dense"})


def solve(p: LPProblem, strategy: str = "auto", seed_rows: Iterable[int] = ()) -> DualCertificate:
    """Exact optimum of ``max f.x, C x <= b, x >= 0`` with a dual certificate."""
    m, n = p.shape
    if strategy == "dense" or (strategy == "auto" and m <= max(60, 2 * n)):
        return _solve_dense(p)
    Cint, dens = int_rows(p.C) if m else (np.zeros((0, n), dtype=np.int64), [])
    bnum = [p.b[i] * dens[i] for i in range(m)]

    def oracle(x: list[Fraction]) -> list[int]:
        xi, xden = int_vector(x)
        lhs = safe_matmul(Cint, np.array(xi, dtype=object if Cint.dtype == object else np.int64))
        bad = []
        for i in range(m):
            if Fraction(int(lhs[i]), xden) > bnum[i]:
                bad.append(i)
        return bad

    def row(i: int):
        return p.C[i], p.b[i]

    needed = [i for i in range(m) if p.b[i] < 0]
    return solve_with_oracle(p.f, row, oracle, m, list(seed_rows) + needed)


def solve_with_oracle(f: Sequence, row: Callable[[int], tuple], oracle: Callable[[list], list],
                      m: int, seed: Sequence[int] = (), batch: int = 8,
                      max_rounds: int = 10_000) -> DualCertificate:
    """Row generation over an implicitly given ``C x <= b``.

    ``row(i)`` returns ``(C_i, b_i)``; ``oracle(x)`` returns the indices of
    rows violated by ``x`` (most violated first is helpful but not required).
    """
    f = [rat(v) for v in f]
    n = len(f)
    active: list[int] = []
    seen: set[int] = set()
    for i in seed:
        if i not in seen:
            seen.add(i)
            active.append(i)
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise LPError("row generation did not converge")
        rows = [row(i) for i in active]
        sub = LPProblem(f, [r[0] for r in rows], [r[1] for r in rows])
        try:
            cert = _solve_dense(sub)
        except Unbounded as exc:
            # unbounded working problem: add rows cutting the ray, if any
            far = [Fraction(1000) * v for v in exc.ray]
            probe = [a + b for a, b in zip(exc.point or [Fraction(0)] * n, far)]
            new = [i for i in oracle(probe) if i not in seen]
            if not new:
                raise
            for i in new[:batch]:
                seen.add(i)
                active.append(i)
            continue
        except Infeasible as exc:
            y = [Fraction(0)] * m
            for k, i in enumerate(active):
                y[i] = exc.farkas[k]
            raise Infeasible(y)
        bad = [i for i in oracle(cert.x) if i not in seen]
        if not bad:
            y = [Fraction(0)] * m
            for k, i in enumerate(active):
                y[i] = cert.y[k]
            return DualCertificate(cert.x, y, cert.value,
                                   {"method": "rows", "rounds": rounds, "active": list(active)})
        for i in bad[:batch]:
            seen.add(i)
            active.append(i)


def verify_certificate(p: LPProblem, x: Sequence, y: Sequence) -> bool:
    m, n = p.shape
    if len(x) != n or len(y) != m:
        raise ValueError("certificate dimensions do not match the problem")
    x = [rat(v) for v in x]
    y = [rat(v) for v in y]
    if any(v < 0 for v in x) or any(v < 0 for v in y):
        return False
    for i in range(m):
        if sum((a * v for a, v in zip(p.C[i], x)), Fraction(0)) > p.b[i]:
            return False
    for j in range(n):
        col = sum((p.C[i][j] * y[i] for i in range(m) if y[i]), Fraction(0))
        if col < p.f[j]:
            return False
    primal = sum((a * v for a, v in zip(p.f, x)), Fraction(0))
    dual = sum((a * v for a, v in zip(p.b, y)), Fraction(0))
    return primal == dual


def convex_combination(points: Sequence[Sequence], target: Sequence):
    """Weights ``w >= 0``, ``sum w = 1`` with ``sum w_i p_i = target``.

    Returns ``("inside", weights)`` or ``("outside", (functional, threshold))``
    where ``functional . p <= threshold`` for every point and
    ``functional . target > threshold``.
    """
    target = [rat(v) for v in target]
    d = len(target)
    k = len(points)
    if k == 0:
        return "outside", ([Fraction(0)] * d, Fraction(-1))
    A = [[rat(points[j][i]) for j in range(k)] for i in range(d)]
    A.append([Fraction(1)] * k)
    b = list(target) + [Fraction(1)]
    res = solve_standard(A, b, [Fraction(0)] * k, phase_one_only=True)
    if res.status == "optimal":
        return "inside", res.x
    y = res.farkas
    # A^T y >= 0 and b.y < 0  ->  -y[:d].p <= y[d] and -y[:d].target > y[d]
    func = [-v for v in y[:d]]
    return "outside", (func, y[d])


# ------------------------------------------------------------ coupler LP


def build_coupler_lp(model, k: int, l: int, i: int, effects=None) -> LPProblem:
    """Dense LP for the pair of nonlocal boxes ``(k, l)`` and game ``i``.

    ``k`` and ``l`` are 1-based positions in ``model.boxes``; the effect list
    defaults to the extremal effects of the model.
    """
    from .coupling import CouplerLP

    clp = CouplerLP(model, effects)
    return clp.problem(k, l, i)


# ------------------------------------------------------------------ text io


def _fmt_row(row) -> str:
    return " ".join(fmt_rat(v) for v in row)


def dump_problem(p: LPProblem) -> str:
    m, n = p.shape
    lines = [f"lp {m} {n}", "max " + _fmt_row(p.f)]
    for row, bi in zip(p.C, p.b):
        lines.append(f"{_fmt_row(row)} <= {fmt_rat(bi)}")
    return "\n".join(lines) + "\n"


def load_problem(text: str) -> LPProblem:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "lp":
        raise ValueError("missing lp header")
    m, n = int(head[1]), int(head[2])
    f = [rat(v) for v in lines[1].split()[1:]]
    C, b = [], []
    for ln in lines[2:2 + m]:
        lhs, rhs = ln.split("<=")
        C.append([rat(v) for v in lhs.split()])
        b.append(rat(rhs))
    p = LPProblem(f, C, b)
    if p.shape != (m, n):
        raise ValueError("header shape does not match body")
    return p


def dump_certificate(c: DualCertificate) -> str:
    return (f"cert {len(c.x)} {len(c.y)}\nvalue {fmt_rat(c.value)}\n"
            f"x {_fmt_row(c.x)}\ny {_fmt_row(c.y)}\n")


def load_certificate(text: str) -> DualCertificate:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    nx, ny = int(head[1]), int(head[2])
    value = rat(lines[1].split()[1])
    x = [rat(v) for v in lines[2].split()[1:]]
    y = [rat(v) for v in lines[3].split()[1:]]
    if len(x) != nx or len(y) != ny:
        raise ValueError("header shape does not match body")
    return DualCertificate(x, y, value)
