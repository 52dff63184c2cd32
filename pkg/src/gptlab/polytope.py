"""Exact polyhedral computation.

Conversions between vertex and inequality descriptions use the double
description method on integer data.  Rays are stored as primitive integer
vectors together with a bitmask of the constraints they satisfy with
equality; two rays are combined only when they are adjacent, decided by the
combinatorial test (no third ray is tight on all their common constraints).

Extremality and membership are exact LP feasibility questions answered by
:func:`gptlab.lp.convex_combination`, which also yields separating
functionals when the answer is negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exactnum import (fmt_rat, independent_subset, int_vector, nullspace, primitive, rank,
                       rat, rref)
from .lp import convex_combination

__all__ = [
    "VRep",
    "HRep",
    "Witness",
    "Extremality",
    "Membership",
    "PolytopeError",
    "extreme_rays",
    "enumerate_vertices",
    "enumerate_facets",
    "is_extreme",
    "membership",
    "cut_vrep",
    "canonical_coords",
    "affine_hull",
    "satisfies",
    "dump_vrep",
    "load_vrep",
    "dump_hrep",
    "load_hrep",
]


class PolytopeError(Exception):
    pass


def _vec(v) -> tuple:
    return tuple(rat(x) for x in v)


@dataclass
class VRep:
    points: list
    lineality: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        pts = []
        for p in self.points:
            t = _vec(p)
            if t not in seen:
                seen.add(t)
                pts.append(t)
        self.points = pts
        self.lineality = [_vec(v) for v in self.lineality]
        dims = {len(p) for p in self.points} | {len(v) for v in self.lineality}
        if len(dims) > 1:
            raise ValueError("vectors of different lengths")

    @property
    def dim(self) -> int:
        if self.points:
            return len(self.points[0])
        return len(self.lineality[0]) if self.lineality else 0

    def __len__(self):
        return len(self.points)


@dataclass
class HRep:
    inequalities: list
    equalities: list = field(default_factory=list)

    def __post_init__(self):
        ineqs = []
        for item in self.inequalities:
            if len(item) == 2:
                a, b = item
                sense = "<="
            else:
                a, b, sense = item
            if sense not in ("<=", ">="):
                raise ValueError(f"bad sense {sense!r}")
            a = _vec(a)
            if all(x == 0 for x in a):
                raise ValueError("zero normal vector")
            ineqs.append((a, rat(b), sense))
        self.inequalities = ineqs
        self.equalities = [(_vec(a), rat(b)) for a, b in self.equalities]

    def le_form(self) -> list:
        """Inequalities as ``(a, b)`` meaning ``a.x <= b``."""
        out = []
        for a, b, s in self.inequalities:
            if s == "<=":
                out.append((a, b))
            else:
                out.append((tuple(-x for x in a), -b))
        return out

    @property
    def dim(self) -> int:
        for a, *_ in self.inequalities:
            return len(a)
        for a, _ in self.equalities:
            return len(a)
        return 0


@dataclass
class Witness:
    functional: tuple
    threshold: Fraction
    violated_value: Fraction


@dataclass
class Extremality:
    extreme: bool
    witness: Optional[Witness] = None
    weights: Optional[list] = None

    def __bool__(self):
        return self.extreme


@dataclass
class Membership:
    inside: bool
    weights: Optional[list] = None
    witness: Optional[Witness] = None

    def __bool__(self):
        return self.inside


# ------------------------------------------------------ double description


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _extreme_rays_plain(rows: Sequence[Sequence[int]], dim: int) -> list[tuple]:
    """Extreme rays of the pointed cone ``{y : rows . y >= 0}`` (pure Python).

    ``rows`` must be integer vectors of length ``dim`` with rank ``dim``.
    Returns primitive integer rays in lexicographic order.
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    if not rows:
        raise PolytopeError("cone has no constraints")
    order = sorted(range(len(rows)), key=lambda i: rows[i])
    init = independent_subset([rows[i] for i in order])
    if len(init) < dim:
        raise PolytopeError("cone is not pointed (lineality present)")
    init_idx = [order[i] for i in init]
    # initial simplicial cone: columns of the inverse of the chosen rows
    A0 = [list(rows[i]) for i in init_idx]
    inv_cols = []
    for j in range(dim):
        e = [Fraction(int(k == j)) for k in range(dim)]
        R, piv = rref([A0[k] + [e[k]] for k in range(dim)])
        col = [R[k][dim] for k in range(dim)]
        inv_cols.append(col)
    rays: list[list] = []  # [vector, zero-mask]
    bit = {idx: 1 << n for n, idx in enumerate(init_idx)}
    full_mask = 0
    for j, col in enumerate(inv_cols):
        z, _ = int_vector(col)
        mask = 0
        for k, idx in enumerate(init_idx):
            if k != j:
                mask |= bit[idx]
        rays.append([primitive(z), mask])
    for idx in init_idx:
        full_mask |= bit[idx]
    nbits = len(init_idx)
    need = dim - 2
    for idx in order:
        if idx in bit:
            continue
        a = rows[idx]
        b = 1 << nbits
        nbits += 1
        bit[idx] = b
        pos, neg, zero = [], [], []
        for r in rays:
            s = sum(x * y for x, y in zip(a, r[0]))
            if s > 0:
                pos.append((r, s))
            elif s < 0:
                neg.append((r, s))
            else:
                zero.append(r)
        if not neg:
            for r in zero:
                r[1] |= b
            continue
        masks = [r[1] for r in rays]
        new = []
        for rp, sp in pos:
            mp = rp[1]
            for rn, sn in neg:
                common = mp & rn[1]
                if _popcount(common) < need:
                    continue
                adjacent = True
                for m in masks:
                    if m & common == common and m != mp and m != rn[1]:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vec = [sp * y - sn * x for x, y in zip(rp[0], rn[0])]
                new.append([primitive(vec), common | b])
        for r in zero:
            r[1] |= b
        rays = [r for r, _ in pos] + zero + new
    out = sorted({tuple(r[0]) for r in rays})
    return out


_LIMIT = 2 ** 62
_TRACE = None  # optional callable(rows_done, rays) for progress reports


def _prim_rows(V: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(V, axis=1)
    g[g == 0] = 1
    return V // g[:, None]


def extreme_rays(rows: Sequence[Sequence[int]], dim: int) -> list[tuple]:
    """Extreme rays of the pointed cone ``{y : rows . y >= 0}``.

    ``rows`` must be integer vectors of length ``dim`` with rank ``dim``.
    Returns primitive integer rays in lexicographic order.  Zero sets are
    kept as bitsets in uint64 words so that candidate pairs and the
    combinatorial adjacency test run vectorized.  When integers could leave
    the int64 range the pure-Python routine takes over.
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    if not rows:
        raise PolytopeError("cone has no constraints")
    A = np.array(rows, dtype=object)
    if max((abs(int(v)) for v in A.ravel()), default=0) > 2 ** 20:
        return _extreme_rays_plain(rows, dim)
    A = A.astype(np.int64)
    m = len(rows)
    order = sorted(range(m), key=lambda i: rows[i])
    init = independent_subset([rows[i] for i in order])
    if len(init) < dim:
        raise PolytopeError("cone is not pointed (lineality present)")
    init_idx = [order[i] for i in init]
    A0 = [list(rows[i]) for i in init_idx]
    cols = []
    for j in range(dim):
        R, _ = rref([A0[k] + [Fraction(int(k == j))] for k in range(dim)])
        z, _ = int_vector([R[k][dim] for k in range(dim)])
        cols.append(primitive(z))
    if max(abs(v) for c in cols for v in c) > 2 ** 20:
        return _extreme_rays_plain(rows, dim)
    words = (m + 63) // 64
    pos_of = {idx: n for n, idx in enumerate(init_idx)}
    slot = {}
    for idx in init_idx:
        slot[idx] = len(slot)
    for idx in order:
        if idx not in slot:
            slot[idx] = len(slot)
    V = np.array(cols, dtype=np.int64)
    M = np.zeros((dim, words), dtype=np.uint64)
    for j in range(dim):
        for idx in init_idx:
            if pos_of[idx] != j:
                b = slot[idx]
                M[j, b // 64] |= np.uint64(1) << np.uint64(b % 64)
    need = dim - 2
    for idx in order:
        if idx in pos_of:
            continue
        b = slot[idx]
        w, bit = b // 64, np.uint64(1) << np.uint64(b % 64)
        a = A[idx]
        vmax = int(np.abs(V).max()) if len(V) else 0
        amax = int(np.abs(a).max())
        if vmax * amax * dim >= _LIMIT:
            return _extreme_rays_plain(rows, dim)
        sv = V @ a
        P, N, Z = np.nonzero(sv > 0)[0], np.nonzero(sv < 0)[0], np.nonzero(sv == 0)[0]
        if len(N) == 0:
            M[Z, w] |= bit
            continue
        if len(P) == 0:
            V, M = V[Z], M[Z]
            M[:, w] |= bit
            continue
        if vmax * vmax * amax * dim * 2 >= _LIMIT:
            return _extreme_rays_plain(rows, dim)
        MP, MN = M[P], M[N]
        # inverted index: for each constraint slot, the set of rays saturating it
        index = []
        for bb in range(len(slot)):
            col = (M[:, bb // 64] >> np.uint64(bb % 64)) & np.uint64(1)
            index.append(int.from_bytes(np.packbits(col.astype(np.uint8), bitorder="little").tobytes(),
                                        "little"))
        everyone = (1 << len(V)) - 1
        new_v, new_m = [], []
        for jn, n in enumerate(N):
            common = MP & MN[jn]
            cnt = np.bitwise_count(common).sum(axis=1)
            cand = np.nonzero(cnt >= need)[0]
            if len(cand) == 0:
                continue
            cm = common[cand]
            keep = []
            for c in range(len(cand)):
                acc = everyone
                for ww in range(words):
                    x = int(cm[c, ww])
                    while x:
                        low = x & -x
                        acc &= index[ww * 64 + low.bit_length() - 1]
                        x ^= low
                    if acc.bit_count() <= 2:
                        break
                if acc.bit_count() == 2:
                    keep.append(c)
            if not keep:
                continue
            keep = np.array(keep)
            pi = P[cand[keep]]
            vec = sv[pi][:, None] * V[n][None, :] - sv[n] * V[pi]
            new_v.append(_prim_rows(vec))
            nm = cm[keep].copy()
            nm[:, w] |= bit
            new_m.append(nm)
        M[Z, w] |= bit
        parts_v = [V[P], V[Z]] + new_v
        parts_m = [M[P], M[Z]] + new_m
        V = np.concatenate(parts_v)
        M = np.concatenate(parts_m)
        if _TRACE is not None:
            _TRACE(len(slot), len(V))
    return sorted({tuple(int(x) for x in r) for r in V})


def _int_row(vals) -> list[int]:
    z, _ = int_vector(vals)
    return z


def affine_hull(points: Sequence[Sequence]) -> tuple[list, list]:
    """Equalities ``(a, b)`` cutting out the affine hull, and pivot columns."""
    pts = [_vec(p) for p in points]
    d = len(pts[0])
    diffs = [[x - y for x, y in zip(p, pts[0])] for p in pts[1:]]
    _, piv = rref(diffs) if diffs else ([], [])
    eqs = []
    for a in nullspace(diffs, d) if diffs else nullspace([], d):
        z = primitive(_int_row(a))
        b = sum((Fraction(x) * y for x, y in zip(z, pts[0])), Fraction(0))
        eqs.append((tuple(Fraction(x) for x in z), b))
    return eqs, piv


def enumerate_vertices(h: HRep) -> VRep:
    ineqs = h.le_form()
    d = h.dim
    if h.equalities:
        E = [list(a) + [b] for a, b in h.equalities]
        R, piv = rref(E)
        if d in piv:
            return VRep([])
        x0 = [Fraction(0)] * d
        for r, pc in enumerate(piv):
            x0[pc] = R[r][d]
        N = nullspace([row[:d] for row in R], d)
    else:
        x0 = [Fraction(0)] * d
        N = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    k = len(N)
    cone = [[1] + [0] * k]
    for a, b in ineqs:
        slack = b - sum((ai * xi for ai, xi in zip(a, x0)), Fraction(0))
        proj = [-sum((ai * n[i] for i, ai in enumerate(a)), Fraction(0)) for n in N]
        row = _int_row([slack] + proj)
        if any(row):
            cone.append(row)
    if rank(cone) < k + 1:
        raise PolytopeError("unbounded direction: the inequalities leave a lineality space")
    rays = extreme_rays(cone, k + 1)
    verts = []
    for r in rays:
        t = r[0]
        if t == 0:
            raise PolytopeError("unbounded recession direction")
        z = [Fraction(v, t) for v in r[1:]]
        pt = [x0[i] + sum((z[j] * N[j][i] for j in range(k)), Fraction(0)) for i in range(d)]
        verts.append(tuple(pt))
    return VRep(sorted(verts))


def enumerate_facets(v: VRep) -> HRep:
    pts = v.points
    if not pts:
        raise PolytopeError("no points")
    d = len(pts[0])
    eqs, piv = affine_hull(pts)
    if not piv:
        return HRep([], eqs)
    cone = [[1] + [-p[j] for j in piv] for p in pts]
    cone = [_int_row(r) for r in cone]
    rays = extreme_rays(cone, len(piv) + 1)
    ineqs = []
    for r in rays:
        b = r[0]
        a = [Fraction(0)] * d
        for j, c in zip(piv, r[1:]):
            a[j] = Fraction(c)
        if all(x == 0 for x in a):
            continue
        ineqs.append((tuple(a), Fraction(b), "<="))
    ineqs.sort(key=lambda t: (t[0], t[1]))
    return HRep(ineqs, eqs)


def satisfies(h: HRep, p: Sequence, scale=1) -> bool:
    """Whether ``p`` lies in the polyhedron; ``scale`` homogenizes the bounds."""
    p = _vec(p)
    s = rat(scale)
    for a, b in h.equalities:
        if sum((x * y for x, y in zip(a, p)), Fraction(0)) != b * s:
            return False
    for a, b in h.le_form():
        if sum((x * y for x, y in zip(a, p)), Fraction(0)) > b * s:
            return False
    return True


# ------------------------------------------------- extremality, membership


def is_extreme(p: Sequence, generators: Sequence[Sequence]) -> Extremality:
    """Is ``p`` outside the convex hull of the other generators?"""
    p = _vec(p)
    others = [g for g in (_vec(x) for x in generators) if g != p]
    status, data = convex_combination(others, p)
    if status == "inside":
        return Extremality(False, weights=data)
    func, thr = data
    val = sum((a * b for a, b in zip(func, p)), Fraction(0))
    return Extremality(True, witness=Witness(tuple(func), thr, val))


def membership(p: Sequence, v: VRep) -> Membership:
    p = _vec(p)
    status, data = convex_combination(v.points, p)
    if status == "inside":
        return Membership(True, weights=data)
    func, thr = data
    val = sum((a * b for a, b in zip(func, p)), Fraction(0))
    return Membership(False, witness=Witness(tuple(func), thr, val))


def cut_vrep(v: VRep, cuts: Sequence[Sequence], check: bool = False) -> VRep:
    """Intersect ``conv(v)`` with the slabs ``0 <= c.x <= 1`` for each cut ``c``.

    Points violating a cut are discarded; every segment from a discarded
    point to any other point is intersected with the bounding hyperplanes;
    the surviving candidates are reduced to extreme points by exact LP.
    """
    cuts = [_vec(c) for c in cuts]
    pts = v.points

    def val(c, p):
        return sum((x * y for x, y in zip(c, p)), Fraction(0))

    vals = [[val(c, p) for c in cuts] for p in pts]

    def ok(cv):
        return all(0 <= x <= 1 for x in cv)

    kept = [p for p, cv in zip(pts, vals) if ok(cv)]
    dropped = [i for i, cv in enumerate(vals) if not ok(cv)]
    if not dropped:
        return VRep(sorted(kept))
    cand = {}
    for i in dropped:
        d, dv = pts[i], vals[i]
        for j, q in enumerate(pts):
            if j == i:
                continue
            qv = vals[j]
            for ci in range(len(cuts)):
                den = qv[ci] - dv[ci]
                if den == 0:
                    continue
                for level in (0, 1):
                    t = (level - dv[ci]) / den
                    if not 0 <= t <= 1:
                        continue
                    pv = [dv[k] + t * (qv[k] - dv[k]) for k in range(len(cuts))]
                    if not ok(pv):
                        continue
                    pt = tuple(a + t * (b - a) for a, b in zip(d, q))
                    cand.setdefault(pt, True)
    kept_set = set(kept)
    extra = [p for p in cand if p not in kept_set]
    if not kept and not extra:
        raise PolytopeError("every point was cut away")
    pool = kept + extra
    result = list(kept)
    for p in extra:
        if is_extreme(p, pool):
            result.append(p)
    # points found non-extreme are dropped from the pool only after the scan,
    # so each test is against the full candidate set
    out = VRep(sorted(result))
    if check:
        h = enumerate_facets(v)
        for c in cuts:
            h.inequalities.append((c, Fraction(1), "<="))
            h.inequalities.append((c, Fraction(0), ">="))
        ref = enumerate_vertices(HRep(h.inequalities, h.equalities))
        if set(ref.points) != set(out.points):
            raise PolytopeError("cut result disagrees with vertex enumeration")
    return out


def canonical_coords(points: Sequence[Sequence], span_basis: Sequence[Sequence]) -> list[tuple]:
    basis = [_vec(b) for b in span_basis]
    if rank(basis) != len(basis):
        raise ValueError("span basis is not linearly independent")
    return [tuple(sum((x * y for x, y in zip(p, b)), Fraction(0)) for b in basis)
            for p in (_vec(q) for q in points)]


# ------------------------------------------------------------------ text io


def dump_vrep(v: VRep) -> str:
    return "".join(" ".join(fmt_rat(x) for x in p) + "\n" for p in v.points)


def load_vrep(text: str) -> VRep:
    pts = [tuple(rat(x) for x in ln.split()) for ln in text.splitlines() if ln.strip()]
    return VRep(pts)


def dump_hrep(h: HRep) -> str:
    lines = []
    for a, b, s in h.inequalities:
        lines.append(f"{' '.join(fmt_rat(x) for x in a)} {s} {fmt_rat(b)}")
    for a, b in h.equalities:
        lines.append(f"{' '.join(fmt_rat(x) for x in a)} == {fmt_rat(b)}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_hrep(text: str) -> HRep:
    ineqs, eqs = [], []
    for ln in text.splitlines():
        if not ln.strip():
            continue
        for op in ("<=", ">=", "=="):
            if op in ln:
                lhs, rhs = ln.split(op)
                a = tuple(rat(x) for x in lhs.split())
                b = rat(rhs)
                if op == "==":
                    eqs.append((a, b))
                else:
                    ineqs.append((a, b, op))
                break
        else:
            raise ValueError(f"no relation in line {ln!r}")
    return HRep(ineqs, eqs)
