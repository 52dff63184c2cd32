"""Maximal effect spaces.

Effects are stored by their orthogonal projection onto the span of the
no-signalling states.  Two raw matrices that agree on every state have the
same projection, so the projection doubles as a canonical form; it also
commutes with relabellings, which makes orbit keys well defined.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exactnum import fmt_rat, independent_subset, int_rows, rat, safe_matmul, solve_square
from .polytope import HRep, VRep, cut_vrep, enumerate_vertices, is_extreme
from .scenario import (SC22, ProbTable, Scenario, StateSpaceModel, apply_relabelling,
                       box_index, build_model, classify_orbits, group, local_deterministic_states,
                       noisy_pr, ns_hrep, orbit_key, pr_box)

__all__ = [
    "SpanFrame",
    "frame",
    "EffectSet",
    "maximal_effect_space",
    "effects_by_cuts",
    "complement",
    "count_extreme",
    "classify_effects",
    "type_effects",
    "type_representative",
    "ch_effect",
    "ch_effect_noisy",
    "unit_effect",
    "H0_CLASS_REPS",
    "ns_vertices",
    "is_separable",
    "opposite_pairs",
    "EffectClass",
    "effect_report",
    "boxworld_effects",
]


class SpanFrame:
    """Coordinates on the state span of a scenario.

    ``basis`` is a maximal independent subset of the local deterministic
    states; an effect in the span is ``basis^T z``.
    """

    def __init__(self, sc: Scenario):
        self.scenario = sc
        ld = local_deterministic_states(sc)
        idx = independent_subset([s.entries for s in ld])
        self.basis = [ld[i].entries for i in idx]
        self.k = len(self.basis)
        self.gram = [[sum((a * b for a, b in zip(u, v)), Fraction(0)) for v in self.basis]
                     for u in self.basis]
        cols = [solve_square(self.gram, [Fraction(int(i == j)) for i in range(self.k)])
                for j in range(self.k)]
        inv = [[cols[j][i] for j in range(self.k)] for i in range(self.k)]
        # coords(x) = inv . (basis x); fold both into one k x D matrix
        D = sc.size
        self._proj = [[sum((inv[i][t] * self.basis[t][c] for t in range(self.k) if inv[i][t]),
                           Fraction(0)) for c in range(D)] for i in range(self.k)]
        self._proj_nz = [[(c, v) for c, v in enumerate(row) if v] for row in self._proj]

    def coords(self, x: Sequence) -> list[Fraction]:
        """``z`` with ``basis^T z`` the projection of ``x``."""
        return [sum((v * x[c] for c, v in row if x[c]), Fraction(0)) for row in self._proj_nz]

    def lift(self, z: Sequence) -> tuple:
        D = self.scenario.size
        out = [Fraction(0)] * D
        for zj, bv in zip(z, self.basis):
            if zj:
                for i, b in enumerate(bv):
                    if b:
                        out[i] += zj * b
        return tuple(out)

    def canonical(self, x) -> tuple:
        ents = x.entries if isinstance(x, ProbTable) else tuple(rat(v) for v in x)
        return self.lift(self.coords(ents))

    def state_row(self, v: Sequence) -> list[Fraction]:
        """Row ``w`` with ``<basis^T z, v> = w . z``."""
        return [sum((a * b for a, b in zip(bv, v)), Fraction(0)) for bv in self.basis]


@lru_cache(maxsize=None)
def frame(sc: Scenario) -> SpanFrame:
    return SpanFrame(sc)


def _table(sc: Scenario, ents) -> ProbTable:
    return ProbTable(sc, ents, "effect")


# ------------------------------------------------------------ named effects

_CH_ROWS = {
    1: [[0, 0, 1, 0], [0, 1, 0, 0], [0, -1, 0, 1], [0, 0, 0, 0]],
    2: [[0, 0, 0, 0], [0, -1, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]],
    3: [[0, 0, 0, 1], [0, 1, 0, 0], [0, -1, 1, 0], [0, 0, 0, 0]],
    4: [[0, 0, 0, 0], [0, -1, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0]],
}


def unit_effect(sc: Scenario = SC22) -> ProbTable:
    v = [0] * sc.size
    L = sc.local_dim
    for a in range(sc.n):
        for b in range(sc.n):
            v[a * L + b] = 1
    return _table(sc, v)


def ch_effect(box, raw: bool = False) -> ProbTable:
    """CH effect violated by PR box ``box`` (1..8).  Primed boxes use ``u - e``."""
    i = box_index(box)
    if i <= 4:
        e = ProbTable.from_matrix(SC22, _CH_ROWS[i], role="effect")
    else:
        e = unit_effect() - ProbTable.from_matrix(SC22, _CH_ROWS[i - 4], role="effect")
    if raw:
        return e
    return _table(SC22, frame(SC22).canonical(e))


def ch_effect_noisy(box, alpha) -> ProbTable:
    """``2/(1+2 alpha) e_CH``: the effect with value exactly 1 on the noisy box."""
    a = rat(alpha)
    return ch_effect(box).scale(Fraction(2) / (1 + 2 * a))


def _local(rows) -> ProbTable:
    return ProbTable.from_matrix(SC22, rows, role="effect")


H0_CLASS_REPS = {
    "zero": _local([[0] * 4] * 4),
    "I": _local([[1, 0, 0, 0], [0] * 4, [0] * 4, [0] * 4]),
    "II": _local([[1, 0, 0, 0], [0, 1, 0, 0], [0] * 4, [0] * 4]),
    "III": _local([[1, 0, 0, 0], [0] * 4, [0, 1, 0, 0], [0] * 4]),
    "IV": _local([[1, 1, 0, 0], [0] * 4, [0] * 4, [0] * 4]),
    "V": _local([[0, 1, 0, 0], [1, 1, 0, 0], [0] * 4, [0] * 4]),
    "CH": ProbTable.from_matrix(SC22, _CH_ROWS[2], role="effect"),
    "unit": _local([[1, 1, 0, 0], [1, 1, 0, 0], [0] * 4, [0] * 4]),
}

# base local effects of the four families on the PR2 hyperplane
_TYPE_BASE = {
    "1": [[0, 1, 0, 0], [1, 0, 0, 0], [0] * 4, [0] * 4],
    "1'": [[0, 1, 0, 0], [0] * 4, [1, 0, 0, 0], [0] * 4],
    "2": [[1, 1, 0, 0], [1, 0, 0, 0], [0] * 4, [0] * 4],
    "3": [[0, 1, 0, 0], [0] * 4, [0] * 4, [0] * 4],
    "4": [[0] * 4] * 4,
}


def _type_weight(kind: str, a: Fraction) -> Fraction:
    if kind in ("1", "1'"):
        return (1 - a) / a
    if kind == "2":
        return (1 - a) / (3 * a - 1)
    if kind == "3":
        return (3 - a) / (3 * a + 1)
    if kind == "4":
        return Fraction(2) / (1 + 2 * a)
    raise ValueError(f"unknown type {kind!r}")


def type_representative(kind: str, alpha) -> ProbTable:
    """``w e_CH2 + (1-w) f`` for the family ``kind`` relative to PR2."""
    a = rat(alpha)
    if not Fraction(1, 2) <= a <= 1:
        raise ValueError("alpha must lie in [1/2, 1]")
    w = _type_weight(kind, a)
    raw = ch_effect(2, raw=True).scale(w) + _local(_TYPE_BASE[kind]).scale(1 - w)
    return _table(SC22, frame(SC22).canonical(raw))


def _relabel_to(box: int) -> "object":
    """A relabelling taking PR2 to PR_box."""
    target = pr_box(box).entries
    src = pr_box(2)
    for r in group(SC22, "local"):
        if apply_relabelling(r, src).entries == target:
            return r
    raise AssertionError("PR boxes form a single orbit")


def type_effects(box, alpha, grouping: str = "split") -> dict:
    """Members of each family on ``<x, PR_box,alpha> = 1``.

    Members are the relabelled images of the representative with value 1 on
    the noisy box.  ``grouping="combined"`` merges families 1 and 1'.
    """
    i = box_index(box)
    a = rat(alpha)
    fr = frame(SC22)
    target = noisy_pr(i, a)
    rel = _relabel_to(i)
    gathers = _gathers()
    out = {}
    for kind in ("1", "1'", "2", "3", "4"):
        rep = apply_relabelling(rel, type_representative(kind, a))
        seen = {}
        for gidx in range(gathers.shape[0]):
            img = tuple(rep.entries[j] for j in gathers[gidx])
            if img in seen:
                continue
            if sum((x * y for x, y in zip(img, target.entries)), Fraction(0)) == 1:
                seen[img] = True
        out[kind] = [_table(SC22, e) for e in sorted(seen)]
    if grouping == "combined":
        out["1"] = out["1"] + [e for e in out.pop("1'") if e not in out["1"]]
    return out


@lru_cache(maxsize=None)
def _gathers():
    return np.stack([g.gather for g in group(SC22, "full")])


# ------------------------------------------------------------ enumeration


@lru_cache(maxsize=None)
def ns_vertices(sc: Scenario) -> tuple:
    return tuple(enumerate_vertices(ns_hrep(sc)).points)


def is_separable(e, sc: Scenario) -> bool:
    """Valid on every no-signalling vertex, i.e. a boxworld effect."""
    ents = e.entries if isinstance(e, ProbTable) else e
    verts = ns_vertices(sc)
    arr, den = int_rows(verts, common=True)
    z, zd = int_rows([ents])
    vals = safe_matmul(arr, z.T).ravel()
    scale = den[0] * zd[0]
    return all(0 <= int(v) <= scale for v in vals)


@dataclass
class EffectSet:
    model: StateSpaceModel
    effects: list
    coords: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def __len__(self):
        return len(self.effects)

    def index(self) -> dict:
        return {e.entries: i for i, e in enumerate(self.effects)}

    def tag_counts(self) -> dict:
        out = {"separable": 0, "ch": 0}
        for t in self.tags:
            out["separable"] += bool(t["separable"])
            out["ch"] += bool(t["ch"])
        return out

    def on_hyperplane(self, box_pos: int, level: int) -> list:
        return [e for e, t in zip(self.effects, self.tags) if t["levels"][box_pos] == level]


def _tag(es: EffectSet) -> None:
    m = es.model
    sc = m.scenario
    ch_keys = set()
    if sc == SC22:
        ch_keys.add(orbit_key(ch_effect(2).entries, sc))
    verts = ns_vertices(sc)
    arr, den = int_rows(verts, common=True)
    es.tags = []
    for e in es.effects:
        z, zd = int_rows([e.entries])
        vals = safe_matmul(arr, z.T).ravel()
        scale = den[0] * zd[0]
        sep = all(0 <= int(v) <= scale for v in vals)
        levels = []
        for v in m.nonlocal_vertices:
            levels.append(e.dot(v))
        ch = (not sep) and bool(ch_keys) and orbit_key(e.entries, sc) in ch_keys
        es.tags.append({"separable": sep, "ch": ch, "levels": levels})


def maximal_effect_space(m: StateSpaceModel, tag: bool = True) -> EffectSet:
    """All extreme effects by vertex enumeration of ``0 <= <x, v> <= 1``."""
    fr = frame(m.scenario)
    rows = [fr.state_row(v.entries) for v in m.vertices]
    ineqs = []
    for w in rows:
        ineqs.append((w, 0, ">="))
        ineqs.append((w, 1, "<="))
    vz = enumerate_vertices(HRep(ineqs))
    effects = [_table(m.scenario, fr.lift(z)) for z in vz.points]
    es = EffectSet(m, effects, [tuple(z) for z in vz.points])
    if tag:
        _tag(es)
    return es


def boxworld_effects(sc: Scenario) -> EffectSet:
    """Extreme effects valid on the whole no-signalling polytope."""
    ld = {s.entries for s in local_deterministic_states(sc)}
    verts = [ProbTable(sc, v) for v in ns_vertices(sc)]
    verts.sort(key=lambda t: t.entries not in ld)
    g = sum(1 for t in verts if t.entries not in ld)
    m = StateSpaceModel(sc, verts, g, Fraction(1), [], True, f"NS_{sc.tag}")
    return maximal_effect_space(m, tag=False)


@lru_cache(maxsize=None)
def _h0_effects(sc: Scenario) -> tuple:
    es = maximal_effect_space(build_model(sc, [], 1), tag=False)
    return tuple(es.coords)


def effects_by_cuts(m: StateSpaceModel, check: bool = False, tag: bool = True) -> EffectSet:
    """Cut the local effect polytope by ``0 <= <x, box> <= 1`` for every box.

    One box at a time when there is a single box; otherwise each box is cut
    separately from the local polytope, the results are merged and effects
    invalid for any box are discarded.  ``check`` compares against full
    vertex enumeration.
    """
    sc = m.scenario
    fr = frame(sc)
    base = VRep(list(_h0_effects(sc)))
    cuts = [fr.state_row(v.entries) for v in m.nonlocal_vertices]
    if not cuts:
        pts = base.points
    elif len(cuts) == 1:
        pts = _cut_on_faces(base.points, cuts[0])
    else:
        union = {}
        for c in cuts:
            for p in _cut_on_faces(base.points, c):
                union[p] = True
        pts = []
        for p in union:
            ok = True
            for c in cuts:
                val = sum((x * y for x, y in zip(c, p)), Fraction(0))
                if not 0 <= val <= 1:
                    ok = False
                    break
            if ok:
                pts.append(p)
        pts.sort()
    es = EffectSet(m, [_table(sc, fr.lift(z)) for z in pts], list(pts))
    if check:
        ref = maximal_effect_space(m, tag=False)
        if set(ref.coords) != set(es.coords):
            raise AssertionError(
                f"cut construction gives {len(es)} effects, enumeration gives {len(ref)}")
    if tag:
        _tag(es)
    return es


def _cut_on_faces(points: list, cut: Sequence) -> list:
    """Single slab cut; extremality of new points is decided within each face."""

    def val(p):
        return sum((x * y for x, y in zip(cut, p)), Fraction(0))

    vals = [val(p) for p in points]
    kept = [p for p, v in zip(points, vals) if 0 <= v <= 1]
    dropped = [i for i, v in enumerate(vals) if not 0 <= v <= 1]
    if not dropped:
        return sorted(kept)
    faces = {0: {}, 1: {}}
    for i in dropped:
        d, dv = points[i], vals[i]
        for j, q in enumerate(points):
            if j == i:
                continue
            qv = vals[j]
            if qv == dv:
                continue
            for level in (0, 1):
                t = (level - dv) / (qv - dv)
                if 0 <= t <= 1:
                    pt = tuple(a + t * (b - a) for a, b in zip(d, q))
                    faces[level][pt] = True
    out = list(kept)
    kept_set = set(kept)
    for level in (0, 1):
        on_face = [p for p, v in zip(points, vals) if v == level] + list(faces[level])
        pool = list(dict.fromkeys(on_face))
        for p in faces[level]:
            if p in kept_set:
                continue
            if is_extreme(p, pool):
                out.append(p)
                kept_set.add(p)
    return sorted(set(out))


# ------------------------------------------------------------ utilities


def complement(e, m: StateSpaceModel) -> ProbTable:
    sc = m.scenario
    fr = frame(sc)
    u = fr.canonical(unit_effect(sc) if sc != SC22 else unit_effect())
    ents = e.entries if isinstance(e, ProbTable) else e
    return _table(sc, fr.canonical([a - b for a, b in zip(u, ents)]))


def count_extreme(g: int, t: int, alpha) -> int:
    a = rat(alpha)
    if not (0 <= 2 * t <= g <= 8):
        raise ValueError("need 0 <= 2t <= g <= 8")
    if not Fraction(1, 2) <= a <= 1:
        raise ValueError("alpha outside [1/2, 1]")
    if a == Fraction(1, 2):
        return 90
    if a == 1:
        return 90 + 16 * g - 34 * t
    return 90 + 56 * g - 58 * t


def opposite_pairs(boxes: Sequence) -> int:
    idx = {box_index(b) for b in boxes}
    return sum(1 for i in range(1, 5) if i in idx and i + 4 in idx)


@dataclass
class EffectClass:
    name: str
    size: int
    representative: tuple
    members: list


def classify_effects(es, subgroup: str = "full") -> list[EffectClass]:
    """Relabelling classes of an effect list (tables or an EffectSet)."""
    effects = es.effects if isinstance(es, EffectSet) else list(es)
    if not effects:
        return []
    sc = effects[0].scenario
    fr = frame(sc)
    canon = [fr.canonical(e) for e in effects]
    classes = classify_orbits(canon, sc, subgroup)
    names = {}
    if sc == SC22:
        for nm, rep in H0_CLASS_REPS.items():
            names[orbit_key(fr.canonical(rep), sc, subgroup)] = nm
    out = []
    for n, c in enumerate(classes):
        out.append(EffectClass(names.get(c.representative, f"C{n}"), c.size, c.representative,
                               c.members))
    return out


def effect_report(es: EffectSet) -> dict:
    classes = classify_effects(es)
    tc = es.tag_counts() if es.tags else {}
    return {
        "model": es.model.name,
        "alpha": fmt_rat(es.model.alpha),
        "count": len(es),
        "separable": tc.get("separable"),
        "ch_type": tc.get("ch"),
        "classes": [{"class_id": c.name, "size": c.size,
                     "representative": [fmt_rat(v) for v in c.representative]}
                    for c in classes],
    }
