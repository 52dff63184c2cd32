"""Entanglement swapping through a bipartite effect, CHSH scores and couplers.

Two bipartite tables ``r`` (systems 1,2) and ``s`` (systems 3,4) are joined by
an effect on systems 2 and 3.  In matrix form the unnormalized result on 1,4
is simply ``R @ E @ S``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exactnum import QuadSurd, fmt_rat, int_rows, int_vector, rat, surd_cmp
from .lp import DualCertificate, LPProblem, solve, solve_with_oracle, verify_certificate
from .scenario import (
    BOX_IDS,
    SC22,
    ProbTable,
    Scenario,
    StateSpaceModel,
    classify_orbits,
    local_facets,
    pr_box,
    stabilizer,
)

__all__ = [
    "ChshGame",
    "CouplerRecord",
    "GAME_LABELS",
    "coupler_threshold",
    "family_couples",
    "game",
    "chsh",
    "chsh_scores",
    "apply_middle",
    "success_probability",
    "PairScanner",
    "is_coupler",
    "find_couplers",
    "post_state_chsh_check",
    "closed_form_chsh",
    "closed_form_success",
    "coupler_report",
    "CouplerLP",
]

GAME_LABELS = ["1", "2", "3", "4", "1'", "2'", "3'", "4'"]


@dataclass(frozen=True)
class ChshGame:
    index: int
    functional: ProbTable

    @property
    def label(self) -> str:
        return GAME_LABELS[self.index - 1]


@lru_cache(maxsize=None)
def game(i: int) -> ChshGame:
    if not 1 <= i <= 8:
        raise ValueError("CHSH game index must be in 1..8")
    return ChshGame(i, pr_box(i).scale(Fraction(1, 2)).with_role("functional"))


def _entries(t):
    return t.entries if isinstance(t, ProbTable) else tuple(rat(v) for v in t)


def chsh(p, i: int) -> Fraction:
    ents = _entries(p)
    if len(ents) != SC22.size:
        raise ValueError("chsh expects a (2,2) table")
    return game(i).functional.dot(ents)


def _restrict(ents: Sequence, sc: Scenario, xa: tuple, xb: tuple) -> list:
    """The (2,2) sub-table on inputs ``xa`` for Alice and ``xb`` for Bob."""
    n, L = sc.n, sc.local_dim
    out = []
    for x in xa:
        for a in range(n):
            for y in xb:
                for b in range(n):
                    out.append(ents[(x * n + a) * L + y * n + b])
    return out


def chsh_scores(p, sc: Scenario = None) -> dict:
    """All CHSH scores of a bipartite table keyed by game label.

    With more than two inputs every choice of two inputs per party
    gives a copy of the eight games, labelled ``"i@x0x1,y0y1"``.
    """
    ents = _entries(p)
    sc = sc or (p.scenario if isinstance(p, ProbTable) else SC22)
    if sc.n != 2 or sc.parties != 2:
        raise ValueError("CHSH scores need two parties with binary outputs")
    if sc.m == 2:
        return {GAME_LABELS[i - 1]: chsh(ents, i) for i in range(1, 9)}
    out = {}
    for xa in itertools.combinations(range(sc.m), 2):
        for xb in itertools.combinations(range(sc.m), 2):
            sub = _restrict(ents, sc, xa, xb)
            tag = f"{xa[0]}{xa[1]},{xb[0]}{xb[1]}"
            for i in range(1, 9):
                out[f"{GAME_LABELS[i - 1]}@{tag}"] = chsh(sub, i)
    return out


def _best_game(p, sc) -> tuple:
    scores = chsh_scores(p, sc)
    label = max(scores, key=lambda k: (scores[k], k))
    return scores[label], label


# ---------------------------------------------------------------- the map


def _mat(t, sc: Scenario) -> list:
    ents = _entries(t)
    L = sc.local_dim
    return [list(ents[i * L:(i + 1) * L]) for i in range(L)]


def apply_middle(e, r, s, transpose: bool = False) -> ProbTable:
    """Unnormalized table on the outer systems after ``e`` acts on the inner two.

    ``transpose`` swaps the order in which ``e`` sees the inner systems.
    """
    sc = r.scenario if isinstance(r, ProbTable) else SC22
    for t in (e, s):
        if isinstance(t, ProbTable) and t.scenario != sc:
            raise ValueError("scenario mismatch")
    if sc.parties != 2:
        raise ValueError("apply_middle acts on bipartite tables")
    R, E, S = _mat(r, sc), _mat(e, sc), _mat(s, sc)
    if transpose:
        E = [list(c) for c in zip(*E)]
    L = sc.local_dim
    RE = [[sum((R[i][k] * E[k][j] for k in range(L) if R[i][k]), Fraction(0)) for j in range(L)]
          for i in range(L)]
    out = [sum((RE[i][k] * S[k][j] for k in range(L) if RE[i][k]), Fraction(0))
           for i in range(L) for j in range(L)]
    return ProbTable(sc, out, "state")


def _unit_mask(sc: Scenario) -> list:
    L = sc.local_dim
    return [a * L + b for a in range(sc.n) for b in range(sc.n)]


def success_probability(e, r, s) -> Fraction:
    phi = apply_middle(e, r, s)
    return sum((phi.entries[i] for i in _unit_mask(phi.scenario)), Fraction(0))


# ------------------------------------------------------------------ scans


def _array(rows, bound: int) -> np.ndarray:
    return np.array(rows, dtype=np.int64 if bound < _SAFE else object)


_SAFE = 2 ** 62


class _IntFacets:
    """Integer form of an H-rep for batched homogeneous membership tests."""

    def __init__(self, h):
        le = h.le_form()
        allrows = le + list(h.equalities)
        A, dens = int_rows([a for a, _ in allrows])
        self.A = A.astype(object)
        self.b = np.array([int(b * d) for (_, b), d in zip(allrows, dens)], dtype=object)
        self.n_le = len(le)
        self.peak = max(int(np.abs(self.A).max()) if self.A.size else 0,
                        max((abs(int(v)) for v in self.b), default=0), 1)

    def first_violations(self, phi: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Per row of ``phi``: index of the first violated facet, or -1."""
        if len(phi) == 0:
            return np.zeros(0, dtype=np.int64)
        pk = max(int(np.abs(phi).max()), int(np.abs(w).max()), 1)
        big = self.peak * pk * (phi.shape[1] + 1) >= _SAFE
        A = self.A if big else self.A.astype(np.int64)
        b = self.b if big else self.b.astype(np.int64)
        ph = phi.astype(object) if big else phi.astype(np.int64)
        ww = w.astype(object) if big else w.astype(np.int64)
        lhs = ph.dot(A.T)
        rhs = np.outer(ww, b)
        bad = np.zeros(lhs.shape, dtype=bool)
        nle = self.n_le
        bad[:, :nle] = lhs[:, :nle] > rhs[:, :nle]
        bad[:, nle:] = lhs[:, nle:] != rhs[:, nle:]
        anyb = bad.any(axis=1)
        first = np.where(anyb, bad.argmax(axis=1), -1)
        return first


class PairScanner:
    """Integer images of many effects over ordered pairs of vertices.

    By default only pairs of nonlocal vertices are visited: a pair with a
    local deterministic vertex has a product image.
    """

    def __init__(self, model: StateSpaceModel, all_pairs: bool = False):
        self.model = model
        self.sc = model.scenario
        nv = len(model.vertices)
        self.vertex_ids = list(range(nv)) if all_pairs else list(range(nv - model.g, nv))
        verts = [model.vertices[i] for i in self.vertex_ids]
        L = self.sc.local_dim
        if verts:
            V, dens = int_rows([v.entries for v in verts], common=True)
            self.V = V.astype(object).reshape(len(verts), L, L)
            self.vden = int(dens[0])
        else:
            self.V = np.zeros((0, L, L), dtype=object)
            self.vden = 1
        self.model_facets = _IntFacets(model.facets)
        self.local_facets = _IntFacets(local_facets(self.sc))
        self.mask = _unit_mask(self.sc)
        self.vertex_set = {v.entries for v in model.vertices}

    def pairs(self) -> list:
        k = len(self.vertex_ids)
        return [(a, b) for a in range(k) for b in range(k)]

    def images(self, effects: Sequence, transpose: bool = False):
        """``(phi, w, den)``: ``phi[t, p]`` is the flat image of effect ``t`` on pair ``p``.

        True image = ``phi / den``; ``w`` is the integer weight ``<u, phi>``.
        """
        L = self.sc.local_dim
        ents = [_entries(e) for e in effects]
        Ez, edens = int_rows(ents, common=True) if ents else (np.zeros((0, L * L)), [1])
        E = Ez.astype(object).reshape(len(ents), L, L)
        if transpose:
            E = E.transpose(0, 2, 1)
        V = self.V
        k = V.shape[0]
        pe = max(int(np.abs(Ez).max()) if len(ents) else 0, 1)
        pv = max(int(np.abs(V).max()) if k else 0, 1)
        fast = pe * pv * pv * L * L < _SAFE
        if fast:
            V64 = V.astype(np.int64)
            E64 = E.astype(np.int64)
            RE = np.einsum("aij,tjk->taik", V64, E64)
            phi = np.einsum("taik,bkl->tabil", RE, V64)
        else:
            RE = np.einsum("aij,tjk->taik", V, E)
            phi = np.einsum("taik,bkl->tabil", RE, V)
        phi = phi.reshape(len(ents), k * k, L * L)
        w = phi[:, :, self.mask].sum(axis=2)
        den = int(edens[0]) * self.vden * self.vden
        return phi, w, den

    def classify(self, effects: Sequence, transpose: bool = False):
        """Per effect and pair: model violation index (-1 if valid) and entangled flag."""
        phi, w, den = self.images(effects, transpose)
        T, P, D = phi.shape
        flat = phi.reshape(T * P, D)
        wf = w.reshape(T * P)
        viol = self.model_facets.first_violations(flat, wf).reshape(T, P)
        ent = (self.local_facets.first_violations(flat, wf) >= 0).reshape(T, P)
        return phi, w, den, viol, ent

    def label(self, a: int) -> str:
        vid = self.vertex_ids[a]
        m = self.model
        off = len(m.vertices) - m.g
        if vid >= off:
            return m.boxes[vid - off]
        return f"L{vid}"


@dataclass
class CouplerRecord:
    effect: ProbTable
    pair: tuple
    p_succ: Fraction
    post_state: ProbTable
    zeta: Fraction
    game: str
    pure: bool
    zeta_global: Fraction = None
    pair_global: tuple = None
    class_id: Optional[str] = None

    @property
    def product(self) -> Fraction:
        return self.p_succ * self.zeta

    @property
    def advantage(self) -> Fraction:
        return self.p_succ * (self.zeta - Fraction(3, 4))

    def to_json(self) -> dict:
        return {
            "effect": [fmt_rat(v) for v in self.effect.entries],
            "pair": list(self.pair),
            "p_succ": fmt_rat(self.p_succ),
            "zeta": fmt_rat(self.zeta),
            "game": self.game,
            "pure": self.pure,
            "zeta_global": fmt_rat(self.zeta_global),
            "pair_global": list(self.pair_global),
            "class_id": self.class_id,
        }


def _record(e, sc, scan, hits) -> CouplerRecord:
    best = max(hits, key=lambda h: (h[3], h[1]))
    primary = next((h for h in hits if h[0] == (0, 0)), best)
    (a, b), p, post, z, lab = primary
    return CouplerRecord(
        effect=e if isinstance(e, ProbTable) else ProbTable(sc, e, "effect"),
        pair=(scan.label(a), scan.label(b)),
        p_succ=p,
        post_state=post,
        zeta=z,
        game=lab,
        pure=post.entries in scan.vertex_set,
        zeta_global=best[3],
        pair_global=(scan.label(best[0][0]), scan.label(best[0][1])),
    )


def find_couplers(effects: Sequence, m: StateSpaceModel, scanner: PairScanner = None,
                  chunk: int = 2048) -> list:
    """``is_coupler`` over a list, batched; entries are records or ``None``."""
    sc = m.scenario
    effects = list(effects)
    if m.g == 0 or not effects:
        return [None] * len(effects)
    scan = scanner or PairScanner(m)
    pairs = scan.pairs()
    out = []
    for start in range(0, len(effects), chunk):
        part = effects[start:start + chunk]
        phi, w, den, viol, ent = scan.classify(part)
        for t, e in enumerate(part):
            hits = []
            for p, (a, b) in enumerate(pairs):
                wt = int(w[t, p])
                if wt <= 0 or viol[t, p] >= 0 or not ent[t, p]:
                    continue
                post = ProbTable(sc, [Fraction(int(v), wt) for v in phi[t, p]], "state")
                z, lab = _best_game(post, sc)
                hits.append(((a, b), Fraction(wt, den), post, z, lab))
            out.append(_record(e, sc, scan, hits) if hits else None)
    return out


def is_coupler(e, m: StateSpaceModel, scanner: PairScanner = None) -> Optional[CouplerRecord]:
    """A record when some nonlocal pair yields a valid entangled post-state, else ``None``."""
    return find_couplers([e], m, scanner)[0]



# ----------------------------------------------------------- closed forms


def closed_form_chsh(kind: str, alpha) -> Fraction:
    a = rat(alpha)
    forms = {
        "1": (a + 2) / 4,
        "2": (a * (a + 10) - 4) / (20 * a - 8),
        "3": (5 * a * a + 2 * a + 4) / (4 * (a + 2)),
        "4": (a * a + 1) / 2,
    }
    return forms[str(kind)]


def closed_form_success(kind: str, alpha) -> Fraction:
    a = rat(alpha)
    if str(kind) == "4":
        return 1 / (1 + 2 * a)
    if str(kind) == "3":
        return (2 + a) / (2 + 6 * a)
    raise ValueError("closed success probabilities exist for the families 3 and 4")


def coupler_threshold(kind: str) -> QuadSurd:
    """Noise level above which the family's post-state beats 3/4.

    Family 4 needs ``alpha^2 > 1/2``; family 3 needs ``5 alpha^2 - alpha - 2 > 0``.
    """
    if str(kind) == "4":
        return QuadSurd(0, Fraction(1, 2), 2)
    if str(kind) == "3":
        return QuadSurd(Fraction(1, 10), Fraction(1, 10), 41)
    raise ValueError("thresholds exist for the families 3 and 4")


def family_couples(kind: str, alpha) -> bool:
    return surd_cmp(rat(alpha), coupler_threshold(kind)) > 0


class ClosedFormMismatch(AssertionError):
    pass


def post_state_chsh_check(kind, alpha) -> Fraction:
    """CHSH_2 of the normalized image of the family representative on two noisy PR2 boxes."""
    from .effects import type_representative
    from .scenario import noisy_pr

    a = rat(alpha)
    if not Fraction(1, 2) <= a <= 1:
        raise ValueError("alpha must lie in [1/2, 1]")
    e = type_representative(str(kind), a)
    n = noisy_pr(2, a)
    phi = apply_middle(e, n, n)
    w = sum((phi.entries[i] for i in _unit_mask(SC22)), Fraction(0))
    val = chsh(phi, 2) / w
    want = closed_form_chsh(str(kind), a)
    if val != want:
        raise ClosedFormMismatch(
            f"family {kind} at alpha={fmt_rat(a)}: computed {fmt_rat(val)}, closed form {fmt_rat(want)}")
    return val


# ----------------------------------------------------------------- report


def coupler_report(m: StateSpaceModel, effects, restrict: str = "all") -> dict:
    """Couplers among ``effects`` after an optional preservability filter."""
    from .preservability import PreservabilityChecker

    effects = list(getattr(effects, "effects", effects))
    if restrict not in ("all", "weak", "minimal"):
        raise ValueError("restrict must be all, weak or minimal")
    checker = PreservabilityChecker(m) if restrict != "all" else None
    if checker is not None:
        keep = checker.flags(effects)
        col = 1 if restrict == "minimal" else 0
        effects = [e for e, f in zip(effects, keep) if f[col]]
    recs = [r for r in find_couplers(effects, m) if r is not None]
    from .effects import frame

    fr = frame(m.scenario)
    stab = stabilizer(m.vertices, m.scenario)
    classes = classify_orbits([fr.canonical(r.effect) for r in recs], m.scenario, stab)
    for n, cl in enumerate(classes):
        for i in cl.members:
            recs[i].class_id = f"K{n}"
    pure = [r for r in recs if r.pure]
    pure_classes = sorted({r.class_id for r in pure})

    def best(key):
        if not recs:
            return None
        r = max(recs, key=key)
        return {"value": fmt_rat(key(r)), "p_succ": fmt_rat(r.p_succ), "zeta": fmt_rat(r.zeta),
                "effect": [fmt_rat(v) for v in r.effect.entries]}

    return {
        "model": m.name,
        "alpha": fmt_rat(m.alpha),
        "restrict": restrict,
        "effects_considered": len(effects),
        "couplers": len(recs),
        "classes": len(classes),
        "pure": len(pure),
        "pure_classes": len(pure_classes),
        "max_product": best(lambda r: r.product),
        "max_advantage": best(lambda r: r.advantage),
        "records": [r.to_json() for r in recs],
    }


# -------------------------------------------------------------- coupler LP


class CouplerLP:
    """The LP family ``max f_{k,l|i}.x  s.t.  C x <= b, x >= 0`` over extremal effects.

    Rows of ``C``: ``1``, ``-1``, then ``-M_{k,l}`` for every ordered pair of
    nonlocal boxes in model order, where ``M_{k,l}[a][b] = <e_a, Phi_{e_b}(k,l)>``.
    """

    def __init__(self, model: StateSpaceModel, effects=None):
        from .effects import maximal_effect_space

        if model.scenario != SC22:
            raise ValueError("the coupler LP is defined for (2,2) models")
        if effects is None:
            effects = maximal_effect_space(model, tag=False).effects
        self.model = model
        self.effects = list(getattr(effects, "effects", effects))
        self.n = len(self.effects)
        self.g = model.g
        E, dens = int_rows([e.entries for e in self.effects], common=True)
        self._E = E.astype(object)
        self._eden = dens[0] if dens else 1
        self._phi = {}
        self._M = {}
        self._f = {}
        self._keys = None

    def box_position(self, box) -> int:
        """1-based position of a box label (``"PR3"``, ``"PR4p"`` or an index)."""
        if isinstance(box, int):
            return box
        lab = str(box).replace("'", "p")
        if not lab.startswith("PR"):
            lab = "PR" + lab
        return self.model.boxes.index(lab) + 1

    def index_of(self, e) -> int:
        from .effects import frame

        fr = frame(SC22)
        if self._keys is None:
            self._keys = {fr.canonical(f): j for j, f in enumerate(self.effects)}
        j = self._keys.get(fr.canonical(e))
        if j is None:
            raise KeyError("effect is not in the extremal list")
        return j

    def images(self, k: int, l: int) -> np.ndarray:
        """Rows are ``Phi_{e_j}(k,l)`` flattened, times the common denominator."""
        key = (k, l)
        if key not in self._phi:
            verts = self.model.nonlocal_vertices
            R = _mat(verts[k - 1], SC22)
            S = _mat(verts[l - 1], SC22)
            zr, dr = int_vector([v for row in R for v in row])
            zs, ds = int_vector([v for row in S for v in row])
            Rm = np.array(zr, dtype=object).reshape(4, 4)
            Sm = np.array(zs, dtype=object).reshape(4, 4)
            rows = []
            for j in range(self.n):
                Ej = self._E[j].reshape(4, 4)
                rows.append((Rm.dot(Ej)).dot(Sm).reshape(-1))
            self._phi[key] = (np.array(rows, dtype=object), self._eden * dr * ds)
        return self._phi[key]

    def M(self, k: int, l: int) -> list:
        key = (k, l)
        if key not in self._M:
            phi, pd = self.images(k, l)
            raw = self._E.dot(phi.T)
            den = self._eden * pd
            self._M[key] = [[Fraction(int(v), den) for v in row] for row in raw]
        return self._M[key]

    def M_int(self, k: int, l: int) -> tuple:
        """``(Z, den)`` with ``M(k, l) == Z / den``; int64 when it fits."""
        key = ("int", k, l)
        if key not in self._M:
            phi, pd = self.images(k, l)
            E, P = self._E, phi
            bound = int(np.abs(E).max()) * int(np.abs(P).max()) * E.shape[1] if len(E) else 0
            if bound < _SAFE:
                raw = E.astype(np.int64).dot(P.astype(np.int64).T)
            else:
                raw = E.dot(P.T)
            self._M[key] = (raw, self._eden * pd)
        return self._M[key]

    def f_int(self, k: int, l: int, i: int) -> tuple:
        f = self.f(k, l, i)
        z, d = int_vector(f)
        return np.array(z, dtype=object), d

    def zero_index(self) -> int:
        for j, e in enumerate(self.effects):
            if not any(e.entries):
                return j
        raise KeyError("the zero effect is not in the extremal list")

    def _dominated(self, Z, zden, coeff, fz, fden) -> np.ndarray:
        """Rows ``j`` with ``-coeff * Z[j] / zden >= f`` entrywise."""
        c = rat(coeff)
        lhs = Z.astype(object) * (-c.numerator * fden)
        rhs = fz * (c.denominator * zden)
        return np.all(lhs >= rhs[None, :], axis=1)

    def single_entry_ok(self, k: int, l: int, i: int, block: tuple, j: int, coeff) -> bool:
        """Does ``y = coeff`` on row ``-M_block[j]`` (zero elsewhere) satisfy ``C^T y >= f``?

        With ``b . y = 0`` and the zero effect as primal point this proves the
        optimum of ``(k, l | i)`` is exactly 0.
        """
        Z, zd = self.M_int(*block)
        fz, fd = self.f_int(k, l, i)
        return bool(self._dominated(Z[j:j + 1], zd, coeff, fz, fd)[0])

    def single_entry_search(self, k: int, l: int, i: int, coeff, limit: int = None) -> list:
        """All ``(block, j)`` giving a one-entry dual certificate with this coefficient."""
        fz, fd = self.f_int(k, l, i)
        out = []
        for blk in self.pair_order():
            Z, zd = self.M_int(*blk)
            for j in np.nonzero(self._dominated(Z, zd, coeff, fz, fd))[0]:
                out.append((blk, int(j)))
                if limit and len(out) >= limit:
                    return out
        return out

    def _row(self, r: int) -> tuple:
        n = self.n
        if r == 0:
            return [Fraction(1)] * n, Fraction(1)
        if r == 1:
            return [Fraction(-1)] * n, Fraction(-1)
        blk, j = divmod(r - 2, n)
        Z, zd = self.M_int(*self.pair_order()[blk])
        return [Fraction(-int(v), zd) for v in Z[j]], Fraction(0)

    def _violated(self, x: Sequence) -> list:
        xi, xd = int_vector(x)
        s = sum(xi)
        bad = [0] if s > xd else ([1] if s < xd else [])
        xmax = max((abs(v) for v in xi), default=0)
        for b, blk in enumerate(self.pair_order()):
            Z, _ = self.M_int(*blk)
            if Z.dtype != object and int(np.abs(Z).max(initial=0)) * xmax * self.n < _SAFE:
                lhs = Z.dot(np.array(xi, dtype=np.int64))
            else:
                lhs = Z.astype(object).dot(np.array(xi, dtype=object))
            bad.extend(2 + b * self.n + int(j) for j in np.nonzero(lhs < 0)[0])
        return bad

    def solve_implicit(self, k: int, l: int, i: int, seed: Sequence[int] = ()) -> DualCertificate:
        """Row generation over the blocks without materializing ``C``."""
        rows = self.g * self.g * self.n + 2
        return solve_with_oracle(self.f(k, l, i), self._row, self._violated, rows, [0, 1, *seed])

    def verify_sparse(self, k: int, l: int, i: int, x: Sequence, y_entries: dict) -> bool:
        """Exact primal/dual check of ``(x, y)`` with ``y`` given by its nonzero rows."""
        x = [rat(v) for v in x]
        if len(x) != self.n or any(v < 0 for v in x) or self._violated(x):
            return False
        y = {int(r): rat(v) for r, v in y_entries.items() if rat(v) != 0}
        if any(v < 0 for v in y.values()):
            return False
        lhs = [Fraction(0)] * self.n
        dual_obj = Fraction(0)
        for r, v in y.items():
            row, rhs = self._row(r)
            dual_obj += v * rhs
            for t in range(self.n):
                if row[t]:
                    lhs[t] += v * row[t]
        f = self.f(k, l, i)
        if any(a < b for a, b in zip(lhs, f)):
            return False
        return sum((a * b for a, b in zip(f, x)), Fraction(0)) == dual_obj

    def f(self, k: int, l: int, i: int) -> list:
        if (k, l, i) not in self._f:
            self._f[(k, l, i)] = self._f_raw(k, l, i)
        return self._f[(k, l, i)]

    def _f_raw(self, k: int, l: int, i: int) -> list:
        phi, pd = self.images(k, l)
        c = game(i).functional.entries
        mask = set(_unit_mask(SC22))
        func = [c[t] - (Fraction(3, 4) if t in mask else 0) for t in range(16)]
        fz, fd = int_vector(func)
        raw = phi.dot(np.array(fz, dtype=object))
        return [Fraction(int(v), fd * pd) for v in raw]

    def pair_order(self) -> list:
        return [(k, l) for k in range(1, self.g + 1) for l in range(1, self.g + 1)]

    def row_index(self, k: int, l: int, j: int) -> int:
        """0-based row of ``C`` holding ``-M_{k,l}[j]``."""
        return 2 + ((k - 1) * self.g + (l - 1)) * self.n + j

    def problem(self, k: int, l: int, i: int) -> LPProblem:
        n = self.n
        C = [[Fraction(1)] * n, [Fraction(-1)] * n]
        b = [Fraction(1), Fraction(-1)]
        for (kk, ll) in self.pair_order():
            for row in self.M(kk, ll):
                C.append([-v for v in row])
                b.append(Fraction(0))
        return LPProblem(self.f(k, l, i), C, b)

    def solve(self, k: int, l: int, i: int) -> DualCertificate:
        return solve(self.problem(k, l, i), seed_rows=[0, 1])

    def check_certificate(self, k: int, l: int, i: int, x: Sequence, y_entries: dict) -> dict:
        """Verify a sparse primal/dual pair; ``y_entries`` maps row index to value."""
        p = self.problem(k, l, i)
        y = [Fraction(0)] * len(p.b)
        for r, v in y_entries.items():
            y[r] = rat(v)
        x = [rat(v) for v in x]
        ok = verify_certificate(p, x, y)
        value = sum((a * v for a, v in zip(p.f, x)), Fraction(0))
        return {"verified": ok, "value": value, "shape": [len(p.b), self.n]}
