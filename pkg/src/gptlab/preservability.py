"""Minimal 2-preservability of effects and the certificates built on it.

An effect is weakly preserving when every way of applying it to two systems
of a product of two model states leaves a sub-normalized model state.  It is
minimal when its complement is weakly preserving as well.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from fractions import Fraction
from typing import Optional, Sequence

from .coupling import PairScanner
from .exactnum import Surd2, fmt_rat, int_rows, rat, surd_cmp
from .scenario import SC22, ProbTable, StateSpaceModel, build_model, classify_pr_subsets, BOX_IDS

__all__ = [
    "PreservabilityRecord",
    "PreservabilityChecker",
    "is_weak_min2",
    "is_min2",
    "preservability_report",
    "party_symmetric_models",
    "tsirelson_check",
    "TheoremViolation",
    "certificate_rows",
    "certificate_model",
    "certify_no_couplers",
    "ALPHA_GRID",
]


@dataclass
class PreservabilityRecord:
    effect: ProbTable
    weak: bool
    minimal: Optional[bool] = None
    placement: Optional[str] = None
    pair: Optional[tuple] = None
    facet: Optional[int] = None
    complement_failure: Optional[tuple] = None

    def to_json(self) -> dict:
        return {
            "effect": [fmt_rat(v) for v in self.effect.entries],
            "weak": self.weak,
            "minimal": self.minimal,
            "placement": self.placement,
            "pair": list(self.pair) if self.pair else None,
            "facet": self.facet,
        }


class PreservabilityChecker:
    """Batched weak/minimal decisions for one model.

    Placements: ``outer`` (the effect on one whole state, which only needs
    ``0 <= <e, v> <= 1``), ``middle`` (one system of each state) and, when
    the model is not closed under exchanging parties, ``middle-swapped``.
    """

    def __init__(self, model: StateSpaceModel):
        self.model = model
        self.scan = PairScanner(model)
        self.placements = ["outer", "middle"]
        if not model.party_symmetric:
            self.placements.append("middle-swapped")
        V, dens = int_rows([v.entries for v in model.vertices], common=True)
        self._V = V.astype(object)
        self._vden = int(dens[0])
        self._unit = model.unit

    def complement(self, e) -> ProbTable:
        ents = e.entries if isinstance(e, ProbTable) else tuple(rat(v) for v in e)
        return ProbTable(self.model.scenario, tuple(u - x for u, x in zip(self._unit.entries, ents)),
                         "effect")

    def _outer(self, effects: Sequence) -> list:
        E, dens = int_rows([e.entries for e in effects], common=True)
        vals = self._V.dot(E.astype(object).T)
        top = self._vden * int(dens[0])
        out = []
        for t in range(len(effects)):
            col = vals[:, t]
            bad = next((i for i, v in enumerate(col) if v < 0 or v > top), None)
            out.append(bad)
        return out

    def weak_details(self, effects: Sequence) -> list:
        """Per effect: ``None`` when weakly preserving, else ``(placement, pair, facet)``."""
        effects = [e if isinstance(e, ProbTable) else ProbTable(self.model.scenario, e, "effect")
                   for e in effects]
        if not effects:
            return []
        fails: list = [None] * len(effects)
        for t, bad in enumerate(self._outer(effects)):
            if bad is not None:
                fails[t] = ("outer", (f"V{bad}",), None)
        if self.model.g == 0:
            return fails
        pairs = self.scan.pairs()
        for placement in self.placements[1:]:
            todo = [t for t in range(len(effects)) if fails[t] is None]
            if not todo:
                break
            for start in range(0, len(todo), 2048):
                idx = todo[start:start + 2048]
                phi, w, den = self.scan.images([effects[t] for t in idx],
                                               transpose=(placement == "middle-swapped"))
                T, P, D = phi.shape
                viol = self.scan.model_facets.first_violations(
                    phi.reshape(T * P, D), w.reshape(T * P)).reshape(T, P)
                for r, t in enumerate(idx):
                    for p in range(P):
                        if viol[r, p] >= 0 or w[r, p] < 0:
                            a, b = pairs[p]
                            fails[t] = (placement, (self.scan.label(a), self.scan.label(b)),
                                        int(viol[r, p]))
                            break
        return fails

    def flags(self, effects: Sequence) -> list:
        """``(weak, minimal)`` for each effect."""
        effects = list(effects)
        d1 = self.weak_details(effects)
        need = [t for t, d in enumerate(d1) if d is None]
        d2 = self.weak_details([self.complement(effects[t]) for t in need])
        out = [(False, False)] * len(effects)
        for t, d in zip(need, d2):
            out[t] = (True, d is None)
        return out

    def check(self, e, minimal: bool = True) -> PreservabilityRecord:
        e = e if isinstance(e, ProbTable) else ProbTable(self.model.scenario, e, "effect")
        d = self.weak_details([e])[0]
        if d is not None:
            return PreservabilityRecord(e, False, False if minimal else None, d[0], d[1], d[2])
        rec = PreservabilityRecord(e, True)
        if minimal:
            dc = self.weak_details([self.complement(e)])[0]
            rec.minimal = dc is None
            rec.complement_failure = dc
        return rec


def is_weak_min2(e, m: StateSpaceModel) -> PreservabilityRecord:
    return PreservabilityChecker(m).check(e, minimal=False)


def is_min2(e, m: StateSpaceModel) -> PreservabilityRecord:
    return PreservabilityChecker(m).check(e, minimal=True)


def preservability_report(m: StateSpaceModel, effects) -> dict:
    effects = list(getattr(effects, "effects", effects))
    flags = PreservabilityChecker(m).flags(effects)
    weak = sum(1 for w, _ in flags if w)
    minimal = sum(1 for _, mn in flags if mn)
    return {
        "model": m.name,
        "alpha": fmt_rat(m.alpha),
        "total": len(effects),
        "weak": weak,
        "minimal": minimal,
        "weak_not_minimal": weak - minimal,
    }


# ----------------------------------------------------------- Tsirelson


def party_symmetric_models(g: int, alpha) -> list:
    """One party-symmetric model per relabelling class of ``g`` PR boxes."""
    if g == 0:
        return [build_model(SC22, [], alpha)]
    out = []
    swap = {1: 1, 2: 2, 3: 8, 4: 7, 5: 5, 6: 6, 7: 4, 8: 3}
    for cl in classify_pr_subsets(g, party_symmetric_only=True):
        rep = next(s for s in cl.members if {swap[i] for i in s} == set(s))
        out.append(build_model(SC22, [BOX_IDS[i - 1] for i in rep], alpha))
    return out


class TsirelsonMismatch(AssertionError):
    pass


def tsirelson_check(g: int, alpha, models: Sequence = None) -> dict:
    """Compare "every extremal effect is minimal" with the Tsirelson bound on states.

    The state side uses the largest CHSH score over all vertices, i.e.
    ``(1+2 alpha)/4`` on a noisy PR box, against ``1/2 + sqrt(2)/4``.
    """
    from .effects import maximal_effect_space

    a = rat(alpha)
    models = list(models) if models is not None else party_symmetric_models(g, a)
    rows = []
    for m in models:
        es = maximal_effect_space(m, tag=False)
        checker = PreservabilityChecker(m)
        flags = checker.flags(es.effects)
        all_min = all(mn for _, mn in flags)
        best = _max_vertex_chsh(m)
        ok = surd_cmp(Surd2(best, 0), Surd2(Fraction(1, 2), Fraction(1, 4))) <= 0
        if m.g >= 1 and m.g <= 7 and all_min != ok:
            raise TsirelsonMismatch(f"{m.name} at alpha={fmt_rat(a)}: all_min2={all_min}, chsh_ok={ok}")
        if m.g == 8 and not all_min:
            raise TsirelsonMismatch(f"{m.name}: expected every effect to be minimal")
        rows.append({"model": m.name, "all_min2": all_min, "chsh_max": fmt_rat(best),
                     "chsh_max_ok": ok, "effects": len(es)})
    return {
        "g": g,
        "alpha": fmt_rat(a),
        "all_min2": all(r["all_min2"] for r in rows),
        "chsh_max_ok": all(r["chsh_max_ok"] for r in rows),
        "models": rows,
    }


def _max_vertex_chsh(m: StateSpaceModel) -> Fraction:
    from .coupling import chsh_scores

    return max(max(chsh_scores(v, m.scenario).values()) for v in m.vertices)


# ------------------------------------------------------- no-coupler LPs

ALPHA_GRID = (Fraction(22, 30), Fraction(25, 30), Fraction(28, 30), Fraction(1))


class TheoremViolation(AssertionError):
    pass


def _fixture() -> dict:
    return json.loads(resources.files("gptlab.data").joinpath("no_coupler_certificates.json").read_text())


def certificate_rows(key: str = None) -> list:
    """Tabulated ``(pair, game)`` rows with their printed certificates; ``key`` is ``"g:class"``."""
    rows = _fixture()["rows"]
    return [r for r in rows if key is None or f"{r['g']}:{r['cls']}" == key]


def certificate_model(key: str, alpha) -> StateSpaceModel:
    boxes = _fixture()["models"][key]
    return build_model(SC22, boxes, rat(alpha))


def _theta(weight: str, a: Fraction) -> Fraction:
    if weight == "theta'":
        return Fraction(2) / (2 * a * a + 1)
    return 3 * a * (a + 1) / (4 * a * (a + 1) - 2)


def _named_effect(lp, spec: dict, a: Fraction):
    """Index of ``e_CH_k`` (noise-scaled when tagged) or its complement; None if absent."""
    from .effects import ch_effect, ch_effect_noisy, unit_effect

    e = ch_effect_noisy(spec["ch"], a) if spec["alpha"] else ch_effect(spec["ch"])
    if spec["prime"]:
        e = unit_effect() - e
    try:
        return lp.index_of(e)
    except KeyError:
        return None


def _block(lp, labels, reading: str):
    """Resolve printed ``M`` subscripts either as box labels or as 1-based positions."""
    if reading == "label":
        try:
            return tuple(lp.box_position(b) for b in labels)
        except ValueError:
            return None
    pos = tuple(int(b[2]) for b in labels)
    return pos if max(pos) <= lp.g else None


def _certify_row(lp, row: dict, a: Fraction, solve_lp: bool) -> dict:
    from .coupling import GAME_LABELS

    k, l = (lp.box_position(b) for b in row["pair"])
    i = GAME_LABELS.index(row["game"]) + 1
    d = row["dual"]
    coeff = Fraction(1, 2) if d["coeff"] == "1/2" else (1 + 2 * a) / 4
    zero = lp.zero_index()
    x0 = [Fraction(0)] * lp.n
    x0[zero] = Fraction(1)

    j = _named_effect(lp, d, a)
    printed = None
    if j is not None:
        for reading in ("label", "position"):
            blk = _block(lp, d["M"], reading)
            if blk and lp.single_entry_ok(k, l, i, blk, j, coeff):
                printed = reading
                break

    # the printed primal: weights theta on the named effect and 1-theta on u
    th = _theta(row["weight"], a)
    je = _named_effect(lp, row["effect"], a)
    ju = lp.index_of(lp.model.unit)
    primal_ok = False
    if je is not None and th <= 1:
        xp = [Fraction(0)] * lp.n
        xp[je] += th
        xp[ju] += 1 - th
        primal_ok = not lp._violated(xp) and sum(
            (f * v for f, v in zip(lp.f(k, l, i), xp)), Fraction(0)) == 0

    # an exact single-entry dual proves optimum 0 together with the zero effect
    found = None
    if printed:
        found = (blk, j, coeff)
    else:
        for c in (coeff, Fraction(1, 2), (1 + 2 * a) / 4):
            hits = lp.single_entry_search(k, l, i, c, limit=1)
            if hits:
                found = (hits[0][0], hits[0][1], c)
                break
    out = {
        "pair": row["pair"],
        "game": row["game"],
        "printed_dual": printed,
        "printed_primal": primal_ok,
        "theta": fmt_rat(th),
    }
    value = None
    if found:
        blk, jj, c = found
        r = lp.row_index(*blk, jj)
        if not lp.verify_sparse(k, l, i, x0, {r: c}):
            raise AssertionError("single-entry certificate failed the exact recheck")
        value = Fraction(0)
        out["certificate"] = {"block": [lp.model.boxes[blk[0] - 1], lp.model.boxes[blk[1] - 1]],
                              "effect_index": jj, "y": fmt_rat(c), "x_index": zero}
    if solve_lp or not found:
        cert = lp.solve_implicit(k, l, i)
        ye = {r: v for r, v in enumerate(cert.y) if v}
        if not lp.verify_sparse(k, l, i, cert.x, ye):
            raise AssertionError("LP certificate failed the exact recheck")
        if value is not None and cert.value != value:
            raise AssertionError("LP optimum disagrees with the certificate")
        value = cert.value
        out["lp_dual_support"] = {str(r): fmt_rat(v) for r, v in ye.items()}
    out["optimum"] = fmt_rat(value)
    return out


def certify_no_couplers(keys=None, alphas=ALPHA_GRID, solve_lp: bool = True, progress=None) -> dict:
    """Certify that no tabulated ``(pair, game)`` LP has positive optimum.

    ``keys`` are ``"g:class"`` strings (default: every tabulated class).  Each
    row is settled twice when ``solve_lp``: by an exact one-entry dual
    certificate and by solving the LP.  Printed certificates are checked
    separately and reported, never used to decide the optimum.
    """
    from .coupling import CouplerLP

    grouped = defaultdict(list)
    for r in certificate_rows():
        grouped[f"{r['g']}:{r['cls']}"].append(r)
    keys = list(grouped) if keys is None else list(keys)
    bundle = []
    for key in keys:
        for a in (rat(v) for v in alphas):
            m = certificate_model(key, a)
            lp = CouplerLP(m)
            res = [_certify_row(lp, r, a, solve_lp) for r in grouped[key]]
            bad = [r for r in res if Fraction(r["optimum"]) > 0]
            if bad:
                raise TheoremViolation(f"{key} at alpha={fmt_rat(a)}: positive optimum for {bad[0]}")
            bundle.append({
                "key": key,
                "model": m.name,
                "alpha": fmt_rat(a),
                "n": lp.n,
                "shape": [lp.g * lp.g * lp.n + 2, lp.n],
                "rows": res,
            })
            if progress:
                progress(bundle[-1])
    rows = [r for b in bundle for r in b["rows"]]
    return {
        "instances": len(rows),
        "all_zero": all(Fraction(r["optimum"]) == 0 for r in rows),
        "printed_dual_verified": sum(1 for r in rows if r["printed_dual"]),
        "printed_dual_by_label": sum(1 for r in rows if r["printed_dual"] == "label"),
        "printed_dual_by_position": sum(1 for r in rows if r["printed_dual"] == "position"),
        "printed_primal_verified": sum(1 for r in rows if r["printed_primal"]),
        "bundle": bundle,
    }
