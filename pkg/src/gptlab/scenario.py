"""Bell scenarios, probability tables, relabellings and state-space models.

Layout: a table for ``k`` parties with ``m`` inputs and ``n`` outputs each is
a flat row-major tensor with one axis of extent ``m*n`` per party; the local
index of ``(x, a)`` is ``x*n + a``.  For two parties this is the familiar
block matrix with Alice's ``(x, a)`` on rows and Bob's ``(y, b)`` on columns.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .exactnum import FlatTensor, dot, fmt_rat, independent_subset, int_vector, rat, tensor
from .polytope import HRep, VRep, enumerate_facets, satisfies
from .lp import convex_combination

__all__ = [
    "Scenario",
    "ProbTable",
    "Relabelling",
    "StateSpaceModel",
    "BOX_IDS",
    "SC22",
    "SC32",
    "local_deterministic_states",
    "pr_box",
    "noisy_pr",
    "n_box",
    "uniform_state",
    "apply_relabelling",
    "group",
    "party_swap",
    "orbit_key",
    "stabilizer",
    "classify_orbits",
    "classify_pr_subsets",
    "ns_hrep",
    "local_facets",
    "facet_types",
    "local_violations",
    "build_model",
    "parse_model_id",
    "model_from_id",
    "qubit_prob_state",
    "box_table",
]


@dataclass(frozen=True)
class Scenario:
    parties: int = 2
    m: int = 2
    n: int = 2

    def __post_init__(self):
        if min(self.parties, self.m, self.n) < 1:
            raise ValueError("scenario sizes must be positive")

    @property
    def local_dim(self) -> int:
        return self.m * self.n

    @property
    def size(self) -> int:
        return self.local_dim ** self.parties

    @property
    def shape(self) -> tuple:
        return (self.local_dim,) * self.parties

    @property
    def tag(self) -> str:
        return f"{self.m}{self.n}"


SC22 = Scenario(2, 2, 2)
SC32 = Scenario(2, 3, 2)


@dataclass(frozen=True)
class ProbTable:
    scenario: Scenario
    entries: tuple
    role: str = "state"

    def __post_init__(self):
        ents = tuple(rat(e) for e in self.entries)
        if len(ents) != self.scenario.size:
            raise ValueError(f"expected {self.scenario.size} entries, got {len(ents)}")
        if self.role not in ("state", "effect", "functional"):
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "entries", ents)

    @classmethod
    def from_matrix(cls, sc: Scenario, rows, scale=1, role="state") -> "ProbTable":
        s = rat(scale)
        return cls(sc, tuple(s * rat(v) for r in rows for v in r), role)

    @property
    def tensor(self) -> FlatTensor:
        return FlatTensor(self.entries, self.scenario.shape)

    def matrix(self) -> list:
        return self.tensor.matrix()

    def with_role(self, role: str) -> "ProbTable":
        return ProbTable(self.scenario, self.entries, role)

    def __add__(self, other: "ProbTable") -> "ProbTable":
        return ProbTable(self.scenario, tuple(a + b for a, b in zip(self.entries, other.entries)),
                         self.role)

    def __sub__(self, other: "ProbTable") -> "ProbTable":
        return ProbTable(self.scenario, tuple(a - b for a, b in zip(self.entries, other.entries)),
                         self.role)

    def scale(self, c) -> "ProbTable":
        c = rat(c)
        return ProbTable(self.scenario, tuple(c * e for e in self.entries), self.role)

    def dot(self, other) -> Fraction:
        oe = other.entries if isinstance(other, ProbTable) else other
        return dot(self.entries, oe)

    def transpose(self) -> "ProbTable":
        return apply_relabelling(party_swap(self.scenario), self)

    def block_sums(self) -> dict:
        """Sum of each input block, keyed by the input tuple."""
        sc = self.scenario
        out = {}
        for xs in itertools.product(range(sc.m), repeat=sc.parties):
            tot = Fraction(0)
            for outs in itertools.product(range(sc.n), repeat=sc.parties):
                tot += self.entries[_flat(sc, xs, outs)]
            out[xs] = tot
        return out

    def is_state(self) -> bool:
        sc = self.scenario
        if any(e < 0 for e in self.entries):
            return False
        if any(v != 1 for v in self.block_sums().values()):
            return False
        return no_signalling(self)

    def __str__(self):
        rows = self.matrix() if self.scenario.parties > 1 else [self.entries]
        return "\n".join(" ".join(fmt_rat(v) for v in r) for r in rows)


def _flat(sc: Scenario, xs, outs) -> int:
    idx = 0
    for x, a in zip(xs, outs):
        idx = idx * sc.local_dim + x * sc.n + a
    return idx


def no_signalling(t: ProbTable) -> bool:
    """Marginals of every party subset are independent of the other inputs."""
    sc = t.scenario
    k = sc.parties
    for keep in range(k):
        # marginal of all parties but `keep`, for each input of `keep`
        for xs_rest in itertools.product(range(sc.m), repeat=k - 1):
            for outs_rest in itertools.product(range(sc.n), repeat=k - 1):
                vals = set()
                for x in range(sc.m):
                    xs = xs_rest[:keep] + (x,) + xs_rest[keep:]
                    tot = Fraction(0)
                    for a in range(sc.n):
                        outs = outs_rest[:keep] + (a,) + outs_rest[keep:]
                        tot += t.entries[_flat(sc, xs, outs)]
                    vals.add(tot)
                if len(vals) > 1:
                    return False
    return True


# ----------------------------------------------------------- constructors


def local_deterministic_states(sc: Scenario) -> list[ProbTable]:
    """All deterministic tables, ordered lexicographically by output tuples."""
    singles = []
    for outs in itertools.product(range(sc.n), repeat=sc.m):
        v = [0] * sc.local_dim
        for x, a in enumerate(outs):
            v[x * sc.n + a] = 1
        singles.append(FlatTensor(v, (sc.local_dim,)))
    out = []
    for combo in itertools.product(singles, repeat=sc.parties):
        t = FlatTensor.scalar(1)
        for s in combo:
            t = tensor(t, s)
        out.append(ProbTable(sc, t.entries))
    return out


_PR_ROWS = {
    1: ["1010", "0101", "1001", "0110"],
    2: ["0110", "1001", "1010", "0101"],
    3: ["1001", "0110", "1010", "0101"],
    4: ["0101", "1010", "1001", "0110"],
    5: ["0101", "1010", "0110", "1001"],
    6: ["1001", "0110", "0101", "1010"],
    7: ["0110", "1001", "0101", "1010"],
    8: ["1010", "0101", "0110", "1001"],
}

BOX_IDS = ["PR1", "PR2", "PR3", "PR4", "PR1p", "PR2p", "PR3p", "PR4p"]

_N_ROWS = {
    1: ["101001", "010101", "100101", "011001", "000000", "111102"],
    2: ["101001", "010110", "100101", "011010", "010101", "101010"],
    3: ["101010", "010101", "100110", "011001", "101010", "010101"],
    4: ["101010", "010101", "100101", "011010", "000000", "111111"],
}


def _rows(spec: list[str]) -> list[list[int]]:
    return [[int(c) for c in r] for r in spec]


def box_index(box) -> int:
    if isinstance(box, int):
        if not 1 <= box <= 8:
            raise ValueError(f"PR box index {box} outside 1..8")
        return box
    if box in BOX_IDS:
        return BOX_IDS.index(box) + 1
    raise ValueError(f"unknown PR box {box!r}")


def pr_box(i) -> ProbTable:
    return ProbTable.from_matrix(SC22, _rows(_PR_ROWS[box_index(i)]), Fraction(1, 2))


def uniform_state(sc: Scenario) -> ProbTable:
    return ProbTable(sc, (Fraction(1, sc.n ** sc.parties),) * sc.size)


def noisy_pr(i, alpha) -> ProbTable:
    a = rat(alpha)
    if not Fraction(1, 2) <= a <= 1:
        raise ValueError(f"alpha={a} outside [1/2, 1]")
    return pr_box(i).scale(a) + uniform_state(SC22).scale(1 - a)


def n_box(j: int) -> ProbTable:
    if j not in _N_ROWS:
        raise ValueError(f"N-box index {j} outside 1..4")
    return ProbTable.from_matrix(SC32, _rows(_N_ROWS[j]), Fraction(1, 2))


def box_table(box: str, alpha=1) -> ProbTable:
    """Table for an identifier ``PR1``..``PR4p`` or ``N1``..``N4``."""
    if box.startswith("N"):
        if rat(alpha) != 1:
            raise ValueError("N boxes are only defined without noise")
        return n_box(int(box[1:]))
    return noisy_pr(box, alpha)


def qubit_prob_state(bloch) -> ProbTable:
    r = [rat(v) for v in bloch]
    if len(r) != 3:
        raise ValueError("need three Bloch components")
    if sum(v * v for v in r) > 1:
        raise ValueError("Bloch vector outside the unit ball")
    half = Fraction(1, 2)
    ents = []
    for v in r:
        ents += [half * (1 + v), half * (1 - v)]
    return ProbTable(Scenario(1, 3, 2), ents)


# ------------------------------------------------------------ relabelling


@dataclass(frozen=True)
class Relabelling:
    """``party_perm[p]`` is the slot receiving party ``p``; local maps act first."""

    scenario: Scenario
    party_perm: tuple
    input_perm: tuple
    output_perm: tuple

    @classmethod
    def identity(cls, sc: Scenario) -> "Relabelling":
        k = sc.parties
        return cls(sc, tuple(range(k)), tuple(tuple(range(sc.m)) for _ in range(k)),
                   tuple(tuple(tuple(range(sc.n)) for _ in range(sc.m)) for _ in range(k)))

    @cached_property
    def perm(self) -> np.ndarray:
        """Flat index map: the image has ``out[perm[i]] = t[i]``."""
        sc = self.scenario
        k, L = sc.parties, sc.local_dim
        local = []
        for p in range(k):
            mp = [0] * L
            for x in range(sc.m):
                for a in range(sc.n):
                    mp[x * sc.n + a] = self.input_perm[p][x] * sc.n + self.output_perm[p][x][a]
            local.append(mp)
        out = np.empty(sc.size, dtype=np.int64)
        for i, digits in enumerate(itertools.product(range(L), repeat=k)):
            slots = [0] * k
            for p in range(k):
                slots[self.party_perm[p]] = local[p][digits[p]]
            j = 0
            for s in slots:
                j = j * L + s
            out[i] = j
        return out

    @cached_property
    def gather(self) -> np.ndarray:
        """Inverse map: image = t[gather]."""
        g = np.empty_like(self.perm)
        g[self.perm] = np.arange(len(self.perm))
        return g

    def compose(self, other: "Relabelling") -> "Relabelling":
        """``self ∘ other``: apply ``other`` first."""
        sc = self.scenario
        pp, ip, op = [], [], []
        for p in range(sc.parties):
            q = other.party_perm[p]
            pp.append(self.party_perm[q])
            ip.append(tuple(self.input_perm[q][other.input_perm[p][x]] for x in range(sc.m)))
            op.append(tuple(
                tuple(self.output_perm[q][other.input_perm[p][x]][other.output_perm[p][x][a]]
                      for a in range(sc.n))
                for x in range(sc.m)))
        return Relabelling(sc, tuple(pp), tuple(ip), tuple(op))

    def inverse(self) -> "Relabelling":
        sc = self.scenario
        k = sc.parties
        pp = [0] * k
        ip = [None] * k
        op = [None] * k
        for p in range(k):
            q = self.party_perm[p]
            pp[q] = p
            inv_x = [0] * sc.m
            for x in range(sc.m):
                inv_x[self.input_perm[p][x]] = x
            ip[q] = tuple(inv_x)
            outs = [None] * sc.m
            for x in range(sc.m):
                inv_a = [0] * sc.n
                for a in range(sc.n):
                    inv_a[self.output_perm[p][x][a]] = a
                outs[self.input_perm[p][x]] = tuple(inv_a)
            op[q] = tuple(outs)
        return Relabelling(sc, tuple(pp), tuple(ip), tuple(op))

    def is_local(self) -> bool:
        return self.party_perm == tuple(range(self.scenario.parties))


def apply_relabelling(r: Relabelling, t):
    if isinstance(t, ProbTable):
        if t.scenario != r.scenario:
            raise ValueError("scenario mismatch")
        ents = t.entries
        return ProbTable(t.scenario, tuple(ents[j] for j in r.gather), t.role)
    return tuple(t[j] for j in r.gather)


def party_swap(sc: Scenario) -> Relabelling:
    if sc.parties != 2:
        raise ValueError("party swap is defined for two parties")
    ident = Relabelling.identity(sc)
    return Relabelling(sc, (1, 0), ident.input_perm, ident.output_perm)


_GROUP_CACHE: dict = {}


def group(sc: Scenario, subgroup: str = "full") -> list[Relabelling]:
    """All relabellings (``full``) or only local ones (``local``)."""
    key = (sc, subgroup)
    if key in _GROUP_CACHE:
        return _GROUP_CACHE[key]
    if subgroup not in ("full", "local"):
        raise ValueError(f"unknown subgroup {subgroup!r}")
    k = sc.parties
    per_party = []
    for ip in itertools.permutations(range(sc.m)):
        for op in itertools.product(list(itertools.permutations(range(sc.n))), repeat=sc.m):
            per_party.append((ip, op))
    parties = [tuple(range(k))]
    if subgroup == "full":
        parties = list(itertools.permutations(range(k)))
    out = []
    for pp in parties:
        for combo in itertools.product(per_party, repeat=k):
            out.append(Relabelling(sc, tuple(pp), tuple(c[0] for c in combo),
                                   tuple(c[1] for c in combo)))
    _GROUP_CACHE[key] = out
    return out


def gather_matrix(sc: Scenario, subgroup: str = "full") -> np.ndarray:
    key = (sc, subgroup, "gather")
    if key not in _GROUP_CACHE:
        _GROUP_CACHE[key] = np.stack([g.gather for g in group(sc, subgroup)])
    return _GROUP_CACHE[key]


def stabilizer(vertices: Sequence, sc: Scenario) -> np.ndarray:
    """Gather matrix of the relabellings that permute ``vertices`` among themselves."""
    vs = {_entries(v) for v in vertices}
    rows = []
    for g in group(sc, "full"):
        if all(tuple(v[j] for j in g.gather) in vs for v in vs):
            rows.append(g.gather)
    return np.stack(rows)


# ------------------------------------------------------------------ orbits


def _lexmin_row(rows: np.ndarray) -> np.ndarray:
    """Lexicographically least row, by successive column filtering."""
    cand = rows
    for c in range(rows.shape[1]):
        col = cand[:, c]
        lo = col.min()
        cand = cand[col == lo]
        if len(cand) == 1:
            break
    return cand[0]


def orbit_key(vec: Sequence, sc: Scenario, subgroup="full") -> tuple:
    """Canonical key: lexicographically least image of ``vec``.

    ``subgroup`` is ``"full"``, ``"local"`` or an explicit gather matrix.
    """
    z, den = int_vector(vec)
    arr = np.array(z, dtype=object if max(map(abs, z), default=0) > 2 ** 62 else np.int64)
    gm = subgroup if isinstance(subgroup, np.ndarray) else gather_matrix(sc, subgroup)
    imgs = arr[gm]
    best = _lexmin_row(imgs)
    return tuple(Fraction(int(v), den) for v in best)


@dataclass
class OrbitClass:
    representative: tuple
    members: list
    party_symmetric: Optional[bool] = None

    @property
    def size(self) -> int:
        return len(self.members)


def _entries(item):
    if isinstance(item, ProbTable):
        return item.entries
    return tuple(rat(v) for v in item)


def classify_orbits(items: Sequence, sc: Scenario, subgroup="full") -> list[OrbitClass]:
    """Partition ``items`` (tables or vectors) into relabelling classes.

    Classes are ordered by representative; members keep input order.
    """
    buckets: dict = {}
    for idx, it in enumerate(items):
        key = orbit_key(_entries(it), sc, subgroup)
        buckets.setdefault(key, []).append(idx)
    return [OrbitClass(k, buckets[k]) for k in sorted(buckets)]


def classify_pr_subsets(g: int, party_symmetric_only: bool = False,
                        subgroup: str = "full") -> list[OrbitClass]:
    """Classes of ``g``-element sets of PR boxes under relabellings.

    The default group includes the exchange of parties; ``subgroup="local"``
    gives the finer classification by local relabellings alone.  A class is
    flagged party symmetric when one of its members is closed under
    exchanging the parties.
    """
    if not 1 <= g <= 8:
        raise ValueError("g must lie in 1..8")
    boxes = [np.array(int_vector(pr_box(i).entries)[0]) for i in range(1, 9)]
    key_of = {tuple(b.tolist()): i for i, b in enumerate(boxes, 1)}
    loc = group(SC22, subgroup)

    def image(rel, i):
        return key_of[tuple(boxes[i - 1][rel.gather].tolist())]

    actions = [[image(rel, i) for i in range(1, 9)] for rel in loc]
    swap = party_swap(SC22)
    swap_img = {i: image(swap, i) for i in range(1, 9)}
    seen: dict = {}
    classes: list[OrbitClass] = []
    for subset in itertools.combinations(range(1, 9), g):
        if subset in seen:
            continue
        orbit = sorted({tuple(sorted(act[i - 1] for i in subset)) for act in actions})
        for s in orbit:
            seen[s] = len(classes)
        sym = any(set(swap_img[i] for i in s) == set(s) for s in orbit)
        classes.append(OrbitClass(orbit[0], orbit, sym))
    if party_symmetric_only:
        classes = [c for c in classes if c.party_symmetric]
    return classes


# ------------------------------------------------------------ polytopes


def ns_hrep(sc: Scenario) -> HRep:
    """Positivity, normalization and no-signalling for two parties."""
    if sc.parties != 2:
        raise ValueError("no-signalling H-rep implemented for two parties")
    D, m, n = sc.size, sc.m, sc.n
    L = sc.local_dim

    def e(idx_list, signs=None):
        v = [0] * D
        for k, i in enumerate(idx_list):
            v[i] += 1 if signs is None else signs[k]
        return v

    ineq = []
    for i in range(D):
        v = [0] * D
        v[i] = 1
        ineq.append((v, 0, ">="))
    eqs = []
    for x in range(m):
        for y in range(m):
            eqs.append((e([_flat(sc, (x, y), (a, b)) for a in range(n) for b in range(n)]), 1))
    for x in range(m):
        for a in range(n):
            for y in range(1, m):
                v = [0] * D
                for b in range(n):
                    v[_flat(sc, (x, 0), (a, b))] += 1
                    v[_flat(sc, (x, y), (a, b))] -= 1
                eqs.append((v, 0))
    for y in range(m):
        for b in range(n):
            for x in range(1, m):
                v = [0] * D
                for a in range(n):
                    v[_flat(sc, (0, y), (a, b))] += 1
                    v[_flat(sc, (x, y), (a, b))] -= 1
                eqs.append((v, 0))
    return HRep(ineq, eqs)


_FACET_CACHE: dict = {}


def local_facets(sc: Scenario) -> HRep:
    if sc not in _FACET_CACHE:
        _FACET_CACHE[sc] = enumerate_facets(VRep([s.entries for s in local_deterministic_states(sc)]))
    return _FACET_CACHE[sc]


_LOCAL_KIND: dict = {}


def _tight_key(a, b, pts) -> frozenset:
    return frozenset(i for i, v in enumerate(pts) if dot(a, v) == b)


def _local_kinds(sc: Scenario) -> tuple:
    # a local facet is typed by how many deterministic states saturate it
    if sc not in _LOCAL_KIND:
        ld = [s.entries for s in local_deterministic_states(sc)]
        typed = []
        for a, b, _ in local_facets(sc).inequalities:
            key = _tight_key(a, b, ld)
            typed.append((a, b, key))
        order = sorted({len(k) for _, _, k in typed}, reverse=True)
        names = ["positivity", "ch", "i3322"]
        rows = [(a, b, names[order.index(len(k))]) for a, b, k in typed]
        _LOCAL_KIND[sc] = (ld, rows, {k: names[order.index(len(k))] for _, _, k in typed})
    return _LOCAL_KIND[sc]


def facet_types(m: "StateSpaceModel") -> dict:
    """Count the model's facets by the local facet they coincide with.

    Positivity, CH and (with three inputs) I3322 facets of the local polytope
    differ in how many deterministic states saturate them.  Facets not shared
    with the local polytope are counted as ``new``.
    """
    ld, _, kinds = _local_kinds(m.scenario)
    out = {"positivity": 0, "ch": 0, "i3322": 0, "new": 0}
    for a, b, _ in m.facets.inequalities:
        out[kinds.get(_tight_key(a, b, ld), "new")] += 1
    return out


def local_violations(t: ProbTable) -> dict:
    """How many local facets of each type the table violates."""
    _, rows, _ = _local_kinds(t.scenario)
    out = {"positivity": 0, "ch": 0, "i3322": 0}
    for a, b, kind in rows:
        if dot(a, t.entries) > b:
            out[kind] += 1
    return out


@dataclass
class StateSpaceModel:
    scenario: Scenario
    vertices: list
    g: int
    alpha: Fraction
    boxes: list
    party_symmetric: bool
    name: str = ""
    warnings: list = field(default_factory=list)
    _facets: Optional[HRep] = None

    @property
    def nonlocal_vertices(self) -> list:
        return self.vertices[len(self.vertices) - self.g:] if self.g else []

    @property
    def local_vertices(self) -> list:
        return self.vertices[: len(self.vertices) - self.g]

    @property
    def facets(self) -> HRep:
        if self._facets is None:
            if self.g == 0:
                self._facets = local_facets(self.scenario)
            else:
                self._facets = enumerate_facets(VRep([v.entries for v in self.vertices]))
        return self._facets

    def contains(self, t, scale=1) -> bool:
        ents = t.entries if isinstance(t, ProbTable) else t
        return satisfies(self.facets, ents, scale)

    @cached_property
    def span_basis(self) -> list:
        idx = independent_subset([v.entries for v in self.vertices])
        return [self.vertices[i] for i in idx]

    @cached_property
    def unit(self) -> ProbTable:
        """Unit effect representative: indicator of the first input block."""
        sc = self.scenario
        v = [0] * sc.size
        zeros = (0,) * sc.parties
        for outs in itertools.product(range(sc.n), repeat=sc.parties):
            v[_flat(sc, zeros, outs)] = 1
        return ProbTable(sc, v, "effect")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "scenario": [self.scenario.parties, self.scenario.m, self.scenario.n],
            "g": self.g,
            "alpha": fmt_rat(self.alpha),
            "boxes": list(self.boxes),
            "party_symmetric": self.party_symmetric,
            "vertices": len(self.vertices),
            "warnings": list(self.warnings),
        }


def _canonical_name(sc: Scenario, boxes: list) -> str:
    return "_".join([f"H{len(boxes)}", sc.tag] + list(boxes))


def build_model(scenario: Scenario = SC22, boxes: Iterable[str] = (), alpha=1,
                name: str = "") -> StateSpaceModel:
    """Convex hull of the local deterministic states and the requested boxes.

    Boxes already inside the hull at the given noise level are dropped with a
    warning instead of raising.
    """
    a = rat(alpha)
    boxes = list(boxes)
    ld = local_deterministic_states(scenario)
    lf = local_facets(scenario)
    kept, tables, notes = [], [], []
    for b in boxes:
        t = box_table(b, a)
        if t.scenario != scenario:
            raise ValueError(f"box {b} does not belong to scenario {scenario}")
        if t in tables:
            continue
        if satisfies(lf, t.entries):
            msg = f"box absorbed: {b} at alpha={fmt_rat(a)} lies in the local polytope"
            warnings.warn(msg)
            notes.append(msg)
            continue
        kept.append(b)
        tables.append(t)
    # drop boxes that are mixtures of the rest
    final_boxes, final_tables = [], []
    for b, t in zip(kept, tables):
        others = [v.entries for v in ld] + [u.entries for u in tables if u is not t]
        if convex_combination(others, t.entries)[0] == "inside":
            msg = f"box absorbed: {b} is a mixture of the other vertices"
            warnings.warn(msg)
            notes.append(msg)
            continue
        final_boxes.append(b)
        final_tables.append(t)
    verts = ld + final_tables
    sym = True
    if scenario.parties == 2:
        vs = {v.entries for v in verts}
        sym = all(v.transpose().entries in vs for v in final_tables)
    return StateSpaceModel(scenario, verts, len(final_tables), a, final_boxes, sym,
                           name or _canonical_name(scenario, final_boxes), notes)


def parse_model_id(text: str) -> tuple[Scenario, list]:
    """``H2_22_PR2_PR2p`` -> (scenario, boxes); ``H8_22`` means all eight boxes."""
    parts = text.strip().split("_")
    if len(parts) < 2 or not parts[0].startswith("H"):
        raise ValueError(f"unknown model identifier {text!r}")
    try:
        g = int(parts[0][1:])
    except ValueError as exc:
        raise ValueError(f"unknown model identifier {text!r}") from exc
    tags = {"22": SC22, "32": SC32}
    if parts[1] not in tags:
        raise ValueError(f"unknown scenario tag in {text!r}")
    sc = tags[parts[1]]
    boxes = parts[2:]
    if not boxes and g == 8 and sc == SC22:
        boxes = list(BOX_IDS)
    if len(boxes) != g:
        raise ValueError(f"{text!r}: g={g} but {len(boxes)} boxes listed")
    for b in boxes:
        if sc == SC22 and b not in BOX_IDS:
            raise ValueError(f"unknown box {b!r}")
        if sc == SC32 and b not in ("N1", "N2", "N3", "N4"):
            raise ValueError(f"unknown box {b!r}")
    return sc, boxes


def model_from_id(text: str, alpha=1) -> StateSpaceModel:
    sc, boxes = parse_model_id(text)
    return build_model(sc, boxes, alpha)


def load_model_spec(path: str) -> StateSpaceModel:
    with open(path) as fh:
        data = json.load(fh)
    p, m, n = data.get("scenario", [2, 2, 2])
    return build_model(Scenario(p, m, n), data.get("boxes", []), data.get("alpha", "1"),
                       data.get("name", ""))
