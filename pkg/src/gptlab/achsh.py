"""Adaptive CHSH: winning bounds for state-space models and the quantum benchmark."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .coupling import CouplerRecord, find_couplers, game
from .exactnum import Surd2, fmt_rat, rat, surd_cmp
from .lp import LPProblem, solve
from .preservability import PreservabilityChecker
from .scenario import SC22, StateSpaceModel, ns_hrep

__all__ = [
    "BoundReport",
    "ScopeError",
    "winning_bound",
    "g1_bound_closed_forms",
    "quantum_value",
    "quantum_strategy_table",
    "quantum_achsh_value",
    "chsh_pair_max",
    "chsh_pair_table",
]

THREE_QUARTERS = Fraction(3, 4)


class ScopeError(ValueError):
    pass


@dataclass
class BoundReport:
    model: str
    couplers: int
    bound: Fraction
    achieving: Optional[CouplerRecord]
    quantum: Surd2
    beats_quantum: bool
    bound_any_pair: Fraction = None

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "couplers": self.couplers,
            "bound": fmt_rat(self.bound),
            "achieving": self.achieving.to_json() if self.achieving else None,
            "quantum_value": self.quantum.to_text(),
            "beats_quantum": self.beats_quantum,
            "bound_any_pair": fmt_rat(self.bound_any_pair),
        }


def quantum_value() -> Surd2:
    return Surd2(Fraction(1, 2), Fraction(1, 4))


def winning_bound(m: StateSpaceModel, effects=None) -> BoundReport:
    """``3/4 + max p_succ (zeta - 3/4)`` over minimal 2-preserving extremal couplers."""
    if effects is None:
        from .effects import maximal_effect_space

        effects = maximal_effect_space(m, tag=False)
    effects = list(getattr(effects, "effects", effects))
    flags = PreservabilityChecker(m).flags(effects)
    pool = [e for e, (_, mn) in zip(effects, flags) if mn]
    recs = [r for r in find_couplers(pool, m) if r is not None]
    if recs and m.g != 1:
        raise ScopeError(f"{m.name}: the bound needs exactly one nonlocal extremal state "
                         f"or no minimal 2-preserving couplers; found {len(recs)} couplers with g={m.g}")
    bound, best = THREE_QUARTERS, None
    diag = THREE_QUARTERS
    for r in recs:
        v = THREE_QUARTERS + r.p_succ * (r.zeta - THREE_QUARTERS)
        if v > bound:
            bound, best = v, r
        diag = max(diag, THREE_QUARTERS + r.p_succ * (r.zeta_global - THREE_QUARTERS))
    q = quantum_value()
    return BoundReport(m.name, len(recs), bound, best, q, surd_cmp(bound, q) >= 0, diag)


def g1_bound_closed_forms(alpha) -> dict:
    """The two single-box bounds as functions of the noise parameter."""
    a = rat(alpha)
    return {
        "pure": (a * (a + 3) + 1) / (4 * a + 2),
        "mixed": (a * (5 * a + 17) + 4) / (24 * a + 8),
    }


# --------------------------------------------------------- quantum side

_EPS = Surd2(0, Fraction(1, 2))
_COS = [Surd2(1), _EPS, Surd2(0), -_EPS, Surd2(-1), -_EPS, Surd2(0), _EPS]

# Bloch angles in units of pi/4, measurements in the x-z plane
_ALICE = {0: 0, 1: 2}
_CHARLIE = {0: 1, 1: 3}

# correlator <s(t) x s(p)> of each Bell outcome as (sign, uses t+p instead of t-p)
_BELL = {
    "00": (1, False),
    "01": (1, True),
    "10": (-1, True),
    "11": (-1, False),
}


def quantum_strategy_table(b: str = "00") -> list:
    """Flat (2,2) table of ``p(a, c | x, z)`` given Bob's Bell outcome ``b``, over Q(sqrt 2).

    Outcome 0 is the first element of each measurement basis; marginals are
    uniform, so ``p = (1 + (-1)^(a+c) E) / 4`` with ``E`` the correlator.
    """
    if b not in _BELL:
        raise ValueError("Bob's outcome is one of 00, 01, 10, 11")
    sgn, plus = _BELL[b]
    out = [None] * 16
    for x, a, z, c in itertools.product(range(2), repeat=4):
        t, p = _ALICE[x], _CHARLIE[z]
        corr = _COS[(t + p) % 8 if plus else (t - p) % 8] * sgn
        par = 1 if (a + c) % 2 == 0 else -1
        out[(2 * x + a) * 4 + 2 * z + c] = (corr * par + 1) * Fraction(1, 4)
    return out


def _surd_chsh(table: list, i: int) -> Surd2:
    f = game(i).functional.entries
    return sum((table[k] * f[k] for k in range(16) if f[k]), Surd2(0))


def quantum_achsh_value() -> tuple:
    """``(value, per_outcome)``: each Bell outcome has probability 1/4 and picks its best game."""
    total = Surd2(0)
    per = {}
    for b in sorted(_BELL):
        t = quantum_strategy_table(b)
        scores = [(_surd_chsh(t, i), i) for i in range(1, 9)]
        best = scores[0]
        for s in scores[1:]:
            if surd_cmp(s[0], best[0]) > 0:
                best = s
        per[b] = best
        total = total + best[0] * Fraction(1, 4)
    return total, per


# ------------------------------------------------------ one-game lemma


def _ns_lp(func) -> Fraction:
    h = ns_hrep(SC22)
    C, b = [], []
    for a, rhs in h.le_form():
        C.append(list(a))
        b.append(rhs)
    for a, rhs in h.equalities:
        C.append(list(a))
        b.append(rhs)
        C.append([-v for v in a])
        b.append(-rhs)
    return solve(LPProblem(list(func), C, b), strategy="dense").value


def chsh_pair_max(i: int, j: int) -> Fraction:
    """Exact maximum of ``<C_i + C_j, p>`` over no-signalling tables."""
    if i == j:
        raise ValueError("the two games must differ")
    fi, fj = game(i).functional.entries, game(j).functional.entries
    return _ns_lp([x + y for x, y in zip(fi, fj)])


def chsh_pair_table() -> dict:
    return {(i, j): chsh_pair_max(i, j) for i, j in itertools.combinations(range(1, 9), 2)}
