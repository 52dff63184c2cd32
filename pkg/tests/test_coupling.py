from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gptlab.coupling import (
    ClosedFormMismatch, CouplerLP, PairScanner, apply_middle, chsh, chsh_scores,
    closed_form_chsh, closed_form_success, coupler_report, coupler_threshold, family_couples,
    find_couplers, game, is_coupler, post_state_chsh_check, success_probability,
)
from gptlab.effects import ch_effect, frame, maximal_effect_space, type_representative
from gptlab.lp import verify_certificate
from gptlab.scenario import (
    SC22, ProbTable, apply_relabelling, build_model, group, local_deterministic_states,
    noisy_pr, pr_box, uniform_state,
)

PR2 = pr_box(2)
E_NOISY = ProbTable.from_matrix(
    SC22, [[0, F(1, 2), 0, 0], [0, F(-1, 2), 0, F(1, 2)], [0, 0, F(1, 2), 0], [0, F(1, 2), 0, 0]],
    role="effect")
GRID = [F(k, 30) for k in range(15, 31)]


def test_games_and_scores():
    assert chsh(PR2, 2) == 1
    assert chsh(uniform_state(SC22), 1) == F(1, 2)
    scores = chsh_scores(PR2)
    assert max(scores.values()) == 1 and sorted(scores.values()).count(1) == 1
    assert all(max(chsh_scores(s).values()) == F(3, 4) for s in local_deterministic_states(SC22))
    with pytest.raises(ValueError):
        game(9)


def test_pure_swap():
    e = ch_effect(2).scale(F(2, 3))
    w = success_probability(e, PR2, PR2)
    assert w == F(1, 3)
    assert apply_middle(e, PR2, PR2).scale(1 / w) == PR2


def test_noisy_swap_mixture():
    w = success_probability(E_NOISY, PR2, PR2)
    assert w == F(3, 8)
    post = apply_middle(E_NOISY, PR2, PR2).scale(1 / w)
    det = ProbTable.from_matrix(SC22, [[0, 0, 0, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 0, 0, 0]])
    assert det in local_deterministic_states(SC22) and chsh(det, 2) == F(3, 4)
    assert post == PR2.scale(F(2, 3)) + det.scale(F(1, 3))
    assert chsh(post, 2) == F(11, 12)


@pytest.mark.parametrize("kind", ["1", "2", "3", "4"])
def test_post_state_closed_forms_on_grid(kind):
    for a in GRID:
        assert post_state_chsh_check(kind, a) == closed_form_chsh(kind, a)


@pytest.mark.parametrize("kind", ["3", "4"])
def test_success_closed_forms_on_grid(kind):
    for a in GRID:
        n = noisy_pr(2, a)
        assert success_probability(type_representative(kind, a), n, n) == closed_form_success(kind, a)


def test_closed_form_errors():
    with pytest.raises(ValueError):
        closed_form_success("1", 1)
    with pytest.raises(ValueError):
        post_state_chsh_check("3", F(2, 5))
    assert issubclass(ClosedFormMismatch, AssertionError)


@pytest.mark.parametrize("kind,below,above", [
    ("4", F(707, 1000), F(708, 1000)),
    ("4", F(7, 10), F(71, 100)),
    ("3", F(7403, 10000), F(7404, 10000)),
    ("3", F(37, 50), F(3, 4)),
])
def test_thresholds_straddled(kind, below, above):
    t = coupler_threshold(kind)
    assert below < t < above
    for a, want in ((below, False), (above, True)):
        assert family_couples(kind, a) is want
        m = build_model(SC22, ["PR2"], a)
        assert (is_coupler(type_representative(kind, a), m) is not None) is want


def test_single_box_couplers_at_one():
    m = build_model(SC22, ["PR2"], 1)
    es = maximal_effect_space(m)
    recs = [r for r in find_couplers(es.effects, m) if r is not None]
    assert len(es) == 106 and len(recs) == 9
    pure = [r for r in recs if r.pure]
    assert [(r.p_succ, r.zeta) for r in pure] == [(F(1, 3), 1)]
    assert sorted((r.p_succ, r.zeta) for r in recs if not r.pure) == [(F(3, 8), F(11, 12))] * 8
    rep = coupler_report(m, es)
    assert rep["couplers"] == 9 and rep["pure"] == 1


def test_opposite_pair_has_no_couplers():
    m = build_model(SC22, ["PR2", "PR2p"], F(3, 4))
    es = maximal_effect_space(m, tag=False)
    assert len(es) == 144
    assert all(r is None for r in find_couplers(es.effects, m))


def test_coupler_lp_routes_agree():
    m = build_model(SC22, ["PR1", "PR2"], F(4, 5))
    lp = CouplerLP(m)
    dense = lp.solve(1, 1, 1)
    assert dense.value == 0
    assert verify_certificate(lp.problem(1, 1, 1), dense.x, dense.y)
    impl = lp.solve_implicit(1, 1, 1)
    ye = {r: v for r, v in enumerate(impl.y) if v}
    assert impl.value == 0 and lp.verify_sparse(1, 1, 1, impl.x, ye)


coeffs = st.lists(st.integers(-3, 3), min_size=16, max_size=16)


@given(coeffs)
def test_pair_scan_matches_all_pairs(vec):
    m = build_model(SC22, ["PR1", "PR2"], F(3, 4))
    e = ProbTable(SC22, frame(SC22).canonical([F(v, 4) for v in vec]), role="effect")
    cands = [e, type_representative("4", F(3, 4)), ch_effect(1).scale(F(2, 3))]
    a = [r is not None for r in find_couplers(cands, m)]
    b = [r is not None for r in find_couplers(cands, m, PairScanner(m, all_pairs=True))]
    assert a == b


G = group(SC22)


@given(st.integers(0, 127), st.integers(1, 8), st.fractions(0, 1, max_denominator=6))
def test_chsh_scores_covariant(gi, box, w):
    t = pr_box(box).scale(w) + uniform_state(SC22).scale(1 - w)
    img = apply_relabelling(G[gi], t)
    assert sorted(chsh_scores(t).values()) == sorted(chsh_scores(img).values())


@given(st.lists(st.fractions(-1, 1, max_denominator=4), min_size=16, max_size=16),
       st.lists(st.fractions(-1, 1, max_denominator=4), min_size=16, max_size=16),
       st.fractions(-2, 2, max_denominator=5), st.integers(1, 8), st.integers(1, 8))
def test_middle_map_bilinear(u, v, c, i, j):
    eu = ProbTable(SC22, u, role="effect")
    ev = ProbTable(SC22, v, role="effect")
    r, s = pr_box(i), pr_box(j)
    lhs = apply_middle(eu.scale(c) + ev, r, s)
    rhs = apply_middle(eu, r, s).scale(c) + apply_middle(ev, r, s)
    assert lhs == rhs
    mix = r.scale(c) + s
    assert apply_middle(eu, mix, s) == apply_middle(eu, r, s).scale(c) + apply_middle(eu, s, s)
