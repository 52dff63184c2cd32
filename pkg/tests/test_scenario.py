import random
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gptlab.scenario import (
    BOX_IDS, SC22, SC32, Relabelling, apply_relabelling, build_model, classify_orbits,
    classify_pr_subsets, facet_types, group, local_deterministic_states, local_facets,
    local_violations, model_from_id, n_box, no_signalling, noisy_pr, party_swap, pr_box,
    qubit_prob_state, uniform_state,
)

G22 = group(SC22)


def test_counts_of_deterministic_states_and_groups():
    assert len(local_deterministic_states(SC22)) == 16
    assert len(local_deterministic_states(SC32)) == 64
    assert len(G22) == 128 and len(group(SC22, "local")) == 64


def test_pr_boxes_and_opposites():
    for i in range(1, 9):
        assert pr_box(i).is_state() and no_signalling(pr_box(i))
    for i in range(1, 5):
        mix = pr_box(i).scale(F(1, 2)) + pr_box(i + 4).scale(F(1, 2))
        assert mix == uniform_state(SC22)
    assert len(classify_orbits([pr_box(i) for i in range(1, 9)], SC22)) == 1


def test_input_swap_maps_pr1_to_pr2_and_party_swap_fixes_pr1():
    ident = Relabelling.identity(SC22)
    r = Relabelling(SC22, (0, 1), ((1, 0), (1, 0)), ident.output_perm)
    assert apply_relabelling(r, pr_box(1)) == pr_box(2)
    assert apply_relabelling(party_swap(SC22), pr_box(1)) == pr_box(1)
    assert apply_relabelling(ident, pr_box(3)) == pr_box(3)


def test_noisy_box_at_half_is_absorbed():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        m = build_model(SC22, ["PR2"], F(1, 2))
    assert m.g == 0 and any("absorbed" in str(x.message) for x in w)


def test_n_boxes_violations():
    assert local_violations(n_box(1)) == {"positivity": 0, "ch": 1, "i3322": 8}
    assert local_violations(n_box(4)) == {"positivity": 0, "ch": 2, "i3322": 12}
    for j in range(1, 5):
        assert no_signalling(n_box(j))
    with pytest.raises(ValueError):
        n_box(5)


def test_local_facets_by_type():
    h = local_facets(SC22)
    assert len(h.inequalities) == 24
    assert facet_types(build_model(SC22, [], 1)) == {"positivity": 16, "ch": 8, "i3322": 0, "new": 0}


def test_noisy_models_gain_facets():
    # at alpha=1 the removed CH facet leaves 23; the noisy box adds lifted ridges
    assert len(build_model(SC22, ["PR2"], 1).facets.inequalities) == 23
    assert len(build_model(SC22, ["PR2"], F(3, 4)).facets.inequalities) == 31
    assert len(build_model(SC22, ["PR2", "PR2p"], 1).facets.inequalities) == 22
    assert len(build_model(SC22, ["PR2", "PR2p"], F(3, 4)).facets.inequalities) == 38
    assert len(build_model(SC22, BOX_IDS, 1).vertices) == 24


def test_pr_subset_classes():
    sizes = {g: sorted(len(c.members) for c in classify_pr_subsets(g)) for g in range(2, 8)}
    assert sizes[2] == [4, 8, 16]
    assert sum(sizes[4]) == 70
    for g, v in sizes.items():
        assert sum(v) == __import__("math").comb(8, g)
    counts = [len(classify_pr_subsets(g, True)) for g in range(2, 8)]
    assert counts == [2, 2, 4, 2, 2, 1]
    local = sorted(len(c.members) for c in classify_pr_subsets(2, subgroup="local"))
    assert local == [4, 8, 8, 8]


def test_printed_g4_examples_fall_in_distinct_classes():
    # boxes 5..8 are the primed PR boxes
    printed = [{1, 5, 3, 7}, {3, 4, 8, 1}, {1, 5, 3, 8}, {1, 6, 3, 8}, {1, 2, 3, 8}, {1, 5, 2, 6}]
    classes = classify_pr_subsets(4)
    where = []
    for s in printed:
        where.append(next(i for i, c in enumerate(classes) if s in [set(m) for m in c.members]))
    assert len(set(where)) == len(where) == len(classes)
    assert [len(classes[i].members) for i in where] == [4, 32, 16, 8, 8, 2]


def test_model_ids_and_qubit_state():
    m = model_from_id("H2_22_PR2_PR2p", F(3, 4))
    assert m.boxes == ["PR2", "PR2p"] and m.party_symmetric
    with pytest.raises(ValueError):
        model_from_id("X2_22")
    q = qubit_prob_state((F(3, 5), 0, F(4, 5)))
    assert q.entries == (F(4, 5), F(1, 5), F(1, 2), F(1, 2), F(9, 10), F(1, 10))
    with pytest.raises(ValueError):
        qubit_prob_state((1, 1, 0))


@given(st.integers(0, 127), st.integers(0, 127), st.integers(1, 8), st.integers(0, 15),
       st.fractions(0, 1, max_denominator=8))
def test_group_action_is_homomorphism(i, j, box, det, w):
    a, b = G22[i], G22[j]
    t = pr_box(box).scale(w) + local_deterministic_states(SC22)[det].scale(1 - w)
    assert apply_relabelling(a.compose(b), t) == apply_relabelling(a, apply_relabelling(b, t))
    assert apply_relabelling(a.inverse(), apply_relabelling(a, t)) == t
    assert no_signalling(apply_relabelling(a, t))


@given(st.integers(1, 8), st.fractions(F(1, 2), 1, max_denominator=12))
def test_noisy_boxes_are_states(i, a):
    t = noisy_pr(i, a)
    assert t.is_state() and no_signalling(t)
