"""One test per acceptance criterion; a summary line per criterion is printed at the end."""

import time
import warnings
from fractions import Fraction as F

import pytest

from conftest import ACCEPTANCE
from gptlab.achsh import (
    chsh_pair_table, g1_bound_closed_forms, quantum_achsh_value, quantum_strategy_table,
    quantum_value, winning_bound,
)
from gptlab.coupling import (
    apply_middle, chsh, closed_form_chsh, closed_form_success, coupler_report, coupler_threshold,
    family_couples, find_couplers, is_coupler, post_state_chsh_check, success_probability,
)
from gptlab.effects import (
    ch_effect, classify_effects, count_extreme, effects_by_cuts, maximal_effect_space,
    opposite_pairs, type_effects, type_representative,
)
from gptlab.exactnum import Surd2, surd_cmp
from gptlab.preservability import (
    ALPHA_GRID, PreservabilityChecker, certify_no_couplers, party_symmetric_models,
    tsirelson_check,
)
from gptlab.scenario import (
    BOX_IDS, SC22, SC32, ProbTable, build_model, facet_types, local_deterministic_states,
    model_from_id, noisy_pr, pr_box,
)

Q = Surd2(F(1, 2), F(1, 4))


def record(n, ok, detail=""):
    ACCEPTANCE[n] = ("PASS" if ok else "FAIL", detail)
    assert ok, detail


def timed(fn):
    t = time.time()
    out = fn()
    return out, time.time() - t


def test_c01_local_effects():
    es, dt = timed(lambda: maximal_effect_space(build_model(SC22, [], 1)))
    sizes = sorted(c.size for c in classify_effects(es))
    ok = (len(es) == 90 and es.tag_counts() == {"separable": 82, "ch": 8}
          and sizes == sorted([1, 16, 8, 32, 8, 16, 8, 1]) and dt < 30)
    record(1, ok, f"{len(es)} effects, {es.tag_counts()}, classes {sizes}, {dt:.1f}s")


def test_c02_boxworld_effects():
    es, dt = timed(lambda: maximal_effect_space(build_model(SC22, BOX_IDS, 1)))
    record(2, len(es) == 82 and dt < 30, f"{len(es)} effects, {dt:.1f}s")


def test_c03_cut_route():
    counts = []
    for a in (F(3, 4), F(1), F(1, 2)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            counts.append(len(effects_by_cuts(build_model(SC22, ["PR2"], a), check=True)))
    fams = {k: len(v) for k, v in type_effects(2, F(3, 4), "combined").items()}
    ok = counts == [146, 106, 90] and fams == {"1": 12, "2": 8, "3": 8, "4": 1}
    record(3, ok, f"counts {counts}, families {fams}")


def test_c04_two_box_models():
    m = build_model(SC22, ["PR2", "PR2p"], F(3, 4))
    es = maximal_effect_space(m, tag=False)
    ncoup = sum(r is not None for r in find_couplers(es.effects, m))
    n2 = len(maximal_effect_space(build_model(SC22, ["PR1", "PR2"], F(3, 4)), tag=False))
    record(4, len(es) == 144 and ncoup == 0 and n2 == 202,
           f"opposite pair {len(es)} effects / {ncoup} couplers, other pair {n2}")


def test_c05_counting_formula():
    bad, total = [], 0
    for a in (F(3, 5), F(3, 4), F(1)):
        for g in range(1, 9):
            for m in party_symmetric_models(g, a):
                total += 1
                n = len(maximal_effect_space(m, tag=False))
                want = count_extreme(g, opposite_pairs(m.boxes), a)
                if n != want:
                    bad.append((m.name, str(a), n, want))
    record(5, not bad, f"{total} models checked, mismatches {bad}")


def test_c06_swaps():
    pr2 = pr_box(2)
    e = ch_effect(2).scale(F(2, 3))
    p1 = success_probability(e, pr2, pr2)
    ok1 = p1 == F(1, 3) and apply_middle(e, pr2, pr2).scale(1 / p1) == pr2
    en = ProbTable.from_matrix(SC22, [[0, F(1, 2), 0, 0], [0, F(-1, 2), 0, F(1, 2)],
                                      [0, 0, F(1, 2), 0], [0, F(1, 2), 0, 0]], role="effect")
    p2 = success_probability(en, pr2, pr2)
    det = ProbTable.from_matrix(SC22, [[0, 0, 0, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 0, 0, 0]])
    ok2 = (p2 == F(3, 8) and det in local_deterministic_states(SC22)
           and apply_middle(en, pr2, pr2).scale(1 / p2) == pr2.scale(F(2, 3)) + det.scale(F(1, 3)))
    record(6, ok1 and ok2, f"pure p={p1}, noisy p={p2}")


def test_c07_closed_forms():
    grid = [F(k, 30) for k in range(15, 31)]
    bad = []
    for a in grid:
        for kind in "1234":
            if post_state_chsh_check(kind, a) != closed_form_chsh(kind, a):
                bad.append(("chsh", kind, a))
        n = noisy_pr(2, a)
        for kind in "34":
            if success_probability(type_representative(kind, a), n, n) != closed_form_success(kind, a):
                bad.append(("p", kind, a))
    record(7, not bad, f"{len(grid)} grid points, mismatches {bad}")


def test_c08_thresholds():
    cases = [("4", F(707, 1000), F(708, 1000)), ("3", F(7403, 10000), F(7404, 10000))]
    ok = True
    for kind, lo, hi in cases:
        t = coupler_threshold(kind)
        ok &= surd_cmp(lo, t) < 0 < surd_cmp(hi, t)
        for a, want in ((lo, False), (hi, True)):
            found = is_coupler(type_representative(kind, a), build_model(SC22, ["PR2"], a)) is not None
            ok &= found is want and family_couples(kind, a) is want
    record(8, ok, "family 3 at (1+sqrt41)/10, family 4 at 1/sqrt2")


def _norm_chsh(e, r, s, game):
    st = apply_middle(e, r, s)
    return chsh(st, game) / sum(st.entries[i] for i in (0, 1, 4, 5))


def test_c09_preservability():
    notes, ok = [], True
    for a, fails in ((F(7, 10), False), (F(71, 100), True), (F(9, 10), True)):
        m = build_model(SC22, ["PR2"], a)
        es = maximal_effect_space(m)
        ch = [e for e, t in zip(es.effects, es.tags) if t["ch"]]
        flags = PreservabilityChecker(m).flags(ch)
        ok &= all((not w) is fails for w, _ in flags)
    a = F(9, 10)
    r1, r2 = noisy_pr(1, a), noisy_pr(2, a)
    t2 = type_effects(2, a)
    v4 = {_norm_chsh(e, r1, r1, 6) for e in t2["4"]}
    v3 = {_norm_chsh(e, r1, r1, 6) for e in t2["3"]}
    vch = _norm_chsh(ch_effect(1), r2, r2, 5)
    ok &= v4 == {(a * a + 1) / 2} and v3 == {(5 * a * a + 2 * a + 4) / (4 * (a + 2))}
    ok &= vch == (a * a + 1) / 2
    m = model_from_id("H1_32_N2", 1)
    rows = [[-1, 0, 0, 0, 0, 0], [0, 0, 0, -1, 0, 0], [0] * 6, [0, -1, 0, 1, 0, 0],
            [0, 0, 0, 0, F(3, 2), F(3, 2)], [0, 0, 0, 0, F(3, 2), F(3, 2)]]
    e = ProbTable.from_matrix(m.scenario, [[F(2, 3) * x for x in r] for r in rows], role="effect")
    rec = PreservabilityChecker(m).check(e)
    ok &= rec.weak and rec.minimal is False
    notes.append(f"values {sorted(str(v) for v in v4 | v3)}, (3,2) example weak={rec.weak} minimal={rec.minimal}")
    record(9, ok, "; ".join(notes))


@pytest.fixture(scope="module")
def certification():
    return timed(lambda: certify_no_couplers(alphas=ALPHA_GRID))


def test_c10_no_coupler_optima(certification):
    res, dt = certification
    ok = res["all_zero"] and res["instances"] == 349 * 4
    ACCEPTANCE[10] = ("FAIL", (
        f"{res['instances']} instances, all optima 0: {res['all_zero']}, {dt:.0f}s; printed duals "
        f"verify for {res['printed_dual_verified']} "
        f"({res['printed_dual_by_label']} by label, {res['printed_dual_by_position']} by position)"))
    assert ok


@pytest.mark.xfail(strict=True, reason="some published dual certificates do not verify as printed")
def test_c10_printed_certificates(certification):
    res, _ = certification
    assert res["printed_dual_verified"] == res["instances"]


def test_c11_pair_lemma():
    table = chsh_pair_table()
    ok = len(table) == 28 and all(v == (1 if abs(i - j) == 4 else F(3, 2)) for (i, j), v in table.items())
    record(11, ok, f"max over pairs {max(table.values())}")


def test_c12_bounds():
    cf = g1_bound_closed_forms(1)
    ok = cf == {"pure": F(5, 6), "mixed": F(13, 16)}
    worst, n = F(0), 0
    for k in range(22, 31):
        a = F(k, 30)
        for g in range(1, 9):
            for m in party_symmetric_models(g, a):
                b = winning_bound(m).bound
                n += 1
                worst = max(worst, b)
                ok &= surd_cmp(b, Q) < 0
                if g == 1:
                    ok &= b == max(g1_bound_closed_forms(a).values())
    ok &= quantum_value() == Q
    record(12, ok, f"{n} model bounds, largest {worst}")


def test_c13_tsirelson():
    ok, n = True, 0
    for a in (F(17, 24), F(7, 10), F(3, 4), F(1)):
        below = 2 * a * a <= 1
        for g in range(1, 9):
            res = tsirelson_check(g, a)
            n += len(res["models"])
            ok &= res["all_min2"] if g == 8 else (res["all_min2"] is below)
    record(13, ok, f"{n} model checks")


def test_c14_quantum_strategy():
    ok = True
    for b in ("00", "01", "10", "11"):
        t = quantum_strategy_table(b)
        for x in range(2):
            for a in range(2):
                row = t[(2 * x + a) * 4:(2 * x + a) * 4 + 4]
                ok &= row[0] + row[1] == row[2] + row[3]
        for z in range(2):
            for c in range(2):
                ok &= t[2 * z + c] + t[4 + 2 * z + c] == t[8 + 2 * z + c] + t[12 + 2 * z + c]
    total, _ = quantum_achsh_value()
    ok &= total == Q
    record(14, ok, f"value {total.to_text()}")


@pytest.mark.long
def test_c15_three_input_facets():
    want = {1: (71, 568), 2: (66, 558), 3: (68, 552), 4: (70, 564)}
    got = {}
    for j in want:
        ft = facet_types(model_from_id(f"H1_32_N{j}", 1))
        got[j] = (ft["ch"], ft["i3322"])
    record(15, got == want, f"{got}")


@pytest.mark.long
def test_c16_three_input_effects():
    from gptlab.effects import boxworld_effects

    n0 = len(maximal_effect_space(model_from_id("H0_32", 1), tag=False))
    bw = boxworld_effects(SC32)
    nbw, nclasses = len(bw), len(classify_effects(bw))
    ns = [len(maximal_effect_space(model_from_id(f"H1_32_N{j}", 1), tag=False)) for j in (1, 2, 3)]
    ok = n0 == 27968 and (nbw, nclasses) == (248, 7) and ns == [29486, 41888, 37376]
    record(16, ok, f"local {n0}, boxworld {nbw}/{nclasses} classes, N1..N3 {ns}")


@pytest.mark.long
def test_c17_three_input_couplers():
    want = {
        1: dict(couplers=856, classes=61, pure=88, weak=28689, nonmin=768),
        2: dict(couplers=390, classes=15, pure=0, weak=19222, nonmin=9030),
        3: dict(couplers=2716, classes=78, pure=4, weak=35504, nonmin=1536),
    }
    got, ok = {}, True
    for j in (1, 2, 3):
        m = model_from_id(f"H1_32_N{j}", 1)
        es = maximal_effect_space(m, tag=False)
        flags = PreservabilityChecker(m).flags(es.effects)
        weak = [e for e, (w, _) in zip(es.effects, flags) if w]
        rep = coupler_report(m, weak)
        best = rep["max_product"]
        got[j] = dict(couplers=rep["couplers"], classes=rep["classes"], pure=rep["pure"],
                      weak=len(weak), nonmin=sum(1 for w, mn in flags if w and not mn),
                      best=(best["p_succ"], best["zeta"], best["value"]) if best else None)
        ok &= all(got[j][k] == v for k, v in want[j].items())
    ok &= got[1]["best"][2] == "1/3"
    ok &= got[2]["best"][:2] == ("13/24", "41/52")
    ok &= got[3]["best"][2] == "53/144"
    record(17, ok, f"{got}")


def test_c18_property_suites():
    import test_coupling
    import test_effects
    import test_lp
    import test_polytope
    import test_scenario

    suites = [test_polytope.test_vh_roundtrip_plane, test_polytope.test_vh_roundtrip_space,
              test_coupling.test_middle_map_bilinear, test_effects.test_complement_norm_identity,
              test_scenario.test_group_action_is_homomorphism, test_lp.test_weak_duality]
    failures = []
    for fn in suites:
        try:
            fn()
        except Exception as exc:  # collected into the summary line
            failures.append(f"{fn.__name__}: {exc!r}")
    record(18, not failures, f"{len(suites)} property suites, failures {failures}")
