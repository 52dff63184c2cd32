from fractions import Fraction as F

import pytest

from gptlab.achsh import (
    ScopeError, chsh_pair_max, chsh_pair_table, g1_bound_closed_forms, quantum_achsh_value,
    quantum_strategy_table, quantum_value, winning_bound,
)
from gptlab.exactnum import Surd2, surd_cmp
from gptlab.preservability import party_symmetric_models
from gptlab.scenario import SC22, build_model

Q = Surd2(F(1, 2), F(1, 4))


def test_quantum_value_exact():
    assert quantum_value() == Q
    assert Q > F(5, 6) and Q > F(13, 16)


def test_quantum_tables_no_signalling():
    for b in ("00", "01", "10", "11"):
        t = quantum_strategy_table(b)
        for x in range(2):
            for z in range(2):
                block = [t[(2 * x + a) * 4 + 2 * z + c] for a in range(2) for c in range(2)]
                assert sum(block, Surd2(0)) == 1
                assert all(v >= 0 for v in block)
        # Alice's marginal does not depend on z, Charlie's not on x
        for x in range(2):
            for a in range(2):
                m0 = t[(2 * x + a) * 4] + t[(2 * x + a) * 4 + 1]
                m1 = t[(2 * x + a) * 4 + 2] + t[(2 * x + a) * 4 + 3]
                assert m0 == m1
        for z in range(2):
            for c in range(2):
                n0 = t[2 * z + c] + t[4 + 2 * z + c]
                n1 = t[8 + 2 * z + c] + t[12 + 2 * z + c]
                assert n0 == n1
    with pytest.raises(ValueError):
        quantum_strategy_table("22")


def test_quantum_achsh_value():
    total, per = quantum_achsh_value()
    assert total == Q
    assert all(v[0] == Q for v in per.values())
    assert len({v[1] for v in per.values()}) == 4


def test_g1_closed_forms():
    assert g1_bound_closed_forms(1) == {"pure": F(5, 6), "mixed": F(13, 16)}
    cf = g1_bound_closed_forms(F(4, 5))
    assert cf == {"pure": F(101, 130), "mixed": F(13, 17)}


@pytest.mark.parametrize("alpha", [F(4, 5), F(1)])
def test_single_box_bound_matches_closed_form(alpha):
    rep = winning_bound(build_model(SC22, ["PR2"], alpha))
    cf = g1_bound_closed_forms(alpha)
    assert rep.bound == max(cf.values())
    assert not rep.beats_quantum and surd_cmp(rep.bound, Q) < 0


def test_multi_box_bounds_trivial():
    m = build_model(SC22, ["PR2", "PR2p"], F(4, 5))
    assert winning_bound(m).bound == F(3, 4)
    for m in party_symmetric_models(3, F(5, 6)):
        assert winning_bound(m).bound == F(3, 4)


def test_scope_error_when_couplers_and_many_boxes():
    m = build_model(SC22, ["PR2", "PR3"], 1)
    assert not m.party_symmetric
    with pytest.raises(ScopeError):
        winning_bound(m)


def test_pair_lemma():
    table = chsh_pair_table()
    assert len(table) == 28
    for (i, j), v in table.items():
        assert v <= F(3, 2)
        opposite = abs(i - j) == 4
        assert v == (1 if opposite else F(3, 2))
    with pytest.raises(ValueError):
        chsh_pair_max(2, 2)
