from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gptlab.lp import (
    Infeasible, LPProblem, Unbounded, build_coupler_lp, convex_combination, dump_certificate,
    dump_problem, load_certificate, load_problem, solve, solve_with_oracle, verify_certificate,
)
from gptlab.scenario import SC22, build_model

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
nonneg = st.fractions(min_value=0, max_value=5, max_denominator=6)


def test_textbook_lp():
    p = LPProblem([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    c = solve(p)
    assert c.value == 36 and c.x == [2, 6]
    assert verify_certificate(p, c.x, c.y)


def test_infeasible_has_farkas_vector():
    p = LPProblem([1], [[1], [-1]], [1, -2])
    with pytest.raises(Infeasible) as exc:
        solve(p)
    y = exc.value.farkas
    assert all(v >= 0 for v in y)
    assert sum(yi * bi for yi, bi in zip(y, p.b)) < 0
    assert all(sum(y[i] * p.C[i][j] for i in range(2)) >= 0 for j in range(1))


def test_unbounded_has_ray():
    p = LPProblem([1, 1], [[1, -1]], [1])
    with pytest.raises(Unbounded) as exc:
        solve(p)
    r = exc.value.ray
    assert all(v >= 0 for v in r) and sum(r) > 0 and r[0] - r[1] <= 0


def test_certificate_rejections():
    p = LPProblem([1, 0], [[1, 1]], [1])
    assert not verify_certificate(p, [0, 0], [0])
    c = solve(p)
    assert verify_certificate(p, c.x, c.y)
    assert not verify_certificate(p, [c.x[0] + F(1, 1000), c.x[1]], c.y)
    assert not verify_certificate(p, c.x, [c.y[0] + F(1, 1000)])
    with pytest.raises(ValueError):
        verify_certificate(p, [0], [0])


def test_row_generation_matches_dense():
    C = [[i % 3 + 1, (i * 7) % 5 + 1, (i * 3) % 4 + 1] for i in range(150)]
    b = [10 + (i % 11) for i in range(150)]
    p = LPProblem([2, 3, 1], C, b)
    dense = solve(p, strategy="dense")
    gen = solve(p, strategy="rowgen")
    assert dense.value == gen.value
    assert verify_certificate(p, gen.x, gen.y)

    def oracle(x):
        return [i for i in range(150) if sum(a * v for a, v in zip(C[i], x)) > b[i]]

    impl = solve_with_oracle(p.f, lambda i: (C[i], b[i]), oracle, 150)
    assert impl.value == dense.value


def test_convex_combination_routes():
    kind, w = convex_combination([(0, 0), (2, 0), (0, 2)], (F(1, 2), F(1, 2)))
    assert kind == "inside" and sum(w) == 1
    kind, (func, thr) = convex_combination([(0, 0), (2, 0), (0, 2)], (2, 2))
    assert kind == "outside" and func[0] * 2 + func[1] * 2 > thr


def test_text_formats_roundtrip():
    p = LPProblem([F(1, 2), 1], [[1, F(2, 3)]], [F(7, 5)])
    q = load_problem(dump_problem(p))
    assert (q.f, q.C, q.b) == (p.f, p.C, p.b)
    c = solve(p)
    d = load_certificate(dump_certificate(c))
    assert (d.x, d.y, d.value) == (c.x, c.y, c.value)


def test_coupler_lp_shape_and_unit_entry():
    m = build_model(SC22, ["PR1", "PR2"], F(3, 4))
    p = build_coupler_lp(m, 1, 2, 1)
    assert p.shape == (4 * 202 + 2, 202)
    m = build_model(SC22, ["PR1", "PR2"], 1)
    from gptlab.coupling import CouplerLP
    from gptlab.effects import unit_effect

    lp = CouplerLP(m)
    assert lp.f(1, 1, 1)[lp.index_of(unit_effect(SC22))] == F(-1, 4)
    g1 = build_coupler_lp(build_model(SC22, ["PR2"], 1), 1, 1, 2)
    assert g1.shape == (106 + 2, 106)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=2, max_size=5),
       st.lists(nonneg, min_size=5, max_size=5),
       st.lists(nonneg, min_size=3, max_size=3),
       st.lists(small, min_size=3, max_size=3))
def test_weak_duality(C, yraw, x, f):
    """Any primal-feasible x and dual-feasible y satisfy f.x <= b.y."""
    m = len(C)
    Ax = [sum(a * v for a, v in zip(row, x)) for row in C]
    b = [v + s for v, s in zip(Ax, yraw)]
    y = yraw[:m]
    col = [sum(C[i][j] * y[i] for i in range(m)) for j in range(3)]
    f = [min(fj, cj) for fj, cj in zip(f, col)]
    primal = sum(a * v for a, v in zip(f, x))
    dual = sum(a * v for a, v in zip(b, y))
    assert primal <= dual
    p = LPProblem(f, C, b)
    c = solve(p)
    assert primal <= c.value <= dual
    assert verify_certificate(p, c.x, c.y)
