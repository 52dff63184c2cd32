import json

import pytest
from click.testing import CliRunner

from gptlab.cli import main, parse_alpha
from fractions import Fraction as F


def run(*args):
    res = CliRunner().invoke(main, list(args))
    data = None
    try:
        data = json.loads(res.stdout)
    except ValueError:
        pass
    return res, data


def test_parse_alpha():
    assert parse_alpha("3/4") == [F(3, 4)]
    assert parse_alpha("grid:1/2..1:1/4") == [F(1, 2), F(3, 4), F(1)]
    import click
    with pytest.raises(click.BadParameter):
        parse_alpha("grid:1..1/2:1/4")


def test_effects_enum():
    res, data = run("--model", "H0_22", "effects", "enum")
    assert res.exit_code == 0
    assert data["results"] == [{"alpha": "1", "ch": 8, "count": 90, "model": "H0_22", "separable": 82}]


def test_space_build_warns_and_writes(tmp_path):
    res, data = run("--model", "H1_22_PR2", "--alpha", "1/2", "--out", str(tmp_path), "space", "build")
    assert res.exit_code == 0
    assert "box absorbed" in res.stderr
    assert data["models"][0]["g"] == 0
    assert any(p.suffix == ".v" for p in tmp_path.iterdir())


def test_space_build_facet_types():
    res, data = run("--model", "H1_22_PR2", "space", "build")
    assert data["models"][0]["facet_types"] == {"positivity": 16, "ch": 7, "i3322": 0, "new": 0}


def test_achsh_bound():
    res, data = run("--model", "H1_22_PR2", "achsh", "bound")
    assert res.exit_code == 0 and "5/6" in res.stdout


def test_lemma_and_orbits():
    res, data = run("lemma", "chsh-pairs")
    assert res.exit_code == 0 and data["ok"]
    res, data = run("orbits", "classify", "--g", "2")
    assert res.exit_code == 0 and "16" in res.stdout


def test_certify_one_class():
    res, data = run("--alpha", "4/5", "certify", "no-couplers", "--class", "2:3")
    assert res.exit_code == 0 and data["all_zero"]


def test_verify_reports_printed_failures():
    res, data = run("--alpha", "1", "verify", "appendix-h", "--class", "7:1", "--class", "2:3")
    assert res.exit_code == 1
    assert data["all_zero"] and len(data["printed_dual_failures"]) == 43


def test_tier_gate_and_bad_model():
    res, _ = run("--model", "H1_32_N1", "effects", "enum")
    assert res.exit_code == 2
    res, _ = run("--model", "Q9", "effects", "enum")
    assert res.exit_code != 0
