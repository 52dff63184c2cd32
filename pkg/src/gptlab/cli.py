"""Command-line front end: every command prints (or writes) one JSON report."""

from __future__ import annotations

import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click

from .exactnum import fmt_rat, rat

EXIT_ASSERT = 1
EXIT_USAGE = 2


# ----------------------------------------------------------- parsing


def parse_alpha(text: str) -> list:
    """``p/q`` (or an integer/decimal) or ``grid:a..b:step``; returns exact values."""
    text = text.strip()
    if text.startswith("grid:"):
        try:
            span, step = text[5:].rsplit(":", 1)
            lo, hi = span.split("..")
            lo, hi, step = rat(lo), rat(hi), rat(step)
        except (ValueError, ZeroDivisionError) as exc:
            raise click.BadParameter(f"malformed grid {text!r}") from exc
        if step <= 0 or lo > hi:
            raise click.BadParameter(f"empty grid {text!r}")
        out, v = [], lo
        while v <= hi:
            out.append(v)
            v += step
        return out
    try:
        return [rat(text)]
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"malformed rational {text!r}") from exc


def _jobs(value) -> int:
    if value:
        return max(1, int(value))
    env = os.environ.get("GPTLAB_JOBS")
    return max(1, int(env)) if env else 1


class Report:
    def __init__(self, ctx: click.Context, command: str):
        self.opts = ctx.obj
        self.data = {"command": command, "seed": self.opts["seed"], "tier": self.opts["tier"]}
        self.checks = []

    def check(self, name: str, ok: bool, anchor: str, detail=None):
        item = {"name": name, "ok": bool(ok), "anchor": anchor}
        if detail is not None:
            item["detail"] = detail
        self.checks.append(item)

    def attach(self, name: str, text: str):
        out = self.opts["out"]
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / name).write_text(text)
            self.data.setdefault("files", []).append(name)

    def emit(self):
        self.data["assertions"] = self.checks
        self.data["ok"] = all(c["ok"] for c in self.checks)
        text = json.dumps(self.data, indent=1, sort_keys=True, default=_jsonable) + "\n"
        out = self.opts["out"]
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            name = self.data["command"].replace(" ", "_") + ".json"
            (Path(out) / name).write_text(text)
        click.echo(text, nl=False)
        if not self.data["ok"]:
            for c in self.checks:
                if not c["ok"]:
                    click.echo(f"assertion failed: {c['name']} [{c['anchor']}]", err=True)
            sys.exit(EXIT_ASSERT)


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt_rat(v)
    if hasattr(v, "to_text"):
        return v.to_text()
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, (set, tuple)):
        return list(v)
    return str(v)


def _model(spec: str, alpha):
    from .scenario import load_model_spec, model_from_id

    if spec.endswith(".json") and Path(spec).exists():
        return load_model_spec(spec)
    try:
        return model_from_id(spec, alpha)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--model") from exc


def _require_tier(ctx, m):
    from .scenario import SC22

    if m.scenario != SC22 and ctx.obj["tier"] != "full":
        click.echo("this model needs --tier full", err=True)
        sys.exit(EXIT_USAGE)


# ----------------------------------------------------------- commands


@click.group()
@click.option("--model", default="H0_22", show_default=True, help="Model id, e.g. H1_22_PR2, or a JSON spec.")
@click.option("--alpha", default=None, help="p/q or grid:a..b:step (default 1; certificates use their grid)")
@click.option("--tier", type=click.Choice(["fast", "full"]), default="fast", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Directory for report files.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None, help="Worker processes (falls back to GPTLAB_JOBS).")
@click.pass_context
def main(ctx, model, alpha, tier, out, seed, jobs):
    """Exact computations on bipartite box-world models and their effects."""
    ctx.obj = {"model": model, "alphas": parse_alpha(alpha or "1"), "alpha_given": alpha is not None,
               "tier": tier,
               "out": out, "seed": seed, "jobs": _jobs(jobs)}


@main.group()
def space():
    """State spaces."""


@space.command("build")
@click.pass_context
def space_build(ctx):
    from .polytope import VRep, dump_hrep, dump_vrep
    from .scenario import facet_types

    rep = Report(ctx, "space build")
    rows = []
    for a in ctx.obj["alphas"]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = _model(ctx.obj["model"], a)
        for w in m.warnings:
            click.echo(f"warning: {w}", err=True)
        row = m.to_json()
        if m.scenario.parties == 2 and (m.g > 0 or ctx.obj["tier"] == "full" or m.scenario.m == 2):
            row["facets"] = len(m.facets.inequalities)
            row["facet_types"] = facet_types(m)
            rep.attach(f"{m.name}_{fmt_rat(a).replace('/', '-')}.h", dump_hrep(m.facets))
        rep.attach(f"{m.name}_{fmt_rat(a).replace('/', '-')}.v",
                   dump_vrep(VRep([v.entries for v in m.vertices])))
        rows.append(row)
    rep.data["models"] = rows
    rep.emit()


@main.group()
def effects():
    """Effect polytopes."""


def _effect_sets(ctx):
    from .effects import maximal_effect_space

    for a in ctx.obj["alphas"]:
        m = _model(ctx.obj["model"], a)
        _require_tier(ctx, m)
        yield m, maximal_effect_space(m)


@effects.command("enum")
@click.pass_context
def effects_enum(ctx):
    from .polytope import VRep, dump_vrep

    rep = Report(ctx, "effects enum")
    rows = []
    for m, es in _effect_sets(ctx):
        tc = es.tag_counts()
        rows.append({"model": m.name, "alpha": fmt_rat(m.alpha), "count": len(es), **tc})
        rep.attach(f"effects_{m.name}_{fmt_rat(m.alpha).replace('/', '-')}.v",
                   dump_vrep(VRep([e.entries for e in es.effects])))
    rep.data["results"] = rows
    rep.emit()


@effects.command("classify")
@click.pass_context
def effects_classify(ctx):
    from .effects import effect_report

    rep = Report(ctx, "effects classify")
    rep.data["results"] = [effect_report(es) for _, es in _effect_sets(ctx)]
    rep.emit()


@main.group()
def couplers():
    """Entanglement-swapping effects."""


@couplers.command("find")
@click.option("--restrict", type=click.Choice(["all", "weak", "minimal"]), default="all", show_default=True)
@click.option("--records", is_flag=True, help="Include every coupler record.")
@click.pass_context
def couplers_find(ctx, restrict, records):
    from .coupling import coupler_report

    rep = Report(ctx, "couplers find")
    rows = []
    for m, es in _effect_sets(ctx):
        r = coupler_report(m, es.effects, restrict=restrict)
        if not records:
            r = {k: v for k, v in r.items() if k != "records"}
        rows.append(r)
    rep.data["results"] = rows
    rep.emit()


@main.group()
def preserve():
    """Minimal 2-preservability."""


@preserve.command("check")
@click.option("--tsirelson", "tsirelson_g", type=int, default=None,
              help="Run the equivalence check over the party-symmetric models with this g.")
@click.pass_context
def preserve_check(ctx, tsirelson_g):
    from .preservability import TsirelsonMismatch, preservability_report, tsirelson_check

    rep = Report(ctx, "preserve check")
    rows = []
    if tsirelson_g is not None:
        for a in ctx.obj["alphas"]:
            try:
                r = tsirelson_check(tsirelson_g, a)
                rep.check(f"tsirelson g={tsirelson_g} alpha={fmt_rat(a)}", True, "tsirelson-equivalence")
            except TsirelsonMismatch as exc:
                r = {"g": tsirelson_g, "alpha": fmt_rat(a), "error": str(exc)}
                rep.check(f"tsirelson g={tsirelson_g} alpha={fmt_rat(a)}", False,
                          "tsirelson-equivalence", str(exc))
            rows.append(r)
    else:
        for m, es in _effect_sets(ctx):
            rows.append(preservability_report(m, es.effects))
    rep.data["results"] = rows
    rep.emit()


def _certify_one(args):
    key, a, solve_lp = args
    from .preservability import certify_no_couplers

    return certify_no_couplers([key], [a], solve_lp=solve_lp)


def _certify(ctx, classes, solve_lp):
    from .preservability import ALPHA_GRID, certificate_rows

    keys = list(classes) or sorted({f"{r['g']}:{r['cls']}" for r in certificate_rows()})
    alphas = ctx.obj["alphas"] if ctx.obj["alpha_given"] else list(ALPHA_GRID)
    tasks = [(k, a, solve_lp) for k in keys for a in alphas]
    if ctx.obj["jobs"] > 1:
        with ProcessPoolExecutor(ctx.obj["jobs"]) as pool:
            parts = list(pool.map(_certify_one, tasks))
    else:
        parts = [_certify_one(t) for t in tasks]
    bundle = [b for p in parts for b in p["bundle"]]
    rows = [r for b in bundle for r in b["rows"]]
    summary = {
        "instances": len(rows),
        "all_zero": all(Fraction(r["optimum"]) == 0 for r in rows),
        "printed_dual_verified": sum(1 for r in rows if r["printed_dual"]),
        "printed_dual_by_label": sum(1 for r in rows if r["printed_dual"] == "label"),
        "printed_dual_by_position": sum(1 for r in rows if r["printed_dual"] == "position"),
        "printed_primal_verified": sum(1 for r in rows if r["printed_primal"]),
    }
    return summary, bundle


@main.group()
def certify():
    """LP certificates."""


@certify.command("no-couplers")
@click.option("--class", "classes", multiple=True, help='Class key "g:class", repeatable.')
@click.option("--no-solve", is_flag=True, help="Skip the LP solve; rely on one-entry dual certificates.")
@click.option("--bundle", is_flag=True, help="Include the per-instance certificate bundle.")
@click.pass_context
def certify_no_couplers_cmd(ctx, classes, no_solve, bundle):
    from .preservability import TheoremViolation

    rep = Report(ctx, "certify no-couplers")
    try:
        summary, b = _certify(ctx, classes, not no_solve)
    except TheoremViolation as exc:
        rep.check("every tabulated LP optimum is 0", False, "no-coupler theorem", str(exc))
        rep.emit()
        return
    rep.data.update(summary)
    if bundle:
        rep.data["bundle"] = b
    rep.check("every tabulated LP optimum is 0", summary["all_zero"], "no-coupler theorem")
    rep.emit()


@main.group()
def verify():
    """Checks against published tables."""


@verify.command("appendix-h")
@click.option("--class", "classes", multiple=True, help='Class key "g:class", repeatable.')
@click.pass_context
def verify_tables(ctx, classes):
    from .preservability import TheoremViolation

    rep = Report(ctx, "verify appendix-h")
    try:
        summary, bundle = _certify(ctx, classes, True)
    except TheoremViolation as exc:
        rep.check("LP optima", False, "no-coupler tables", str(exc))
        rep.emit()
        return
    rep.data.update(summary)
    failing = [{"key": b["key"], "alpha": b["alpha"], "pair": r["pair"], "game": r["game"]}
               for b in bundle for r in b["rows"] if not r["printed_dual"]]
    rep.data["printed_dual_failures"] = failing
    rep.check("LP optima are 0", summary["all_zero"], "no-coupler tables")
    rep.check("printed dual certificates verify", not failing, "no-coupler tables",
              f"{len(failing)} of {summary['instances']} rows fail as printed")
    rep.emit()


@main.group()
def achsh():
    """Adaptive CHSH."""


@achsh.command("bound")
@click.pass_context
def achsh_bound(ctx):
    from .achsh import ScopeError, winning_bound

    rep = Report(ctx, "achsh bound")
    rows = []
    for m, es in _effect_sets(ctx):
        try:
            r = winning_bound(m, es.effects)
        except ScopeError as exc:
            rep.check(f"{m.name} in scope", False, "winning-bound theorem", str(exc))
            continue
        rows.append(r.to_json() | {"alpha": fmt_rat(m.alpha)})
        rep.check(f"{m.name} alpha={fmt_rat(m.alpha)} below quantum", not r.beats_quantum,
                  "winning-bound theorem")
    rep.data["results"] = rows
    rep.emit()


@main.group()
def orbits():
    """Relabelling classes."""


@orbits.command("classify")
@click.option("--g", "g", type=int, required=True)
@click.option("--subgroup", type=click.Choice(["full", "local"]), default="full", show_default=True)
@click.option("--party-symmetric", is_flag=True)
@click.pass_context
def orbits_classify(ctx, g, subgroup, party_symmetric):
    from .scenario import BOX_IDS, classify_pr_subsets

    rep = Report(ctx, "orbits classify")
    classes = classify_pr_subsets(g, party_symmetric, subgroup)
    rep.data["g"] = g
    rep.data["classes"] = [{"size": c.size, "party_symmetric": c.party_symmetric,
                            "representative": [BOX_IDS[i - 1] for i in c.representative]}
                           for c in classes]
    rep.emit()


@main.group()
def lemma():
    """Single-game lemma."""


@lemma.command("chsh-pairs")
@click.pass_context
def lemma_pairs(ctx):
    from .achsh import chsh_pair_table

    rep = Report(ctx, "lemma chsh-pairs")
    table = chsh_pair_table()
    rep.data["pairs"] = {f"{i},{j}": fmt_rat(v) for (i, j), v in table.items()}
    rep.check("max <C_i + C_j, p> <= 3/2", all(v <= Fraction(3, 2) for v in table.values()),
              "single-game lemma")
    opposite = {(i, i + 4) for i in range(1, 5)}
    rep.check("opposite pairs give 1", all(table[p] == 1 for p in opposite), "single-game lemma")
    rep.emit()


if __name__ == "__main__":
    main()
