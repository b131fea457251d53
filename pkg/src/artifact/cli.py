"""Command-line front end: ``artifact check | galois | cuntz | semicircular | report``.

Exit status: 0 when every check passes, 1 when some check fails, 2 for
configuration errors, 3 when a window, lattice, size or degree bound is hit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .algebra_object import (LatticeOverflowError, build_group_algebra_object, check_algebra_object,
                             galois_lattice, trivial_object)
from .bimodule import hom_dimension, right_reconstruction_defect, watatani_index
from .config import ConfigError, RunConfig, load, loads
from .crossed_product import (BimoduleAction, CrossedProduct, WindowOverflowError, coefficient_distance,
                              delta_roundtrip_check, freeness_estimate, frobenius_dim_check,
                              galois_compatibility, multiplier_bound, peter_weyl_report)
from .models.cuntz import (CuntzAction, SizeOverflowError, build_cuntz_core, crossed_to_words,
                           word_product, word_star, words_distance)
from .models.groups import (CocycleError, FiniteGroup, GroupActionModel, group_crossed_oracle,
                            klein_sign_cocycle, subgroups, trivial_cocycle)
from .models.semicircular import DegreeOverflowError, SemicircularModel, fock_build
from .tensor_cat import CategoryData, isometry_defects

OVERFLOWS = (WindowOverflowError, LatticeOverflowError, SizeOverflowError, DegreeOverflowError)
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_OVERFLOW = 0, 1, 2, 3


# ---------------------------------------------------------------- records
def _clean(v):
    """JSON-ready, deterministic values (floats rounded to 12 significant digits)."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if not math.isfinite(f) else float(f"{f:.12g}")
    if isinstance(v, (complex, np.complexfloating)):
        return _clean(v.real) if abs(v.imag) < 1e-15 else [_clean(v.real), _clean(v.imag)]
    if v is None or isinstance(v, str):
        return v
    return str(v)


@dataclass
class Section:
    suite: str
    config_hash: str
    seed: int
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name: str, defect: float, threshold: float, details=None, passed: bool | None = None) -> bool:
        ok = bool(defect <= threshold) if passed is None else bool(passed)
        h = hashlib.sha256(f"{self.config_hash}:{self.suite}:{name}:{self.seed}".encode()).hexdigest()[:12]
        rec = {"name": name, "inputs_hash": h, "defect": defect, "threshold": threshold, "passed": ok}
        if details is not None:
            rec["details"] = details
        self.checks.append(_clean(rec))
        return ok

    def skip(self, name: str, reason: str) -> None:
        self.notes.append(f"{name}: skipped ({reason})")

    def as_dict(self) -> dict:
        return {"suite": self.suite, "checks": self.checks, "notes": self.notes}


# ---------------------------------------------------------------- context
@dataclass
class Context:
    cfg: RunConfig
    kind: str
    model: object = None
    category: object = None
    obj: object = None
    P: object = None
    normalizer: int = 1
    group: object = None
    window_labels: list = field(default_factory=list)


def _group_from_config(cfg: RunConfig) -> FiniteGroup:
    table_path = cfg.get("model", "group_table")
    if table_path:
        try:
            rows = [[int(x) for x in line.split()] for line in Path(table_path).read_text().splitlines()
                    if line.strip() and not line.lstrip().startswith("#")]
            return FiniteGroup(tuple(tuple(r) for r in rows), name=Path(table_path).stem)
        except (OSError, ValueError) as e:
            raise ConfigError("model.group_table", f"unusable multiplication table: {e}") from None
    try:
        return FiniteGroup.by_name(cfg.get("model", "group"))
    except ValueError as e:
        raise ConfigError("model.group", str(e)) from None


def _cocycle(cfg: RunConfig, G: FiniteGroup) -> np.ndarray:
    kind = cfg.get("model", "cocycle")
    if kind == "trivial":
        return trivial_cocycle(G)
    if kind == "klein":
        if G.order != 4 or G.is_abelian and any(G.element_order(g) == 4 for g in G.elements):
            raise ConfigError("model.cocycle", "the klein cocycle needs the group Z2xZ2")
        return klein_sign_cocycle(G)[1]
    rng = np.random.default_rng(cfg.seed)
    mu = np.exp(2j * np.pi * rng.random(G.order))
    mu[0] = 1.0
    return np.array([[mu[g] * mu[h] / mu[G.mul(g, h)] for h in G.elements] for g in G.elements])


def build_context(cfg: RunConfig) -> Context:
    cfg.validate()
    kind = cfg.kind
    ctx = Context(cfg, kind)
    if kind == "group":
        G = _group_from_config(cfg)
        w = _cocycle(cfg, G)
        try:
            bd = int(cfg.get("model", "block_dim"))
        except ValueError:
            raise ConfigError("model.block_dim", "expected int") from None
        model = (GroupActionModel.inner(G, w, seed=cfg.seed) if cfg.get("model", "action") == "inner"
                 else GroupActionModel.permutation(G, bd, w))
        cat = CategoryData.from_group_model(model)
        fibers = cfg.get("object", "fibers").strip()
        if fibers in ("", "all"):
            sub = list(G.elements)
        else:
            index = {name: g for g, name in enumerate(G.names)}
            index.update({str(g): g for g in G.elements})
            sub = []
            for tok in (t.strip() for t in fibers.split(";" if ";" in fibers else ",")):
                if tok not in index:
                    raise ConfigError("object.fibers", f"unknown label {tok!r}")
                sub.append(index[tok])
        if 0 not in sub:
            raise ConfigError("object.fibers", "the unit fiber is missing (the object must be connected)")
        try:
            obj = (trivial_object(cat) if cfg.get("object", "kind") == "trivial"
                   else build_group_algebra_object(cat, sub, w))
        except CocycleError as e:
            raise ConfigError("model.cocycle", str(e)) from None
        except ValueError as e:
            raise ConfigError("object.fibers", str(e)) from None
        ctx.model, ctx.category, ctx.obj, ctx.group = model, cat, obj, G
        ctx.P = CrossedProduct(BimoduleAction(cat), obj)
        e = cat.simples[cat.unit]
        ctx.normalizer = hom_dimension(e, e)
        ctx.window_labels = list(ctx.P.window)
    elif kind == "cuntz":
        n, window = int(cfg.get("model", "n")), cfg.window
        act = CuntzAction(n, window)
        ctx.model, ctx.category, ctx.obj = act, act.category, act.obj
        ctx.P = CrossedProduct(act, act.obj)
        ctx.window_labels = list(ctx.P.window)
    else:
        name = cfg.get("model", "semicircular")
        cap = int(cfg.get("model", "degree_cap"))
        ctx.model = SemicircularModel.scalar(cap) if name == "scalar" else SemicircularModel.block_example(cap)
    return ctx


# ---------------------------------------------------------------- suites
def suite_axioms(ctx: Context, sec: Section) -> None:
    tol = ctx.cfg.tol
    if ctx.kind == "semicircular":
        m = ctx.model
        sec.add("covariance_completely_positive", m.cp_defect(), tol)
        tc = m.trace_compatibility_defect()
        if tc is None:
            sec.skip("trace_compatibility", "no trace supplied")
        else:
            sec.add("trace_compatibility", tc, tol)
        return
    cat = ctx.category
    sec.add("fusion_associativity", float(len(cat.check_fusion_associativity())), 0.0)
    sec.add("unit_and_duality", 0.0 if cat.check_unit() and cat.check_duality() else 1.0, 0.0)
    sec.add("frobenius_perron", cat.frobenius_perron_defect(), 1e-6)
    res = check_algebra_object(ctx.obj, tol=min(tol, 1e-10))
    sec.add("algebra_object", max(res["defects"].values()), min(tol, 1e-10), res["defects"])
    if ctx.kind == "group":
        worst = 0.0
        labels = cat.labels[:4]
        for a in labels:
            for b in labels:
                worst = max(worst, max(isometry_defects(cat, a, b).values()))
        sec.add("isometry_resolution", worst, tol)
        rng = np.random.default_rng(ctx.cfg.seed)
        idx = rec = 0.0
        for g in cat.labels:
            K = cat.simples[g]
            ind = watatani_index(K)
            idx = max(idx, (ind - K.left.identity()).norm())
            rec = max(rec, right_reconstruction_defect(K, K.random_vector(rng)))
        sec.add("simple_index_is_one", idx, tol)
        sec.add("right_reconstruction", rec, tol)


def _sample_labels(ctx: Context) -> list:
    if ctx.kind == "cuntz":
        half = ctx.cfg.window // 2
        return [c for c in ctx.P.window if abs(c) <= half]
    return list(ctx.P.window)


def suite_crossed(ctx: Context, sec: Section) -> None:
    if ctx.kind == "semicircular":
        sec.skip("crossed", "no graded crossed product for the semicircular model")
        return
    cfg, P, tol = ctx.cfg, ctx.P, ctx.cfg.tol
    rng = np.random.default_rng(cfg.seed)
    if ctx.kind == "group":
        rep = group_crossed_oracle(ctx.model, ctx.obj, seed=cfg.seed)
        sec.add("convolution_oracle", max(rep["multiplication_defect"], rep["star_defect"]), 1e-10, rep)
        sec.add("expectation_is_identity_coefficient", rep["expectation_defect"], 0.0)
    else:
        err, pairs = 0.0, 0
        n = ctx.model.n
        half = [c for c in P.window if abs(c) <= cfg.window // 2] or [0]
        for _ in range(cfg.samples):
            x = P.random_element(rng, labels=[half[rng.integers(len(half))]])
            y = P.random_element(rng, labels=[half[rng.integers(len(half))]])
            err = max(err, words_distance(crossed_to_words(P, P.mul(x, y)),
                                          word_product(crossed_to_words(P, x), crossed_to_words(P, y)), n))
            err = max(err, words_distance(crossed_to_words(P, P.star(x)), word_star(crossed_to_words(P, x)), n))
            pairs += 1
        sec.add("cuntz_word_oracle", err, 1e-10, {"pairs": pairs})
    labels = _sample_labels(ctx)
    assoc = star = 0.0
    for _ in range(cfg.samples):
        lab = [labels[rng.integers(len(labels))]] if ctx.kind == "cuntz" else None
        x, y, z = (P.random_element(rng, labels=lab) for _ in range(3))
        if ctx.kind == "cuntz":
            y = P.from_algebra(ctx.model.algebra_random(rng))
        assoc = max(assoc, coefficient_distance(P.mul(P.mul(x, y), z), P.mul(x, P.mul(y, z)))
                    / max(1.0, x.max_coefficient() * y.max_coefficient() * z.max_coefficient()))
        star = max(star, coefficient_distance(P.star(P.mul(x, y)), P.mul(P.star(y), P.star(x)))
                   / max(1.0, x.max_coefficient() * y.max_coefficient()))
    sec.add("associativity", assoc, tol)
    sec.add("star_antimultiplicative", star, tol)
    pos = faith = bimod = cy = 0.0
    for _ in range(cfg.samples):
        x = P.random_element(rng, labels=labels)
        e = P.inner(x, x)
        pos = max(pos, max(0.0, -_min_eig(e)) / max(1.0, e.norm()))
        if x.max_coefficient() > 1e-6 and e.norm() <= 1e-12:
            faith = 1.0
        a, b = ctx.model.algebra_random(rng) if ctx.kind == "cuntz" else P.action.algebra_random(rng), \
            P.action.algebra_random(rng)
        lhs = P.expectation(P.mul(P.mul(P.from_algebra(a), x), P.from_algebra(b)))
        rhs = a @ P.expectation(x) @ b
        bimod = max(bimod, (lhs - rhs).norm() / max(1.0, lhs.norm()))
        y = P.random_element(rng, labels=labels)
        yx = P.mul(y, x)
        C = multiplier_bound(P, y)
        gap = e * C - P.module_inner(yx, yx)
        cy = max(cy, max(0.0, -_min_eig(gap)) / max(1.0, gap.norm()))
    sec.add("expectation_positive", pos, tol)
    sec.add("expectation_faithful", faith, 0.0)
    sec.add("expectation_bimodular", bimod, tol)
    sec.add("bounded_multiplier", cy, tol)


def _min_eig(x) -> float:
    if hasattr(x, "min_eigenvalue"):
        return x.min_eigenvalue()
    return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2).min()) for b in x.blocks)


def _needs_free(ctx: Context, sec: Section, name: str) -> bool:
    if ctx.kind == "semicircular":
        sec.skip(name, "not defined for the semicircular model")
        return False
    if ctx.kind == "group" and not ctx.model.acts_freely:
        sec.skip(name, "the action is not free on blocks, so simples are not separated")
        return False
    return True


def suite_peter_weyl(ctx: Context, sec: Section) -> None:
    if not _needs_free(ctx, sec, "peter-weyl"):
        return
    rep = peter_weyl_report(ctx.P, normalizer=ctx.normalizer)
    sec.add("multiplicities_equal_fiber_dims", 0.0 if rep["matches_fibers"] else 1.0, 0.0, rep)
    sec.add("weighted_sum_equals_correspondence_dim",
            abs(rep["weighted_sum"] - rep["correspondence_dim"]), 0.0)
    fib = sum(d ** 2 for d in rep["fiber_dims"].values())
    sec.add("relative_commutant_dim", abs(rep["relative_commutant_dim"] - fib), 0.0)


def suite_frobenius(ctx: Context, sec: Section) -> None:
    if not _needs_free(ctx, sec, "frobenius"):
        return
    tol = ctx.cfg.tol
    for c in ctx.window_labels:
        rep = frobenius_dim_check(ctx.P, c, normalizer=ctx.normalizer)
        name = ctx.category.names[c]
        sec.add(f"hom_dims[{name}]", float(abs(rep["diamond_dim"] - rep["intertwiner_dim"])), 0.0, rep)
        sec.add(f"roundtrip[{name}]", max(rep["roundtrip_defect"], rep["subspace_gap"]), tol)
    rep = delta_roundtrip_check(ctx.P, normalizer=ctx.normalizer)
    sec.add("recovered_object", rep["multiplication_defect"], tol, rep, passed=rep["passed"])


def suite_galois(ctx: Context, sec: Section) -> None:
    if ctx.kind != "group":
        sec.skip("galois", "implemented for group algebra objects")
        return
    lat = galois_lattice(ctx.obj)
    support = ctx.obj.support
    subs = subgroups(ctx.group, support)
    sec.add("lattice_matches_subgroups", float(abs(len(lat.nodes) - len(subs))), 0.0,
            {"nodes": len(lat.nodes), "subgroups": len(subs)}, passed=set(lat.supports()) == set(subs))
    rep = lat.report()
    sec.notes.append(f"lattice: {len(lat.nodes)} nodes {rep['nodes']}, hasse edges {rep['hasse_edges']}")
    worst = 0.0
    samples = min(ctx.cfg.samples, 5)
    for k, D in enumerate(lat.nodes):
        rep = galois_compatibility(ctx.P, D, samples=samples, seed=ctx.cfg.seed + k)
        worst = max(worst, max(rep["defects"].values()))
    sec.add("projection_compatibility", worst, ctx.cfg.tol)


def suite_freeness(ctx: Context, sec: Section) -> None:
    if ctx.kind != "group":
        sec.skip("freeness", "implemented for group actions")
        return
    cat = ctx.category
    est = {}
    for g in cat.labels:
        K = cat.simples[g]
        est[cat.names[g]] = freeness_estimate(K, K.right_pp_basis()[0], trials=ctx.cfg.samples,
                                              seed=ctx.cfg.seed)["estimate"]
    unit = est[cat.names[cat.unit]]
    sec.add("unit_bimodule_estimate_is_one", abs(unit - 1.0), ctx.cfg.tol, est)
    if ctx.model.acts_freely:
        worst = max((v for k, v in est.items() if k != cat.names[cat.unit]), default=0.0)
        sec.add("free_action_estimate_vanishes", worst, 1e-12)
    else:
        sec.skip("free_action_estimate_vanishes", "the action is not free on blocks")


def suite_cuntz(ctx: Context, sec: Section) -> None:
    if ctx.kind != "cuntz":
        sec.skip("cuntz", "needs a cuntz model")
        return
    n, depth, tol = int(ctx.cfg.get("model", "n")), int(ctx.cfg.get("model", "depth")), ctx.cfg.tol
    reports = []
    for k in (depth, depth + 1):
        core = build_cuntz_core(n, k)
        rep = core.report()
        reports.append(rep)
        sec.add(f"index[depth={k}]", rep["index_defect"], tol, {"index": f"{rep['index_scalar']:g}*1"})
        sec.add(f"left_basis_orthonormal[depth={k}]", rep["left_basis_gram_defect"], tol)
        sec.add(f"reconstruction[depth={k}]", max(rep["reconstruction"].values()), tol)
        sec.add(f"end_dimension[depth={k}]", float(abs(rep["end_dimension"] - n * n)), 0.0,
                {"end_dimension": rep["end_dimension"]})
        sec.add(f"shift_identity[depth={k}]", rep["shift_identity_defect"], tol)
        pair = core.corner_pairings()
        off = max((v for (i, j), v in pair.items() if i != j), default=0.0)
        sec.add(f"corner_pairing_offdiagonal[depth={k}]", off, tol)
        sec.add(f"corner_generation[depth={k}]", 0.0 if core.corner_generation() else 1.0, 0.0)
    a, b = reports
    stab = max(abs(a["index_scalar"] - b["index_scalar"]), abs(a["end_dimension"] - b["end_dimension"]),
               abs(a["left_basis_gram_defect"] - b["left_basis_gram_defect"]))
    sec.add("depth_stability", stab, 1e-8)


def _catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def suite_semicircular(ctx: Context, sec: Section) -> None:
    if ctx.kind != "semicircular":
        sec.skip("semicircular", "needs a semicircular model")
        return
    F = fock_build(ctx.model)
    cap = ctx.model.degree_cap
    if ctx.model.d == 1 and ctx.model.size == 1:
        worst, table = 0.0, {}
        for k in range(1, cap + 1):
            val = complex(F.moment([0] * k)[0, 0])
            want = _catalan(k // 2) if k % 2 == 0 else 0
            table[k] = val.real
            worst = max(worst, abs(val - want))
        sec.add("moments_catalan", worst, 1e-10, table)
    sec.add("covariance", F.covariance_defect(seed=ctx.cfg.seed), 1e-10)
    wit = {str(i): F.discreteness_witness(i) for i in ctx.model.index_set}
    sec.add("discreteness_witness", 0.0 if all(w["equal"] for w in wit.values()) else 1.0, 0.0, wit)
    sec.add("central_vectors_reported", 0.0, 0.0, {"dims_per_level": F.central_vector_dims()})


SUITE_FUNCS: dict[str, Callable[[Context, Section], None]] = {
    "axioms": suite_axioms, "crossed": suite_crossed, "peter-weyl": suite_peter_weyl,
    "frobenius": suite_frobenius, "galois": suite_galois, "freeness": suite_freeness,
    "cuntz": suite_cuntz, "semicircular": suite_semicircular,
}


# ---------------------------------------------------------------- reports
def run_checks(cfg: RunConfig, suites: list[str] | None = None) -> dict:
    """Run the suites (default: those named in the configuration) and build the machine report."""
    suites = cfg.suites if suites is None else suites
    ctx = build_context(cfg) if suites else None
    h = cfg.hash()
    sections = []
    for name in suites:
        sec = Section(name, h, cfg.seed)
        SUITE_FUNCS[name](ctx, sec)
        sections.append(sec.as_dict())
    checks = [c for s in sections for c in s["checks"]]
    failed = [f"{s['suite']}/{c['name']}" for s in sections for c in s["checks"] if not c["passed"]]
    return {
        "header": {"tool": "artifact", "version": __version__, "config_hash": h, "seed": cfg.seed,
                   "model": cfg.kind, "suites": list(suites)},
        "sections": sections,
        "summary": {"checks": len(checks), "failed": failed, "passed": not failed},
    }


def render_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def render_text(report: dict) -> str:
    hd = report["header"]
    lines = [f"artifact {hd['version']}  model={hd['model']}  config={hd['config_hash']}  seed={hd['seed']}",
             f"suites: {', '.join(hd['suites']) or '(none)'}"]
    for sec in report["sections"]:
        lines.append("")
        lines.append(f"== {sec['suite']} ==")
        for c in sec["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  [{mark}] {c['name']}: defect {c['defect']:.3e} (threshold {c['threshold']:.1e})")
            short = json.dumps(c.get("details"), sort_keys=True) if "details" in c else ""
            if short and len(short) <= 100:
                lines.append(f"         {short}")
        for note in sec["notes"]:
            lines.append(f"  note: {note}")
    s = report["summary"]
    lines.append("")
    lines.append(f"{s['checks']} checks, {len(s['failed'])} failed")
    return "\n".join(lines) + "\n"


def emit_report(report: dict, out: str | Path | None, stem: str = "report") -> tuple[str, str]:
    """Write ``<stem>.json`` and ``<stem>.txt`` under ``out`` (if given); return both texts."""
    js, txt = render_json(report), render_text(report)
    if out is not None:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{stem}.json").write_text(js)
        (d / f"{stem}.txt").write_text(txt)
    return js, txt


# ---------------------------------------------------------------- entry point
def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=False):
        sp.add_argument("--config", required=config_required, help="run configuration file")
        sp.add_argument("--window", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="directory for report.json and report.txt (default: $ARTIFACT_OUT)")
        sp.add_argument("--suite", action="append", help="suite name; repeat to run several in order")

    common(sub.add_parser("check", help="run check suites from a configuration"), config_required=True)
    g = sub.add_parser("galois", help="Galois lattice of a group algebra object")
    common(g)
    g.add_argument("--group", help="named group when no configuration is given")
    c = sub.add_parser("cuntz", help="Cuntz core index and basis checks")
    common(c)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--depth", type=int, default=3)
    s = sub.add_parser("semicircular", help="semicircular Fock model checks")
    common(s)
    s.add_argument("--model", choices=("scalar", "block"), default="scalar")
    s.add_argument("--cap", type=int, default=6)
    r = sub.add_parser("report", help="render a machine report as text, or canonicalize a configuration")
    r.add_argument("--input", help="machine report (JSON) to render")
    r.add_argument("--config", help="configuration to print in canonical form with its hash")
    return p


def _config_for(args) -> RunConfig:
    if args.command == "check" or getattr(args, "config", None):
        cfg = load(args.config)
    elif args.command == "galois":
        if not args.group:
            raise ConfigError("model.group", "give --config or --group")
        cfg = loads(f"[model]\nkind = group\ngroup = {args.group}\n")
    elif args.command == "cuntz":
        cfg = loads(f"[model]\nkind = cuntz\nn = {args.n}\ndepth = {args.depth}\n[run]\nwindow = 1\n")
    else:
        cfg = loads(f"[model]\nkind = semicircular\nsemicircular = {args.model}\ndegree_cap = {args.cap}\n")
    cfg.override("run", "window", args.window)
    cfg.override("run", "tol", args.tol)
    cfg.override("run", "seed", args.seed)
    default_suite = {"galois": "galois", "cuntz": "cuntz", "semicircular": "semicircular"}.get(args.command)
    if args.suite:
        cfg.override("run", "suite", ",".join(args.suite))
    elif default_suite:
        cfg.override("run", "suite", default_suite)
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "report":
            if args.input:
                sys.stdout.write(render_text(json.loads(Path(args.input).read_text())))
                return EXIT_PASS
            if args.config:
                cfg = load(args.config)
                sys.stdout.write(cfg.dumps())
                sys.stdout.write(f"; hash {cfg.hash()}\n")
                return EXIT_PASS
            raise ConfigError("report", "give --input or --config")
        cfg = _config_for(args)
        report = run_checks(cfg)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OVERFLOWS as e:
        print(f"overflow: {e}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = getattr(args, "out", None) or os.environ.get("ARTIFACT_OUT")
    _, txt = emit_report(report, out)
    sys.stdout.write(txt)
    return EXIT_PASS if report["summary"]["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
