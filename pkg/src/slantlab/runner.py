"""Check registry and orchestration of configured runs."""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from . import calculus, slant, warped
from .ambient import STRUCTURES, structure_residuals
from .catalog import default_resolution
from .errors import SlantLabError
from .report import FAIL, NON_CONFORMING, PASS, SKIPPED, Entry, config_hash, dumps, judge, skip, sort_key
from .warped import WarpedChart

GLOBAL = "*"


@dataclass
class Context:
    obj: object
    points: list
    rng: np.random.Generator
    tol: float = None
    tags: tuple = ()

    @property
    def chart(self):
        return self.obj.chart if isinstance(self.obj, WarpedChart) else self.obj

    def kw(self, default):
        return self.tol if self.tol is not None else default


def _per_point(name, fn, default_tol):
    def run(ctx):
        out = []
        for k, x in enumerate(ctx.points):
            pa = slant.analyze(ctx.chart, x)
            res = 0.0
            for R in STRUCTURES:
                sa = pa.structures[R]
                if sa.conforming:
                    res = max(res, *fn(sa).values())
            out.append(judge(name, k, res, ctx.kw(default_tol), labels=list(pa.labels),
                             theta=slant.theta_dict(pa)))
        return out
    return run


def _structure_algebra(ctx):
    out = []
    for k, x in enumerate(ctx.points):
        p = ctx.chart.point(x)
        res = structure_residuals(*ctx.chart.basis.at(p))
        out.append(judge("structure_algebra", k, max(res.values()), ctx.kw(1e-12), detail=res))
    return out


def _classification(ctx):
    out = []
    for k, x in enumerate(ctx.points):
        pa = slant.analyze(ctx.chart, x)
        status = PASS if all(sa.conforming for sa in pa.structures.values()) else NON_CONFORMING
        detail = {R: {"label": pa.structures[R].label, "d1_dim": pa.structures[R].d1_dim,
                      "mu_dim": pa.structures[R].mu_dim} for R in STRUCTURES}
        out.append(Entry("classification", k, status, labels=list(pa.labels),
                         theta=slant.theta_dict(pa), detail=detail))
    return out


_SCALES = (
    lambda p: 0.3 * float(p @ p),
    lambda p: math.sin(float(np.sum(p))),
    lambda p: 1.0,
)


def _conformal(ctx):
    runs = [slant.conformal_invariance_check(ctx.chart, ctx.points, s, ctx.kw(1e-10)) for s in _SCALES]
    out = []
    for entries in zip(*runs):
        worst = max(e.residual for e in entries)
        out.append(judge("conformal_invariance", entries[0].point, worst, ctx.kw(1e-10),
                         theta=entries[0].theta))
    return out


def _warped_only(name, fn, candidates=False):
    def run(ctx):
        if not isinstance(ctx.obj, WarpedChart):
            return [skip(name, None, "not a warped chart")]
        if "candidate" in ctx.tags and not candidates:
            return [skip(name, None, "non-existence candidate; warped hypotheses are probed instead")]
        return fn(ctx)
    return run


def _nonexistence(ctx):
    if "candidate" not in ctx.tags:
        return [skip("nonexistence_probe", None, "not a non-existence candidate")]
    return warped.nonexistence_probe([ctx.obj])


def _frame_level(ctx):
    return warped.frame_level_check(ctx.rng, tol=ctx.kw(1e-10))


def _orthogonality_sums(ctx):
    return warped.orthogonality_check(ctx.rng, tol=ctx.kw(1e-12))


CHECKS: Dict[str, Callable] = {
    "structure_algebra": _structure_algebra,
    "classification": _classification,
    "pointwise_constancy": lambda c: slant.check_pointwise_constancy(c.chart, c.points, c.kw(slant.CLUSTER_TOL)),
    "tensor_identities": _per_point("tensor_identities", slant.tensor_identity_residuals, 1e-8),
    "slant_bilinear": _per_point("slant_bilinear", slant.bilinear_residuals, 1e-8),
    "distribution_invariants": _per_point("distribution_invariants", slant.distribution_residuals, 1e-8),
    "gauss_weingarten": lambda c: calculus.gauss_weingarten_check(c.chart, c.points, c.rng, c.kw(1e-6)),
    "orthogonality_preservation": lambda c: slant.orthogonality_preservation_check(
        c.chart, c.points, c.rng, tol=c.kw(1e-9)),
    "conformal_invariance": _conformal,
    "constancy_criterion": lambda c: slant.constancy_criterion_check(c.chart, c.points, identity_tol=c.kw(1e-5)),
    "covariant_identities": lambda c: calculus.covariant_identities_check(c.chart, c.points, c.rng, c.kw(1e-5)),
    "integrability_d1": lambda c: calculus.integrability_check_d1(c.chart, c.points, c.kw(1e-6)),
    "integrability_d2": lambda c: calculus.integrability_check_d2(c.chart, c.points, c.kw(1e-6)),
    "foliation_d1": lambda c: calculus.foliation_check(c.chart, c.points, "d1", c.kw(1e-5)),
    "foliation_d2": lambda c: calculus.foliation_check(c.chart, c.points, "d2", c.kw(1e-5)),
    "umbilic": lambda c: calculus.umbilic_check(c.chart, c.points, c.kw(1e-6)),
    "kahler_form_closed": lambda c: calculus.kahler_form_check(c.chart, c.points, c.rng, tol=c.kw(1e-4)),
    "warp_identities": _warped_only(
        "warp_identities", lambda c: warped.warp_identities_check(c.obj, c.points, c.kw(1e-4))),
    "warped_lemmas": _warped_only(
        "warped_lemmas", lambda c: warped.warped_lemmas_check(c.obj, c.points, c.kw(1e-4))),
    "warped_inequality": _warped_only(
        "warped_inequality", lambda c: warped.inequality_check(c.obj, c.points, c.kw(1e-6))),
    "nonexistence_probe": _warped_only("nonexistence_probe", _nonexistence, candidates=True),
    "frame_level_oracle": _frame_level,
    "orthogonality_sums": _orthogonality_sums,
}

# checks that do not depend on a chart; they run once per report
GLOBAL_CHECKS = ("frame_level_oracle", "orthogonality_sums")


def task_rng(seed, chart_name, check):
    key = zlib.crc32(f"{chart_name}\0{check}".encode("utf-8"))
    return np.random.default_rng([seed, key])


def run_check(obj, name, chart_name, points, seed, tol=None, tags=()):
    """Run one check on one chart; module errors become failed entries."""
    ctx = Context(obj, points, task_rng(seed, chart_name, name), tol, tags)
    try:
        entries = CHECKS[name](ctx)
    except (SlantLabError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        entries = [Entry(name, None, FAIL, reason=f"{type(exc).__name__}: {exc}")]
    for e in entries:
        e.chart = chart_name
        if e.check != name:
            e.check = name
    return entries


def _task(args):
    spec, ambient_dim, basis_spec, name, seed, tol = args
    try:
        obj = spec.build(ambient_dim, basis_spec)
        chart = obj.chart if isinstance(obj, WarpedChart) else obj
        res = spec.resolution or default_resolution(chart)
        points = chart.grid(res)
    except (SlantLabError, ValueError) as exc:
        return [Entry(name, None, FAIL, reason=f"{type(exc).__name__}: {exc}", chart=spec.name)]
    return run_check(obj, name, spec.name, points, seed, tol, spec.tags())


def _global_task(args):
    name, seed, tol = args
    return run_check(None, name, GLOBAL, [], seed, tol)


def run_catalog(config, seed=None, jobs=1):
    """Execute every configured check; returns the sorted list of entries."""
    seed = config.seed if seed is None else seed
    tasks = []
    for spec in config.charts:
        for name in config.checks:
            if name in GLOBAL_CHECKS:
                continue
            tasks.append((spec, config.ambient_dim, config.basis_spec, name, seed,
                          config.tolerances.get(name)))
    gtasks = [(n, seed, config.tolerances.get(n)) for n in config.checks if n in GLOBAL_CHECKS]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks)) + list(pool.map(_global_task, gtasks))
    else:
        results = [_task(t) for t in tasks] + [_global_task(t) for t in gtasks]
    entries = [e for batch in results for e in batch]
    entries.sort(key=sort_key)
    return entries


def exit_status(entries, strict=False):
    bad = {FAIL, SKIPPED, NON_CONFORMING} if strict else {FAIL}
    return 1 if any(e.status in bad for e in entries) else 0


def report_json(config, entries, seed=None):
    seed = config.seed if seed is None else seed
    obj = {"config_hash": config_hash(config.source), "seed": seed,
           "entries": [e.as_dict() for e in entries]}
    return dumps(obj) + "\n"


def _fmt(v):
    return "-" if v is None else format(v, ".3e")


def report_text(config, entries, seed=None):
    seed = config.seed if seed is None else seed
    lines = [f"config {config_hash(config.source)[:16]} seed {seed}"]
    for e in entries:
        point = "all" if e.point is None else str(e.point)
        theta = ""
        if e.theta:
            theta = " theta=" + ",".join(f"{R}:{'-' if v is None else format(v, '.6f')}"
                                         for R, v in e.theta.items())
        extra = f" ({e.reason})" if e.reason else ""
        lines.append(f"{e.chart:<22} {e.check:<27} {point:>4} {e.status:<14} "
                     f"res={_fmt(e.residual)} tol={_fmt(e.tolerance)}{theta}{extra}")
    counts = {s: sum(e.status == s for e in entries) for s in (PASS, FAIL, SKIPPED, NON_CONFORMING)}
    lines.append("summary " + " ".join(f"{k}={v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"
