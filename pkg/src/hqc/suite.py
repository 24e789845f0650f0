"""
Verification suites: a manifest lists checks with parameters, each check
produces Verdict records, and the runner evaluates independent checks on a
thread pool while keeping the output order of the manifest.

Manifest format, one check per line::

    # comment
    lemma_equivalence functions=z,z2 alphas=0.25,0.5
    mori Ks=1,2,4 n_pairs=10000
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from . import curves, holo, hmap
from . import verify as V
from .errors import HqcError, InputFormatError
from .grid import DiskGrid
from .output import csv_text, dumps

TWO_PI = 2.0 * np.pi

CORE_MANIFEST = """\
# acceptance suite
kernel_normalization n_points=20 r_max=0.99 n_theta=8192
poisson_identity modes=512 r_max=0.99
c_alpha
lemma_equivalence functions=z,z2,z3,mobius,f0 alphas=0.25,0.5,0.75
hardy_littlewood functions=z,z2,z3,mobius,f0 alphas=0.5
f0_non_lipschitz
bergman_closed_form alphas=0.3,0.5,0.75 ps=0.5,1,2
mori Ks=1,2,4
mori_sharpness K=4 exponent=0.5
heinz
isoperimetric functions=z,z2,z3,mobius,one-plus-z
rkc_square
tangent_arg
stretch_sharpness K=2 betas=0.4,0.5,0.6
main_theorem
composition_law
"""

SUITES = {"core": CORE_MANIFEST}


@dataclass
class Context:
    seed: int = 1
    grid_radial: int = 64
    grid_angular: int = 512
    depth: int = 20
    n_pairs: int = 10_000
    exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC
    modes: int = 512

    def grid(self) -> DiskGrid:
        return DiskGrid.build(self.grid_radial, self.grid_angular, self.depth, self.seed)


def _value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_manifest(text: str, source: str = "<manifest>") -> List[tuple]:
    items = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        name, *rest = s.split()
        if name not in CHECKS:
            raise InputFormatError(source, lineno, f"unknown check {name!r}")
        params = {}
        for tok in rest:
            if "=" not in tok:
                raise InputFormatError(source, lineno, f"expected key=value, got {tok!r}")
            key, val = tok.split("=", 1)
            params[key] = [_value(v) for v in val.split(",")] if "," in val else _value(val)
        items.append((name, params))
    return items


def load_manifest(suite: str = None, path=None) -> List[tuple]:
    if path is not None:
        return parse_manifest(Path(path).read_text(), str(path))
    if suite not in SUITES:
        raise HqcError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    return parse_manifest(SUITES[suite], f"<suite {suite}>")


def _list(v):
    return v if isinstance(v, list) else [v]


# ---------------------------------------------------------------------------
# checks

CHECKS: Dict[str, Callable] = {}


def check(fn):
    CHECKS[fn.__name__] = fn
    return fn


@check
def kernel_normalization(params, ctx: Context):
    n = int(params.get("n_points", 20))
    r_max = float(params.get("r_max", 0.99))
    n_theta = int(params.get("n_theta", 8192))
    z = V.random_disk_points(n - 1, ctx.seed) * r_max
    z = np.concatenate([z, [r_max * np.exp(0.3j)]])
    theta = TWO_PI * np.arange(n_theta) / n_theta
    integrals = hmap.poisson_kernel(z[:, None], theta[None, :]).sum(axis=1) * (TWO_PI / n_theta)
    err = np.abs(integrals - 1)
    k = int(np.argmax(err))
    return [V.Verdict("kernel_normalization", float(err[k]), 1e-10, 0.0,
                      {"n_points": n, "r_max": r_max, "n_theta": n_theta, "seed": ctx.seed}, z[k])]


@check
def poisson_identity(params, ctx: Context):
    modes = int(params.get("modes", ctx.modes))
    r_max = float(params.get("r_max", 0.99))
    bf = hmap.BoundaryFunction.from_function(lambda t: np.exp(1j * t), 2 * modes)
    m = hmap.poisson_extend(bf, modes)
    grid = ctx.grid().clipped(r_max)
    z = grid.points()
    err = np.abs(m(z) - z)
    i, j = np.unravel_index(int(np.argmax(err)), err.shape)
    return [V.Verdict("poisson_identity", float(err[i, j]), 1e-10, 0.0, {"modes": modes, "r_max": r_max},
                      z[i, j], grid.meta())]


@check
def c_alpha(params, ctx: Context):
    out = [
        V.Verdict("c_alpha_0.5", abs(holo.c_alpha(0.5) - 20.0), 1e-9, 0.0, {"alpha": 0.5, "C": holo.c_alpha(0.5)}),
        V.Verdict("c_alpha_0.75", abs(holo.c_alpha(0.75) - 44 / 3), 1e-9, 0.0,
                  {"alpha": 0.75, "C": holo.c_alpha(0.75)}),
    ]
    alphas = [round(0.05 * k, 2) for k in range(1, 20)]
    cs = [holo.c_alpha(a) for a in alphas]
    k = int(np.argmin(cs))
    out.append(V.Verdict("c_alpha_gt_1", 1.0, cs[k], 0.0, {"alphas": alphas}, alphas[k], strict=True))
    return out


@check
def lemma_equivalence(params, ctx: Context):
    grid = ctx.grid()
    out = []
    for name in _list(params.get("functions", ["z"])):
        f = holo.builtin_function(name)
        for a in _list(params.get("alphas", [0.5])):
            out.extend(V.lemma_equivalence(f, float(a), grid, int(params.get("n_boundary", 2048)), ctx.exclusion_arc))
    return out


@check
def hardy_littlewood(params, ctx: Context):
    grid = ctx.grid()
    out = []
    for name in _list(params.get("functions", ["z"])):
        f = holo.builtin_function(name)
        for a in _list(params.get("alphas", [0.5])):
            out.append(V.hardy_littlewood_propagation(f, float(a), grid, int(params.get("n_boundary", 1024)),
                                                      ctx.exclusion_arc))
    return out


@check
def f0_non_lipschitz(params, ctx: Context):
    f = holo.f0()
    target = 1 + 6 * math.log(10)
    d = abs(complex(f.d1(1 - 1e-6)))
    out = [V.Verdict("f0_derivative_value", abs(d - target), 1e-9, 0.0, {"eps": 1e-6, "value": d, "expected": target})]
    eps = [1e-2, 1e-4, 1e-6]
    vals = [abs(complex(f.d1(1 - e))) for e in eps]
    for (e1, v1), (e2, v2) in zip(zip(eps, vals), zip(eps[1:], vals[1:])):
        out.append(V.Verdict("f0_derivative_increasing", v1, v2, 0.0, {"eps": [e1, e2]}, strict=True))
    g1 = ctx.grid()
    g2 = g1.refined()
    ys = [holo.bloch_alpha_norm(f, 0.1, g) for g in (g1, g2)]
    out.append(V.stability_verdict("f0_bloch_0.1_stable", ys, {"alpha": 0.1}, meta=g2.meta(), limit=0.01))
    deep = [DiskGrid.build(3 * d + 4, ctx.grid_angular, d) for d in (20, 40)]
    sups = [holo.bloch_alpha_norm(f, 0.0, g) for g in deep]
    out.append(V.growth_verdict("f0_derivative_sup_diverges", sups, {"alpha": 0.0, "depths": [20, 40]}))
    return out


@check
def bergman_closed_form(params, ctx: Context):
    grid = DiskGrid.build(12 * 97 + 1, 8, depth=96)
    out = []
    for a in _list(params.get("alphas", [0.5])):
        for p in _list(params.get("ps", [1])):
            if (1 - a) * p >= 1:
                continue
            out.append(V.bergman_closed_form(float(a), float(p), grid))
    for p in (1.0, 2.0, 4.0):
        v = V.bergman_closed_form(1 - 1 / (2 * p), p, grid)
        ref = 8 * math.pi / 3
        out.append(V.Verdict("bergman_special_8pi_over_3", abs(v.inputs["quadrature"] - ref) / ref, 1e-6, 0.0,
                             {**v.inputs, "expected": ref}, None, grid.meta()))
    return out


@check
def mori(params, ctx: Context):
    n_pairs = int(params.get("n_pairs", ctx.n_pairs))
    exponent = params.get("exponent")
    out = []
    for K in _list(params.get("Ks", [1, 2, 4])):
        out.append(V.mori_check(V.RadialStretch(float(K)), float(K), n_pairs, ctx.seed,
                                None if exponent is None else float(exponent)))
    return out


@check
def mori_sharpness(params, ctx: Context):
    K = float(params.get("K", 4))
    e = float(params.get("exponent", 0.5))
    v = V.mori_check(V.RadialStretch(K), K, int(params.get("n_pairs", ctx.n_pairs)), ctx.seed, exponent=e)
    return [V.Verdict("mori_sharpness_witness", V.MORI_CONSTANT, v.lhs, 0.0, v.inputs, v.witness, v.grid_meta,
                      strict=True)]


@check
def heinz(params, ctx: Context):
    r_max = float(params.get("r_max", 0.99))
    g1 = ctx.grid().clipped(r_max)
    g2 = ctx.grid().refined().clipped(r_max)
    ident = hmap.holomorphic(holo.identity())
    v_id = hmap.heinz_inf(ident, g1)
    out = [V.Verdict("heinz_identity", abs(v_id - 2.0), 0.0, 0.0, {"value": v_id}, None, g1.meta())]
    mob = hmap.holomorphic(holo.mobius(0.5))
    vals = [hmap.heinz_inf(mob, g) for g in (g1, g2)]
    closed = 2 * (0.75 / (1 + 0.5 * r_max) ** 2) ** 2
    out.append(V.Verdict("heinz_mobius_positive", 0.0, vals[-1], 0.0, {"values": vals}, None, g2.meta(), strict=True))
    out.append(V.stability_verdict("heinz_mobius_stable", vals, {"a": 0.5, "r_max": r_max}, meta=g2.meta(), limit=0.01))
    out.append(V.Verdict("heinz_mobius_closed_form", V.relative_change(closed, vals[-1]), 0.01, 0.0,
                         {"closed_form": closed, "value": vals[-1]}))
    return out


@check
def isoperimetric(params, ctx: Context):
    grid = ctx.grid()
    lhs, rhs, _ = holo.isoperimetric_check(holo.constant(1.0), grid)
    out = [V.Verdict("isoperimetric_equality", abs(lhs - rhs), 1e-12, 0.0, {"F": "1", "lhs": lhs, "rhs": rhs},
                     None, grid.meta())]
    for name in _list(params.get("functions", ["z"])):
        F = holo.builtin_function(name)
        lhs, rhs, _ = holo.isoperimetric_check(F, grid)
        out.append(V.Verdict("isoperimetric", lhs, rhs, 1e-6, {"F": F.label}, None, grid.meta()))
    return out


def square_boundary(t):
    """Vertexwise-linear parametrization of the square with corners ±1±i."""
    corners = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    u = np.mod(np.asarray(t) - np.pi / 4, TWO_PI) / (np.pi / 2)
    k = np.floor(u).astype(int) % 4
    s = u - np.floor(u)
    return corners[k] * (1 - s) + corners[(k + 1) % 4] * s


def polygon_boundary(vertices, t):
    """Arc-length parametrization of a closed polygon over [0, 2π)."""
    v = np.asarray(vertices, dtype=complex)
    ring = np.concatenate([v, v[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(ring)))])
    u = np.mod(np.asarray(t), TWO_PI) / TWO_PI * s[-1]
    return np.interp(u, s, ring.real) + 1j * np.interp(u, s, ring.imag)


def lshape_boundary(t):
    return polygon_boundary(curves.l_shape().points, t)


@check
def rkc_square(params, ctx: Context):
    n = int(params.get("n", 512))
    out = []
    for nr, na in ((ctx.grid_radial, ctx.grid_angular), (2 * ctx.grid_radial, 2 * ctx.grid_angular)):
        grid = DiskGrid.build(nr, na, ctx.depth, ctx.seed)
        res = hmap.rkc_extend(square_boundary, n, grid)
        out.append(V.Verdict("rkc_square_jacobian_positive", 0.0, res.jacobian_min, 0.0,
                             {"n": n, "convex": res.convex}, res.witness, res.grid_meta, strict=True))
    res = hmap.rkc_extend(lshape_boundary, n, ctx.grid())
    out.append(V.Verdict("rkc_lshape_sign_change_witness", res.jacobian_min, 0.0, 0.0,
                         {"n": n, "convex": res.convex}, res.witness, res.grid_meta, strict=True))
    return out


@check
def tangent_arg(params, ctx: Context):
    grid = ctx.grid()
    ident = hmap.holomorphic(holo.identity())
    fld = hmap.tangent_arg_field(ident, grid, curves.circle())
    out = [
        V.Verdict("tangent_arg_identity_U", float(np.abs(fld.U - np.pi / 2).max()), 1e-6, 0.0, {}, None, grid.meta()),
        V.Verdict("tangent_arg_identity_boundary", fld.boundary_error, 1e-6, 0.0, {}, fld.witness, grid.meta()),
    ]
    a = float(params.get("rotation", 0.7))
    rot = hmap.holomorphic(holo.series([0, np.exp(1j * a)], name="rotation"))
    fld = hmap.tangent_arg_field(rot, grid, curves.circle())
    out.append(V.Verdict("tangent_arg_rotation_U", float(np.abs(fld.U - (np.pi / 2 + a)).max()), 1e-6, 0.0,
                         {"angle": a}, None, grid.meta()))
    out.append(V.Verdict("tangent_arg_rotation_boundary", fld.boundary_error, 1e-6, 0.0, {"angle": a},
                         fld.witness, grid.meta()))
    r_max = float(params.get("r_max", 0.999))
    g2 = DiskGrid.from_radii(np.linspace(0.0, r_max, ctx.grid_radial), ctx.grid_angular, ctx.seed)
    fld = hmap.tangent_arg_field(hmap.linear_map(0.3), g2, curves.ellipse(1.3, 0.7))
    out.append(V.Verdict("tangent_arg_ellipse_boundary", fld.boundary_error, 1e-2, 0.0,
                         {"k": 0.3, "r_max": r_max}, fld.witness, g2.meta()))
    return out


@check
def stretch_sharpness(params, ctx: Context):
    K = float(params.get("K", 2))
    out = []
    for v in V.stretch_holder_sharpness(K, [float(b) for b in _list(params.get("betas", [0.4]))]):
        if v.inputs["beta"] <= 1 / K:
            out.append(v)
        else:
            out.append(V.growth_verdict("stretch_holder_divergence_witness", v.inputs["values"], v.inputs, v.witness))
    return out


def main_theorem_grids():
    return [DiskGrid.build(70, 512, 22), DiskGrid.build(140, 1024, 44)], (2048, 4096)


@check
def main_theorem(params, ctx: Context):
    grids, nb = main_theorem_grids()
    out = [
        V.main_theorem_holder(hmap.linear_map(0.3), 0.9, grids, nb, ctx.exclusion_arc),
        V.main_theorem_holder(hmap.holomorphic(holo.f0()), 0.95, grids, nb, ctx.exclusion_arc),
    ]
    v = V.main_theorem_holder(hmap.holomorphic(holo.identity()), 0.5, grids, nb)
    out.append(v)
    out.append(V.Verdict("identity_holder_constant", abs(v.inputs["values"][-1] - 2 ** 0.5), 1e-12, 0.0,
                         {"alpha": 0.5, "expected": 2 ** 0.5, "value": v.inputs["values"][-1]}))
    lip = V.holder_values(hmap.holomorphic(holo.f0()), 1.0, grids, nb, ctx.exclusion_arc)
    out.append(V.growth_verdict("f0_lipschitz_divergence_witness", lip, {"map": "f0", "alpha": 1.0}))
    return out


@check
def composition_law(params, ctx: Context):
    pts = np.concatenate([V._stretch_points(20), V.random_disk_points(400, ctx.seed)])
    rot = hmap.holomorphic(holo.series([0, np.exp(0.4j)], name="rotation"))
    out = [
        V.composition_exponent_law(V.RadialStretch(2), V.RadialStretch(4 / 3), 0.5, 0.75, pts),
        V.composition_exponent_law(V.RadialStretch(1.5), V.Composition([rot, V.RadialStretch(2)]), 2 / 3, 0.5, pts),
    ]
    return out


# ---------------------------------------------------------------------------
# runner


def worker_count(requested=None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("HQC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise HqcError(f"HQC_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def run_suite(items, ctx: Context, workers=None) -> List[V.Verdict]:
    n = worker_count(workers)
    if n == 1:
        results = [CHECKS[name](params, ctx) for name, params in items]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            futures = [pool.submit(CHECKS[name], params, ctx) for name, params in items]
            results = [f.result() for f in futures]
    return [v for group in results for v in group]


def verdicts_json(verdicts) -> str:
    return dumps([v.to_dict() for v in verdicts])


def _witness_point(w):
    if w is None:
        return ("", "")
    if isinstance(w, complex):
        return (w.real, w.imag)
    if isinstance(w, (list, tuple)) and w:
        first = w[0]
        if isinstance(first, (list, tuple)) and len(first) == 2:
            return (float(first[0]), float(first[1]))
        if len(w) == 2 and all(isinstance(x, float) for x in w) and not isinstance(w, tuple):
            return (float(w[0]), float(w[1]))
    if isinstance(w, (float, np.floating)):
        return (float(w), "")
    return ("", "")


def verdicts_csv(verdicts) -> str:
    rows = []
    for v in verdicts:
        wr, wi = _witness_point(v.witness)
        rows.append([v.name, float(v.lhs), float(v.rhs), "true" if v.passed else "false", wr, wi])
    return csv_text(["name", "lhs", "rhs", "pass", "witness_re", "witness_im"], rows)
