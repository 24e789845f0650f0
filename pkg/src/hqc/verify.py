"""
Numerical certification of the Hölder/Bloch inequalities on concrete maps.

Every check returns :class:`Verdict` records. A verdict passes iff
``lhs <= rhs * (1 + tolerance)`` (strict ``<`` when ``strict`` is set), so
a claim of finiteness is phrased as a bounded relative change between two
resolutions and a claim of divergence as a growth factor above a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import holo
from .errors import HqcError
from .grid import DiskGrid
from .hmap import HarmonicMap, qc_constants
from .holo import HoloFn

TWO_PI = 2.0 * np.pi

GRID_SLACK = 0.05        # inequality slack where a true sup is replaced by a grid sup
QUAD_TOL = 1e-6          # both sides are quadratures of smooth integrands
STABLE_CHANGE = 0.05     # finiteness proxy: relative change across one refinement
DIVERGENT_GROWTH = 1.25  # divergence proxy: growth factor across one refinement
MORI_CONSTANT = 16.0


@dataclass
class Verdict:
    name: str
    lhs: float
    rhs: float
    tolerance: float = 0.0
    inputs: dict = field(default_factory=dict)
    witness: Any = None
    grid_meta: dict = field(default_factory=dict)
    strict: bool = False

    @property
    def passed(self) -> bool:
        bound = self.rhs * (1 + self.tolerance)
        if self.strict:
            return bool(self.lhs < bound)
        return bool(self.lhs <= bound)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "strict": self.strict,
            "pass": self.passed,
            "witness": self.witness,
            "grid_meta": self.grid_meta,
        }


def relative_change(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(b - a) / max(abs(a), 1e-300)


def stability_verdict(name, values, inputs=None, witness=None, meta=None, limit=STABLE_CHANGE) -> Verdict:
    """Finite-sup proxy: relative change between the last two resolutions."""
    change = relative_change(values[-2], values[-1])
    return Verdict(name, change, limit, 0.0, {**(inputs or {}), "values": list(values)}, witness, meta or {})


def growth_verdict(name, values, inputs=None, witness=None, meta=None, threshold=DIVERGENT_GROWTH) -> Verdict:
    """Divergence witness: every refinement grows the value by ``threshold``."""
    growth = min(b / a for a, b in zip(values[:-1], values[1:]))
    return Verdict(name, threshold, growth, 0.0, {**(inputs or {}), "values": list(values)}, witness, meta or {})


# ---------------------------------------------------------------------------
# quasiconformal test maps


class RadialStretch:
    """z |z|^{1/K - 1}: exactly K-quasiconformal, Hölder with exponent 1/K."""

    def __init__(self, K: float):
        if K < 1:
            raise HqcError(f"K must be >= 1, got {K}")
        self.K = float(K)
        self.a = 1.0 / self.K

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z * r ** (self.a - 1)
        return np.where(r > 0, out, 0j)

    def wirtinger(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        a = self.a
        with np.errstate(divide="ignore", invalid="ignore"):
            base = r ** (a - 1)
            fz = 0.5 * (a + 1) * base
            fzb = 0.5 * (a - 1) * base * z / np.conj(z)
        if a == 1:
            fz = np.ones_like(z)
            fzb = np.zeros_like(z)
        return fz + 0j, fzb

    @property
    def label(self):
        return f"stretch(K={self.K:g})"


class Composition:
    """maps[-1] ∘ ... ∘ maps[0]; the first entry is applied first."""

    def __init__(self, maps: Sequence):
        if not maps:
            raise HqcError("empty composition")
        self.maps = list(maps)

    def __call__(self, z):
        for m in self.maps:
            z = m(z)
        return z

    def wirtinger(self, z):
        z = np.asarray(z, dtype=complex)
        fz, fzb = self.maps[0].wirtinger(z)
        w = self.maps[0](z)
        for m in self.maps[1:]:
            Fw, Fwb = m.wirtinger(w)
            fz, fzb = Fw * fz + Fwb * np.conj(fzb), Fw * fzb + Fwb * np.conj(fz)
            w = m(w)
        return fz, fzb

    @property
    def label(self):
        return " ∘ ".join(getattr(m, "label", "?") for m in reversed(self.maps))


def _label(m):
    return getattr(m, "label", type(m).__name__)


# ---------------------------------------------------------------------------
# pair scans


def pair_holder_max(f, points, exponent: float, chunk: int = 1024):
    """max |f(z)-f(w)| / |z-w|^exponent over all distinct pairs of points."""
    z = np.asarray(points, dtype=complex).ravel()
    v = np.asarray(f(z), dtype=complex).ravel()
    best, wit = 0.0, None
    for start in range(0, len(z), chunk):
        sl = slice(start, min(start + chunk, len(z)))
        dz = np.abs(z[sl, None] - z[None, :])
        dv = np.abs(v[sl, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dz > 0, dv / dz ** exponent, 0.0)
        i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        if ratio[i, j] > best:
            best, wit = float(ratio[i, j]), [_cplx(z[start + i]), _cplx(z[j])]
    return best, wit


def paired_holder_max(f, z, w, exponent: float):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    dz = np.abs(z - w)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dz > 0, np.abs(f(z) - f(w)) / dz ** exponent, 0.0)
    k = int(np.argmax(ratio))
    return float(ratio[k]), [_cplx(z[k]), _cplx(w[k])]


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def _subsample(grid: DiskGrid, max_points: int) -> np.ndarray:
    nr, na = grid.shape
    step_a = max(1, int(math.ceil(na / 64)))
    step_r = max(1, int(math.ceil(nr * (na // step_a) / max_points)))
    return grid.points()[::step_r, ::step_a].ravel()


def map_holder_scan(m, exponent: float, grid: DiskGrid, n_boundary: int,
                    exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC, max_global: int = 1536):
    """Hölder ratio of a map over boundary pairs and interior grid pairs.

    Interior pairs are radial and angular grid neighbours at every
    resolution plus all pairs of a coarse subsample.
    """
    t = TWO_PI * np.arange(n_boundary) / n_boundary
    sing = []
    for part in (getattr(m, "g", None), getattr(m, "h", None)):
        if part is not None:
            sing.extend(part.singular_points)
    keep = np.ones(n_boundary, dtype=bool)
    for s in sing:
        keep &= np.abs(np.angle(np.exp(1j * (t - np.angle(s))))) >= exclusion_arc
    t = t[keep]
    bvals = m.boundary_values(t) if hasattr(m, "boundary_values") else m(np.exp(1j * t))
    b_best, b_wit = holo.boundary_holder_constant(
        bvals, exponent, angles=None if keep.all() else t, with_witness=True)
    best = b_best
    witness = [_cplx(np.exp(1j * t[b_wit[0]])), _cplx(np.exp(1j * t[b_wit[1]]))] if b_wit else None

    P = grid.points()
    for z, w in ((P[:-1, :], P[1:, :]), (P, np.roll(P, -1, axis=1))):
        val, wit = paired_holder_max(m, z.ravel(), w.ravel(), exponent)
        if val > best:
            best, witness = val, wit
    val, wit = pair_holder_max(m, _subsample(grid, max_global), exponent)
    if val > best:
        best, witness = val, wit
    return best, witness


# ---------------------------------------------------------------------------
# checks


def lemma_equivalence(f: HoloFn, alpha: float, grid: DiskGrid, n_boundary: int = 2048,
                      exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC, slack: float = GRID_SLACK):
    """Two-sided comparison X/C <= Y <= C X of the boundary Hölder constant X
    and the weighted Bloch quantity Y."""
    C = holo.c_alpha(alpha)
    t, vals = holo.boundary_samples(f, n_boundary, exclusion_arc)
    uniform = len(t) == n_boundary
    X, xw = holo.boundary_holder_constant(vals, alpha, angles=None if uniform else t, with_witness=True)
    Y, yw = holo.bloch_alpha_norm(f, alpha, grid, with_witness=True)
    inputs = {"f": f.label, "alpha": alpha, "C": C, "X": X, "Y": Y, "n_boundary": n_boundary,
              "exclusion_arc": exclusion_arc if f.singular_points else 0.0}
    meta = grid.meta()
    x_wit = [float(t[xw[0]]), float(t[xw[1]])] if xw else None
    return (
        Verdict("lemma_bloch_le_C_holder", Y, C * X, slack, inputs, _cplx(yw), meta),
        Verdict("lemma_holder_le_C_bloch", X, C * Y, slack, inputs, x_wit, meta),
    )


def hardy_littlewood_propagation(f: HoloFn, alpha: float, grid: Optional[DiskGrid] = None,
                                 n_boundary: int = 1024, exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC,
                                 slack: float = GRID_SLACK) -> Verdict:
    """Bloch bound N turned into |f(e^{it}) - f(e^{is})| <= N (2/alpha + 1)|t - s|^alpha, |t - s| <= 1."""
    grid = grid or DiskGrid.build()
    N = holo.bloch_alpha_norm(f, alpha, grid)
    t, vals = holo.boundary_samples(f, n_boundary, exclusion_arc)
    best, wit = 0.0, None
    for start in range(0, len(t), 512):
        sl = slice(start, min(start + 512, len(t)))
        dt = np.abs(t[sl, None] - t[None, :])
        dt = np.minimum(dt, TWO_PI - dt)
        dv = np.abs(vals[sl, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((dt > 0) & (dt <= 1), dv / dt ** alpha, 0.0)
        i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        if ratio[i, j] > best:
            best, wit = float(ratio[i, j]), [float(t[start + i]), float(t[j])]
    rhs = N * (2 / alpha + 1)
    return Verdict("hardy_littlewood", best, rhs, slack,
                   {"f": f.label, "alpha": alpha, "N": N, "n_boundary": n_boundary}, wit, grid.meta())


def random_disk_points(n: int, seed: int) -> np.ndarray:
    """n points uniform in the closed unit disk, by rejection from the square,
    drawn from a counter-based Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    out = np.empty(0, dtype=complex)
    while len(out) < n:
        xy = rng.uniform(-1.0, 1.0, size=(2, 2 * (n - len(out)) + 16))
        z = xy[0] + 1j * xy[1]
        out = np.concatenate([out, z[np.abs(z) <= 1.0]])
    return out[:n]


def origin_probe_pairs(levels: int = 60, directions: int = 8):
    """Pairs (0, 2^-j e^{iθ}) that refine towards the origin."""
    r = 2.0 ** -np.arange(1, levels + 1)
    th = TWO_PI * np.arange(directions) / directions
    w = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    return np.zeros_like(w), w


def mori_check(spec, K: float, n_pairs: int = 10_000, seed: int = 1, exponent: Optional[float] = None) -> Verdict:
    """sup |f(z) - f(w)| / |z - w|^{1/K} over seeded random pairs in the closed
    disk and pairs refining towards 0, against the bound 16."""
    if K < 1:
        raise HqcError(f"K must be >= 1, got {K}")
    e = 1.0 / K if exponent is None else float(exponent)
    f0v = complex(np.asarray(spec(np.array([0j])))[0])
    if abs(f0v) > 1e-6:
        raise HqcError(f"map does not fix 0: f(0) = {f0v}", witness=0j)
    circ = np.exp(1j * TWO_PI * np.arange(256) / 256)
    if np.abs(spec(circ)).max() > 1 + 1e-6:
        raise HqcError("map does not send the disk into itself")
    z = random_disk_points(n_pairs, seed)
    w = random_disk_points(n_pairs, seed + 0x9E3779B9)
    best, wit = paired_holder_max(spec, z, w, e)
    oz, ow = origin_probe_pairs()
    val, owit = paired_holder_max(spec, oz, ow, e)
    if val > best:
        best, wit = val, owit
    inputs = {"map": _label(spec), "K": K, "exponent": e, "n_pairs": n_pairs, "seed": seed}
    meta = {"generator": "numpy Philox", "seed": seed, "n_pairs": n_pairs, "origin_probes": len(oz)}
    return Verdict("mori", best, MORI_CONSTANT, 0.0, inputs, wit, meta)


def main_theorem_holder(m, alpha: float, grids: Sequence[DiskGrid], n_boundary: Sequence[int] = (2048, 4096),
                        exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC) -> Verdict:
    """Finiteness proxy for the global Hölder-alpha constant of a qc harmonic map."""
    if len(grids) < 2 or len(n_boundary) != len(grids):
        raise HqcError("need at least two grid resolutions and matching boundary counts")
    dil = qc_constants(m, grids[0])
    if not dil.is_qc:
        raise HqcError(f"map is not quasiconformal on the grid (k = {dil.k_hat})", witness=dil.witness)
    values, wit = [], None
    for grid, nb in zip(grids, n_boundary):
        val, wit = map_holder_scan(m, alpha, grid, nb, exclusion_arc)
        values.append(val)
    inputs = {"map": _label(m), "alpha": alpha, "k_hat": dil.k_hat, "K_hat": dil.K_hat}
    return stability_verdict("main_theorem_holder", values, inputs, wit, grids[-1].meta())


def holder_values(m, exponent: float, grids: Sequence[DiskGrid], n_boundary: Sequence[int],
                  exclusion_arc: float = holo.DEFAULT_EXCLUSION_ARC):
    return [map_holder_scan(m, exponent, g, nb, exclusion_arc)[0] for g, nb in zip(grids, n_boundary)]


def bergman_closed_form(alpha: float, p: float, grid: DiskGrid) -> Verdict:
    """Quadrature of ∬_D (1 - |z|)^{(alpha - 1) p} dλ against
    2π / (2 - 3(1 - alpha) p + (1 - alpha)^2 p^2)."""
    beta = (1 - alpha) * p
    if beta >= 1:
        raise HqcError(f"(1 - alpha) p = {beta} >= 1: the integral diverges")
    closed = TWO_PI / (2 - 3 * beta + beta ** 2)
    quad = grid.integrate_radial(lambda d: d ** (-beta), geometric_tail=True)
    err = abs(quad - closed) / closed
    return Verdict("bergman_closed_form", err, QUAD_TOL, 0.0,
                   {"alpha": alpha, "p": p, "exponent": beta, "quadrature": quad, "closed_form": closed},
                   None, grid.meta(), strict=True)


def _stretch_points(level: int, directions: int = 16) -> np.ndarray:
    r = np.concatenate([[0.0], 2.0 ** -np.arange(0, level + 1), 1 - 2.0 ** -np.arange(2, 12)])
    th = TWO_PI * np.arange(directions) / directions
    return np.concatenate([[0j], (r[1:, None] * np.exp(1j * th)[None, :]).ravel()])


def stretch_holder_sharpness(K: float, betas: Sequence[float], levels: Sequence[int] = (20, 40)) -> list:
    """Hölder ratios of the radial stretch under refinement towards 0.

    One stability verdict per beta: passes for beta <= 1/K, fails (ratio
    keeps growing) for beta > 1/K.
    """
    if K <= 1:
        raise HqcError(f"K must be > 1, got {K}")
    f = RadialStretch(K)
    dil = qc_constants(f, DiskGrid.build(64, 256))
    if abs(dil.K_hat - K) > 1e-9 * K:
        raise HqcError(f"stretch dilatation check failed: K_hat = {dil.K_hat}")
    out = []
    for beta in betas:
        values, wit = [], None
        for lev in levels:
            val, wit = pair_holder_max(f, _stretch_points(lev), beta)
            values.append(val)
        out.append(stability_verdict("stretch_holder", values, {"K": K, "beta": beta, "K_hat": dil.K_hat,
                                                               "levels": list(levels)}, wit))
    return out


def composition_exponent_law(outer, inner, a_outer: float, a_inner: float, points) -> Verdict:
    """Measured Hölder-(a_outer a_inner) constant of outer∘inner against
    X_outer X_inner^{a_outer}, all constants from pair scans."""
    pts = np.asarray(points, dtype=complex)
    X2, _ = pair_holder_max(inner, pts, a_inner)
    X1, _ = pair_holder_max(outer, np.concatenate([pts, inner(pts)]), a_outer)
    comp = Composition([inner, outer])
    M, wit = pair_holder_max(comp, pts, a_outer * a_inner)
    return Verdict("composition_exponent_law", M, X1 * X2 ** a_outer, GRID_SLACK,
                   {"outer": _label(outer), "inner": _label(inner), "a_outer": a_outer, "a_inner": a_inner,
                    "X_outer": X1, "X_inner": X2}, wit)
