"""
Closed planar Jordan curves and the boundary-geometry constants that enter
the Hölder estimates: arc-length parametrization, tangent angle branch,
modulus of continuity of the unit tangent and the chord-arc constant.

Points are stored as complex numbers. A curve is implicitly closed: the
last sample connects back to the first and is never repeated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import HqcError, InputFormatError

TWO_PI = 2.0 * np.pi

# minimum accepted total length
DEGENERATE_LENGTH = 1e-12


@dataclass(frozen=True)
class AnalyticForm:
    """Closed-form parametrization ``u -> position(u)`` with period 1.

    If ``arclength`` is true the parameter is already proportional to
    arc length, so resampling needs no inversion.
    """

    name: str
    position: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    arclength: bool = False
    length: Optional[float] = None


@dataclass(frozen=True, eq=False)
class JordanCurve:
    points: np.ndarray
    analytic_form: Optional[AnalyticForm] = None
    name: str = "polyline"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if len(pts) > 2 and abs(pts[-1] - pts[0]) < 1e-12:
            pts = pts[:-1]
        object.__setattr__(self, "points", pts)

    @property
    def closed(self) -> bool:
        return True

    def __len__(self):
        return len(self.points)

    def signed_area(self) -> float:
        p = self.points
        q = np.roll(p, -1)
        return 0.5 * float(np.sum(p.real * q.imag - q.real * p.imag))

    def reversed(self) -> "JordanCurve":
        return JordanCurve(self.points[::-1].copy(), None, self.name + "-reversed")

    def is_simple(self) -> bool:
        return find_self_intersection(self.points) is None


@dataclass(frozen=True, eq=False)
class ArcLengthParam:
    total_length: float
    nodes: np.ndarray
    positions: np.ndarray
    tangents: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        return self.total_length / self.n

    def tangent_field(self) -> "TangentField":
        return tangent_field(self)


@dataclass(frozen=True, eq=False)
class TangentField:
    """Continuous branch of the tangent angle at the arc-length nodes."""

    angles: np.ndarray
    total_turning: float


# ---------------------------------------------------------------------------
# construction


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def find_self_intersection(points: np.ndarray, chunk: int = 256):
    """Return ``(i, j)`` of the first crossing segment pair, or ``None``.

    Segment ``i`` joins ``points[i]`` to ``points[i+1]`` cyclically. Plain
    O(n^2) pair test; collinear overlaps count as intersections.
    """
    p = np.asarray(points, dtype=complex)
    n = len(p)
    a = p
    b = np.roll(p, -1)
    for start in range(0, n, chunk):
        i = np.arange(start, min(start + chunk, n))[:, None]
        j = np.arange(n)[None, :]
        mask = j > i + 1
        mask &= ~((i == 0) & (j == n - 1))
        if not mask.any():
            continue
        a1, b1 = a[i], b[i]
        a2, b2 = a[j], b[j]
        d1 = _cross(b1 - a1, a2 - a1)
        d2 = _cross(b1 - a1, b2 - a1)
        d3 = _cross(b2 - a2, a1 - a2)
        d4 = _cross(b2 - a2, b1 - a2)
        scale = np.maximum(np.abs(b1 - a1), np.abs(b2 - a2)) ** 2
        eps = 1e-14 * scale
        proper = (d1 * d2 < -eps * eps) & (d3 * d4 < -eps * eps)
        collinear = (np.abs(d1) <= eps) & (np.abs(d2) <= eps)
        if collinear.any():
            # overlap test on the projection onto segment 1
            u = b1 - a1
            uu = np.abs(u) ** 2 + 1e-300
            s1 = ((a2 - a1) * np.conj(u)).real / uu
            s2 = ((b2 - a1) * np.conj(u)).real / uu
            lo = np.minimum(s1, s2)
            hi = np.maximum(s1, s2)
            collinear &= (hi > 1e-12) & (lo < 1 - 1e-12)
        hit = (proper | collinear) & mask
        if hit.any():
            ii, jj = np.argwhere(hit)[0]
            return int(i[ii, 0]), int(j[0, jj])
    return None


def polyline(points: Sequence[complex], name: str = "polyline", check: bool = True) -> JordanCurve:
    curve = JordanCurve(np.asarray(points, dtype=complex), None, name)
    if len(curve) < 3:
        raise HqcError("a closed curve needs at least 3 points")
    if check:
        hit = find_self_intersection(curve.points)
        if hit is not None:
            raise HqcError(f"curve {name!r} is not simple: segments {hit} intersect", witness=hit)
    return curve


def from_analytic(form: AnalyticForm, n_samples: int = 1024) -> JordanCurve:
    u = np.arange(n_samples) / n_samples
    return JordanCurve(form.position(u), form, form.name)


def read_curve(path) -> JordanCurve:
    """Read ``x y`` pairs, one per line; ``#`` starts a comment line."""
    path = Path(path)
    pts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise InputFormatError(path, lineno, f"expected 'x y', got {s!r}")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise InputFormatError(path, lineno, f"not a number pair: {s!r}") from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise InputFormatError(path, lineno, "non-finite coordinate")
            pts.append(complex(x, y))
    if len(pts) < 8:
        raise InputFormatError(path, len(pts), "need at least 8 points")
    return polyline(pts, name=path.stem)


# ---------------------------------------------------------------------------
# built-in curves


def circle(radius: float = 1.0, center: complex = 0.0) -> JordanCurve:
    form = AnalyticForm(
        "circle",
        lambda u: center + radius * np.exp(1j * TWO_PI * u),
        lambda u: 1j * TWO_PI * radius * np.exp(1j * TWO_PI * u),
        arclength=True,
        length=TWO_PI * radius,
    )
    return from_analytic(form)


def ellipse(a: float = 1.3, b: float = 0.7) -> JordanCurve:
    form = AnalyticForm(
        "ellipse",
        lambda u: a * np.cos(TWO_PI * u) + 1j * b * np.sin(TWO_PI * u),
        lambda u: TWO_PI * (-a * np.sin(TWO_PI * u) + 1j * b * np.cos(TWO_PI * u)),
    )
    return from_analytic(form)


def _line_arc_form(name, pieces):
    """Arc-length form from ``("line", start, direction, length)`` and
    ``("arc", center, radius, angle0, length)`` pieces, positively oriented."""
    lengths = np.array([pc[-1] for pc in pieces], dtype=float)
    total = float(lengths.sum())
    edges = np.concatenate([[0.0], np.cumsum(lengths)])

    def locate(u):
        s = np.mod(np.asarray(u, dtype=float), 1.0) * total
        k = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(pieces) - 1)
        return s - edges[k], k

    def position(u):
        ds, k = locate(u)
        out = np.empty(ds.shape, dtype=complex)
        for idx, pc in enumerate(pieces):
            m = k == idx
            if pc[0] == "line":
                _, p0, d, _ = pc
                out[m] = p0 + d * ds[m]
            else:
                _, c, r, a0, _ = pc
                out[m] = c + r * np.exp(1j * (a0 + ds[m] / r))
        return out

    def derivative(u):
        ds, k = locate(u)
        out = np.empty(ds.shape, dtype=complex)
        for idx, pc in enumerate(pieces):
            m = k == idx
            if pc[0] == "line":
                out[m] = pc[2]
            else:
                _, c, r, a0, _ = pc
                out[m] = 1j * np.exp(1j * (a0 + ds[m] / r))
        return out * total

    return AnalyticForm(name, position, derivative, arclength=True, length=total)


def rounded_square(side: float = 2.0, corner_radius: float = 0.5) -> JordanCurve:
    h = side / 2.0
    r = corner_radius
    flat = side - 2 * r
    if flat < 0 or r <= 0:
        raise HqcError("need 0 < corner_radius <= side/2")
    pieces = []
    # start at the middle of the right side, heading up
    pieces.append(("line", complex(h, 0), 1j, flat / 2))
    corners = [complex(h - r, h - r), complex(-h + r, h - r), complex(-h + r, -h + r), complex(h - r, -h + r)]
    dirs = [-1, -1j, 1, 1j]
    starts = [complex(h - r, h), complex(-h, h - r), complex(-h + r, -h), complex(h, -h + r)]
    for q in range(4):
        pieces.append(("arc", corners[q], r, q * np.pi / 2, r * np.pi / 2))
        length = flat if q < 3 else flat / 2
        pieces.append(("line", starts[q], dirs[q], length))
    pieces = [pc for pc in pieces if pc[-1] > 0]
    return from_analytic(_line_arc_form("rounded-square", pieces))


def stadium(half_length: float = 1.0, radius: float = 0.5) -> JordanCurve:
    a, r = half_length, radius
    pieces = [
        ("line", complex(-a, -r), 1.0, 2 * a),
        ("arc", complex(a, 0), r, -np.pi / 2, np.pi * r),
        ("line", complex(a, r), -1.0, 2 * a),
        ("arc", complex(-a, 0), r, np.pi / 2, np.pi * r),
    ]
    return from_analytic(_line_arc_form("stadium", pieces))


def f0_image() -> JordanCurve:
    """Image of the unit circle under f0(z) = 2z + (1 - z) log(1 - z).

    C^1 but not Dini smooth at f0(1) = 2, where the tangent is vertical.
    """

    def position(u):
        z = np.exp(1j * TWO_PI * np.asarray(u, dtype=float))
        w = 1.0 - z
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 2 * z + w * np.log(w)
        return np.where(np.abs(w) < 1e-300, 2.0 + 0j, val)

    def derivative(u):
        z = np.exp(1j * TWO_PI * np.asarray(u, dtype=float))
        w = 1.0 - z
        with np.errstate(divide="ignore", invalid="ignore"):
            d = 1j * TWO_PI * z * (1.0 - np.log(w))
        # the speed is infinite at z = 1; only the direction (vertical) survives
        return np.where(np.isfinite(d), d, 1j * 1e300)

    return from_analytic(AnalyticForm("f0-image", position, derivative))


def _subdivide(verts, per_edge):
    pts = []
    for q in range(len(verts)):
        a, b = verts[q], verts[(q + 1) % len(verts)]
        for s in np.arange(per_edge) / per_edge:
            pts.append(a + (b - a) * s)
    return pts


def square(side: float = 2.0, points_per_side: int = 16) -> JordanCurve:
    h = side / 2
    verts = [h - h * 1j, h + h * 1j, -h + h * 1j, -h - h * 1j]
    return polyline(_subdivide(verts, points_per_side), name="square")


def l_shape(points_per_edge: int = 8) -> JordanCurve:
    verts = np.array([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j]) - (0.5 + 0.5j)
    return polyline(_subdivide(list(verts), points_per_edge), name="l-shape")


GALLERY_CURVES = {
    "circle": (circle, "z = e^{it}"),
    "ellipse": (ellipse, "1.3 cos t + 0.7 i sin t"),
    "rounded-square": (rounded_square, "side 2, corner radius 0.5 (lines + quarter circles)"),
    "stadium": (stadium, "two segments of length 2 capped by semicircles of radius 0.5"),
    "f0-image": (f0_image, "f0(e^{it}), f0(z) = 2z + (1-z) log(1-z)"),
    "square": (square, "axis-aligned square of side 2 (corners, not C^1)"),
    "l-shape": (l_shape, "L-shaped hexagon (non-convex, not C^1)"),
}


def builtin_curve(name: str) -> JordanCurve:
    try:
        return GALLERY_CURVES[name][0]()
    except KeyError:
        raise HqcError(f"unknown curve {name!r}; choose from {sorted(GALLERY_CURVES)}") from None


# ---------------------------------------------------------------------------
# operations


def _invert_cumulative(form: AnalyticForm, targets_frac: np.ndarray, fine: int):
    """Parameters u with arc length fraction ``targets_frac``; also returns |γ|."""
    uk = (np.arange(fine) + 0.5) / fine
    speed = np.abs(form.derivative(uk))
    speed = np.where(np.isfinite(speed), speed, 0.0)
    # midpoint rule per cell; tolerant of integrable endpoint singularities
    cum = np.concatenate([[0.0], np.cumsum(speed) / fine])
    total = float(cum[-1])
    u_edges = np.arange(fine + 1) / fine
    return np.interp(targets_frac * total, cum, u_edges), total


def resample_arclength(curve: JordanCurve, n: int) -> ArcLengthParam:
    if n < 16:
        raise HqcError(f"n must be >= 16, got {n}")
    form = curve.analytic_form
    if form is None and len(curve) < 8:
        raise HqcError("need at least 8 samples or an analytic form")
    frac = np.arange(n) / n
    if form is not None:
        if form.arclength:
            u = frac
            if form.length is not None:
                total = float(form.length)
            else:
                total = float(np.mean(np.abs(form.derivative((np.arange(8 * n) + 0.5) / (8 * n)))))
        else:
            u, total = _invert_cumulative(form, frac, max(64 * n, 1 << 16))
        if total < DEGENERATE_LENGTH:
            raise HqcError(f"degenerate curve: length {total:.3g}")
        positions = form.position(u)
        d = form.derivative(u)
        tangents = d / np.abs(d)
    else:
        p = curve.points
        q = np.concatenate([p, p[:1]])
        seg = np.abs(np.diff(q))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = float(cum[-1])
        if total < DEGENERATE_LENGTH:
            raise HqcError(f"degenerate curve: length {total:.3g}")
        s = frac * total
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(p) - 1)
        w = np.where(seg[k] > 0, (s - cum[k]) / np.where(seg[k] > 0, seg[k], 1.0), 0.0)
        positions = q[k] * (1 - w) + q[k + 1] * w
        d = np.roll(positions, -1) - np.roll(positions, 1)
        norm = np.abs(d)
        if np.any(norm < 1e-300):
            raise HqcError("coincident resampled nodes; curve is degenerate")
        tangents = d / norm
    nodes = frac * total
    return ArcLengthParam(total, nodes, np.asarray(positions, dtype=complex), np.asarray(tangents, dtype=complex))


def tangent_field(param: ArcLengthParam) -> TangentField:
    t = param.tangents
    inc = np.angle(np.roll(t, -1) / t)
    angles = np.angle(t[0]) + np.concatenate([[0.0], np.cumsum(inc[:-1])])
    return TangentField(angles, float(np.sum(inc)))


def modulus_of_continuity(param: ArcLengthParam, deltas) -> dict:
    """Table ``delta -> omega(delta)`` for the unit tangent.

    Pairs are node pairs at cyclic arc distance ``k*h <= delta`` plus, for
    each requested delta, the pair at distance exactly ``delta`` with the
    tangent angle interpolated linearly between nodes. The table is made
    nondecreasing by a running maximum over the sorted deltas.
    """
    deltas = [float(d) for d in deltas]
    L, h, n = param.total_length, param.spacing, param.n
    for d in deltas:
        if not 0 < d <= L / 2 + 1e-12:
            raise HqcError(f"delta must lie in (0, |γ|/2], got {d}")
    t = param.tangents
    beta = tangent_field(param).angles
    turning = tangent_field(param).total_turning
    ext_beta = np.concatenate([beta, beta + turning, beta[:1] + 2 * turning])
    ext_s = np.concatenate([param.nodes, param.nodes + L, [2 * L]])

    kmax = int(np.floor(max(deltas) / h + 1e-9)) if deltas else 0
    shift_max = np.zeros(kmax + 1)
    for k in range(1, kmax + 1):
        shift_max[k] = np.max(np.abs(np.roll(t, -k) - t))
    shift_cum = np.maximum.accumulate(shift_max)

    raw = {}
    for d in deltas:
        k = int(np.floor(d / h + 1e-9))
        val = shift_cum[min(k, kmax)]
        bd = np.interp(param.nodes + d, ext_s, ext_beta)
        val = max(val, float(np.max(np.abs(np.exp(1j * bd) - np.exp(1j * beta)))))
        raw[d] = val
    out = {}
    running = 0.0
    for d in sorted(raw):
        running = max(running, raw[d])
        out[d] = running
    return {d: out[d] for d in deltas}


def arc_chord_constant(param: ArcLengthParam, chunk: int = 512, with_witness: bool = False):
    """Smallest B with min(arc, |γ|-arc) <= B * chord over all node pairs."""
    p = param.positions
    n = param.n
    L = param.total_length
    h = param.spacing
    best, witness = 1.0, None
    for k in range(1, n // 2 + 1):
        chord = np.abs(np.roll(p, -k) - p)
        i = int(np.argmin(chord))
        if chord[i] < 1e-12:
            raise HqcError("coincident distinct nodes; curve is not Jordan", witness=(i, (i + k) % n))
        arc = min(k * h, L - k * h)
        val = arc / chord[i]
        if val > best:
            best, witness = val, (i, (i + k) % n)
    if with_witness:
        return best, witness
    return best


def tangent_angle_at(param: ArcLengthParam, points: np.ndarray) -> np.ndarray:
    """Tangent angle of the curve at the curve point nearest to each of ``points``.

    Projects onto the polygon of nodes and interpolates the unwrapped angle
    along the hit segment.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    a = param.positions
    b = np.roll(a, -1)
    beta = tangent_field(param).angles
    turning = tangent_field(param).total_turning
    beta_next = np.concatenate([beta[1:], beta[:1] + turning])
    u = b - a
    uu = np.abs(u) ** 2
    out = np.empty(len(pts))
    for start in range(0, len(pts), 256):
        z = pts[start:start + 256, None]
        s = np.clip(((z - a) * np.conj(u)).real / uu, 0.0, 1.0)
        dist = np.abs(a + s * u - z)
        k = np.argmin(dist, axis=1)
        sk = s[np.arange(len(k)), k]
        out[start:start + 256] = beta[k] * (1 - sk) + beta_next[k] * sk
    return out
