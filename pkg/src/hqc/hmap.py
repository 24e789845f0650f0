"""
Harmonic maps f = g + conj(h) of the unit disk.

Covers the Poisson kernel and the Fourier form of the Poisson extension,
the Radó-Kneser-Choquet construction for convex targets, Wirtinger
derivatives, Jacobian and dilatation sweeps, the Heinz lower bound and the
boundary tangent-argument field U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import curves
from .errors import HqcError, InputFormatError
from .grid import DiskGrid
from .holo import HoloFn, series

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class HarmonicMap:
    g: HoloFn
    h: HoloFn
    name: str = ""

    def __call__(self, z):
        return self.g(z) + np.conj(self.h(z))

    def wirtinger(self, z):
        """(f_z, f_zbar) = (g'(z), conj(h'(z)))."""
        return self.g.d1(z), np.conj(self.h.d1(z))

    def jacobian(self, z):
        return np.abs(self.g.d1(z)) ** 2 - np.abs(self.h.d1(z)) ** 2

    def boundary_values(self, t) -> np.ndarray:
        """f(e^{it}), using continuous limits at singular points of g, h."""
        z = np.exp(1j * np.asarray(t, dtype=float))
        out = np.empty(z.shape, dtype=complex)
        sing = np.zeros(z.shape, dtype=bool)
        for part in (self.g, self.h):
            for s in part.singular_points:
                sing |= np.abs(z - s) < 1e-15
        out[~sing] = self(z[~sing])
        for idx in np.flatnonzero(sing):
            zz = z.flat[idx]
            gv = self.g.boundary_limit(zz) if self.g.singular_points else self.g(zz)
            hv = self.h.boundary_limit(zz) if self.h.singular_points else self.h(zz)
            out.flat[idx] = gv + np.conj(hv)
        return out

    def rigid(self, angle: float, shift: complex = 0j) -> "HarmonicMap":
        """e^{i angle} f + shift."""
        rot = np.exp(1j * angle)
        return HarmonicMap(rot * self.g + shift, np.conj(rot) * self.h, self.name)

    @property
    def label(self) -> str:
        return self.name or f"{self.g.label} + conj({self.h.label})"


def holomorphic(f: HoloFn) -> HarmonicMap:
    return HarmonicMap(f, series([0]), name=f.label)


def linear_map(k: complex) -> HarmonicMap:
    """z + k conj(z), constant dilatation k."""
    return HarmonicMap(series([0, 1]), series([0, np.conj(k)]), name=f"z + {k} conj(z)")


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).ravel()
        n = len(v)
        if n < 64 or n & (n - 1):
            raise HqcError(f"boundary sample count must be a power of two >= 64, got {n}")
        if not np.all(np.isfinite(v)):
            raise HqcError("non-finite boundary sample")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int) -> "BoundaryFunction":
        return cls(fn(TWO_PI * np.arange(n) / n))


def read_boundary(path) -> BoundaryFunction:
    """Boundary data: ``t re im`` or ``re im`` per line (t uniform if omitted).

    Explicit t values are resampled by periodic linear interpolation onto a
    uniform grid whose size is the next power of two (at least 64).
    """
    path = Path(path)
    rows, width = [], None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise InputFormatError(path, lineno, f"expected 't re im' or 're im', got {s!r}")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise InputFormatError(path, lineno, "inconsistent column count")
            try:
                vals = [float(x) for x in parts]
            except ValueError:
                raise InputFormatError(path, lineno, f"not numeric: {s!r}") from None
            if not all(math.isfinite(x) for x in vals):
                raise InputFormatError(path, lineno, "non-finite value")
            rows.append(vals)
    if not rows:
        raise InputFormatError(path, 1, "no boundary samples")
    data = np.array(rows)
    count = len(data)
    n = max(64, 1 << (count - 1).bit_length())
    if width == 2:
        vals = data[:, 0] + 1j * data[:, 1]
        if count == n:
            return BoundaryFunction(vals)
        t = TWO_PI * np.arange(count) / count
    else:
        t = np.mod(data[:, 0], TWO_PI)
        vals = data[:, 1] + 1j * data[:, 2]
        order = np.argsort(t, kind="stable")
        t, vals = t[order], vals[order]
    tu = TWO_PI * np.arange(n) / n
    re = np.interp(tu, t, vals.real, period=TWO_PI)
    im = np.interp(tu, t, vals.imag, period=TWO_PI)
    return BoundaryFunction(re + 1j * im)


# ---------------------------------------------------------------------------


def poisson_kernel(z, theta):
    """P(z, θ) = (1/2π)(1 - |z|^2)/|z - e^{iθ}|^2 for |z| < 1."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise HqcError("Poisson kernel needs |z| < 1")
    return (1 - np.abs(z) ** 2) / np.abs(z - np.exp(1j * np.asarray(theta))) ** 2 / TWO_PI


def poisson_extend(bf: BoundaryFunction, modes: Optional[int] = None) -> HarmonicMap:
    """Harmonic extension from the discrete Fourier coefficients c_k.

    g gets c_k (k >= 0), h gets conj(c_{-k}) (k >= 1). With ``n`` samples at
    most n/2 modes are kept; the Nyquist coefficient is split evenly between
    g and h so that the samples are interpolated exactly.
    """
    n = bf.n
    c = np.fft.fft(bf.values) / n
    half = n // 2
    K = half if modes is None else min(int(modes), half)
    if K < 1:
        raise HqcError("need at least one mode")
    gc = c[: K + 1].copy()
    hc = np.concatenate([[0], np.conj(c[n - np.arange(1, K + 1)])])
    if K == half:
        gc[K] *= 0.5
        hc[K] *= 0.5
    return HarmonicMap(series(gc), series(hc), name="poisson-extension")


@dataclass(frozen=True, eq=False)
class RkcResult:
    map: HarmonicMap
    convex: bool
    jacobian_min: float
    witness: complex
    grid_meta: dict

    @property
    def sense_preserving(self) -> bool:
        return self.jacobian_min > 0


def boundary_is_convex(values: np.ndarray, tol: float = 1e-12) -> bool:
    """Cross products of successive chords are one-signed (zeros allowed)."""
    v = np.asarray(values, dtype=complex)
    a = np.roll(v, -1) - v
    b = np.roll(a, -1)
    cr = a.real * b.imag - a.imag * b.real
    scale = tol * float(np.max(np.abs(a)) ** 2)
    return bool(np.all(cr >= -scale) or np.all(cr <= scale))


def rkc_extend(phi: Union[BoundaryFunction, Callable], n: int = 512, grid: Optional[DiskGrid] = None) -> RkcResult:
    """Poisson extension of a circle homeomorphism onto a Jordan curve.

    Rejects samples that do not trace a simple closed curve once
    (positively). Convexity is reported rather than enforced: for a
    non-convex target the construction goes through and the Jacobian
    sweep shows whether univalence was lost.
    """
    bf = phi if isinstance(phi, BoundaryFunction) else BoundaryFunction.from_function(phi, n)
    v = bf.values
    if np.any(np.abs(np.roll(v, -1) - v) < 1e-14):
        raise HqcError("repeated consecutive boundary samples; not a homeomorphism")
    hit = curves.find_self_intersection(v)
    if hit is not None:
        raise HqcError(f"boundary samples are not monotone: segments {hit} cross", witness=hit)
    if curves.JordanCurve(v).signed_area() <= 0:
        raise HqcError("boundary samples run clockwise; orientation must be positive")
    m = poisson_extend(bf)
    grid = grid or DiskGrid.build()
    jmin, wit = jacobian_min(m, grid)
    return RkcResult(m, boundary_is_convex(v), jmin, wit, grid.meta())


def jacobian_min(m, grid: DiskGrid):
    z = grid.points()
    fz, fzb = m.wirtinger(z)
    J = np.abs(fz) ** 2 - np.abs(fzb) ** 2
    i, j = np.unravel_index(int(np.argmin(J)), J.shape)
    return float(J[i, j]), complex(z[i, j])


def wirtinger(m, z):
    return m.wirtinger(z)


@dataclass(frozen=True, eq=False)
class DilatationField:
    mu: np.ndarray
    k_hat: float
    K_hat: float
    is_qc: bool
    witness: complex
    grid_meta: dict
    excluded: int = 0


def qc_constants(m, grid: DiskGrid) -> DilatationField:
    """Complex dilatation μ = f_zbar / f_z on the grid with k = max|μ| and
    K = (1 + k)/(1 - k). Points where the derivatives are not finite (the
    origin of a radial stretch) are skipped and counted."""
    z = grid.points()
    with np.errstate(all="ignore"):
        fz, fzb = m.wirtinger(z)
    fz = np.broadcast_to(fz, z.shape)
    fzb = np.broadcast_to(fzb, z.shape)
    ok = np.isfinite(fz) & np.isfinite(fzb)
    small = ok & (np.abs(fz) < 1e-14)
    if small.any():
        i, j = np.argwhere(small)[0]
        raise HqcError(f"f_z vanishes at z = {z[i, j]}; dilatation undefined", witness=complex(z[i, j]))
    mu = np.full(z.shape, np.nan + 0j)
    mu[ok] = fzb[ok] / fz[ok]
    amu = np.where(ok, np.abs(mu), -1.0)
    i, j = np.unravel_index(int(np.argmax(amu)), amu.shape)
    k_hat = float(amu[i, j])
    is_qc = k_hat < 1
    K_hat = (1 + k_hat) / (1 - k_hat) if is_qc else math.inf
    return DilatationField(mu, k_hat, K_hat, is_qc, complex(z[i, j]), grid.meta(), int((~ok).sum()))


def df_norms(m, z):
    """(|Df|, l(Df), ||Df||^2) = (|f_z|+|f_zbar|, ||f_z|-|f_zbar||, 2(|f_z|^2+|f_zbar|^2))."""
    fz, fzb = m.wirtinger(z)
    a, b = np.abs(fz), np.abs(fzb)
    return a + b, np.abs(a - b), 2 * (a ** 2 + b ** 2)


def heinz_inf(m: HarmonicMap, grid: DiskGrid, n_boundary: int = 1024, with_witness: bool = False):
    """Grid minimum of the Hilbert-Schmidt norm ||Df||^2 for a self-map of the disk."""
    t = TWO_PI * np.arange(n_boundary) / n_boundary
    bv = np.abs(m.boundary_values(t))
    if bv.max() > 1 + 1e-3:
        k = int(np.argmax(bv))
        raise HqcError(f"map leaves the closed disk: |f| = {bv[k]:.6g} on the circle", witness=complex(np.exp(1j * t[k])))
    z = grid.points()
    hs = df_norms(m, z)[2]
    i, j = np.unravel_index(int(np.argmin(hs)), hs.shape)
    val = float(hs[i, j])
    return (val, complex(z[i, j])) if with_witness else val


@dataclass(frozen=True, eq=False)
class TangentArgField:
    U: np.ndarray           # shape (n_radial - 1, n_angular); the centre is excluded
    radii: np.ndarray
    angles: np.ndarray
    boundary_error: Optional[float] = None
    witness: Optional[float] = None


def tangent_arg_field(m: HarmonicMap, grid: DiskGrid, target=None, n_target: int = 8192) -> TangentArgField:
    """U(z) = arg((1/z) ∂_φ f(z)) on the punctured grid, continuous branch.

    With ∂_φ f = i z g' - i conj(z h'), (1/z) ∂_φ f = i (g' - conj(h') e^{-2iφ}).
    The branch is unwrapped along the innermost ring, then continued radially
    outward per angle. If ``target`` (a JordanCurve or ArcLengthParam) is
    given, U on the outermost ring is compared with β(φ) - φ, β being the
    tangent angle of the target at f(e^{iφ}).
    """
    keep = grid.radii > 0
    radii = grid.radii[keep]
    phi = grid.angles
    z = radii[:, None] * np.exp(1j * phi)[None, :]
    gp = m.g.d1(z)
    hp = m.h.d1(z)
    w = 1j * (gp - np.conj(hp) * np.exp(-2j * phi)[None, :])
    small = np.abs(w) < 1e-14
    if small.any():
        i, j = np.argwhere(small)[0]
        raise HqcError(f"∂_φ f vanishes at z = {z[i, j]}", witness=complex(z[i, j]))
    raw = np.angle(w)
    inner = np.unwrap(raw[0])
    steps = np.angle(np.exp(1j * np.diff(raw, axis=0)))
    U = inner[None, :] + np.concatenate([np.zeros((1, len(phi))), np.cumsum(steps, axis=0)])
    err = wit = None
    if target is not None:
        param = target if isinstance(target, curves.ArcLengthParam) else curves.resample_arclength(target, n_target)
        fb = m.boundary_values(phi)
        beta = curves.tangent_angle_at(param, fb)
        d = np.abs(np.angle(np.exp(1j * (U[-1] - (beta - phi)))))
        k = int(np.argmax(d))
        err, wit = float(d[k]), float(phi[k])
    return TangentArgField(U, radii, phi, err, wit)
