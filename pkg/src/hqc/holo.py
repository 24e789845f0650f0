"""
Holomorphic functions on the unit disk and the norms built from them:
Hardy means on circles, Bergman area norms, the weighted Bloch quantity
``sup (1-|z|)^a |f'(z)|``, the boundary Hölder constant, and the constant
``C(a)`` that makes the last two comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .errors import HqcError, InputFormatError, SingularPointError
from .grid import DiskGrid

TWO_PI = 2.0 * np.pi

DEFAULT_TRUNCATION = 256
DEFAULT_EXCLUSION_ARC = 1e-3


@dataclass(frozen=True, eq=False)
class HoloFn:
    """Holomorphic function on the disk.

    ``kind`` is ``"series"`` (coefficients a_0..a_N) or a closed form:
    ``"mobius"`` with ``param = a`` for (z + a)/(1 + conj(a) z), or ``"f0"``
    for 2z + (1 - z) log(1 - z) on the principal branch. Closed forms carry
    an affine wrapper ``scale * base + shift`` and a derivative ``order``.
    """

    kind: str
    coeffs: Optional[np.ndarray] = None
    param: complex = 0j
    scale: complex = 1.0
    shift: complex = 0j
    order: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind == "series":
            c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
            if c.size == 0:
                c = np.zeros(1, dtype=complex)
            object.__setattr__(self, "coeffs", c)
        elif self.kind == "mobius":
            if abs(self.param) >= 1:
                raise HqcError(f"Möbius parameter must satisfy |a| < 1, got {self.param}")
        elif self.kind != "f0":
            raise HqcError(f"unknown HoloFn kind {self.kind!r}")

    # -- evaluation ---------------------------------------------------------

    @property
    def singular_points(self) -> tuple:
        return (1.0 + 0j,) if self.kind == "f0" else ()

    @property
    def smooth_on_closed_disk(self) -> bool:
        return not self.singular_points

    def boundary_limit(self, z: complex) -> complex:
        """Continuous extension at a singular boundary point (value only)."""
        if self.kind == "f0" and self.order == 0 and abs(z - 1) < 1e-15:
            return complex(self.scale * 2.0 + self.shift)
        raise SingularPointError(f"{self.label} has no finite limit at {z}", witness=z)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z, order: int = 0):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > 1 + 1e-12):
            bad = z.ravel()[np.argmax(np.abs(z).ravel())]
            raise HqcError(f"evaluation outside the closed disk at {bad}", witness=complex(bad))
        for s in self.singular_points:
            hit = np.abs(z - s) < 1e-15
            if np.any(hit):
                raise SingularPointError(f"{self.label} is singular at z = {s}", witness=s)
        if self.kind == "series":
            c = _series_derivative_coeffs(self.coeffs, order)
            return np.polynomial.polynomial.polyval(z, c)
        k = self.order + order
        base = _mobius(z, self.param, k) if self.kind == "mobius" else _f0(z, k)
        out = self.scale * base
        if k == 0:
            out = out + self.shift
        return out

    def d1(self, z):
        return self.eval(z, order=1)

    def derivative(self) -> "HoloFn":
        if self.kind == "series":
            return HoloFn("series", _series_derivative_coeffs(self.coeffs, 1), name=_dname(self.label))
        return replace(self, shift=0j, order=self.order + 1, name=_dname(self.label))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, HoloFn):
            if self.kind == other.kind == "series":
                a, b = self.coeffs, other.coeffs
                n = max(len(a), len(b))
                return HoloFn("series", np.pad(a, (0, n - len(a))) + np.pad(b, (0, n - len(b))))
            return NotImplemented
        if self.kind == "series":
            c = self.coeffs.copy()
            c[0] += other
            return HoloFn("series", c, name=self.name)
        if self.order > 0:
            raise HqcError("cannot add a constant to a derivative form")
        return replace(self, shift=self.shift + other, name="")

    __radd__ = __add__

    def __mul__(self, a):
        if isinstance(a, HoloFn):
            return NotImplemented
        if self.kind == "series":
            return HoloFn("series", a * self.coeffs)
        return replace(self, scale=self.scale * a, shift=self.shift * a, name="")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "series":
            return f"series[N={len(self.coeffs) - 1}]"
        return self.kind + "'" * self.order


def _dname(label: str) -> str:
    return label + "'"


def _series_derivative_coeffs(c: np.ndarray, order: int) -> np.ndarray:
    for _ in range(order):
        if len(c) <= 1:
            return np.zeros(1, dtype=complex)
        c = c[1:] * np.arange(1, len(c))
    return c


def _mobius(z, a, k):
    a = complex(a)
    den = 1 + np.conj(a) * z
    if k == 0:
        return (z + a) / den
    return (1 - abs(a) ** 2) * math.factorial(k) * (-np.conj(a)) ** (k - 1) / den ** (k + 1)


def _f0(z, k):
    w = 1 - z
    if k == 0:
        return 2 * z + w * np.log(w)
    if k == 1:
        return 1 - np.log(w)
    return math.factorial(k - 2) / w ** (k - 1)


# -- gallery ----------------------------------------------------------------


def series(coeffs, name: str = "") -> HoloFn:
    return HoloFn("series", np.asarray(coeffs, dtype=complex), name=name)


def constant(c: complex = 1.0) -> HoloFn:
    return series([c], name=f"const({c})")


def identity() -> HoloFn:
    return series([0, 1], name="z")


def monomial(n: int) -> HoloFn:
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1
    return series(c, name=f"z^{n}")


def mobius(a: complex) -> HoloFn:
    return HoloFn("mobius", param=complex(a), name=f"mobius({a})")


def f0() -> HoloFn:
    return HoloFn("f0", name="f0")


GALLERY_FUNCTIONS = {
    "z": (identity, "z"),
    "z2": (lambda: monomial(2), "z^2"),
    "z3": (lambda: monomial(3), "z^3"),
    "mobius": (lambda: mobius(0.5), "(z + 0.5)/(1 + 0.5 z)"),
    "f0": (f0, "2z + (1 - z) log(1 - z), principal branch"),
    "one-plus-z": (lambda: series([1, 1], name="1+z"), "1 + z"),
}


def builtin_function(name: str) -> HoloFn:
    try:
        return GALLERY_FUNCTIONS[name][0]()
    except KeyError:
        raise HqcError(f"unknown function {name!r}; choose from {sorted(GALLERY_FUNCTIONS)}") from None


# -- coefficient files ---------------------------------------------------------


def read_coefficients(path, truncation: Optional[int] = None) -> HoloFn:
    """One complex coefficient ``re im`` per line; index = line number - 1."""
    path = Path(path)
    coeffs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if len(parts) != 2:
                raise InputFormatError(path, lineno, f"expected 're im', got {line.strip()!r}")
            try:
                re_, im_ = float(parts[0]), float(parts[1])
            except ValueError:
                raise InputFormatError(path, lineno, f"not a number pair: {line.strip()!r}") from None
            if not (math.isfinite(re_) and math.isfinite(im_)):
                raise InputFormatError(path, lineno, "non-finite coefficient")
            coeffs.append(complex(re_, im_))
    if not coeffs:
        raise InputFormatError(path, 1, "empty coefficient file")
    if truncation is not None:
        coeffs = coeffs[: truncation + 1]
    return series(coeffs, name=path.stem)


def write_coefficients(path, f: HoloFn) -> None:
    if f.kind != "series":
        raise HqcError("only power-series functions can be written as coefficients")
    with open(path, "w") as fh:
        for c in f.coeffs:
            fh.write(f"{c.real:.17g} {c.imag:.17g}\n")


# -- norms ---------------------------------------------------------------------

FieldLike = Union[HoloFn, Callable[[np.ndarray], np.ndarray]]


def hardy_norm(f: FieldLike, p: float, r: float, n_theta: int = 1024) -> float:
    """(1/2π ∮ |f(r e^{it})|^p dt)^{1/p} by the periodic trapezoid rule."""
    if n_theta < 64:
        raise HqcError(f"n_theta must be >= 64, got {n_theta}")
    if p <= 0:
        raise HqcError(f"p must be > 0, got {p}")
    if not 0 < r < 1:
        raise HqcError(f"r must lie in (0, 1), got {r}")
    z = r * np.exp(1j * TWO_PI * np.arange(n_theta) / n_theta)
    vals = np.abs(f(z)) ** p
    return float(np.mean(vals) ** (1.0 / p))


def bergman_norm(F: FieldLike, p: float, grid: DiskGrid) -> float:
    """(∬_D |F|^p dλ)^{1/p} on the grid's polar quadrature."""
    if p <= 0:
        raise HqcError(f"p must be > 0, got {p}")
    if grid.r_max < 1 - 1e-4:
        raise HqcError(f"grid does not resolve the boundary: r_max = {grid.r_max}")
    z = grid.points()
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(F(z))) ** p
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise HqcError(f"non-finite integrand at z = {z[i, j]}", witness=complex(z[i, j]))
    return grid.integrate(vals) ** (1.0 / p)


def bloch_alpha_norm(f: HoloFn, alpha: float, grid: DiskGrid, with_witness: bool = False):
    """Grid maximum of (1-|z|)^alpha |f'(z)|, a lower bound for the supremum.

    ``alpha = 0`` is accepted and gives the plain sup of |f'|.
    """
    if not 0 <= alpha < 1:
        raise HqcError(f"alpha must lie in [0, 1), got {alpha}")
    z = grid.points()
    vals = (grid.gaps ** alpha)[:, None] * np.abs(f.d1(z))
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    y = float(vals[i, j])
    return (y, complex(z[i, j])) if with_witness else y


def boundary_samples(f: HoloFn, n: int, exclusion_arc: float = DEFAULT_EXCLUSION_ARC):
    """Uniform boundary samples of f, skipping arcs of half-width
    ``exclusion_arc`` around its singular points. Returns (angles, values)."""
    t = TWO_PI * np.arange(n) / n
    keep = np.ones(n, dtype=bool)
    for s in f.singular_points:
        d = np.angle(np.exp(1j * (t - np.angle(s))))
        keep &= np.abs(d) >= exclusion_arc
    t = t[keep]
    return t, f(np.exp(1j * t))


def boundary_holder_constant(values, alpha: float, angles=None, with_witness: bool = False, chunk: int = 512):
    """max over sample pairs of |f_i - f_j| / |e^{it_i} - e^{it_j}|^alpha.

    ``angles`` defaults to the uniform grid 2πi/n.
    """
    v = np.asarray(values, dtype=complex)
    n = len(v)
    if not 0 < alpha <= 1:
        raise HqcError(f"alpha must lie in (0, 1], got {alpha}")
    best, wit = 0.0, None
    if angles is None:
        if n < 64:
            raise HqcError(f"need >= 64 boundary samples, got {n}")
        for k in range(1, n // 2 + 1):
            chord = 2 * math.sin(math.pi * k / n)
            diff = np.abs(np.roll(v, -k) - v)
            i = int(np.argmax(diff))
            ratio = diff[i] / chord ** alpha
            if ratio > best:
                best, wit = float(ratio), (i, (i + k) % n)
    else:
        t = np.asarray(angles, dtype=float)
        e = np.exp(1j * t)
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            chord = np.abs(e[sl, None] - e[None, :])
            diff = np.abs(v[sl, None] - v[None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(chord > 0, diff / chord ** alpha, 0.0)
            i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
            if ratio[i, j] > best:
                best, wit = float(ratio[i, j]), (start + i, j)
    return (best, wit) if with_witness else best


def c_alpha(alpha: float) -> float:
    """Comparison constant between the boundary Hölder constant and the
    weighted Bloch quantity: the max of three closed-form terms."""
    if not 0 < alpha < 1:
        raise HqcError(f"alpha must lie strictly in (0, 1), got {alpha}")
    t1 = 2 ** (2 - alpha) * math.pi ** (alpha + 1) / (alpha + 1)
    t2 = math.pi ** (1 + alpha) / 2 ** ((1 + 3 * alpha) / 2) / math.cos(math.pi * alpha / 2)
    t3 = 4 * (2 / alpha + 1)
    return max(t1, t2, t3)


def isoperimetric_check(F: HoloFn, grid: DiskGrid, tol: float = 1e-6):
    """Compare ∬_D |F|^2 with (1/4π)(∮ |F| |dz|)^2.

    Returns ``(lhs, rhs, passed)``.
    """
    if not F.smooth_on_closed_disk:
        raise SingularPointError(f"{F.label} is singular on the circle", witness=F.singular_points[0])
    lhs = grid.integrate(np.abs(F(grid.points())) ** 2)
    boundary = np.abs(F(np.exp(1j * grid.angles)))
    rhs = (TWO_PI * float(np.mean(boundary))) ** 2 / (4 * math.pi)
    return lhs, rhs, bool(lhs <= rhs * (1 + tol))
