"""Deterministic polar sampling of the unit disk.

Radial nodes are Gauss-Legendre points on panels that halve in width
towards the circle: ``[0, 1/2], [1/2, 3/4], ..., [1 - 2^-(depth-1), 1 - 2^-depth]``
and a last panel ``[1 - 2^-depth, 1]``. The centre ``r = 0`` is added as a
zero-weight node so sup/inf sweeps see it. Distances to the circle
(``gaps = 1 - r``) are stored exactly, which keeps integrands like
``(1 - r)^-beta`` accurate even when ``r`` rounds to 1 in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HqcError

TWO_PI = 2.0 * np.pi


def _panels(depth: int):
    """Panels as (gap_hi, gap_lo) pairs, from the centre outwards."""
    edges = [2.0 ** -j for j in range(depth + 1)]
    panels = [(edges[j], edges[j + 1]) for j in range(depth)]
    panels.append((edges[depth], 0.0))
    return panels


@dataclass(frozen=True, eq=False)
class DiskGrid:
    gaps: np.ndarray
    radial_weights: np.ndarray
    angles: np.ndarray
    seed: int = 1
    depth: int = 0

    def __post_init__(self):
        gaps = np.asarray(self.gaps, dtype=float)
        if np.any(gaps <= 0) or np.any(gaps > 1):
            raise HqcError("grid radii must lie in [0, 1)")
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "radial_weights", np.asarray(self.radial_weights, dtype=float))
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=float))

    @classmethod
    def build(cls, n_radial: int = 64, n_angular: int = 512, depth: int = 20, seed: int = 1) -> "DiskGrid":
        panels = _panels(depth)
        if n_radial - 1 < 2 * len(panels):
            raise HqcError(f"n_radial={n_radial} too small for depth {depth}: need >= {2 * len(panels) + 1}")
        if n_angular < 8:
            raise HqcError("n_angular must be >= 8")
        counts = [len(c) for c in np.array_split(np.arange(n_radial - 1), len(panels))]
        gaps, weights = [1.0], [0.0]
        for (hi, lo), q in zip(panels, counts):
            x, w = np.polynomial.legendre.leggauss(q)
            half = 0.5 * (hi - lo)
            gaps.extend(lo + half * (1 - x))
            weights.extend(half * w)
        angles = TWO_PI * np.arange(n_angular) / n_angular
        return cls(np.array(gaps), np.array(weights), angles, seed, depth)

    @classmethod
    def from_radii(cls, radii, n_angular: int, seed: int = 1) -> "DiskGrid":
        """Sweep-only grid (zero quadrature weights) on the given radii."""
        radii = np.asarray(radii, dtype=float)
        return cls(1.0 - radii, np.zeros_like(radii), TWO_PI * np.arange(n_angular) / n_angular, seed)

    @property
    def radii(self) -> np.ndarray:
        return 1.0 - self.gaps

    @property
    def r_max(self) -> float:
        return float(self.radii.max())

    @property
    def shape(self):
        return (len(self.gaps), len(self.angles))

    def points(self) -> np.ndarray:
        """Complex grid points, shape (n_radial, n_angular)."""
        if self.radii.max() >= 1.0:
            raise HqcError(f"grid depth {self.depth} puts radii at 1.0 in floating point; "
                           "use depth <= 44 for point sweeps")
        return self.radii[:, None] * np.exp(1j * self.angles)[None, :]

    def area_weights(self) -> np.ndarray:
        """Per-ring weights for the area element r dr dθ (angle sum implied)."""
        return self.radial_weights * self.radii * (TWO_PI / len(self.angles))

    def refined(self) -> "DiskGrid":
        """Twice the radial and angular resolution at the same depth."""
        return DiskGrid.build(2 * len(self.gaps), 2 * len(self.angles), self.depth, self.seed)

    def clipped(self, r_max: float) -> "DiskGrid":
        """Sweep grid restricted to r <= r_max, with r_max itself added."""
        keep = self.radii <= r_max
        gaps = np.concatenate([self.gaps[keep], [1.0 - r_max]])
        weights = np.concatenate([self.radial_weights[keep], [0.0]])
        order = np.argsort(-gaps, kind="stable")
        return DiskGrid(gaps[order], weights[order], self.angles, self.seed, self.depth)

    def integrate(self, values: np.ndarray) -> float:
        """Area integral of grid samples, shape (n_radial, n_angular)."""
        return float(np.sum(self.area_weights() * np.sum(values, axis=1)))

    def integrate_radial(self, profile: Callable[[np.ndarray], np.ndarray], geometric_tail: bool = False) -> float:
        """Area integral of a radial field given as a function of the gap 1 - |z|.

        With ``geometric_tail`` the last panel ``[1 - 2^-depth, 1]`` is
        replaced by the geometric continuation of the two preceding dyadic
        panel sums. This is exact for power-law endpoint behaviour
        ``(1 - r)^-beta`` and keeps the quadrature accurate as beta -> 1,
        where the unresolved tail would otherwise carry a fraction
        ``2^(-depth (1 - beta))`` of the integral.
        """
        vals = np.asarray(profile(self.gaps), dtype=float)
        contrib = TWO_PI * self.radial_weights * self.radii * vals
        if not geometric_tail:
            return float(np.sum(contrib))
        if self.depth < 3:
            raise HqcError("geometric tail needs a built grid with depth >= 3")
        with np.errstate(divide="ignore"):
            k = np.minimum(np.floor(-np.log2(self.gaps)), self.depth).astype(int)
        panels = np.bincount(k, weights=contrib, minlength=self.depth + 1)
        q = panels[self.depth - 1] / panels[self.depth - 2]
        if not 0 < q < 1:
            raise HqcError(f"panel sums do not decay geometrically (ratio {q}); integral may diverge")
        return float(np.sum(panels[: self.depth]) + panels[self.depth - 1] * q / (1 - q))

    def meta(self) -> dict:
        return {
            "n_radial": int(len(self.gaps)),
            "n_angular": int(len(self.angles)),
            "depth": int(self.depth),
            "r_max": self.r_max,
            "min_gap": float(self.gaps.min()),
            "seed": int(self.seed),
        }
