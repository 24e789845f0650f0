import math

import numpy as np
import pytest

from hqc.errors import HqcError
from hqc.grid import DiskGrid


@pytest.mark.parametrize("depth", [4, 20, 40])
def test_area_and_moments(depth):
    g = DiskGrid.build(4 * (depth + 1) + 1, 64, depth)
    assert abs(g.integrate(np.ones(g.shape)) - math.pi) < 1e-14
    for k in (1, 2, 5):
        exact = 2 * math.pi / (k + 2)
        assert abs(g.integrate(np.abs(g.points()) ** k) - exact) < 1e-13


def test_radii_layout():
    g = DiskGrid.build(64, 512, 20)
    assert g.radii[0] == 0 and g.radial_weights[0] == 0
    assert np.all(np.diff(g.radii) > 0)
    assert 1 - g.r_max < 2 ** -20
    assert np.allclose(np.diff(g.angles), 2 * np.pi / 512)


def test_geometric_tail_exact_for_power_law():
    g = DiskGrid.build(1 + 8 * 41, 8, 40)
    for beta in (0.2, 0.6, 0.95):
        exact = 2 * math.pi / ((1 - beta) * (2 - beta))
        assert abs(g.integrate_radial(lambda d: d ** -beta, geometric_tail=True) - exact) / exact < 1e-8
    with pytest.raises(HqcError):
        g.integrate_radial(lambda d: 1 / d, geometric_tail=True)


def test_build_preconditions():
    with pytest.raises(HqcError):
        DiskGrid.build(20, 64, 20)
    with pytest.raises(HqcError):
        DiskGrid.build(64, 4, 20)
    with pytest.raises(HqcError):
        DiskGrid.build(200, 8, 60).points()


def test_clipped_and_refined():
    g = DiskGrid.build(64, 128, 20)
    c = g.clipped(0.99)
    assert c.r_max == pytest.approx(0.99, abs=1e-15)
    assert set(np.round(c.radii[:-1], 15)) <= set(np.round(g.radii, 15))
    r = g.refined()
    assert r.shape == (128, 256) and r.depth == 20
