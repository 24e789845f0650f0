import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hqc import curves, hmap, holo
from hqc.errors import HqcError, InputFormatError
from hqc.grid import DiskGrid
from hqc.suite import lshape_boundary, square_boundary

import oracles

TWO_PI = 2 * np.pi
disk_points = st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0.0, 0.98), st.floats(0, TWO_PI))


def gallery_maps():
    return {
        "identity": hmap.holomorphic(holo.identity()),
        "mobius": hmap.holomorphic(holo.mobius(0.5)),
        "f0": hmap.holomorphic(holo.f0()),
        "linear": hmap.linear_map(0.3),
        "linear-complex": hmap.linear_map(0.2 - 0.4j),
        "z2-harmonic": hmap.HarmonicMap(holo.series([0, 1, 0.2]), holo.series([0, 0, 0.1j]), "z + 0.2z^2 + conj(0.1i z^2)"),
    }


MAPS = gallery_maps()


# -- Poisson kernel and extension -------------------------------------------------


def test_kernel_examples():
    assert abs(hmap.poisson_kernel(0, 1.234) - 1 / TWO_PI) < 1e-15
    assert abs(hmap.poisson_kernel(0.5, 0.0) - 3 / TWO_PI) < 1e-12
    assert abs(oracles.poisson_integral(0.3 + 0.4j) - 1) < 1e-10
    t = TWO_PI * np.arange(4096) / 4096
    assert abs(hmap.poisson_kernel(0.3 + 0.4j, t).mean() * TWO_PI - 1) < 1e-10
    with pytest.raises(HqcError):
        hmap.poisson_kernel(1.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(z=disk_points, t=st.floats(0, TWO_PI))
def test_kernel_positive(z, t):
    assert hmap.poisson_kernel(z, t) > 0


def test_extension_examples(grid):
    z = grid.clipped(0.99).points()
    m = hmap.poisson_extend(hmap.BoundaryFunction.from_function(lambda t: np.exp(1j * t), 1024), 512)
    assert np.abs(m(z) - z).max() < 1e-10
    m = hmap.poisson_extend(hmap.BoundaryFunction.from_function(lambda t: np.exp(-1j * t), 256))
    assert np.abs(m(z) - np.conj(z)).max() < 1e-10
    assert np.abs(m.g.coeffs).max() < 1e-12
    m = hmap.poisson_extend(hmap.BoundaryFunction.from_function(lambda t: np.exp(1j * t) + 0.3 * np.exp(-1j * t), 256))
    assert np.abs(hmap.qc_constants(m, grid).mu - 0.3).max() < 1e-10


def test_extension_matches_poisson_integral():
    fn = lambda t: np.exp(np.cos(t)) + 1j * np.sin(3 * t)
    m = hmap.poisson_extend(hmap.BoundaryFunction.from_function(fn, 256))
    th = TWO_PI * np.arange(8192) / 8192
    for z in (0.2, -0.5 + 0.3j, 0.8j):
        direct = np.mean(hmap.poisson_kernel(z, th) * fn(th)) * TWO_PI
        assert abs(m(z) - direct) < 1e-10


trig_coeffs = st.lists(st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=9)


def _trig(coeffs):
    ks = np.arange(len(coeffs)) - len(coeffs) // 2
    return lambda t: sum(c * np.exp(1j * k * np.asarray(t)) for c, k in zip(coeffs, ks))


@settings(max_examples=40, deadline=None)
@given(coeffs=trig_coeffs)
def test_mean_value_property(coeffs):
    bf = hmap.BoundaryFunction.from_function(_trig(coeffs), 64)
    assert abs(hmap.poisson_extend(bf)(0) - bf.values.mean()) < 1e-10


@settings(max_examples=40, deadline=None)
@given(u=trig_coeffs, v=trig_coeffs, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_extension_linear(u, v, a, b):
    U = hmap.BoundaryFunction.from_function(_trig(u), 64)
    V = hmap.BoundaryFunction.from_function(_trig(v), 64)
    W = hmap.BoundaryFunction(a * U.values + b * V.values)
    mu, mv, mw = (hmap.poisson_extend(x) for x in (U, V, W))
    assert np.allclose(mw.g.coeffs, a * mu.g.coeffs + b * mv.g.coeffs, atol=1e-12)
    assert np.allclose(mw.h.coeffs, a * mu.h.coeffs + b * mv.h.coeffs, atol=1e-12)


def test_boundary_function_validation():
    with pytest.raises(HqcError):
        hmap.BoundaryFunction(np.ones(100))
    with pytest.raises(HqcError):
        hmap.BoundaryFunction(np.ones(32))


def test_read_boundary_formats(tmp_path):
    t = TWO_PI * np.arange(100) / 100
    p = tmp_path / "b.txt"
    p.write_text("# t re im\n" + "\n".join(f"{x:.17g} {math.cos(x):.17g} {math.sin(x):.17g}" for x in t) + "\n")
    bf = hmap.read_boundary(p)
    assert bf.n == 128
    assert np.abs(bf.values - np.exp(1j * bf.angles)).max() < 2e-3
    t = TWO_PI * np.arange(64) / 64
    p.write_text("\n".join(f"{math.cos(x):.17g} {math.sin(x):.17g}" for x in t) + "\n")
    assert np.abs(hmap.read_boundary(p).values - np.exp(1j * t)).max() < 1e-15


def test_read_boundary_errors(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("1 0\n0 1 2\n")
    with pytest.raises(InputFormatError, match="b.txt:2"):
        hmap.read_boundary(p)
    p.write_text("# nothing\n")
    with pytest.raises(InputFormatError):
        hmap.read_boundary(p)


# -- Radó-Kneser-Choquet ------------------------------------------------------------


def test_rkc_identity(small_grid):
    res = hmap.rkc_extend(lambda t: np.exp(1j * t), 256, small_grid)
    assert res.convex and abs(res.jacobian_min - 1) < 1e-10


def test_rkc_square_two_resolutions():
    for nr, na in ((64, 512), (128, 1024)):
        res = hmap.rkc_extend(square_boundary, 512, DiskGrid.build(nr, na))
        assert res.convex and res.sense_preserving


def test_rkc_lshape_sign_change(grid):
    res = hmap.rkc_extend(lshape_boundary, 512, grid)
    assert not res.convex
    assert res.jacobian_min < 0
    z = grid.points()
    assert (res.map.jacobian(z) > 0).any()


def test_rkc_rejects_non_monotone(small_grid):
    with pytest.raises(HqcError):
        hmap.rkc_extend(lambda t: np.exp(-1j * t), 128, small_grid)
    with pytest.raises(HqcError):
        hmap.rkc_extend(lambda t: np.exp(2j * t), 128, small_grid)
    with pytest.raises(HqcError):
        hmap.rkc_extend(lambda t: np.exp(1j * np.round(t, 1)), 128, small_grid)


# -- derivatives and dilatation -----------------------------------------------------


def test_wirtinger_examples():
    fz, fzb = hmap.wirtinger(hmap.linear_map(0.3), 0.4 - 0.2j)
    assert fz == 1 and abs(fzb - 0.3) < 1e-15
    assert hmap.wirtinger(MAPS["f0"], 0.0) == (1, 0)
    fz, fzb = hmap.wirtinger(hmap.holomorphic(holo.monomial(2)), 0.5)
    assert fz == 1 and fzb == 0


@pytest.mark.parametrize("name", sorted(MAPS))
def test_jacobian_matches_finite_differences(name):
    m = MAPS[name]
    pts = 0.9 * np.exp(1j * np.linspace(0, TWO_PI, 7)) * np.linspace(0.1, 1, 7)
    h = 1e-6
    for z in pts:
        dx = (m(z + h) - m(z - h)) / (2 * h)
        dy = (m(z + 1j * h) - m(z - 1j * h)) / (2 * h)
        det = dx.real * dy.imag - dx.imag * dy.real
        assert abs(m.jacobian(z) - det) < 1e-6 * max(1, abs(det))


def test_qc_constants_examples(grid):
    d = hmap.qc_constants(hmap.linear_map(0.25), grid)
    assert abs(d.k_hat - 0.25) < 1e-12 and abs(d.K_hat - 5 / 3) < 1e-12 and d.is_qc
    for name in ("identity", "f0"):
        d = hmap.qc_constants(MAPS[name], grid)
        assert d.k_hat == 0 and d.K_hat == 1


def test_qc_constants_errors(grid):
    with pytest.raises(HqcError) as info:
        hmap.qc_constants(hmap.holomorphic(holo.monomial(2)), grid)
    assert info.value.witness == 0
    d = hmap.qc_constants(hmap.linear_map(1.5), grid)
    assert not d.is_qc and math.isinf(d.K_hat)


@pytest.mark.parametrize("name", sorted(MAPS))
def test_dilatation_invariants(name, small_grid):
    m = MAPS[name]
    d = hmap.qc_constants(m, small_grid)
    assert d.K_hat >= 1 and (np.abs(d.mu) < 1).all()
    moved = hmap.qc_constants(m.rigid(0.7, 0.3 - 2j), small_grid)
    assert np.abs(np.abs(moved.mu) - np.abs(d.mu)).max() < 1e-12
    z = small_grid.points()
    big, small, _ = hmap.df_norms(m, z)
    assert (big <= d.K_hat * small * (1 + 1e-12)).all()


def test_df_norms_examples():
    assert np.allclose(hmap.df_norms(MAPS["identity"], 0.3), (1, 1, 2))
    assert np.allclose(hmap.df_norms(MAPS["linear"], 0.3j), (1.3, 0.7, 2.18))


def test_heinz(grid):
    assert hmap.heinz_inf(MAPS["identity"], grid) == 2
    vals = [hmap.heinz_inf(MAPS["mobius"], g.clipped(0.99)) for g in (grid, grid.refined())]
    assert vals[0] > 0 and abs(vals[1] - vals[0]) / vals[0] < 0.01
    assert abs(vals[1] - 2 * (0.75 / 1.495 ** 2) ** 2) < 1e-12
    with pytest.raises(HqcError):
        hmap.heinz_inf(hmap.holomorphic(holo.series([0, 2])), grid)


def test_heinz_report_only_for_square(grid):
    res = hmap.rkc_extend(square_boundary, 512, grid)
    with pytest.raises(HqcError):
        hmap.heinz_inf(res.map, grid)


# -- tangent argument -------------------------------------------------------------------


def test_tangent_arg_identity_and_rotation(grid):
    fld = hmap.tangent_arg_field(MAPS["identity"], grid, curves.circle())
    assert np.abs(fld.U - np.pi / 2).max() < 1e-6 and fld.boundary_error < 1e-6
    a = 0.7
    rot = hmap.holomorphic(holo.series([0, np.exp(1j * a)]))
    fld = hmap.tangent_arg_field(rot, grid, curves.circle())
    # (1/z) ∂_φ(e^{ia} z) = i e^{ia}
    assert np.abs(fld.U - (np.pi / 2 + a)).max() < 1e-6 and fld.boundary_error < 1e-6


def test_tangent_arg_ellipse():
    g = DiskGrid.from_radii(np.linspace(0, 0.999, 64), 512)
    fld = hmap.tangent_arg_field(MAPS["linear"], g, curves.ellipse(1.3, 0.7))
    assert fld.boundary_error < 1e-2
    assert np.abs(np.diff(fld.U, axis=0)).max() < 0.5


def test_tangent_arg_vanishing_derivative(small_grid):
    with pytest.raises(HqcError):
        hmap.tangent_arg_field(hmap.linear_map(1.0), small_grid)
