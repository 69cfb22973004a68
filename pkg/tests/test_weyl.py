import math

import numpy as np
import pytest

from weylkit.calibration import measure_calibration
from weylkit.errors import (
    AlignmentError,
    BoundaryMassWarning,
    GridMismatchError,
    ResampleError,
)
from weylkit.hermite import identity, projection, spectral_function
from weylkit.weyl import (
    GridSpec,
    PhaseGridFunction,
    apply_multiplier,
    dilate,
    inverse_weyl,
    max_resolved_level,
    polyradial_project,
    random_band_limited,
    rotate,
    smooth_dilate,
    special_hermite_fn,
    taper_window,
    twist_modulate,
    twisted_convolve,
    weyl_transform,
)

TWO_PI = 2.0 * math.pi


def gaussian(grid, width=2.0, extra=None):
    x, y = grid.xy_meshes()
    vals = np.exp(-(x**2 + y**2) / (2 * width**2)).astype(complex)
    if extra is not None:
        vals = vals * extra(x, y)
    return PhaseGridFunction(grid, vals)


class TestPointMatrix:
    def test_identity_at_origin(self, engine):
        p = engine.point_matrix((0.0, 0.0))
        assert np.abs(p - np.eye(64)).max() < 1e-10

    def test_ground_overlap_closed_form(self, engine):
        # symbolic oracle: <W(z) h_0, h_0> = exp(-(x^2+y^2)/4), phases cancel
        for z in ((1.0, 0.0), (0.5, 0.25), (2.0, -1.5)):
            got = engine.point_matrix(z)[0, 0]
            want = math.exp(-(z[0] ** 2 + z[1] ** 2) / 4.0)
            assert abs(got - want) < 1e-12

    def test_off_lattice_translation_rejected(self, engine):
        with pytest.raises(AlignmentError):
            engine.point_matrix((0.5, 0.1234567))

    def test_unitarity_on_interior(self, engine):
        defect, n_interior = engine.unitarity_defect((1.0, 0.0))
        assert n_interior >= 20
        assert defect < 1e-6


class TestTransform:
    def test_zero_maps_to_zero(self, ctx, grid, engine):
        f = PhaseGridFunction(grid, np.zeros(grid.shape, dtype=complex))
        assert np.abs(weyl_transform(ctx, f).entries).max() == 0.0

    def test_linearity(self, ctx, grid, engine):
        f, g = random_band_limited(ctx, grid, 5, 2, seed=21)
        lhs = weyl_transform(ctx, 2.0 * f + (1.0 - 0.5j) * g).entries
        rhs = 2.0 * weyl_transform(ctx, f).entries + (1.0 - 0.5j) * weyl_transform(
            ctx, g
        ).entries
        assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(rhs).max()

    def test_plancherel_gaussian(self, ctx, grid, engine):
        f = gaussian(grid, width=1.0)
        W = weyl_transform(ctx, f)
        ratio = W.hs_norm() ** 2 / f.l2_norm() ** 2
        assert abs(ratio - TWO_PI) / TWO_PI < 1e-3

    def test_boundary_mass_warning(self, ctx, grid):
        f = gaussian(grid, width=8.0)
        with pytest.warns(BoundaryMassWarning):
            weyl_transform(ctx, f)

    def test_inverse_of_ground_projection(self, ctx, grid, engine):
        k = inverse_weyl(ctx, projection(ctx, 0), grid)
        x, y = grid.xy_meshes()
        want = np.exp(-(x**2 + y**2) / 4.0) / TWO_PI
        assert np.abs(k.values - want).max() < 1e-12

    def test_inverse_of_zero(self, ctx, grid, engine):
        m = 0.0 * identity(ctx)
        assert inverse_weyl(ctx, m, grid).l2_norm() == 0.0

    def test_roundtrip_band8_panel(self, ctx, fine_grid, fine_engine):
        # function-side roundtrip on the full level <= 8 matrix-element panel
        fns = np.stack(
            [
                special_hermite_fn(ctx, a, b, fine_grid).values
                for a in range(9)
                for b in range(9)
            ]
        )
        back = fine_engine.inverse(fine_engine.transform(fns))
        errs = np.linalg.norm(
            (back - fns).reshape(len(fns), -1), axis=1
        ) / np.linalg.norm(fns.reshape(len(fns), -1), axis=1)
        assert errs.max() < 1e-3


class TestTwistedConvolution:
    def test_zero_factor(self, ctx, grid):
        f = random_band_limited(ctx, grid, 4, 1, seed=3)[0]
        z = PhaseGridFunction(grid, np.zeros(grid.shape, dtype=complex))
        assert twisted_convolve(f, z).l2_norm() == 0.0

    def test_sup_bound(self, ctx, grid, engine):
        fs = random_band_limited(ctx, grid, 5, 2, seed=31)
        gs = random_band_limited(ctx, grid, 5, 2, seed=32)
        for f, g in zip(fs, gs):
            h = twisted_convolve(f, g)
            assert h.lp_norm(math.inf) <= f.l2_norm() * g.l2_norm() * (1 + 1e-9)

    def test_transform_homomorphism(self, ctx, grid, engine):
        fs = random_band_limited(ctx, grid, 4, 2, seed=41)
        gs = random_band_limited(ctx, grid, 4, 2, seed=42)
        for f, g in zip(fs, gs):
            Wf = weyl_transform(ctx, f).entries
            Wg = weyl_transform(ctx, g).entries
            Wh = weyl_transform(ctx, twisted_convolve(f, g)).entries
            rel = np.linalg.norm(Wh - Wf @ Wg) / (
                np.linalg.norm(Wf) * np.linalg.norm(Wg)
            )
            assert rel < 1e-3

    def test_grid_mismatch(self, ctx, grid, fine_grid):
        f = PhaseGridFunction(grid, np.zeros(grid.shape, dtype=complex))
        g = PhaseGridFunction(fine_grid, np.zeros(fine_grid.shape, dtype=complex))
        with pytest.raises(GridMismatchError):
            twisted_convolve(f, g)


class TestMultiplier:
    def test_identity_multiplier(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=51)[0]
        out = apply_multiplier(ctx, identity(ctx), f)
        assert (out - f).l2_norm() / f.l2_norm() < 1e-3

    def test_projection_idempotent(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=52)[0]
        P = projection(ctx, 0)
        once = apply_multiplier(ctx, P, f)
        twice = apply_multiplier(ctx, P, once)
        assert (twice - once).l2_norm() < 1e-6 * max(once.l2_norm(), 1.0)

    def test_heat_contraction(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 6, 1, seed=53)[0]
        out = apply_multiplier(ctx, spectral_function(ctx, lambda t: np.exp(-t)), f)
        assert out.l2_norm() <= math.exp(-1.0) * f.l2_norm() * (1 + 1e-6)

    def test_composition(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=54)[0]
        m1 = spectral_function(ctx, lambda t: np.exp(-t / 2.0))
        m2 = spectral_function(ctx, lambda t: 1.0 / (1.0 + t))
        lhs = apply_multiplier(ctx, m1, apply_multiplier(ctx, m2, f))
        rhs = apply_multiplier(ctx, m1 @ m2, f)
        assert (lhs - rhs).l2_norm() / rhs.l2_norm() < 2e-3


class TestSpecialHermite:
    def test_ground_is_gaussian(self, ctx, grid, engine):
        f = special_hermite_fn(ctx, 0, 0, grid)
        x, y = grid.xy_meshes()
        want = np.exp(-(x**2 + y**2) / 4.0) / math.sqrt(TWO_PI)
        assert np.abs(f.values - want).max() < 1e-12

    def test_orthonormal_panel(self, ctx, grid, engine):
        fns = {
            (a, b): special_hermite_fn(ctx, a, b, grid)
            for a in range(3)
            for b in range(3)
        }
        w = grid.cell_volume
        for (a, b), f in fns.items():
            for (c, d), g in fns.items():
                ip = np.sum(f.values * np.conj(g.values)) * w
                want = 1.0 if (a, b) == (c, d) else 0.0
                assert abs(ip - want) < 1e-6

    def test_conjugate_transforms_to_rank_one(self, ctx, grid, engine):
        f = special_hermite_fn(ctx, 0, 1, grid).conj()
        sv = np.linalg.svd(weyl_transform(ctx, f).entries, compute_uv=False)
        assert sv[1] < 1e-6 * sv[0]
        assert sv[0] == pytest.approx(math.sqrt(TWO_PI), rel=1e-6)


class TestGeometry:
    def test_unit_dilation(self, ctx, grid):
        f = random_band_limited(ctx, grid, 4, 1, seed=61)[0]
        assert dilate(f, 1.0) is f

    def test_integer_dilation_exact(self, grid):
        f = gaussian(grid, width=1.5)
        g = dilate(f, 2.0)
        x, y = grid.xy_meshes()
        want = np.exp(-(4 * x**2 + 4 * y**2) / (2 * 1.5**2))
        inside = (np.abs(2 * x) < grid.L_z) & (np.abs(2 * y) < grid.L_z)
        assert np.abs((g.values - want) * inside).max() < 1e-12

    def test_off_lattice_dilation_rejected(self, grid):
        f = gaussian(grid)
        with pytest.raises(ResampleError):
            dilate(f, 1.5)

    def test_smooth_dilate_matches_analytic(self, grid):
        # narrow enough that the periodic extension is smooth to ~1e-7
        f = gaussian(grid, width=1.4, extra=lambda x, y: 1 + 0.3 * x)
        r = math.sqrt(1.05)
        g = smooth_dilate(f, r)
        x, y = grid.xy_meshes()
        want = np.exp(-((r * x) ** 2 + (r * y) ** 2) / (2 * 1.4**2)) * (1 + 0.3 * r * x)
        assert np.abs(g.values - want).max() < 1e-6

    def test_twist_modulation(self, grid):
        f = gaussian(grid)
        g = twist_modulate(f, 2.0)
        x, y = grid.xy_meshes()
        assert np.abs(g.values - np.exp(1j * x * y) * f.values).max() < 1e-14

    def test_quarter_turn_exact(self, grid):
        x, y = grid.xy_meshes()
        f = PhaseGridFunction(
            grid, np.exp(-((x - 1) ** 2 + (y + 2) ** 2) / 2).astype(complex)
        )
        g = rotate(f, math.pi / 2)
        want = np.exp(-((-y - 1) ** 2 + (x + 2) ** 2) / 2)
        assert np.abs(g.values - want).max() < 1e-9

    def test_polyradial_fixes_radial(self, grid):
        f = gaussian(grid, width=1.2)
        assert (polyradial_project(f) - f).l2_norm() < 1e-6

    def test_polyradial_contraction(self, ctx, grid, engine):
        win = taper_window(grid)
        for i, p in enumerate((1.5, 2.0, 4.0)):
            f = win * random_band_limited(ctx, grid, 6, 1, seed=70 + i)[0]
            r = polyradial_project(f)
            assert r.lp_norm(p) <= f.lp_norm(p) * (1 + 1e-9)

    def test_polyradial_idempotent(self, ctx, grid, engine):
        win = taper_window(grid)
        f = win * random_band_limited(ctx, grid, 5, 1, seed=73)[0]
        r = polyradial_project(f)
        assert (polyradial_project(r) - r).l2_norm() / r.l2_norm() < 1e-4


class TestCalibration:
    def test_constants_and_stability(self, ctx, grid, engine, fine_engine):
        rec = measure_calibration(ctx, grid)
        assert rec.stable
        assert rec.plancherel == pytest.approx(TWO_PI, rel=1e-10)
        assert rec.inversion == pytest.approx(1.0 / TWO_PI, rel=1e-10)
        assert rec.phi_normalizer == pytest.approx(TWO_PI**-0.5, rel=1e-10)

    def test_resolved_level_window(self, ctx, grid):
        assert max_resolved_level(ctx, grid, 1.0) == ctx.N - 1
        assert 8 <= max_resolved_level(ctx, grid, 4.0) <= 20
