import math

import numpy as np
import pytest

from weylkit.errors import DomainError, ZeroNormError
from weylkit.hermite import identity, projection, spectral_function
from weylkit.maximal import (
    _system,
    ap_constant,
    bmo_commutator,
    bmo_norm,
    dyadic_maximal,
    hl_maximal,
    log_abs_weight,
    m_s,
    pointwise_domination,
    power_weight,
    twisted_sharp,
    weight_profile,
    weighted_lp_norm,
    weighted_ratio,
)
from weylkit.weyl import (
    GridSpec,
    PhaseGridFunction,
    apply_multiplier,
    random_band_limited,
)


def const_fn(grid, c):
    return PhaseGridFunction(grid, np.full(grid.shape, c, dtype=complex))


class TestMaximal:
    def test_indicator_cell(self, grid):
        v = np.zeros(grid.shape)
        v[10, 20] = 1.0
        md = dyadic_maximal(PhaseGridFunction(grid, v.astype(complex))).values.real
        assert md[10, 20] == 1.0
        assert md[11, 20] == 0.25  # shares only the 2x2 parent
        assert md[0, 0] == 1.0 / 32**2  # smallest common ancestor: the 32x32 quadrant
        assert md[63, 63] == 1.0 / grid.size  # opposite quadrant: only the root cube

    def test_constants(self, grid):
        c = const_fn(grid, 2.5)
        assert np.abs(dyadic_maximal(c).values.real - 2.5).max() < 1e-14
        assert np.abs(hl_maximal(c).values.real - 2.5).max() < 1e-14
        assert np.abs(m_s(c, 2.0).values.real - 2.5).max() < 1e-12

    def test_power_mean_monotonicity(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=81)[0]
        m1 = m_s(f, 1.0).values.real
        m2 = m_s(f, 2.0).values.real
        assert np.all(m2 >= m1 - 1e-12)

    def test_pointwise_monotone(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=82)[0]
        g = 2.0 * f
        assert np.all(
            dyadic_maximal(g).values.real >= dyadic_maximal(f).values.real - 1e-14
        )


class TestTwistedSharp:
    def test_zero(self, grid):
        f = const_fn(grid, 0.0)
        assert np.abs(twisted_sharp(f).values).max() == 0.0

    def test_matched_twist_cancels_on_cube(self, grid):
        # modulus-one twist tuned to a level-1 cube center: that cube's
        # oscillation vanishes identically
        sysd = _system(grid)
        ivs = sysd.levels[1]
        sx, ex = ivs[0]
        sy, ey = ivs[1]
        u1, u2 = sysd.interval_center((sx, ex)), sysd.interval_center((sy, ey))
        x, y = grid.xy_meshes()
        f = PhaseGridFunction(grid, np.exp(0.5j * (y * u1 - x * u2)))
        g = f.values[sx:ex, sy:ey] * np.exp(
            -0.5j * (y[sx:ex, sy:ey] * u1 - x[sx:ex, sy:ey] * u2)
        )
        assert np.abs(g - g.mean()).max() < 1e-14

    def test_exhaustive_small_grid_oracle(self):
        g8 = GridSpec(1, 1.0, 8)
        rng = np.random.default_rng(5)
        fv = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        f = PhaseGridFunction(g8, fv)
        got = twisted_sharp(f).values.real
        sysd = _system(g8)
        x8, y8 = g8.xy_meshes()
        oracle = np.zeros((8, 8))
        for ivs in sysd.levels:
            for sx, ex in ivs:
                for sy, ey in ivs:
                    u1 = sysd.interval_center((sx, ex))
                    u2 = sysd.interval_center((sy, ey))
                    ph = np.exp(-0.5j * (y8[sx:ex, sy:ey] * u1 - x8[sx:ex, sy:ey] * u2))
                    gq = fv[sx:ex, sy:ey] * ph
                    osc = np.abs(gq - gq.mean()).mean()
                    oracle[sx:ex, sy:ey] = np.maximum(oracle[sx:ex, sy:ey], osc)
        assert np.abs(got - oracle).max() < 1e-12

    def test_dominated_by_twice_maximal(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 6, 1, seed=83)[0]
        sharp = twisted_sharp(f).values.real
        md = dyadic_maximal(f).values.real
        assert np.all(sharp <= 2.0 * md + 1e-12)


class TestApWeights:
    def test_unit_weight(self, grid):
        assert ap_constant(const_fn(grid, 1.0), 2.0) == 1.0
        assert ap_constant(const_fn(grid, 1.0), 4.0) == 1.0

    def test_scale_invariance(self, grid):
        w = power_weight(grid, -1.0)
        a = ap_constant(w, 2.0)
        b = ap_constant(3.7 * w, 2.0)
        assert a == pytest.approx(b, rel=1e-12)

    def test_admissible_power_weight_stable(self):
        consts = [
            ap_constant(power_weight(GridSpec(1, 8.0, m), -1.0), 2.0) for m in (48, 64)
        ]
        assert abs(consts[1] - consts[0]) / consts[0] < 0.20

    def test_inadmissible_power_weight_diverges(self):
        consts = [
            ap_constant(power_weight(GridSpec(1, 8.0, m), -3.0), 2.0) for m in (48, 64)
        ]
        assert consts[1] / consts[0] > 1.25  # grows under refinement: not A_2

    def test_needs_p_above_one(self, grid):
        with pytest.raises(DomainError):
            ap_constant(const_fn(grid, 1.0), 1.0)

    def test_weight_profile(self, grid):
        prof = weight_profile(power_weight(grid, -1.0), 2.0, tag="power a=-1")
        assert prof.ap_constant >= 1.0


class TestWeightedRatios:
    def test_identity_operator(self, ctx, grid, engine):
        panel = random_band_limited(ctx, grid, 5, 3, seed=84)
        stats = weighted_ratio(lambda f: f, panel, power_weight(grid, -1.0), 2.0)
        assert all(abs(r - 1.0) < 1e-14 for r in stats["ratios"])

    def test_projection_contraction_unweighted(self, ctx, grid, engine):
        panel = random_band_limited(ctx, grid, 6, 3, seed=85)
        P = projection(ctx, 0)
        stats = weighted_ratio(
            lambda f: apply_multiplier(ctx, P, f), panel, const_fn(grid, 1.0), 2.0
        )
        assert stats["max_ratio"] <= 1.0 + 1e-3

    def test_unweighted_matches_plain_norms(self, ctx, grid, engine):
        panel = random_band_limited(ctx, grid, 5, 2, seed=86)
        m = spectral_function(ctx, lambda t: np.exp(-t))
        stats = weighted_ratio(
            lambda f: apply_multiplier(ctx, m, f), panel, const_fn(grid, 1.0), 2.0
        )
        direct = max(
            apply_multiplier(ctx, m, f).l2_norm() / f.l2_norm() for f in panel
        )
        assert stats["max_ratio"] == pytest.approx(direct, rel=1e-12)

    def test_zero_norm_rejected(self, grid):
        z = const_fn(grid, 0.0)
        with pytest.raises(ZeroNormError):
            weighted_ratio(lambda f: f, [z], const_fn(grid, 1.0), 2.0)

    def test_weighted_lp_norm_value(self, grid):
        f = const_fn(grid, 2.0)
        w = const_fn(grid, 3.0)
        want = (3.0 * 2.0**2 * (2 * grid.L_z) ** 2) ** 0.5
        assert weighted_lp_norm(f, w, 2.0) == pytest.approx(want)


class TestDomination:
    def test_zero_operator(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=87)[0]
        z = PhaseGridFunction(grid, np.zeros(grid.shape, dtype=complex))
        assert pointwise_domination(z, f, 2.0) == 0.0

    def test_identity_statistic_finite(self, ctx, grid, engine):
        f = random_band_limited(ctx, grid, 5, 1, seed=88)[0]
        stat = pointwise_domination(f, f, 2.0)
        assert np.isfinite(stat) and stat < 5.0


class TestBmoCommutator:
    def test_constant_symbol_vanishes(self, ctx, grid, engine):
        panel = random_band_limited(ctx, grid, 5, 1, seed=89)
        b = const_fn(grid, 5.0)
        assert bmo_norm(b) == 0.0
        m = spectral_function(ctx, lambda t: np.exp(-t))
        stats = bmo_commutator(ctx, b, m, panel, 2.0)
        assert stats["max_ratio"] == 0.0  # exact-zero commutator reported as 0/0 -> 0

    def test_log_weight_ratio_finite(self, ctx, grid, engine):
        panel = random_band_limited(ctx, grid, 5, 2, seed=90)
        b = log_abs_weight(grid)
        m = spectral_function(ctx, lambda t: np.exp(-t))
        stats = bmo_commutator(ctx, b, m, panel, 2.0)
        assert np.isfinite(stats["max_ratio"])
        assert stats["bmo_norm"] > 0

    def test_p_range_enforced(self, ctx, grid):
        with pytest.raises(DomainError):
            bmo_commutator(ctx, log_abs_weight(grid), identity(ctx), [], 1.0)
