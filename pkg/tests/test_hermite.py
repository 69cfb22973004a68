import numpy as np
import pytest

from weylkit.errors import CapacityError, DomainError, GridError, TruncationError
from weylkit.hermite import (
    OperatorMatrix,
    annihilation,
    build_context,
    creation,
    dyadic_block_levels,
    dyadic_projection,
    hermite_operator,
    identity,
    interior_residual,
    max_dyadic_index,
    projection,
    scaled_operators,
    spectral_function,
)

# Frozen by the symbolic oracle: apply (-d/dxi + xi) to the explicit
# degree-2 Hermite function and expand in the degree-3 one.
SQRT6 = 2.449489742783178


class TestContext:
    def test_grid_arithmetic(self, ctx):
        assert ctx.h_xi == pytest.approx(0.125)
        assert ctx.samples.shape == (64, 216)

    def test_ground_state_normalised(self):
        c = build_context(1, 4, 12.0, 192)
        ip = np.sum(c.samples[0] ** 2) * c.h_xi
        assert abs(ip - 1.0) < 1e-6

    def test_all_levels_normalised(self, ctx):
        norms = np.sum(ctx.samples**2, axis=1) * ctx.h_xi
        assert np.abs(norms - 1.0).max() < 1e-6

    def test_recurrence_pointwise(self, ctx):
        xi = ctx.xi_grid
        for k in (1, 17, 40, 62):
            lhs = ctx.samples[k + 1]
            rhs = (
                np.sqrt(2.0 / (k + 1)) * xi * ctx.samples[k]
                - np.sqrt(k / (k + 1)) * ctx.samples[k - 1]
            )
            assert np.abs(lhs - rhs).max() / np.abs(lhs).max() < 1e-10

    def test_capacity_threshold(self):
        # sqrt(2N+1) + 2 = 13.36 at N = 64: both of these sit below it
        with pytest.raises(CapacityError):
            build_context(1, 64, 6.0, 192)
        with pytest.raises(CapacityError):
            build_context(1, 64, 12.0, 192)
        build_context(1, 64, 13.5, 216)

    def test_under_resolved_grid(self):
        with pytest.raises(GridError):
            build_context(1, 64, 13.5, 16)

    def test_multi_index_roundtrip(self):
        c = build_context(2, 6, 12.0, 192)
        for flat in (0, 7, 35):
            assert c.flat_index(c.multi_index(flat)) == flat


class TestLadder:
    def test_annihilation_kills_ground_state(self, ctx):
        A = annihilation(ctx)
        assert np.abs(A.entries[:, 0]).max() == 0.0

    def test_creation_matches_symbolic_oracle(self, ctx):
        Ad = creation(ctx)
        col = Ad.entries[:, 2].copy()
        assert col[3] == pytest.approx(SQRT6, rel=1e-14)
        col[3] = 0.0
        assert np.abs(col).max() == 0.0

    def test_canonical_commutator(self, ctx):
        A, Ad = annihilation(ctx), creation(ctx)
        comm = A.commutator(Ad).with_margin(1)
        assert interior_residual(comm, 2.0 * identity(ctx)) < 1e-12

    def test_oscillator_from_ladders(self, ctx):
        A, Ad = annihilation(ctx), creation(ctx)
        half = (0.5 * (A @ Ad + Ad @ A)).with_margin(1)
        assert interior_residual(half, hermite_operator(ctx)) < 1e-12

    def test_oscillator_eigenvalues(self, ctx):
        H = hermite_operator(ctx)
        assert H.entries[3, 3] == 7.0
        assert H.entries[0, 0] == 1.0


class TestProjections:
    def test_dyadic_block_composition(self, ctx):
        chi3 = dyadic_projection(ctx, 3)
        expected = projection(ctx, 2) + projection(ctx, 3)
        assert np.array_equal(chi3.entries, expected.entries)

    def test_first_block_is_ground(self, ctx):
        assert np.array_equal(
            dyadic_projection(ctx, 1).entries, projection(ctx, 0).entries
        )

    def test_block_trace(self, ctx):
        assert np.trace(dyadic_projection(ctx, 4).entries).real == 4.0

    def test_blocks_orthogonal_and_complete(self, ctx):
        kmax = max_dyadic_index(ctx)
        total = np.zeros((ctx.dim, ctx.dim), dtype=complex)
        for k in range(1, kmax + 1):
            ck = dyadic_projection(ctx, k)
            for l in range(k + 1, kmax + 1):
                assert np.abs((ck @ dyadic_projection(ctx, l)).entries).max() == 0.0
            total += ck.entries
        covered = set()
        for k in range(1, kmax + 1):
            covered.update(dyadic_block_levels(ctx, k).tolist())
        for j in range(ctx.N):
            if j not in covered:
                total += projection(ctx, j).entries
        assert np.abs(total - np.eye(ctx.dim)).max() == 0.0

    def test_out_of_truncation_block(self, ctx):
        with pytest.raises(TruncationError):
            dyadic_projection(ctx, max_dyadic_index(ctx) + 1)

    def test_commutes_with_oscillator(self, ctx):
        H = hermite_operator(ctx)
        chi = dyadic_projection(ctx, 4)
        assert np.abs(H.commutator(chi).entries).max() == 0.0


class TestSpectralFunction:
    def test_heat_diagonal(self, ctx):
        m = spectral_function(ctx, lambda t: np.exp(-t))
        ks = np.arange(ctx.N)
        assert np.abs(np.diag(m.entries) - np.exp(-(2 * ks + 1))).max() < 1e-15

    def test_shift_pseudoinverse_zeroes_nonpositive(self, ctx):
        m = spectral_function(ctx, lambda t: t**-0.5, shift=-2.0)
        assert m.entries[0, 0] == 0.0
        assert m.entries[1, 1] == pytest.approx(1.0)  # eigenvalue 3 - 2

    def test_unit_function_gives_identity(self, ctx):
        m = spectral_function(ctx, lambda t: np.ones_like(t))
        assert np.array_equal(m.entries, np.eye(ctx.dim))

    def test_multiplicativity(self, ctx):
        f1 = spectral_function(ctx, lambda t: np.exp(-t))
        f2 = spectral_function(ctx, lambda t: t**-0.5)
        f12 = spectral_function(ctx, lambda t: np.exp(-t) * t**-0.5)
        assert np.abs((f1 @ f2).entries - f12.entries).max() < 1e-12

    def test_nonfinite_raises(self, ctx):
        with np.errstate(divide="ignore"), pytest.raises(DomainError):
            spectral_function(ctx, lambda t: 1.0 / (t - 3.0))


class TestScaledOperators:
    def test_unit_scale_is_plain(self, ctx):
        ops = scaled_operators(ctx, 1.0)
        assert np.array_equal(ops.annihilation[0].entries, annihilation(ctx).entries)
        assert np.array_equal(ops.hermite.entries, hermite_operator(ctx).entries)

    def test_scaled_spectrum(self, ctx):
        ops = scaled_operators(ctx, 4.0)
        ks = np.arange(ctx.N)
        assert np.abs(np.diag(ops.hermite.entries) - 4.0 * (2 * ks + 1)).max() == 0.0

    def test_scaled_ladder_prefactor(self, ctx):
        ops = scaled_operators(ctx, 4.0)
        assert np.array_equal(ops.annihilation[0].entries, 2.0 * annihilation(ctx).entries)

    def test_zero_scale_rejected(self, ctx):
        with pytest.raises(DomainError):
            scaled_operators(ctx, 0.0)


class TestOperatorMatrix:
    def test_entries_frozen(self, ctx):
        m = hermite_operator(ctx)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0

    def test_context_mismatch_rejected(self, ctx):
        other = build_context(1, 32, 11.0, 176)
        with pytest.raises(ValueError):
            hermite_operator(ctx) @ hermite_operator(other)

    def test_interior_mask_respects_margin(self, ctx):
        m = identity(ctx).with_margin(3)
        mask = m.interior_mask()
        assert mask.sum() == ctx.N - 3

    def test_nonfinite_entries_rejected(self, ctx):
        bad = np.eye(ctx.dim, dtype=complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            OperatorMatrix(ctx, bad)
