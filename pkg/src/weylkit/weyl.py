"""Weyl transform, twisted convolution and phase-space grid functions.

Conventions (all validated numerically by the test suite):

- W(z) phi(xi) = exp(i lam (x.xi + x.y/2)) phi(xi + y) for z = x + iy; the
  matrix element cache stores Phi(z)[a, b] = <W(z) h_b, h_a>.
- Twisted convolution carries the phase exp(+(i/2) Im(z . conj(w))), the
  sign that makes transform(f x g) = transform(f) @ transform(g).
- transform(f) = sum_z f(z) Phi(z) h_z^{2n}  (Riemann sum), and
  inverse(M)(z) = (2 pi)^{-n} |lam|^n tr(Phi(z)* M), so that
  (2 pi)^{-n} |lam|^{-n} ||transform(f)||_HS^2 = ||f||_2^2.

Grid alignment: the z-grid spacing must be an integer multiple of the
xi-grid spacing so the translation xi -> xi + y in W(z) is an exact index
shift; no interpolation enters the quadrature.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    AlignmentError,
    BoundaryMassWarning,
    DomainError,
    GridMismatchError,
    ResampleError,
)
from .hermite import HermiteContext, OperatorMatrix, hermite_samples

__all__ = [
    "GridSpec",
    "PhaseGridFunction",
    "WeylEngine",
    "get_engine",
    "clear_engines",
    "weyl_point_matrix",
    "weyl_transform",
    "inverse_weyl",
    "apply_multiplier",
    "apply_right_multiplier",
    "twisted_convolve",
    "special_hermite_fn",
    "special_hermite_panel",
    "dilate",
    "smooth_dilate",
    "rescale_box",
    "twist_modulate",
    "rotate",
    "polyradial_project",
    "max_resolved_level",
    "taper_window",
    "zeros",
    "from_values",
    "random_band_limited",
    "band_limited_matrix",
    "PLANCHEREL_CONSTANT",
    "INVERSION_CONSTANT",
    "SPECIAL_HERMITE_NORMALIZER",
]

TWO_PI = 2.0 * math.pi

# Frozen normalisation constants (n = 1), re-measured by the calibration
# routine on every `calibrate` run:
#   ||transform(f)||_HS^2 / ||f||_2^2        -> PLANCHEREL_CONSTANT
#   pointwise inversion factor               -> INVERSION_CONSTANT
#   L2 normaliser of <W(z) h_0, h_0>         -> SPECIAL_HERMITE_NORMALIZER
PLANCHEREL_CONSTANT = TWO_PI
INVERSION_CONSTANT = 1.0 / TWO_PI
SPECIAL_HERMITE_NORMALIZER = TWO_PI ** (-0.5)

# Total bytes of point-matrix caches kept alive across engines.
CACHE_BUDGET_BYTES = 900_000_000


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over the box [-L_z, L_z)^{2n}, h_z = 2 L_z / m_pts."""

    n: int
    L_z: float
    m_pts: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("grid dimension must be >= 1")
        if self.m_pts < 4:
            raise DomainError("m_pts must be >= 4")
        if self.L_z <= 0:
            raise DomainError("L_z must be positive")

    @property
    def h_z(self) -> float:
        return 2.0 * self.L_z / self.m_pts

    @property
    def axis(self) -> np.ndarray:
        return -self.L_z + self.h_z * np.arange(self.m_pts)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m_pts,) * (2 * self.n)

    @property
    def cell_volume(self) -> float:
        return self.h_z ** (2 * self.n)

    @property
    def size(self) -> int:
        return self.m_pts ** (2 * self.n)

    @property
    def cache_key(self) -> str:
        tag = f"grid:{self.n}:{self.L_z!r}:{self.m_pts}"
        return hashlib.sha256(tag.encode()).hexdigest()[:16]

    def abs_z_mesh(self) -> np.ndarray:
        """|z| on the grid (n=1: sqrt(x^2+y^2), generally Euclidean norm)."""
        ax = self.axis
        total = np.zeros(self.shape)
        for j in range(2 * self.n):
            sh = [1] * (2 * self.n)
            sh[j] = self.m_pts
            total = total + ax.reshape(sh) ** 2
        return np.sqrt(total)

    def xy_meshes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n != 1:
            raise NotImplementedError("xy_meshes is a 1-dimensional helper")
        x, y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return x, y


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhaseGridFunction:
    """Complex samples on a GridSpec box, axes ordered (x-axes, y-axes)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False, compare=False)
    boundary_mass: float | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", _freeze(v))

    def _like(self, values: np.ndarray) -> "PhaseGridFunction":
        return PhaseGridFunction(self.grid, values)

    def _check(self, other: "PhaseGridFunction") -> None:
        if other.grid != self.grid:
            raise GridMismatchError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, PhaseGridFunction):
            self._check(c)
            return self._like(self.values * c.values)
        return self._like(np.asarray(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def conj(self) -> "PhaseGridFunction":
        return self._like(self.values.conj())

    def lp_norm(self, p: float) -> float:
        if p == math.inf:
            return float(np.max(np.abs(self.values)))
        if p <= 0:
            raise DomainError("p must be positive")
        return float(
            (np.sum(np.abs(self.values) ** p) * self.grid.cell_volume) ** (1.0 / p)
        )

    def l2_norm(self) -> float:
        return self.lp_norm(2.0)

    def boundary_mass_fraction(self, rim: int = 1) -> float:
        """Fraction of squared mass in the outermost ``rim`` cells of any axis."""
        a = np.abs(self.values) ** 2
        total = float(a.sum())
        if total == 0.0:
            return 0.0
        m = self.grid.m_pts
        inner = a
        for ax in range(a.ndim):
            sl = [slice(None)] * a.ndim
            sl[ax] = slice(rim, m - rim)
            inner = inner[tuple(sl)]
        return float((total - inner.sum()) / total)

    def with_boundary_diagnostic(self) -> "PhaseGridFunction":
        return replace(self, boundary_mass=self.boundary_mass_fraction())


def zeros(grid: GridSpec) -> PhaseGridFunction:
    return PhaseGridFunction(grid, np.zeros(grid.shape, dtype=complex))


def from_values(grid: GridSpec, values: np.ndarray) -> PhaseGridFunction:
    return PhaseGridFunction(grid, values)


# ---------------------------------------------------------------------------
# Weyl point-matrix engine


def _require_commensurate(ctx: HermiteContext, grid: GridSpec) -> int:
    ratio = grid.h_z / ctx.h_xi
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9:
        raise AlignmentError(
            f"grid spacing h_z={grid.h_z} is not an integer multiple of h_xi={ctx.h_xi}"
        )
    if grid.n != ctx.n:
        raise GridMismatchError(f"grid dimension {grid.n} != context dimension {ctx.n}")
    return k


class WeylEngine:
    """Point matrices Phi(z) and batched transform/inverse on one grid.

    For lam != 1 the matrices are taken in the lambda-scaled basis
    h^lam_a(xi) = |lam|^{n/4} h_a(sqrt|lam| xi) with the representation
    phase exp(i lam (x.xi + x.y/2)); lam must be positive (negative lam is
    handled by entrywise conjugation at call sites).
    """

    def __init__(self, ctx: HermiteContext, grid: GridSpec, lam: float = 1.0):
        if lam <= 0:
            raise DomainError("engine requires lam > 0; conjugate for negative lam")
        _require_commensurate(ctx, grid)
        self.ctx = ctx
        self.grid = grid
        self.lam = float(lam)
        root = math.sqrt(self.lam)
        self.scaled_samples = (
            self.lam ** 0.25 * hermite_samples(root * ctx.xi_grid, ctx.N)
        )
        self._phi: np.ndarray | None = None  # (m, m, N, N) for n=1

    # -- low-level pieces -------------------------------------------------

    def _shift_index(self, y: float) -> int:
        s = y / self.ctx.h_xi
        si = round(s)
        if abs(s - si) > 1e-9:
            raise AlignmentError(f"translation y={y} is off the xi lattice")
        return si

    def _shifted_samples(self, y: float) -> np.ndarray:
        """Rows h^lam_b(xi_i + y), zero-filled outside the xi grid."""
        s = self._shift_index(y)
        P = self.ctx.points
        out = np.zeros_like(self.scaled_samples)
        lo, hi = max(0, -s), min(P, P - s)
        if lo < hi:
            out[:, lo:hi] = self.scaled_samples[:, lo + s : hi + s]
        return out

    def _phi_block(self, y: float) -> np.ndarray:
        """Phi(z) for all x at fixed y: shape (m_pts, N, N)."""
        ctx = self.ctx
        xs = self.grid.axis
        xi = ctx.xi_grid
        phase = np.exp(1j * self.lam * np.outer(xs, xi + 0.5 * y))  # (m, P)
        sy = self._shifted_samples(y)  # (N, P)
        t = phase[:, :, None] * sy.T[None, :, :]  # (m, P, N)
        return ctx.h_xi * np.matmul(self.scaled_samples[None, :, :], t)  # (m, N, N)

    # -- public api --------------------------------------------------------

    def point_matrix(self, z: Sequence[float]) -> np.ndarray:
        """Phi(z)[a, b] = <W(z) h^lam_b, h^lam_a> by trapezoid quadrature."""
        ctx = self.ctx
        z = np.asarray(z, dtype=float)
        if z.shape != (2 * ctx.n,):
            raise DomainError(f"z must have {2 * ctx.n} coordinates (x..., y...)")
        mats = []
        for j in range(ctx.n):
            x, y = z[j], z[ctx.n + j]
            sy = self._shifted_samples(y)
            phase = np.exp(1j * self.lam * x * (ctx.xi_grid + 0.5 * y))
            mats.append(ctx.h_xi * (self.scaled_samples @ (phase[:, None] * sy.T)))
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    @property
    def phi(self) -> np.ndarray:
        """Cached Phi on the whole grid, shape (m, m, N, N); n = 1 only."""
        if self.ctx.n != 1:
            raise NotImplementedError("full point-matrix cache is 1-dimensional")
        if self._phi is None:
            m, N = self.grid.m_pts, self.ctx.N
            _reserve_cache_bytes(self, m * m * N * N * 16)
            phi = np.empty((m, m, N, N), dtype=complex)
            ys = self.grid.axis
            for iy, y in enumerate(ys):
                phi[:, iy] = self._phi_block(y)
            self._phi = phi
        return self._phi

    def release_cache(self) -> None:
        self._phi = None

    @property
    def cache_bytes(self) -> int:
        return 0 if self._phi is None else self._phi.nbytes

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Riemann-sum Weyl transform of a batch: (..., m, m) -> (..., N, N)."""
        if self.ctx.n != 1:
            raise NotImplementedError("grid transform implemented for n = 1")
        m, N = self.grid.m_pts, self.ctx.N
        vals = np.asarray(values, dtype=complex)
        batch = vals.shape[:-2]
        v = vals.reshape(-1, m, m)
        w = self.grid.cell_volume
        if self._phi is not None:
            out = np.tensordot(v, self._phi, axes=([1, 2], [0, 1])) * w
        else:
            out = np.zeros((v.shape[0], N, N), dtype=complex)
            for iy, y in enumerate(self.grid.axis):
                out += np.tensordot(v[:, :, iy], self._phi_block(y), axes=([1], [0]))
            out *= w
        return out.reshape(*batch, N, N)

    def inverse(self, mats: np.ndarray) -> np.ndarray:
        """Kernel of a batch of operators: (..., N, N) -> (..., m, m)."""
        if self.ctx.n != 1:
            raise NotImplementedError("grid inverse implemented for n = 1")
        m, N = self.grid.m_pts, self.ctx.N
        ms = np.asarray(mats, dtype=complex)
        batch = ms.shape[:-2]
        M = ms.reshape(-1, N, N)
        c = INVERSION_CONSTANT**self.ctx.n * self.lam**self.ctx.n
        if self._phi is not None:
            out = np.tensordot(M, self._phi.conj(), axes=([1, 2], [2, 3])) * c
            out = out.reshape(*batch, m, m)
        else:
            out = np.zeros((M.shape[0], m, m), dtype=complex)
            for iy, y in enumerate(self.grid.axis):
                blk = self._phi_block(y).conj()  # (m, N, N)
                out[:, :, iy] = np.tensordot(M, blk, axes=([1, 2], [1, 2])) * c
            out = out.reshape(*batch, m, m)
        return out

    def unitarity_defect(self, z: Sequence[float], margin: float = 3.0) -> tuple[float, int]:
        """Max-abs defect of Phi(z)* Phi(z) - I on truncation-safe levels.

        Levels b qualify when the phase-space reach sqrt(2b+1) + sqrt(lam)|z|
        + margin stays below the truncation radius sqrt(2(N-1)+1); returns
        (defect, number of interior levels).
        """
        ctx = self.ctx
        z = np.asarray(z, dtype=float)
        r = math.sqrt(float(np.sum(z**2)))
        reach = math.sqrt(2 * (ctx.N - 1) + 1) - math.sqrt(self.lam) * r - margin
        if reach <= 1.0:
            return math.nan, 0
        n_int = min(ctx.N, int((reach**2 - 1) // 2) + 1)
        p = self.point_matrix(z)
        g = p.conj().T @ p
        block = g[:n_int, :n_int] - np.eye(n_int)
        return float(np.max(np.abs(block))), n_int


_ENGINES: dict[tuple[str, str, float], WeylEngine] = {}


def get_engine(ctx: HermiteContext, grid: GridSpec, lam: float = 1.0) -> WeylEngine:
    key = (ctx.cache_key, grid.cache_key, float(lam))
    eng = _ENGINES.get(key)
    if eng is None:
        eng = WeylEngine(ctx, grid, lam)
        _ENGINES[key] = eng
    return eng


def clear_engines() -> None:
    _ENGINES.clear()


def _reserve_cache_bytes(requester: WeylEngine, nbytes: int) -> None:
    """Evict least-recently created caches until the budget accommodates nbytes."""
    if nbytes > CACHE_BUDGET_BYTES:
        return  # never cached; caller streams
    used = sum(e.cache_bytes for e in _ENGINES.values() if e is not requester)
    if used + nbytes <= CACHE_BUDGET_BYTES:
        return
    for e in list(_ENGINES.values()):
        if e is requester or e.cache_bytes == 0:
            continue
        e.release_cache()
        used = sum(x.cache_bytes for x in _ENGINES.values() if x is not requester)
        if used + nbytes <= CACHE_BUDGET_BYTES:
            return


# ---------------------------------------------------------------------------
# Module-level operations (lam = 1 surface)


def weyl_point_matrix(ctx: HermiteContext, z: Sequence[float], grid: GridSpec | None = None) -> np.ndarray:
    """Matrix of W(z) in the truncated basis; y must sit on the xi lattice."""
    eng = get_engine(ctx, grid) if grid is not None else WeylEngine(ctx, GridSpec(ctx.n, ctx.L_xi, ctx.points))
    return eng.point_matrix(z)


def weyl_transform(ctx: HermiteContext, f: PhaseGridFunction) -> OperatorMatrix:
    """W(f) = sum_z f(z) Phi(z) h^{2n}; warns when f leans on the box edge."""
    bm = f.boundary_mass_fraction()
    if bm > 0.01:
        warnings.warn(
            f"input carries {bm:.1%} of its squared mass within one cell of the box "
            "boundary; the Riemann sum treats the outside as zero",
            BoundaryMassWarning,
            stacklevel=2,
        )
    eng = get_engine(ctx, f.grid)
    return OperatorMatrix(ctx, eng.transform(f.values))


def inverse_weyl(ctx: HermiteContext, m: OperatorMatrix, grid: GridSpec) -> PhaseGridFunction:
    """k(z) = (2 pi)^{-n} tr(Phi(z)* m): the kernel whose transform is m."""
    eng = get_engine(ctx, grid)
    return PhaseGridFunction(grid, eng.inverse(m.entries))


def apply_multiplier(ctx: HermiteContext, m: OperatorMatrix, f: PhaseGridFunction) -> PhaseGridFunction:
    """T_m f = inverse(m @ transform(f)): the (left) Weyl multiplier."""
    eng = get_engine(ctx, f.grid)
    w = eng.transform(f.values)
    return PhaseGridFunction(f.grid, eng.inverse(m.entries @ w))


def apply_right_multiplier(ctx: HermiteContext, m: OperatorMatrix, f: PhaseGridFunction) -> PhaseGridFunction:
    """Right-sided analogue: kernel of transform(f) @ m."""
    eng = get_engine(ctx, f.grid)
    w = eng.transform(f.values)
    return PhaseGridFunction(f.grid, eng.inverse(w @ m.entries))


# ---------------------------------------------------------------------------
# Twisted convolution


def twisted_convolve(f: PhaseGridFunction, g: PhaseGridFunction) -> PhaseGridFunction:
    """(f x g)(z) = sum_w f(z-w) g(w) exp(+(i/2) Im(z.conj(w))) h^{2n}.

    Direct O(G^4) summation; translates that leave the box count as zero.
    The result carries a boundary-mass diagnostic.
    """
    if f.grid != g.grid:
        raise GridMismatchError("twisted convolution needs a common grid")
    grid = f.grid
    if grid.n != 1:
        raise NotImplementedError("twisted convolution implemented for n = 1")
    m = grid.m_pts
    ax = grid.axis
    fv, gv = f.values, g.values
    # Im(z.conj(w)) = y*u - x*v for z = x+iy, w = u+iv: the phase splits into
    # a rank-one factor exp(i/2 y u) exp(-i/2 x v) per shift cell (u, v).
    py = np.exp(0.5j * np.outer(ax, ax))  # [iy, iu]
    px = np.exp(-0.5j * np.outer(ax, ax))  # [ix, iv]
    out = np.zeros((m, m), dtype=complex)
    gmax = np.abs(gv).max()
    if gmax > 0.0:
        for iu in range(m):
            grow = gv[iu]
            if np.abs(grow).max() <= 1e-300:
                continue
            pyu = py[:, iu]
            # f index along x is ix - iu + m/2, clipped to [0, m)
            dst_x = slice(max(0, iu - m // 2), min(m, iu + m // 2))
            src_x = slice(dst_x.start - iu + m // 2, dst_x.stop - iu + m // 2)
            for iv in range(m):
                gc = grow[iv]
                if gc == 0.0:
                    continue
                dst_y = slice(max(0, iv - m // 2), min(m, iv + m // 2))
                src_y = slice(dst_y.start - iv + m // 2, dst_y.stop - iv + m // 2)
                out[dst_x, dst_y] += (
                    gc
                    * fv[src_x, src_y]
                    * px[dst_x, iv][:, None]
                    * pyu[dst_y][None, :]
                )
    out *= grid.cell_volume
    return PhaseGridFunction(grid, out).with_boundary_diagnostic()


# ---------------------------------------------------------------------------
# Special Hermite functions and band-limited synthesis


def special_hermite_fn(
    ctx: HermiteContext,
    alpha: int | Sequence[int],
    beta: int | Sequence[int],
    grid: GridSpec,
) -> PhaseGridFunction:
    """Matrix-element function Phi_ab(z) = (2 pi)^{-n/2} <W(z) h_a, h_b>.

    Unit L2 norm; the transform of its conjugate is the rank-one operator
    (2 pi)^{n/2} |h_b><h_a| (phi -> (2 pi)^{n/2} (phi, h_a) h_b).
    """
    a = (alpha,) if isinstance(alpha, int) else tuple(alpha)
    b = (beta,) if isinstance(beta, int) else tuple(beta)
    fa, fb = ctx.flat_index(a), ctx.flat_index(b)
    eng = get_engine(ctx, grid)
    if ctx.n == 1:
        vals = eng.phi[:, :, fb, fa] * SPECIAL_HERMITE_NORMALIZER**ctx.n
        return PhaseGridFunction(grid, vals)
    raise NotImplementedError("special Hermite sampling implemented for n = 1")


def special_hermite_panel(
    ctx: HermiteContext, band: int, grid: GridSpec
) -> dict[tuple[int, int], PhaseGridFunction]:
    """All Phi_ab with a, b <= band (n = 1), extracted from the cache."""
    eng = get_engine(ctx, grid)
    out = {}
    for a in range(band + 1):
        for b in range(band + 1):
            vals = eng.phi[:, :, b, a] * SPECIAL_HERMITE_NORMALIZER
            out[(a, b)] = PhaseGridFunction(grid, vals)
    return out


def band_limited_matrix(ctx: HermiteContext, band: int, rng: np.random.Generator) -> np.ndarray:
    """Random complex matrix supported on levels |alpha|, |beta| <= band."""
    mask = ctx.levels <= band
    M = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    k = int(mask.sum())
    blk = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    M[np.ix_(mask, mask)] = blk
    return M


def random_band_limited(
    ctx: HermiteContext,
    grid: GridSpec,
    band: int,
    count: int,
    seed: int,
    normalize: bool = True,
    lam: float = 1.0,
) -> list[PhaseGridFunction]:
    """Random unit-norm combinations of scale-lam matrix elements, levels <= band.

    Synthesised through the inverse transform of random block matrices, so
    the band limit is exact by construction.  For lam != 1 pass a context
    whose truncation the grid resolves at that scale (max_resolved_level).
    """
    rng = np.random.default_rng(seed)
    eng = get_engine(ctx, grid, lam)
    mats = np.stack([band_limited_matrix(ctx, band, rng) for _ in range(count)])
    vals = eng.inverse(mats)
    out = []
    for v in vals:
        f = PhaseGridFunction(grid, v)
        if normalize:
            nrm = f.l2_norm()
            if nrm > 0:
                f = (1.0 / nrm) * f
        out.append(f)
    return out


# ---------------------------------------------------------------------------
# Dilation, twist modulation, rotation, polyradial averaging


def dilate(f: PhaseGridFunction, r: float, allow_interpolation: bool = False) -> PhaseGridFunction:
    """(delta_r f)(z) = f(r z).

    Exact when r is a positive integer (index subsampling with zero fill
    outside the box); otherwise requires the trigonometric resampler.
    """
    if r <= 0:
        raise DomainError("dilation factor must be positive")
    if abs(r - round(r)) < 1e-12:
        ri = int(round(r))
        if ri == 1:
            return f
        grid = f.grid
        m = grid.m_pts
        idx = np.arange(m)
        src = ri * idx - (ri - 1) * (m // 2)
        ok = (src >= 0) & (src < m)
        out = np.zeros(grid.shape, dtype=complex)
        sel = tuple(np.ix_(*([src[ok]] * (2 * grid.n))))
        dst = tuple(np.ix_(*([idx[ok]] * (2 * grid.n))))
        out[dst] = f.values[sel]
        return PhaseGridFunction(grid, out)
    if not allow_interpolation:
        raise ResampleError(f"dilation by r={r} is off-lattice; enable interpolation")
    return smooth_dilate(f, r)


def smooth_dilate(f: PhaseGridFunction, r: float) -> PhaseGridFunction:
    """Band-limited evaluation of z -> f(r z) via per-axis Fourier series.

    Treats f as its trigonometric interpolant on the periodic box and
    evaluates it at the scaled coordinates; accurate to aliasing level for
    smooth, decaying samples.
    """
    grid = f.grid
    m, h = grid.m_pts, grid.h_z
    freqs = 2.0 * np.pi * np.fft.fftfreq(m, d=h)
    # interpolant F(c) = (1/m) sum_k fhat_k exp(i w_k (c + L)); evaluate at r*c.
    E = np.exp(1j * np.outer(r * grid.axis + grid.L_z, freqs)) / m
    out = f.values
    for ax in range(out.ndim):
        spec = np.fft.fft(np.moveaxis(out, ax, -1), axis=-1)
        out = np.moveaxis(spec @ E.T, -1, ax)
    return PhaseGridFunction(grid, out)


def rescale_box(f: PhaseGridFunction, s: float) -> PhaseGridFunction:
    """Exact representation of z -> f(z / s) on the grid scaled by s.

    The sample values are unchanged; only the box half-width is multiplied
    by s. Used for the lambda-scaling conjugation where s is a power of 2.
    """
    if s <= 0:
        raise DomainError("box scale must be positive")
    g = GridSpec(f.grid.n, f.grid.L_z * s, f.grid.m_pts)
    return PhaseGridFunction(g, f.values)


def twist_modulate(f: PhaseGridFunction, lam: float) -> PhaseGridFunction:
    """(e_lam f)(x, y) = exp((i/2) lam x.y) f(x, y)."""
    grid = f.grid
    ax = grid.axis
    dot = np.zeros(grid.shape)
    for j in range(grid.n):
        shx = [1] * (2 * grid.n)
        shx[j] = grid.m_pts
        shy = [1] * (2 * grid.n)
        shy[grid.n + j] = grid.m_pts
        dot = dot + ax.reshape(shx) * ax.reshape(shy)
    return PhaseGridFunction(grid, np.exp(0.5j * lam * dot) * f.values)


def rotate(f: PhaseGridFunction, theta: float) -> PhaseGridFunction:
    """g(z) = f(e^{i theta} z) by quarter-turns plus a three-shear FFT rotation.

    Quarter-turns are exact index maps on the vertex lattice; the residual
    rotation (|theta'| <= pi/4) runs on a zero-padded double box so the
    shear intermediates cannot wrap around the boundary.
    """
    grid = f.grid
    if grid.n != 1:
        raise NotImplementedError("rotation implemented for n = 1")
    m = grid.m_pts
    vals = f.values
    # reduce to |theta'| <= pi/4 with exact quarter turns
    k = int(np.round(theta / (np.pi / 2)))
    theta_p = theta - k * (np.pi / 2)
    neg = (m - np.arange(m)) % m
    for _ in range(k % 4):
        # g(x, y) = f(i*(x+iy)) = f(-y, x), i.e. g[ix, iy] = f[neg[iy], ix]
        vals = vals[neg, :].T
    if abs(theta_p) > 1e-15:
        pad = m // 2
        big = np.zeros((2 * m, 2 * m), dtype=complex)
        big[pad : pad + m, pad : pad + m] = vals
        big = _shear_rotate(big, theta_p, GridSpec(1, 2 * grid.L_z, 2 * m))
        vals = big[pad : pad + m, pad : pad + m]
    return PhaseGridFunction(grid, vals)


def _axis_shear(vals: np.ndarray, a: float, grid: GridSpec, axis: int) -> np.ndarray:
    """g = f(x + a*other, ...) along ``axis`` via FFT phase ramps (periodic)."""
    m, h = grid.m_pts, grid.h_z
    freqs = 2.0 * np.pi * np.fft.fftfreq(m, d=h)
    coords = grid.axis
    spec = np.fft.fft(vals, axis=axis)
    if axis == 0:
        ramp = np.exp(1j * np.outer(freqs, a * coords))  # [k, y]
        spec = spec * ramp
    else:
        ramp = np.exp(1j * np.outer(a * coords, freqs))  # [x, k]
        spec = spec * ramp
    return np.fft.ifft(spec, axis=axis)


def _shear_rotate(vals: np.ndarray, theta: float, grid: GridSpec) -> np.ndarray:
    """f(R_theta z) for |theta| <= pi/4 via the three-shear factorisation."""
    t = math.tan(theta / 2.0)
    s = math.sin(theta)
    out = _axis_shear(vals, -t, grid, axis=0)
    out = _axis_shear(out, s, grid, axis=1)
    out = _axis_shear(out, -t, grid, axis=0)
    return out


def taper_window(grid: GridSpec, inner: float = 0.6, outer: float = 0.95) -> PhaseGridFunction:
    """Smooth compactly supported radial bump: 1 for |z| <= inner*L, 0 beyond outer*L.

    Multiplying by this window makes samples exactly zero near the box
    boundary, so FFT-based resampling (rotation, trigonometric dilation)
    sees a genuinely periodic function.
    """
    if not 0 < inner < outer <= 1.0:
        raise DomainError("need 0 < inner < outer <= 1")
    r0, r1 = inner * grid.L_z, outer * grid.L_z
    az = grid.abs_z_mesh()
    s = np.clip((az - r0) / (r1 - r0), 0.0, 1.0)
    w = np.zeros(grid.shape)
    core = s <= 0.0
    mid = (s > 0.0) & (s < 1.0)
    w[core] = 1.0
    w[mid] = np.exp(1.0 - 1.0 / (1.0 - s[mid] ** 2))
    return PhaseGridFunction(grid, w.astype(complex))


def max_resolved_level(ctx: HermiteContext, grid: GridSpec, lam: float = 1.0) -> int:
    """Largest basis level whose lam-scaled matrix elements the grids resolve.

    Level-K elements oscillate at wavenumber ~ sqrt(lam (2K+1)) on the
    z-grid, and their basis products at twice that on the xi-grid; both are
    kept below Nyquist with a 10 percent margin.
    """
    kz = 0.9 * math.pi / (grid.h_z * math.sqrt(lam))
    kxi = 0.9 * math.pi / (ctx.h_xi * 2.0 * math.sqrt(lam))
    kmax = min(kz, kxi)
    return max(0, min(ctx.N - 1, int((kmax**2 - 1) // 2)))


def polyradial_project(f: PhaseGridFunction, n_angles: int = 64) -> PhaseGridFunction:
    """Average of f over the circle action z -> e^{i theta} z (n = 1).

    Uniform angular quadrature with n_angles rotations; idempotent and an
    L^p contraction up to interpolation error.
    """
    if f.grid.n != 1:
        raise NotImplementedError("polyradial averaging implemented for n = 1")
    if n_angles < 4:
        raise DomainError("need at least 4 angles")
    acc = np.zeros(f.grid.shape, dtype=complex)
    for q in range(n_angles):
        acc += rotate(f, 2.0 * np.pi * q / n_angles).values
    return PhaseGridFunction(f.grid, acc / n_angles)
