"""Central-variable fibers and the per-fiber multiplier pipeline.

A function f(z, t) on the box times [-L_t, L_t) decomposes into fibers
f^lam(z) = sum_t exp(i lam t) f(z, t) dt over the frequency lattice
lam = k pi / L_t.  A multiplier family acts fiberwise: the fiber at lam
is conjugated to scale 1 through the exact box rescaling by sqrt(lam)
(whitelisted lam = 4^k lam0 make that a power of two), the scale-1 Weyl
multiplier with the family matrix is applied, and the box is scaled back.
Negative lam goes through entrywise conjugation:

    T^{-lam}_m f = conj( T^{lam}_{conj m} conj(f) ),   lam > 0,

and the zero-frequency fiber, which carries no representation, passes
through unchanged with a warning.

All vector-field identities below are stated in the numerically validated
form (constants -i/2 and i; the scale-1 left-invariant fields pair with
LEFT operator factors):

    W(Z f)      = -(i/2) A*(lam) W(f)        Z     = d/dz  - (lam/4) conj(z)
    W(Zbar f)   = -(i/2) A(lam)  W(f)        Zbar  = d/dzb + (lam/4) z
    W(Z^R f)    = -(i/2) W(f) A*(lam)        Z^R   = d/dz  + (lam/4) conj(z)
    W(Zbar^R f) = -(i/2) W(f) A(lam)         Zbar^R= d/dzb - (lam/4) z
    lam W(z f)    = i [W(f), A(lam)]
    lam W(zbar f) = i [A*(lam), W(f)]

and the twisted Laplacian built from the left-invariant pair satisfies
W(L f) = H(lam) W(f) (left factor; the right-factor residual is reported
alongside for reference).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    FiberExcludedWarning,
    GridError,
    ResampleError,
    ZeroNormError,
)
from .hermite import (
    HermiteContext,
    OperatorMatrix,
    hermite_samples,
    scaled_operators,
    spectral_function,
)
from .rbound import MultiplierFamily
from .weyl import (
    GridSpec,
    PhaseGridFunction,
    WeylEngine,
    apply_multiplier,
    apply_right_multiplier,
    get_engine,
    polyradial_project,
    rescale_box,
    smooth_dilate,
)

__all__ = [
    "HeisenbergGridFunction",
    "FiberSet",
    "fiber_transform",
    "fiber_inverse",
    "is_whitelisted",
    "apply_fiber_multiplier",
    "apply_fiber_sublaplacian_power",
    "fiber_polyradial",
    "apply_weyl_multiplier_scaled",
    "vector_field_checks",
    "lemma41_check",
    "theorem19_experiment",
    "theorem110_experiment",
    "make_fiber_panel",
]


@dataclass(frozen=True)
class HeisenbergGridFunction:
    """Samples f(z, t): z on a GridSpec box, t uniform over [-L_t, L_t)."""

    grid: GridSpec
    L_t: float
    t_pts: int
    values: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if self.t_pts & (self.t_pts - 1):
            raise GridError("t_pts must be a power of two")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape + (self.t_pts,):
            raise GridError(
                f"values shape {v.shape} != {self.grid.shape + (self.t_pts,)}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return 2.0 * self.L_t / self.t_pts

    @property
    def t_axis(self) -> np.ndarray:
        return -self.L_t + self.dt * np.arange(self.t_pts)

    def lp_norm(self, p: float) -> float:
        if p == math.inf:
            return float(np.max(np.abs(self.values)))
        w = self.grid.cell_volume * self.dt
        return float((np.sum(np.abs(self.values) ** p) * w) ** (1.0 / p))

    def _like(self, values: np.ndarray) -> "HeisenbergGridFunction":
        return HeisenbergGridFunction(self.grid, self.L_t, self.t_pts, values)

    def __add__(self, other):
        return self._like(self.values + other.values)

    def __sub__(self, other):
        return self._like(self.values - other.values)

    def __mul__(self, c):
        return self._like(np.asarray(c) * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class FiberSet:
    """Fibers f^lam keyed by the lattice frequency; zero fiber kept apart."""

    grid: GridSpec
    L_t: float
    t_pts: int
    fibers: dict = field(repr=False)
    zero_fiber: PhaseGridFunction = field(repr=False, default=None)

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(sorted(self.fibers.keys()))

    @property
    def lam0(self) -> float:
        return math.pi / self.L_t

    def amplitude(self) -> float:
        tops = [float(np.max(np.abs(g.values))) for g in self.fibers.values()]
        if self.zero_fiber is not None:
            tops.append(float(np.max(np.abs(self.zero_fiber.values))))
        return max(tops) if tops else 0.0

    def active_lambdas(self, rel_tol: float = 1e-13) -> tuple[float, ...]:
        """Frequencies whose fibers carry mass above rel_tol of the set amplitude."""
        top = self.amplitude()
        if top == 0.0:
            return ()
        return tuple(
            sorted(
                lam
                for lam, g in self.fibers.items()
                if float(np.max(np.abs(g.values))) > rel_tol * top
            )
        )

    def map(self, fn: Callable[[float, PhaseGridFunction], PhaseGridFunction]) -> "FiberSet":
        """Apply fn on the active fibers; negligible fibers pass through untouched."""
        active = set(self.active_lambdas())
        out = {
            lam: fn(lam, g) if lam in active else g
            for lam, g in self.fibers.items()
        }
        return FiberSet(self.grid, self.L_t, self.t_pts, out, self.zero_fiber)


def fiber_transform(f: HeisenbergGridFunction) -> FiberSet:
    """f^lam(z) = sum_t exp(i lam t) f(z, t) dt over the frequency lattice."""
    T = f.t_pts
    ks = np.fft.fftfreq(T, d=1.0 / T).astype(int)  # 0, 1, .., -T/2, .., -1
    spec = T * np.fft.ifft(f.values, axis=-1)  # sum_j f_j exp(+2 pi i j k / T)
    spec = spec * ((-1.0) ** ks) * f.dt
    lam0 = math.pi / f.L_t
    fibers = {}
    zero = None
    for idx, k in enumerate(ks):
        g = PhaseGridFunction(f.grid, spec[..., idx])
        if k == 0:
            zero = g
        else:
            fibers[k * lam0] = g
    return FiberSet(f.grid, f.L_t, f.t_pts, fibers, zero)


def fiber_inverse(fs: FiberSet) -> HeisenbergGridFunction:
    """f(z, t) = (2 pi)^{-1} sum_lam exp(-i lam t) f^lam(z) dlam."""
    T = fs.t_pts
    ks = np.fft.fftfreq(T, d=1.0 / T).astype(int)
    lam0 = fs.lam0
    stack = np.zeros(fs.grid.shape + (T,), dtype=complex)
    for idx, k in enumerate(ks):
        if k == 0:
            if fs.zero_fiber is not None:
                stack[..., idx] = fs.zero_fiber.values
        else:
            g = fs.fibers.get(k * lam0)
            if g is not None:
                stack[..., idx] = g.values
    stack = stack * ((-1.0) ** ks)
    vals = np.fft.fft(stack, axis=-1) * (lam0 / (2.0 * math.pi))
    return HeisenbergGridFunction(fs.grid, fs.L_t, fs.t_pts, vals)


def is_whitelisted(lam: float, lam0: float) -> bool:
    """|lam| = 4^k lam0 for integer k >= 0: sqrt makes an exact box power of 2."""
    if lam == 0:
        return False
    q = abs(lam) / lam0
    if q < 1.0 - 1e-9:
        return False
    k = math.log(q, 4.0)
    return abs(k - round(k)) < 1e-9


def _resolved_mask(ctx: HermiteContext, grid: GridSpec, m: OperatorMatrix) -> OperatorMatrix:
    """Restrict a multiplier to the level block the grid's transform resolves.

    Matrix elements above max_resolved_level oscillate beyond the grid
    Nyquist rate and the Riemann-sum transform aliases them back into the
    band; zeroing those rows and columns keeps the conjugated application
    inside the trustworthy calculus.
    """
    from .weyl import max_resolved_level

    K = max_resolved_level(ctx, grid, 1.0)
    if K >= ctx.N - 1:
        return m
    keep = ctx.levels <= K
    e = m.entries.copy()
    e[~keep, :] = 0.0
    e[:, ~keep] = 0.0
    return OperatorMatrix(ctx, e, m.margin)


def apply_weyl_multiplier_scaled(
    ctx: HermiteContext,
    m: OperatorMatrix,
    f: PhaseGridFunction,
    lam: float,
    allow_interpolation: bool = False,
    side: str = "left",
) -> PhaseGridFunction:
    """T^lam_m f through the scale conjugation (m in the lam-scaled basis).

    For lam > 0 with sqrt(lam) a power of two the dilations are exact box
    rescalings; other scales require the trigonometric resampler.  Negative
    lam is handled by the conjugation rule (module docstring).  The
    multiplier is restricted to the level block resolved by the working
    grid, so fibers should be synthesised band-limited at their own scale.
    """
    if lam == 0:
        raise DomainError("lam = 0 carries no representation")
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    if lam < 0:
        out = apply_weyl_multiplier_scaled(
            ctx, m.conj(), f.conj(), -lam, allow_interpolation, side
        )
        return out.conj()
    apply = apply_multiplier if side == "left" else apply_right_multiplier
    s = math.sqrt(lam)
    k = math.log2(s) if s > 0 else 0.0
    if abs(k - round(k)) < 1e-9:
        g = rescale_box(f, s) if s != 1.0 else f
        g = apply(ctx, _resolved_mask(ctx, g.grid, m), g)
        return rescale_box(g, 1.0 / s) if s != 1.0 else g
    if not allow_interpolation:
        raise ResampleError(
            f"sqrt(lam)={s} is not a power of two; enable interpolation"
        )
    g = smooth_dilate(f, 1.0 / s)
    g = apply(ctx, _resolved_mask(ctx, g.grid, m), g)
    return smooth_dilate(g, s)


def apply_fiber_multiplier(
    ctx: HermiteContext,
    family: MultiplierFamily,
    fs: FiberSet,
    allow_interpolation: bool = False,
    on_off_whitelist: str = "raise",
) -> FiberSet:
    """Apply the family fiberwise.

    Fibers that vanish identically are passed through untouched (every
    multiplier annihilates them).  The zero-frequency fiber, if it carries
    mass, passes through with a warning.  Active fibers off the 4^k lam0
    whitelist either raise, or with on_off_whitelist="drop" are zeroed and
    reported through a FiberExcludedWarning.
    """
    if on_off_whitelist not in ("raise", "drop"):
        raise DomainError("on_off_whitelist must be 'raise' or 'drop'")
    lam0 = fs.lam0
    if fs.zero_fiber is not None and np.any(np.abs(fs.zero_fiber.values) > 1e-14):
        warnings.warn(
            "zero-frequency fiber passes through the multiplier unchanged",
            FiberExcludedWarning,
            stacklevel=2,
        )
    active = set(fs.active_lambdas())
    out = {}
    dropped = []
    for lam, g in fs.fibers.items():
        if lam not in active:
            out[lam] = g
            continue
        if not is_whitelisted(lam, lam0) and not allow_interpolation:
            if on_off_whitelist == "drop":
                dropped.append(lam)
                out[lam] = 0.0 * g
                continue
            raise ResampleError(
                f"fiber lam={lam} off the 4^k lam0 whitelist; enable interpolation"
            )
        out[lam] = apply_weyl_multiplier_scaled(
            ctx, family.matrix(lam), g, lam, allow_interpolation
        )
    if dropped:
        warnings.warn(
            f"dropped off-whitelist fibers at lam = {sorted(dropped)}",
            FiberExcludedWarning,
            stacklevel=2,
        )
    return FiberSet(fs.grid, fs.L_t, fs.t_pts, out, fs.zero_fiber)


def apply_fiber_sublaplacian_power(
    ctx: HermiteContext, fs: FiberSet, power: float = 0.5
) -> FiberSet:
    """Fiberwise W(f) -> W(f) H(lam)^power (the central-operator calculus)."""

    def one(lam: float, g: PhaseGridFunction) -> PhaseGridFunction:
        mat = spectral_function(ctx, lambda t: (abs(lam) * t) ** power)
        return apply_weyl_multiplier_scaled(ctx, mat, g, lam, side="right")

    return fs.map(one)


def fiber_polyradial(fs: FiberSet, n_angles: int = 64) -> FiberSet:
    out = fs.map(lambda lam, g: polyradial_project(g, n_angles))
    zero = (
        polyradial_project(fs.zero_fiber, n_angles)
        if fs.zero_fiber is not None
        else None
    )
    return FiberSet(fs.grid, fs.L_t, fs.t_pts, out.fibers, zero)


# ---------------------------------------------------------------------------
# Vector-field identities


def _axis_derivative(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Centered second-order difference, one-sided at the boundary."""
    h = grid.h_z
    out = np.empty_like(values)
    sl = [slice(None)] * values.ndim

    def at(i):
        s = sl.copy()
        s[axis] = i
        return tuple(s)

    out[at(slice(1, -1))] = (values[at(slice(2, None))] - values[at(slice(0, -2))]) / (2 * h)
    out[at(0)] = (values[at(1)] - values[at(0)]) / h
    out[at(-1)] = (values[at(-1)] - values[at(-2)]) / h
    return out


def vector_field_checks(
    ctx: HermiteContext, lam: float, f: PhaseGridFunction, ctx_direct: HermiteContext | None = None
) -> dict:
    """Residual table of the six vector-field identities plus the twisted Laplacian.

    Derivatives are centered grid differences (the residuals are dominated
    by their O(h^2) error).  The transform at scale lam uses the direct
    lam-engine over ``ctx_direct`` (a truncation small enough for the grid
    to resolve; defaults to ctx), so the identities are checked without the
    conjugation machinery.
    """
    if lam <= 0:
        raise DomainError("checks run at lam > 0")
    cd = ctx_direct or ctx
    grid = f.grid
    eng = WeylEngine(cd, grid, lam=lam)
    x, y = grid.xy_meshes()
    zc = x + 1j * y
    v = f.values
    fx = _axis_derivative(v, grid, 0)
    fy = _axis_derivative(v, grid, 1)
    dz = 0.5 * (fx - 1j * fy)
    dzb = 0.5 * (fx + 1j * fy)

    fields = {
        "Z": dz - 0.25 * lam * np.conj(zc) * v,
        "Zbar": dzb + 0.25 * lam * zc * v,
        "ZR": dz + 0.25 * lam * np.conj(zc) * v,
        "ZbarR": dzb - 0.25 * lam * zc * v,
    }
    W = eng.transform(v)
    ops = scaled_operators(cd, lam)
    A, Ad = ops.annihilation[0].entries, ops.creation[0].entries
    H = ops.hermite.entries
    rhs = {
        "Z": -0.5j * (Ad @ W),
        "Zbar": -0.5j * (A @ W),
        "ZR": -0.5j * (W @ Ad),
        "ZbarR": -0.5j * (W @ A),
    }
    out = {}
    for name, fld in fields.items():
        lhs = eng.transform(fld)
        out[name] = float(np.linalg.norm(lhs - rhs[name]) / np.linalg.norm(rhs[name]))
    # coordinate multiplication pair
    lhs_z = lam * eng.transform(zc * v)
    rhs_z = 1j * (W @ A - A @ W)
    out["z_mult"] = float(np.linalg.norm(lhs_z - rhs_z) / np.linalg.norm(rhs_z))
    lhs_zb = lam * eng.transform(np.conj(zc) * v)
    rhs_zb = 1j * (Ad @ W - W @ Ad)
    out["zbar_mult"] = float(np.linalg.norm(lhs_zb - rhs_zb) / np.linalg.norm(rhs_zb))
    # twisted Laplacian from the left-invariant pair
    def apply_Z(u):
        ux = _axis_derivative(u, grid, 0)
        uy = _axis_derivative(u, grid, 1)
        return 0.5 * (ux - 1j * uy) - 0.25 * lam * np.conj(zc) * u

    def apply_Zb(u):
        ux = _axis_derivative(u, grid, 0)
        uy = _axis_derivative(u, grid, 1)
        return 0.5 * (ux + 1j * uy) + 0.25 * lam * zc * u

    Lf = -2.0 * (apply_Z(apply_Zb(v)) + apply_Zb(apply_Z(v)))
    WL = eng.transform(Lf)
    out["sublaplacian_left"] = float(np.linalg.norm(WL - H @ W) / np.linalg.norm(H @ W))
    out["sublaplacian_right"] = float(np.linalg.norm(WL - W @ H) / np.linalg.norm(W @ H))
    out["sublaplacian"] = min(out["sublaplacian_left"], out["sublaplacian_right"])
    return out


# ---------------------------------------------------------------------------
# One-dimensional convolution multipliers


def lemma41_check(
    ctx: HermiteContext,
    kernel: Callable[[np.ndarray], np.ndarray],
    lam: float,
    f: PhaseGridFunction,
    ctx_direct: HermiteContext | None = None,
) -> dict:
    """Two routes to the fiber action of a 1-D convolution multiplier.

    Route A builds the convolution operator S(lam) phi(xi) =
    int k(xi - eta) phi(eta) d eta as a matrix over the lam-scaled basis by
    quadrature and applies it through the fiber machinery; route B applies
    the explicit form: twist-modulate, convolve along y, untwist.
    """
    if lam <= 0:
        raise DomainError("check runs at lam > 0")
    cd = ctx_direct or ctx
    grid = f.grid
    xi = cd.xi_grid
    diffs = xi[:, None] - xi[None, :]
    K = kernel(diffs)
    s = math.sqrt(lam)
    samples = lam**0.25 * hermite_samples(s * xi, cd.N)
    M = OperatorMatrix(cd, cd.h_xi**2 * (samples @ K @ samples.T))
    eng = WeylEngine(cd, grid, lam=lam)
    WA = eng.inverse(M.entries @ eng.transform(f.values))
    # route B: e_lam S_2 e_{-lam}
    ax = grid.axis
    x, y = grid.xy_meshes()
    tw = np.exp(0.5j * lam * x * y)
    g = f.values * np.conj(tw)
    ky = kernel(ax)  # kernel sampled on the y-lattice
    m = grid.m_pts
    conv = np.zeros_like(g)
    for jj, kv in enumerate(ky):
        if kv == 0.0:
            continue
        off = jj - m // 2  # eta = ax[jj]: f(x, y + eta) shifts y by off cells
        dst = slice(max(0, -off), min(m, m - off))
        src = slice(max(0, off), min(m, m + off))
        conv[:, dst] += kv * g[:, src]
    conv *= grid.h_z
    WB = tw * conv
    rel = float(np.linalg.norm(WA - WB) / max(np.linalg.norm(WB), 1e-300))
    return {"residual": rel, "route_a": WA, "route_b": WB}


# ---------------------------------------------------------------------------
# Multiplier-transform experiments


def make_fiber_panel(
    grid: GridSpec,
    L_t: float,
    t_pts: int,
    fiber_specs: Sequence[tuple[float, HermiteContext, int]],
    count: int,
    seed: int,
    taper: PhaseGridFunction | None = None,
) -> list[HeisenbergGridFunction]:
    """Random panel with active fibers exactly at the requested frequencies.

    Each spec (lam, ctx_synth, band) synthesises the lam fiber as a random
    band-limited combination of the lam-SCALED matrix elements over
    ctx_synth, so the scale conjugation later sees exactly band-limited
    content (pick ctx_synth.N at most max_resolved_level for that lam).
    """
    from .weyl import random_band_limited

    out = []
    t = -L_t + (2 * L_t / t_pts) * np.arange(t_pts)
    for i in range(count):
        vals = np.zeros(grid.shape + (t_pts,), dtype=complex)
        for k, (lam, ctx_synth, band) in enumerate(fiber_specs):
            g = random_band_limited(
                ctx_synth, grid, band, 1, seed + 1000 * i + 37 * k, lam=abs(lam)
            )[0]
            gv = (g * taper).values if taper is not None else g.values
            vals += gv[..., None] * np.exp(-1j * lam * t)
        out.append(HeisenbergGridFunction(grid, L_t, t_pts, vals))
    return out


def _pipeline(ctx, family, f, allow_interpolation=False):
    fs = fiber_transform(f)
    ts = apply_fiber_multiplier(ctx, family, fs, allow_interpolation)
    return fiber_inverse(ts)


def theorem19_experiment(
    ctx: HermiteContext,
    family: MultiplierFamily,
    f_panel: Sequence[HeisenbergGridFunction],
    p: float,
) -> dict:
    """Per-function ratios ||T_m f||_p / ||L^{1/2} f||_p."""
    rows = []
    for f in f_panel:
        fs = fiber_transform(f)
        tm = fiber_inverse(apply_fiber_multiplier(ctx, family, fs))
        lh = fiber_inverse(apply_fiber_sublaplacian_power(ctx, fs, 0.5))
        den = lh.lp_norm(p)
        if den == 0.0:
            raise ZeroNormError("panel function annihilated by the half sublaplacian")
        rows.append({"num": tm.lp_norm(p), "den": den, "ratio": tm.lp_norm(p) / den})
    return {"p": p, "rows": rows, "max_ratio": max(r["ratio"] for r in rows)}


def theorem110_experiment(
    ctx: HermiteContext,
    family: MultiplierFamily,
    f_panel: Sequence[HeisenbergGridFunction],
    p: float,
    n_angles: int = 64,
) -> dict:
    """Per-function ratios ||R T_m R f||_p / ||f||_p with fiberwise averaging."""
    rows = []
    for f in f_panel:
        den = f.lp_norm(p)
        if den == 0.0:
            raise ZeroNormError("zero panel function")
        fs = fiber_polyradial(fiber_transform(f), n_angles)
        ts = apply_fiber_multiplier(ctx, family, fs)
        out = fiber_inverse(fiber_polyradial(ts, n_angles))
        rows.append({"num": out.lp_norm(p), "den": den, "ratio": out.lp_norm(p) / den})
    return {"p": p, "rows": rows, "max_ratio": max(r["ratio"] for r in rows)}
