"""Rademacher-average boundedness estimation and multiplier families.

The estimator averages over sign patterns: exact enumeration of all 2^J
patterns for J <= 12, otherwise seeded sampling with per-pattern streams
(reproducible for a fixed seed regardless of evaluation order).  The
reported constant is a lower-bound statistic over the supplied tuples,
not a certified R-bound.

Multiplier families are stored as matrices in the lambda-scaled basis
(the matrix of m(lambda) in that basis equals the matrix of the conjugated
multiplier acting at scale 1, so scale-1 machinery applies verbatim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FDStepError, ModeError, ZeroNormError
from .hermite import (
    HermiteContext,
    OperatorMatrix,
    annihilation,
    creation,
    hermite_samples,
    identity,
    interior_residual,
    spectral_function,
)
from .derivations import delta, delta_bar
from .weyl import (
    GridSpec,
    PhaseGridFunction,
    SPECIAL_HERMITE_NORMALIZER,
    apply_multiplier,
    get_engine,
    smooth_dilate,
)

__all__ = [
    "MultiplierFamily",
    "riesz_family",
    "heat_family",
    "spectral_family",
    "RBoundReport",
    "rademacher_estimate",
    "xi_grad_matrix",
    "xi_grad_matrix_quadrature",
    "scale_derivative_terms",
    "prop42_identity",
    "counterexample_theorem16",
    "b_commutator_apply",
]


# ---------------------------------------------------------------------------
# Multiplier families


@dataclass(frozen=True)
class MultiplierFamily:
    """Sampled map lambda -> multiplier matrix (lambda-scaled basis)."""

    ctx: HermiteContext
    lambdas: tuple[float, ...]
    builder: Callable[[float], OperatorMatrix]
    dbuilder: Callable[[float], OperatorMatrix] | None = None
    tag: str = ""
    notes: str = ""

    def __post_init__(self):
        if any(lam == 0 for lam in self.lambdas):
            raise DomainError("family samples must avoid lambda = 0")
        object.__setattr__(self, "lambdas", tuple(sorted(self.lambdas)))

    def matrix(self, lam: float) -> OperatorMatrix:
        if lam == 0:
            raise DomainError("lambda = 0 has no fiber")
        return self.builder(lam)

    def derivative(self, lam: float, h_fd: float = 1e-3) -> OperatorMatrix:
        if self.dbuilder is not None:
            return self.dbuilder(lam)
        up, dn = self.builder(lam + h_fd), self.builder(lam - h_fd)
        return (1.0 / (2.0 * h_fd)) * (up - dn)


def riesz_family(ctx: HermiteContext, lam_grid: Sequence[float], j: int = 1) -> MultiplierFamily:
    """m(lambda) = A_j(lambda) H(lambda)^{-1/2}.

    In the scaled basis the matrix is A_j H^{-1/2} independently of lambda
    (the sqrt|lambda| factors cancel); nonzero entries sit on the first
    superdiagonal with values sqrt(2k) / sqrt(2k+n).
    """
    base = annihilation(ctx, j) @ spectral_function(ctx, lambda t: t**-0.5)
    zero = 0.0 * identity(ctx)
    return MultiplierFamily(
        ctx,
        tuple(lam_grid),
        builder=lambda lam: base,
        dbuilder=lambda lam: zero,
        tag="riesz",
        notes="matrix is lambda-independent in the scaled basis",
    )


def heat_family(ctx: HermiteContext, lam_grid: Sequence[float]) -> MultiplierFamily:
    """m(lambda) = exp(-H(lambda)): diagonal exp(-(2|a|+n)|lambda|)."""

    def build(lam: float) -> OperatorMatrix:
        return spectral_function(ctx, lambda t: np.exp(-abs(lam) * t))

    def dbuild(lam: float) -> OperatorMatrix:
        s = math.copysign(1.0, lam)
        return spectral_function(ctx, lambda t: -s * t * np.exp(-abs(lam) * t))

    return MultiplierFamily(ctx, tuple(lam_grid), build, dbuild, tag="heat")


def spectral_family(
    ctx: HermiteContext,
    phi: Callable[[np.ndarray], np.ndarray],
    lam_grid: Sequence[float],
    tag: str = "spectral",
) -> MultiplierFamily:
    """m(lambda) = phi(H(lambda)): diagonal phi((2|a|+n)|lambda|)."""

    def build(lam: float) -> OperatorMatrix:
        return spectral_function(ctx, lambda t: phi(abs(lam) * t))

    return MultiplierFamily(ctx, tuple(lam_grid), build, tag=tag)


# ---------------------------------------------------------------------------
# Rademacher estimator


@dataclass(frozen=True)
class RBoundReport:
    p: float
    n_members: int
    mode: str
    seed: int | None
    n_patterns: int
    tuple_ratios: tuple[float, ...]
    square_ratios: tuple[float, ...]
    constant: float
    square_constant: float
    provenance: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "n_members": self.n_members,
            "mode": self.mode,
            "seed": self.seed,
            "n_patterns": self.n_patterns,
            "tuple_ratios": list(self.tuple_ratios),
            "square_ratios": list(self.square_ratios),
            "constant": self.constant,
            "square_constant": self.square_constant,
            "provenance": list(self.provenance),
        }


def _sign_patterns(J: int, mode: str, seed: int | None, n_samples: int) -> np.ndarray:
    if mode == "exact":
        if J > 12:
            raise ModeError(f"exact enumeration limited to 12 members, got {J}")
        k = np.arange(2**J)
        return 1 - 2 * ((k[:, None] >> np.arange(J)[None, :]) & 1)
    if mode == "sampled":
        if n_samples < 512:
            raise ModeError("sampled mode needs at least 512 patterns")
        if seed is None:
            raise ModeError("sampled mode needs a seed")
        rows = []
        for i in range(n_samples):
            rng = np.random.default_rng([seed, i])
            rows.append(1 - 2 * rng.integers(0, 2, size=J))
        return np.array(rows)
    raise ModeError(f"unknown mode {mode!r}")


def rademacher_estimate(
    members: Sequence[Callable[[PhaseGridFunction], PhaseGridFunction]],
    f_tuples: Sequence[Sequence[PhaseGridFunction]],
    p: float,
    mode: str = "exact",
    seed: int | None = None,
    n_samples: int = 512,
    provenance: Sequence[str] | None = None,
) -> RBoundReport:
    """Sign-average ratio statistic over the supplied function tuples.

    For each tuple the ratio is the mean over sign patterns of
    ||sum_j eps_j T_j f_j||_p divided by the same mean without the
    operators; the square-function form is reported alongside.
    """
    J = len(members)
    if J < 1:
        raise DomainError("need at least one member")
    signs = _sign_patterns(J, mode, seed, n_samples)
    ratios, sq_ratios = [], []
    for tup in f_tuples:
        if len(tup) != J:
            raise DomainError(f"tuple length {len(tup)} != members {J}")
        imgs = [T(f) for T, f in zip(members, tup)]
        f_stack = np.stack([f.values for f in tup])
        t_stack = np.stack([g.values for g in imgs])
        grid = tup[0].grid
        w = grid.cell_volume

        def pnorm(v: np.ndarray) -> float:
            return float((np.sum(np.abs(v) ** p) * w) ** (1.0 / p))

        num = float(np.mean([pnorm(np.tensordot(s, t_stack, axes=1)) for s in signs]))
        den = float(np.mean([pnorm(np.tensordot(s, f_stack, axes=1)) for s in signs]))
        if den == 0.0:
            raise ZeroNormError("tuple has vanishing sign-averaged norm")
        ratios.append(num / den)
        sq_den = pnorm(np.sqrt(np.sum(np.abs(f_stack) ** 2, axis=0)))
        if sq_den == 0.0:
            raise ZeroNormError("tuple has vanishing square-function norm")
        sq_ratios.append(pnorm(np.sqrt(np.sum(np.abs(t_stack) ** 2, axis=0))) / sq_den)
    return RBoundReport(
        p=p,
        n_members=J,
        mode=mode,
        seed=seed,
        n_patterns=len(signs),
        tuple_ratios=tuple(ratios),
        square_ratios=tuple(sq_ratios),
        constant=max(ratios),
        square_constant=max(sq_ratios),
        provenance=tuple(provenance or ()),
    )


# ---------------------------------------------------------------------------
# The scale-derivative decomposition


def xi_grad_matrix(ctx: HermiteContext) -> OperatorMatrix:
    """Matrix of xi . grad = sum_j xi_j d/dxi_j via the ladder factorisation
    (A_j^2 - A_j*^2 + [A_j*, A_j]) / 4 summed over coordinates."""
    out = None
    for j in range(1, ctx.n + 1):
        A, Ad = annihilation(ctx, j), creation(ctx, j)
        term = 0.25 * (A @ A - Ad @ Ad + Ad.commutator(A))
        out = term if out is None else out + term
    return out.with_margin(2)


def xi_grad_matrix_quadrature(ctx: HermiteContext) -> OperatorMatrix:
    """Independent quadrature route to xi . grad (n = 1).

    Uses d/dxi h_k = sqrt(2k) h_{k-1} - xi h_k pointwise and trapezoid
    quadrature; serves as the cross-check for the ladder factorisation.
    """
    if ctx.n != 1:
        raise NotImplementedError("quadrature route implemented for n = 1")
    xi = ctx.xi_grid
    s = ctx.samples
    ks = np.arange(ctx.N)
    dh = np.zeros_like(s)
    dh[1:] = np.sqrt(2.0 * ks[1:])[:, None] * s[:-1]
    dh -= xi[None, :] * s
    integrand = xi[None, :] * dh
    return OperatorMatrix(ctx, ctx.h_xi * (s @ integrand.T), margin=1)


def _spectral_derivative(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    freqs = 2.0 * np.pi * np.fft.fftfreq(grid.m_pts, d=grid.h_z)
    spec = np.fft.fft(values, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = grid.m_pts
    return np.fft.ifft(spec * (1j * freqs).reshape(shape), axis=axis)


def euler_operator(f: PhaseGridFunction) -> PhaseGridFunction:
    """B f = sum_j (x_j d/dx_j + y_j d/dy_j) f by spectral differentiation."""
    grid = f.grid
    out = np.zeros(grid.shape, dtype=complex)
    ax = grid.axis
    for j in range(2 * grid.n):
        shape = [1] * (2 * grid.n)
        shape[j] = grid.m_pts
        out += ax.reshape(shape) * _spectral_derivative(f.values, grid, j)
    return PhaseGridFunction(grid, out)


def _inner_window(grid: GridSpec) -> np.ndarray:
    masks = []
    half = grid.L_z / 2.0
    ax = grid.axis
    keep = np.abs(ax) <= half
    m = keep
    out = np.ones(grid.shape, dtype=bool)
    for j in range(2 * grid.n):
        shape = [1] * (2 * grid.n)
        shape[j] = grid.m_pts
        out &= m.reshape(shape)
    return out


def _windowed_rel(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    num = np.linalg.norm((a - b)[window])
    den = np.linalg.norm(a[window])
    return float(num / den) if den > 0 else float(num)


def scale_derivative_terms(
    family: MultiplierFamily,
    lam: float,
    h_fd: float,
    f: PhaseGridFunction,
    ctx: HermiteContext,
) -> dict:
    """Decompose 2 lam d/dlam of the fiber multiplier applied to f.

    lhs is the central finite difference of lam' -> T^{lam'} f, each fiber
    conjugated back to the common grid through trigonometric dilations.
    The three candidate terms are the commutator with the Euler operator B,
    the xi.grad multiplier commutator, and the scale derivative of the
    family matrix; residuals are reported for both signs of the middle
    term and on the inner half-box window (B is unbounded at the edge).
    """
    if lam <= 0:
        raise DomainError("scale derivative evaluated at lam > 0")
    if h_fd <= 0 or h_fd >= lam:
        raise FDStepError(f"h_fd={h_fd} outside (0, lam)")
    grid = f.grid

    def T_at(lp: float) -> PhaseGridFunction:
        r = math.sqrt(lp / lam)  # relative dilation against the base scale
        g = smooth_dilate(f, 1.0 / r) if abs(r - 1.0) > 1e-14 else f
        g = apply_multiplier(ctx, family.matrix(lp), g)
        return smooth_dilate(g, r) if abs(r - 1.0) > 1e-14 else g

    up, dn = T_at(lam + h_fd), T_at(lam - h_fd)
    lhs = (lam / h_fd) * (up - dn)

    M = family.matrix(lam)
    Mp = family.derivative(lam, h_fd)
    Xi = xi_grad_matrix(ctx)
    xi_comm = M @ Xi - Xi @ M  # [m(lam), xi.grad]

    Tf = apply_multiplier(ctx, M, f)
    term_b = euler_operator(Tf) - apply_multiplier(ctx, M, euler_operator(f))
    term_xi = apply_multiplier(ctx, xi_comm, f)
    term_deriv = apply_multiplier(ctx, (2.0 * lam) * Mp - xi_comm, f)

    window = _inner_window(grid)
    total_plus = term_b + term_xi + term_deriv
    total_minus = term_b + (-1.0) * term_xi + term_deriv
    res_plus = _windowed_rel(lhs.values, total_plus.values, window)
    res_minus = _windowed_rel(lhs.values, total_minus.values, window)
    return {
        "lam": lam,
        "h_fd": h_fd,
        "lhs": lhs,
        "term_commutator_B": term_b,
        "term_xi_grad": term_xi,
        "term_lambda_deriv": term_deriv,
        "residual_sign_plus": res_plus,
        "residual_sign_minus": res_minus,
        "winning_sign": "[m, xi.grad]" if res_plus <= res_minus else "[xi.grad, m]",
        "winning_residual": min(res_plus, res_minus),
    }


def prop42_identity(ctx: HermiteContext, m: OperatorMatrix, lam: float) -> dict:
    """Residuals of the ladder factorisation and its four-term expansion.

    (1) 4 lam xi.grad = A(lam)^2 - A*(lam)^2 + [A*(lam), A(lam)] with the
        left side built by quadrature (independent route);
    (2) [A*(lam), A(lam)] = -2 lam I on the interior;
    (3) 4 lam [m, xi.grad] expands into the four delta-term products.
    """
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    s = math.sqrt(abs(lam))
    A = s * annihilation(ctx)
    Ad = s * creation(ctx)
    xi_quad = xi_grad_matrix_quadrature(ctx)
    rhs = A @ A - Ad @ Ad + Ad.commutator(A)
    res_fact = interior_residual((4.0 * lam) * xi_quad, rhs.with_margin(2))
    res_ccr = interior_residual(
        Ad.commutator(A).with_margin(1), (-2.0 * lam) * identity(ctx)
    )
    Xi = xi_grad_matrix(ctx)
    lhs4 = (4.0 * lam) * (m @ Xi - Xi @ m)
    dm = delta(m)
    dbm = delta_bar(m)
    rhs4 = s * (dm @ A + A @ dm + dbm @ Ad + Ad @ dbm)
    res_expansion = interior_residual(lhs4.with_margin(2 + m.margin), rhs4)
    return {
        "lam": lam,
        "residual_factorisation": res_fact,
        "residual_ccr": res_ccr,
        "residual_four_term": res_expansion,
    }


# ---------------------------------------------------------------------------
# Unbounded-growth computation


def counterexample_theorem16(
    ctx: HermiteContext, alpha_list: Sequence[int], beta: int, j: int = 1
) -> dict:
    """Growth of S = deltabar(m) W(f) A* + delta(m) W(f) A for m = A H^{-1/2}.

    f is the unit-norm matrix-element function with indices (alpha, beta),
    whose transform is the rank-one operator s |h_beta><h_alpha| with
    s = (2 pi)^{n/2}.  For each alpha the HS norm of S is computed twice:
    from the assembled matrix and from the two-column closed form
    s^2 ((2 alpha + 2) ||delta(m) h_beta||^2 + 2 alpha ||deltabar(m) h_beta||^2).
    """
    if ctx.n != 1:
        raise NotImplementedError("growth table implemented for n = 1")
    alpha_list = sorted(int(a) for a in alpha_list)
    if max(alpha_list) + 2 >= ctx.N:
        raise DomainError(f"need max(alpha)+2 < N, got {max(alpha_list) + 2} >= {ctx.N}")
    if not 0 <= beta < ctx.N - 2:
        raise DomainError(f"beta={beta} outside [0, N-2)")
    m = annihilation(ctx, j) @ spectral_function(ctx, lambda t: t**-0.5)
    dm, dbm = delta(m, j), delta_bar(m, j)
    Hm = spectral_function(ctx, lambda t: t**-0.5)
    res_bar = interior_residual(
        delta_bar(Hm),
        (spectral_function(ctx, lambda t: t**-0.5, -2.0) - Hm) @ creation(ctx, j),
    )
    res_del = interior_residual(
        delta(Hm),
        (Hm - spectral_function(ctx, lambda t: t**-0.5, 2.0)) @ annihilation(ctx, j),
    )
    s = SPECIAL_HERMITE_NORMALIZER ** (-ctx.n)  # = (2 pi)^{n/2}
    A, Ad = annihilation(ctx, j), creation(ctx, j)
    col_d = np.linalg.norm(dm.entries[:, beta]) ** 2
    col_db = np.linalg.norm(dbm.entries[:, beta]) ** 2
    rows = []
    for a in alpha_list:
        R = np.zeros((ctx.dim, ctx.dim), dtype=complex)
        R[beta, a] = s
        Rm = OperatorMatrix(ctx, R)
        S = dbm @ Rm @ Ad + dm @ Rm @ A
        direct = S.hs_norm() ** 2
        closed = s**2 * ((2 * a + 2) * col_d + 2 * a * col_db)
        rows.append(
            {
                "alpha": a,
                "hs_sq_direct": direct,
                "hs_sq_closed": closed,
                "rel_diff": abs(direct - closed) / closed,
            }
        )
    xs = [r["alpha"] for r in rows if 8 <= r["alpha"] <= 64]
    ys = [math.sqrt(r["hs_sq_direct"]) for r in rows if 8 <= r["alpha"] <= 64]
    slope = float("nan")
    if len(xs) >= 2:
        slope = float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
    return {
        "beta": beta,
        "identity_residual_deltabar": res_bar,
        "identity_residual_delta": res_del,
        "rows": rows,
        "loglog_slope_8_64": slope,
    }


def b_commutator_apply(
    ctx: HermiteContext, m: OperatorMatrix, f: PhaseGridFunction
) -> PhaseGridFunction:
    """Kernel-side commutator of the Euler operator with the multiplier:
    the transform of [B, T_m] f is -2 (deltabar(m) W(f) A* + delta(m) W(f) A)."""
    eng = get_engine(ctx, f.grid)
    Wf = eng.transform(f.values)
    A, Ad = annihilation(ctx).entries, creation(ctx).entries
    dm, dbm = delta(m).entries, delta_bar(m).entries
    out = -2.0 * (dbm @ Wf @ Ad + dm @ Wf @ A)
    return PhaseGridFunction(f.grid, eng.inverse(out))
