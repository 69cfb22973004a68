"""Noncommutative derivations, dyadic multiplier conditions and heat bands.

The derivations are delta_j m = [m, A_j] and deltabar_j m = [A_j*, m];
every application widens the contaminated top layer of the truncated
matrix by one level per coordinate, tracked through OperatorMatrix.margin.
Dyadic statistics only use blocks whose levels stay inside the clean
interior, and excluded blocks are listed on the reports.

Heat bands use the dyadic times t_j = 2**-j: the band operator

    S_j = sum_k (exp(-2 k t_j) - exp(-2 k t_{j+1})) P_k

equals exp(n t_j) exp(-t_j H) - exp(n t_{j+1}) exp(-t_{j+1} H), and a
multiplier decomposes as m = m_0 - sum_j m_j with m_j = m S_j and
m_0 = m exp(n t_1) exp(-t_1 H).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, MarginExhaustedError, TruncationError, WindowError
from .hermite import (
    HermiteContext,
    OperatorMatrix,
    annihilation,
    creation,
    dyadic_block_levels,
    dyadic_projection,
    max_dyadic_index,
)
from .weyl import GridSpec, PhaseGridFunction, get_engine

__all__ = [
    "delta",
    "delta_bar",
    "multi_derivation",
    "scaled_delta",
    "scaled_delta_bar",
    "MauceriReport",
    "mauceri_constant",
    "dyadic_time",
    "smoothing_head",
    "heat_band",
    "band_decompose",
    "band_kernels",
    "DecayReport",
    "decay_report",
    "lemma37_shape",
]


def delta(m: OperatorMatrix, j: int = 1) -> OperatorMatrix:
    """delta_j m = [m, A_j]; costs one interior level."""
    out = m.commutator(annihilation(m.ctx, j))
    return out.with_margin(m.margin + 1)


def delta_bar(m: OperatorMatrix, j: int = 1) -> OperatorMatrix:
    """deltabar_j m = [A_j*, m]; costs one interior level."""
    out = creation(m.ctx, j).commutator(m)
    return out.with_margin(m.margin + 1)


def _check_margin(ctx: HermiteContext, total: int) -> None:
    if total > ctx.N // 4:
        raise MarginExhaustedError(
            f"derivation order {total} exceeds N/4 = {ctx.N // 4}; "
            "the contaminated boundary would swallow the interior"
        )


def multi_derivation(
    m: OperatorMatrix, alpha: Sequence[int] | int, beta: Sequence[int] | int
) -> OperatorMatrix:
    """delta^alpha deltabar^beta m, applied right to left."""
    ctx = m.ctx
    a = (alpha,) if isinstance(alpha, int) else tuple(alpha)
    b = (beta,) if isinstance(beta, int) else tuple(beta)
    if len(a) != ctx.n or len(b) != ctx.n:
        raise DomainError(f"orders must have {ctx.n} coordinates")
    _check_margin(ctx, sum(a) + sum(b))
    out = m
    for j in range(1, ctx.n + 1):
        for _ in range(b[j - 1]):
            out = delta_bar(out, j)
    for j in range(1, ctx.n + 1):
        for _ in range(a[j - 1]):
            out = delta(out, j)
    return out


def scaled_delta(m: OperatorMatrix, j: int, lam: float) -> OperatorMatrix:
    """|lam|^{-1/2} [m, A_j(lam)] for a matrix in the lam-scaled basis.

    Since A_j(lam) = sqrt|lam| A_j in that basis, this equals [m, A_j]
    numerically; lam is validated and kept for interface parity.
    """
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    return delta(m, j)


def scaled_delta_bar(m: OperatorMatrix, j: int, lam: float) -> OperatorMatrix:
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    return delta_bar(m, j)


# ---------------------------------------------------------------------------
# Dyadic multiplier condition


def _row_restricted_block_norm_sq(
    d: OperatorMatrix, chi_levels: np.ndarray, side: str
) -> float:
    """||(D m) chi_k||_HS^2 (left) or ||chi_k (D m)||_HS^2 (right).

    Rows (left) / columns (right) inside the contaminated top margin are
    excluded so truncation garbage cannot enter the statistic.
    """
    ctx = d.ctx
    levels = ctx.levels
    in_block = np.isin(levels, chi_levels)
    valid = d.interior_mask()
    e = d.entries
    if side == "left":
        sub = e[np.ix_(valid, in_block)]
    else:
        sub = e[np.ix_(in_block, valid)]
    return float(np.sum(np.abs(sub) ** 2))


@dataclass(frozen=True)
class MauceriReport:
    """Dyadic derivation condition table for one multiplier."""

    order: int
    side: str
    ks: tuple[int, ...]
    excluded_ks: tuple[int, ...]
    table: dict = field(repr=False)
    per_order_sup: dict = field(repr=False)
    constant: float = 0.0

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "side": self.side,
            "ks": list(self.ks),
            "excluded_ks": list(self.excluded_ks),
            "table": {str(k): v for k, v in self.table.items()},
            "per_order_sup": {str(k): v for k, v in self.per_order_sup.items()},
            "constant": self.constant,
        }


def _orders_up_to(n: int, l: int):
    """All (alpha, beta) multi-index pairs with |alpha| + |beta| <= l."""

    def comps(total, slots):
        if slots == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in comps(total - head, slots - 1):
                yield (head,) + rest

    for s in range(l + 1):
        for sa in range(s + 1):
            for a in comps(sa, n):
                for b in comps(s - sa, n):
                    yield a, b


def mauceri_constant(
    ctx: HermiteContext, m: OperatorMatrix, l: int, side: str = "left"
) -> MauceriReport:
    """sup_k 2^{k(|a|+|b|-n)} ||(delta^a deltabar^b m) chi_k||_HS^2 over orders <= l.

    side="left" applies chi_k on the right of the derived multiplier (the
    1 < p <= 2 condition); side="right" applies it on the left.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    _check_margin(ctx, l)
    all_ks = list(range(1, max_dyadic_index(ctx) + 1))
    table: dict = {}
    per_sup: dict = {}
    excluded: set[int] = set()
    for a, b in _orders_up_to(ctx.n, l):
        order = sum(a) + sum(b)
        d = multi_derivation(m, a, b)
        top_valid = ctx.N - 1 - d.margin
        row = {}
        for k in all_ks:
            levels = dyadic_block_levels(ctx, k)
            if levels.size == 0 or levels.max() > top_valid:
                excluded.add(k)
                continue
            val = 2.0 ** (k * (order - ctx.n)) * _row_restricted_block_norm_sq(
                d, levels, side
            )
            row[k] = val
        if not row:
            raise TruncationError(
                f"no dyadic blocks survive at order {(a, b)}; excluded k = {sorted(excluded)}"
            )
        table[(a, b)] = row
        per_sup[(a, b)] = max(row.values())
    return MauceriReport(
        order=l,
        side=side,
        ks=tuple(k for k in all_ks if k not in excluded),
        excluded_ks=tuple(sorted(excluded)),
        table=table,
        per_order_sup=per_sup,
        constant=max(per_sup.values()),
    )


# ---------------------------------------------------------------------------
# Heat bands


def dyadic_time(j: int) -> float:
    return 2.0 ** (-j)


def smoothing_head(ctx: HermiteContext, j: int) -> OperatorMatrix:
    """exp(n t_j) exp(-t_j H) = diag exp(-2 |alpha| t_j), t_j = 2^-j."""
    t = dyadic_time(j)
    return OperatorMatrix(ctx, np.diag(np.exp(-2.0 * ctx.levels * t)).astype(complex))


def heat_band(ctx: HermiteContext, j: int) -> OperatorMatrix:
    """S_j: difference of consecutive normalised heat operators."""
    if j < 1:
        raise DomainError("band index must be >= 1")
    return smoothing_head(ctx, j) - smoothing_head(ctx, j + 1)


def band_decompose(ctx: HermiteContext, m: OperatorMatrix, J: int) -> list[OperatorMatrix]:
    """[m_0, m_1, ..., m_J] with m_0 = m head(1), m_j = m S_j.

    Telescoping: m_0 - sum_{j<=J} m_j = m head(J+1) holds to rounding.
    """
    if J < 1:
        raise DomainError("J must be >= 1")
    out = [m @ smoothing_head(ctx, 1)]
    for j in range(1, J + 1):
        out.append(m @ heat_band(ctx, j))
    return out


def band_kernels(
    ctx: HermiteContext, m: OperatorMatrix, J: int, grid: GridSpec
) -> list[PhaseGridFunction]:
    """Kernels k_j of the band operators, j = 0..J (batched inverse transform)."""
    bands = band_decompose(ctx, m, J)
    eng = get_engine(ctx, grid)
    vals = eng.inverse(np.stack([b.entries for b in bands]))
    return [PhaseGridFunction(grid, v) for v in vals]


# ---------------------------------------------------------------------------
# Kernel decay and smoothness statistics


@dataclass(frozen=True)
class DecayReport:
    """Annulus statistics of one band kernel against the dyadic-time envelopes."""

    j: int
    t_next: float
    annulus: tuple[float, float]
    decay_sup: dict
    decay_ratio: float
    l2_weighted: float
    l2_ratio: float
    smooth_stats: dict = field(repr=False)
    smooth_ratio: float = math.nan

    def as_dict(self) -> dict:
        return {
            "j": self.j,
            "t_next": self.t_next,
            "annulus": list(self.annulus),
            "decay_sup": {str(s): v for s, v in self.decay_sup.items()},
            "decay_ratio": self.decay_ratio,
            "l2_weighted": self.l2_weighted,
            "l2_ratio": self.l2_ratio,
            "smooth_stats": {str(u): v for u, v in self.smooth_stats.items()},
            "smooth_ratio": self.smooth_ratio,
        }


def _shift_values(vals: np.ndarray, iu: int, iv: int, m: int) -> np.ndarray:
    """k(z - u) for a lattice shift u = (iu, iv) cells, zero outside the box."""
    out = np.zeros_like(vals)
    dst_x = slice(max(0, iu), min(m, m + iu))
    src_x = slice(max(0, -iu), min(m, m - iu))
    dst_y = slice(max(0, iv), min(m, m + iv))
    src_y = slice(max(0, -iv), min(m, m - iv))
    out[dst_x, dst_y] = vals[src_x, src_y]
    return out


def decay_report(
    kj: PhaseGridFunction,
    j: int,
    u_panel: Sequence[tuple[float, float]],
    annulus: tuple[float, float] | None = None,
) -> DecayReport:
    """Decay and twisted-smoothness statistics of a band kernel.

    The sup window is the annulus inner <= |z| <= outer (default 1 to
    L_z/2); each statistic also carries its ratio to the dyadic-time
    envelope so cross-band boundedness reads off as a single max.
    """
    grid = kj.grid
    if grid.n != 1:
        raise NotImplementedError("decay statistics implemented for n = 1")
    n = grid.n
    t_j = dyadic_time(j)
    t_next = dyadic_time(j + 1)
    if annulus is None:
        annulus = (1.0, grid.L_z / 2.0)
    x, y = grid.xy_meshes()
    az = np.sqrt(x**2 + y**2)
    ring = (az >= annulus[0]) & (az <= annulus[1])
    if not np.any(ring):
        raise WindowError(f"annulus {annulus} contains no grid points")
    absk = np.abs(kj.values)
    decay_sup = {}
    for s in (2 * n, 2 * n + 0.5, 2 * n + 1, 2 * n + 2):
        decay_sup[s] = float(np.max((az**s * absk)[ring]))
    decay_ratio = decay_sup[2 * n + 0.5] / t_next**0.25
    l2w = float(
        np.sqrt(np.sum((az ** (2 * n + 1) * absk**2)[ring]) * grid.cell_volume)
    )
    l2_ratio = l2w / t_next**0.25

    m = grid.m_pts
    h = grid.h_z
    smooth_stats = {}
    smooth_ratio = 0.0
    for u in u_panel:
        u1, u2 = float(u[0]), float(u[1])
        au = math.hypot(u1, u2)
        if au == 0.0:
            smooth_stats[(u1, u2)] = 0.0
            continue
        iu, iv = round(u1 / h), round(u2 / h)
        if abs(u1 - iu * h) > 1e-9 or abs(u2 - iv * h) > 1e-9:
            raise WindowError(f"panel point {u} is off-lattice")
        shifted = _shift_values(kj.values, iu, iv, m)
        # twisted difference k(z-u) e^{-(i/2) Im(z conj(u))} - k(z)
        phase = np.exp(-0.5j * (y * u1 - x * u2))
        diff = np.abs(shifted * phase - kj.values)
        window = ring & (az > 2.0 * au)
        if not np.any(window):
            raise WindowError(f"no annulus points beyond 2|u| for u = {u}")
        stat = float(np.max((az ** (2 * n + 0.5) * diff)[window])) / math.sqrt(au)
        envelope = min(t_j**0.25 / math.sqrt(au), math.sqrt(au) / t_next**0.25)
        smooth_stats[(u1, u2)] = stat
        smooth_ratio = max(smooth_ratio, stat / envelope)
    return DecayReport(
        j=j,
        t_next=t_next,
        annulus=annulus,
        decay_sup=decay_sup,
        decay_ratio=decay_ratio,
        l2_weighted=l2w,
        l2_ratio=l2_ratio,
        smooth_stats=smooth_stats,
        smooth_ratio=smooth_ratio,
    )


# ---------------------------------------------------------------------------
# Band-block interaction table


def lemma37_shape(
    ctx: HermiteContext, j: int, gamma: int, rho: int
) -> list[dict]:
    """Normalised dyadic-block norms of the derived band operator.

    For each admissible dyadic index Nb the row holds
    raw = ||chi_Nb deltabar^gamma delta^rho S_j||_HS^2 and
    normalized = raw / (t_{j+1}^2 2^{Nb (n + 2 - gamma - rho)}),
    tabulated against x = 2^Nb t_{j+1}.  The normalised values collapse to
    a rapidly decreasing profile in x.
    """
    _check_margin(ctx, gamma + rho)
    d = heat_band(ctx, j)
    for _ in range(rho):
        d = delta(d)
    for _ in range(gamma):
        d = delta_bar(d)
    t_next = dyadic_time(j + 1)
    rows = []
    top_valid = ctx.N - 1 - d.margin
    for k in range(1, max_dyadic_index(ctx) + 1):
        levels = dyadic_block_levels(ctx, k)
        if levels.size == 0 or levels.max() > top_valid:
            continue
        raw = _row_restricted_block_norm_sq(d, levels, "right")
        norm = raw / (t_next**2 * 2.0 ** (k * (ctx.n + 2 - gamma - rho)))
        rows.append({"block": k, "x": 2.0**k * t_next, "raw": raw, "normalized": norm})
    if not rows:
        raise TruncationError("no dyadic block fits inside the truncation")
    return rows
