"""Dyadic maximal functions, twisted sharp function, A_p weights, commutators.

Every cube supremum ranges over a fixed dyadic system: nested binary
splits of the index box down to single cells (near-halves when a side is
odd, so non-power-of-two grids still get an exact partition tree).  The
twisted sharp function carries the oscillatory factor
exp(-(i/2) Im(z . conj(u))) with u the geometric center of each cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ZeroNormError
from .hermite import HermiteContext, OperatorMatrix
from .weyl import GridSpec, PhaseGridFunction, apply_multiplier, get_engine

__all__ = [
    "DyadicCubeSystem",
    "WeightProfile",
    "dyadic_maximal",
    "hl_maximal",
    "m_s",
    "twisted_sharp",
    "ap_constant",
    "weight_profile",
    "power_weight",
    "log_abs_weight",
    "bmo_norm",
    "weighted_lp_norm",
    "weighted_ratio",
    "pointwise_domination",
    "bmo_commutator",
]


def _interval_levels(m: int) -> list[list[tuple[int, int]]]:
    levels = [[(0, m)]]
    while any(e - s > 1 for s, e in levels[-1]):
        nxt: list[tuple[int, int]] = []
        for s, e in levels[-1]:
            if e - s == 1:
                nxt.append((s, e))
            else:
                half = (e - s) // 2
                nxt.append((s, s + half))
                nxt.append((s + half, e))
        levels.append(nxt)
    return levels


@dataclass(frozen=True)
class DyadicCubeSystem:
    """Nested near-halving cube partitions of the grid index box (n = 1)."""

    grid: GridSpec
    levels: tuple[tuple[tuple[int, int], ...], ...]

    @classmethod
    def build(cls, grid: GridSpec) -> "DyadicCubeSystem":
        if grid.n != 1:
            raise NotImplementedError("cube system implemented for n = 1")
        levels = tuple(tuple(lv) for lv in _interval_levels(grid.m_pts))
        return cls(grid, levels)

    def interval_center(self, iv: tuple[int, int]) -> float:
        s, e = iv
        return -self.grid.L_z + 0.5 * (s + e) * self.grid.h_z

    def n_levels(self) -> int:
        return len(self.levels)


_SYSTEMS: dict[str, DyadicCubeSystem] = {}


def _system(grid: GridSpec) -> DyadicCubeSystem:
    sys = _SYSTEMS.get(grid.cache_key)
    if sys is None:
        sys = DyadicCubeSystem.build(grid)
        _SYSTEMS[grid.cache_key] = sys
    return sys


def _level_cell_means(a: np.ndarray, ivs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Per-cube means of ``a`` for one level, broadcast back to cell shape."""
    starts = [s for s, _ in ivs]
    lens = np.array([e - s for s, e in ivs], dtype=float)
    sums = np.add.reduceat(a, starts, axis=0)
    sums = np.add.reduceat(sums, starts, axis=1)
    means = sums / np.outer(lens, lens)
    reps = lens.astype(int)
    return np.repeat(np.repeat(means, reps, axis=0), reps, axis=1)


def dyadic_maximal(f: PhaseGridFunction) -> PhaseGridFunction:
    """sup over dyadic cubes containing the point of the cube mean of |f|."""
    sys = _system(f.grid)
    a = np.abs(f.values)
    out = np.zeros_like(a)
    for ivs in sys.levels:
        np.maximum(out, _level_cell_means(a, ivs), out=out)
    return PhaseGridFunction(f.grid, out.astype(complex))


def hl_maximal(f: PhaseGridFunction) -> PhaseGridFunction:
    """Dyadic-restricted Hardy-Littlewood maximal function (see module doc)."""
    return dyadic_maximal(f)


def m_s(f: PhaseGridFunction, s: float) -> PhaseGridFunction:
    """M_s f = (M |f|^s)^{1/s} with M the (dyadic) maximal function."""
    if s < 1:
        raise DomainError("s must be >= 1")
    powered = PhaseGridFunction(f.grid, (np.abs(f.values) ** s).astype(complex))
    mx = dyadic_maximal(powered)
    return PhaseGridFunction(f.grid, (mx.values.real ** (1.0 / s)).astype(complex))


def twisted_sharp(f: PhaseGridFunction) -> PhaseGridFunction:
    """Sharp maximal function with the cube-centered twist.

    For each dyadic cube Q with center u the oscillation is measured on
    g = f exp(-(i/2) Im(z conj(u))) around its cube mean; the value at a
    point is the sup over the cubes containing it.
    """
    sys = _system(f.grid)
    grid = f.grid
    x, y = grid.xy_meshes()
    out = np.zeros(grid.shape)
    for ivs in sys.levels:
        if all(e - s <= 1 for s, e in ivs):
            continue  # single-cell cubes oscillate trivially
        lvl = np.zeros(grid.shape)
        for sx, ex in ivs:
            u1 = sys.interval_center((sx, ex))
            for sy, ey in ivs:
                u2 = sys.interval_center((sy, ey))
                sub = f.values[sx:ex, sy:ey]
                phase = np.exp(-0.5j * (y[sx:ex, sy:ey] * u1 - x[sx:ex, sy:ey] * u2))
                g = sub * phase
                lvl[sx:ex, sy:ey] = np.abs(g - g.mean()).mean()
        np.maximum(out, lvl, out=out)
    return PhaseGridFunction(grid, out.astype(complex))


# ---------------------------------------------------------------------------
# Weights


@dataclass(frozen=True)
class WeightProfile:
    """Positive weight with its Muckenhoupt constant over the dyadic cubes."""

    w: PhaseGridFunction
    p: float
    ap_constant: float
    tag: str = ""


def ap_constant(w: PhaseGridFunction, p: float) -> float:
    """sup over dyadic cubes of (avg_Q w) (avg_Q w^{-1/(p-1)})^{p-1}."""
    if p <= 1:
        raise DomainError("A_p constants need p > 1")
    vals = w.values.real
    if np.any(vals <= 0) or np.any(np.abs(w.values.imag) > 0):
        raise DomainError("weight must be strictly positive and real")
    sys = _system(w.grid)
    dual = vals ** (-1.0 / (p - 1.0))
    best = 0.0
    for ivs in sys.levels:
        starts = [s for s, _ in ivs]
        lens = np.array([e - s for s, e in ivs], dtype=float)
        area = np.outer(lens, lens)
        s1 = np.add.reduceat(np.add.reduceat(vals, starts, axis=0), starts, axis=1) / area
        s2 = np.add.reduceat(np.add.reduceat(dual, starts, axis=0), starts, axis=1) / area
        best = max(best, float(np.max(s1 * s2 ** (p - 1.0))))
    return best


def weight_profile(w: PhaseGridFunction, p: float, tag: str = "") -> WeightProfile:
    return WeightProfile(w, p, ap_constant(w, p), tag)


def power_weight(grid: GridSpec, a: float) -> PhaseGridFunction:
    """|z + eps|^a with eps = h_z/2, the half-cell offset keeping the pole off-lattice."""
    eps = grid.h_z / 2.0
    x, y = grid.xy_meshes()
    r = np.sqrt((x + eps) ** 2 + y**2)
    return PhaseGridFunction(grid, (r**a).astype(complex))


def log_abs_weight(grid: GridSpec) -> PhaseGridFunction:
    """log |z + eps|: the canonical unbounded BMO symbol on the grid."""
    eps = grid.h_z / 2.0
    x, y = grid.xy_meshes()
    r = np.sqrt((x + eps) ** 2 + y**2)
    return PhaseGridFunction(grid, np.log(r).astype(complex))


def bmo_norm(b: PhaseGridFunction) -> float:
    """Dyadic mean-oscillation supremum of a real function."""
    vals = b.values.real
    sys = _system(b.grid)
    best = 0.0
    for ivs in sys.levels:
        starts = [s for s, _ in ivs]
        lens = np.array([e - s for s, e in ivs], dtype=float)
        area = np.outer(lens, lens)
        means = (
            np.add.reduceat(np.add.reduceat(vals, starts, axis=0), starts, axis=1) / area
        )
        reps = lens.astype(int)
        centered = vals - np.repeat(np.repeat(means, reps, axis=0), reps, axis=1)
        osc = (
            np.add.reduceat(np.add.reduceat(np.abs(centered), starts, axis=0), starts, axis=1)
            / area
        )
        best = max(best, float(np.max(osc)))
    return best


# ---------------------------------------------------------------------------
# Weighted-norm and domination statistics


def weighted_lp_norm(f: PhaseGridFunction, w: PhaseGridFunction, p: float) -> float:
    return float(
        (np.sum(np.abs(f.values) ** p * w.values.real) * f.grid.cell_volume) ** (1.0 / p)
    )


def weighted_ratio(
    T: Callable[[PhaseGridFunction], PhaseGridFunction],
    f_panel: Sequence[PhaseGridFunction],
    w: PhaseGridFunction,
    p: float,
) -> dict:
    """Per-function ||T f||_{L^p(w)} / ||f||_{L^p(w)} and the panel maximum."""
    if p <= 1:
        raise DomainError("weighted ratios need p > 1")
    ratios = []
    for f in f_panel:
        den = weighted_lp_norm(f, w, p)
        if den == 0.0:
            raise ZeroNormError("panel function has zero weighted norm")
        ratios.append(weighted_lp_norm(T(f), w, p) / den)
    out = {
        "p": p,
        "ratios": ratios,
        "max_ratio": max(ratios),
        "ap_constant": ap_constant(w, p),
    }
    out["ap_half_constant"] = ap_constant(w, p / 2.0) if p / 2.0 > 1.0 else None
    return out


def pointwise_domination(Tf: PhaseGridFunction, f: PhaseGridFunction, s: float) -> float:
    """sup over the grid of twisted_sharp(Tf) / M_s f, with 0/0 counted as 0."""
    if s <= 1:
        raise DomainError("domination statistic needs s > 1")
    num = twisted_sharp(Tf).values.real
    den = m_s(f, s).values.real
    mask = den > 0
    if not np.any(mask):
        return 0.0
    out = np.zeros_like(num)
    out[mask] = num[mask] / den[mask]
    bad = (~mask) & (num > 1e-14 * num.max())
    if np.any(bad):
        return math.inf
    return float(np.max(out))


def bmo_commutator(
    ctx: HermiteContext,
    b: PhaseGridFunction,
    m: OperatorMatrix,
    f_panel: Sequence[PhaseGridFunction],
    p: float,
) -> dict:
    """[b, T_m] f = b (T_m f) - T_m (b f): norm ratios against ||b||_* ||f||_p."""
    if not 1.0 < p < math.inf:
        raise DomainError("p must lie in (1, inf)")
    bstar = bmo_norm(b)
    breal = PhaseGridFunction(b.grid, b.values.real.astype(complex))
    rows = []
    for f in f_panel:
        fp = f.lp_norm(p)
        if fp == 0.0:
            raise ZeroNormError("panel function has zero L^p norm")
        comm = breal * apply_multiplier(ctx, m, f) - apply_multiplier(ctx, m, breal * f)
        norm = comm.lp_norm(p)
        rows.append(
            {
                "comm_norm": norm,
                "f_norm": fp,
                "ratio": (norm / (bstar * fp)) if bstar > 0 else (0.0 if norm < 1e-12 else math.inf),
            }
        )
    return {
        "p": p,
        "bmo_norm": bstar,
        "rows": rows,
        "max_ratio": max(r["ratio"] for r in rows),
    }
