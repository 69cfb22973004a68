"""Truncated Hermite-basis linear algebra.

The basis is the physicists' Hermite functions h_k normalised in L2(R),
generated by the stable three-term recurrence

    h_0(x) = pi**(-1/4) exp(-x**2/2)
    h_{k+1}(x) = sqrt(2/(k+1)) x h_k(x) - sqrt(k/(k+1)) h_{k-1}(x)

so that the ladder operators act as A h_k = sqrt(2k) h_{k-1} and
A* h_k = sqrt(2k+2) h_{k+1}, and the oscillator Hamiltonian
-d^2/dx^2 + x^2 is diagonal with eigenvalue 2k+1 per coordinate.

Multi-indices for dimension n are enumerated lexicographically
(alpha_1 slowest), i.e. flat index = sum_j alpha_j * N**(n-1-j).
Matrices carry a ``margin`` counter: the number of top levels per
coordinate whose entries are contaminated by the Galerkin truncation.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DomainError, GridError, TruncationError

__all__ = [
    "HermiteContext",
    "OperatorMatrix",
    "build_context",
    "hermite_samples",
    "annihilation",
    "creation",
    "hermite_operator",
    "identity",
    "interior_residual",
    "projection",
    "dyadic_projection",
    "dyadic_block_levels",
    "max_dyadic_index",
    "spectral_function",
    "scaled_operators",
    "ScaledOperators",
]

MULTI_INDEX_ORDER = "lexicographic-row-major-v1"


def hermite_samples(points: np.ndarray, n_basis: int) -> np.ndarray:
    """Sample h_0..h_{n_basis-1} at ``points`` by the three-term recurrence.

    Returns an array of shape (n_basis, len(points)).  Stable for the
    moderate truncations used here (values beyond the classically allowed
    region underflow gracefully to 0).
    """
    points = np.asarray(points, dtype=float)
    out = np.empty((n_basis, points.size))
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * points**2)
    if n_basis > 1:
        out[1] = math.sqrt(2.0) * points * out[0]
    for k in range(1, n_basis - 1):
        out[k + 1] = (
            math.sqrt(2.0 / (k + 1)) * points * out[k]
            - math.sqrt(k / (k + 1)) * out[k - 1]
        )
    return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HermiteContext:
    """Shared arena: dimension, truncation and sampled basis.

    xi_grid is the uniform half-open grid {-L_xi + i*h_xi : 0 <= i < points}
    with h_xi = 2*L_xi/points; hermite_samples holds h_k on that grid,
    one row per k < N.
    """

    n: int
    N: int
    L_xi: float
    points: int
    xi_grid: np.ndarray = field(repr=False, compare=False)
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def h_xi(self) -> float:
        return 2.0 * self.L_xi / self.points

    @property
    def dim(self) -> int:
        """Total matrix dimension N**n."""
        return self.N**self.n

    @property
    def levels(self) -> np.ndarray:
        """|alpha| for every flat multi-index, in lexicographic order."""
        if self.n == 1:
            return np.arange(self.N)
        grids = np.meshgrid(*([np.arange(self.N)] * self.n), indexing="ij")
        return sum(grids).reshape(-1)

    @property
    def cache_key(self) -> str:
        tag = f"hermite:{self.n}:{self.N}:{self.L_xi!r}:{self.points}"
        return hashlib.sha256(tag.encode()).hexdigest()[:16]

    def multi_index(self, flat: int) -> tuple[int, ...]:
        idx = []
        for j in range(self.n):
            idx.append(flat // self.N ** (self.n - 1 - j) % self.N)
        return tuple(idx)

    def flat_index(self, alpha: Sequence[int]) -> int:
        if len(alpha) != self.n:
            raise ValueError(f"multi-index length {len(alpha)} != n={self.n}")
        flat = 0
        for a in alpha:
            if not 0 <= a < self.N:
                raise ValueError(f"index {a} outside [0, {self.N})")
            flat = flat * self.N + a
        return flat


def build_context(n: int, N: int, L_xi: float, points: int) -> HermiteContext:
    """Construct the Hermite arena, validating capacity and resolution.

    The grid must contain the classically allowed region of the highest
    retained basis function (|xi| <= sqrt(2N+1)), otherwise the sampled
    basis is not faithful and construction fails.
    """
    if n < 1:
        raise DomainError(f"dimension n={n} must be >= 1")
    if N < 4:
        raise GridError(f"truncation N={N} must be >= 4")
    if points < 8:
        raise GridError(f"points={points} must be >= 8")
    if L_xi <= 0:
        raise GridError(f"L_xi={L_xi} must be positive")
    needed = math.sqrt(2 * N + 1) + 2.0
    if L_xi < needed:
        raise CapacityError(
            f"L_xi={L_xi} too small for N={N}: need at least sqrt(2N+1)+2={needed:.3f} "
            "(classically allowed region plus tail margin)"
        )
    if points < 2 * L_xi / 0.5:
        raise GridError(
            f"points={points} under-resolves the grid: need >= {2 * L_xi / 0.5:.0f} "
            f"for L_xi={L_xi}"
        )
    h = 2.0 * L_xi / points
    xi = -L_xi + h * np.arange(points)
    samples = hermite_samples(xi, N)
    norms = np.sqrt(np.sum(samples**2, axis=1) * h)
    defect = np.max(np.abs(norms - 1.0))
    if defect > 1e-6:
        raise CapacityError(
            f"sampled basis not unit-normalised under trapezoid quadrature "
            f"(worst defect {defect:.2e}); widen L_xi or refine the grid"
        )
    return HermiteContext(n, N, L_xi, points, _freeze(xi), _freeze(samples))


@dataclass(frozen=True)
class OperatorMatrix:
    """Complex square matrix in the truncated Hermite basis.

    ``margin`` counts contaminated top levels per coordinate: assertions
    about operator identities are only meaningful on multi-indices with
    every coordinate < N - 1 - margin.
    """

    ctx: HermiteContext
    entries: np.ndarray = field(repr=False, compare=False)
    margin: int = 0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (self.ctx.dim, self.ctx.dim):
            raise ValueError(f"entries shape {e.shape} != {(self.ctx.dim,) * 2}")
        if not np.all(np.isfinite(e)):
            raise ValueError("non-finite matrix entries")
        object.__setattr__(self, "entries", _freeze(e))

    def _like(self, entries: np.ndarray, margin: int | None = None) -> "OperatorMatrix":
        return OperatorMatrix(self.ctx, entries, self.margin if margin is None else margin)

    def _check(self, other: "OperatorMatrix") -> None:
        if other.ctx.cache_key != self.ctx.cache_key:
            raise ValueError("operator matrices live on different contexts")

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._like(self.entries + other.entries, max(self.margin, other.margin))

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._like(self.entries - other.entries, max(self.margin, other.margin))

    def __mul__(self, c: complex) -> "OperatorMatrix":
        return self._like(np.asarray(c) * self.entries)

    __rmul__ = __mul__

    def __neg__(self) -> "OperatorMatrix":
        return self._like(-self.entries)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._like(self.entries @ other.entries, max(self.margin, other.margin))

    def commutator(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        e = self.entries @ other.entries - other.entries @ self.entries
        return self._like(e, max(self.margin, other.margin))

    def dagger(self) -> "OperatorMatrix":
        return self._like(self.entries.conj().T)

    def conj(self) -> "OperatorMatrix":
        return self._like(self.entries.conj())

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def with_margin(self, margin: int) -> "OperatorMatrix":
        return replace(self, margin=margin)

    def interior_mask(self, extra: int = 0) -> np.ndarray:
        """Boolean mask of flat indices with all coordinates interior."""
        ctx = self.ctx
        cut = ctx.N - 1 - self.margin - extra
        if cut < 0:
            raise TruncationError("margin exhausted: no interior indices remain")
        if ctx.n == 1:
            return np.arange(ctx.N) <= cut
        ok = np.ones(ctx.dim, dtype=bool)
        for j in range(ctx.n):
            coord = (np.arange(ctx.dim) // ctx.N ** (ctx.n - 1 - j)) % ctx.N
            ok &= coord <= cut
        return ok

    def interior_view(self, extra: int = 0) -> np.ndarray:
        """Entries restricted (both ways) to interior indices."""
        mask = self.interior_mask(extra)
        return self.entries[np.ix_(mask, mask)]


def interior_residual(a: OperatorMatrix, b: OperatorMatrix, extra: int = 0) -> float:
    """Max-abs difference of two operators on their common interior."""
    m = OperatorMatrix(a.ctx, a.entries - b.entries, max(a.margin, b.margin))
    view = m.interior_view(extra)
    return float(np.max(np.abs(view))) if view.size else 0.0


def _kron_ladder(ctx: HermiteContext, j: int, one_d: np.ndarray) -> np.ndarray:
    if not 1 <= j <= ctx.n:
        raise ValueError(f"coordinate j={j} outside 1..{ctx.n}")
    if ctx.n == 1:
        return one_d
    mats = [np.eye(ctx.N)] * ctx.n
    mats[j - 1] = one_d
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def annihilation(ctx: HermiteContext, j: int = 1) -> OperatorMatrix:
    """Lowering operator d/dx_j + x_j: maps h_alpha to sqrt(2 alpha_j) h_{alpha-e_j}."""
    a = np.zeros((ctx.N, ctx.N))
    ks = np.arange(1, ctx.N)
    a[ks - 1, ks] = np.sqrt(2.0 * ks)
    return OperatorMatrix(ctx, _kron_ladder(ctx, j, a))


def creation(ctx: HermiteContext, j: int = 1) -> OperatorMatrix:
    """Raising operator -d/dx_j + x_j in the truncated basis.

    The transition out of the top retained level is dropped, so products
    involving this matrix are contaminated on the top level (margin 1 in
    derived identities).
    """
    return annihilation(ctx, j).dagger()


def identity(ctx: HermiteContext) -> OperatorMatrix:
    return OperatorMatrix(ctx, np.eye(ctx.dim))


def hermite_operator(ctx: HermiteContext) -> OperatorMatrix:
    """Oscillator Hamiltonian: diagonal with entries 2|alpha| + n."""
    return OperatorMatrix(ctx, np.diag(2.0 * ctx.levels + ctx.n).astype(complex))


def projection(ctx: HermiteContext, j: int) -> OperatorMatrix:
    """Projection onto the eigenspace of eigenvalue 2j + n."""
    if j < 0:
        raise DomainError(f"eigenlevel j={j} must be >= 0")
    if 2 * j + ctx.n >= 2 * ctx.N + ctx.n:
        raise TruncationError(f"eigenlevel j={j} outside truncation (j < N={ctx.N})")
    d = (ctx.levels == j).astype(complex)
    return OperatorMatrix(ctx, np.diag(d))


def dyadic_block_levels(ctx: HermiteContext, k: int) -> np.ndarray:
    """Eigenlevels j with 2j + n in [2**(k-1), 2**k)."""
    js = np.arange(ctx.n * (ctx.N - 1) + 1)
    eig = 2 * js + ctx.n
    return js[(eig >= 2 ** (k - 1)) & (eig < 2**k)]


def max_dyadic_index(ctx: HermiteContext, margin: int = 0) -> int:
    """Largest k whose dyadic block lies fully inside the (margin-reduced) truncation."""
    top = 2 * (ctx.N - 1 - margin) + ctx.n
    k = 1
    while 2 ** (k + 1) <= top:
        k += 1
    return k


def dyadic_projection(ctx: HermiteContext, k: int) -> OperatorMatrix:
    """Sum of level projections with eigenvalue 2j+n in [2**(k-1), 2**k)."""
    if k < 1:
        raise DomainError(f"dyadic index k={k} must be >= 1")
    if 2**k > 2 * (ctx.N - 1) + ctx.n:
        raise TruncationError(
            f"dyadic block [2**{k - 1}, 2**{k}) exceeds the truncated spectrum "
            f"(top eigenvalue {2 * (ctx.N - 1) + ctx.n})"
        )
    levels = ctx.levels
    eig = 2 * levels + ctx.n
    d = ((eig >= 2 ** (k - 1)) & (eig < 2**k)).astype(complex)
    return OperatorMatrix(ctx, np.diag(d))


def spectral_function(
    ctx: HermiteContext,
    phi: Callable[[np.ndarray], np.ndarray],
    shift: float = 0.0,
) -> OperatorMatrix:
    """Diagonal functional calculus phi(H + shift) with pseudo-inverse convention.

    Eigenvalues 2|alpha| + n + shift that are <= 0 are mapped to 0; phi is
    only evaluated on the positive part and must be finite there.
    """
    eig = 2.0 * ctx.levels + ctx.n + shift
    pos = eig > 0
    vals = np.zeros(ctx.dim, dtype=complex)
    if np.any(pos):
        out = np.asarray(phi(eig[pos]), dtype=complex)
        if out.shape != eig[pos].shape:
            out = np.broadcast_to(out, eig[pos].shape)
        if not np.all(np.isfinite(out)):
            bad = eig[pos][~np.isfinite(out)]
            raise DomainError(f"phi evaluates non-finite on positive eigenvalues {bad[:4]}")
        vals[pos] = out
    return OperatorMatrix(ctx, np.diag(vals))


@dataclass(frozen=True)
class ScaledOperators:
    """Ladder and oscillator matrices in the lambda-scaled basis.

    The scaled basis is h_alpha^lam(x) = |lam|**(n/4) h_alpha(sqrt|lam| x);
    in that basis the matrices are plain scalar multiples of the lam=1 ones.
    """

    lam: float
    annihilation: tuple[OperatorMatrix, ...]
    creation: tuple[OperatorMatrix, ...]
    hermite: OperatorMatrix
    basis: str = "lambda-scaled-hermite"


def scaled_operators(ctx: HermiteContext, lam: float) -> ScaledOperators:
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    s = math.sqrt(abs(lam))
    ann = tuple(s * annihilation(ctx, j) for j in range(1, ctx.n + 1))
    cre = tuple(s * creation(ctx, j) for j in range(1, ctx.n + 1))
    return ScaledOperators(lam, ann, cre, abs(lam) * hermite_operator(ctx))
