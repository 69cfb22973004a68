"""Container formats for operators, grid functions and the point-matrix cache.

Layout (all files): an 8-byte ASCII magic, one UTF-8 JSON header line
terminated by a newline, then the raw payload as little-endian IEEE-754
complex128 in C (row-major) order.  The header carries the shape and the
defining parameters; loaders validate magic, shape and byte count, so a
round trip is bit exact.

Magics:
    WEYLOPM1  operator matrix   header {n, N, order, shape}
    WEYLPGF1  phase grid fn     header {n, L_z, m_pts, shape}
    WEYLHGF1  central grid fn   header {n, L_z, m_pts, L_t, t_pts, shape}
    WEYLWMC1  point-matrix cache header {ctx, grid, lam, shape}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SerializationError
from .hermite import MULTI_INDEX_ORDER, HermiteContext, OperatorMatrix
from .weyl import GridSpec, PhaseGridFunction, WeylEngine

__all__ = [
    "save_operator",
    "load_operator",
    "save_grid_function",
    "load_grid_function",
    "save_heisenberg_function",
    "load_heisenberg_function",
    "save_engine_cache",
    "load_engine_cache",
]

_MAGIC_OP = b"WEYLOPM1"
_MAGIC_PGF = b"WEYLPGF1"
_MAGIC_HGF = b"WEYLHGF1"
_MAGIC_WMC = b"WEYLWMC1"


def _write(path: Path, magic: bytes, header: dict, payload: np.ndarray) -> None:
    data = np.ascontiguousarray(payload, dtype="<c16")
    header = dict(header, shape=list(data.shape))
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(data.tobytes())


def _read(path: Path, magic: bytes) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        got = fh.read(8)
        if got != magic:
            raise SerializationError(f"{path}: magic {got!r} != {magic!r}")
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SerializationError(f"{path}: bad header ({exc})") from exc
        shape = tuple(header.get("shape", ()))
        raw = fh.read()
    expected = int(np.prod(shape)) * 16 if shape else 0
    if len(raw) != expected:
        raise SerializationError(
            f"{path}: payload {len(raw)} bytes, header promises {expected}"
        )
    data = np.frombuffer(raw, dtype="<c16").reshape(shape)
    return header, data


def save_operator(path: str | Path, m: OperatorMatrix) -> None:
    header = {
        "kind": "operator",
        "n": m.ctx.n,
        "N": m.ctx.N,
        "order": MULTI_INDEX_ORDER,
        "margin": m.margin,
    }
    _write(Path(path), _MAGIC_OP, header, m.entries)


def load_operator(path: str | Path, ctx: HermiteContext) -> OperatorMatrix:
    header, data = _read(Path(path), _MAGIC_OP)
    if header.get("n") != ctx.n or header.get("N") != ctx.N:
        raise SerializationError(
            f"operator sized (n={header.get('n')}, N={header.get('N')}) does not "
            f"match context (n={ctx.n}, N={ctx.N})"
        )
    if header.get("order") != MULTI_INDEX_ORDER:
        raise SerializationError(f"unknown multi-index order {header.get('order')!r}")
    if data.shape != (ctx.dim, ctx.dim):
        raise SerializationError(f"operator shape {data.shape} != {(ctx.dim,) * 2}")
    return OperatorMatrix(ctx, data.copy(), margin=int(header.get("margin", 0)))


def save_grid_function(path: str | Path, f: PhaseGridFunction) -> None:
    header = {
        "kind": "phase-grid-function",
        "n": f.grid.n,
        "L_z": f.grid.L_z,
        "m_pts": f.grid.m_pts,
    }
    _write(Path(path), _MAGIC_PGF, header, f.values)


def load_grid_function(path: str | Path, require_positive: bool = False) -> PhaseGridFunction:
    header, data = _read(Path(path), _MAGIC_PGF)
    grid = GridSpec(int(header["n"]), float(header["L_z"]), int(header["m_pts"]))
    if data.shape != grid.shape:
        raise SerializationError(f"grid-function shape {data.shape} != {grid.shape}")
    if require_positive and (np.any(data.real <= 0) or np.any(data.imag != 0)):
        raise SerializationError("weight file must be strictly positive and real")
    return PhaseGridFunction(grid, data.copy())


def save_heisenberg_function(path: str | Path, f) -> None:
    header = {
        "kind": "heisenberg-grid-function",
        "n": f.grid.n,
        "L_z": f.grid.L_z,
        "m_pts": f.grid.m_pts,
        "L_t": f.L_t,
        "t_pts": f.t_pts,
    }
    _write(Path(path), _MAGIC_HGF, header, f.values)


def load_heisenberg_function(path: str | Path):
    from .fibers import HeisenbergGridFunction

    header, data = _read(Path(path), _MAGIC_HGF)
    grid = GridSpec(int(header["n"]), float(header["L_z"]), int(header["m_pts"]))
    return HeisenbergGridFunction(
        grid, float(header["L_t"]), int(header["t_pts"]), data.copy()
    )


def save_engine_cache(path: str | Path, eng: WeylEngine) -> None:
    if eng.cache_bytes == 0:
        raise SerializationError("engine has no materialised cache to persist")
    header = {
        "kind": "point-matrix-cache",
        "ctx": eng.ctx.cache_key,
        "grid": eng.grid.cache_key,
        "lam": eng.lam,
    }
    _write(Path(path), _MAGIC_WMC, header, eng.phi)


def load_engine_cache(path: str | Path, eng: WeylEngine) -> None:
    """Attach a persisted cache; rejected if the context or grid hash differs."""
    header, data = _read(Path(path), _MAGIC_WMC)
    if header.get("ctx") != eng.ctx.cache_key or header.get("grid") != eng.grid.cache_key:
        raise SerializationError("cache was built for a different context or grid")
    if float(header.get("lam", 1.0)) != eng.lam:
        raise SerializationError("cache was built at a different scale")
    m, N = eng.grid.m_pts, eng.ctx.N
    if data.shape != (m, m, N, N):
        raise SerializationError(f"cache shape {data.shape} != {(m, m, N, N)}")
    eng._phi = data.copy()
