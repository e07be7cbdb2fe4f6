"""Grid partitioning into 4**d blocks, with edge-replication padding."""

from __future__ import annotations

import numpy as np


class GridShapeError(ValueError):
    """Grid dims are empty, non-positive, or inconsistent with the data."""


def block_count(dims: tuple[int, ...]) -> int:
    n = 1
    for size in dims:
        n *= (size + 3) // 4
    return n


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(n) for n in dims)
    if not dims:
        raise GridShapeError("dims must name at least one axis")
    if any(n < 1 for n in dims):
        raise GridShapeError(f"dims must be positive, got {dims}")
    return dims


def partition(grid: np.ndarray) -> list[tuple[float, ...]]:
    """Split a d-dimensional array into flattened 4**d blocks.

    Axes whose extent is not a multiple of 4 are padded by replicating the
    final slice, so padded entries always equal a real neighbour.  Blocks
    are emitted in lexicographic order of their block coordinates, each
    flattened row-major.
    """
    grid = np.asarray(grid, dtype=np.float64)
    dims = _check_dims(grid.shape)
    if grid.size == 0:
        raise GridShapeError("empty grid")
    pad = [(0, (-n) % 4) for n in dims]
    if any(p for _, p in pad):
        grid = np.pad(grid, pad, mode="edge")
    d = len(dims)
    nblk = [s // 4 for s in grid.shape]
    blocks = []
    for bidx in np.ndindex(*nblk):
        sl = tuple(slice(4 * b, 4 * b + 4) for b in bidx)
        blocks.append(tuple(grid[sl].reshape(4 ** d).tolist()))
    return blocks


def unpartition(blocks, dims) -> np.ndarray:
    """Reassemble blocks produced by :func:`partition` and strip padding."""
    dims = _check_dims(dims)
    d = len(dims)
    padded = tuple(((n + 3) // 4) * 4 for n in dims)
    nblk = [s // 4 for s in padded]
    expected = 1
    for b in nblk:
        expected *= b
    blocks = list(blocks)
    if len(blocks) != expected:
        raise GridShapeError(f"expected {expected} blocks for dims {dims}, got {len(blocks)}")
    grid = np.empty(padded, dtype=np.float64)
    shape4 = (4,) * d
    for bidx, blk in zip(np.ndindex(*nblk), blocks):
        sl = tuple(slice(4 * b, 4 * b + 4) for b in bidx)
        grid[sl] = np.asarray(blk, dtype=np.float64).reshape(shape4)
    return grid[tuple(slice(0, n) for n in dims)]
