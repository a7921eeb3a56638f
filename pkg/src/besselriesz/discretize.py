"""Midpoint tensor grids and symmetric Nystrom assembly of two-point kernels.

Matrices carry their grid and measure convention with them; the symmetric
sqrt(cell * measure) normalization makes matrix singular values direct
approximations of operator singular values on the corresponding L2 space.
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

NODE_CAP = 2**14
_MAGIC = b"BRSL"
_VERSION = 1


@dataclass(frozen=True)
class BoxGrid:
    bounds: tuple  # ((a_1, b_1), ..., (a_dim, b_dim))
    points_per_dim: tuple
    nodes: np.ndarray  # (N, dim), lexicographic order
    cell_weights: np.ndarray  # (N,)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def cell_widths(self) -> np.ndarray:
        return np.array([(b - a) / m for (a, b), m in zip(self.bounds, self.points_per_dim)])

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.bounds]))


def make_grid(bounds, points_per_dim, node_cap: int = NODE_CAP, halfspace: bool = False) -> BoxGrid:
    """Midpoint-rule tensor grid with deterministic lexicographic node order.

    With ``halfspace`` the lower bound of the last coordinate must be positive
    (box compactly inside the upper half-space).
    """
    bounds = tuple((float(a), float(b)) for a, b in bounds)
    if np.isscalar(points_per_dim):
        points_per_dim = (int(points_per_dim),) * len(bounds)
    points_per_dim = tuple(int(m) for m in points_per_dim)
    if len(points_per_dim) != len(bounds):
        raise ValueError("points_per_dim must match the number of bounds")
    for (a, b), m in zip(bounds, points_per_dim):
        if not b > a:
            raise ValueError(f"degenerate interval [{a}, {b}]")
        if m < 1:
            raise ValueError("points_per_dim entries must be >= 1")
    if halfspace and bounds[-1][0] <= 0:
        raise ValueError("half-space box requires a positive lower bound in the last coordinate")
    total = int(np.prod(points_per_dim))
    if total > node_cap:
        raise ValueError(f"grid of {total} nodes exceeds the cap {node_cap}")

    axes = [
        a + (b - a) * (np.arange(m) + 0.5) / m
        for (a, b), m in zip(bounds, points_per_dim)
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    cell = np.prod([(b - a) / m for (a, b), m in zip(bounds, points_per_dim)])
    weights = np.full(total, cell)
    return BoxGrid(bounds=bounds, points_per_dim=points_per_dim, nodes=nodes, cell_weights=weights)


@dataclass
class OperatorMatrix:
    entries: np.ndarray
    grid: BoxGrid
    space_tag: str  # "weighted" | "unweighted"
    measure_exponent: float  # 2*lam for the weighted space, 0 otherwise
    diagonal_bias: float = 0.0

    def __post_init__(self):
        if self.space_tag not in ("weighted", "unweighted"):
            raise ValueError(f"unknown space_tag {self.space_tag!r}")
        if self.entries.shape != (len(self.grid.nodes),) * 2:
            raise ValueError("entries shape does not match the grid")


def _measure_density(grid: BoxGrid, space_tag: str, measure_exponent: float) -> np.ndarray:
    if space_tag == "weighted":
        return grid.nodes[:, -1] ** measure_exponent
    return np.ones(len(grid.nodes))


def assemble(
    kernel,
    grid: BoxGrid,
    space_tag: str = "weighted",
    lam: float | None = None,
    threads: int = 1,
    row_block: int = 256,
    estimate_diagonal_bias: bool = True,
    zero_diagonal: bool = True,
) -> OperatorMatrix:
    """Symmetric Nystrom matrix A_ij = kernel(x_i, x_j) sqrt(w_i mu_i w_j mu_j).

    The kernel must broadcast over point arrays of shape (..., dim).  Diagonal
    entries are zeroed by default (commutator-type kernels are odd to leading
    order, so zeroing is unbiased); pass ``zero_diagonal=False`` for kernels
    that are smooth across the diagonal.  ``diagonal_bias`` reports a crude
    cell-local scale of the omitted entries.  Entries are independent, so the
    result is identical for any ``threads``.
    """
    if space_tag == "weighted":
        if lam is None:
            raise ValueError("weighted assembly requires lam")
        measure_exponent = 2.0 * lam
    else:
        measure_exponent = 0.0
    nodes = grid.nodes
    N = len(nodes)
    norm = np.sqrt(grid.cell_weights * _measure_density(grid, space_tag, measure_exponent))
    out = np.empty((N, N))

    def fill(block):
        lo, hi = block
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = kernel(nodes[lo:hi, None, :], nodes[None, :, :])
        out[lo:hi, :] = vals

    blocks = [(lo, min(lo + row_block, N)) for lo in range(0, N, row_block)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)

    idx = np.arange(N)
    if zero_diagonal:
        out[idx, idx] = 0.0
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise FloatingPointError(
            f"kernel evaluation not finite at node pair {tuple(bad)}: "
            f"x={nodes[bad[0]]}, y={nodes[bad[1]]}"
        )
    out *= norm[:, None]
    out *= norm[None, :]

    bias = 0.0
    if estimate_diagonal_bias and zero_diagonal:
        sample = idx if N <= 1024 else idx[:: max(1, N // 1024)]
        h = grid.cell_widths.min()
        probes = []
        for axis in range(min(grid.dim, 2)):
            e = np.zeros(grid.dim)
            e[axis] = 0.25 * h
            probes.extend([e, -e])
        vals = np.zeros(len(sample))
        for e in probes:
            vals += np.abs(kernel(nodes[sample], nodes[sample] + e))
        vals /= len(probes)
        bias = float(np.max(vals * norm[sample] ** 2))

    return OperatorMatrix(
        entries=out, grid=grid, space_tag=space_tag,
        measure_exponent=measure_exponent, diagonal_bias=bias,
    )


def conjugate_weight(A: OperatorMatrix, direction: str = "to_unweighted") -> OperatorMatrix:
    """Discrete unitary switch between the weighted and unweighted conventions.

    The kernel conjugation factor (x_i/x_j)^(+-lam) and the compensating
    measure re-normalization (x_i x_j)^(-+lam) are applied literally; their
    product is 1 up to rounding, which is exactly the discrete statement that
    the conjugation is unitary and leaves all singular values unchanged.
    """
    lam = A.measure_exponent / 2.0
    if direction not in ("to_unweighted", "to_weighted"):
        raise ValueError(f"unknown direction {direction!r}")
    if direction == "to_unweighted" and A.space_tag != "weighted":
        raise ValueError("matrix is not in the weighted convention")
    if direction == "to_weighted" and A.space_tag != "unweighted":
        raise ValueError("matrix is not in the unweighted convention")
    xlam = A.grid.nodes[:, -1] ** lam
    conj = np.outer(xlam, 1.0 / xlam)
    compensation = np.outer(1.0 / xlam, xlam)
    entries = A.entries * conj * compensation
    tag = "unweighted" if direction == "to_unweighted" else "weighted"
    return replace(A, entries=entries, space_tag=tag)


def schur_apply(symbol, A: OperatorMatrix) -> OperatorMatrix:
    """Entrywise product B_ij = symbol(x_i, x_j) * A_ij; Nystrom weights untouched."""
    nodes = A.grid.nodes
    with np.errstate(divide="ignore", invalid="ignore"):
        M = symbol(nodes[:, None, :], nodes[None, :, :])
    M = np.asarray(M, dtype=float)
    idx = np.arange(len(nodes))
    M[idx, idx] = np.nan_to_num(M[idx, idx])
    return replace(A, entries=A.entries * M)


def save_matrix(A: OperatorMatrix, path) -> None:
    """Binary export: magic 'BRSL', version, dimension, space tag, then the
    entries as column-major float64.  A CSV sidecar carries grid metadata."""
    path = Path(path)
    N = len(A.grid.nodes)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, N))
        fh.write(struct.pack("<B", 1 if A.space_tag == "weighted" else 0))
        fh.write(np.asfortranarray(A.entries).tobytes(order="F"))
    with open(path.with_suffix(path.suffix + ".meta.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "value"])
        w.writerow(["dimension", N])
        w.writerow(["space_tag", A.space_tag])
        w.writerow(["measure_exponent", repr(A.measure_exponent)])
        w.writerow(["diagonal_bias", repr(A.diagonal_bias)])
        w.writerow(["bounds", ";".join(f"{a},{b}" for a, b in A.grid.bounds)])
        w.writerow(["points_per_dim", ";".join(str(m) for m in A.grid.points_per_dim)])


def load_matrix(path) -> tuple[np.ndarray, str]:
    """Read back a matrix written by ``save_matrix``; returns (entries, space_tag)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        version, N = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported version {version}")
        (tag,) = struct.unpack("<B", fh.read(1))
        data = np.frombuffer(fh.read(8 * N * N), dtype="<f8")
    entries = data.reshape((N, N), order="F").copy()
    return entries, "weighted" if tag else "unweighted"
