"""Diamond-cubic silicon sites inside a dot's support and random isotope occupancy.

Sites live in the dot-centred frame with a lattice site at the origin.  The
enumeration order is lexicographic in (ix, iy, iz, basis) over the bounding
box of the support; that box index is also the key of the occupancy RNG, so
sampling does not depend on traversal order or on how work is partitioned.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .constants import CONSTANTS
from .isotopes import DEFAULT_REGISTRY, IsotopeRegistry, IsotopeSpec

BASIS_OFFSETS = np.array(
    [
        [0.0, 0.0, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [0.5, 0.5, 0.0],
        [0.25, 0.25, 0.25],
        [0.25, 0.75, 0.75],
        [0.75, 0.25, 0.75],
        [0.75, 0.75, 0.25],
    ]
)

DEFAULT_MAX_SITES = 10**8
# sites per RNG key; occupancy of block b depends only on (seed, stream, b, ppm)
BLOCK_SIZE = 1 << 16


class LatticeSizeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSite:
    cell_index: tuple[int, int, int]
    basis_index: int
    position: tuple[float, float, float]

    @classmethod
    def from_indices(cls, cell, basis: int, a0: float = CONSTANTS.si_lattice_const_a0):
        cell = tuple(int(c) for c in cell)
        pos = a0 * (np.asarray(cell, dtype=float) + BASIS_OFFSETS[basis])
        return cls(cell, int(basis), tuple(float(p) for p in pos))


@dataclass(frozen=True)
class SupportRegion:
    lateral_cutoff: float
    z_halfwidth: float

    @classmethod
    def for_dot(cls, r0: float, z0: float, cutoff_radii: float = 5.0) -> "SupportRegion":
        return cls(cutoff_radii * r0, z0 / 2.0)


@dataclass(frozen=True)
class _Box:
    lo: np.ndarray  # lowest cell index per axis
    shape: np.ndarray  # number of cells per axis

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.shape)) * 8

    def decode(self, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        index = np.asarray(index, dtype=np.int64)
        basis = index % 8
        cell_flat = index // 8
        nx, ny, nz = (int(s) for s in self.shape)
        iz = cell_flat % nz
        iy = (cell_flat // nz) % ny
        ix = cell_flat // (nz * ny)
        cells = np.stack([ix, iy, iz], axis=-1) + self.lo
        return cells, basis


def _bounding_box(region: SupportRegion, a0: float) -> _Box:
    L, h = region.lateral_cutoff, region.z_halfwidth
    lo = np.array([math.floor(-L / a0) - 1, math.floor(-L / a0) - 1, math.floor(-h / a0) - 1])
    hi = np.array([math.ceil(L / a0) + 1, math.ceil(L / a0) + 1, math.ceil(h / a0) + 1])
    return _Box(lo, hi - lo)


def _positions(cells: np.ndarray, basis: np.ndarray, a0: float) -> np.ndarray:
    return a0 * (cells + BASIS_OFFSETS[basis])


def _inside(pos: np.ndarray, region: SupportRegion) -> np.ndarray:
    lateral_sq = pos[..., 0] ** 2 + pos[..., 1] ** 2
    return (np.abs(pos[..., 2]) < region.z_halfwidth) & (
        lateral_sq <= region.lateral_cutoff**2
    )


def _check_region(region: SupportRegion, max_sites: int) -> None:
    if region.lateral_cutoff <= 0 or region.z_halfwidth < 0:
        raise ValueError("support cutoffs must be positive")
    a0 = CONSTANTS.si_lattice_const_a0
    volume = math.pi * region.lateral_cutoff**2 * 2 * region.z_halfwidth
    estimate = 8 * volume / a0**3
    if estimate > max_sites:
        raise LatticeSizeError(
            f"support region holds ~{estimate:.3g} sites, above the limit of {max_sites:.3g}"
        )


def site_arrays(
    region: SupportRegion,
    max_sites: int = DEFAULT_MAX_SITES,
    a0: float = CONSTANTS.si_lattice_const_a0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All sites of the region as (cells (N,3) int, basis (N,) int, positions (N,3) m)."""
    cells, basis, pos = [], [], []
    for c, b, p in _iter_slabs(region, max_sites, a0):
        cells.append(c)
        basis.append(b)
        pos.append(p)
    if not cells:
        return np.zeros((0, 3), np.int64), np.zeros(0, np.int64), np.zeros((0, 3))
    return np.concatenate(cells), np.concatenate(basis), np.concatenate(pos)


def _iter_slabs(region, max_sites, a0):
    """Yield the region's sites one ix-slab at a time, in enumeration order."""
    _check_region(region, max_sites)
    if region.z_halfwidth == 0:
        return
    box = _bounding_box(region, a0)
    nx, ny, nz = (int(s) for s in box.shape)
    iy, iz, b = np.meshgrid(np.arange(ny), np.arange(nz), np.arange(8), indexing="ij")
    iy, iz, b = iy.ravel(), iz.ravel(), b.ravel()
    for ix in range(nx):
        cells = np.stack([np.full_like(iy, ix), iy, iz], axis=1) + box.lo
        pos = _positions(cells, b, a0)
        keep = _inside(pos, region)
        if keep.any():
            yield cells[keep], b[keep], pos[keep]


def iter_site_chunks(region: SupportRegion, max_sites: int = DEFAULT_MAX_SITES):
    """Chunked form of :func:`enumerate_sites` for vectorised consumers."""
    yield from _iter_slabs(region, max_sites, CONSTANTS.si_lattice_const_a0)


def enumerate_sites(
    region: SupportRegion, max_sites: int = DEFAULT_MAX_SITES
) -> Iterator[LatticeSite]:
    for cells, basis, pos in iter_site_chunks(region, max_sites):
        for c, b, p in zip(cells, basis, pos):
            yield LatticeSite(tuple(int(v) for v in c), int(b), tuple(float(v) for v in p))


# ---------------------------------------------------------------- occupancy


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, block])))


def _occupied_box_indices(box: _Box, p: float, seed: int, stream: int) -> np.ndarray:
    """Box-linear indices of occupied sites; each site independently with probability p."""
    n = box.n_sites
    if p <= 0.0:
        return np.zeros(0, np.int64)
    if p >= 1.0:
        return np.arange(n, dtype=np.int64)
    out = []
    for block in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE):
        start = block * BLOCK_SIZE
        size = min(BLOCK_SIZE, n - start)
        rng = _block_rng(seed, stream, block)
        # Binomial count + uniform subset is exactly i.i.d. Bernoulli(p) per site.
        k = rng.binomial(size, p)
        if k:
            picks = rng.choice(size, size=k, replace=False)
            picks.sort()
            out.append(picks.astype(np.int64) + start)
    if not out:
        return np.zeros(0, np.int64)
    return np.concatenate(out)


@dataclass(frozen=True, eq=False)
class BathRealization:
    """Occupied spin-carrying sites; arrays are aligned row by row."""

    cells: np.ndarray
    basis: np.ndarray
    positions: np.ndarray
    isotope: IsotopeSpec
    seed: int
    ppm: float
    stream: int = 0

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def sites(self) -> list[tuple[LatticeSite, IsotopeSpec]]:
        return [
            (LatticeSite(tuple(int(v) for v in c), int(b), tuple(float(v) for v in p)), self.isotope)
            for c, b, p in zip(self.cells, self.basis, self.positions)
        ]

    def __eq__(self, other):
        if not isinstance(other, BathRealization):
            return NotImplemented
        return (
            self.isotope.symbol == other.isotope.symbol
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.basis, other.basis)
            and np.array_equal(self.positions, other.positions)
        )


def sample_occupancy(
    region: SupportRegion,
    isotope: IsotopeSpec,
    ppm: float,
    seed: int,
    stream: int = 0,
    max_sites: int = DEFAULT_MAX_SITES,
) -> BathRealization:
    if not 0 <= ppm <= 1e6:
        raise ValueError(f"ppm must lie in [0, 1e6], got {ppm}")
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative integers")
    _check_region(region, max_sites)
    a0 = CONSTANTS.si_lattice_const_a0
    box = _bounding_box(region, a0)
    empty = BathRealization(
        np.zeros((0, 3), np.int64), np.zeros(0, np.int64), np.zeros((0, 3)), isotope, seed, ppm, stream
    )
    if region.z_halfwidth == 0:
        return empty
    idx = _occupied_box_indices(box, ppm * 1e-6, seed, stream)
    cells, basis = box.decode(idx)
    pos = _positions(cells, basis, a0)
    keep = _inside(pos, region)
    return BathRealization(cells[keep], basis[keep], pos[keep], isotope, seed, ppm, stream)


# ---------------------------------------------------------------- CSV fixtures


def write_bath_csv(bath: BathRealization, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_nm", "y_nm", "z_nm", "isotope"])
        for p in bath.positions:
            w.writerow([repr(float(v * 1e9)) for v in p] + [bath.isotope.symbol])


def read_bath_csv(
    path: str | Path, registry: IsotopeRegistry = DEFAULT_REGISTRY, seed: int = 0, ppm: float = float("nan")
) -> BathRealization:
    a0 = CONSTANTS.si_lattice_const_a0
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    symbols = {r["isotope"] for r in rows}
    if len(symbols) > 1:
        raise ValueError(f"mixed-isotope bath files are not supported: {sorted(symbols)}")
    isotope = registry[symbols.pop()] if symbols else registry["29Si"]
    nm = np.array([[float(r["x_nm"]), float(r["y_nm"]), float(r["z_nm"])] for r in rows]).reshape(-1, 3)
    quarter = np.rint(nm * 1e-9 / a0 * 4).astype(np.int64)
    cells = np.floor_divide(quarter, 4)
    frac = (quarter - 4 * cells) / 4.0
    basis = np.array(
        [int(np.flatnonzero(np.all(BASIS_OFFSETS == f, axis=1))[0]) for f in frac], dtype=np.int64
    )
    return BathRealization(cells, basis, _positions(cells, basis, a0), isotope, seed, ppm)
