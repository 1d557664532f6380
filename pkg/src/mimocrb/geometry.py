"""Receive antenna-array geometries: uniform linear, circular, and cylindrical.

All coordinates are stored in units of the carrier wavelength, so a
propagation phase is simply 2*pi times a projected coordinate and no
carrier frequency needs to be carried around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidGeometryError


class ArrayKind(str, Enum):
    ULA = "ULA"
    UCA = "UCA"
    UCYA = "UCyA"


@dataclass(frozen=True)
class ArrayGeometry:
    """An immutable receive array.

    positions holds one (x, y, z) row per element, in wavelengths.
    For cylindrical arrays, elements are ordered layer-major: all
    elements of the z = 0 ring first, then the next layer, and so on.
    """

    kind: ArrayKind
    positions: np.ndarray
    spacing_2d: float
    spacing_3d: float | None = None
    ring_size: int | None = None
    layer_count: int | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise InvalidGeometryError(
                f"positions must be an (n, 3) array with n >= 1, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise InvalidGeometryError("element coordinates must be finite")
        # No two elements may coincide.
        if pos.shape[0] > 1:
            diffs = pos[:, None, :] - pos[None, :, :]
            dist = np.linalg.norm(diffs, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if dist.min() < 1e-12:
                raise InvalidGeometryError("two array elements share a position")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def num_elements(self) -> int:
        return self.positions.shape[0]


def uca_radius(ring_size: int, spacing_2d: float) -> float:
    """Radius of a uniform circular array with the given inter-element spacing.

    Adjacent ring elements sit on a chord of length spacing_2d, so
    R = (spacing_2d / 2) / sin(pi / ring_size).
    """
    if ring_size < 2:
        raise InvalidGeometryError(
            f"a circular ring needs at least 2 elements, got {ring_size}")
    if spacing_2d <= 0:
        raise InvalidGeometryError(f"spacing must be positive, got {spacing_2d}")
    return 0.5 * spacing_2d / np.sin(np.pi / ring_size)


def build_ula(n: int, spacing_2d: float) -> ArrayGeometry:
    """Uniform linear array along x: element p sits at (p * spacing, 0, 0)."""
    if n < 1:
        raise InvalidGeometryError(f"array needs at least 1 element, got {n}")
    if spacing_2d <= 0:
        raise InvalidGeometryError(f"spacing must be positive, got {spacing_2d}")
    pos = np.zeros((n, 3))
    pos[:, 0] = np.arange(n) * spacing_2d
    return ArrayGeometry(kind=ArrayKind.ULA, positions=pos, spacing_2d=spacing_2d)


def build_ucya(ring_size: int, layer_count: int, spacing_2d: float,
               spacing_3d: float) -> ArrayGeometry:
    """Uniform cylindrical array: layer_count stacked rings of ring_size elements.

    Element (n_ring, n_layer) sits at
        x = R * sin(n_ring * 2 pi / ring_size)
        y = R * cos(n_ring * 2 pi / ring_size)
        z = n_layer * spacing_3d
    with R = uca_radius(ring_size, spacing_2d). Ordering is layer-major
    (full ring at z = 0 first), ring index increasing within a layer.
    """
    if ring_size < 2:
        raise InvalidGeometryError(
            f"ring needs at least 2 elements, got {ring_size}")
    if layer_count < 1:
        raise InvalidGeometryError(
            f"need at least 1 layer, got {layer_count}")
    if spacing_2d <= 0 or spacing_3d <= 0:
        raise InvalidGeometryError("spacings must be positive")
    radius = uca_radius(ring_size, spacing_2d)
    angles = np.arange(ring_size) * (2.0 * np.pi / ring_size)
    ring = np.column_stack([radius * np.sin(angles),
                            radius * np.cos(angles),
                            np.zeros(ring_size)])
    layers = [ring + np.array([0.0, 0.0, k * spacing_3d]) for k in range(layer_count)]
    return ArrayGeometry(kind=ArrayKind.UCYA, positions=np.vstack(layers),
                         spacing_2d=spacing_2d, spacing_3d=spacing_3d,
                         ring_size=ring_size, layer_count=layer_count)


def build_uca(ring_size: int, spacing_2d: float) -> ArrayGeometry:
    """Single-ring convenience wrapper over build_ucya."""
    geom = build_ucya(ring_size, 1, spacing_2d, spacing_2d)
    return ArrayGeometry(kind=ArrayKind.UCA, positions=geom.positions,
                         spacing_2d=spacing_2d, spacing_3d=None,
                         ring_size=ring_size, layer_count=1)


def geometry_csv_rows(geom: ArrayGeometry):
    """Yield (element_index, x, y, z) rows for CSV export."""
    for idx, (x, y, z) in enumerate(geom.positions):
        yield idx, float(x), float(y), float(z)
