"""Multipath channel model: per-path gains and arrival angles turned into
the stacked complex channel vector seen by a receive array.

Each transmit antenna j reaches the receiver over L specular paths with
complex gain beta[l, j] and direction of arrival (zenith[l, j],
azimuth[l, j]). The channel coefficient between transmit antenna j and
receive element r is

    h[r, j] = sum_l beta[l, j] * exp(-i * 2 pi * s(zenith, azimuth; r))

where s is the projection of element r's position (in wavelengths) onto
the arrival unit vector. The full channel vector stacks receive antennas
first: entry r * num_tx + j is h[r, j].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .geometry import ArrayGeometry

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PathParameterSet:
    """Per-(path, transmit antenna) gains and arrival angles.

    gains is complex with shape (num_paths, num_tx); zeniths and azimuths
    are real, in radians, with the same shape.
    """

    gains: np.ndarray
    zeniths: np.ndarray
    azimuths: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        zeniths = np.asarray(self.zeniths, dtype=float)
        azimuths = np.asarray(self.azimuths, dtype=float)
        if gains.ndim != 2:
            raise ShapeError(f"gains must be 2-D (paths x tx), got {gains.shape}")
        if zeniths.shape != gains.shape or azimuths.shape != gains.shape:
            raise ShapeError(
                "gains, zeniths and azimuths must share one (paths x tx) shape, "
                f"got {gains.shape}, {zeniths.shape}, {azimuths.shape}")
        for name, arr in (("gains", gains), ("zeniths", zeniths), ("azimuths", azimuths)):
            if not np.all(np.isfinite(arr)):
                raise ShapeError(f"{name} must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "zeniths", zeniths)
        object.__setattr__(self, "azimuths", azimuths)

    @property
    def num_paths(self) -> int:
        return self.gains.shape[0]

    @property
    def num_tx(self) -> int:
        return self.gains.shape[1]


def steering_phase(zenith, azimuth, position):
    """Projected path length (in wavelengths) of an element position onto the
    arrival direction.

    Accepts scalars or broadcastable arrays for the angles; position is one
    (x, y, z) triple. Returns sin(z)cos(a)*x + sin(z)sin(a)*y + cos(z)*z.
    """
    x, y, z = (float(position[0]), float(position[1]), float(position[2]))
    zenith = np.asarray(zenith, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    out = (np.sin(zenith) * np.cos(azimuth) * x
           + np.sin(zenith) * np.sin(azimuth) * y
           + np.cos(zenith) * z)
    return out if out.ndim else float(out)


def channel_coefficient(params: PathParameterSet, tx_index: int, position) -> complex:
    """Channel coefficient for one transmit antenna at one receive position."""
    if not 0 <= tx_index < params.num_tx:
        raise IndexError(
            f"tx_index {tx_index} out of range for {params.num_tx} transmit antennas")
    phases = steering_phase(params.zeniths[:, tx_index],
                            params.azimuths[:, tx_index], position)
    return complex(np.sum(params.gains[:, tx_index] * np.exp(-1j * TWO_PI * phases)))


def steering_phase_table(params: PathParameterSet, geometry: ArrayGeometry) -> np.ndarray:
    """Projected path lengths for every (path, tx, element), shape (L, Nt, Nr)."""
    pos = geometry.positions
    sx = np.sin(params.zeniths) * np.cos(params.azimuths)
    sy = np.sin(params.zeniths) * np.sin(params.azimuths)
    sz = np.cos(params.zeniths)
    return (sx[..., None] * pos[:, 0] + sy[..., None] * pos[:, 1]
            + sz[..., None] * pos[:, 2])


def channel_matrix(params: PathParameterSet, geometry: ArrayGeometry) -> np.ndarray:
    """Channel as an (num_elements, num_tx) matrix; row r is receive element r."""
    phases = steering_phase_table(params, geometry)
    return np.einsum("lj,ljr->rj", params.gains, np.exp(-1j * TWO_PI * phases))


def assemble_channel(params: PathParameterSet, geometry: ArrayGeometry) -> np.ndarray:
    """Stacked channel vector of length num_tx * num_elements.

    Entry r * num_tx + j is the coefficient between transmit antenna j and
    receive element r.
    """
    return channel_matrix(params, geometry).reshape(-1)


def draw_path_parameters(rng: np.random.Generator, num_paths: int, num_tx: int,
                         angle_unit: str = "radians") -> PathParameterSet:
    """Sample a random parameter set from the simulation priors.

    Gains are i.i.d. circular complex Gaussian with unit variance. Angles
    are i.i.d. uniform on (-pi/2, pi/2); with angle_unit="degrees" the same
    interval is read in degrees and converted to radians.

    The draw order (gain real parts, gain imaginary parts, zeniths,
    azimuths) is fixed so a seeded generator reproduces parameter sets.
    """
    if num_paths < 1 or num_tx < 1:
        raise ShapeError("need at least one path and one transmit antenna")
    if angle_unit not in ("radians", "degrees"):
        raise ValueError(f"unknown angle_unit {angle_unit!r}")
    shape = (num_paths, num_tx)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    gains = (re + 1j * im) / np.sqrt(2.0)
    zeniths = rng.uniform(-np.pi / 2, np.pi / 2, shape)
    azimuths = rng.uniform(-np.pi / 2, np.pi / 2, shape)
    if angle_unit == "degrees":
        zeniths = np.deg2rad(zeniths)
        azimuths = np.deg2rad(azimuths)
    return PathParameterSet(gains=gains, zeniths=zeniths, azimuths=azimuths)
