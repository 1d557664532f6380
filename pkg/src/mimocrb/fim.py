"""Fisher information matrices for pilot-aided and semi-blind channel
estimation, in two parametrizations.

Unstructured parametrization: the complex channel vector h itself,
handled in the augmented form [h; conj(h)] so that complex gradients are
captured exactly. Every unstructured FIM here is a 2n x 2n matrix over
that augmented vector (n = num_tx * num_rx); the (h, h) block is the
leading n x n block.

Structured parametrization: the physical parameter vector
[gains, conj(gains), zeniths, azimuths] of length 4 * num_tx * num_paths,
reached from the unstructured FIM through the channel Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import TWO_PI, PathParameterSet, steering_phase_table
from .errors import ShapeError, SingularCovarianceError
from .geometry import ArrayGeometry

HERMITIAN_RTOL = 1e-10
PSD_RTOL = 1e-10


class Parametrization(str, Enum):
    UNSTRUCTURED_H = "unstructured-h"
    STRUCTURED_THETA = "structured-theta"


class InfoSource(str, Enum):
    PILOT = "pilot"
    DATA = "data"
    SEMI_BLIND = "semi-blind"


@dataclass(frozen=True)
class FisherMatrix:
    """A Hermitian PSD information matrix with its parametrization tag.

    num_coefficients records num_tx * num_rx for the scenario the matrix
    came from; scalar bound reductions are normalized by it.
    """

    matrix: np.ndarray
    parametrization: Parametrization
    source: InfoSource
    num_coefficients: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"information matrix must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ShapeError("information matrix must be finite")
        scale = np.abs(m).max()
        if scale > 0 and np.abs(m - m.conj().T).max() > HERMITIAN_RTOL * scale:
            raise ShapeError("information matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermitian_defect(self) -> float:
        """Max relative deviation from Hermitian symmetry."""
        scale = np.abs(self.matrix).max()
        if scale == 0:
            return 0.0
        return float(np.abs(self.matrix - self.matrix.conj().T).max() / scale)

    def min_eigenvalue_ratio(self) -> float:
        """Smallest eigenvalue over largest; >= -PSD_RTOL for a PSD matrix."""
        w = np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2.0)
        top = w[-1]
        if top <= 0:
            return 0.0 if np.allclose(w, 0) else float(w[0])
        return float(w[0] / top)

    def is_psd(self, rtol: float = PSD_RTOL) -> bool:
        return self.min_eigenvalue_ratio() >= -rtol


@dataclass(frozen=True)
class PilotConfig:
    """Known training blocks plus the noise/signal power model.

    pilot_blocks has shape (num_pilots, num_subcarriers, num_tx): one
    unit-modulus block of num_subcarriers symbols per pilot use and
    transmit antenna. noise_variance is the complex noise power per
    subcarrier sample; signal_variance_per_tx the per-antenna transmit
    power of the unknown data symbols.
    """

    pilot_blocks: np.ndarray
    noise_variance: float
    signal_variance_per_tx: np.ndarray

    def __post_init__(self):
        blocks = np.asarray(self.pilot_blocks, dtype=complex)
        if blocks.ndim != 3:
            raise ShapeError(
                f"pilot_blocks must be (num_pilots, K, num_tx), got {blocks.shape}")
        if blocks.shape[0] < 1 or blocks.shape[1] < 1 or blocks.shape[2] < 1:
            raise ShapeError("pilot_blocks dimensions must all be >= 1")
        if np.abs(np.abs(blocks) - 1.0).max() > 1e-12:
            raise ShapeError("pilot symbols must be unit modulus")
        if not self.noise_variance > 0:
            raise ShapeError(f"noise variance must be positive, got {self.noise_variance}")
        sig = np.asarray(self.signal_variance_per_tx, dtype=float)
        if sig.shape != (blocks.shape[2],):
            raise ShapeError(
                f"signal_variance_per_tx must have length num_tx={blocks.shape[2]}")
        if np.any(sig < 0):
            raise ShapeError("signal variances must be non-negative")
        blocks.setflags(write=False)
        sig.setflags(write=False)
        object.__setattr__(self, "pilot_blocks", blocks)
        object.__setattr__(self, "signal_variance_per_tx", sig)

    @property
    def num_pilots(self) -> int:
        return self.pilot_blocks.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.pilot_blocks.shape[1]

    @property
    def num_tx(self) -> int:
        return self.pilot_blocks.shape[2]

    def gram(self) -> np.ndarray:
        """Sum over pilot uses of block^H block, shape (num_tx, num_tx)."""
        return np.einsum("ikt,iku->tu", self.pilot_blocks.conj(), self.pilot_blocks)


def make_orthogonal_pilots(num_pilots: int, num_subcarriers: int, num_tx: int,
                           noise_variance: float,
                           signal_variance_per_tx=None) -> PilotConfig:
    """Unit-modulus phase-ramp pilots with mutually orthogonal antenna columns.

    Column j of every block is a frequency ramp shifted by j * floor(K / num_tx)
    bins, plus a per-pilot-use common ramp, so block^H block = K * I exactly
    and the summed gram is (K * num_pilots) * I.
    """
    if num_tx > num_subcarriers:
        raise ShapeError(
            "orthogonal pilot design needs num_tx <= num_subcarriers, got "
            f"{num_tx} > {num_subcarriers}")
    k = np.arange(num_subcarriers)
    shift = num_subcarriers // num_tx
    blocks = np.empty((num_pilots, num_subcarriers, num_tx), dtype=complex)
    for i in range(num_pilots):
        for j in range(num_tx):
            blocks[i, :, j] = np.exp(2j * np.pi * k * ((i % num_subcarriers) + j * shift)
                                     / num_subcarriers)
    if signal_variance_per_tx is None:
        signal_variance_per_tx = np.ones(num_tx)
    return PilotConfig(pilot_blocks=blocks, noise_variance=noise_variance,
                       signal_variance_per_tx=signal_variance_per_tx)


def make_qpsk_pilots(rng: np.random.Generator, num_pilots: int, num_subcarriers: int,
                     num_tx: int, noise_variance: float,
                     signal_variance_per_tx=None) -> PilotConfig:
    """Seeded random QPSK pilot blocks (unit modulus, not orthogonalized)."""
    quad = rng.integers(0, 4, size=(num_pilots, num_subcarriers, num_tx))
    blocks = np.exp(1j * (np.pi / 4 + np.pi / 2 * quad))
    if signal_variance_per_tx is None:
        signal_variance_per_tx = np.ones(num_tx)
    return PilotConfig(pilot_blocks=blocks, noise_variance=noise_variance,
                       signal_variance_per_tx=signal_variance_per_tx)


def _augment_block_diagonal(core: np.ndarray) -> np.ndarray:
    """Lift an (h, h) information block to the augmented [h; conj(h)] space."""
    n = core.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = core
    out[n:, n:] = core.conj()
    return out


def pilot_fim_unstructured(pilots: PilotConfig, num_rx: int) -> FisherMatrix:
    """Information about the channel vector carried by the known pilots.

    Per receive antenna the pilot information is sum_i block(i)^H block(i)
    divided by the noise variance; receive antennas see independent noise,
    so the full matrix is block-diagonal over them. Returned in augmented
    form: the conjugate block duplicates the (h, h) block, and the cross
    blocks vanish for circular noise.
    """
    if num_rx < 1:
        raise ShapeError(f"need at least one receive antenna, got {num_rx}")
    core = np.kron(np.eye(num_rx), pilots.gram() / pilots.noise_variance)
    core = (core + core.conj().T) / 2.0
    return FisherMatrix(matrix=_augment_block_diagonal(core),
                        parametrization=Parametrization.UNSTRUCTURED_H,
                        source=InfoSource.PILOT,
                        num_coefficients=pilots.num_tx * num_rx)


def _data_covariance_small(h_matrix: np.ndarray, pilots: PilotConfig) -> np.ndarray:
    """Per-subcarrier received covariance, size num_rx (the full covariance
    repeats this block once per subcarrier)."""
    num_rx = h_matrix.shape[0]
    cov = (h_matrix * pilots.signal_variance_per_tx) @ h_matrix.conj().T
    cov = cov + pilots.noise_variance * np.eye(num_rx)
    return (cov + cov.conj().T) / 2.0


def data_fim_unstructured(h: np.ndarray, pilots: PilotConfig, num_data: int,
                          num_rx: int) -> FisherMatrix:
    """Information about the channel carried by the unknown data symbols.

    The data symbols are zero-mean i.i.d. with known per-antenna power, so
    each received subcarrier sample is a zero-mean Gaussian snapshot whose
    covariance depends on h; the information is the standard covariance-
    derivative trace form, accumulated over num_data symbols of
    num_subcarriers snapshots each.

    The full covariance over one OFDM symbol is block-diagonal with
    num_subcarriers identical num_rx-sized blocks, which this routine
    exploits; data_fim_unstructured_naive builds the full covariance
    literally and is kept as an independent cross-check.
    """
    num_tx = pilots.num_tx
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.size != num_tx * num_rx:
        raise ShapeError(
            f"channel vector has length {h.size}, expected {num_tx * num_rx}")
    if num_data < 0:
        raise ShapeError(f"num_data must be >= 0, got {num_data}")
    n = num_tx * num_rx
    if num_data == 0:
        return FisherMatrix(matrix=np.zeros((2 * n, 2 * n), dtype=complex),
                            parametrization=Parametrization.UNSTRUCTURED_H,
                            source=InfoSource.DATA, num_coefficients=n)
    hm = h.reshape(num_rx, num_tx)
    cov = _data_covariance_small(hm, pilots)
    try:
        cov_inv = np.linalg.inv(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            "received-signal covariance is singular; need noise_variance > 0 "
            "or a full-rank signal part") from exc
    sig = pilots.signal_variance_per_tx
    # Derivative of the small covariance w.r.t. conj(h[r, j]) is
    # sig_j * h[:, j] e_r^H; the trace form then factors into
    # gram-like pieces of cov_inv.
    w = hm.conj().T @ cov_inv @ hm                 # (tx, tx)
    p_block = np.einsum("j,k,kj,rs->rjsk", sig, sig, w, cov_inv)
    p_block = p_block.reshape(n, n)
    b = (cov_inv @ hm) * sig                        # (rx, tx)
    q_block = np.einsum("rk,sj->rjsk", b, b).reshape(n, n)
    scale = pilots.num_subcarriers * num_data
    top = np.hstack([p_block, q_block])
    bottom = np.hstack([q_block.conj(), p_block.conj()])
    matrix = scale * np.vstack([top, bottom])
    matrix = (matrix + matrix.conj().T) / 2.0
    return FisherMatrix(matrix=matrix,
                        parametrization=Parametrization.UNSTRUCTURED_H,
                        source=InfoSource.DATA, num_coefficients=n)


def data_fim_unstructured_naive(h: np.ndarray, pilots: PilotConfig, num_data: int,
                                num_rx: int) -> FisherMatrix:
    """Reference data-information computation on the full covariance.

    Builds the (K * num_rx)-sized covariance and every parameter derivative
    explicitly and evaluates the trace form term by term. Cost grows
    quickly; intended for small cross-check instances only.
    """
    num_tx = pilots.num_tx
    K = pilots.num_subcarriers
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.size != num_tx * num_rx:
        raise ShapeError(
            f"channel vector has length {h.size}, expected {num_tx * num_rx}")
    n = num_tx * num_rx
    if num_data == 0:
        return FisherMatrix(matrix=np.zeros((2 * n, 2 * n), dtype=complex),
                            parametrization=Parametrization.UNSTRUCTURED_H,
                            source=InfoSource.DATA, num_coefficients=n)
    hm = h.reshape(num_rx, num_tx)
    eye_k = np.eye(K)
    # lam columns: per transmit antenna, the channel gain replicated over
    # subcarriers and stacked over receive antennas.
    lam = np.zeros((K * num_rx, K * num_tx), dtype=complex)
    for j in range(num_tx):
        for r in range(num_rx):
            lam[r * K:(r + 1) * K, j * K:(j + 1) * K] = hm[r, j] * eye_k
    cov_x = np.kron(np.diag(pilots.signal_variance_per_tx), eye_k)
    cov_y = lam @ cov_x @ lam.conj().T + pilots.noise_variance * np.eye(K * num_rx)
    try:
        cov_y_inv = np.linalg.inv(cov_y)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("full received covariance is singular") from exc
    derivs = []
    for r in range(num_rx):
        for j in range(num_tx):
            dlam_h = np.zeros((K * num_tx, K * num_rx), dtype=complex)
            dlam_h[j * K:(j + 1) * K, r * K:(r + 1) * K] = eye_k
            derivs.append(lam @ cov_x @ dlam_h)
    p_block = np.zeros((n, n), dtype=complex)
    q_block = np.zeros((n, n), dtype=complex)
    for m in range(n):
        left = cov_y_inv @ derivs[m] @ cov_y_inv
        for k in range(n):
            p_block[m, k] = np.trace(left @ derivs[k].conj().T)
            q_block[m, k] = np.trace(left @ derivs[k])
    top = np.hstack([p_block, q_block])
    bottom = np.hstack([q_block.conj(), p_block.conj()])
    matrix = num_data * np.vstack([top, bottom])
    matrix = (matrix + matrix.conj().T) / 2.0
    return FisherMatrix(matrix=matrix,
                        parametrization=Parametrization.UNSTRUCTURED_H,
                        source=InfoSource.DATA, num_coefficients=n)


def semi_blind_fim(pilot_fim: FisherMatrix, data_fim: FisherMatrix) -> FisherMatrix:
    """Combined pilot + data information (the two sources are independent)."""
    if pilot_fim.parametrization is not data_fim.parametrization:
        raise ShapeError("pilot and data information use different parametrizations")
    if pilot_fim.dim != data_fim.dim:
        raise ShapeError(
            f"dimension mismatch: pilot {pilot_fim.dim} vs data {data_fim.dim}")
    if pilot_fim.source is not InfoSource.PILOT or data_fim.source is not InfoSource.DATA:
        raise ShapeError("semi_blind_fim expects a pilot FIM and a data FIM")
    return FisherMatrix(matrix=pilot_fim.matrix + data_fim.matrix,
                        parametrization=pilot_fim.parametrization,
                        source=InfoSource.SEMI_BLIND,
                        num_coefficients=pilot_fim.num_coefficients)


@dataclass(frozen=True)
class JacobianMatrix:
    """Derivatives of the stacked channel vector w.r.t. the structured
    parameters.

    matrix has num_tx * num_rx rows (stacked like the channel vector) and
    4 * num_tx * num_paths columns in four equal blocks:
    [gains | conj(gains) | zeniths | azimuths], each ordered transmit-
    antenna-major (column j * num_paths + l within a block).
    """

    matrix: np.ndarray
    num_tx: int
    num_paths: int
    num_rx: int
    convention: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        expected = (self.num_tx * self.num_rx, 4 * self.num_tx * self.num_paths)
        if m.shape != expected:
            raise ShapeError(f"jacobian shape {m.shape}, expected {expected}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_parameters(self) -> int:
        return self.matrix.shape[1]

    def block(self, name: str) -> np.ndarray:
        """One of the four column blocks: gain, gain_conj, zenith, azimuth."""
        order = {"gain": 0, "gain_conj": 1, "zenith": 2, "azimuth": 3}
        width = self.num_tx * self.num_paths
        i = order[name]
        return self.matrix[:, i * width:(i + 1) * width]

    def augmented(self) -> np.ndarray:
        """Jacobian of [h; conj(h)] w.r.t. the structured parameters.

        The conjugate rows swap the gain and conjugate-gain blocks and
        conjugate everything.
        """
        width = self.num_tx * self.num_paths
        g = self.matrix
        bottom = np.hstack([g[:, width:2 * width].conj(),
                            g[:, :width].conj(),
                            g[:, 2 * width:].conj()])
        return np.vstack([g, bottom])


def channel_jacobian(params: PathParameterSet, geometry: ArrayGeometry,
                     convention: str = "paper") -> JacobianMatrix:
    """Channel derivatives w.r.t. [gains, conj(gains), zeniths, azimuths].

    Two published conventions are supported for the per-path derivative
    factors:

    - "paper": gain columns carry (1 -+ i)/2 times the steering phasor,
      and the azimuth derivative keeps a cos(zenith) * z term.
    - "wirtinger": standard complex calculus; the gain column is the bare
      steering phasor, the conjugate-gain column is zero, and the azimuth
      derivative follows from differentiating the steering projection
      (no z term).

    Under "wirtinger" every column matches finite differences of
    assemble_channel; under "paper" the zenith columns still do.
    """
    if convention not in ("paper", "wirtinger"):
        raise ValueError(f"unknown derivative convention {convention!r}")
    L, num_tx = params.num_paths, params.num_tx
    num_rx = geometry.num_elements
    pos = geometry.positions
    phases = steering_phase_table(params, geometry)       # (L, Nt, Nr)
    phasor = np.exp(-1j * TWO_PI * phases)
    zen, azi = params.zeniths, params.azimuths
    dzen_proj = ((np.cos(zen) * np.cos(azi))[..., None] * pos[:, 0]
                 + (np.cos(zen) * np.sin(azi))[..., None] * pos[:, 1]
                 - np.sin(zen)[..., None] * pos[:, 2])
    dazi_proj = ((-np.sin(zen) * np.sin(azi))[..., None] * pos[:, 0]
                 + (np.sin(zen) * np.cos(azi))[..., None] * pos[:, 1])
    if convention == "paper":
        dazi_proj = dazi_proj + np.cos(zen)[..., None] * pos[:, 2]
        gain_factor = 0.5 * (1.0 - 1.0j)
        gain_conj_factor = 0.5 * (1.0 + 1.0j)
    else:
        gain_factor = 1.0
        gain_conj_factor = 0.0
    width = num_tx * L
    g_gain = np.zeros((num_rx * num_tx, width), dtype=complex)
    g_gain_conj = np.zeros_like(g_gain)
    g_zen = np.zeros_like(g_gain)
    g_azi = np.zeros_like(g_gain)
    rows_for_tx = [np.arange(num_rx) * num_tx + j for j in range(num_tx)]
    for j in range(num_tx):
        rows = rows_for_tx[j]
        for l in range(L):
            col = j * L + l
            ph = phasor[l, j, :]
            g_gain[rows, col] = gain_factor * ph
            g_gain_conj[rows, col] = gain_conj_factor * ph
            g_zen[rows, col] = (params.gains[l, j]
                                * (-1j * TWO_PI * dzen_proj[l, j, :]) * ph)
            g_azi[rows, col] = (params.gains[l, j]
                                * (-1j * TWO_PI * dazi_proj[l, j, :]) * ph)
    return JacobianMatrix(matrix=np.hstack([g_gain, g_gain_conj, g_zen, g_azi]),
                          num_tx=num_tx, num_paths=L, num_rx=num_rx,
                          convention=convention)


def structured_fim(unstructured_fim: FisherMatrix,
                   jacobian: JacobianMatrix) -> FisherMatrix:
    """Reparametrize channel-vector information onto the structured
    parameters via the chain rule G^H J G."""
    if unstructured_fim.parametrization is not Parametrization.UNSTRUCTURED_H:
        raise ShapeError("structured_fim needs an unstructured-parametrization FIM")
    n = jacobian.num_tx * jacobian.num_rx
    if unstructured_fim.dim == 2 * n:
        g = jacobian.augmented()
    elif unstructured_fim.dim == n:
        g = jacobian.matrix
    else:
        raise ShapeError(
            f"FIM dimension {unstructured_fim.dim} does not match a jacobian "
            f"with {n} channel coefficients")
    out = g.conj().T @ unstructured_fim.matrix @ g
    out = (out + out.conj().T) / 2.0
    return FisherMatrix(matrix=out,
                        parametrization=Parametrization.STRUCTURED_THETA,
                        source=unstructured_fim.source,
                        num_coefficients=unstructured_fim.num_coefficients)
