"""Turning information matrices into estimation-error lower bounds.

Inversion goes through an eigendecomposition-based pseudo-inverse with a
relative eigenvalue threshold: directions carrying (numerically) no
information are excluded instead of polluting the bound, and the retained
rank is recorded so callers can report how often that happened.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInformationError, ShapeError
from .fim import FisherMatrix, JacobianMatrix, Parametrization

DEFAULT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class CrbMatrix:
    """A lower bound on estimator covariance, tagged like its FisherMatrix.

    rank_used is the number of eigen-directions retained by the
    pseudo-inverse; num_coefficients carries num_tx * num_rx through from
    the information matrix for scalar normalization.
    """

    matrix: np.ndarray
    parametrization: Parametrization
    rank_used: int
    tolerance_used: float
    num_coefficients: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"bound matrix must be square, got {m.shape}")
        if self.rank_used > m.shape[0]:
            raise ShapeError("retained rank exceeds matrix dimension")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _pinv_psd(matrix: np.ndarray, tolerance: float):
    """Pseudo-inverse of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues at or below tolerance * (largest eigenvalue) are treated
    as zero. Returns (pinv, rank_used).
    """
    sym = (matrix + matrix.conj().T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    top = eigvals[-1] if eigvals.size else 0.0
    if top <= 0:
        raise DegenerateInformationError(
            "information matrix has no positive eigenvalue; no finite bound exists")
    cut = tolerance * top
    keep = eigvals > cut
    inv_vals = np.zeros_like(eigvals)
    inv_vals[keep] = 1.0 / eigvals[keep]
    pinv = (eigvecs * inv_vals) @ eigvecs.conj().T
    pinv = (pinv + pinv.conj().T) / 2.0
    return pinv, int(np.count_nonzero(keep))


def invert_fim(fim: FisherMatrix, tolerance: float = DEFAULT_TOLERANCE) -> CrbMatrix:
    """Invert an information matrix into a covariance lower bound.

    With tolerance 0 and a full-rank input this is the exact inverse;
    otherwise small eigenvalues are truncated and rank_used records how
    many directions were kept.
    """
    pinv, rank = _pinv_psd(fim.matrix, tolerance)
    return CrbMatrix(matrix=pinv, parametrization=fim.parametrization,
                     rank_used=rank, tolerance_used=tolerance,
                     num_coefficients=fim.num_coefficients)


def structured_crb_on_h(structured: FisherMatrix, jacobian: JacobianMatrix,
                        tolerance: float = DEFAULT_TOLERANCE) -> CrbMatrix:
    """Map a structured-parameter bound back onto the channel vector.

    Returns G * pinv(J) * G^H on the (h, h) block: the covariance floor for
    any unbiased channel estimate that goes through the structured
    parameters. Zero information in a parameter direction simply drops out
    of the bound (pseudo-inverse truncation).
    """
    if structured.parametrization is not Parametrization.STRUCTURED_THETA:
        raise ShapeError("structured_crb_on_h needs a structured-parameter FIM")
    if structured.dim != jacobian.num_parameters:
        raise ShapeError(
            f"FIM dimension {structured.dim} does not match jacobian parameter "
            f"count {jacobian.num_parameters}")
    if not np.any(jacobian.matrix):
        # No sensitivity at all: the mapped bound collapses to zero no matter
        # what the (then empty) information matrix says.
        n = jacobian.matrix.shape[0]
        return CrbMatrix(matrix=np.zeros((n, n), dtype=complex),
                         parametrization=Parametrization.UNSTRUCTURED_H,
                         rank_used=0, tolerance_used=tolerance,
                         num_coefficients=structured.num_coefficients)
    pinv, rank = _pinv_psd(structured.matrix, tolerance)
    g = jacobian.matrix
    mapped = g @ pinv @ g.conj().T
    mapped = (mapped + mapped.conj().T) / 2.0
    return CrbMatrix(matrix=mapped, parametrization=Parametrization.UNSTRUCTURED_H,
                     rank_used=min(rank, mapped.shape[0]), tolerance_used=tolerance,
                     num_coefficients=structured.num_coefficients)


def crb_scalar(crb: CrbMatrix) -> float:
    """Reduce a bound matrix to the scalar that the sweep experiments plot.

    The reduction is the trace of the bound divided by the number of
    channel coefficients (num_tx * num_rx): a per-coefficient average. For
    an augmented unstructured bound the trace runs over the (h, h) block
    only (the conjugate block duplicates it); for a structured-parameter
    bound it runs over the whole parameter covariance.
    """
    n = crb.num_coefficients
    if crb.parametrization is Parametrization.UNSTRUCTURED_H and crb.dim == 2 * n:
        total = np.trace(crb.matrix[:n, :n]).real
    else:
        total = np.trace(crb.matrix).real
    return float(total / n)


def crb_trace(crb: CrbMatrix) -> float:
    """Unnormalized variant of crb_scalar (sum over coefficients/parameters)."""
    return crb_scalar(crb) * crb.num_coefficients
