"""Seeded Monte-Carlo sweeps of the channel-estimation error bounds.

A trial draws one random path-parameter set, evaluates the four scalar
bounds (structured/unstructured x pilot-only/semi-blind) on it, and the
sweep reports per-configuration means. Trial randomness is derived from
(master_seed, trial_index) alone, so results are independent of execution
order and degree of parallelism, and the same draws are reused across
sweep points and geometries (paired comparisons).
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import PathParameterSet, channel_matrix, draw_path_parameters
from .crb import crb_scalar, invert_fim
from .errors import ConfigError, DegenerateInformationError
from .fim import (
    FisherMatrix,
    channel_jacobian,
    data_fim_unstructured,
    make_orthogonal_pilots,
    make_qpsk_pilots,
    pilot_fim_unstructured,
    semi_blind_fim,
    structured_fim,
)
from .geometry import ArrayGeometry, build_ula, build_ucya

MODELS = ("structured", "unstructured")
METHODS = ("OP", "SB")

# Relative singular-value threshold matched to the squared relative
# eigenvalue threshold used when inverting information matrices.
_JACOBIAN_RANK_RTOL = 1e-5


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs apart from the receive geometry."""

    num_tx: int = 2
    num_paths: int = 4
    num_subcarriers: int = 64
    num_pilots: int = 16
    num_data: int = 48
    snr_db: float = 10.0
    trials: int = 50
    master_seed: int = 0
    derivative_convention: str = "paper"
    angle_unit: str = "radians"
    pilot_kind: str = "orthogonal"
    crb_tolerance: float = 1e-10
    scalar_reduction: str = "normalized"

    def __post_init__(self):
        if self.num_tx < 1 or self.num_paths < 1:
            raise ConfigError("need at least one transmit antenna and one path")
        if self.num_subcarriers < 1:
            raise ConfigError("need at least one subcarrier")
        if self.num_pilots < 1:
            raise ConfigError("pilot-only bounds need at least one pilot symbol")
        if self.num_data < 0:
            raise ConfigError("num_data must be >= 0")
        if self.trials < 1:
            raise ConfigError("need at least one trial")
        if self.derivative_convention not in ("paper", "wirtinger"):
            raise ConfigError(
                f"unknown derivative convention {self.derivative_convention!r}")
        if self.angle_unit not in ("radians", "degrees"):
            raise ConfigError(f"unknown angle unit {self.angle_unit!r}")
        if self.pilot_kind not in ("orthogonal", "qpsk"):
            raise ConfigError(f"unknown pilot kind {self.pilot_kind!r}")
        if not 0 <= self.crb_tolerance < 1:
            raise ConfigError("crb_tolerance must be in [0, 1)")
        if self.scalar_reduction not in ("normalized", "sum"):
            raise ConfigError(
                f"unknown scalar reduction {self.scalar_reduction!r}")

    @property
    def noise_variance(self) -> float:
        """Linear noise power for unit per-antenna transmit power."""
        return 10.0 ** (-self.snr_db / 10.0)


@dataclass(frozen=True)
class TrialOutcome:
    """Scalar bounds of one trial, keyed (model, method), plus rank info."""

    values: dict
    structured_rank_op: int
    structured_rank_sb: int
    jacobian_rank: int

    @property
    def rank_deficient(self) -> bool:
        """Structured information lost rank beyond what the jacobian itself
        already lacked."""
        return (self.structured_rank_op < self.jacobian_rank
                or self.structured_rank_sb < self.jacobian_rank)


@dataclass(frozen=True)
class SingleRunResult:
    geometry_kind: str
    means: dict
    per_trial: dict
    trials_used: int
    deficient_rank_trials: int
    master_seed: int


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    sweep_value: float
    geometry: str
    model: str
    method: str
    mean_crb: float
    trials_used: int
    deficient_rank_trials: int
    seed: int


@dataclass(frozen=True)
class SweepResult:
    sweep_var: str
    rows: tuple

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: (r.sweep_value, r.geometry,
                                                r.model, r.method))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial, by index."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return np.random.default_rng(seq)


def draw_trial_parameters(config: ScenarioConfig, trial_index: int) -> PathParameterSet:
    rng = trial_rng(config.master_seed, trial_index)
    return draw_path_parameters(rng, config.num_paths, config.num_tx,
                                angle_unit=config.angle_unit)


def build_pilots(config: ScenarioConfig):
    """Pilot design for a run. The seeded QPSK variant derives its stream
    from the master seed so a run is fully reproducible."""
    if config.pilot_kind == "orthogonal":
        return make_orthogonal_pilots(config.num_pilots, config.num_subcarriers,
                                      config.num_tx, config.noise_variance)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=(config.master_seed, 0x50494C)))
    return make_qpsk_pilots(rng, config.num_pilots, config.num_subcarriers,
                            config.num_tx, config.noise_variance)


def trial_fims(config: ScenarioConfig, geometry: ArrayGeometry,
               params: PathParameterSet):
    """All four information matrices of one trial, keyed (model, method)."""
    num_rx = geometry.num_elements
    pilots = build_pilots(config)
    h = channel_matrix(params, geometry).reshape(-1)
    pilot_info = pilot_fim_unstructured(pilots, num_rx)
    data_info = data_fim_unstructured(h, pilots, config.num_data, num_rx)
    sb_info = semi_blind_fim(pilot_info, data_info)
    jac = channel_jacobian(params, geometry, config.derivative_convention)
    return {
        ("unstructured", "OP"): pilot_info,
        ("unstructured", "SB"): sb_info,
        ("structured", "OP"): structured_fim(pilot_info, jac),
        ("structured", "SB"): structured_fim(sb_info, jac),
    }, jac


def evaluate_trial(config: ScenarioConfig, geometry: ArrayGeometry,
                   params: PathParameterSet) -> TrialOutcome:
    """Reduce one trial to its four scalar bounds."""
    fims, jac = trial_fims(config, geometry, params)
    values = {}
    ranks = {}
    for key, info in fims.items():
        bound = invert_fim(info, config.crb_tolerance)
        values[key] = crb_scalar(bound)
        if config.scalar_reduction == "sum":
            values[key] *= bound.num_coefficients
        ranks[key] = bound.rank_used
    g_aug = jac.augmented()
    sv = np.linalg.svd(g_aug, compute_uv=False)
    jac_rank = int(np.count_nonzero(sv > _JACOBIAN_RANK_RTOL * sv[0])) if sv.size else 0
    return TrialOutcome(values=values,
                        structured_rank_op=ranks[("structured", "OP")],
                        structured_rank_sb=ranks[("structured", "SB")],
                        jacobian_rank=jac_rank)


def _run_trial_by_index(args) -> tuple:
    config, geometry, trial_index = args
    params = draw_trial_parameters(config, trial_index)
    try:
        return trial_index, evaluate_trial(config, geometry, params)
    except DegenerateInformationError:
        return trial_index, None


def run_single(config: ScenarioConfig, geometry: ArrayGeometry,
               jobs: int = 1) -> SingleRunResult:
    """Average the four scalar bounds over config.trials random channels.

    Trials that carry no information at all are skipped and counted; if
    every trial fails, the degenerate-information error propagates.
    """
    tasks = [(config, geometry, t) for t in range(config.trials)]
    if jobs > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            indexed = pool.map(_run_trial_by_index, tasks)
    else:
        indexed = [_run_trial_by_index(t) for t in tasks]
    indexed.sort(key=lambda pair: pair[0])
    outcomes = [out for _, out in indexed if out is not None]
    if not outcomes:
        raise DegenerateInformationError(
            "every trial produced a degenerate information matrix")
    per_trial = {
        (model, method): np.array([o.values[(model, method)] for o in outcomes])
        for model in MODELS for method in METHODS
    }
    means = {key: float(vals.mean()) for key, vals in per_trial.items()}
    deficient = sum(1 for o in outcomes if o.rank_deficient)
    return SingleRunResult(geometry_kind=geometry.kind.value, means=means,
                           per_trial=per_trial, trials_used=len(outcomes),
                           deficient_rank_trials=deficient,
                           master_seed=config.master_seed)


def _rows_for_point(sweep_var: str, sweep_value: float,
                    result: SingleRunResult) -> list:
    rows = []
    for model in MODELS:
        for method in METHODS:
            rows.append(SweepRow(
                sweep_var=sweep_var, sweep_value=float(sweep_value),
                geometry=result.geometry_kind, model=model, method=method,
                mean_crb=result.means[(model, method)],
                trials_used=result.trials_used,
                deficient_rank_trials=result.deficient_rank_trials,
                seed=result.master_seed))
    return rows


def sweep_snr(base: ScenarioConfig, snr_values: Sequence[float],
              ula_elements: int = 96, ucya_ring: int = 24, ucya_layers: int = 4,
              spacing_2d: float = 0.5, spacing_3d: float = 0.5, jobs: int = 1,
              progress: Callable[[str], None] | None = None) -> SweepResult:
    """Bounds vs. SNR for a linear array and a cylindrical array of the
    given sizes, with paired channel draws across all points."""
    if not snr_values:
        raise ConfigError("snr sweep needs at least one SNR value")
    geometries = [build_ula(ula_elements, spacing_2d),
                  build_ucya(ucya_ring, ucya_layers, spacing_2d, spacing_3d)]
    rows = []
    for snr in snr_values:
        config = replace(base, snr_db=float(snr))
        for geom in geometries:
            result = run_single(config, geom, jobs=jobs)
            rows.extend(_rows_for_point("snr_db", snr, result))
            if progress is not None:
                progress(f"snr_db={snr} geometry={geom.kind.value} done")
    return SweepResult(sweep_var="snr_db", rows=tuple(rows))


def sweep_layers(base: ScenarioConfig, layer_values: Sequence[int],
                 ucya_ring: int = 24, spacing_2d: float = 0.5,
                 spacing_3d: float = 0.5, jobs: int = 1,
                 progress: Callable[[str], None] | None = None) -> SweepResult:
    """Bounds vs. cylinder layer count, against a linear array with the
    same total element count (ring size times layers)."""
    if not layer_values:
        raise ConfigError("layer sweep needs at least one value")
    rows = []
    for layers in layer_values:
        layers = int(layers)
        geometries = [build_ula(ucya_ring * layers, spacing_2d),
                      build_ucya(ucya_ring, layers, spacing_2d, spacing_3d)]
        for geom in geometries:
            result = run_single(base, geom, jobs=jobs)
            rows.extend(_rows_for_point("n_3d", layers, result))
            if progress is not None:
                progress(f"n_3d={layers} geometry={geom.kind.value} done")
    return SweepResult(sweep_var="n_3d", rows=tuple(rows))


def sweep_ring(base: ScenarioConfig, ring_values: Sequence[int],
               ucya_layers: int = 4, spacing_2d: float = 0.5,
               spacing_3d: float = 0.5, jobs: int = 1,
               progress: Callable[[str], None] | None = None) -> SweepResult:
    """Bounds vs. ring size, against a linear array with the same total
    element count (ring size times layers)."""
    if not ring_values:
        raise ConfigError("ring sweep needs at least one value")
    rows = []
    for ring in ring_values:
        ring = int(ring)
        geometries = [build_ula(ring * ucya_layers, spacing_2d),
                      build_ucya(ring, ucya_layers, spacing_2d, spacing_3d)]
        for geom in geometries:
            result = run_single(base, geom, jobs=jobs)
            rows.extend(_rows_for_point("n_uca", ring, result))
            if progress is not None:
                progress(f"n_uca={ring} geometry={geom.kind.value} done")
    return SweepResult(sweep_var="n_uca", rows=tuple(rows))
