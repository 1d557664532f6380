"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Criterion A1 is known to fail at this reduced problem scale; see
the project README for the analysis. It is asserted as stated anyway.
"""

import time

import numpy as np
import pytest

from mimocrb.channel import PathParameterSet, assemble_channel, draw_path_parameters
from mimocrb.cli import main as cli_main
from mimocrb.crb import crb_scalar, invert_fim
from mimocrb.experiments import (
    ScenarioConfig,
    draw_trial_parameters,
    run_single,
    sweep_layers,
    sweep_snr,
    trial_fims,
)
from mimocrb.fim import (
    channel_jacobian,
    data_fim_unstructured,
    data_fim_unstructured_naive,
    make_orthogonal_pilots,
    pilot_fim_unstructured,
)
from mimocrb.geometry import build_ucya, build_ula

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

BASE = dict(num_tx=2, num_paths=4, num_subcarriers=64, num_pilots=16, num_data=48)
A1_SEED = 0
A1_CONFIG = ScenarioConfig(snr_db=10.0, trials=50, master_seed=A1_SEED, **BASE)
A1_GEOMETRIES = {
    "ULA": build_ula(24, 0.5),
    "UCyA": build_ucya(8, 3, 0.5, 0.5),
}


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"[{criterion}] {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def a1_runs():
    return {name: run_single(A1_CONFIG, geom)
            for name, geom in A1_GEOMETRIES.items()}


def test_a1_structured_far_below_unstructured(a1_runs):
    """Mean structured pilot-only bound at most 1e-2 of the unstructured one."""
    start = time.time()
    ratios = {}
    for name, result in a1_runs.items():
        ratios[name] = (result.means[("structured", "OP")]
                        / result.means[("unstructured", "OP")])
    passed = all(r <= 1e-2 for r in ratios.values())
    detail = ", ".join(f"{name} ratio={r:.3e}" for name, r in ratios.items())
    report("A1", passed, f"{detail} (threshold 1e-2, {time.time() - start:.1f}s)")
    assert passed, (
        "structured/unstructured pilot-only ratio above 1e-2 at the reduced "
        f"24-element scale: {detail}. At this array size the structured "
        "parameter bound is within two orders of the unstructured one (and "
        "trial means are heavy-tailed); the two-orders separation appears at "
        "the full 96-element configuration. See README (acceptance notes).")


def test_a2_semi_blind_dominance_per_trial(a1_runs):
    """Per-trial SB <= OP for both models, plus the information-order check."""
    worst_gap = 0.0
    for name, result in a1_runs.items():
        for model in ("structured", "unstructured"):
            op = result.per_trial[(model, "OP")]
            sb = result.per_trial[(model, "SB")]
            assert np.all(sb <= op), f"{name}/{model}: SB bound above OP bound"
    # Loewner check on the information matrices of every A1 trial.
    for name, geom in A1_GEOMETRIES.items():
        for trial in range(A1_CONFIG.trials):
            params = draw_trial_parameters(A1_CONFIG, trial)
            fims, _ = trial_fims(A1_CONFIG, geom, params)
            for model in ("structured", "unstructured"):
                pilot = fims[(model, "OP")].matrix
                sb = fims[(model, "SB")].matrix
                diff = sb - pilot
                norm = np.linalg.norm(pilot, 2)
                min_eig = np.linalg.eigvalsh((diff + diff.conj().T) / 2).min()
                gap = min_eig / norm
                worst_gap = min(worst_gap, gap)
                assert min_eig >= -1e-10 * norm, (
                    f"{name}/{model} trial {trial}: SB information not above "
                    f"pilot information (min eig ratio {gap:.2e})")
    report("A2", True,
           f"SB <= OP on every trial/model; worst information-order eigenvalue "
           f"ratio {worst_gap:.2e} >= -1e-10")


def test_a3_snr_monotonicity():
    """All 8 sweep curves non-increasing in SNR with paired draws."""
    config = ScenarioConfig(snr_db=10.0, trials=10, master_seed=3, **BASE)
    result = sweep_snr(config, (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0),
                       ula_elements=24, ucya_ring=8, ucya_layers=3)
    series = {}
    for row in result.rows:
        series.setdefault((row.geometry, row.model, row.method), []).append(
            (row.sweep_value, row.mean_crb))
    assert len(series) == 8
    violations = []
    for key, points in series.items():
        points.sort()
        values = [v for _, v in points]
        if not all(a >= b for a, b in zip(values, values[1:])):
            violations.append(key)
    report("A3", not violations,
           f"8 curves over 7 SNR points, non-increasing: "
           f"{'all' if not violations else violations}")
    assert not violations


def test_a4_unstructured_bound_geometry_independent(a1_runs):
    """Identical draws: unstructured pilot-only scalars agree across shapes."""
    ula = a1_runs["ULA"].per_trial[("unstructured", "OP")]
    ucya = a1_runs["UCyA"].per_trial[("unstructured", "OP")]
    rel = np.abs(ula - ucya) / np.abs(ula)
    report("A4", bool(np.all(rel <= 1e-12)),
           f"max relative gap {rel.max():.2e} <= 1e-12 over {ula.size} trials")
    assert np.all(rel <= 1e-12)


def test_a5_cylindrical_beats_linear_structured_sb():
    """Layer sweep: cylindrical structured-SB mean below linear at every point."""
    start = time.time()
    config = ScenarioConfig(snr_db=5.0, trials=100, master_seed=0, **BASE)
    result = sweep_layers(config, (2, 3, 4), ucya_ring=12)
    by_point = {}
    for row in result.rows:
        if row.model == "structured" and row.method == "SB":
            by_point.setdefault(row.sweep_value, {})[row.geometry] = row.mean_crb
    ok = {v: vals["UCyA"] <= vals["ULA"] for v, vals in sorted(by_point.items())}
    detail = ", ".join(
        f"layers={int(v)}: UCyA={vals['UCyA']:.2e} vs ULA={vals['ULA']:.2e}"
        for v, vals in sorted(by_point.items()))
    report("A5", all(ok.values()), f"{detail} ({time.time() - start:.1f}s)")
    assert all(ok.values())


def _fd_column(params, geometry, which, l, j, eps=1e-6):
    def shifted(delta):
        zeniths = params.zeniths.copy()
        azimuths = params.azimuths.copy()
        if which == "zenith":
            zeniths[l, j] += delta
        else:
            azimuths[l, j] += delta
        return assemble_channel(PathParameterSet(
            gains=params.gains, zeniths=zeniths, azimuths=azimuths), geometry)
    return (shifted(eps) - shifted(-eps)) / (2 * eps)


def test_a6_jacobian_matches_finite_differences():
    """Angle columns against central differences, 100 random configurations."""
    rng = np.random.default_rng(606)
    worst = {"wirtinger": 0.0, "paper": 0.0}
    for _ in range(100):
        num_tx = int(rng.integers(1, 3))
        num_paths = int(rng.integers(1, 4))
        if rng.uniform() < 0.5:
            geometry = build_ula(int(rng.integers(2, 9)), 0.5)
        else:
            geometry = build_ucya(int(rng.integers(2, 5)), int(rng.integers(1, 3)),
                                  0.5, 0.5)
        params = draw_path_parameters(rng, num_paths, num_tx)
        for convention, blocks in (("wirtinger", ("zenith", "azimuth")),
                                   ("paper", ("zenith",))):
            jac = channel_jacobian(params, geometry, convention)
            for which in blocks:
                block = jac.block(which)
                for j in range(num_tx):
                    for l in range(num_paths):
                        fd = _fd_column(params, geometry, which, l, j)
                        col = block[:, j * num_paths + l]
                        ref = max(np.linalg.norm(fd), 1e-12)
                        rel = np.linalg.norm(col - fd) / ref
                        worst[convention] = max(worst[convention], rel)
    passed = all(v <= 1e-5 for v in worst.values())
    report("A6", passed,
           f"worst relative error: wirtinger(zenith+azimuth)={worst['wirtinger']:.2e}, "
           f"paper(zenith)={worst['paper']:.2e} (tolerance 1e-5)")
    assert passed


def test_a7_closed_form_pilot_bound():
    """Orthogonal pilots: unstructured pilot-only scalar is exactly
    noise_variance / (K * K_p)."""
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(20):
        num_tx = int(rng.integers(1, 5))
        k = int(rng.integers(num_tx, 65))
        num_pilots = int(rng.integers(1, 17))
        num_rx = int(rng.integers(1, 33))
        snr_db = float(rng.uniform(-10, 30))
        noise = 10.0 ** (-snr_db / 10.0)
        pilots = make_orthogonal_pilots(num_pilots, k, num_tx, noise)
        bound = invert_fim(pilot_fim_unstructured(pilots, num_rx))
        expected = noise / (k * num_pilots)
        rel = abs(crb_scalar(bound) - expected) / expected
        worst = max(worst, rel)
    report("A7", worst <= 1e-10, f"worst relative error {worst:.2e} <= 1e-10")
    assert worst <= 1e-10


def _random_data_fim_instance(rng):
    num_tx = int(rng.integers(1, 3))
    num_rx = int(rng.integers(1, 3))
    k = int(rng.integers(num_tx, 5))
    num_data = int(rng.integers(1, 5))
    noise = float(rng.uniform(0.3, 2.0))
    sig = rng.uniform(0.5, 2.0, num_tx)
    pilots = make_orthogonal_pilots(1, k, num_tx, noise, signal_variance_per_tx=sig)
    h = (rng.standard_normal(num_tx * num_rx)
         + 1j * rng.standard_normal(num_tx * num_rx)) / np.sqrt(2)
    return h, pilots, num_data, num_rx


def test_a8_data_information_fast_path_matches_naive():
    """Structure-exploiting data FIM equals the literal full-covariance one."""
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(20):
        h, pilots, num_data, num_rx = _random_data_fim_instance(rng)
        fast = data_fim_unstructured(h, pilots, num_data, num_rx).matrix
        naive = data_fim_unstructured_naive(h, pilots, num_data, num_rx).matrix
        scale = np.abs(naive).max()
        worst = max(worst, np.abs(fast - naive).max() / scale)
    report("A8", worst <= 1e-8, f"worst relative deviation {worst:.2e} <= 1e-8")
    assert worst <= 1e-8


def test_a9_information_matrices_hermitian_psd():
    """Hermitian/PSD checks over the information matrices the other
    criteria exercise (regenerated with the same seeds)."""
    matrices = []
    for name, geom in A1_GEOMETRIES.items():
        for trial in range(0, A1_CONFIG.trials, 5):
            params = draw_trial_parameters(A1_CONFIG, trial)
            fims, _ = trial_fims(A1_CONFIG, geom, params)
            matrices.extend(fims.values())
    rng = np.random.default_rng(808)
    for _ in range(20):
        h, pilots, num_data, num_rx = _random_data_fim_instance(rng)
        matrices.append(data_fim_unstructured(h, pilots, num_data, num_rx))
        matrices.append(data_fim_unstructured_naive(h, pilots, num_data, num_rx))
        matrices.append(pilot_fim_unstructured(pilots, num_rx))
    worst_herm = max(m.hermitian_defect() for m in matrices)
    worst_eig = min(m.min_eigenvalue_ratio() for m in matrices)
    passed = worst_herm <= HERMITIAN_TOL and worst_eig >= -PSD_TOL
    report("A9", passed,
           f"{len(matrices)} matrices: hermitian defect {worst_herm:.2e} <= 1e-10, "
           f"min eigenvalue ratio {worst_eig:.2e} >= -1e-10")
    assert passed


def test_a10_byte_identical_reruns(tmp_path):
    """Same seed and config: identical CSV bytes, any parallelism."""
    args = ["sweep-snr", "--snr-db", "0", "10", "--n-ula", "8", "--n-uca", "4",
            "--n-3d", "2", "--trials", "5", "--seed", "99", "--k", "16",
            "--k-pilot", "4", "--k-data", "8"]
    paths = [tmp_path / f"run{i}.csv" for i in range(3)]
    assert cli_main(args + ["--jobs", "1", "--out", str(paths[0])]) == 0
    assert cli_main(args + ["--jobs", "1", "--out", str(paths[1])]) == 0
    assert cli_main(args + ["--jobs", "2", "--out", str(paths[2])]) == 0
    blobs = [p.read_bytes() for p in paths]
    identical = blobs[0] == blobs[1] == blobs[2]
    report("A10", identical,
           f"3 runs (serial x2, 2 workers x1) -> {len(blobs[0])} identical bytes")
    assert identical
