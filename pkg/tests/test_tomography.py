import numpy as np
import pytest
from helpers import full_exact_stats, random_density_matrix

from rfi_qkd_lab.states import (
    DensityMatrix,
    apply_misalignment,
    apply_z_tilt,
    bell_state,
    frame_unitaries,
    isotropic_state,
    measure_joint,
    sample_stats,
    trace_distance,
)
from rfi_qkd_lab.tomography import (
    TomographyInput,
    correlators_from_stats,
    expected_settings,
    extract_spectrum,
    reconstruct_state,
    z_error_distribution,
)
from rfi_qkd_lab.weyl import mub_eigenbases
from rfi_qkd_lab.witness import correlators_from_state


def test_expected_settings():
    assert expected_settings(2) == ["Z", "XZ0", "XZ1"]
    assert len(expected_settings(5)) == 6


def test_missing_pair_is_named():
    bases = dict(mub_eigenbases(2))
    stats = []
    for a in expected_settings(2):
        for b in expected_settings(2):
            if (a, b) != ("XZ1", "Z"):
                stats.append(measure_joint(bell_state(2), bases[a], bases[b], a, b))
    with pytest.raises(ValueError, match="XZ1"):
        TomographyInput.from_list(2, stats)


def test_duplicate_pair_rejected():
    bases = dict(mub_eigenbases(2))
    st = measure_joint(bell_state(2), bases["Z"], bases["Z"], "Z", "Z")
    with pytest.raises(ValueError, match="duplicate"):
        TomographyInput.from_list(2, [st, st])


def test_bell_state_correlators_from_stats():
    t = correlators_from_stats(full_exact_stats(bell_state(2), 2))
    assert abs(t.values[1, 0, 1, 0] - 1.0) < 1e-12  # <X x X> = 1
    assert abs(t.values[1, 1, 1, 1] - 1.0) < 1e-12  # <XZ x XZ> = -<Y x Y> = 1
    assert abs(t.values[0, 1, 0, 1] - 1.0) < 1e-12  # <Z x Z> = 1


def test_maximally_mixed_correlators_from_stats():
    t = correlators_from_stats(full_exact_stats(DensityMatrix(np.eye(9) / 9), 3))
    v = np.array(t.values)
    v[0, 0, 0, 0] = 0.0
    assert np.abs(v).max() < 1e-12


@pytest.mark.parametrize("d", (2, 3, 5))
def test_stats_correlators_match_state_correlators(d):
    rng = np.random.default_rng(7 + d)
    for _ in range(8):
        rho = random_density_matrix(rng, d * d)
        via_stats = correlators_from_stats(full_exact_stats(rho, d))
        via_state = correlators_from_state(rho)
        assert np.abs(np.array(via_stats.values) - np.array(via_state.values)).max() < 1e-10


@pytest.mark.parametrize("d", (2, 3, 5))
def test_reconstruction_round_trip(d):
    rng = np.random.default_rng(70 + d)
    for _ in range(8):
        rho = random_density_matrix(rng, d * d)
        rec = reconstruct_state(correlators_from_stats(full_exact_stats(rho, d)))
        assert np.linalg.norm(rec.state.matrix - rho.matrix) < 1e-9
        assert rec.repair_distance < 1e-10
        assert rec.reliable


def test_reconstruct_bell_and_mixed_examples():
    rec = reconstruct_state(correlators_from_state(bell_state(3)))
    assert np.linalg.norm(rec.state.matrix - bell_state(3).matrix) < 1e-9
    rec = reconstruct_state(correlators_from_state(DensityMatrix(np.eye(9) / 9)))
    assert np.allclose(rec.state.matrix, np.eye(9) / 9, atol=1e-12)


def test_sampled_reconstruction_is_repaired_and_close():
    iso = isotropic_state(2, 0.01)
    bases = dict(mub_eigenbases(2))
    stats = []
    for i, a in enumerate(expected_settings(2)):
        for j, b in enumerate(expected_settings(2)):
            exact = measure_joint(iso, bases[a], bases[b], a, b)
            stats.append(sample_stats(exact, 10**6, seed=100 + 10 * i + j))
    rec = reconstruct_state(correlators_from_stats(TomographyInput.from_list(2, stats)))
    assert rec.reliable
    assert rec.repair_distance >= 0.0
    assert np.linalg.eigvalsh(rec.state.matrix).min() >= -1e-9
    assert abs(np.trace(rec.state.matrix).real - 1.0) < 1e-10
    assert trace_distance(rec.state.matrix, iso.matrix) < 0.01


def test_unreliable_flag_full_pipeline_small_sample():
    iso = isotropic_state(2, 0.05)
    bases = dict(mub_eigenbases(2))
    stats = []
    for i, a in enumerate(expected_settings(2)):
        for j, b in enumerate(expected_settings(2)):
            exact = measure_joint(iso, bases[a], bases[b], a, b)
            stats.append(sample_stats(exact, 40, seed=3 * i + j))
    rec = reconstruct_state(correlators_from_stats(TomographyInput.from_list(2, stats)), repair_threshold=1e-4)
    assert not rec.reliable


def test_extract_spectrum_isotropic_example():
    rep = extract_spectrum(isotropic_state(2, 0.01))
    assert np.allclose(rep.lambda_, [0.985, 0.005, 0.005, 0.005], atol=1e-10)
    assert rep.bell_diag_residual < 1e-10
    assert rep.bell_lambda is not None
    assert np.allclose(z_error_distribution(rep.bell_lambda), [0.99, 0.01], atol=1e-12)


def test_extract_spectrum_bell_state():
    rep = extract_spectrum(bell_state(3))
    assert np.allclose(rep.lambda_, [1.0] + [0.0] * 8, atol=1e-10)
    e = z_error_distribution(rep.bell_lambda)
    assert np.allclose(e, [1.0, 0.0, 0.0], atol=1e-10)


@pytest.mark.parametrize("d", (2, 3, 5))
def test_extract_spectrum_undoes_misalignment(d):
    iso = isotropic_state(d, 0.02)
    u, v = frame_unitaries(d, 23)
    rep = extract_spectrum(apply_misalignment(iso, u, v))
    assert np.allclose(np.sort(rep.lambda_), np.sort(np.linalg.eigvalsh(iso.matrix)), atol=1e-9)
    assert rep.bell_diag_residual < 1e-8
    e = z_error_distribution(rep.bell_lambda)
    assert abs(e[0] - 0.98) < 1e-8


def test_tilted_pure_state_reports_large_residual():
    tilted = apply_z_tilt(bell_state(2), np.radians(30.0))
    rep = extract_spectrum(tilted)
    assert rep.bell_diag_residual > 1e-3
    assert rep.bell_lambda is None


@pytest.mark.parametrize("d", (2, 3))
def test_qber_matches_error_distribution_for_bell_diagonal(d):
    from rfi_qkd_lab.states import bell_vector
    from rfi_qkd_lab.states import qber as qber_fn

    rng = np.random.default_rng(40 + d)
    for _ in range(10):
        table = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        m = np.zeros((d * d, d * d), dtype=complex)
        for k in range(d):
            for ell in range(d):
                ket = bell_vector(d, k, ell)
                m += table[k, ell] * np.outer(ket, ket.conj())
        rho = DensityMatrix(m)
        assert abs(qber_fn(rho) - (1.0 - z_error_distribution(table)[0])) < 1e-9


def test_z_error_distribution_examples_and_errors():
    lam = np.array([[0.985, 0.005], [0.005, 0.005]])
    assert np.allclose(z_error_distribution(lam), [0.99, 0.01])
    lam3 = np.full((3, 3), 0.0016666666666667)
    lam3[0, 0] = 0.9866666666666667
    assert np.allclose(z_error_distribution(lam3), [0.99, 0.005, 0.005])
    with pytest.raises(ValueError):
        z_error_distribution(np.array([0.985, 0.005, 0.005, 0.005]))  # unlabeled


def test_spectrum_report_json_shape():
    rep = extract_spectrum(isotropic_state(2, 0.01))
    doc = rep.to_json_dict()
    assert set(doc) == {"lambda", "residual"}
    assert len(doc["lambda"]) == 4
