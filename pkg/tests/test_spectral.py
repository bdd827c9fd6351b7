"""Tests for the spectral kernels.

Expected values marked as frozen were computed with the naive reference
implementations at the top of this file (plain trigonometric sums, no shared
code with the module under test).
"""

import numpy as np
import pytest

from fecam import spectral
from fecam.spectral import (
    ORTHO,
    UNNORMALIZED,
    FourierSeriesModel,
    JumpProbe,
    Spectrum,
    boundary_overshoot_compare,
    dct_basis,
    dct_forward,
    dct_inverse,
    dct_matrix,
    dct_via_even_dft,
    dft_forward,
    dft_inverse,
    energy_compaction_report,
    fourier_partial_sum,
    gibbs_overshoot,
    gibbs_sweep,
    low_frequency_signal,
    pulse_wave_probe,
    pulse_wave_series,
    reconstruct_truncated,
    square_wave_probe,
    square_wave_series,
    symmetric_extension,
)


# --- reference implementations (oracles) -----------------------------------

def naive_dct(x, normalization):
    n = len(x)
    out = np.array([
        sum(x[i] * np.cos(np.pi * l / n * (i + 0.5)) for i in range(n))
        for l in range(n)
    ])
    if normalization == ORTHO:
        scale = np.full(n, np.sqrt(2.0 / n))
        scale[0] = np.sqrt(1.0 / n)
        out = out * scale
    return out


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    return (np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)) @ np.asarray(x, complex)


# --- dct_basis --------------------------------------------------------------

def test_basis_dc_row_is_one():
    for i in range(8):
        assert dct_basis(0, i, 8) == 1.0


def test_basis_frozen_values():
    assert dct_basis(1, 0, 4) == pytest.approx(0.9238795325112867, abs=1e-15)
    assert dct_basis(2, 1, 4) == pytest.approx(-0.7071067811865475, abs=1e-15)


def test_basis_index_out_of_range():
    with pytest.raises(ValueError):
        dct_basis(4, 0, 4)
    with pytest.raises(ValueError):
        dct_basis(0, -1, 4)


# --- forward / inverse DCT ---------------------------------------------------

def test_constant_signal_is_pure_dc():
    spec = dct_forward([1.0, 1.0, 1.0, 1.0], UNNORMALIZED)
    assert spec.coefficients[0] == pytest.approx(4.0, abs=1e-12)
    assert np.max(np.abs(spec.coefficients[1:])) < 1e-12


def test_one_hot_spectrum_frozen():
    spec = dct_forward([1.0, 0.0, 0.0, 0.0], UNNORMALIZED)
    expected = [1.0, 0.9238795325112867, 0.7071067811865476, 0.38268343236508984]
    np.testing.assert_allclose(spec.coefficients, expected, atol=1e-15)


def test_forward_matches_naive_both_normalizations():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(1, 33))
        x = rng.normal(size=n)
        for norm in (UNNORMALIZED, ORTHO):
            np.testing.assert_allclose(
                dct_forward(x, norm).coefficients, naive_dct(x, norm), atol=1e-10)


def test_forward_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        dct_forward([])
    with pytest.raises(ValueError):
        dct_forward([1.0, np.nan])
    with pytest.raises(ValueError):
        dct_forward([1.0], "banana")


def test_inverse_of_constant_spectrum():
    x = dct_inverse(Spectrum([4.0, 0.0, 0.0, 0.0], UNNORMALIZED))
    np.testing.assert_allclose(x, np.ones(4), atol=1e-12)


def test_inverse_one_hot_ortho_frozen():
    x = dct_inverse(Spectrum([0.0, 1.0, 0.0, 0.0], ORTHO))
    expected = [0.6532814824381883, 0.27059805007309856,
                -0.2705980500730985, -0.6532814824381883]
    np.testing.assert_allclose(x, expected, atol=1e-15)


def test_round_trip_many_signals():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 64))
        x = rng.normal(size=n) * 10
        for norm in (UNNORMALIZED, ORTHO):
            back = dct_inverse(dct_forward(x, norm))
            worst = max(worst, float(np.max(np.abs(back - x))))
    assert worst < 1e-9


def test_linearity():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=24), rng.normal(size=24)
    a, b = 2.5, -1.25
    combined = dct_forward(a * x + b * y).coefficients
    parts = a * dct_forward(x).coefficients + b * dct_forward(y).coefficients
    np.testing.assert_allclose(combined, parts, atol=1e-9)


def test_ortho_matrix_is_orthogonal_up_to_512():
    for n in (4, 16, 128, 512):
        g = dct_matrix(n, ORTHO)
        assert np.max(np.abs(g @ g.T - np.eye(n))) < 1e-10


def test_dc_coefficient_is_length_times_mean():
    # The bare-cosine index-0 coefficient equals L * mean(x) to rounding.
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(4, 129))
        x = rng.normal(size=n) * rng.uniform(0.1, 100)
        f0 = dct_forward(x, UNNORMALIZED).coefficients[0]
        ref = n * np.mean(x)
        assert abs(f0 - ref) <= 1e-12 * max(abs(ref), 1e-300)


# --- DFT ---------------------------------------------------------------------

def test_dft_constant_signal():
    bins = dft_forward([1.0, 1.0, 1.0, 1.0])
    assert bins[0] == pytest.approx(2.0)
    assert np.max(np.abs(bins[1:])) < 1e-12


def test_dft_alternating_signal_hits_nyquist_only():
    bins = dft_forward([1.0, -1.0, 1.0, -1.0])
    assert abs(bins[2]) == pytest.approx(2.0)
    assert np.max(np.abs(bins[[0, 1, 3]])) < 1e-12


def test_dft_round_trip_and_naive_agreement():
    rng = np.random.default_rng(13)
    for _ in range(50):
        x = rng.normal(size=16)
        bins = dft_forward(x)
        np.testing.assert_allclose(bins, naive_dft(x), atol=1e-10)
        np.testing.assert_allclose(dft_inverse(bins), x, atol=1e-9)


def test_dft_rejects_empty():
    with pytest.raises(ValueError):
        dft_forward([])
    with pytest.raises(ValueError):
        dft_inverse([])


# --- symmetric extension and the even-DFT identity ---------------------------

def test_extension_definition():
    np.testing.assert_array_equal(symmetric_extension([1.0, 2.0, 3.0]),
                                  [1.0, 2.0, 3.0, 3.0, 2.0, 1.0])


def test_extension_is_palindromic():
    rng = np.random.default_rng(17)
    x = rng.normal(size=9)
    ext = symmetric_extension(x)
    np.testing.assert_array_equal(ext, ext[::-1])


def test_dct_equals_phase_corrected_even_dft():
    rng = np.random.default_rng(19)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 65))
        x = rng.normal(size=n) * 5
        direct = dct_forward(x, UNNORMALIZED).coefficients
        via_dft = dct_via_even_dft(x)
        worst = max(worst, float(np.max(np.abs(direct - via_dft))))
    assert worst < 1e-9


# --- Fourier partial sums -----------------------------------------------------

def test_square_wave_first_harmonic_peak():
    model = square_wave_series(amplitude=1.0, max_order=1)
    assert fourier_partial_sum(model, 1, model.period / 4) == pytest.approx(
        4 / np.pi, abs=1e-12)


def test_order_zero_is_half_a0():
    model = pulse_wave_series(duty=1 / 3, max_order=10)
    for x in (0.0, 0.31, 0.77):
        assert fourier_partial_sum(model, 0, x) == pytest.approx(model.a0 / 2)


def test_order_above_max_rejected():
    model = square_wave_series(max_order=5)
    with pytest.raises(ValueError):
        fourier_partial_sum(model, 6, 0.1)


def test_partial_sum_converges_to_jump_midpoint():
    # At the jump the partial sum tends to the average of the one-sided
    # limits; the asymmetric pulse makes this nontrivial at finite order.
    model = pulse_wave_series(duty=1 / 3, max_order=10_000)
    probe = pulse_wave_probe()
    midpoint = 0.5 * (probe.left_limit + probe.right_limit)
    assert fourier_partial_sum(model, 10_000, probe.location) == pytest.approx(
        midpoint, abs=1e-3)


# --- Gibbs overshoot ----------------------------------------------------------

def test_overshoot_converges_to_constant():
    model = square_wave_series(amplitude=1.0, max_order=10_000)
    probe = square_wave_probe(1.0)  # jump a = 2
    target = probe.jump * spectral.GIBBS_CONSTANT
    overshoot = gibbs_overshoot(model, probe, 10_000)
    assert overshoot == pytest.approx(0.17897974780550063, abs=1e-12)  # frozen
    assert abs(overshoot - target) / target < 0.005


def test_overshoot_errors_shrink_monotonically():
    model = square_wave_series(amplitude=1.0, max_order=10_000)
    probe = square_wave_probe(1.0)
    target = probe.jump * spectral.GIBBS_CONSTANT
    errs = [abs(gibbs_overshoot(model, probe, n) - target) for n in (100, 1000, 10_000)]
    assert errs[0] > errs[1] > errs[2]


def test_negative_jump_flips_overshoot_sign():
    model = square_wave_series(amplitude=-1.0, max_order=10_000)
    probe = square_wave_probe(-1.0)  # jump a = -2
    overshoot = gibbs_overshoot(model, probe, 10_000)
    assert overshoot == pytest.approx(-0.17897974780550063, abs=1e-12)


def test_overshoot_is_linear_in_jump():
    big = gibbs_overshoot(square_wave_series(2.0, max_order=4000),
                          square_wave_probe(2.0), 4000)
    small = gibbs_overshoot(square_wave_series(1.0, max_order=4000),
                            square_wave_probe(1.0), 4000)
    assert big == pytest.approx(2 * small, rel=1e-9)


def test_zero_jump_rejected():
    model = square_wave_series(max_order=10)
    with pytest.raises(ValueError):
        gibbs_overshoot(model, JumpProbe(0.0, 1.0, 1.0), 10)


def test_gibbs_sweep_rows_and_csv(tmp_path):
    model = square_wave_series(amplitude=1.0, max_order=1000)
    probe = square_wave_probe(1.0)
    out = tmp_path / "gibbs.csv"
    rows = gibbs_sweep(model, probe, [10, 100, 1000], path=out)
    assert [r[0] for r in rows] == [10, 100, 1000]
    assert all(r[2] == pytest.approx(2 * spectral.GIBBS_CONSTANT) for r in rows)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "N,overshoot,target"
    assert len(lines) == 4


# --- truncated reconstruction -------------------------------------------------

def test_full_reconstruction_is_exact_both_kinds():
    rng = np.random.default_rng(23)
    x = rng.normal(size=16)
    for kind in ("dct", "dft"):
        _, err = reconstruct_truncated(x, 16, kind)
        assert err < 1e-9


def test_signal_inside_kept_subspace_has_zero_error():
    i = np.arange(12)
    x = np.cos(np.pi * 2 / 12 * (i + 0.5))  # pure index-2 basis vector
    _, err = reconstruct_truncated(x, 3, "dct")
    assert err < 1e-12


def test_low_frequency_fixture_favors_dct_at_n5():
    sig = low_frequency_signal()
    _, dct_err = reconstruct_truncated(sig, 5, "dct")
    _, dft_err = reconstruct_truncated(sig, 5, "dft")
    assert dct_err < dft_err
    assert dft_err == pytest.approx(1.100724643550, abs=1e-9)  # frozen


def test_component_count_out_of_range():
    with pytest.raises(ValueError):
        reconstruct_truncated(np.ones(8), 0, "dct")
    with pytest.raises(ValueError):
        reconstruct_truncated(np.ones(8), 9, "dft")
    with pytest.raises(ValueError):
        reconstruct_truncated(np.ones(8), 4, "wavelet")


def test_dft_truncation_output_is_real_for_random_input():
    rng = np.random.default_rng(29)
    x = rng.normal(size=16)
    recon, _ = reconstruct_truncated(x, 6, "dft")
    assert recon.dtype == np.float64


# --- boundary overshoot comparison ---------------------------------------------

def test_ramp_boundary_error_dct_below_dft():
    ramp = np.arange(16, dtype=float)
    dct_err, dft_err = boundary_overshoot_compare(ramp, 5)
    assert dct_err < dft_err
    assert dct_err == pytest.approx(0.3778647, abs=1e-6)  # frozen
    assert dft_err == pytest.approx(5.5, abs=1e-9)        # frozen


def test_constant_signal_has_no_boundary_error():
    dct_err, dft_err = boundary_overshoot_compare(np.full(16, 3.0), 4)
    assert dct_err < 1e-12 and dft_err < 1e-12


def test_full_truncation_has_no_boundary_error():
    ramp = np.arange(16, dtype=float)
    dct_err, dft_err = boundary_overshoot_compare(ramp, 16)
    assert dct_err < 1e-9 and dft_err < 1e-9


def test_boundary_compare_writes_csv(tmp_path):
    out = tmp_path / "boundary.csv"
    boundary_overshoot_compare(np.arange(16.0), 5, path=out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,dct_err,dft_err"
    assert lines[1].startswith("5,")


# --- energy compaction ----------------------------------------------------------

def test_compaction_report_on_fixture():
    rows = energy_compaction_report(low_frequency_signal(), [5, 10, 15])
    assert [r[0] for r in rows] == [5, 10, 15]
    for _, dct_err, dft_err in rows:
        assert dct_err < dft_err
    # The fixture lies inside the first five basis vectors, so every DCT
    # truncation error is rounding noise while the DFT errors stay finite.
    assert all(r[1] < 1e-12 for r in rows)
    dft_errs = [r[2] for r in rows]
    assert dft_errs[0] > dft_errs[1] > dft_errs[2]


def test_compaction_full_count_both_zero():
    rows = energy_compaction_report(low_frequency_signal(), [16])
    assert rows[0][1] < 1e-9 and rows[0][2] < 1e-9


def test_compaction_single_component_on_constant():
    rows = energy_compaction_report(np.full(16, 2.0), [1])
    assert rows[0][1] < 1e-12 and rows[0][2] < 1e-12


def test_compaction_csv_round_trip(tmp_path):
    out = tmp_path / "compaction.csv"
    rows = energy_compaction_report(low_frequency_signal(), [5, 10, 15], path=out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,dct_err,dft_err"
    for row, line in zip(rows, lines[1:]):
        n, dct_err, dft_err = line.split(",")
        assert int(n) == row[0]
        assert float(dct_err) == pytest.approx(row[1], rel=1e-8)
        assert float(dft_err) == pytest.approx(row[2], rel=1e-8)


def test_compaction_rejects_empty_ns():
    with pytest.raises(ValueError):
        energy_compaction_report(low_frequency_signal(), [])
