"""Estimator checks against synthesized traces with known statistics."""

import dataclasses

import numpy as np
import pytest

from csilab.dsp import FilterSpec, butterworth_bandpass
from csilab.errors import BandError, DcMissing, DegenerateSet
from csilab.estimators import (
    csi_frequency_test,
    cutoff_sweep,
    g2_curves,
    normalized_spectra,
    sql_spectra,
    violation_factor,
)
from csilab.synth import (
    AcquisitionConfig,
    FwmModel,
    TraceSet,
    apply_loss,
    coherent_traces,
    quantize,
    split_and_detect,
    synthesize,
)
from csilab.theory import ExcessNoiseSpec, SqueezeParams


def g10_model(**kwargs):
    kwargs.setdefault("gain_bandwidth", 20e6)
    kwargs.setdefault("delay", 8e-9)
    kwargs.setdefault("eta", 0.8)
    kwargs.setdefault("excess", ExcessNoiseSpec(conj_level=3.0))
    return FwmModel.from_params(
        SqueezeParams.from_gain(10.0, alpha=100.0), probe_dc=1.0, **kwargs
    )


@pytest.fixture(scope="module")
def acq500():
    return AcquisitionConfig(num_sets=500, samples_per_set=10000, rng_seed=71)


@pytest.fixture(scope="module")
def ts_g10(acq500):
    return synthesize(g10_model(), acq500)


@pytest.fixture(scope="module")
def ts_coherent(acq500):
    return coherent_traces(acq500)


def subset(ts, num_sets):
    return dataclasses.replace(
        ts,
        codes=ts.codes[:, :num_sets].copy(),
        acquisition=dataclasses.replace(ts.acquisition, num_sets=num_sets),
    )


class TestG2Curves:
    def test_cross_peak_sits_at_injected_delay(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=100e-9)
        tau_peak = rep.tau_grid[np.argmax(rep.g2_ab)]
        assert tau_peak == pytest.approx(8e-9, abs=2e-9)
        assert rep.delay == pytest.approx(8e-9, abs=1e-9)

    def test_autocorrelations_peak_at_zero(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=100e-9)
        for curve in (rep.g2_aa, rep.g2_bb):
            tau_peak = rep.tau_grid[np.argmax(curve)]
            assert abs(tau_peak) <= 2e-9
            assert curve[np.argmin(np.abs(rep.tau_grid))] > 1.0

    def test_curves_revert_to_one_at_long_lag(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=400e-9)
        far = np.abs(rep.tau_grid) > 300e-9
        for curve, sem in (
            (rep.g2_ab, rep.g2_ab_sem),
            (rep.g2_aa, rep.g2_aa_sem),
            (rep.g2_bb, rep.g2_bb_sem),
        ):
            resid = np.abs(curve[far] - 1.0) / sem[far]
            assert np.mean(resid < 4.0) > 0.95

    def test_deterministic(self, ts_g10):
        a = g2_curves(ts_g10, tau_max=50e-9)
        b = g2_curves(ts_g10, tau_max=50e-9)
        np.testing.assert_array_equal(a.g2_ab, b.g2_ab)
        assert a.v_mean == b.v_mean

    def test_report_internal_consistency(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=50e-9)
        assert rep.num_degenerate == 0
        assert rep.v_pooled == pytest.approx(
            (rep.eps_aa + rep.eps_bb) / (2.0 * rep.eps_ab_peak), rel=1e-12
        )
        assert rep.v_sem == pytest.approx(
            rep.v_sigma / np.sqrt(rep.v_per_set.size), rel=1e-12
        )
        assert rep.sigma_count == pytest.approx(
            abs(1.0 - rep.v_mean) / rep.v_sem, rel=1e-12
        )
        assert rep.violated == (rep.v_mean < 1.0)

    def test_pooled_agrees_with_per_set_mean(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=50e-9)
        assert abs(rep.v_pooled - rep.v_mean) <= rep.v_sigma


class TestCoherentBaseline:
    def test_all_curves_flat_at_one(self, ts_coherent):
        rep = g2_curves(ts_coherent, tau_max=100e-9)
        for curve, sem in (
            (rep.g2_ab, rep.g2_ab_sem),
            (rep.g2_aa, rep.g2_aa_sem),
            (rep.g2_bb, rep.g2_bb_sem),
        ):
            resid = np.abs(curve - 1.0) / sem
            assert np.max(resid) < 5.0
            assert np.mean(resid < 3.0) > 0.95

    def test_no_delay_peak_reports_zero(self, ts_coherent):
        rep = g2_curves(ts_coherent, tau_max=50e-9)
        assert rep.delay == 0.0

    def test_total_noise_at_sql(self, ts_coherent):
        rep = normalized_spectra(ts_coherent, compensate=False)
        band = (rep.frequencies > 1e6) & (rep.frequencies < 300e6)
        assert np.mean(rep.s_diff_norm[band]) == pytest.approx(1.0, abs=0.01)
        assert rep.squeezing_db_max < 0.3


class TestThermalBeam:
    def test_gaussian_intensity_noise_gives_g2_of_two(self):
        # bright beam with normally ordered variance equal to dc^2 models
        # chaotic light in the high mean-photon-number limit, so the
        # zero-lag split autocorrelation lands at g2 = 2
        acq = AcquisitionConfig(
            num_sets=400, samples_per_set=8192, rng_seed=5, full_scale=3.0
        )
        rate = acq.sample_rate
        dc = 1.0
        q = 1e-10
        rng = np.random.default_rng(acq.rng_seed)
        n = acq.samples_per_set
        freqs = np.fft.rfftfreq(n, 1.0 / rate)
        shape = 1.0 / (1.0 + (freqs / 5e6) ** 4)
        shape[0] = 0.0
        scale = np.sqrt(n * rate / 2.0) * np.sqrt(
            shape / (np.sum(shape) * rate / n)
        )
        halves = []
        for _ in range(2):  # probe-like and conjugate-like beams
            z = rng.standard_normal((acq.num_sets, freqs.size, 2))
            spec = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0) * scale * dc
            mod = np.fft.irfft(spec, n=n, axis=1)
            shot = rng.normal(0.0, np.sqrt(2.0 * q * dc * rate / 2.0), mod.shape)
            parent = mod + shot
            h1, h2 = split_and_detect(parent, dc, acq, q, rng=rng)
            halves.extend([h1, h2])
        codes = np.stack([quantize(h, acq.adc_bits, acq.full_scale) for h in halves])
        ts = TraceSet(
            codes=codes,
            dc_means=np.full(4, dc / 2.0),
            acquisition=acq,
            provenance="thermal-test",
            charge_scale=q,
        )
        rep = g2_curves(ts, tau_max=50e-9)
        i0 = np.argmin(np.abs(rep.tau_grid))
        assert rep.g2_aa[i0] == pytest.approx(2.0, abs=0.05)
        assert rep.g2_bb[i0] == pytest.approx(2.0, abs=0.05)
        # the two beams are independent, so the cross curve stays at 1
        assert np.all(np.abs(rep.g2_ab - 1.0) < 0.1)


class TestViolationFactor:
    def test_matches_report_fields(self, ts_g10):
        rep = g2_curves(ts_g10, tau_max=50e-9)
        v_per_set, v_mean, v_sigma, sigma_count = violation_factor(ts_g10)
        assert v_mean == pytest.approx(rep.v_mean, rel=1e-12)
        assert v_sigma == pytest.approx(rep.v_sigma, rel=1e-12)
        assert v_per_set.size == rep.v_per_set.size

    def test_explicit_delay_matches_estimated(self, ts_g10):
        _, v_auto, _, _ = violation_factor(ts_g10)
        _, v_fixed, _, _ = violation_factor(ts_g10, delay=8e-9)
        assert v_fixed == pytest.approx(v_auto, abs=2e-3)

    def test_sem_shrinks_with_set_count(self, ts_g10):
        sems = {}
        sigmas = {}
        for n in (50, 200, 500):
            rep = g2_curves(subset(ts_g10, n), tau_max=50e-9)
            sems[n] = rep.v_sem
            sigmas[n] = rep.v_sigma
        # per-set spread is a property of one set, not of the ensemble size
        assert sigmas[50] == pytest.approx(sigmas[500], rel=0.35)
        assert sigmas[200] == pytest.approx(sigmas[500], rel=0.25)
        # standard error follows 1/sqrt(num_sets)
        assert sems[50] / sems[500] == pytest.approx(np.sqrt(10.0), rel=0.4)
        assert sems[200] / sems[500] == pytest.approx(np.sqrt(2.5), rel=0.3)

    def test_subset_means_consistent(self, ts_g10):
        rep_all = g2_curves(ts_g10, tau_max=50e-9)
        rep_50 = g2_curves(subset(ts_g10, 50), tau_max=50e-9)
        assert abs(rep_50.v_mean - rep_all.v_mean) < 5.0 * rep_50.v_sem

    def test_anticorrelated_beams_are_degenerate(self, ts_g10):
        ts = subset(ts_g10, 16)
        codes = ts.codes.copy()
        codes[2] = -codes[0]  # conjugate halves mirror the probe with flipped sign
        codes[3] = -codes[1]
        flipped = dataclasses.replace(ts, codes=codes)
        with pytest.raises(DegenerateSet):
            violation_factor(flipped)

    def test_missing_dc_raises(self, ts_g10):
        broken = dataclasses.replace(ts_g10, dc_means=np.zeros(4))
        with pytest.raises(DcMissing):
            violation_factor(broken)


class TestLossInvariance:
    def test_g2_curves_survive_extra_loss(self, ts_g10):
        lossy = apply_loss(ts_g10, 0.5, rng_seed=909)
        a = g2_curves(ts_g10, tau_max=100e-9)
        b = g2_curves(lossy, tau_max=100e-9)
        for ca, sa, cb, sb in (
            (a.g2_ab, a.g2_ab_sem, b.g2_ab, b.g2_ab_sem),
            (a.g2_aa, a.g2_aa_sem, b.g2_aa, b.g2_aa_sem),
            (a.g2_bb, a.g2_bb_sem, b.g2_bb, b.g2_bb_sem),
        ):
            sigma = np.sqrt(sa**2 + sb**2)
            resid = np.abs(ca - cb) / sigma
            assert np.max(resid) < 5.0
            assert np.mean(resid < 3.0) > 0.97

    def test_v_mean_survives_extra_loss(self, ts_g10):
        lossy = apply_loss(ts_g10, 0.5, rng_seed=909)
        a = g2_curves(ts_g10, tau_max=50e-9)
        b = g2_curves(lossy, tau_max=50e-9)
        assert abs(a.v_mean - b.v_mean) < 3.0 * np.hypot(a.v_sem, b.v_sem) + 0.01


class TestSpectra:
    def test_sql_diff_is_pointwise_sum(self, ts_g10):
        sql_p, sql_c, sql_diff = sql_spectra(ts_g10)
        np.testing.assert_allclose(sql_diff.power, sql_p.power + sql_c.power)
        assert sql_diff.num_averages == sql_p.num_averages

    def test_report_carries_delay_and_metrics(self, ts_g10):
        rep = normalized_spectra(ts_g10)
        assert rep.compensated
        assert rep.delay == pytest.approx(8e-9, abs=1e-9)
        assert rep.squeezing_db_max > 3.0
        assert 0 < rep.squeezing_bandwidth < 20e6
        band = (rep.frequencies > 1e6) & (rep.frequencies < 3e6)
        assert np.mean(rep.s_diff_norm[band]) < 0.5

    def test_compensation_deepens_high_frequency_squeezing(self, ts_g10):
        comp = normalized_spectra(ts_g10, compensate=True)
        raw = normalized_spectra(ts_g10, compensate=False)
        sel = (comp.frequencies > 10e6) & (comp.frequencies < 15e6)
        assert np.mean(raw.s_diff_norm[sel]) > np.mean(comp.s_diff_norm[sel])
        assert raw.delay == 0.0

    def test_beam_spectra_sit_far_above_sql(self, ts_g10):
        rep = normalized_spectra(ts_g10)
        band = (rep.frequencies > 1e6) & (rep.frequencies < 10e6)
        assert np.mean(rep.s_p_norm[band]) > 5.0
        assert np.mean(rep.s_c_norm[band]) > 5.0

    def test_band_outside_grid_raises(self, ts_g10):
        with pytest.raises(BandError):
            normalized_spectra(ts_g10, band=(500e3, 2e9))


class TestCsiFrequencyTest:
    def test_quiet_band_flags_violation(self, ts_g10):
        rep = normalized_spectra(ts_g10)
        lhs, rhs, classical = csi_frequency_test(rep, ts_g10, (5e5, 5e6))
        assert lhs < rhs
        assert not classical

    def test_wide_band_swamped_by_excess(self, ts_g10):
        rep = normalized_spectra(ts_g10)
        lhs, rhs, classical = csi_frequency_test(rep, ts_g10, (5e5, 100e6))
        assert classical

    def test_verdict_matches_time_domain(self, ts_g10):
        rate = ts_g10.acquisition.sample_rate
        for band_hi in (5e6, 100e6):
            spec = FilterSpec(f_hi=band_hi, f_lo=5e5, order=10)
            chans = [
                butterworth_bandpass(ts_g10.ac(n), spec, rate)
                for n in ("p1", "p2", "c1", "c2")
            ]
            filtered = dataclasses.replace(
                ts_g10,
                codes=np.stack(
                    [
                        quantize(c, ts_g10.acquisition.adc_bits, ts_g10.step * 256)
                        for c in chans
                    ]
                ),
            )
            # quantizing refiltered floats loses little: the verdicts must agree
            _, v_mean, _, _ = violation_factor(filtered)
            rep = normalized_spectra(ts_g10)
            _, _, classical = csi_frequency_test(rep, ts_g10, (5e5, band_hi))
            assert (v_mean < 1.0) == (not classical)

    def test_band_outside_grid_raises(self, ts_g10):
        rep = normalized_spectra(ts_g10)
        with pytest.raises(BandError):
            csi_frequency_test(rep, ts_g10, (5e5, 2e9))


class TestCutoffSweep:
    def test_violation_restored_below_excess_onset(self, ts_g10):
        rows = cutoff_sweep(ts_g10, [2e6, 10e6, 30e6])
        assert rows.shape == (3, 3)
        v = rows[:, 1]
        assert v[0] < 1.0
        assert v[2] > 1.0
        assert v[0] < v[1] < v[2]

    def test_empty_cutoff_list_raises(self, ts_g10):
        with pytest.raises(BandError):
            cutoff_sweep(ts_g10, [])
