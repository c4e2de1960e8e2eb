"""Estimators for the measured twin-beam quantities.

Input is a TraceSet of four quantized AC channels (p1, p2, c1, c2) plus
recorded DC means.  The split-detection layout makes the shot-noise
self-term drop out of every correlation: products are always taken
between different detectors, never of a channel with itself.

The violation factor V = (eps_aa + eps_bb) / (2 eps_ab) < 1 flags a
nonclassical pair; it is computed per set for statistics and pooled over
the ensemble as a cross-check.  Spectral tests integrate SQL-normalized
spectra over an analysis band; both verdicts must agree on the same band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import (
    FilterSpec,
    Psd,
    butterworth_bandpass,
    compensate_delay,
    estimate_delay,
    psd_estimate,
)
from .errors import BandError, DcMissing, DegenerateSet, NoPeak
from .synth import TraceSet

EDGE_GUARD = 32  # samples dropped at each end after delay compensation


@dataclass(frozen=True)
class CorrelationReport:
    """g2 curves, their eps decomposition and per-set V statistics.

    v_sigma is the set-to-set standard deviation (the spread a single
    10 us set carries); v_sem is v_sigma / sqrt(num_valid) and is what
    the distance-to-classical count uses.
    """

    tau_grid: np.ndarray
    g2_ab: np.ndarray
    g2_aa: np.ndarray
    g2_bb: np.ndarray
    g2_ab_sem: np.ndarray
    g2_aa_sem: np.ndarray
    g2_bb_sem: np.ndarray
    eps_aa: float
    eps_bb: float
    eps_ab_peak: float
    v_per_set: np.ndarray
    v_mean: float
    v_sigma: float
    v_sem: float
    sigma_count: float
    violated: bool
    v_pooled: float
    num_degenerate: int
    delay: float


@dataclass(frozen=True)
class SpectraReport:
    """SQL-normalized noise spectra and the metrics read off them."""

    frequencies: np.ndarray
    s_p_norm: np.ndarray
    s_c_norm: np.ndarray
    s_diff_norm: np.ndarray
    sql_p: Psd
    sql_c: Psd
    sql_diff: Psd
    squeezing_db_max: float
    squeezing_bandwidth: float
    delay: float
    compensated: bool
    smooth_hz: float


def _channels(ts: TraceSet):
    if ts.dc_means is None or np.any(np.asarray(ts.dc_means) <= 0.0):
        raise DcMissing("trace set carries no usable DC means")
    return ts.ac("p1"), ts.ac("p2"), ts.ac("c1"), ts.ac("c2")


def _per_set_curves(x, y, max_lag: int):
    """Per-set circular cross-covariance rows over lags [-max_lag, max_lag]."""
    n = x.shape[1]
    x = x - x.mean(axis=1, keepdims=True)
    y = y - y.mean(axis=1, keepdims=True)
    spec = np.conj(np.fft.rfft(x, axis=1)) * np.fft.rfft(y, axis=1)
    cov = np.fft.irfft(spec, n=n, axis=1) / n
    lags = np.arange(-max_lag, max_lag + 1)
    return lags, cov[:, lags % n]


def _ensemble_delay(probe, conj, rate) -> float:
    try:
        return estimate_delay(probe, conj, rate)
    except NoPeak:
        return 0.0


def g2_curves(ts: TraceSet, tau_max: float = 100e-9) -> CorrelationReport:
    """Normalized intensity correlation curves with per-set V statistics.

    The cross curve correlates the recombined beams, the autos correlate
    the two halves of one beam (shot noise cancels in both cases).  The
    conjugate delay is estimated from the ensemble cross-covariance; the
    cross curve is reported against the raw lag axis, while eps_ab is
    evaluated at the delay-compensated peak.
    """
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    dc_p1, dc_p2, dc_c1, dc_c2 = (float(v) for v in ts.dc_means)
    probe = p1 + p2
    conj = c1 + c2
    dc_p = dc_p1 + dc_p2
    dc_c = dc_c1 + dc_c2

    max_lag = max(4, int(round(tau_max * rate)))
    lags, cross = _per_set_curves(probe, conj, max_lag)
    _, auto_p = _per_set_curves(p1, p2, max_lag)
    _, auto_c = _per_set_curves(c1, c2, max_lag)
    nsets = cross.shape[0]
    root_n = math.sqrt(nsets) if nsets > 1 else 1.0

    g_ab = 1.0 + cross / (dc_p * dc_c)
    g_aa = 1.0 + auto_p / (dc_p1 * dc_p2)
    g_bb = 1.0 + auto_c / (dc_c1 * dc_c2)

    delay = _ensemble_delay(probe, conj, rate)
    stats = _violation_stats(probe, conj, p1, p2, c1, c2, ts.dc_means, rate, delay)

    return CorrelationReport(
        tau_grid=lags / rate,
        g2_ab=g_ab.mean(axis=0),
        g2_aa=g_aa.mean(axis=0),
        g2_bb=g_bb.mean(axis=0),
        g2_ab_sem=g_ab.std(axis=0, ddof=1) / root_n,
        g2_aa_sem=g_aa.std(axis=0, ddof=1) / root_n,
        g2_bb_sem=g_bb.std(axis=0, ddof=1) / root_n,
        delay=delay,
        **stats,
    )


def _violation_stats(probe, conj, p1, p2, c1, c2, dc_means, rate, delay) -> dict:
    """Per-set eps and V values; eps_ab at the compensated ensemble peak."""
    dc_p1, dc_p2, dc_c1, dc_c2 = (float(v) for v in dc_means)
    dc_p = dc_p1 + dc_p2
    dc_c = dc_c1 + dc_c2
    g = EDGE_GUARD

    conj_aligned = compensate_delay(conj, delay, rate) if delay else conj
    pr = probe[:, g:-g] - probe[:, g:-g].mean(axis=1, keepdims=True)
    co = conj_aligned[:, g:-g] - conj_aligned[:, g:-g].mean(axis=1, keepdims=True)

    # After compensation the peak sits at lag zero by construction, so the
    # center lag is fixed a priori (an argmax over the window would select
    # upward noise when the covariance is flat across neighboring lags and
    # bias eps_ab high).  A parabola through the ensemble curve only
    # refines the sub-sample position.
    lags, cov = _per_set_curves(pr, co, 4)
    curve = cov.mean(axis=0)
    i0 = cov.shape[1] // 2
    denom = curve[i0 - 1] - 2.0 * curve[i0] + curve[i0 + 1]
    frac = 0.5 * (curve[i0 - 1] - curve[i0 + 1]) / denom if denom else 0.0
    frac = float(np.clip(frac, -1.0, 1.0))

    # per-set parabola through the fixed three lags, read at the fixed vertex
    ym1, y0, yp1 = cov[:, i0 - 1], cov[:, i0], cov[:, i0 + 1]
    a = 0.5 * (ym1 + yp1) - y0
    b = 0.5 * (yp1 - ym1)
    peak_per_set = y0 + b * frac + a * frac * frac

    eps_ab = peak_per_set / (dc_p * dc_c)
    eps_aa = np.mean(
        (p1 - p1.mean(axis=1, keepdims=True)) * (p2 - p2.mean(axis=1, keepdims=True)),
        axis=1,
    ) / (dc_p1 * dc_p2)
    eps_bb = np.mean(
        (c1 - c1.mean(axis=1, keepdims=True)) * (c2 - c2.mean(axis=1, keepdims=True)),
        axis=1,
    ) / (dc_c1 * dc_c2)

    valid = eps_ab > 0.0
    num_degenerate = int(np.count_nonzero(~valid))
    if np.count_nonzero(valid) < 2:
        raise DegenerateSet(
            f"only {np.count_nonzero(valid)} sets carry a positive "
            f"cross-correlation ({num_degenerate} degenerate)"
        )
    v_per_set = (eps_aa[valid] + eps_bb[valid]) / (2.0 * eps_ab[valid])
    v_mean = float(v_per_set.mean())
    v_sigma = float(v_per_set.std(ddof=1))
    v_sem = v_sigma / math.sqrt(v_per_set.size)
    v_pooled = float(
        (eps_aa[valid].mean() + eps_bb[valid].mean()) / (2.0 * eps_ab[valid].mean())
    )
    return dict(
        eps_aa=float(eps_aa[valid].mean()),
        eps_bb=float(eps_bb[valid].mean()),
        eps_ab_peak=float(eps_ab[valid].mean()),
        v_per_set=v_per_set,
        v_mean=v_mean,
        v_sigma=v_sigma,
        v_sem=v_sem,
        sigma_count=abs(1.0 - v_mean) / v_sem if v_sem > 0 else math.inf,
        violated=v_mean < 1.0,
        v_pooled=v_pooled,
        num_degenerate=num_degenerate,
    )


def violation_factor(ts: TraceSet, delay: float | None = None):
    """(v_per_set, v_mean, v_sigma, sigma_count) from per-set correlations.

    The delay is estimated from the ensemble unless given.  Sets whose
    compensated cross-correlation peak is not positive are excluded and
    counted; DegenerateSet is raised when fewer than two sets survive.
    """
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    probe = p1 + p2
    conj = c1 + c2
    if delay is None:
        delay = _ensemble_delay(probe, conj, rate)
    stats = _violation_stats(probe, conj, p1, p2, c1, c2, ts.dc_means, rate, delay)
    return stats["v_per_set"], stats["v_mean"], stats["v_sigma"], stats["sigma_count"]


def sql_spectra(ts: TraceSet):
    """(sql_p, sql_c, sql_diff): shot-noise references from the half sums.

    The difference of a split pair has exactly the parent's shot density
    whatever classical noise rides the beam, and the SQL of the
    intensity-difference measurement is the sum of the two.
    """
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    sql_p = psd_estimate(p1 - p2, rate)
    sql_c = psd_estimate(c1 - c2, rate)
    sql_diff = Psd(
        frequencies=sql_p.frequencies,
        power=sql_p.power + sql_c.power,
        num_averages=sql_p.num_averages,
    )
    return sql_p, sql_c, sql_diff


def _smooth(power: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return power
    kernel = np.ones(width)
    num = np.convolve(power, kernel, mode="same")
    den = np.convolve(np.ones_like(power), kernel, mode="same")
    return num / den


def normalized_spectra(
    ts: TraceSet,
    compensate: bool = True,
    band: tuple[float, float] | None = None,
    smooth_hz: float = 1.5e6,
) -> SpectraReport:
    """SQL-normalized beam and difference spectra plus squeezing metrics.

    s_diff is the raw probe-minus-conjugate noise over the combined SQL
    (no DC balancing).  With ``compensate`` the conjugate is advanced by
    the estimated delay first.  squeezing metrics come from a smoothed
    copy of s_diff (window ``smooth_hz``) so single-bin estimator noise
    does not fake a deeper minimum; the reported arrays stay raw.
    """
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    probe = p1 + p2
    conj = c1 + c2
    sql_p, sql_c, sql_diff = sql_spectra(ts)

    delay = _ensemble_delay(probe, conj, rate) if compensate else 0.0
    conj_used = compensate_delay(conj, delay, rate) if delay else conj

    tot_p = psd_estimate(probe, rate)
    tot_c = psd_estimate(conj, rate)
    diff = psd_estimate(probe - conj_used, rate)

    with np.errstate(divide="ignore", invalid="ignore"):
        s_p = np.where(sql_p.power > 0, tot_p.power / sql_p.power, np.nan)
        s_c = np.where(sql_c.power > 0, tot_c.power / sql_c.power, np.nan)
        s_d = np.where(sql_diff.power > 0, diff.power / sql_diff.power, np.nan)

    f = sql_p.frequencies
    if band is None:
        band = (500e3, 0.8 * rate / 2.0)
    lo, hi = band
    if lo < f[0] or hi > f[-1]:
        raise BandError(f"band {band} exceeds the data grid [{f[0]}, {f[-1]}]")
    width = max(1, int(round(smooth_hz / sql_p.df)))
    sel = (f >= lo) & (f <= hi)
    fsel = f[sel]
    # smooth inside the metric band only; a full-grid window would pull
    # out-of-band bins (DC junk, the technical-noise shelf below f_lo)
    # into the average and bias a band-edge minimum upward
    ssel = _smooth(np.nan_to_num(s_d[sel], nan=1.0), width)
    imin = int(np.argmin(ssel))
    squeezing_db_max = -10.0 * math.log10(ssel[imin]) if ssel[imin] > 0 else math.inf
    if ssel[imin] >= 1.0:
        squeezing_bandwidth = 0.0
    else:
        # first up-crossing past the minimum, linearly interpolated; a
        # "last point below 1" rule would drift up along noise dips when
        # the crossing is gentle
        above = np.nonzero(ssel[imin:] >= 1.0)[0]
        if above.size:
            j = imin + int(above[0])
            s0, s1 = ssel[j - 1], ssel[j]
            squeezing_bandwidth = float(
                fsel[j - 1] + (1.0 - s0) * (fsel[j] - fsel[j - 1]) / (s1 - s0)
            )
        else:
            squeezing_bandwidth = float(fsel[-1])

    return SpectraReport(
        frequencies=f,
        s_p_norm=s_p,
        s_c_norm=s_c,
        s_diff_norm=s_d,
        sql_p=sql_p,
        sql_c=sql_c,
        sql_diff=sql_diff,
        squeezing_db_max=squeezing_db_max,
        squeezing_bandwidth=squeezing_bandwidth,
        delay=delay,
        compensated=bool(delay),
        smooth_hz=smooth_hz,
    )


def csi_frequency_test(report: SpectraReport, ts: TraceSet, band: tuple[float, float]):
    """Spectral form of the CSI verdict over an analysis band.

    lhs integrates the SQL-normalized intensity-difference excess; rhs is
    the beam-asymmetry weight (difference over sum of the DC currents)
    times the integrated difference of the two beams' normalized excess.
    Classical states satisfy lhs >= rhs; lhs < rhs certifies a violation.
    Returns (lhs, rhs, satisfied_classically).
    """
    dc_p = ts.dc("p1") + ts.dc("p2")
    dc_c = ts.dc("c1") + ts.dc("c2")
    f = report.frequencies
    lo, hi = band
    if lo < f[0] or hi > f[-1]:
        raise BandError(f"band {band} exceeds the data grid [{f[0]}, {f[-1]}]")
    sel = (f >= lo) & (f <= hi)
    fsel = f[sel]
    lhs = np.trapezoid(report.s_diff_norm[sel] - 1.0, fsel)
    asym = (dc_p - dc_c) / (dc_p + dc_c)
    rhs = asym * np.trapezoid(report.s_p_norm[sel] - report.s_c_norm[sel], fsel)
    return float(lhs), float(rhs), bool(lhs >= rhs)


def cutoff_sweep(
    ts: TraceSet,
    f_hi_list,
    f_lo: float = 500e3,
    order: int = 10,
):
    """V statistics after bandpassing all four channels per cutoff.

    Returns an array of rows (f_hi, v_mean, v_sigma).  The delay is
    estimated once from the unfiltered ensemble so every cutoff sees the
    same alignment.
    """
    f_hi_list = list(f_hi_list)
    if not f_hi_list:
        raise BandError("cutoff list is empty")
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    delay = _ensemble_delay(p1 + p2, c1 + c2, rate)
    rows = []
    for f_hi in f_hi_list:
        spec = FilterSpec(f_hi=float(f_hi), f_lo=f_lo, order=order)
        fp1, fp2, fc1, fc2 = (
            butterworth_bandpass(x, spec, rate) for x in (p1, p2, c1, c2)
        )
        stats = _violation_stats(
            fp1 + fp2, fc1 + fc2, fp1, fp2, fc1, fc2, ts.dc_means, rate, delay
        )
        rows.append((float(f_hi), stats["v_mean"], stats["v_sigma"]))
    return np.array(rows)


def filtered_violation(ts: TraceSet, spec: FilterSpec) -> dict:
    """Full per-set V statistics after bandpassing all four channels.

    Same filtering as one cutoff_sweep step, but returns the complete
    stats dict (v_per_set, v_mean, v_sigma, v_sem, sigma_count, violated,
    v_pooled, num_degenerate) for verdict reporting.
    """
    rate = ts.acquisition.sample_rate
    p1, p2, c1, c2 = _channels(ts)
    delay = _ensemble_delay(p1 + p2, c1 + c2, rate)
    fp1, fp2, fc1, fc2 = (butterworth_bandpass(x, spec, rate) for x in (p1, p2, c1, c2))
    stats = _violation_stats(
        fp1 + fp2, fc1 + fc2, fp1, fp2, fc1, fc2, ts.dc_means, rate, delay
    )
    stats["delay"] = delay
    return stats
