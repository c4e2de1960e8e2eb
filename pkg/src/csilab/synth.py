"""Four-channel photodetector trace synthesis.

Traces realize the joint statistics of the theory cross-spectral model:
each set draws complex Gaussian spectra with the per-bin 2x2 CSD imposed
through its Hermitian square root, inverse transforms to the time domain,
splits each beam 50/50 with the correct shot-noise partition, and
digitizes.  Sets are seeded independently from a single 64-bit seed, so
results are bit-identical no matter how the work is chunked or threaded.
"""

from __future__ import annotations

import hashlib
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ClipWarning, ConfigError, DomainError
from .theory import (
    CsdModel,
    ExcessNoiseSpec,
    SqueezeParams,
    TechnicalNoiseSpec,
    mean_photon_numbers,
    spectral_model,
)

CHANNEL_NAMES = ("p1", "p2", "c1", "c2")


def _thread_count() -> int:
    raw = os.environ.get("CSILAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CSILAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


@dataclass(frozen=True)
class FwmModel:
    """Source and detection parameters of one twin-beam configuration.

    The DC ratio is not free: it must match the photon-number ratio of
    the squeeze parameters (build instances with :meth:`from_params`).
    """

    squeeze: SqueezeParams
    probe_dc: float
    conj_dc: float
    gain_bandwidth: float
    delay: float = 0.0
    eta: float = 1.0
    excess: ExcessNoiseSpec = field(default_factory=ExcessNoiseSpec)
    technical: TechnicalNoiseSpec = field(default_factory=TechnicalNoiseSpec)
    carrier_detuning: float = 0.0
    delay_dispersion: float = 0.0
    dispersion_corner_hz: float = 0.0
    dispersion_order: int = 2
    dispersion_cutoff_hz: float | None = None

    def __post_init__(self):
        if self.probe_dc <= 0.0 or self.conj_dc <= 0.0:
            raise ConfigError("probe_dc and conj_dc must be > 0")
        n_p, n_c = mean_photon_numbers(self.squeeze)
        if n_p <= 0.0 or n_c <= 0.0:
            raise ConfigError(
                f"squeeze leaves a beam empty (n_probe={n_p}, n_conj={n_c})"
            )
        want = n_c / n_p
        have = self.conj_dc / self.probe_dc
        if abs(have - want) > 1e-9 * want:
            raise ConfigError(
                f"conj_dc/probe_dc = {have!r} must equal n_conj/n_probe = "
                f"{want!r} (use FwmModel.from_params)"
            )
        if self.delay < 0.0:
            raise ConfigError("delay must be >= 0 (conjugate arrives later)")

    @classmethod
    def from_params(
        cls,
        squeeze: SqueezeParams,
        probe_dc: float = 1.0,
        *,
        gain_bandwidth: float,
        delay: float = 0.0,
        eta: float = 1.0,
        excess: ExcessNoiseSpec | None = None,
        technical: TechnicalNoiseSpec | None = None,
        carrier_detuning: float = 0.0,
        delay_dispersion: float = 0.0,
        dispersion_corner_hz: float = 0.0,
        dispersion_order: int = 2,
        dispersion_cutoff_hz: float | None = None,
    ) -> "FwmModel":
        """Build a model with the conjugate DC pinned to the photon ratio."""
        n_p, n_c = mean_photon_numbers(squeeze)
        if n_p <= 0.0 or n_c <= 0.0:
            raise ConfigError(
                f"squeeze leaves a beam empty (n_probe={n_p}, n_conj={n_c})"
            )
        return cls(
            squeeze=squeeze,
            probe_dc=probe_dc,
            conj_dc=probe_dc * n_c / n_p,
            gain_bandwidth=gain_bandwidth,
            delay=delay,
            eta=eta,
            excess=excess or ExcessNoiseSpec(),
            technical=technical or TechnicalNoiseSpec(),
            carrier_detuning=carrier_detuning,
            delay_dispersion=delay_dispersion,
            dispersion_corner_hz=dispersion_corner_hz,
            dispersion_order=dispersion_order,
            dispersion_cutoff_hz=dispersion_cutoff_hz,
        )

    def spectral_model(self) -> CsdModel:
        try:
            return spectral_model(
                self.squeeze,
                self.gain_bandwidth,
                delay=self.delay,
                eta=self.eta,
                excess=self.excess,
                technical=self.technical,
                probe_dc=self.probe_dc,
                conj_dc=self.conj_dc,
                carrier_detuning=self.carrier_detuning,
                delay_dispersion=self.delay_dispersion,
                dispersion_corner_hz=self.dispersion_corner_hz,
                dispersion_order=self.dispersion_order,
                dispersion_cutoff_hz=self.dispersion_cutoff_hz,
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self) -> str:
        payload = repr(
            (
                self.squeeze.s,
                complex(self.squeeze.alpha),
                self.probe_dc,
                self.conj_dc,
                self.gain_bandwidth,
                self.delay,
                self.eta,
                (
                    self.excess.conj_level,
                    self.excess.probe_level,
                    self.excess.onset_hz,
                    self.excess.order,
                    self.excess.conj_cutoff_hz,
                    self.excess.probe_onset_hz,
                    self.excess.probe_order,
                ),
                (self.technical.level, self.technical.corner_hz),
                self.carrier_detuning,
                (self.delay_dispersion, self.dispersion_corner_hz,
                 self.dispersion_order, self.dispersion_cutoff_hz),
            )
        ).encode()
        return hashlib.sha1(payload).hexdigest()[:12]


@dataclass(frozen=True)
class AcquisitionConfig:
    """Digitizer settings; defaults match a 1 GS/s 9-bit acquisition."""

    sample_rate: float = 1e9
    samples_per_set: int = 10000
    num_sets: int = 500
    adc_bits: int = 9
    full_scale: float | None = None  # None: derived from the model at 8 sigma
    rng_seed: int = 0xC51F00D

    def __post_init__(self):
        if self.sample_rate <= 0.0:
            raise ConfigError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.samples_per_set < 16:
            raise ConfigError(
                f"samples_per_set must be >= 16, got {self.samples_per_set}"
            )
        if self.num_sets < 1:
            raise ConfigError(f"num_sets must be >= 1, got {self.num_sets}")
        if not (2 <= self.adc_bits <= 16):
            raise ConfigError(
                f"adc_bits must be between 2 and 16 for int16 codes, got {self.adc_bits}"
            )
        if self.full_scale is not None and self.full_scale <= 0.0:
            raise ConfigError(f"full_scale must be > 0, got {self.full_scale}")
        if not (0 <= self.rng_seed < 2**64):
            raise ConfigError("rng_seed must fit an unsigned 64-bit integer")

    @property
    def set_duration(self) -> float:
        return self.samples_per_set / self.sample_rate

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0


@dataclass
class TraceSet:
    """Quantized AC traces of the four detector channels plus DC readings.

    ``codes`` is int16 with shape (4, num_sets, samples_per_set), channel
    order p1, p2, c1, c2.  ``dc_means`` are the bias-T DC photocurrents in
    the same units as full_scale.  ``charge_scale`` (current per photon
    flux) is kept for in-memory use by the loss hook; it does not survive
    file round-trips.
    """

    codes: np.ndarray
    dc_means: np.ndarray
    acquisition: AcquisitionConfig
    provenance: str = "external"
    charge_scale: float | None = None

    def __post_init__(self):
        if self.codes.shape[0] != 4 or self.codes.ndim != 3:
            raise ConfigError(f"codes must be (4, sets, samples), got {self.codes.shape}")
        # non-positive DC readings are representable (dead channel in an
        # external file); analysis raises DcMissing when it needs them

    @property
    def step(self) -> float:
        acq = self.acquisition
        if acq.full_scale is None:
            raise ConfigError("full_scale unresolved; cannot dequantize")
        return acq.full_scale / 2 ** (acq.adc_bits - 1)

    def ac(self, name: str) -> np.ndarray:
        """Dequantized AC traces (num_sets, samples) of one channel."""
        return self.codes[CHANNEL_NAMES.index(name)] * self.step

    @property
    def num_sets(self) -> int:
        return self.codes.shape[1]

    def dc(self, name: str) -> float:
        return float(self.dc_means[CHANNEL_NAMES.index(name)])


def quantize(trace, adc_bits: int, full_scale: float) -> np.ndarray:
    """Mid-tread uniform quantizer to int16 codes.

    code = clip(round(x / step), -2^(bits-1), 2^(bits-1) - 1) with
    step = full_scale / 2^(bits-1); dequantization is code * step.
    Emits ClipWarning when more than 0.1% of samples rail.
    """
    if not (2 <= adc_bits <= 16):
        raise ConfigError(f"adc_bits must be between 2 and 16, got {adc_bits}")
    if full_scale <= 0.0:
        raise ConfigError(f"full_scale must be > 0, got {full_scale}")
    half = 2 ** (adc_bits - 1)
    step = full_scale / half
    raw = np.rint(np.asarray(trace, dtype=float) / step)
    clipped = (raw < -half) | (raw > half - 1)
    frac = float(np.mean(clipped))
    if frac > 1e-3:
        warnings.warn(
            f"{100 * frac:.2f}% of samples clipped at the quantizer rails",
            ClipWarning,
            stacklevel=2,
        )
    return np.clip(raw, -half, half - 1).astype(np.int16)


def split_and_detect(trace, dc: float, acq: AcquisitionConfig, charge_scale: float, rng=None):
    """50/50 split of a beam's fluctuation trace into two detector halves.

    Each half carries half the classical fluctuation plus independent
    shot noise such that half1 - half2 has exactly the parent SQL density
    (2 * charge_scale * dc) and half1 + half2 restores the parent trace.
    """
    if dc <= 0.0:
        raise ConfigError(f"dc must be > 0, got {dc}")
    rng = np.random.default_rng() if rng is None else rng
    x = np.asarray(trace, dtype=float)
    sql = 2.0 * charge_scale * dc
    w = rng.standard_normal(x.shape) * math.sqrt(sql * acq.sample_rate / 2.0)
    return (x + w) / 2.0, (x - w) / 2.0


def suggest_full_scale(model: FwmModel, acq: AcquisitionConfig) -> float:
    """Full-scale range covering 8 standard deviations of the busiest channel."""
    var_p, var_c = model.spectral_model().channel_variances(acq.nyquist)
    return 8.0 * math.sqrt(max(var_p, var_c))


def _csd_sqrt(m: CsdModel, freqs: np.ndarray, zero_nyquist: bool):
    """Per-bin Hermitian square root of the 2x2 CSD, DC and Nyquist zeroed.

    The square root is taken of the conjugated matrix: drawing X = B z
    realizes E[conj(X_p) X_c] = (B B*)_cp, and it is conj(P) * C that the
    spectral estimators compute, so the stored cross phase must land
    there for the delay to come out with the right sign.
    """
    spp, scc, spc = m.csd(freqs)
    spp = spp.astype(float).copy()
    scc = scc.astype(float).copy()
    spc = np.conj(spc).astype(complex)
    spp[0] = scc[0] = 0.0
    spc[0] = 0.0
    if zero_nyquist:
        spp[-1] = scc[-1] = 0.0
        spc[-1] = 0.0
    det = np.maximum(spp * scc - np.abs(spc) ** 2, 0.0)
    root = np.sqrt(det)
    denom = np.sqrt(spp + scc + 2.0 * root)
    safe = np.where(denom > 0.0, denom, 1.0)
    b00 = (spp + root) / safe
    b11 = (scc + root) / safe
    b01 = spc / safe
    return b00, b01, b11


def synthesize(model: FwmModel, acq: AcquisitionConfig) -> TraceSet:
    """Generate a quantized four-channel TraceSet realizing the model.

    Each set is synthesized on a 25% longer grid and trimmed symmetrically
    so the circular wrap of the delay phase never touches the kept window.
    Per-set RNG streams come from SeedSequence(rng_seed).spawn, making the
    result independent of chunk size and thread schedule.
    """
    if acq.sample_rate <= 10.0 * model.gain_bandwidth:
        raise ConfigError(
            f"sample_rate {acq.sample_rate} too low to resolve the correlation "
            f"structure; need > 10 * gain_bandwidth = {10 * model.gain_bandwidth}"
        )
    if abs(model.delay) >= 0.1 * acq.set_duration:
        raise ConfigError(
            f"delay {model.delay} must stay below 10% of the set duration "
            f"{acq.set_duration}"
        )
    csd = model.spectral_model()
    if acq.full_scale is None:
        acq = replace(acq, full_scale=suggest_full_scale(model, acq))

    n_keep = acq.samples_per_set
    pad = int(math.ceil(0.125 * n_keep))
    n_gen = n_keep + 2 * pad
    freqs = np.fft.rfftfreq(n_gen, d=1.0 / acq.sample_rate)
    b00, b01, b11 = _csd_sqrt(csd, freqs, zero_nyquist=(n_gen % 2 == 0))
    scale = math.sqrt(n_gen * acq.sample_rate / 2.0)
    sig_p = math.sqrt(csd.sql_probe * acq.sample_rate / 2.0)
    sig_c = math.sqrt(csd.sql_conj * acq.sample_rate / 2.0)

    seeds = np.random.SeedSequence(acq.rng_seed).spawn(acq.num_sets)
    ac = np.empty((4, acq.num_sets, n_keep), dtype=float)

    def run_set(i: int) -> None:
        gen = np.random.default_rng(seeds[i])
        z = gen.standard_normal((2, freqs.size, 2))
        z0 = (z[0, :, 0] + 1j * z[0, :, 1]) / math.sqrt(2.0)
        z1 = (z[1, :, 0] + 1j * z[1, :, 1]) / math.sqrt(2.0)
        spec_p = (b00 * z0 + b01 * z1) * scale
        spec_c = (np.conj(b01) * z0 + b11 * z1) * scale
        parents = np.fft.irfft(np.vstack([spec_p, spec_c]), n=n_gen, axis=-1)
        parent_p = parents[0, pad : pad + n_keep]
        parent_c = parents[1, pad : pad + n_keep]
        w_p = gen.standard_normal(n_keep) * sig_p
        w_c = gen.standard_normal(n_keep) * sig_c
        ac[0, i] = (parent_p + w_p) / 2.0
        ac[1, i] = (parent_p - w_p) / 2.0
        ac[2, i] = (parent_c + w_c) / 2.0
        ac[3, i] = (parent_c - w_c) / 2.0

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_set, range(acq.num_sets)))
    else:
        for i in range(acq.num_sets):
            run_set(i)

    codes = quantize(ac, acq.adc_bits, acq.full_scale)
    dc_means = np.array(
        [
            model.probe_dc / 2.0,
            model.probe_dc / 2.0,
            model.conj_dc / 2.0,
            model.conj_dc / 2.0,
        ]
    )
    return TraceSet(
        codes=codes,
        dc_means=dc_means,
        acquisition=acq,
        provenance=f"fwm:{model.digest()}",
        charge_scale=csd.charge_scale,
    )


def coherent_traces(
    acq: AcquisitionConfig,
    probe_dc: float = 1.0,
    conj_dc: float = 1.0,
    charge_scale: float | None = None,
) -> TraceSet:
    """Two uncorrelated shot-noise-limited beams, split and digitized.

    The null fixture: every g2 curve must come out flat at one and both
    normalized spectra at their SQL.  A squeeze parameter cannot express
    this (s = 0 leaves the conjugate dark), so the four channels are
    drawn directly.  The default charge scale puts the integrated
    relative intensity noise at 1% of DC.
    """
    if probe_dc <= 0.0 or conj_dc <= 0.0:
        raise ConfigError("probe_dc and conj_dc must be > 0")
    if charge_scale is None:
        charge_scale = probe_dc / (100.0 * acq.sample_rate)
    sig = [
        math.sqrt(2.0 * charge_scale * dc * acq.sample_rate / 2.0)
        for dc in (probe_dc, conj_dc)
    ]
    if acq.full_scale is None:
        # each half: (parent + w)/2 with both at the parent SQL
        acq = replace(acq, full_scale=8.0 * max(sig) / math.sqrt(2.0))
    seeds = np.random.SeedSequence(acq.rng_seed).spawn(acq.num_sets)
    n = acq.samples_per_set
    codes = np.empty((4, acq.num_sets, n), dtype=np.int16)
    for i in range(acq.num_sets):
        gen = np.random.default_rng(seeds[i])
        for beam in range(2):
            parent = gen.standard_normal(n) * sig[beam]
            w = gen.standard_normal(n) * sig[beam]
            codes[2 * beam, i] = quantize((parent + w) / 2.0, acq.adc_bits, acq.full_scale)
            codes[2 * beam + 1, i] = quantize((parent - w) / 2.0, acq.adc_bits, acq.full_scale)
    dc_means = np.array([probe_dc / 2.0, probe_dc / 2.0, conj_dc / 2.0, conj_dc / 2.0])
    return TraceSet(
        codes=codes,
        dc_means=dc_means,
        acquisition=acq,
        provenance="coherent",
        charge_scale=charge_scale,
    )


def apply_loss(
    ts: TraceSet,
    extra_eta: float,
    rng_seed: int = 0,
    charge_scale: float | None = None,
) -> TraceSet:
    """Send all four detected beams through an extra beam splitter.

    ACs scale by the intensity transmission; the open port re-injects
    vacuum so each channel keeps a true shot floor for its reduced DC.
    Normalized correlations are expected to be invariant under this.
    """
    if not (0.0 < extra_eta <= 1.0):
        raise ConfigError(f"extra_eta must be in (0, 1], got {extra_eta}")
    q = charge_scale if charge_scale is not None else ts.charge_scale
    if q is None:
        raise ConfigError(
            "charge_scale unknown (externally loaded traces); pass it explicitly"
        )
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    acq = ts.acquisition
    out = np.empty_like(ts.codes)
    mix = math.sqrt(extra_eta * (1.0 - extra_eta))
    for k, name in enumerate(CHANNEL_NAMES):
        x = ts.ac(name)
        sql = 2.0 * q * float(ts.dc_means[k])
        w = rng.standard_normal(x.shape) * math.sqrt(sql * acq.sample_rate / 2.0)
        out[k] = quantize(extra_eta * x + mix * w, acq.adc_bits, acq.full_scale)
    return TraceSet(
        codes=out,
        dc_means=np.asarray(ts.dc_means) * extra_eta,
        acquisition=acq,
        provenance=ts.provenance + f"+loss{extra_eta:g}",
        charge_scale=q * 1.0,
    )
