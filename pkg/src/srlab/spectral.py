"""One-sided magnitude spectra and the SNR / peak-picking rules built on them.

Magnitudes come from an unnormalized forward FFT; everything downstream
works in dB, so any fixed normalization would cancel out of the SNR and
peak comparisons anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from srlab.signals import Trace

MAG_FLOOR = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum in dB.

    Bin k sits at frequency k * df; mag_db has floor(n/2)+1 entries for an
    n-sample trace.
    """

    df: float
    mag_db: np.ndarray
    n_samples: int

    def __post_init__(self):
        object.__setattr__(self, "mag_db", np.asarray(self.mag_db, dtype=np.float64))
        if self.df <= 0.0:
            raise ValueError(f"df must be > 0, got {self.df}")
        if self.mag_db.size != self.n_samples // 2 + 1:
            raise ValueError(
                f"mag_db length {self.mag_db.size} inconsistent with n_samples {self.n_samples}"
            )

    def freqs(self) -> np.ndarray:
        return self.df * np.arange(self.mag_db.size)

    @property
    def nyquist(self) -> float:
        return self.df * (self.mag_db.size - 1)


def periodogram(trace: Trace, window: str = "rectangular", floor: float = MAG_FLOOR) -> Spectrum:
    """One-sided magnitude spectrum of a trace; mag_db = 20*log10(|X_k|)
    with |X_k| clamped below by `floor`.

    window: "rectangular" (default, no taper) or "hann".
    """
    x = trace.samples
    if window == "hann":
        x = x * np.hanning(x.size)
    elif window != "rectangular":
        raise ValueError(f"unknown window {window!r}")
    mag = np.abs(np.fft.rfft(x))
    np.maximum(mag, floor, out=mag)
    return Spectrum(df=trace.sample_rate / x.size, mag_db=20.0 * np.log10(mag), n_samples=x.size)


def _bin_for(spectrum: Spectrum, f: float) -> int:
    if not 0.0 < f <= spectrum.nyquist:
        raise ValueError(
            f"frequency {f} Hz outside (0, {spectrum.nyquist}] Hz band"
        )
    return int(round(f / spectrum.df))


def snr_db(spectrum: Spectrum, f_signal: float, include_signal_bin: bool = True) -> float:
    """Signal-to-noise ratio in dB: magnitude at the bin nearest f_signal
    minus the mean dB magnitude of the spectrum.

    By default the signal bin itself stays in the mean (its leverage over
    thousands of bins is negligible); pass include_signal_bin=False to
    leave it out.
    """
    k = _bin_for(spectrum, f_signal)
    mags = spectrum.mag_db
    if include_signal_bin:
        mean = float(np.mean(mags))
    else:
        mean = float((np.sum(mags) - mags[k]) / (mags.size - 1))
    return float(mags[k] - mean)


def second_peak_frequency(
    spectrum: Spectrum,
    dc_guard_hz: float | None = None,
    min_prominence_db: float = 6.0,
    require_local_max: bool = True,
) -> float | None:
    """Frequency of the dominant non-DC spectral peak, or None.

    The spectrum of a switched output always has its largest structure at
    and around 0 Hz, so candidate bins must lie above dc_guard_hz (default
    2*df, skipping DC and its immediate leakage).  The winner is the
    largest candidate; it must clear the spectrum's median magnitude by
    min_prominence_db, and, with require_local_max (default), must also be
    a strict local maximum — a point standing above both neighbours rather
    than a slope of the DC structure.
    """
    if dc_guard_hz is None:
        dc_guard_hz = 2.0 * spectrum.df
    mags = spectrum.mag_db
    freqs = spectrum.freqs()
    candidates = freqs > dc_guard_hz
    if require_local_max:
        interior = np.zeros(mags.size, dtype=bool)
        interior[1:-1] = (mags[1:-1] > mags[:-2]) & (mags[1:-1] > mags[2:])
        candidates &= interior
    if not np.any(candidates):
        return None
    idx = np.nonzero(candidates)[0]
    k = idx[np.argmax(mags[idx])]
    if mags[k] < float(np.median(mags)) + min_prominence_db:
        return None
    return float(freqs[k])
