"""Frequency detection of damped sinusoids from the comparator output.

The detector never reads the true frequency: it runs the trigger on
signal+noise, takes the spectrum of the output's transition train (the
first difference of the level trace), and picks the dominant non-DC peak.
The true frequency enters only when scoring a report or when searching for
the noise level that maximizes SNR at a hypothesized frequency.

Peak picking works on the transition train rather than the raw level trace
because a switched two-level output has a 1/f-shaped spectral skirt around
DC that can bury or impersonate the signal peak at low frequencies;
differencing applies a first-order high-pass that flattens the skirt while
leaving the switching periodicity in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from srlab.experiments import SweepResult, find_sr_peak, snr_sigma_sweep
from srlab.noise import NoiseSpec, generate_noise
from srlab.signals import DampedSine, Trace, generate
from srlab.spectral import Spectrum, periodogram, second_peak_frequency
from srlab.trigger import TriggerConfig, run


@dataclass(frozen=True)
class FreqDetectReport:
    """Outcome of one detection run.

    f_est and error_pct are None when no spectral peak qualified; sigma and
    seed record the noise condition the run used.
    """

    f_true: float
    f_est: float | None
    error_pct: float | None
    sigma: float
    seed: int

    def __post_init__(self):
        if (self.f_est is None) != (self.error_pct is None):
            raise ValueError("f_est and error_pct must be both present or both absent")
        if self.f_est is not None:
            expected = 100.0 * abs(self.f_est - self.f_true) / self.f_true
            if not np.isclose(self.error_pct, expected, rtol=1e-9, atol=1e-12):
                raise ValueError(
                    f"error_pct {self.error_pct} inconsistent with |{self.f_est} - "
                    f"{self.f_true}| / {self.f_true}"
                )

    @property
    def detected(self) -> bool:
        return self.f_est is not None


@dataclass(frozen=True)
class DetectionSetup:
    """Shared parameters for a detection campaign (everything but frequency).

    amplitude/decay describe the damped input at the generator; sigma the
    noise level; seed_base the first seed (repeat r uses seed_base + r).
    """

    amplitude: float = 0.1
    decay: float = 5.0
    sigma: float = 0.01
    sample_rate: float = 20000.0
    duration: float = 0.4
    seed_base: int = 0
    dc_guard_hz: float | None = None


def transition_spectrum(output: Trace) -> Spectrum:
    """Spectrum of the output's transition train (first difference of the
    level trace, first sample zero so the length is unchanged)."""
    diff = np.diff(output.samples, prepend=output.samples[0])
    return periodogram(Trace(start_time=output.start_time, dt=output.dt, samples=diff))


def detect_frequency(
    trigger_config: TriggerConfig,
    damped: DampedSine,
    noise_spec: NoiseSpec,
    sample_rate: float,
    duration: float,
    dc_guard_hz: float | None = None,
    stream: int = 0,
) -> FreqDetectReport:
    """Run one noisy trigger simulation and estimate the drive frequency
    from the output's transition-train spectrum.

    A run with no qualifying peak reports f_est=None — an answer ("nothing
    detected"), not an error.
    """
    if not isinstance(damped, DampedSine):
        raise ValueError(f"detector expects a damped sinusoid, got {damped!r}")
    signal = generate(damped, sample_rate, duration)
    noise = generate_noise(noise_spec, sample_rate, duration, stream=stream)
    out = run(trigger_config, signal, noise)
    f_est = second_peak_frequency(transition_spectrum(out), dc_guard_hz=dc_guard_hz)
    error = None if f_est is None else 100.0 * abs(f_est - damped.frequency) / damped.frequency
    return FreqDetectReport(
        f_true=damped.frequency,
        f_est=f_est,
        error_pct=error,
        sigma=noise_spec.sigma,
        seed=noise_spec.seed,
    )


def error_rate_table(
    trigger_config: TriggerConfig,
    frequencies,
    base_params: DetectionSetup,
    repeats: int = 10,
) -> list[FreqDetectReport]:
    """Detection reports for every (frequency, repeat) cell.

    Repeat r of every frequency uses seed base_params.seed_base + r; cells
    of the same repeat differ by stream index, so the table is fully
    reproducible and every cell independent.  Use summarize_error_table()
    for the per-frequency aggregate view.
    """
    frequencies = [float(f) for f in frequencies]
    if not frequencies:
        raise ValueError("frequency list is empty")
    reports = []
    for fi, f in enumerate(frequencies):
        damped = DampedSine(base_params.amplitude, base_params.decay, f)
        for r in range(repeats):
            spec = NoiseSpec(
                sigma=base_params.sigma,
                noise_rate=base_params.sample_rate,
                seed=base_params.seed_base + r,
            )
            reports.append(
                detect_frequency(
                    trigger_config,
                    damped,
                    spec,
                    base_params.sample_rate,
                    base_params.duration,
                    dc_guard_hz=base_params.dc_guard_hz,
                    stream=fi,
                )
            )
    return reports


@dataclass(frozen=True)
class FreqErrorSummary:
    """Per-frequency aggregate of an error_rate_table run."""

    f_true: float
    mean_error_pct: float | None
    n_detected: int
    n_runs: int

    @property
    def miss_rate(self) -> float:
        return 1.0 - self.n_detected / self.n_runs


def summarize_error_table(reports) -> list[FreqErrorSummary]:
    """Group reports by true frequency: mean error over detected runs (None
    if nothing was detected) plus detection counts."""
    by_freq: dict[float, list[FreqDetectReport]] = {}
    for rep in reports:
        by_freq.setdefault(rep.f_true, []).append(rep)
    summaries = []
    for f, reps in by_freq.items():
        errors = [r.error_pct for r in reps if r.detected]
        summaries.append(
            FreqErrorSummary(
                f_true=f,
                mean_error_pct=float(np.mean(errors)) if errors else None,
                n_detected=len(errors),
                n_runs=len(reps),
            )
        )
    return summaries


def optimal_sigma_search(
    trigger_config: TriggerConfig,
    damped: DampedSine,
    sigmas,
    repeats: int = 10,
    sample_rate: float = 20000.0,
    duration: float = 0.4,
    seed_base: int = 0,
    noise_rate: float | None = None,
) -> tuple[float, SweepResult]:
    """Pick the noise level that maximizes output SNR at the hypothesized
    frequency; returns (sigma_star, full SNR curve).

    This is the calibration step to run before detection when a frequency
    hypothesis exists: detection error at the returned sigma is typically
    far below the error at the grid's low end.
    """
    if not isinstance(damped, DampedSine):
        raise ValueError(f"expected a damped sinusoid, got {damped!r}")
    template = NoiseSpec(
        sigma=1.0, noise_rate=noise_rate if noise_rate is not None else sample_rate,
        seed=seed_base,
    )
    curve = snr_sigma_sweep(
        trigger_config, damped, template, sigmas, sample_rate, duration, repeats
    )
    if len(curve) < 3:
        return float(curve.sigmas[int(np.argmax(curve.snr_mean_db))]), curve
    sigma_star, _ = find_sr_peak(curve)
    return sigma_star, curve
