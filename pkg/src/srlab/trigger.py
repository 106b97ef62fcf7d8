"""The bistable element: an inverting comparator with hysteresis.

The device holds one of two output levels.  Sitting HIGH, it falls to LOW
only when the combined input rises above the upper threshold; sitting LOW,
it returns HIGH only when the input drops below the lower threshold.
Between the thresholds it keeps its state — that memory band is what makes
noise-driven switching (and stochastic resonance) possible.

The combined input is v_n[i] = input_attenuation * (signal[i] + noise[i]),
modelling the resistive divider that feeds the comparator pin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from srlab.signals import Trace


class TriggerState(enum.Enum):
    HIGH = 1
    LOW = -1


@dataclass(frozen=True)
class TriggerConfig:
    """Comparator operating point.

    v_sat_pos / v_sat_neg   the two output rails, volts
    v_ut / v_lt             upper / lower switching thresholds, volts
    input_attenuation       divider gain applied to signal+noise (0 < a <= 1)
    v_dc                    supply setting the thresholds, kept for bookkeeping
    """

    v_sat_pos: float
    v_sat_neg: float
    v_ut: float
    v_lt: float
    input_attenuation: float = 0.5
    v_dc: float | None = None

    def __post_init__(self):
        if not self.v_lt < self.v_ut:
            raise ValueError(f"require v_lt < v_ut, got {self.v_lt} >= {self.v_ut}")
        if not (self.v_sat_neg < 0.0 < self.v_sat_pos):
            raise ValueError(
                f"require v_sat_neg < 0 < v_sat_pos, got {self.v_sat_neg}, {self.v_sat_pos}"
            )
        if not 0.0 < self.input_attenuation <= 1.0:
            raise ValueError(
                f"input_attenuation must be in (0, 1], got {self.input_attenuation}"
            )

    def output(self, state: TriggerState) -> float:
        return self.v_sat_pos if state is TriggerState.HIGH else self.v_sat_neg


def thresholds_from_divider(v_sat: float, ratio: float) -> tuple[float, float]:
    """Symmetric thresholds (+v_sat*ratio, -v_sat*ratio) from the feedback
    divider ratio."""
    if v_sat <= 0.0:
        raise ValueError(f"v_sat must be > 0, got {v_sat}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    return (v_sat * ratio, -v_sat * ratio)


def v_th_from_vdc(v_dc: float) -> float:
    """Threshold magnitude from the supply voltage, per the measured affine
    calibration v_th = 0.051 * v_dc - 0.005.

    The coefficients are decimal calibration constants, so the result is
    rounded to 12 decimals; binary float residue would otherwise keep e.g.
    v_dc=4 from reproducing its printed value 0.199 exactly.
    """
    if v_dc <= 0.0:
        raise ValueError(f"v_dc must be > 0, got {v_dc}")
    return round(0.051 * v_dc - 0.005, 12)


def ideal_config(
    v_dc: float = 1.0, ratio: float = 0.045, input_attenuation: float = 0.5
) -> TriggerConfig:
    """Config with divider-law thresholds and rails at +/-v_dc."""
    v_ut, v_lt = thresholds_from_divider(v_dc, ratio)
    return TriggerConfig(
        v_sat_pos=v_dc,
        v_sat_neg=-v_dc,
        v_ut=v_ut,
        v_lt=v_lt,
        input_attenuation=input_attenuation,
        v_dc=v_dc,
    )


def calibrated_config(v_dc: float, input_attenuation: float = 0.5) -> TriggerConfig:
    """Config with thresholds from the measured supply calibration and rails
    at +/-v_dc."""
    v_th = v_th_from_vdc(v_dc)
    if v_th <= 0.0:
        raise ValueError(f"calibration gives non-positive threshold at v_dc={v_dc}")
    return TriggerConfig(
        v_sat_pos=v_dc,
        v_sat_neg=-v_dc,
        v_ut=v_th,
        v_lt=-v_th,
        input_attenuation=input_attenuation,
        v_dc=v_dc,
    )


def step(config: TriggerConfig, state: TriggerState, v_n: float) -> TriggerState:
    """One comparator update for a combined input sample.  Pure: returns the
    next state, strict inequalities at both thresholds."""
    if state is TriggerState.HIGH:
        return TriggerState.LOW if v_n > config.v_ut else TriggerState.HIGH
    return TriggerState.HIGH if v_n < config.v_lt else TriggerState.LOW


def _levels(
    v_n: np.ndarray, v_ut: float, v_lt: float, start_high: bool
) -> np.ndarray:
    """Post-sample levels (True = HIGH) for a combined-input array.

    Equivalent to folding step() over v_n: any sample beyond a threshold
    forces the state regardless of history, and in-band samples hold the
    most recent forced state.
    """
    n = v_n.shape[0]
    force = np.zeros(n, dtype=np.int8)
    force[v_n > v_ut] = -1
    force[v_n < v_lt] = 1
    idx = np.where(force != 0, np.arange(n), -1)
    np.maximum.accumulate(idx, out=idx)
    levels = np.where(idx >= 0, force[np.maximum(idx, 0)], 1 if start_high else -1)
    return levels > 0


def run(
    config: TriggerConfig,
    signal: Trace,
    noise: Trace,
    initial: TriggerState = TriggerState.HIGH,
) -> Trace:
    """Drive the comparator with attenuated signal+noise; returns the output
    trace on the same grid.  Output samples take only the two rail values."""
    if signal.dt != noise.dt:
        raise ValueError(f"signal and noise dt differ: {signal.dt} vs {noise.dt}")
    if signal.n_samples != noise.n_samples:
        raise ValueError(
            f"signal and noise length differ: {signal.n_samples} vs {noise.n_samples}"
        )
    v_n = config.input_attenuation * (signal.samples + noise.samples)
    high = _levels(v_n, config.v_ut, config.v_lt, initial is TriggerState.HIGH)
    out = np.where(high, config.v_sat_pos, config.v_sat_neg)
    return Trace(start_time=signal.start_time, dt=signal.dt, samples=out)


def transition_count(output: Trace) -> int:
    """Number of level changes in a comparator output trace."""
    s = output.samples
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass(frozen=True)
class HysteresisLoop:
    """Input/output pairs for a noiseless up-then-down input sweep.

    measured_up_threshold    raw input at which the output rose (LOW->HIGH,
                             seen on the descending branch), None if it never did
    measured_down_threshold  raw input at which the output fell (HIGH->LOW,
                             ascending branch), None if it never did
    """

    ascending_input: np.ndarray
    ascending_output: np.ndarray
    descending_input: np.ndarray
    descending_output: np.ndarray
    measured_up_threshold: float | None
    measured_down_threshold: float | None


def hysteresis_sweep(
    config: TriggerConfig, v_min: float, v_max: float, points: int
) -> HysteresisLoop:
    """Noiseless quasi-static sweep v_min -> v_max -> v_min.

    The ascending branch starts HIGH (input far below the band), the
    descending branch starts LOW, so each branch shows exactly one switch
    when the sweep spans both thresholds.  Recorded inputs are the raw sweep
    values; the attenuator is applied internally just like in run().
    """
    if not v_min < v_max:
        raise ValueError(f"require v_min < v_max, got {v_min} >= {v_max}")
    if points < 2:
        raise ValueError(f"need at least 2 sweep points, got {points}")
    v_up = np.linspace(v_min, v_max, points)
    v_down = v_up[::-1].copy()
    a = config.input_attenuation

    high_up = _levels(a * v_up, config.v_ut, config.v_lt, start_high=True)
    high_down = _levels(a * v_down, config.v_ut, config.v_lt, start_high=False)

    out_up = np.where(high_up, config.v_sat_pos, config.v_sat_neg)
    out_down = np.where(high_down, config.v_sat_pos, config.v_sat_neg)

    def first_switch(v, high, rising_output):
        flips = np.nonzero(high[1:] != high[:-1])[0]
        for i in flips:
            if bool(high[i + 1]) == rising_output:
                return float(v[i + 1])
        return None

    return HysteresisLoop(
        ascending_input=v_up,
        ascending_output=out_up,
        descending_input=v_down,
        descending_output=out_down,
        measured_up_threshold=first_switch(v_down, high_down, True),
        measured_down_threshold=first_switch(v_up, high_up, False),
    )
