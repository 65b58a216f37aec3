"""One-sided amplitude spectra of sampled control signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NUM_CHANNELS, InvalidInputError
from .propagate import ControlGrid


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """``frequencies`` in GHz (cycles/ns) from 0 to Nyquist; ``amplitudes``
    in the units of the signal, normalized so a unit sinusoid on a bin
    reads 1."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    channel: int
    num_samples: int

    def power_weights(self) -> np.ndarray:
        """Weights ``w`` with ``sum(w * amplitudes**2) == mean(x**2)``."""
        w = np.full(self.amplitudes.shape, 0.5)
        w[0] = 1.0
        if self.num_samples % 2 == 0:
            w[-1] = 0.25
        return w

    def mean_square(self) -> float:
        return float(np.sum(self.power_weights() * self.amplitudes**2))


def dft_spectrum(grid: ControlGrid, channel: int) -> SpectrumTable:
    if not 0 <= channel < NUM_CHANNELS:
        raise InvalidInputError(f"channel must be in [0, {NUM_CHANNELS}), got {channel}")
    n = grid.num_steps
    if n < 2:
        raise InvalidInputError("need at least two samples")
    x = grid.values[channel]
    amplitudes = np.abs(np.fft.rfft(x)) * (2.0 / n)
    amplitudes[0] *= 0.5
    frequencies = np.fft.rfftfreq(n, d=grid.dt)
    return SpectrumTable(frequencies, amplitudes, channel, n)


def band_energy_fraction(table: SpectrumTable, cutoff_ghz: float) -> float:
    """Share of the signal's mean square carried by bins below ``cutoff_ghz``."""
    power = table.power_weights() * table.amplitudes**2
    total = power.sum()
    if total == 0:
        return 1.0
    return float(power[table.frequencies < cutoff_ghz].sum() / total)
