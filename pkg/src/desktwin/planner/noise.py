"""Colored (power-law) Gaussian noise for action-sequence sampling."""
from __future__ import annotations

import math

import numpy as np

from .config import ICEMConfig

NOISE_AMPLITUDE_BOUND = 3.0


def powerlaw_noise(rng: np.random.Generator, beta: float, horizon: int, dim: int) -> np.ndarray:
    """Unit-variance noise ``(horizon, dim)`` with power spectrum ``1 / f**beta`` per column.

    Frequencies below ``1 / horizon`` are floored to it, so ``beta = 0`` is
    white noise and larger exponents concentrate power at low frequencies.
    """

    frequencies = np.fft.rfftfreq(horizon)
    scale = np.maximum(frequencies, 1.0 / horizon) ** (-beta / 2.0)

    # Expected variance of each output sample; DC and Nyquist bins are real.
    power = 4.0 * scale**2
    power[0] = 2.0 * scale[0] ** 2
    if horizon % 2 == 0 and horizon > 1:
        power[-1] = 2.0 * scale[-1] ** 2
    sigma = math.sqrt(float(power.sum())) / horizon

    real = rng.normal(size=(dim, len(frequencies))) * scale
    imag = rng.normal(size=(dim, len(frequencies))) * scale
    if horizon % 2 == 0:
        imag[:, -1] = 0.0
        real[:, -1] *= math.sqrt(2.0)
    imag[:, 0] = 0.0
    real[:, 0] *= math.sqrt(2.0)
    series = np.fft.irfft(real + 1j * imag, n=horizon, axis=-1) / sigma
    return series.T


def sample_population(
    mean: np.ndarray,
    std: np.ndarray,
    cfg: ICEMConfig,
    seed: int,
    iteration: int,
) -> np.ndarray:
    """Action sequences ``(N', h, d)`` around ``mean``.

    Sample ``i`` of ``iteration`` draws from its own generator seeded with
    ``(seed, iteration, i)``; noise is clipped to the amplitude bound,
    scaled by ``std`` and the result clipped to the action bound.
    """

    mean = np.asarray(mean, dtype=float)
    std = np.maximum(np.asarray(std, dtype=float), cfg.min_std)
    horizon, dim = mean.shape
    count = cfg.population_at(iteration)
    noise = np.stack(
        [
            powerlaw_noise(np.random.default_rng([seed, iteration, index]), cfg.beta, horizon, dim)
            for index in range(count)
        ]
    )
    noise = np.clip(noise, -NOISE_AMPLITUDE_BOUND, NOISE_AMPLITUDE_BOUND)
    return np.clip(mean + noise * std, -cfg.bound, cfg.bound)
