"""Deterministic low-discrepancy sampling of disks and spheres.

Golden-ratio spirals give reproducible, well-spread sample sets; the seed
only rotates the sequence, so two runs with the same (count, seed) produce
identical points bit for bit.
"""

from __future__ import annotations

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _seed_phase(seed: int) -> float:
    return 2.0 * np.pi * ((seed * GOLDEN) % 1.0)


def golden_disk(count: int, radius: float, seed: int = 0) -> np.ndarray:
    """Complex points spiralling over the disk |z| <= radius."""
    if count < 1:
        raise ValueError("sample count must be at least 1")
    k = np.arange(count)
    rho = radius * np.sqrt((k + 0.5) / count)
    theta = 2.0 * np.pi * ((k * GOLDEN) % 1.0) + _seed_phase(seed)
    return rho * np.exp(1j * theta)


def golden_sphere(count: int, seed: int = 0) -> np.ndarray:
    """(count, 3) unit vectors spiralling over the 2-sphere, poles excluded."""
    if count < 1:
        raise ValueError("sample count must be at least 1")
    k = np.arange(count)
    z = 1.0 - 2.0 * (k + 0.5) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = 2.0 * np.pi * ((k * GOLDEN) % 1.0) + _seed_phase(seed)
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=-1)


def angle_samples(count: int, seed: int) -> np.ndarray:
    """Uniform angles on [0, 2*pi) from a seeded generator."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, count)
