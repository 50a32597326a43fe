"""Closed-form test tensor fields.

Every phantom is built from component profiles ftilde_k(z) that vanish
outside a disc, and evaluates its angular modes exactly at any point.
"""

from __future__ import annotations

import numpy as np

from .tensor_core import (
    DEFAULT_GRID,
    DEFAULT_SUPPORT,
    SymmetricTensorField,
    components_to_modes,
)


def _field_from_profiles(m, profile, weights, G, support):
    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != m + 1:
        raise ValueError(f"need {m + 1} component weights for order {m}")

    def evaluator(z):
        z = np.asarray(z, dtype=complex)
        prof = profile(z)
        if prof.ndim == z.ndim:
            comps = weights.reshape((-1,) + (1,) * z.ndim) * prof[None]
        else:
            comps = prof
        return components_to_modes(comps.astype(complex), m)

    return SymmetricTensorField.from_evaluator(m, evaluator, G, support)


def pedestal(m: int = 0, radius: float = 1.0, weights=None, G: int = DEFAULT_GRID):
    """Components ``weights[k] * (radius^2 - |z|^2)`` on the disc of that radius.

    For m = 0 and radius 1 the chord integral at distance d from the origin
    is (4/3)(1 - d^2)^(3/2).
    """
    if weights is None:
        weights = [1.0] + [0.0] * m

    def profile(z):
        return np.clip(radius**2 - np.abs(z) ** 2, 0.0, None)

    return _field_from_profiles(m, profile, weights, G, radius)


def pedestal_xray(beta, theta, radius: float = 1.0):
    """Closed-form X-ray transform of the m = 0 pedestal."""
    d = np.sin(np.asarray(theta) - np.asarray(beta))
    return 4.0 / 3.0 * np.clip(radius**2 - d**2, 0.0, None) ** 1.5


def smooth_cutoff(z, radius: float, power: int = 4):
    return np.clip(1.0 - np.abs(z) ** 2 / radius**2, 0.0, None) ** power


def bumps(m: int, seed: int = 0, count: int = 3, support: float = DEFAULT_SUPPORT,
          G: int = DEFAULT_GRID, power: int = 4):
    """Sum of polynomial bumps (1 - |z-c|^2/s^2)^power per component.

    Centres and widths are drawn so every bump sits inside ``support``.
    """
    rng = np.random.default_rng(seed)
    centres = []
    for _ in range(count):
        r = rng.uniform(0.0, 0.45 * support)
        phi = rng.uniform(-np.pi, np.pi)
        c = r * np.exp(1j * phi)
        s = rng.uniform(0.3, 0.9) * (support - abs(c))
        centres.append((c, s))
    amps = rng.normal(size=(m + 1, count))

    def profile(z):
        out = np.zeros((m + 1,) + z.shape, dtype=float)
        for b, (c, s) in enumerate(centres):
            shape = np.clip(1.0 - np.abs(z - c) ** 2 / s**2, 0.0, None) ** power
            out += amps[:, b].reshape((-1,) + (1,) * z.ndim) * shape[None]
        return out

    return _field_from_profiles(m, profile, np.ones(m + 1), G, support)


def band_limited(m: int, seed: int = 0, degree: int = 3, support: float = DEFAULT_SUPPORT,
                 G: int = DEFAULT_GRID):
    """Random low-degree polynomial components times a smooth radial cutoff."""
    rng = np.random.default_rng(seed)
    coefs = rng.normal(size=(m + 1, degree + 1, degree + 1))
    mask = np.add.outer(np.arange(degree + 1), np.arange(degree + 1)) <= degree
    coefs *= mask

    def profile(z):
        x, y = z.real, z.imag
        cut = smooth_cutoff(z, support)
        out = np.zeros((m + 1,) + z.shape, dtype=float)
        for k in range(m + 1):
            out[k] = np.polynomial.polynomial.polyval2d(x, y, coefs[k]) * cut
        return out

    return _field_from_profiles(m, profile, np.ones(m + 1), G, support)


def zero(m: int = 0, G: int = DEFAULT_GRID):
    return SymmetricTensorField.zeros(m, G)


PHANTOMS = {
    "pedestal": pedestal,
    "bumps": bumps,
    "band-limited": band_limited,
    "zero": zero,
}


def make_phantom(name: str, m: int, seed: int = 0, G: int = DEFAULT_GRID,
                 support: float = DEFAULT_SUPPORT) -> SymmetricTensorField:
    if name == "pedestal":
        return pedestal(m, G=G)
    if name == "bumps":
        return bumps(m, seed=seed, support=support, G=G)
    if name == "band-limited":
        return band_limited(m, seed=seed, support=support, G=G)
    if name == "zero":
        return zero(m, G=G)
    raise ValueError(f"unknown phantom {name!r}; choose from {sorted(PHANTOMS)}")
