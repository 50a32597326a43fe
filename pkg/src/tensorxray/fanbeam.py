"""Fan-beam X-ray transform on the torus of (source, direction) angles.

A line is labelled by a boundary point e^{i beta} and a direction
e^{i theta}.  With alpha = theta - beta the torus splits into the outflux
part (|alpha| < pi/2), the influx part (|alpha| > pi/2) and the tangent
lines (|alpha| = pi/2).

Sampling uses one even N for both angles, beta_i = -pi + 2 pi i / N and
theta_j = -pi + 2 pi j / N.  Then theta -> theta + pi is the index shift
j -> j + N/2, and the line reversal (beta, theta) -> (2 theta - beta - pi,
theta + pi) is the index map (i, j) -> (2j - i + N/2, j + N/2), both mod N,
so the two line symmetries are exact grid maps.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .tensor_core import SymmetricTensorField, pair_values

DEFAULT_NODES = 64


class Region(enum.Enum):
    OUTFLUX = "Gamma+"
    INFLUX = "Gamma-"
    TANGENT = "Gamma0"


def wrap(angle):
    """Wrap angles to (-pi, pi]."""
    a = np.mod(np.asarray(angle, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(a == -np.pi, np.pi, a)


def classify_point(beta: float, theta: float) -> Region:
    alpha = abs(float(wrap(theta - beta)))
    if alpha < np.pi / 2:
        return Region.OUTFLUX
    if alpha > np.pi / 2:
        return Region.INFLUX
    return Region.TANGENT


def chord(beta: float, theta: float):
    """Entry point, exit point and length of the chord through e^{i beta}.

    The exit point is e^{i(2 theta - beta - pi)} = e^{i beta} - 2 cos(alpha) e^{i theta}.
    """
    entry = np.exp(1j * beta)
    exit_ = np.exp(1j * (2 * theta - beta - np.pi))
    length = 2.0 * abs(np.cos(theta - beta))
    return entry, exit_, length


def angle_grid(N: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(N) / N


def xray_many(field: SymmetricTensorField, beta, theta, nodes: int = DEFAULT_NODES):
    """Vectorised X-ray transform over broadcastable ``beta`` and ``theta``.

    The chord is parametrised as e^{i beta} + t e^{i theta} with t between
    -2 cos(alpha) and 0, which covers the whole intersection of the line
    with the unit disc on both halves of the torus.
    """
    if nodes < 2:
        raise ValueError("need at least 2 quadrature nodes")
    beta, theta = np.broadcast_arrays(np.asarray(beta, float), np.asarray(theta, float))
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    span = -2.0 * np.cos(theta - beta)
    t = span[..., None] * s
    z = np.exp(1j * beta)[..., None] + t * np.exp(1j * theta)[..., None]
    vals = pair_values(field, z, theta[..., None], check=False)
    return np.abs(span) * np.tensordot(vals, w, axes=(-1, 0))


def xray(field: SymmetricTensorField, beta: float, theta: float, nodes: int = DEFAULT_NODES) -> float:
    """Gauss-Legendre chord integral of <f, theta^m> along the line (beta, theta)."""
    return float(xray_many(field, beta, theta, nodes))


def tangent_mask(N: int) -> np.ndarray:
    """Grid points lying exactly on Gamma_0 (only when N is a multiple of 4)."""
    i = np.arange(N)
    d = np.mod(i[None, :] - i[:, None], N)  # theta index minus beta index
    if N % 4:
        return np.zeros((N, N), dtype=bool)
    return (d == N // 4) | (d == 3 * N // 4)


def outflux_sign(N: int) -> np.ndarray:
    """+1 on Gamma_+, -1 on Gamma_-, 0 on Gamma_0 over the (beta, theta) grid."""
    i = np.arange(N)
    d = np.mod(i[None, :] - i[:, None], N)
    d = np.where(d > N // 2, d - N, d)  # wrapped alpha index in (-N/2, N/2]
    sign = np.where(4 * np.abs(d) < N, 1.0, -1.0)
    sign[tangent_mask(N)] = 0.0
    return sign


@dataclass(frozen=True)
class FanBeamSinogram:
    """Samples X f(e^{i beta_i}, e^{i theta_j}) on the N x N torus grid."""

    m: int
    values: np.ndarray
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("sinogram must be square")
        if v.shape[0] % 2:
            raise ValueError("sinogram size N must be even")
        if not np.all(np.isfinite(v)):
            raise ValueError("sinogram contains non-finite values")
        v.setflags(write=False)

    @property
    def N(self) -> int:
        return self.values.shape[0]


def sinogram(field: SymmetricTensorField, N: int, nodes: int = DEFAULT_NODES,
             threads: int = 1) -> FanBeamSinogram:
    """Assemble the fan-beam sinogram; Gamma_0 samples are set to 0."""
    if N % 2:
        raise ValueError("N must be even")
    ang = angle_grid(N)
    rows = np.array_split(np.arange(N), max(1, min(N, 4 * threads)))

    def block(idx):
        return xray_many(field, ang[idx][:, None], ang[None, :], nodes)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, rows))
    else:
        parts = [block(r) for r in rows]
    values = np.concatenate(parts, axis=0)
    values[tangent_mask(N)] = 0.0
    return FanBeamSinogram(field.m, values, nodes)


def check_line_symmetries(s: FanBeamSinogram) -> tuple[float, float]:
    """Residuals of the direction-reversal and line-reversal symmetries."""
    v, N, sign = s.values, s.N, (-1.0) ** s.m
    i = np.arange(N)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    r1 = np.max(np.abs(v[ii, (jj + N // 2) % N] - sign * v), initial=0.0)
    r2 = np.max(np.abs(v[(2 * jj - ii + N // 2) % N, (jj + N // 2) % N] - sign * v), initial=0.0)
    return float(r1), float(r2)


@dataclass(frozen=True)
class TorusFunction:
    """Sign-flipped torus data: g = Xf on Gamma_+ and -Xf on Gamma_-.

    ``angularly_odd`` is True for even tensor order (g(beta, theta + pi) =
    -g(beta, theta)) and False for odd order.
    """

    m: int
    values: np.ndarray
    angularly_odd: bool

    @property
    def N(self) -> int:
        return self.values.shape[0]


def g_from_sinogram(s: FanBeamSinogram) -> TorusFunction:
    values = s.values * outflux_sign(s.N)
    return TorusFunction(s.m, values, angularly_odd=(s.m % 2 == 0))


def torus_symmetry_residuals(g: TorusFunction) -> tuple[float, float]:
    """Residuals of the angular parity and the line-reversal (skew-)symmetry of g."""
    v, N = g.values, g.N
    parity = -1.0 if g.angularly_odd else 1.0
    i = np.arange(N)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    r1 = np.max(np.abs(v[ii, (jj + N // 2) % N] - parity * v), initial=0.0)
    r2 = np.max(np.abs(v[(2 * jj - ii + N // 2) % N, (jj + N // 2) % N] - (-parity) * v), initial=0.0)
    return float(r1), float(r2)


def l1_mass(g: TorusFunction) -> float:
    """Discrete (2 pi)^-2 integral of |g| over the torus."""
    return float(np.mean(np.abs(g.values)))


def l1_bound(field: SymmetricTensorField) -> float:
    """Upper bound (pi delta)^-1 sum_n ||f_n||_L1 for fields supported in |z| <= r.

    delta = sqrt(1 - r^2); the bound is infinite when the support reaches
    the unit circle.
    """
    r = field.support_radius
    delta = np.sqrt(max(0.0, 1.0 - r * r))
    if delta == 0.0:
        return float("inf")
    cell = field.h**2
    mass = sum(float(np.sum(np.abs(v))) * cell for v in field.modes.values())
    return mass / (np.pi * delta)
