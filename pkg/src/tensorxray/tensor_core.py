"""Symmetric m-tensors in the plane and their angular Fourier modes.

A real symmetric m-tensor is determined by the m+1 components
``ftilde[k]`` (the component whose index tuple contains ``2`` exactly k
times).  Paired with the direction ``theta`` it becomes the trigonometric
polynomial

    <f, theta^m> = sum_n f_n exp(-i n theta),   n = -m, -m+2, ..., m,

with ``f_{-n} = conj(f_n)``.  The change of variables between ``ftilde``
and the modes goes through the polynomials Q_{m,k}(t) = (t+1)^(m-k) (t-1)^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Mapping

import numpy as np

DEFAULT_GRID = 128
DEFAULT_SUPPORT = 0.95

ModeEvaluator = Callable[[np.ndarray], dict[int, np.ndarray]]


def mode_indices(m: int) -> list[int]:
    """Angular mode indices m, m-2, ..., -m of an order-m tensor."""
    return list(range(m, -m - 1, -2))


def q_polynomial(m: int, k: int) -> np.ndarray:
    """Integer monomial coefficients (ascending powers) of Q_{m,k}."""
    coeffs = np.zeros(m + 1, dtype=np.int64)
    # (t+1)^(m-k) (t-1)^k, expanded as a convolution of two binomial rows
    plus = [comb(m - k, j) for j in range(m - k + 1)]
    minus = [comb(k, j) * (-1) ** (k - j) for j in range(k + 1)]
    for a, pa in enumerate(plus):
        for b, mb in enumerate(minus):
            coeffs[a + b] += pa * mb
    return coeffs


def q_basis_matrix(m: int) -> np.ndarray:
    """Matrix whose column k holds the monomial coefficients of Q_{m,k}."""
    return np.stack([q_polynomial(m, k) for k in range(m + 1)], axis=1)


def q_basis_system(m: int) -> np.ndarray:
    """Recursive linear system of the Q-basis induction step.

    Row j carries ones at columns j-1 and j (lower bidiagonal in the first
    m columns) and the last column holds (-1)^(m-j) C(m, j).  Its
    determinant is 2^m.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    a = np.zeros((m + 1, m + 1), dtype=np.int64)
    for j in range(m + 1):
        if j < m:
            a[j, j] = 1
        if 1 <= j <= m and j - 1 < m:
            a[j, j - 1] = 1
        a[j, m] = (-1) ** (m - j) * comb(m, j)
    return a


def monomial_to_q(m: int, h) -> np.ndarray:
    """Coefficients g with sum_k g_k Q_{m,k}(t) = sum_k h_k t^k."""
    h = np.asarray(h)
    if h.shape[0] != m + 1:
        raise ValueError(f"expected {m + 1} coefficients, got {h.shape[0]}")
    a = q_basis_matrix(m).astype(float)
    return np.linalg.solve(a, h.reshape(m + 1, -1)).reshape(h.shape)


def _component_weights(m: int) -> np.ndarray:
    k = np.arange(m + 1)
    return (-1j) ** k * np.array([comb(m, kk) for kk in k]) / 2.0**m


def components_to_modes(ftilde, m: int | None = None) -> dict[int, np.ndarray]:
    """Angular modes ``{n: f_n}`` of the pairing from tensor components.

    ``ftilde`` has length m+1 along its first axis; trailing axes (for
    instance a grid) are carried through.
    """
    ftilde = np.asarray(ftilde)
    if m is None:
        m = ftilde.shape[0] - 1
    if ftilde.shape[0] != m + 1:
        raise ValueError(f"expected {m + 1} components, got {ftilde.shape[0]}")
    weighted = ftilde * _component_weights(m).reshape((-1,) + (1,) * (ftilde.ndim - 1))
    p = np.tensordot(q_basis_matrix(m).astype(float), weighted, axes=(1, 0))
    return {m - 2 * j: p[j] for j in range(m + 1)}


def modes_to_components(modes: Mapping[int, np.ndarray], m: int, atol: float = 1e-12):
    """Inverse of :func:`components_to_modes`.

    Raises ``ValueError`` when the index set is wrong or the modes are not
    conjugate symmetric (``f_{-n} != conj(f_n)``).
    """
    expected = set(mode_indices(m))
    if set(modes) != expected:
        raise ValueError(f"mode indices {sorted(modes)} do not match order {m}")
    for n in expected:
        a, b = np.asarray(modes[n]), np.asarray(modes[-n])
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
        if np.max(np.abs(b - np.conj(a)), initial=0.0) > atol * scale:
            raise ValueError(f"modes {n} and {-n} are not complex conjugates")
    h = np.stack([np.asarray(modes[m - 2 * j], dtype=complex) for j in range(m + 1)])
    g = monomial_to_q(m, h)
    w = _component_weights(m).reshape((-1,) + (1,) * (h.ndim - 1))
    ftilde = g / w
    # real tensors give real components; drop round-off imaginary parts
    return ftilde.real if np.max(np.abs(ftilde.imag), initial=0.0) <= 1e-10 * max(
        1.0, float(np.max(np.abs(ftilde), initial=0.0))
    ) else ftilde


def grid_axis(G: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, G)


def grid_points(G: int) -> np.ndarray:
    """Complex grid points z = x + iy, indexed [iy, ix]."""
    x = grid_axis(G)
    return x[None, :] + 1j * x[:, None]


@dataclass(frozen=True)
class SymmetricTensorField:
    """Order-m symmetric tensor field on the square [-1, 1]^2.

    ``modes`` maps every n in {m, m-2, ..., -m} to a complex G x G array
    (rows index y, columns index x).  Phantoms with a closed form also carry
    ``evaluator``, which returns exact mode values at arbitrary points and is
    used instead of bilinear interpolation.
    """

    m: int
    modes: dict[int, np.ndarray]
    support_radius: float = DEFAULT_SUPPORT
    evaluator: ModeEvaluator | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if set(self.modes) != set(mode_indices(self.m)):
            raise ValueError(f"order {self.m} tensor needs modes {mode_indices(self.m)}")
        if not 0.0 < self.support_radius <= 1.0:
            raise ValueError("support_radius must lie in (0, 1]")
        shapes = {np.shape(v) for v in self.modes.values()}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise ValueError("mode planes must share one square shape")
        for v in self.modes.values():
            v.setflags(write=False)

    @property
    def G(self) -> int:
        return next(iter(self.modes.values())).shape[0]

    @property
    def h(self) -> float:
        return 2.0 / (self.G - 1)

    @classmethod
    def from_evaluator(cls, m: int, evaluator: ModeEvaluator, G: int = DEFAULT_GRID,
                       support_radius: float = DEFAULT_SUPPORT) -> "SymmetricTensorField":
        sampled = evaluator(grid_points(G))
        modes = {n: np.asarray(sampled[n], dtype=complex) for n in mode_indices(m)}
        return cls(m, modes, support_radius, evaluator)

    @classmethod
    def from_components(cls, ftilde, support_radius: float = DEFAULT_SUPPORT) -> "SymmetricTensorField":
        ftilde = np.asarray(ftilde)
        m = ftilde.shape[0] - 1
        modes = {n: np.asarray(v, dtype=complex) for n, v in components_to_modes(ftilde, m).items()}
        return cls(m, modes, support_radius)

    @classmethod
    def zeros(cls, m: int, G: int = DEFAULT_GRID, support_radius: float = DEFAULT_SUPPORT):
        def evaluator(z):
            z = np.asarray(z)
            return {n: np.zeros(z.shape, dtype=complex) for n in mode_indices(m)}
        return cls.from_evaluator(m, evaluator, G, support_radius)

    def components(self) -> np.ndarray:
        """Component grids ftilde_0 ... ftilde_m, shape (m+1, G, G)."""
        return modes_to_components(self.modes, self.m, atol=1e-9)

    def modes_at(self, z) -> dict[int, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        if self.evaluator is not None:
            return self.evaluator(z)
        return {n: bilinear(self.modes[n], z) for n in self.modes}

    def __add__(self, other: "SymmetricTensorField") -> "SymmetricTensorField":
        if self.m != other.m or self.G != other.G:
            raise ValueError("fields must share order and grid")
        ev = None
        if self.evaluator is not None and other.evaluator is not None:
            a, b = self.evaluator, other.evaluator
            def ev(z):
                fa, fb = a(z), b(z)
                return {n: fa[n] + fb[n] for n in fa}
        modes = {n: self.modes[n] + other.modes[n] for n in self.modes}
        return SymmetricTensorField(self.m, modes, max(self.support_radius, other.support_radius), ev)


def bilinear(plane: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of a grid plane on [-1,1]^2; zero outside."""
    G = plane.shape[0]
    h = 2.0 / (G - 1)
    fx = (z.real + 1.0) / h
    fy = (z.imag + 1.0) / h
    inside = (fx >= 0) & (fx <= G - 1) & (fy >= 0) & (fy <= G - 1)
    ix = np.clip(np.floor(fx).astype(np.int64), 0, G - 2)
    iy = np.clip(np.floor(fy).astype(np.int64), 0, G - 2)
    tx = fx - ix
    ty = fy - iy
    v = ((1 - tx) * (1 - ty) * plane[iy, ix] + tx * (1 - ty) * plane[iy, ix + 1]
         + (1 - tx) * ty * plane[iy + 1, ix] + tx * ty * plane[iy + 1, ix + 1])
    return np.where(inside, v, 0.0)


def pair_values(field: SymmetricTensorField, z, theta, check: bool = True, atol: float = 1e-12):
    """Vectorised pairing <f(z), theta^m> for broadcastable ``z`` and ``theta``."""
    z, theta = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(theta, dtype=float))
    modes = field.modes_at(z)
    total = np.zeros(z.shape, dtype=complex)
    for n, v in modes.items():
        total += v * np.exp(-1j * n * theta)
    if check:
        scale = max(1.0, float(np.max(np.abs(total), initial=0.0)))
        if np.max(np.abs(total.imag), initial=0.0) > atol * scale:
            raise ValueError("pairing has an imaginary part: modes are not conjugate symmetric")
    return total.real


def pair_with_direction(field: SymmetricTensorField, z: complex, theta: float) -> float:
    """<f(z), theta^m> at a single point and direction."""
    return float(pair_values(field, z, theta))
