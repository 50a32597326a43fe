"""Sequence-valued boundary data, the Bukhgeim-Cauchy operator and the
Bukhgeim-Hilbert transform on the unit disc.

Sequences are stored parity-thinned: entry ``d`` (the depth) holds the
angular mode n = -(s0 + 2 d).  The left shift, the Cauchy series and the
Hilbert partner index all step through stored entries, so the partner of
mode (n, k) with k <= -1 is (n + 2k, -k), found at depth d - k.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import bracket

DEFAULT_M = 256
MAX_INTERIOR_RADIUS = 0.995


class QuadratureWarning(UserWarning):
    pass


def _synth(coeffs: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Evaluate rows of boundary coefficients (k = -K..K) at angles ``phi``."""
    K = (coeffs.shape[-1] - 1) // 2
    basis = np.exp(1j * np.multiply.outer(np.arange(-K, K + 1), phi))
    return coeffs @ basis


def nodes(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


@dataclass(frozen=True)
class BoundarySequence:
    """<g_{-s0}, g_{-s0-2}, ...> on the unit circle, truncated to L entries.

    ``coeffs[d, K + k]`` is the boundary Fourier coefficient g_{-(s0+2d), k}.
    Samples on M uniform nodes are derived on demand, so both views agree
    up to round-off.
    """

    s0: int
    coeffs: np.ndarray
    M: int = DEFAULT_M

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        if c.shape[1] % 2 == 0:
            raise ValueError("coefficient rows need odd length 2*Kmax+1")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)

    @property
    def L(self) -> int:
        return self.coeffs.shape[0]

    @property
    def Kmax(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def angular_modes(self) -> list[int]:
        return [-(self.s0 + 2 * d) for d in range(self.L)]

    def samples(self, M: int | None = None) -> np.ndarray:
        M = self.M if M is None else M
        return _synth(self.coeffs, nodes(M))

    def at(self, phi) -> np.ndarray:
        return _synth(self.coeffs, np.atleast_1d(phi))

    @classmethod
    def from_samples(cls, s0: int, samples, Kmax: int) -> "BoundarySequence":
        samples = np.atleast_2d(np.asarray(samples, dtype=complex))
        M = samples.shape[1]
        if Kmax > M // 2 - 1:
            raise ValueError("Kmax above the sampling Nyquist limit")
        F = np.fft.fft(samples, axis=1) / M
        k = np.arange(-Kmax, Kmax + 1)
        return cls(s0, F[:, np.mod(k, M)], M)

    @classmethod
    def zeros(cls, s0: int, L: int, Kmax: int) -> "BoundarySequence":
        return cls(s0, np.zeros((L, 2 * Kmax + 1), complex))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def to_json(self) -> dict:
        return {
            "s0": self.s0,
            "L": self.L,
            "M": self.M,
            "Kmax": self.Kmax,
            "entries": [
                [[int(k), float(v.real), float(v.imag)]
                 for k, v in zip(range(-self.Kmax, self.Kmax + 1), row) if v != 0]
                for row in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BoundarySequence":
        K, L = int(obj["Kmax"]), int(obj["L"])
        c = np.zeros((L, 2 * K + 1), complex)
        for d, row in enumerate(obj["entries"]):
            for k, re, im in row:
                c[d, K + int(k)] = complex(re, im)
        return cls(int(obj["s0"]), c, int(obj.get("M", DEFAULT_M)))


@dataclass(frozen=True)
class InteriorModeField:
    """Interior values of a thinned sequence, ``values[d]`` on the G x G grid."""

    s0: int
    values: np.ndarray

    @property
    def L(self) -> int:
        return self.values.shape[0]

    @property
    def G(self) -> int:
        return self.values.shape[1]

    def entry(self, n: int) -> np.ndarray:
        """Field of angular mode n (zero beyond the stored depth)."""
        d = (-n - self.s0) // 2
        if (-n - self.s0) % 2 or d < 0:
            raise KeyError(f"mode {n} is not part of this sequence")
        if d >= self.L:
            return np.zeros(self.values.shape[1:], complex)
        return self.values[d]


def left_shift(g: BoundarySequence, q: int = 1) -> BoundarySequence:
    """Drop the first ``q`` entries."""
    if q < 0:
        raise ValueError("shift must be non-negative")
    if q > g.L:
        raise ValueError(f"cannot shift a length-{g.L} sequence by {q}")
    return BoundarySequence(g.s0 + 2 * q, g.coeffs[q:], g.M)


def _node_count(r: np.ndarray, M: int, Kmax: int, oversample: float) -> np.ndarray:
    # the kernel peaks over a boundary arc of width ~(1 - r); sequence depth does not matter
    need = oversample / np.maximum(1.0 - r, 1e-12)
    need = np.maximum(need, max(M, 4 * (Kmax + 1)))
    return (2 ** np.ceil(np.log2(need))).astype(np.int64)


def _cauchy_block(v: np.ndarray, zeta: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Trapezoidal Bukhgeim-Cauchy sums for points ``z`` (P,) and samples ``v`` (L, M)."""
    L = v.shape[0]
    D = zeta[None, :] - z[:, None]
    cauchy = zeta[None, :] / D
    kern = 2.0 * cauchy.real
    w = np.conj(D) / D
    out = np.empty((L, z.size), complex)
    S = np.zeros_like(D)
    out[L - 1] = np.mean(v[L - 1] * cauchy, axis=1)
    for d in range(L - 2, -1, -1):
        S = w * (v[d + 1] + S)
        out[d] = np.mean(v[d] * cauchy + kern * S, axis=1)
    return out


def bukhgeim_cauchy_many(g: BoundarySequence, z, M: int = DEFAULT_M, oversample: float = 64.0,
                         max_radius: float = MAX_INTERIOR_RADIUS, budget: int = 1 << 21) -> np.ndarray:
    """Bukhgeim-Cauchy operator at many interior points.

    Component d is

        (2 pi i)^-1 oint g_d / (zeta - z) dzeta
          + (2 pi i)^-1 oint {dzeta/(zeta-z) - dzeta_bar/(zeta_bar-z_bar)}
                sum_{j>=1} g_{d+j}(zeta) ((zeta_bar - z_bar)/(zeta - z))^j,

    evaluated with the periodic trapezoidal rule.  The node count grows
    like ``oversample / (1 - |z|)`` (at least ``M``); boundary samples are synthesised
    exactly from the stored coefficients at whatever count is needed.
    Returns an array of shape (L,) + z.shape.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    r = np.abs(flat)
    beyond = r > max_radius * (1 + 1e-12)
    if np.any(beyond):
        warnings.warn(f"{int(np.sum(beyond))} points beyond |z| = {max_radius}; "
                      "trapezoidal accuracy degrades", QuadratureWarning, stacklevel=2)
    out = np.zeros((g.L, flat.size), complex)
    if g.L == 0 or flat.size == 0:
        return out.reshape((g.L,) + z.shape)
    counts = _node_count(np.minimum(r, 1 - 1e-6), M, g.Kmax, oversample)
    for Mz in np.unique(counts):
        idx = np.nonzero(counts == Mz)[0]
        phi = nodes(int(Mz))
        zeta = np.exp(1j * phi)
        v = g.samples(int(Mz))
        step = max(1, budget // int(Mz))
        for a in range(0, idx.size, step):
            sel = idx[a:a + step]
            out[:, sel] = _cauchy_block(v, zeta, flat[sel])
    return out.reshape((g.L,) + z.shape)


def bukhgeim_cauchy(g: BoundarySequence, z: complex, M: int = DEFAULT_M, **kw) -> np.ndarray:
    """Sequence (B g)(z) at one interior point."""
    return bukhgeim_cauchy_many(g, np.array([z]), M, **kw)[:, 0]


def hilbert_spectral(coeffs) -> tuple[np.ndarray, bool]:
    """Boundary coefficients of the Bukhgeim-Hilbert transform.

    (H g)_{d,k} = i g_{d,k} for k >= 0 and
    i (-g_{d,k} + 2 (-1)^k g_{d-k,-k}) for k <= -1, where the partner sits
    |k| entries deeper.  Partners beyond the stored depth count as zero and
    set the returned truncation flag.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    L, width = c.shape
    K = (width - 1) // 2
    out = 1j * c.copy()
    truncated = False
    for k in range(-K, 0):
        sign = (-1) ** k
        col, partner = K + k, K - k
        for d in range(L):
            if d - k < L:
                out[d, col] = 1j * (-c[d, col] + 2 * sign * c[d - k, partner])
            else:
                out[d, col] = -1j * c[d, col]
                truncated = truncated or c[d, col] != 0
    return out, truncated


def trace_defect(coeffs) -> tuple[np.ndarray, bool]:
    """Coefficients of (I + iH) g."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    h, truncated = hilbert_spectral(c)
    return c + 1j * h, truncated


def trace_residual(g: BoundarySequence, q: int = 0, absolute: bool = False) -> float:
    """max |((I + iH) g)_{d,k}| over depths d >= q, normalised by max |g|.

    Depths whose partners fall past the truncation are skipped, since the
    missing partner would be read as zero.
    """
    defect, _ = trace_defect(g.coeffs)
    K = g.Kmax
    worst = 0.0
    for d in range(q, g.L):
        for k in range(-K, K + 1):
            if k < 0 and d - k >= g.L:
                continue
            worst = max(worst, abs(defect[d, K + k]))
    if absolute:
        return worst
    scale = g.max_abs()
    return worst / scale if scale > 0 else 0.0


def hilbert_quadrature_oracle(g: BoundarySequence, zeta0: complex, M: int = 4096) -> np.ndarray:
    """Principal-value quadrature of (H g)(zeta0) for zeta0 on the circle.

    Uses the trapezoidal rule on M nodes with the singular node deleted.
    On the circle the Cauchy kernel splits as i/2 + (1/2) cot((phi-phi0)/2)
    per unit dphi; the deleted node's smooth part i/2 is added back.  For
    |z| = 1 the second kernel reduces to i dphi and the ratio
    (zeta_bar - z_bar)/(zeta - z) to -conj(zeta z), both smooth.
    """
    if M % 2:
        raise ValueError("M must be even")
    phi = nodes(M)
    j0 = int(np.round(np.angle(zeta0) % (2 * np.pi) / (2 * np.pi / M))) % M
    if abs(np.exp(1j * phi[j0]) - zeta0) > 1e-12:
        raise ValueError("zeta0 is not a quadrature node")
    zeta = np.exp(1j * phi)
    v = g.samples(M)
    h = 2 * np.pi / M
    keep = np.arange(M) != j0
    kern = np.zeros(M, complex)
    kern[keep] = 1j * zeta[keep] / (zeta[keep] - zeta0)
    w = -np.conj(zeta * zeta0)
    out = np.empty(g.L, complex)
    S = np.zeros(M, complex)
    for d in range(g.L - 1, -1, -1):
        singular = h * np.sum(v[d] * kern) + 0.5j * h * v[d, j0]
        regular = 1j * h * np.sum(S)
        out[d] = (singular + regular) / np.pi
        S = w * (v[d] + S)
    return out


def sequence_norms(g: BoundarySequence, mu: float = 0.6, M: int | None = None) -> tuple[float, float, float]:
    """Sampled l^{1,1}, l^{1,2} norms and a Hoelder-type difference quotient.

    The quotient is max over dyadic node separations of
    sum_j <j> |g_j(xi) - g_j(eta)| / |xi - eta|^mu.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    M = g.M if M is None else M
    v = np.abs(g.samples(M)) if g.L else np.zeros((0, M))
    j = bracket(np.arange(g.L))[:, None]
    l11 = float(np.max(np.sum(j * v, axis=0), initial=0.0))
    l12 = float(np.max(np.sum(j**2 * v, axis=0), initial=0.0))
    samples = g.samples(M)
    zeta = np.exp(1j * nodes(M))
    proxy = 0.0
    s = 1
    while s <= M // 2:
        diff = np.sum(j * np.abs(samples - np.roll(samples, -s, axis=1)), axis=0)
        dist = abs(zeta[0] - zeta[s])
        proxy = max(proxy, float(np.max(diff)) / dist**mu)
        s *= 2
    return l11, l12, proxy


def _central(field: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order central differences; second order next to and on the edge."""
    out = np.gradient(field, h, axis=axis, edge_order=2)
    n = field.shape[axis]
    if n < 5:
        return out

    def part(a, b):
        idx = [slice(None)] * field.ndim
        idx[axis] = slice(a, b)
        return tuple(idx)

    out[part(2, n - 2)] = (field[part(0, n - 4)] - 8 * field[part(1, n - 3)]
                           + 8 * field[part(3, n - 1)] - field[part(4, n)]) / (12 * h)
    return out


def wirtinger(field: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """(d f, dbar f) by central differences; one-sided at the grid edge.

    Axis -1 is x and axis -2 is y.  d = (dx - i dy)/2, dbar = (dx + i dy)/2.
    """
    fx = _central(field, h, -1)
    fy = _central(field, h, -2)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def check_l_analytic(u: InteriorModeField, h: float, radius: float = 0.9) -> float:
    """Normalised max of |dbar u_d + d u_{d+1}| over |z| <= radius (grid edge excluded)."""
    G = u.G
    x = np.linspace(-1.0, 1.0, G)
    z = x[None, :] + 1j * x[:, None]
    mask = np.abs(z) <= radius
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    d, dbar = wirtinger(u.values, h)
    scale = max(float(np.max(np.abs(d[:, mask]), initial=0.0)),
                float(np.max(np.abs(dbar[:, mask]), initial=0.0)))
    if scale == 0.0:
        return 0.0
    res = dbar.copy()
    res[:-1] += d[1:]
    return float(np.max(np.abs(res[:, mask]))) / scale
