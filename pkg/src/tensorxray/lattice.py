"""Fourier lattice of torus data and its region partition.

Coefficients follow

    g_{n,k} = (2 pi)^-2 iint g(beta, theta) e^{-i n theta} e^{-i k beta},

with n the angular mode (direction) and k the boundary mode (source
position).  A :class:`TorusLattice` stores a dense rectangular band
|n| <= Nmax, |k| <= Kmax together with a mask of known entries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fanbeam import TorusFunction, angle_grid

W_PLUS, W_MINUS = "W+", "W-"
G_LEFT, G_RIGHT = "G_L", "G_R"
R_PLUS, R_MINUS = "R+", "R-"
OTHER = "OTHER"

FAMILY = {W_PLUS: "W", W_MINUS: "W", G_LEFT: "G", G_RIGHT: "G", R_PLUS: "R", R_MINUS: "R"}


class TruncationWarning(UserWarning):
    pass


@dataclass
class TorusLattice:
    m: int
    Nmax: int
    Kmax: int
    coeffs: np.ndarray = None
    known: np.ndarray = None
    flags: list = field(default_factory=list)

    def __post_init__(self):
        shape = (2 * self.Nmax + 1, 2 * self.Kmax + 1)
        if self.coeffs is None:
            self.coeffs = np.zeros(shape, dtype=complex)
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != shape:
            raise ValueError(f"coefficient array has shape {self.coeffs.shape}, expected {shape}")
        if self.known is None:
            self.known = np.ones(shape, dtype=bool)
        self.known = np.asarray(self.known, dtype=bool)

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(-self.Nmax, self.Nmax + 1)

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.Kmax, self.Kmax + 1)

    def in_band(self, n, k) -> bool:
        return abs(n) <= self.Nmax and abs(k) <= self.Kmax

    def __getitem__(self, nk) -> complex:
        n, k = nk
        if not self.in_band(n, k):
            raise KeyError(f"({n}, {k}) outside the band")
        return complex(self.coeffs[n + self.Nmax, k + self.Kmax])

    def __setitem__(self, nk, value):
        n, k = nk
        if not self.in_band(n, k):
            raise KeyError(f"({n}, {k}) outside the band")
        self.coeffs[n + self.Nmax, k + self.Kmax] = value
        self.known[n + self.Nmax, k + self.Kmax] = True

    def is_known(self, n, k) -> bool:
        return self.in_band(n, k) and bool(self.known[n + self.Nmax, k + self.Kmax])

    def copy(self) -> "TorusLattice":
        return TorusLattice(self.m, self.Nmax, self.Kmax, self.coeffs.copy(),
                            self.known.copy(), list(self.flags))

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs[self.known]), initial=0.0))

    def row(self, n: int) -> np.ndarray:
        """Boundary coefficients g_{n,k}, k = -Kmax..Kmax (unknown entries as 0)."""
        return np.where(self.known[n + self.Nmax], self.coeffs[n + self.Nmax], 0.0)

    def entries(self):
        """Iterate (n, k, value) over known entries."""
        for a, n in enumerate(self.n_values):
            for b, k in enumerate(self.k_values):
                if self.known[a, b]:
                    yield int(n), int(k), complex(self.coeffs[a, b])

    @classmethod
    def empty(cls, m, Nmax, Kmax) -> "TorusLattice":
        return cls(m, Nmax, Kmax, known=np.zeros((2 * Nmax + 1, 2 * Kmax + 1), bool))


def surviving_parity(m: int) -> int:
    """Parity (0 even, 1 odd) of the angular modes allowed for order m."""
    return (m + 1) % 2


def analyze(g: TorusFunction, Nmax: int | None = None, Kmax: int | None = None) -> TorusLattice:
    """Discrete Fourier coefficients of torus samples via a 2D FFT.

    Axis 0 of ``g.values`` is beta (boundary mode k), axis 1 is theta
    (angular mode n).  The grid starts at -pi, hence the (-1)^(n+k) factor.
    """
    N = g.N
    limit = N // 2 - 1
    Nmax = limit if Nmax is None else Nmax
    Kmax = limit if Kmax is None else Kmax
    if Nmax > limit or Kmax > limit:
        raise ValueError(f"truncation ({Nmax}, {Kmax}) exceeds Nyquist limit {limit}")
    F = np.fft.fft2(g.values) / N**2
    n = np.arange(-Nmax, Nmax + 1)
    k = np.arange(-Kmax, Kmax + 1)
    coeffs = F[np.mod(k, N)[None, :], np.mod(n, N)[:, None]]
    coeffs = coeffs * ((-1.0) ** np.add.outer(n, k))
    lat = TorusLattice(g.m, Nmax, Kmax, coeffs)
    if Nmax < limit or Kmax < limit:
        total = float(np.mean(g.values**2))
        kept = float(np.sum(np.abs(coeffs) ** 2))
        if total > 0 and kept < total * (1 - 1e-12):
            lat.flags.append(f"truncation: band keeps {kept / total:.12f} of the energy")
    return lat


def synthesize_many(l: TorusLattice, beta, theta) -> np.ndarray:
    """Vectorised :func:`synthesize` over broadcastable angles."""
    beta, theta = np.broadcast_arrays(np.asarray(beta, float), np.asarray(theta, float))
    par = surviving_parity(l.m)
    ks = l.k_values
    eb = np.exp(1j * np.multiply.outer(beta, ks))
    total = np.zeros(beta.shape, dtype=complex)
    for n in l.n_values:
        if n > -1 or n % 2 != par:
            continue
        row = l.row(n)
        if not np.any(row):
            continue
        total += np.exp(1j * n * theta) * (eb @ row)
    out = 2.0 * total.real
    if par == 0 and 0 in l.n_values:
        out = out + (eb @ l.row(0)).real
    return out


def synthesize(l: TorusLattice, beta: float, theta: float) -> float:
    """2 Re sum over surviving-parity n <= -1 of g_{n,k} e^{i n theta} e^{i k beta}.

    For odd tensor order the real n = 0 row is added once.
    """
    return float(synthesize_many(l, beta, theta))


def synthesize_grid(l: TorusLattice, N: int) -> TorusFunction:
    ang = angle_grid(N)
    vals = synthesize_many(l, ang[:, None], ang[None, :])
    return TorusFunction(l.m, vals, angularly_odd=(l.m % 2 == 0))


def conjugacy_complete(l: TorusLattice, atol: float = 1e-10) -> TorusLattice:
    """Fill g_{-n,-k} = conj(g_{n,k}) wherever one of the pair is known."""
    out = l.copy()
    c, kn = out.coeffs, out.known
    flipped_c = np.conj(c[::-1, ::-1])
    flipped_k = kn[::-1, ::-1]
    both = kn & flipped_k
    if np.any(both):
        gap = np.max(np.abs(c[both] - flipped_c[both]))
        if gap > atol * max(1.0, out.scale()):
            raise ValueError(f"conjugate halves disagree by {gap:.3e}")
    fill = flipped_k & ~kn
    c[fill] = flipped_c[fill]
    kn |= flipped_k
    return out


def region_of(n: int, k: int, m: int) -> frozenset:
    """Labels of the lattice regions containing (n, k), per the printed inequalities.

    Returns a set because the sets overlap: on k = 0 the "+" and "-" halves
    of W (and of R) share points, and for odd m the line n + 2k = 0 lies in
    both G_L and R+.  Points outside the surviving-parity half-lattice get
    ``{OTHER}``.
    """
    labels = set()
    if m % 2 == 0:
        if n <= -1 and n % 2 != 0:
            if n <= -m - 1 and k >= 0 and 2 * k <= -(n + m + 1):
                labels.add(W_PLUS)
            if n <= -m - 1 and k <= 0:
                labels.add(W_MINUS)
            if k >= 0 and -n + 1 <= 2 * k and k <= -n:
                labels.add(G_LEFT)
            if k >= 0 and k > -n:
                labels.add(G_RIGHT)
            if m >= 2 and k >= 0 and -(n + m - 1) <= 2 * k and 2 * k <= -(n + 1):
                labels.add(R_PLUS)
            if m >= 2 and -m + 1 <= n <= -1 and k <= 0:
                labels.add(R_MINUS)
    else:
        if n <= 0 and n % 2 == 0:
            if n <= -m - 3 and k >= 0 and 2 * k <= -(n + m + 3):
                labels.add(W_PLUS)
            if n <= -m - 3 and k <= 0:
                labels.add(W_MINUS)
            if n <= -2 and k >= 0 and -n <= 2 * k and k <= -n:
                labels.add(G_LEFT)
            if k >= 0 and k > -n:
                labels.add(G_RIGHT)
            if n <= -2 and k >= 0 and -(n + m + 1) <= 2 * k and 2 * k <= -n:
                labels.add(R_PLUS)
            if -m - 1 <= n <= 0 and k <= 0:
                labels.add(R_MINUS)
    return frozenset(labels) if labels else frozenset({OTHER})


def families(labels) -> set:
    return {FAMILY[x] for x in labels if x in FAMILY}


def region_masks(l: TorusLattice) -> dict[str, np.ndarray]:
    """Boolean masks over the band for every region label."""
    masks = {lab: np.zeros(l.coeffs.shape, bool) for lab in FAMILY}
    for a, n in enumerate(l.n_values):
        for b, k in enumerate(l.k_values):
            for lab in region_of(int(n), int(k), l.m):
                if lab in masks:
                    masks[lab][a, b] = True
    return masks


def bracket(x):
    """<x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.asarray(x, float) ** 2)


def decay_norms(l: TorusLattice, mu: float = 0.6) -> tuple[float, float]:
    """Weighted sums sum_n <n>^2 sum_k |g| and sum_k <k>^(1+mu) sum_n |g|.

    Taken over the surviving-parity rows n <= -1.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    par = surviving_parity(l.m)
    rows = [(a, n) for a, n in enumerate(l.n_values) if n <= -1 and n % 2 == par]
    if not rows:
        return 0.0, 0.0
    idx = [a for a, _ in rows]
    mag = np.abs(np.where(l.known, l.coeffs, 0.0))[idx]
    ns = np.array([n for _, n in rows])
    s1 = float(np.sum(bracket(ns) ** 2 * mag.sum(axis=1)))
    s2 = float(np.sum(bracket(l.k_values) ** (1.0 + mu) * mag.sum(axis=0)))
    return s1, s2


def zeroth_row_from_symmetry(l: TorusLattice) -> np.ndarray:
    """Odd order: g_{0,k} = -(-1)^k conj(g_{-2k,k}) for k >= 1, conjugates for k <= -1, g_{0,0} = 0."""
    row = np.zeros(2 * l.Kmax + 1, dtype=complex)
    for k in range(1, l.Kmax + 1):
        if l.is_known(-2 * k, k):
            v = -((-1) ** k) * np.conj(l[-2 * k, k])
            row[l.Kmax + k] = v
            row[l.Kmax - k] = np.conj(v)
    return row


def boundary_rows(l: TorusLattice, start: int, stop: int | None = None) -> tuple[list[int], np.ndarray]:
    """Rows g_{-start}, g_{-start-2}, ... down to the band edge (or ``-stop``)."""
    stop = l.Nmax if stop is None else min(stop, l.Nmax)
    ns = list(range(-start, -stop - 1, -2))
    if not ns:
        return [], np.zeros((0, 2 * l.Kmax + 1), complex)
    rows = []
    for n in ns:
        if n == 0 and l.m % 2 == 1 and not np.any(l.known[l.Nmax]):
            rows.append(zeroth_row_from_symmetry(l))
        else:
            if not np.any(l.known[n + l.Nmax]):
                raise ValueError(f"lattice row n={n} is missing")
            rows.append(l.row(n))
    return ns, np.array(rows)


def boundary_modes(l: TorusLattice, m: int | None = None, q: int | None = None):
    """Split the lattice into the Cauchy sequence and the gauge rows.

    Even m = 2q: sequence <g_{-(2q+1)}, g_{-(2q+3)}, ...>, gauge rows
    g_{-1}, ..., g_{-(2q-1)}.  Odd m = 2q+1: sequence <g_{-2q}, g_{-(2q+2)}, ...>,
    gauge rows g_0, g_{-2}, ..., g_{-2q}.  For odd m a missing n = 0 row is
    rebuilt from the symmetry and conjugacy relations.

    Returns ``(sequence, gauge)`` where ``gauge`` maps n to its coefficient row.
    """
    from .analytic import BoundarySequence

    m = l.m if m is None else m
    q = m // 2 if q is None else q
    if m % 2 == 0:
        start = 2 * q + 1
        gauge_ns = [-(2 * j - 1) for j in range(1, q + 1)]
    else:
        start = 2 * q
        gauge_ns = [-2 * j for j in range(0, q + 1)]
    ns, rows = boundary_rows(l, start)
    if rows.shape[0] == 0:
        raise ValueError("band too narrow for the requested sequence")
    seq = BoundarySequence(s0=start, coeffs=rows)
    gauge = {}
    for n in gauge_ns:
        _, r = boundary_rows(l, -n, -n)
        gauge[n] = r[0]
    return seq, gauge


def warn_flags(l: TorusLattice):
    for f in l.flags:
        warnings.warn(f, TruncationWarning, stacklevel=2)
