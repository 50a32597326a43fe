"""Range conditions on the Fourier lattice and completion from generators.

All residuals are normalised by max |g| over the known entries unless
``absolute=True``.  Relations whose partner entry falls outside the band
(or is unknown) are skipped and counted, never read as zero.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import (
    G_LEFT,
    G_RIGHT,
    R_MINUS,
    R_PLUS,
    W_MINUS,
    W_PLUS,
    TorusLattice,
    region_of,
    surviving_parity,
)


@dataclass
class Residual:
    value: float = 0.0
    checked: int = 0
    skipped: int = 0

    def add(self, r: float):
        self.value = max(self.value, float(r))
        self.checked += 1


def _normalise(res: Residual, l: TorusLattice, absolute: bool) -> Residual:
    if not absolute:
        s = l.scale()
        res.value = res.value / s if s > 0 else 0.0
    return res


def _relation(l: TorusLattice, select, partner, rule) -> Residual:
    """max |g_{n,k} - rule(g_partner, n, k)| over known (n, k) chosen by ``select``."""
    res = Residual()
    for n, k, v in l.entries():
        if not select(n, k):
            continue
        pn, pk = partner(n, k)
        if not l.is_known(pn, pk):
            res.skipped += 1
            continue
        res.add(abs(v - rule(l[pn, pk], n, k)))
    return res


def parity_residual(l: TorusLattice, m: int, absolute: bool = False) -> Residual:
    par = surviving_parity(m)
    res = Residual()
    for n, k, v in l.entries():
        if n % 2 != par:
            res.add(abs(v))
    return _normalise(res, l, absolute)


def check_parity(l: TorusLattice, m: int, absolute: bool = False) -> float:
    """Largest coefficient on forbidden-parity angular modes."""
    return parity_residual(l, m, absolute).value


def conjugacy_residual(l: TorusLattice, absolute: bool = False) -> Residual:
    res = _relation(l, lambda n, k: True, lambda n, k: (-n, -k),
                    lambda p, n, k: np.conj(p))
    return _normalise(res, l, absolute)


def check_conjugacy(l: TorusLattice, absolute: bool = False) -> float:
    """max |g_{-n,-k} - conj(g_{n,k})|."""
    return conjugacy_residual(l, absolute).value


def symmetry_residual(l: TorusLattice, m: int, absolute: bool = False) -> Residual:
    res = _relation(l, lambda n, k: True, lambda n, k: (n + 2 * k, -k),
                    lambda p, n, k: (-1) ** (m + n + k) * p)
    return _normalise(res, l, absolute)


def check_symmetry(l: TorusLattice, m: int, absolute: bool = False) -> float:
    """max |g_{n,k} - (-1)^(m+n+k) g_{n+2k,-k}| over in-band pairs."""
    return symmetry_residual(l, m, absolute).value


def moments_residual(l: TorusLattice, m: int, absolute: bool = False) -> Residual:
    par = surviving_parity(m)
    res = _relation(l, lambda n, k: n % 2 == par and n <= -(m + 1) and k <= 0,
                    lambda n, k: (n + 2 * k, -k),
                    lambda p, n, k: (-1) ** k * p)
    return _normalise(res, l, absolute)


def check_moments(l: TorusLattice, m: int, absolute: bool = False) -> float:
    """max |g_{n,k} - (-1)^k g_{n+2k,-k}| over deep modes n <= -(m+1), k <= 0."""
    return moments_residual(l, m, absolute).value


def _g_rule(p, n, k):
    return (-1) ** (1 + k) * np.conj(p)


def _r_rule(p, n, k):
    return (-1) ** (1 + k) * p


def _in(labels, *names):
    return any(x in labels for x in names)


def region_residuals(l: TorusLattice, m: int, absolute: bool = False) -> dict[str, Residual]:
    """Residuals of the W, G and R consequence relations and of diagonal reality.

    W: g = 0.  G: g_{n,k} = (-1)^(1+k) conj(g_{-n-2k,k}).
    R: g_{n,k} = (-1)^(1+k) g_{n+2k,-k}.  Diagonal: the G relation at
    k = -n reads g = (-1)^(1-n) conj(g), so g_{n,-n} is real for odd n
    (even order) and purely imaginary for even n (odd order).
    """
    w = Residual()
    for n, k, v in l.entries():
        if _in(region_of(n, k, m), W_PLUS, W_MINUS):
            w.add(abs(v))
    g = _relation(l, lambda n, k: _in(region_of(n, k, m), G_LEFT, G_RIGHT),
                  lambda n, k: (-n - 2 * k, k), _g_rule)
    r = _relation(l, lambda n, k: _in(region_of(n, k, m), R_PLUS, R_MINUS),
                  lambda n, k: (n + 2 * k, -k), _r_rule)
    diag = Residual()
    par = surviving_parity(m)
    for n in range(-1, -l.Nmax - 1, -1):
        if n % 2 == par and l.is_known(n, -n):
            v = l[n, -n]
            diag.add(abs(v.imag) if par == 1 else abs(v.real))
    return {name: _normalise(x, l, absolute)
            for name, x in (("W", w), ("G", g), ("R", r), ("diagonal", diag))}


def check_region_consequences(l: TorusLattice, m: int, absolute: bool = False) -> dict[str, float]:
    return {k: v.value for k, v in region_residuals(l, m, absolute).items()}


def is_generator(n: int, k: int, m: int) -> bool:
    return _in(region_of(n, k, m), R_PLUS, G_LEFT)


def complete_from_generators(partial: TorusLattice, m: int | None = None) -> TorusLattice:
    """Fill a lattice from its values on the generator set R+ u G_L.

    G_R and R- follow from the G and R relations, W is zero, the
    forbidden-parity rows are zero and the positive-n half comes from
    conjugacy.  Entries whose partner lies outside the band stay unknown
    and are listed in ``flags``.
    """
    m = partial.m if m is None else m
    par = surviving_parity(m)
    top = 0 if par == 0 else -1
    for n, k, v in partial.entries():
        if not (n <= top and n % 2 == par and is_generator(n, k, m)):
            raise ValueError(f"entry ({n}, {k}) is not in the generator set R+ u G_L")
    out = TorusLattice(m, partial.Nmax, partial.Kmax)
    out.known[:] = True
    out.flags = list(partial.flags)
    gaps = []
    for n in range(top, -partial.Nmax - 1, -1):
        if n % 2 != par:
            continue
        for k in range(-partial.Kmax, partial.Kmax + 1):
            labels = region_of(n, k, m)
            if _in(labels, R_PLUS, G_LEFT):
                out[n, k] = partial[n, k] if partial.is_known(n, k) else 0.0
                continue
            if _in(labels, W_PLUS, W_MINUS):
                src = None
            elif G_RIGHT in labels:
                src = ((-n - 2 * k, k), _g_rule)
            elif R_MINUS in labels:
                src = ((n + 2 * k, -k), _r_rule) if k != 0 else None
            else:
                raise AssertionError(f"({n}, {k}) is not covered by the partition")
            if src is None:
                out[n, k] = 0.0
                continue
            (pn, pk), rule = src
            if partial.in_band(pn, pk):
                p = partial[pn, pk] if partial.is_known(pn, pk) else 0.0
                out[n, k] = rule(p, n, k)
            else:
                out.known[n + out.Nmax, k + out.Kmax] = False
                gaps.append((n, k))
    # positive-n half (and for odd order the n = 0 row is already self-consistent)
    for n in range(1, out.Nmax + 1):
        for k in range(-out.Kmax, out.Kmax + 1):
            if n % 2 != par:
                continue
            a, b = -n + out.Nmax, -k + out.Kmax
            if out.known[a, b]:
                out[n, k] = np.conj(out.coeffs[a, b])
            else:
                out.known[n + out.Nmax, k + out.Kmax] = False
    if gaps:
        out.flags.append(f"completion: {len(gaps)} entries have partners outside the band")
    return out


def restrict_to_generators(l: TorusLattice, m: int | None = None) -> TorusLattice:
    m = l.m if m is None else m
    par = surviving_parity(m)
    top = 0 if par == 0 else -1
    out = TorusLattice.empty(m, l.Nmax, l.Kmax)
    for n, k, v in l.entries():
        if n <= top and n % 2 == par and is_generator(n, k, m):
            out[n, k] = v
    return out


@dataclass
class FamilyResult:
    residual: float
    tolerance: float
    passed: bool
    entries_checked: int
    entries_skipped: int


@dataclass
class ConditionReport:
    m: int
    families: dict[str, FamilyResult]
    flags: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families.values())

    @property
    def failing(self) -> list[str]:
        return [name for name, f in self.families.items() if not f.passed]

    def to_dict(self) -> dict:
        fam = {}
        for name, f in self.families.items():
            d = asdict(f)
            d["pass"] = d.pop("passed")
            fam[name] = d
        return {"m": self.m, "pass": self.passed, "families": fam, "flags": list(self.flags)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def report(l: TorusLattice, m: int | None = None, tol: float = 1e-3) -> ConditionReport:
    """Run every check and mark each family pass/fail at ``tol``."""
    m = l.m if m is None else m
    parts = {
        "parity": parity_residual(l, m),
        "conjugacy": conjugacy_residual(l),
        "symmetry": symmetry_residual(l, m),
        "moments": moments_residual(l, m),
    }
    parts.update(region_residuals(l, m))
    fam = {name: FamilyResult(r.value, tol, bool(r.value <= tol), r.checked, r.skipped)
           for name, r in parts.items()}
    return ConditionReport(m, fam, list(l.flags))
