"""File formats: XTTF tensor fields, XTSG sinograms and XTLT lattices.

Binary formats are little-endian with a 4-byte magic and a u32 version.
Floats in text formats are written with ``repr`` so that reading back is
bit-exact.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
import struct
from pathlib import Path

import numpy as np

from .fanbeam import FanBeamSinogram, angle_grid
from .lattice import TorusLattice
from .tensor_core import SymmetricTensorField, grid_axis

VERSION = 1


class FormatError(ValueError):
    pass


def _read_header(buf: bytes, magic: bytes, fmt: str):
    size = 4 + struct.calcsize(fmt)
    if len(buf) < size or buf[:4] != magic:
        raise FormatError(f"not a {magic.decode()} file")
    fields = struct.unpack(fmt, buf[4:size])
    if fields[0] != VERSION:
        raise FormatError(f"unsupported {magic.decode()} version {fields[0]}")
    return fields, size


def write_tensor_field(path, f: SymmetricTensorField):
    """XTTF: u32 version, u32 m, u32 G, f64 support radius, then the n >= 0 planes."""
    ns = [n for n in range(f.m, -1, -2)]
    with open(path, "wb") as fh:
        fh.write(b"XTTF")
        fh.write(struct.pack("<IIId", VERSION, f.m, f.G, f.support_radius))
        for n in ns:
            plane = np.ascontiguousarray(f.modes[n], dtype="<c16")
            fh.write(plane.view("<f8").tobytes())


def read_tensor_field(path) -> SymmetricTensorField:
    buf = Path(path).read_bytes()
    (_, m, G, radius), off = _read_header(buf, b"XTTF", "<IIId")
    ns = list(range(m, -1, -2))
    need = off + len(ns) * G * G * 16
    if len(buf) != need:
        raise FormatError(f"XTTF payload has {len(buf)} bytes, expected {need}")
    data = np.frombuffer(buf, dtype="<f8", offset=off).view("<c16").astype(complex)
    modes = {}
    for i, n in enumerate(ns):
        plane = data[i * G * G:(i + 1) * G * G].reshape(G, G).copy()
        modes[n] = plane
        if n:
            modes[-n] = np.conj(plane)
    return SymmetricTensorField(m, modes, radius)


def write_sinogram(path, s: FanBeamSinogram):
    with open(path, "wb") as fh:
        fh.write(b"XTSG")
        fh.write(struct.pack("<IIII", VERSION, s.m, s.N, s.nodes))
        fh.write(np.ascontiguousarray(s.values, dtype="<f8").tobytes())


def read_sinogram(path) -> FanBeamSinogram:
    buf = Path(path).read_bytes()
    (_, m, N, nodes), off = _read_header(buf, b"XTSG", "<IIII")
    if len(buf) != off + N * N * 8:
        raise FormatError("XTSG payload size does not match N")
    values = np.frombuffer(buf, dtype="<f8", offset=off).astype(float).reshape(N, N)
    return FanBeamSinogram(m, values, nodes)


def sinogram_csv(s: FanBeamSinogram) -> str:
    out = _io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["beta", "theta", "value"])
    ang = angle_grid(s.N)
    for i, b in enumerate(ang):
        for j, t in enumerate(ang):
            w.writerow([repr(float(b)), repr(float(t)), repr(float(s.values[i, j]))])
    return out.getvalue()


def tensor_csv(f: SymmetricTensorField) -> str:
    comps = np.real_if_close(f.components())
    out = _io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y"] + [f"ftilde_{k}" for k in range(f.m + 1)])
    x = grid_axis(f.G)
    for iy, yv in enumerate(x):
        for ix, xv in enumerate(x):
            w.writerow([repr(float(xv)), repr(float(yv))]
                       + [repr(float(np.real(comps[k, iy, ix]))) for k in range(f.m + 1)])
    return out.getvalue()


_HEADER = re.compile(r"#\s*XTLT\s+v(\d+)\s+m=(\d+)\s+Nmax=(\d+)\s+Kmax=(\d+)")


def lattice_to_csv(l: TorusLattice) -> str:
    lines = [f"# XTLT v{VERSION} m={l.m} Nmax={l.Nmax} Kmax={l.Kmax}"]
    lines += [f"# flag {f}" for f in l.flags]
    lines += [f"{n},{k},{v.real!r},{v.imag!r}" for n, k, v in l.entries()]
    return "\n".join(lines) + "\n"


def lattice_to_json(l: TorusLattice) -> dict:
    return {
        "format": "XTLT",
        "version": VERSION,
        "m": l.m,
        "Nmax": l.Nmax,
        "Kmax": l.Kmax,
        "flags": list(l.flags),
        "entries": [[n, k, v.real, v.imag] for n, k, v in l.entries()],
    }


def _build_lattice(m, Nmax, Kmax, rows, flags=()) -> TorusLattice:
    l = TorusLattice.empty(m, Nmax, Kmax)
    l.flags = list(flags)
    seen = {}
    for n, k, re_, im in rows:
        n, k = int(n), int(k)
        v = complex(float(re_), float(im))
        if (n, k) in seen and seen[(n, k)] != v:
            raise FormatError(f"conflicting duplicate entries for ({n}, {k})")
        if not l.in_band(n, k):
            raise FormatError(f"entry ({n}, {k}) outside the declared band")
        seen[(n, k)] = v
        l[n, k] = v
    return l


def lattice_from_csv(text: str) -> TorusLattice:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty lattice file")
    head = _HEADER.match(lines[0])
    if not head:
        raise FormatError("missing '# XTLT v1 m=.. Nmax=.. Kmax=..' header")
    version, m, Nmax, Kmax = map(int, head.groups())
    if version != VERSION:
        raise FormatError(f"unsupported XTLT version {version}")
    rows, flags = [], []
    for ln in lines[1:]:
        if ln.lstrip().startswith("#"):
            text = ln.lstrip()[1:].strip()
            if text.startswith("flag "):
                flags.append(text[5:])
            continue
        parts = ln.split(",")
        if len(parts) != 4:
            raise FormatError(f"bad lattice row {ln!r}")
        rows.append(parts)
    return _build_lattice(m, Nmax, Kmax, rows, flags)


def lattice_from_json(obj: dict) -> TorusLattice:
    if obj.get("format", "XTLT") != "XTLT":
        raise FormatError("not an XTLT document")
    return _build_lattice(int(obj["m"]), int(obj["Nmax"]), int(obj["Kmax"]), obj["entries"],
                          obj.get("flags", ()))


def write_lattice(path, l: TorusLattice, fmt: str = "csv"):
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(lattice_to_json(l)))
    else:
        path.write_text(lattice_to_csv(l))


def read_lattice(path) -> TorusLattice:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return lattice_from_json(json.loads(text))
    return lattice_from_csv(text)
