"""Dense 3D scalar volumes: thresholding, surface extraction, file I/O.

A volume is a (depth, height, width) scalar field with per-axis voxel
spacing. Two kinds exist: ``probability`` volumes (float32 values in
[0, 1]) and ``binary`` masks (uint8 values in {0, 1}). Volumes are
immutable after construction; every operation returns a new volume.

Distances elsewhere in the package are computed in voxel units by
default; spacing is carried as metadata and only applied where an
operation documents a spacing flag.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import rawjson
from .errors import ParseError, ValidationError

PROBABILITY = "probability"
BINARY = "binary"

_KIND_DTYPE = {PROBABILITY: np.dtype("<f4"), BINARY: np.dtype("u1")}
_KIND_DTYPE_NAME = {PROBABILITY: "f32", BINARY: "u8"}


@dataclass(frozen=True)
class Volume3D:
    """Immutable 3D scalar field with dims (d, h, w) and spacing (sz, sy, sx)."""

    data: np.ndarray
    kind: str
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.kind not in _KIND_DTYPE:
            raise ValidationError(f"kind must be '{PROBABILITY}' or '{BINARY}', got {self.kind!r}")
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValidationError(f"volume data must be 3-dimensional, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValidationError(f"volume dims must be positive, got {arr.shape}")
        sp = tuple(float(s) for s in self.spacing)
        if len(sp) != 3 or any(s <= 0 for s in sp):
            raise ValidationError(f"spacing must be 3 positive reals, got {self.spacing!r}")
        arr = np.asarray(arr, dtype=_KIND_DTYPE[self.kind])
        if self.kind == PROBABILITY:
            if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
                raise ValidationError("probability volume has values outside [0, 1]")
        else:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValidationError("binary volume has values outside {0, 1}")
        arr = np.ascontiguousarray(arr).copy()  # own the buffer before freezing
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", sp)

    @property
    def dims(self):
        return self.data.shape

    def foreground_count(self):
        return int(np.count_nonzero(self.data))

    def as_probability(self):
        """Reinterpret a binary mask as a probability volume (values 0.0/1.0)."""
        if self.kind == PROBABILITY:
            return self
        return Volume3D(self.data.astype("<f4"), PROBABILITY, self.spacing)

    def bool_data(self):
        return self.data.astype(bool)


def threshold(prob: Volume3D, tau: float = 0.5) -> Volume3D:
    """Binarize with a strict cut: foreground wherever value > tau.

    Values exactly equal to tau map to background. tau must lie strictly
    inside (0, 1).
    """
    if not (0.0 < tau < 1.0):
        raise ValidationError(f"tau must lie in the open interval (0, 1), got {tau}")
    mask = (prob.data > tau).astype("u1")
    return Volume3D(mask, BINARY, prob.spacing)


def _require_binary(vol: Volume3D, what: str):
    if vol.kind != BINARY:
        raise ValidationError(f"{what} requires a binary volume, got kind '{vol.kind}'")


def surface_voxel_array(mask: Volume3D) -> np.ndarray:
    """Foreground voxels with at least one 6-neighbor that is background
    or outside the volume, as an (n, 3) int array in (z, y, x) order."""
    _require_binary(mask, "surface extraction")
    m = mask.bool_data()
    padded = np.zeros((m.shape[0] + 2, m.shape[1] + 2, m.shape[2] + 2), dtype=bool)
    padded[1:-1, 1:-1, 1:-1] = m
    interior = np.ones_like(m)
    for axis in range(3):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        interior &= padded[tuple(lo)] & padded[tuple(hi)]
    return np.argwhere(m & ~interior)


def surface_voxels(mask: Volume3D) -> set:
    """Set of (z, y, x) tuples forming the 6-connectivity surface of the mask."""
    return {tuple(int(c) for c in row) for row in surface_voxel_array(mask)}


# ---------------------------------------------------------------------------
# File formats

RAWJSON = "rawjson"
NRRD = "nrrd"

_NRRD_MAGIC = "NRRD0004"
_NRRD_FIELDS = ("type", "dimension", "sizes", "encoding", "endian")


def _infer_format(path: str) -> str:
    if path.endswith(".nrrd"):
        return NRRD
    return RAWJSON


def read_volume(path: str, format: str | None = None) -> Volume3D:
    fmt = format or _infer_format(path)
    if fmt == RAWJSON:
        return _read_rawjson(path)
    if fmt == NRRD:
        return _read_nrrd(path)
    raise ValidationError(f"unknown volume format {fmt!r}")


def write_volume(vol: Volume3D, path: str, format: str | None = None) -> None:
    fmt = format or _infer_format(path)
    if fmt == RAWJSON:
        _write_rawjson(vol, path)
    elif fmt == NRRD:
        _write_nrrd(vol, path)
    else:
        raise ValidationError(f"unknown volume format {fmt!r}")


def _read_rawjson(path):
    header = rawjson.load_header(path)
    for name in ("dims", "spacing", "kind", "dtype", "data_file"):
        rawjson.require_field(header, path, name)
    dims = header["dims"]
    if (not isinstance(dims, list) or len(dims) != 3
            or any(not isinstance(v, int) or v < 1 for v in dims)):
        raise ParseError(f"{path}: field 'dims' must be 3 positive integers, got {dims!r}")
    spacing = header["spacing"]
    if not isinstance(spacing, list) or len(spacing) != 3:
        raise ParseError(f"{path}: field 'spacing' must be 3 reals, got {spacing!r}")
    kind = header["kind"]
    if kind not in _KIND_DTYPE_NAME:
        raise ParseError(f"{path}: field 'kind' must be 'probability' or 'binary', got {kind!r}")
    if header["dtype"] != _KIND_DTYPE_NAME[kind]:
        raise ParseError(
            f"{path}: field 'dtype' is {header['dtype']!r} but kind '{kind}' "
            f"requires '{_KIND_DTYPE_NAME[kind]}'")
    count = dims[0] * dims[1] * dims[2]
    flat = rawjson.read_payload(path, header, count)
    try:
        return Volume3D(flat.reshape(dims), kind, tuple(spacing))
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _write_rawjson(vol, path):
    stem = os.path.basename(path)
    if stem.endswith(".json"):
        stem = stem[:-5]
    header = {
        "dims": [int(d) for d in vol.dims],
        "spacing": [float(s) for s in vol.spacing],
        "kind": vol.kind,
        "dtype": _KIND_DTYPE_NAME[vol.kind],
        "data_file": f"{stem}.bin",
    }
    rawjson.write_payload(path, header, vol.data.ravel(), header["dtype"])


def _read_nrrd(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    nl = blob.find(b"\n")
    if nl < 0 or blob[:nl].strip() != _NRRD_MAGIC.encode():
        raise ParseError(f"{path}: missing {_NRRD_MAGIC} magic line")
    fields = {}
    pos = nl + 1
    while True:
        nl = blob.find(b"\n", pos)
        if nl < 0:
            raise ParseError(f"{path}: header never terminated by a blank line")
        line = blob[pos:nl].decode("ascii", errors="replace").rstrip("\r")
        pos = nl + 1
        if line == "":
            break
        if ":" not in line:
            raise ParseError(f"{path}: malformed header line {line!r}")
        key, value = line.split(":", 1)
        key = key.strip()
        if key not in _NRRD_FIELDS:
            raise ParseError(f"{path}: unsupported field '{key}'")
        fields[key] = value.strip()
    for name in _NRRD_FIELDS:
        if name not in fields:
            raise ParseError(f"{path}: missing required field '{name}'")
    if fields["encoding"] != "raw":
        raise ParseError(f"{path}: unsupported value for field 'encoding': {fields['encoding']!r}")
    if fields["endian"] != "little":
        raise ParseError(f"{path}: unsupported value for field 'endian': {fields['endian']!r}")
    if fields["dimension"] != "3":
        raise ParseError(f"{path}: field 'dimension' must be 3, got {fields['dimension']!r}")
    if fields["type"] == "uint8":
        dtype, kind = np.dtype("u1"), BINARY
    elif fields["type"] == "float":
        dtype, kind = np.dtype("<f4"), PROBABILITY
    else:
        raise ParseError(f"{path}: field 'type' must be 'uint8' or 'float', got {fields['type']!r}")
    try:
        sizes = [int(tok) for tok in fields["sizes"].split()]
    except ValueError:
        raise ParseError(f"{path}: field 'sizes' must be integers, got {fields['sizes']!r}") from None
    if len(sizes) != 3 or any(v < 1 for v in sizes):
        raise ParseError(f"{path}: field 'sizes' must be 3 positive integers, got {fields['sizes']!r}")
    w, h, d = sizes  # fastest axis first; payload is x-fastest (C order in z, y, x)
    payload = blob[pos:]
    expected = d * h * w * dtype.itemsize
    if len(payload) != expected:
        raise ParseError(
            f"{path}: size mismatch: field 'sizes' implies {expected} payload bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype=dtype).reshape(d, h, w)
    try:
        return Volume3D(data, kind)
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _write_nrrd(vol, path):
    d, h, w = vol.dims
    type_name = "uint8" if vol.kind == BINARY else "float"
    header = (
        f"{_NRRD_MAGIC}\n"
        f"type: {type_name}\n"
        f"dimension: 3\n"
        f"sizes: {w} {h} {d}\n"
        f"encoding: raw\n"
        f"endian: little\n"
        f"\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(vol.data).tobytes())
