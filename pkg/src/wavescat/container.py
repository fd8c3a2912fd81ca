"""Binary tensor container used for all on-disk feature tensors.

Layout (normative, little-endian):

    bytes 0..3   magic  b"WSTX"
    bytes 4..5   version, u16 (currently 1)
    byte  6      ndim, u8
    next 4*ndim  dims, u32 each
    rest         row-major (C-order) f32 payload

A sidecar JSON (same path plus ".json") carries the producing config and,
for scattering outputs, the path list.
"""

import json
import struct

import numpy as np

from .errors import DataError

MAGIC = b"WSTX"
VERSION = 1


def write_tensor(path, array, meta=None):
    """Write `array` in the WSTX container; meta goes to the JSON sidecar."""
    array = np.asarray(array)
    header = MAGIC + struct.pack("<HB", VERSION, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    if meta is not None:
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_tensor(path):
    """Read a WSTX container; returns (float32 array, meta dict or None)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise DataError(f"{path}: not a WSTX tensor (bad magic)")
    version, ndim = struct.unpack_from("<HB", blob, 4)
    if version != VERSION:
        raise DataError(f"{path}: unsupported WSTX version {version}")
    dims = struct.unpack_from(f"<{ndim}I", blob, 7)
    offset = 7 + 4 * ndim
    count = int(np.prod(dims)) if ndim else 1
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
    if data.size != count:
        raise DataError(f"{path}: truncated payload")
    meta = None
    try:
        with open(str(path) + ".json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    return data.reshape(dims).astype(np.float32), meta
