"""
Binary snippet-feature files.

Layout (little-endian)::

    magic     4 bytes   b"NVMF"
    version   uint8     1
    dtype     uint8     1 = float32, 2 = float64
    rank      uint8
    dims      rank x uint32
    data      C-order array bytes
"""

import struct
from pathlib import Path

import numpy as np

from narrated_vmr.exceptions import ValidationError

MAGIC = b"NVMF"
FORMAT_VERSION = 1

DTYPE_CODES = {
    1: np.dtype("<f4"),
    2: np.dtype("<f8"),
}
_CODES_BY_DTYPE = {dtype: code for code, dtype in DTYPE_CODES.items()}


def write_feature_file(path, array) -> None:
    """Write *array* (float32 or float64) to *path* in the feature layout."""
    array = np.asarray(array)
    dtype = array.dtype.newbyteorder("<")
    if dtype not in _CODES_BY_DTYPE:
        raise ValidationError(f"unsupported feature dtype {array.dtype}")
    header = MAGIC + struct.pack("<BBB", FORMAT_VERSION, _CODES_BY_DTYPE[dtype], array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(array, dtype=dtype).tobytes())


def read_feature_file(path) -> np.ndarray:
    """
    Read a feature file written by :func:`write_feature_file`.

    Raises:
        ValidationError: on a bad magic, version, dtype code or truncated payload
    """
    data = Path(path).read_bytes()
    if len(data) < 7 or data[:4] != MAGIC:
        raise ValidationError(f"{path}: not a feature file (bad magic)")
    version, dtype_code, rank = struct.unpack_from("<BBB", data, 4)
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported feature file version {version}")
    if dtype_code not in DTYPE_CODES:
        raise ValidationError(f"{path}: unknown dtype code {dtype_code}")

    offset = 7 + 4 * rank
    if len(data) < offset:
        raise ValidationError(f"{path}: truncated header")
    shape = struct.unpack_from(f"<{rank}I", data, 7)
    dtype = DTYPE_CODES[dtype_code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(data) - offset != expected:
        raise ValidationError(f"{path}: payload has {len(data) - offset} bytes, expected {expected}")
    return np.frombuffer(data, dtype=dtype, offset=offset).reshape(shape).copy()
