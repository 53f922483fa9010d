"""
File formats for masks, fields and reports

    PBM  (P4)   binary masks, 1 bit per pixel, rows padded to whole bytes
    PGM  (P5)   16-bit big-endian images; a '# scale <min> <max>' comment
                records the physical values of levels 0 and 65535
    raw field   16-byte header (8-byte magic, nx, ny as little-endian
                uint32) followed by row-major little-endian float64
                (real, imag) pairs; dx, dy and wavelength live in a JSON
                sidecar next to the file
    JSON        sorted keys, no timestamps

All readers fail with FormatError and never return partial data.
"""

import json
import logging
import re
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from wavefield.grid import Field, GridSpec

logger = logging.getLogger(__name__)


class FormatError(Exception):
    """Custom exception for unreadable or malformed files"""
    pass


PBM_MAGIC = b'P4'
PGM_MAGIC = b'P5'
RAW_MAGIC = b'UVFIELD1'
RAW_HEADER_BYTES = 16
PGM_MAX_LEVEL = 65535

# Netpbm header: magic, then whitespace-separated tokens with '#' comments
_TOKEN = re.compile(rb'\s*(#[^\n]*\n\s*)*(\S+)')
_SCALE = re.compile(rb'#\s*scale\s+(\S+)\s+(\S+)')


class ReportEncoder(DjangoJSONEncoder):
    """JSON encoder that also understands numpy scalars and arrays."""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read {path}: {e}")


def _write_bytes(path, payload: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as e:
        raise FormatError(f"Cannot write {path}: {e}")
    return path


def sniff_format(path) -> str:
    """
    Identify a file by its leading bytes.

    Returns:
        str: 'pbm', 'pgm' or 'raw'

    Raises:
        FormatError: If the magic bytes match none of the supported formats
    """
    head = _read_bytes(path)[:len(RAW_MAGIC)]
    if head.startswith(RAW_MAGIC):
        return 'raw'
    if head.startswith(PBM_MAGIC):
        return 'pbm'
    if head.startswith(PGM_MAGIC):
        return 'pgm'
    raise FormatError(
        f"{path}: unrecognized format (leading bytes {head[:8]!r}); expected "
        f"{PBM_MAGIC!r} (PBM), {PGM_MAGIC!r} (16-bit PGM) or {RAW_MAGIC!r} (raw field)"
    )


def _parse_header(data: bytes, magic: bytes, count: int, path) -> Tuple[list, int]:
    """Read `count` integer tokens after the magic; returns (tokens, payload offset)."""
    if not data.startswith(magic):
        raise FormatError(f"{path}: missing {magic!r} magic")
    offset = len(magic)
    tokens = []
    for _ in range(count):
        match = _TOKEN.match(data, offset)
        if match is None:
            raise FormatError(f"{path}: truncated header")
        try:
            tokens.append(int(match.group(2)))
        except ValueError:
            raise FormatError(f"{path}: bad header token {match.group(2)!r}")
        offset = match.end()
    # exactly one whitespace byte separates the header from the payload
    if offset >= len(data) or data[offset:offset + 1] not in (b' ', b'\n', b'\r', b'\t'):
        raise FormatError(f"{path}: truncated header")
    return tokens, offset + 1


# ---------------------------------------------------------------------------
# PBM
# ---------------------------------------------------------------------------

def write_pbm(path, mask: np.ndarray) -> Path:
    mask = np.asarray(mask)
    if mask.ndim != 2 or not np.all((mask == 0) | (mask == 1)):
        raise FormatError("PBM export needs a 2-D mask of 0/1 values")
    ny, nx = mask.shape
    payload = np.packbits(mask.astype(np.uint8), axis=1).tobytes()
    return _write_bytes(path, b'P4\n%d %d\n' % (nx, ny) + payload)


def read_pbm(path) -> np.ndarray:
    data = _read_bytes(path)
    (nx, ny), offset = _parse_header(data, PBM_MAGIC, 2, path)
    row_bytes = (nx + 7) // 8
    expected = row_bytes * ny
    payload = data[offset:]
    if len(payload) < expected:
        raise FormatError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")
    packed = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(ny, row_bytes)
    return np.unpackbits(packed, axis=1)[:, :nx]


# ---------------------------------------------------------------------------
# 16-bit PGM
# ---------------------------------------------------------------------------

def quantize(values: np.ndarray, vmin: Optional[float] = None, vmax: Optional[float] = None):
    """Map values linearly onto 0..65535; returns (levels, vmin, vmax)."""
    values = np.asarray(values, dtype=np.float64)
    vmin = float(values.min()) if vmin is None else float(vmin)
    vmax = float(values.max()) if vmax is None else float(vmax)
    if vmax > vmin:
        scaled = (np.clip(values, vmin, vmax) - vmin) / (vmax - vmin)
        levels = np.rint(scaled * PGM_MAX_LEVEL).astype(np.uint16)
    else:
        levels = np.zeros(values.shape, dtype=np.uint16)
    return levels, vmin, vmax


def dequantize(levels: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    return vmin + levels.astype(np.float64) / PGM_MAX_LEVEL * (vmax - vmin)


def write_pgm16(path, values: np.ndarray, vmin: Optional[float] = None, vmax: Optional[float] = None) -> Path:
    """
    Write a 16-bit PGM with the physical scale in a header comment.

    Args:
        path: Output file
        values: 2-D real array in SI units
        vmin, vmax: Values mapped to levels 0 and 65535, default the array range
    """
    values = np.asarray(values)
    if values.ndim != 2:
        raise FormatError("PGM export needs a 2-D array")
    levels, vmin, vmax = quantize(values, vmin, vmax)
    ny, nx = levels.shape
    header = f"P5\n# scale {vmin!r} {vmax!r}\n{nx} {ny}\n{PGM_MAX_LEVEL}\n".encode('ascii')
    return _write_bytes(path, header + levels.astype('>u2').tobytes())


def read_pgm16(path) -> Tuple[np.ndarray, float, float]:
    """
    Returns:
        tuple: (uint16 levels, vmin, vmax); without a scale comment vmin=0, vmax=65535
    """
    data = _read_bytes(path)
    (nx, ny, maxval), offset = _parse_header(data, PGM_MAGIC, 3, path)
    if maxval != PGM_MAX_LEVEL:
        raise FormatError(f"{path}: expected a 16-bit PGM (maxval {PGM_MAX_LEVEL}, got {maxval})")
    expected = 2 * nx * ny
    payload = data[offset:]
    if len(payload) < expected:
        raise FormatError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")

    vmin, vmax = 0.0, float(PGM_MAX_LEVEL)
    scale = _SCALE.search(data[:offset])
    if scale:
        try:
            vmin, vmax = float(scale.group(1)), float(scale.group(2))
        except ValueError:
            raise FormatError(f"{path}: bad scale comment {scale.group(0)!r}")
    levels = np.frombuffer(payload[:expected], dtype='>u2').reshape(ny, nx).astype(np.uint16)
    return levels, vmin, vmax


# ---------------------------------------------------------------------------
# Raw complex fields
# ---------------------------------------------------------------------------

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + '.json')


def write_raw_field(path, amplitude: np.ndarray, grid: Optional[GridSpec] = None) -> Path:
    """
    Write a complex array bit-exactly; with a grid, also write the JSON sidecar.
    """
    amplitude = np.asarray(amplitude, dtype=np.complex128)
    if amplitude.ndim != 2:
        raise FormatError("Raw field export needs a 2-D array")
    ny, nx = amplitude.shape
    header = RAW_MAGIC + np.array([nx, ny], dtype='<u4').tobytes()
    path = _write_bytes(path, header + amplitude.astype('<c16').tobytes())
    if grid is not None:
        write_json(sidecar_path(path), grid.to_dict())
    return path


def read_raw_field(path) -> np.ndarray:
    data = _read_bytes(path)
    if len(data) < RAW_HEADER_BYTES or not data.startswith(RAW_MAGIC):
        raise FormatError(f"{path}: missing {RAW_MAGIC!r} magic or truncated header")
    nx, ny = (int(n) for n in np.frombuffer(data[len(RAW_MAGIC):RAW_HEADER_BYTES], dtype='<u4'))
    expected = 16 * nx * ny
    payload = data[RAW_HEADER_BYTES:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected} for {nx}x{ny}"
        )
    return np.frombuffer(payload, dtype='<c16').reshape(ny, nx).astype(np.complex128)


def read_sidecar(path) -> Optional[dict]:
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        return None
    try:
        return json.loads(sidecar.read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise FormatError(f"Cannot read sidecar {sidecar}: {e}")


def load_field(path, dx: Optional[float] = None, dy: Optional[float] = None,
               wavelength: Optional[float] = None) -> Field:
    """
    Read a raw field and attach its grid from the sidecar, or from the given values.

    Explicit dx/dy/wavelength override the sidecar.
    """
    amplitude = read_raw_field(path)
    meta = read_sidecar(path) or {}
    dx = dx if dx is not None else meta.get('dx')
    dy = dy if dy is not None else meta.get('dy', dx)
    wavelength = wavelength if wavelength is not None else meta.get('wavelength')
    if dx is None or wavelength is None:
        raise FormatError(f"{path}: no sidecar; pass the pixel pitch and wavelength explicitly")
    ny, nx = amplitude.shape
    grid = GridSpec(nx=nx, ny=ny, dx=float(dx), dy=float(dy), wavelength=float(wavelength))
    logger.info(f"Loaded {nx}x{ny} field from {path}")
    return Field(grid, amplitude)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def dumps(payload) -> str:
    return json.dumps(payload, cls=ReportEncoder, sort_keys=True, indent=2) + '\n'


def write_json(path, payload) -> Path:
    return _write_bytes(path, dumps(payload).encode('utf-8'))
