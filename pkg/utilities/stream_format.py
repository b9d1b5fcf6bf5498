"""
TQCS detector stream files.

Layout, all little-endian:

    header   magic "TQCS" | version u16 | width u32 | height u32 | sheet_count u64 (0 = unbounded)
    sheets   height rows of width bits each, bit i of a row in bit (i % 8) of byte i // 8,
             every row padded to a whole byte

The first sheet is t = -1 and sheets follow without gaps.
"""

from __future__ import annotations

import struct
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np
from simple_logger.logger import get_logger

from exceptions.exceptions import InvalidLatticeDimsError, StreamFormatError
from libs.lattice import BoundaryMode, LatticeDims
from libs.syndrome import FIRST_SHEET, DetectorLayout, DetectorSheet

LOGGER = get_logger(__name__)

STREAM_MAGIC: bytes = b"TQCS"
FORMAT_VERSION: int = 1
HEADER = struct.Struct("<4sHIIQ")
UNBOUNDED: int = 0


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    sheet_count: int = UNBOUNDED
    magic: bytes = STREAM_MAGIC
    version: int = FORMAT_VERSION

    @property
    def row_bytes(self) -> int:
        return (self.width + 7) // 8

    @property
    def sheet_bytes(self) -> int:
        return self.row_bytes * self.height

    def pack(self) -> bytes:
        return HEADER.pack(self.magic, self.version, self.width, self.height, self.sheet_count)

    @classmethod
    def unpack(cls, data: bytes, magic: bytes = STREAM_MAGIC) -> StreamHeader:
        if len(data) < HEADER.size:
            raise StreamFormatError(reason=f"header needs {HEADER.size} bytes, got {len(data)}", offset=len(data))

        _magic, _version, width, height, count = HEADER.unpack(data[: HEADER.size])
        if _magic != magic:
            raise StreamFormatError(reason=f"bad magic {_magic!r}, expected {magic!r}", offset=0)
        if _version != FORMAT_VERSION:
            raise StreamFormatError(reason=f"unsupported version {_version}", offset=4)
        if width < 1 or height < 1:
            raise StreamFormatError(reason=f"empty sheet geometry {width}x{height}", offset=6)

        return cls(width=width, height=height, sheet_count=count, magic=_magic, version=_version)

    @classmethod
    def for_layout(cls, layout: DetectorLayout, sheet_count: int = UNBOUNDED) -> StreamHeader:
        return cls(width=layout.width, height=layout.height, sheet_count=sheet_count)


def pack_sheet(bits: np.ndarray) -> bytes:
    # bits is indexed (i, j); rows run along i at fixed j
    return np.packbits(np.ascontiguousarray(bits.T, dtype=np.uint8), axis=1, bitorder="little").tobytes()


def unpack_sheet(data: bytes, header: StreamHeader, t: int, offset: int, sheet_index: int) -> DetectorSheet:
    rows = np.frombuffer(data, dtype=np.uint8).reshape(header.height, header.row_bytes)
    _bits = np.unpackbits(rows, axis=1, bitorder="little")
    if _bits[:, header.width :].any():
        raise StreamFormatError(reason="non-zero row padding bits", offset=offset, sheet_index=sheet_index)
    return DetectorSheet(t=t, bits=np.ascontiguousarray(_bits[:, : header.width].T))


def write_stream(
    target: Path | str | BinaryIO, sheets: Iterable[DetectorSheet], layout: DetectorLayout, bounded: bool = True
) -> int:
    """
    Write sheets as a TQCS stream.

    Args:
        target (Path | str | BinaryIO): output file or open binary handle
        sheets (Iterable[DetectorSheet]): sheets starting at t = -1
        layout (DetectorLayout): detector grid the sheets belong to
        bounded (bool): record the sheet count in the header; an unbounded stream stores 0

    Returns:
        int: bytes written
    """
    _sheets: Iterable[DetectorSheet] = sheets
    _count = UNBOUNDED
    if bounded:
        _sheets = list(sheets)
        _count = len(_sheets)
    _header = StreamHeader.for_layout(layout=layout, sheet_count=_count)

    if isinstance(target, (str, Path)):
        with open(target, "wb") as fd:
            return _write(fd=fd, header=_header, sheets=_sheets)
    return _write(fd=target, header=_header, sheets=_sheets)


def _write(fd: BinaryIO, header: StreamHeader, sheets: Iterable[DetectorSheet]) -> int:
    _written = fd.write(header.pack())
    expected_t = FIRST_SHEET
    for sheet in sheets:
        if sheet.t != expected_t:
            raise ValueError(f"Sheets must be written in order from t={FIRST_SHEET}, got t={sheet.t}")
        if sheet.bits.shape != (header.width, header.height):
            geometry = f"{header.width}x{header.height}"
            raise ValueError(f"Sheet {sheet.t} has shape {sheet.bits.shape}, header is {geometry}")
        _written += fd.write(pack_sheet(bits=sheet.bits))
        expected_t += 1

    LOGGER.debug(f"Wrote TQCS stream: {expected_t - FIRST_SHEET} sheets of {header.width}x{header.height}")
    return _written


def iter_stream(fd: BinaryIO) -> tuple[StreamHeader, Iterator[DetectorSheet]]:
    """
    Parse a TQCS header and return it with a lazy iterator over the sheets.

    Raises:
        StreamFormatError: malformed header, truncated sheet, missing sheets or trailing bytes;
            sheet errors surface while iterating
    """
    _header = StreamHeader.unpack(data=fd.read(HEADER.size))
    return _header, _iter_sheets(fd=fd, header=_header)


def _iter_sheets(fd: BinaryIO, header: StreamHeader) -> Iterator[DetectorSheet]:
    index = 0
    offset = HEADER.size
    while header.sheet_count == UNBOUNDED or index < header.sheet_count:
        _data = fd.read(header.sheet_bytes)
        if not _data:
            if header.sheet_count == UNBOUNDED:
                return
            raise StreamFormatError(
                reason=f"truncated: missing sheet {index} of {header.sheet_count}", offset=offset, sheet_index=index
            )
        if len(_data) < header.sheet_bytes:
            raise StreamFormatError(
                reason=f"truncated: sheet {index} has {len(_data)} of {header.sheet_bytes} bytes",
                offset=offset + len(_data),
                sheet_index=index,
            )

        yield unpack_sheet(data=_data, header=header, t=FIRST_SHEET + index, offset=offset, sheet_index=index)
        index += 1
        offset += header.sheet_bytes

    if fd.read(1):
        raise StreamFormatError(reason=f"trailing data after {header.sheet_count} sheets", offset=offset)


def read_stream(source: Path | str) -> tuple[StreamHeader, list[DetectorSheet]]:
    with open(source, "rb") as fd:
        header, sheets = iter_stream(fd=fd)
        return header, list(sheets)


def infer_dims(
    header: StreamHeader, boundary_mode: BoundaryMode, time_boundary: BoundaryMode | None = BoundaryMode.OPEN
) -> LatticeDims:
    """
    Lattice dimensions implied by a stream header under a given boundary mode.

    A bounded stream of 2*lt + 2 sheets gives lt; an unbounded one reports lt = 1, which only
    sizes the time axis of verification and never limits decoding.

    Raises:
        StreamFormatError: the header geometry fits no lattice of that boundary mode
    """
    pad = 0 if boundary_mode is BoundaryMode.PERIODIC else 2
    _sizes = []
    for name, extent in (("width", header.width), ("height", header.height)):
        cells = extent - pad
        if cells < 2 or cells % 2:
            raise StreamFormatError(reason=f"{name} {extent} fits no {boundary_mode} lattice", offset=6)
        _sizes.append(cells // 2)

    _lt = 1
    if header.sheet_count != UNBOUNDED:
        if header.sheet_count < 4 or header.sheet_count % 2:
            raise StreamFormatError(reason=f"sheet count {header.sheet_count} is not 2*lt + 2", offset=14)
        _lt = (header.sheet_count - 2) // 2

    try:
        return LatticeDims(
            lx=_sizes[0], ly=_sizes[1], lt=_lt, boundary_mode=boundary_mode, time_boundary=time_boundary
        )
    except InvalidLatticeDimsError as exp:
        raise StreamFormatError(reason=str(exp), offset=6) from exp
