"""
Correction output files.

Text: one "t x y class" line per corrected qubit in doubled coordinates, sorted by
(t, class, y, x), primal before dual.

Binary (TQCC): the TQCS header with magic "TQCC", whose count field holds the number of
records, followed by one little-endian record per qubit: i32 t, i32 x, i32 y, u8 class
(0 primal, 1 dual), in text order.
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Iterable
from pathlib import Path

from exceptions.exceptions import StreamFormatError
from libs.corrections import CorrectionSet
from libs.lattice import CellClass, QubitCoord
from libs.syndrome import DetectorLayout
from utilities.stream_format import HEADER, StreamHeader

CORRECTIONS_MAGIC: bytes = b"TQCC"
RECORD = struct.Struct("<iiiB")
CLASS_CODES: dict[CellClass, int] = {CellClass.PRIMAL: 0, CellClass.DUAL: 1}

CorrectionRecord = tuple[int, int, int, CellClass]


def correction_records(corrections: Iterable[CorrectionSet]) -> list[CorrectionRecord]:
    """
    Flatten correction sets, streamed or batch, into sorted (t, x, y, class) records.
    """
    _records = [(q.t, q.x, q.y, _set.cell_class) for _set in corrections for q in _set.qubits]
    return sorted(_records, key=lambda r: (r[0], CLASS_CODES[r[3]], r[2], r[1]))


def format_corrections_text(corrections: Iterable[CorrectionSet]) -> str:
    return "".join(f"{t} {x} {y} {_class}\n" for t, x, y, _class in correction_records(corrections=corrections))


def parse_corrections_text(text: str) -> tuple[CorrectionSet, CorrectionSet]:
    qubits: dict[CellClass, set[QubitCoord]] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}
    offset = 0
    for _line in text.splitlines(keepends=True):
        fields = _line.split()
        if fields:
            try:
                t, x, y = (int(v) for v in fields[:3])
                _class = CellClass(fields[3])
            except (ValueError, IndexError) as exp:
                raise StreamFormatError(reason=f"bad correction line {_line.strip()!r}", offset=offset) from exp
            qubits[_class].add(QubitCoord(x=x, y=y, t=t))
        offset += len(_line.encode())

    return (
        CorrectionSet(cell_class=CellClass.PRIMAL, qubits=frozenset(qubits[CellClass.PRIMAL])),
        CorrectionSet(cell_class=CellClass.DUAL, qubits=frozenset(qubits[CellClass.DUAL])),
    )


def encode_corrections_binary(corrections: Iterable[CorrectionSet], layout: DetectorLayout) -> bytes:
    records = correction_records(corrections=corrections)
    header = StreamHeader(width=layout.width, height=layout.height, sheet_count=len(records), magic=CORRECTIONS_MAGIC)
    return header.pack() + b"".join(RECORD.pack(t, x, y, CLASS_CODES[c]) for t, x, y, c in records)


def decode_corrections_binary(data: bytes) -> tuple[StreamHeader, tuple[CorrectionSet, CorrectionSet]]:
    """
    Raises:
        StreamFormatError: bad header, truncated record, unknown class code or trailing bytes
    """
    _header = StreamHeader.unpack(data=data, magic=CORRECTIONS_MAGIC)
    classes = {_code: _class for _class, _code in CLASS_CODES.items()}
    qubits: dict[CellClass, set[QubitCoord]] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}

    expected = HEADER.size + _header.sheet_count * RECORD.size
    if len(data) < expected:
        index = (len(data) - HEADER.size) // RECORD.size
        raise StreamFormatError(reason=f"truncated: missing record {index}", offset=len(data), sheet_index=index)
    if len(data) > expected:
        raise StreamFormatError(reason=f"trailing data after {_header.sheet_count} records", offset=expected)

    for index in range(_header.sheet_count):
        offset = HEADER.size + index * RECORD.size
        t, x, y, _code = RECORD.unpack_from(data, offset)
        if _code not in classes:
            raise StreamFormatError(reason=f"unknown class code {_code}", offset=offset + 12, sheet_index=index)
        qubits[classes[_code]].add(QubitCoord(x=x, y=y, t=t))

    return _header, (
        CorrectionSet(cell_class=CellClass.PRIMAL, qubits=frozenset(qubits[CellClass.PRIMAL])),
        CorrectionSet(cell_class=CellClass.DUAL, qubits=frozenset(qubits[CellClass.DUAL])),
    )


def write_corrections(
    path: Path | str, corrections: Iterable[CorrectionSet], layout: DetectorLayout, binary: bool = False
) -> None:
    _corrections = list(corrections)
    if binary:
        Path(path).write_bytes(encode_corrections_binary(corrections=_corrections, layout=layout))
    else:
        Path(path).write_text(format_corrections_text(corrections=_corrections))


def corrections_digest(corrections: Iterable[CorrectionSet]) -> str:
    """
    SHA-256 of the text form; equal digests mean byte-identical correction output.
    """
    return hashlib.sha256(format_corrections_text(corrections=corrections).encode()).hexdigest()
