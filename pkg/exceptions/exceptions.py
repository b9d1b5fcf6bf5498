class InvalidLatticeDimsError(Exception):
    pass


class LatticeParityError(Exception):
    def __init__(self, coord: tuple[int, int, int], expected: str) -> None:
        self.coord = coord
        self.expected = expected

    def __str__(self) -> str:
        return f"Coordinate {self.coord} is not a {self.expected} site (doubled-coordinate parity mismatch)"


class CellClassMismatchError(Exception):
    pass


class InvalidNoiseChannelError(Exception):
    pass


class StreamOrderError(Exception):
    def __init__(self, expected_t: int, got_t: int, position: int) -> None:
        self.expected_t = expected_t
        self.got_t = got_t
        self.position = position

    def __str__(self) -> str:
        return (
            f"Sheet stream out of order at position {self.position}: expected t={self.expected_t}, got t={self.got_t}"
        )


class StreamFormatError(Exception):
    def __init__(self, reason: str, offset: int, sheet_index: int | None = None) -> None:
        self.reason = reason
        self.offset = offset
        self.sheet_index = sheet_index

    def __str__(self) -> str:
        _sheet = f", sheet {self.sheet_index}" if self.sheet_index is not None else ""
        return f"Malformed stream at byte offset {self.offset}{_sheet}: {self.reason}"


class OddSyndromeError(Exception):
    pass


class TooManyVerticesError(Exception):
    pass


class WindowOverflowError(Exception):
    def __init__(self, t: int, pending: int) -> None:
        self.t = t
        self.pending = pending

    def __str__(self) -> str:
        return f"Decode window overflow: flip at t={self.t} left the window unmatched ({self.pending} flips pending)"


class ExperimentConfigError(Exception):
    pass


class InvariantViolationError(Exception):
    pass


class NoPerfectMatchingError(InvariantViolationError):
    pass
