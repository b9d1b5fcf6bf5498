from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

import numpy as np
from simple_logger.logger import get_logger

from exceptions.exceptions import InvalidNoiseChannelError
from libs.lattice import CellClass, LatticeDims, QubitCoord, bond_neighbors, face_class_of, qubits_on_sheet, sheet_range

LOGGER = get_logger(__name__)

CHANNEL_TOLERANCE: float = 1e-12
SEED_MASK: int = (1 << 64) - 1

# RNG substreams, one generator per (stream, sheet)
ERROR_STREAM: int = 0
GAUGE_STREAM: int = 1
MEASUREMENT_STREAM: int = 2
TRIAL_STREAM: int = 3
# sheet -1 is the lowest sheet any lattice carries; spawn keys must be non-negative
SHEET_KEY_OFFSET: int = 1


class Pauli(enum.IntFlag):
    X = 1
    Z = 2
    XZ = 3


# searchsorted index -> Pauli, index 0 is the identity
_OUTCOMES: tuple[Pauli | None, ...] = (None, Pauli.X, Pauli.Z, Pauli.XZ)


@dataclass(frozen=True)
class NoiseChannel:
    p_i: float
    p_x: float
    p_z: float
    p_xz: float

    def __post_init__(self) -> None:
        _probabilities = (self.p_i, self.p_x, self.p_z, self.p_xz)
        for name, value in zip(("p_i", "p_x", "p_z", "p_xz"), _probabilities):
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise InvalidNoiseChannelError(f"{name}={value} is not a probability")

        if abs(sum(_probabilities) - 1.0) > CHANNEL_TOLERANCE:
            raise InvalidNoiseChannelError(f"Channel probabilities sum to {sum(_probabilities)!r}, expected 1")

    @classmethod
    def from_p(cls, p: float) -> NoiseChannel:
        """
        Symmetric channel: X and Z each with probability p, both with p**2.
        """
        p_xz = p * p
        return cls(p_i=max(0.0, 1.0 - 2 * p - p_xz), p_x=p, p_z=p, p_xz=p_xz)

    @classmethod
    def from_rates(cls, p_x: float, p_z: float, p_xz: float) -> NoiseChannel:
        p_i = 1.0 - p_x - p_z - p_xz
        if p_i < -CHANNEL_TOLERANCE:
            raise InvalidNoiseChannelError(f"p_x + p_z + p_xz = {p_x + p_z + p_xz!r} exceeds 1")
        return cls(p_i=max(0.0, p_i), p_x=p_x, p_z=p_z, p_xz=p_xz)

    @classmethod
    def z_only(cls, p_z: float) -> NoiseChannel:
        return cls(p_i=1.0 - p_z, p_x=0.0, p_z=p_z, p_xz=0.0)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum([self.p_i, self.p_x, self.p_z])

    @property
    def is_identity(self) -> bool:
        return self.p_i >= 1.0


@dataclass
class ErrorPattern:
    entries: dict[QubitCoord, Pauli] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[QubitCoord, Pauli]]) -> ErrorPattern:
        pattern = cls()
        for q, pauli in entries:
            pattern.add(q=q, pauli=pauli)
        return pattern

    @classmethod
    def z_errors(cls, qubits: Iterable[QubitCoord]) -> ErrorPattern:
        return cls.from_entries((q, Pauli.Z) for q in qubits)

    def add(self, q: QubitCoord, pauli: Pauli) -> None:
        # X*X = Z*Z = I up to phase
        combined = Pauli(self.entries.get(q, 0) ^ pauli)
        if combined:
            self.entries[q] = combined
        else:
            self.entries.pop(q, None)

    def items(self) -> Iterator[tuple[QubitCoord, Pauli]]:
        for q in sorted(self.entries, key=lambda q: (q.t, q.y, q.x)):
            yield q, self.entries[q]

    def count(self, pauli: Pauli) -> int:
        return sum(1 for p in self.entries.values() if p is pauli)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, q: object) -> bool:
        return q in self.entries


def sheet_rng(seed: int, t: int, stream: int = ERROR_STREAM) -> np.random.Generator:
    """
    Independent generator for one sheet of one substream.

    Every sheet owns its own substream so a streamed lattice, generated sheet by
    sheet, draws exactly the numbers a batch lattice draws for the same sheet.
    """
    seq = np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=(stream, t + SHEET_KEY_OFFSET))
    return np.random.Generator(np.random.PCG64(seq))


def sample_sheet_errors(dims: LatticeDims, channel: NoiseChannel, seed: int, t: int) -> list[tuple[QubitCoord, Pauli]]:
    qubits = qubits_on_sheet(dims=dims, t=t)
    if not qubits or channel.is_identity:
        return []

    draws = sheet_rng(seed=seed, t=t, stream=ERROR_STREAM).random(len(qubits))
    outcomes = np.searchsorted(channel.cumulative, draws, side="right")
    return [(qubits[idx], _OUTCOMES[outcomes[idx]]) for idx in np.flatnonzero(outcomes)]  # type: ignore[misc]


def sample_errors(dims: LatticeDims, channel: NoiseChannel, seed: int) -> ErrorPattern:
    """
    Draw an i.i.d. Pauli error for every qubit of the lattice.

    Args:
        dims (LatticeDims): lattice dimensions
        channel (NoiseChannel): single-qubit error probabilities
        seed (int): 64-bit master seed

    Returns:
        ErrorPattern: at most one entry per qubit
    """
    pattern = ErrorPattern()
    for t in sheet_range(dims=dims):
        for q, pauli in sample_sheet_errors(dims=dims, channel=channel, seed=seed, t=t):
            pattern.entries[q] = pauli

    LOGGER.debug(f"Sampled {len(pattern)} errors on {dims} with seed {seed}")
    return pattern


def reduce_to_z(pattern: ErrorPattern, dims: LatticeDims) -> tuple[frozenset[QubitCoord], frozenset[QubitCoord]]:
    """
    Rewrite a Pauli pattern as Z errors only, split by face class.

    An X error is equivalent to Z errors on the four qubits bonded to it, all of
    the opposite class. Contributions accumulate mod 2.

    Returns:
        tuple[frozenset[QubitCoord], frozenset[QubitCoord]]: (primal_z, dual_z)
    """
    z_sets: dict[CellClass, set[QubitCoord]] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}

    for q, pauli in pattern.items():
        if pauli & Pauli.Z:
            z_sets[face_class_of(coord=q)] ^= {q}  # type: ignore[index]

        if pauli & Pauli.X:
            for neighbor in bond_neighbors(q=q, dims=dims):
                z_sets[face_class_of(coord=neighbor)] ^= {neighbor}  # type: ignore[index]

    return frozenset(z_sets[CellClass.PRIMAL]), frozenset(z_sets[CellClass.DUAL])
