from __future__ import annotations

import abc
from collections.abc import Sequence
from dataclasses import dataclass, fields
from logging import Logger
from typing import Any

from simple_logger.logger import get_logger

from libs.lattice import CellCoord, LatticeDims
from libs.matching.components import MatchedGroup, MatchingOptions, match_flips
from libs.matching.graph import BoundaryFinder


@dataclass
class StageTimings:
    """
    Wall time in seconds spent in each processing stage.
    """

    parity_filter: float = 0.0
    graph_generation: float = 0.0
    matching: float = 0.0
    output_processing: float = 0.0

    @property
    def total(self) -> float:
        return self.parity_filter + self.graph_generation + self.matching + self.output_processing

    def __add__(self, other: StageTimings) -> StageTimings:
        return StageTimings(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class BaseDecoder(abc.ABC):
    """
    Shared plumbing of the decoders: matching options, stage timing and match statistics.
    """

    def __init__(self, dims: LatticeDims, options: MatchingOptions | None = None, log: Logger | None = None) -> None:
        self.dims = dims
        self.options = options or MatchingOptions()
        self.log = log or get_logger(name=__name__)
        self.timings = StageTimings()
        self.flips_matched = 0
        self.total_weight = 0

    @property
    @abc.abstractmethod
    def mode(self) -> str:
        pass

    @abc.abstractmethod
    def decode(self, *args: Any, **kwargs: Any) -> Any:
        pass

    def match(
        self, cells: Sequence[CellCoord], dims: LatticeDims | None = None, boundary: BoundaryFinder | None = None
    ) -> list[MatchedGroup]:
        if not cells:
            return []

        groups = match_flips(cells=cells, dims=dims or self.dims, options=self.options, boundary=boundary)
        for group in groups:
            self.timings.graph_generation += group.graph_seconds
            self.timings.matching += group.matching_seconds
            self.total_weight += group.matching.total_weight
        self.flips_matched += len(cells)
        return groups

    def reset_stats(self) -> None:
        self.timings = StageTimings()
        self.flips_matched = 0
        self.total_weight = 0
