from __future__ import annotations

import time
from collections.abc import Iterable
from dataclasses import dataclass, field

from libs.base_decoder import BaseDecoder, StageTimings
from libs.corrections import CorrectionSet, corrections_from_matching
from libs.lattice import CellClass
from libs.noise import ErrorPattern, reduce_to_z
from libs.syndrome import DetectorSheet, ParityFilter, SyndromeSet, syndrome_from_errors


@dataclass
class BatchDecodeResult:
    primal: CorrectionSet
    dual: CorrectionSet
    syndromes: tuple[SyndromeSet, SyndromeSet]
    timings: StageTimings = field(default_factory=StageTimings)
    flips_matched: int = 0
    total_weight: int = 0
    # raw detector bits per retained flip, set when decoding from sheets
    reduction_ratio: float = 0.0

    @property
    def corrections(self) -> tuple[CorrectionSet, CorrectionSet]:
        return self.primal, self.dual


class BatchDecoder(BaseDecoder):
    """
    Decodes a finite lattice volume in one shot, primal and dual independently.
    """

    @property
    def mode(self) -> str:
        return "batch"

    def decode(self, errors: ErrorPattern) -> BatchDecodeResult:
        self.reset_stats()
        start = time.perf_counter()
        primal_z, dual_z = reduce_to_z(pattern=errors, dims=self.dims)
        syndromes = (
            syndrome_from_errors(z_errors=primal_z, dims=self.dims, cell_class=CellClass.PRIMAL),
            syndrome_from_errors(z_errors=dual_z, dims=self.dims, cell_class=CellClass.DUAL),
        )
        self.timings.parity_filter += time.perf_counter() - start
        return self.decode_syndromes(syndromes=syndromes)

    def decode_sheets(self, sheets: Iterable[DetectorSheet]) -> BatchDecodeResult:
        """
        Decode a recorded or synthesized detector stream of a finite volume through the parity filter.
        """
        self.reset_stats()
        start = time.perf_counter()
        _filter = ParityFilter(dims=self.dims)
        flips: dict[CellClass, set] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}
        for sheet in sheets:
            completed = _filter.push(sheet=sheet)
            if completed is None:
                continue
            for cell in completed[1]:
                flips[cell.cell_class].add(cell)

        self.timings.parity_filter += time.perf_counter() - start
        result = self.decode_syndromes(
            syndromes=(
                SyndromeSet(cell_class=CellClass.PRIMAL, flips=frozenset(flips[CellClass.PRIMAL])),
                SyndromeSet(cell_class=CellClass.DUAL, flips=frozenset(flips[CellClass.DUAL])),
            ),
            reset=False,
        )
        result.reduction_ratio = _filter.reduction_ratio
        return result

    def decode_syndromes(self, syndromes: tuple[SyndromeSet, SyndromeSet], reset: bool = True) -> BatchDecodeResult:
        if reset:
            self.reset_stats()

        _corrections: dict[CellClass, CorrectionSet] = {}
        for syndrome in syndromes:
            groups = self.match(cells=syndrome.ordered())
            start = time.perf_counter()
            correction = CorrectionSet.empty(cell_class=syndrome.cell_class)
            for group in groups:
                correction ^= corrections_from_matching(
                    m=group.matching, g=group.graph, dims=self.dims, cell_class=syndrome.cell_class
                )
            _corrections[syndrome.cell_class] = correction
            self.timings.output_processing += time.perf_counter() - start

        self.log.debug(
            f"Batch decode on {self.dims}: {self.flips_matched} flips, total weight {self.total_weight}, "
            f"{len(_corrections[CellClass.PRIMAL])}+{len(_corrections[CellClass.DUAL])} corrections"
        )
        return BatchDecodeResult(
            primal=_corrections[CellClass.PRIMAL],
            dual=_corrections[CellClass.DUAL],
            syndromes=syndromes,
            timings=self.timings,
            flips_matched=self.flips_matched,
            total_weight=self.total_weight,
        )
