"""
Sliding-window streaming decoder.

Parity flips of completed cell layers collect in a per-class pool that is rematched
every time a new layer arrives. Matches whose cells are at least commit_lag sheets
behind the newest sheet are committed and removed from the pool; the rest stay and
may be rematched later. A flip that falls out of the window unmatched is reported
as WindowOverflowError rather than dropped.
"""

from __future__ import annotations

import functools
import math
import queue
import threading
import time
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from logging import Logger
from typing import Any

from exceptions.exceptions import ExperimentConfigError, WindowOverflowError
from libs.base_decoder import BaseDecoder
from libs.corrections import CorrectionSet
from libs.lattice import (
    BoundaryMode,
    BoundaryStep,
    CellClass,
    CellCoord,
    LatticeDims,
    QubitCoord,
    axis_path,
    boundary_candidates,
    boundary_path,
)
from libs.matching.components import MatchedGroup, MatchingOptions
from libs.syndrome import DetectorSheet, ParityFilter

DEFAULT_WINDOW_SHEETS: int = 16
DEFAULT_COMMIT_LAG: int = 8
DEFAULT_CHANNEL_DEPTH: int = 64
_QUEUE_POLL_SECONDS: float = 0.1


@dataclass(frozen=True)
class DecodeWindowConfig:
    window_sheets: int = DEFAULT_WINDOW_SHEETS
    commit_lag: int = DEFAULT_COMMIT_LAG
    # capacity of each inter-stage channel of the threaded pipeline
    channel_depth: int = DEFAULT_CHANNEL_DEPTH

    def __post_init__(self) -> None:
        for name in ("window_sheets", "commit_lag", "channel_depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ExperimentConfigError(f"{name} must be a positive integer, got {value!r}")

        if self.commit_lag >= self.window_sheets:
            raise ExperimentConfigError(
                f"commit_lag ({self.commit_lag}) must be smaller than window_sheets ({self.window_sheets})"
            )


class _StageFailure:
    def __init__(self, error: BaseException) -> None:
        self.error = error


_END = object()


class StreamDecoder(BaseDecoder):
    def __init__(
        self,
        dims: LatticeDims,
        config: DecodeWindowConfig | None = None,
        options: MatchingOptions | None = None,
        log: Logger | None = None,
    ) -> None:
        super().__init__(dims=dims, options=options, log=log)
        self.config = config or DecodeWindowConfig()
        # the t axis of a stream is never wrapped
        self.stream_dims = dims.with_time_boundary(BoundaryMode.OPEN)
        self.parity: ParityFilter = ParityFilter(dims=dims)
        self._reset_window()

    @property
    def mode(self) -> str:
        return "stream"

    def _reset_window(self) -> None:
        self.latest_layer = -1
        self.layers_processed = 0
        self.max_pool = 0
        self.committed_matches = 0
        self._pool: dict[CellClass, list[CellCoord]] = {CellClass.PRIMAL: [], CellClass.DUAL: []}
        self._pending: dict[CellClass, set[QubitCoord]] = {CellClass.PRIMAL: set(), CellClass.DUAL: set()}
        self._flushed = False

    @property
    def pending_flips(self) -> int:
        return sum(len(cells) for cells in self._pool.values())

    @property
    def window_start(self) -> int:
        return self.latest_layer - self.config.window_sheets + 1

    @property
    def past_open(self) -> bool:
        # the lower time boundary stays matchable while the window still reaches the first sheet
        return self.window_start <= 0

    @property
    def commit_layer(self) -> int:
        # newest sheet is latest_layer + 1
        return self.latest_layer + 1 - self.config.commit_lag

    def window_boundaries(self, cell: CellCoord, latest_layer: int, past_open: bool) -> list[BoundaryStep]:
        """
        Boundary candidates of a pooled flip: the open spatial sides, the lower time boundary while
        the window still holds it, and a provisional boundary just past the newest completed layer.
        """
        steps = [
            step
            for step in boundary_candidates(cell=cell, dims=self.stream_dims)
            if step.axis != 2 or (past_open and step.direction < 0)
        ]
        steps.append(BoundaryStep(distance=(latest_layer - cell.t) // 2 + 1, axis=2, direction=1))
        return steps

    def push_layer(self, layer: int, flips: Iterable[CellCoord]) -> list[tuple[int, CorrectionSet]]:
        """
        Feed the flips of a completed cell layer and return the corrections it finalizes.

        Raises:
            WindowOverflowError: a flip left the window without being committed
        """
        self.latest_layer = layer
        self.layers_processed += 1
        for _cell in flips:
            self._pool[_cell.cell_class].append(_cell)
        self.max_pool = max(self.max_pool, self.pending_flips)

        for _class in (CellClass.PRIMAL, CellClass.DUAL):
            self._match_pool(cell_class=_class, final=False)

        self._check_overflow()
        if self.past_open:
            return []
        return self._emit(bound=min(self.commit_layer + 1, self._pool_floor()))

    def flush(self) -> list[tuple[int, CorrectionSet]]:
        """
        End of stream: the provisional upper boundary becomes the real one and every
        remaining flip is committed.
        """
        if self._flushed:
            return []

        for _class in (CellClass.PRIMAL, CellClass.DUAL):
            self._match_pool(cell_class=_class, final=True)
        self._flushed = True

        self.log.debug(
            f"Stream flushed after {self.layers_processed} layers: {self.flips_matched} flips matched, "
            f"{self.committed_matches} matches committed, peak pool {self.max_pool}"
        )
        return self._emit(bound=math.inf)

    def _pool_floor(self) -> float:
        ts = [cell.t for cells in self._pool.values() for cell in cells]
        return min(ts) if ts else math.inf

    def _match_pool(self, cell_class: CellClass, final: bool) -> None:
        _pool = sorted(self._pool[cell_class], key=lambda c: (c.t, c.y, c.x))
        if not _pool:
            return

        finder = functools.partial(self.window_boundaries, latest_layer=self.latest_layer, past_open=self.past_open)
        matched_before, weight_before = self.flips_matched, self.total_weight
        groups = self.match(cells=_pool, dims=self.stream_dims, boundary=finder)
        # only committed matches count towards the statistics
        self.flips_matched, self.total_weight = matched_before, weight_before

        start = time.perf_counter()
        kept: list[CellCoord] = []
        for group in groups:
            kept.extend(self._commit(group=group, cell_class=cell_class, final=final))
        self._pool[cell_class] = kept
        self.timings.output_processing += time.perf_counter() - start

    def _commit(self, group: MatchedGroup, cell_class: CellClass, final: bool) -> list[CellCoord]:
        graph = group.graph
        limit = math.inf if final else self.commit_layer
        kept: list[CellCoord] = []

        for u, v in group.matching.pairs:
            if graph.is_boundary(vertex=u):
                continue

            cell = graph.cells[u]
            if graph.is_boundary(vertex=v):
                step = graph.boundary_steps[u]  # type: ignore[index]
                provisional = step.axis == 2 and step.direction > 0
                if (provisional and not final) or cell.t > limit:
                    kept.append(cell)
                    continue
                self._pending[cell_class] ^= set(boundary_path(cell=cell, step=step))
                self.flips_matched += 1
            else:
                other = graph.cells[v]
                if max(cell.t, other.t) > limit:
                    kept.extend((cell, other))
                    continue
                self._pending[cell_class] ^= set(axis_path(a=cell, b=other, dims=self.stream_dims))
                self.flips_matched += 2

            self.total_weight += graph.weight(u=u, v=v)
            self.committed_matches += 1

        return kept

    def _check_overflow(self) -> None:
        start = self.window_start
        for cells in self._pool.values():
            for cell in cells:
                if cell.t < start:
                    raise WindowOverflowError(t=cell.t, pending=self.pending_flips)

    def _emit(self, bound: float) -> list[tuple[int, CorrectionSet]]:
        by_sheet: dict[tuple[int, int], set[QubitCoord]] = {}
        order = {CellClass.PRIMAL: 0, CellClass.DUAL: 1}
        for _class, qubits in self._pending.items():
            ready = {q for q in qubits if q.t < bound}
            self._pending[_class] = qubits - ready
            for q in ready:
                by_sheet.setdefault((q.t, order[_class]), set()).add(q)

        classes = (CellClass.PRIMAL, CellClass.DUAL)
        return [
            (t, CorrectionSet(cell_class=classes[idx], qubits=frozenset(qubits)))
            for (t, idx), qubits in sorted(by_sheet.items(), key=lambda _item: _item[0])
        ]

    def decode(self, sheets: Iterable[DetectorSheet]) -> Iterator[tuple[int, CorrectionSet]]:
        """
        Decode a detector stream, yielding (sheet t, corrections) as layers are committed.

        Output is in increasing t, primal before dual on the same sheet, and does not depend
        on the number of workers.

        Raises:
            StreamOrderError: a sheet is missing or out of order
            WindowOverflowError: flips could not be committed inside the window
        """
        self.reset_stats()
        self._reset_window()
        self.parity = ParityFilter(dims=self.dims)

        if self.options.workers > 1:
            yield from self._decode_threaded(sheets=sheets)
            return

        for _sheet in sheets:
            start = time.perf_counter()
            completed = self.parity.push(sheet=_sheet)
            self.timings.parity_filter += time.perf_counter() - start
            if completed is not None:
                yield from self.push_layer(layer=completed[0], flips=completed[1])

        yield from self.flush()

    def _decode_threaded(self, sheets: Iterable[DetectorSheet]) -> Iterator[tuple[int, CorrectionSet]]:
        """
        Parity filter and window matcher on their own threads, linked by bounded channels.
        """
        depth = self.config.channel_depth
        layers: queue.Queue[Any] = queue.Queue(maxsize=depth)
        output: queue.Queue[Any] = queue.Queue(maxsize=depth)
        stop = threading.Event()

        def _put(channel: queue.Queue[Any], item: Any) -> bool:
            while not stop.is_set():
                try:
                    channel.put(item, timeout=_QUEUE_POLL_SECONDS)
                    return True
                except queue.Full:
                    continue
            return False

        def _filter_stage() -> None:
            try:
                for sheet in sheets:
                    start = time.perf_counter()
                    completed = self.parity.push(sheet=sheet)
                    self.timings.parity_filter += time.perf_counter() - start
                    if completed is not None and not _put(channel=layers, item=completed):
                        return
                _put(channel=layers, item=_END)
            except Exception as exp:
                _put(channel=layers, item=_StageFailure(error=exp))

        def _matcher_stage() -> None:
            try:
                while not stop.is_set():
                    _item = layers.get()
                    if isinstance(_item, _StageFailure):
                        _put(channel=output, item=_item)
                        return
                    if _item is _END:
                        for emitted in self.flush():
                            _put(channel=output, item=emitted)
                        _put(channel=output, item=_END)
                        return
                    for emitted in self.push_layer(layer=_item[0], flips=_item[1]):
                        if not _put(channel=output, item=emitted):
                            return
            except Exception as exp:
                _put(channel=output, item=_StageFailure(error=exp))

        _threads = [
            threading.Thread(target=_filter_stage, name="tqc-parity-filter", daemon=True),
            threading.Thread(target=_matcher_stage, name="tqc-window-matcher", daemon=True),
        ]
        for thread in _threads:
            thread.start()

        try:
            while True:
                _item = output.get()
                if _item is _END:
                    break
                if isinstance(_item, _StageFailure):
                    raise _item.error
                yield _item
        finally:
            stop.set()
            # unblock a matcher waiting on an empty channel
            try:
                layers.put_nowait(_END)
            except queue.Full:
                pass
            for thread in _threads:
                thread.join(timeout=1.0)
