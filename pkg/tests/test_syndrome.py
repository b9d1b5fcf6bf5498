import numpy as np
import pytest

from exceptions.exceptions import LatticeParityError, StreamOrderError
from libs.lattice import (
    AXES,
    BoundaryMode,
    CellClass,
    CellCoord,
    LatticeDims,
    QubitCoord,
    all_cells,
    all_qubits,
    incident_cells,
    wrap_cell,
    wrap_qubit,
)
from libs.noise import ErrorPattern, NoiseChannel, Pauli, reduce_to_z, sample_errors
from libs.syndrome import (
    DetectorLayout,
    DetectorSheet,
    ParityFilter,
    compute_parity,
    measurement_misfires,
    parity_grid,
    syndrome_from_errors,
    syndromes_from_stream,
    synthesize_detector_stream,
)

pytestmark = pytest.mark.tier0


def _direct_syndromes(primal_z, dual_z, dims):
    return (
        syndrome_from_errors(z_errors=primal_z, dims=dims, cell_class=CellClass.PRIMAL),
        syndrome_from_errors(z_errors=dual_z, dims=dims, cell_class=CellClass.DUAL),
    )


def _shifted(cell, axis, steps):
    coord = list(cell)
    coord[axis] += steps
    return tuple(coord)


def test_single_error_localization(tests_params):
    dims = LatticeDims(lx=tests_params["lx"], ly=tests_params["ly"], lt=tests_params["lt"])
    syndrome = syndrome_from_errors(z_errors=[QubitCoord(1, 1, 0)], dims=dims, cell_class=CellClass.DUAL)
    assert syndrome.flips == {CellCoord(1, 1, dims.extent(axis=2) - 1), CellCoord(1, 1, 1)}

    for cell_class in CellClass:
        for q in all_qubits(dims=dims, cell_class=cell_class):
            syndrome = syndrome_from_errors(z_errors=[q], dims=dims, cell_class=cell_class)
            assert len(syndrome) == 2, f"{q}"
            assert syndrome.flips == set(incident_cells(q=q, dims=dims, cell_class=cell_class))


def test_chain_endpoints(tests_params):
    size = tests_params["size"]
    dims = LatticeDims(lx=size, ly=size, lt=size)
    for cell_class in CellClass:
        for start in all_cells(dims=dims, cell_class=cell_class):
            for axis in AXES:
                for length in range(1, tests_params["max_length"] + 1):
                    chain = [
                        wrap_qubit(q=_shifted(cell=start, axis=axis, steps=2 * step + 1), dims=dims)
                        for step in range(length)
                    ]
                    end = wrap_cell(cell=_shifted(cell=start, axis=axis, steps=2 * length), dims=dims)
                    syndrome = syndrome_from_errors(z_errors=chain, dims=dims, cell_class=cell_class)
                    assert syndrome.flips == {start, end}, f"{start} axis {axis} length {length}"


@pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
def test_syndrome_is_linear(tests_params, boundary_mode):
    size = tests_params["size"]
    dims = LatticeDims(lx=size, ly=size, lt=size, boundary_mode=boundary_mode)
    channel = NoiseChannel.from_p(p=tests_params["p"])

    for seed in range(tests_params["patterns"]):
        first = reduce_to_z(pattern=sample_errors(dims=dims, channel=channel, seed=2 * seed), dims=dims)
        second = reduce_to_z(pattern=sample_errors(dims=dims, channel=channel, seed=2 * seed + 1), dims=dims)
        for cell_class, a, b in zip(CellClass, first, second):
            combined = syndrome_from_errors(z_errors=a ^ b, dims=dims, cell_class=cell_class)
            separate = syndrome_from_errors(z_errors=a, dims=dims, cell_class=cell_class) ^ syndrome_from_errors(
                z_errors=b, dims=dims, cell_class=cell_class
            )
            assert combined == separate, f"seed {seed}, {cell_class}"


def test_periodic_syndrome_size_is_even(tests_params):
    size = tests_params["size"]
    dims = LatticeDims(lx=size, ly=size, lt=size, boundary_mode=BoundaryMode.PERIODIC)
    channel = NoiseChannel.from_p(p=tests_params["p"])

    for seed in range(tests_params["patterns"]):
        z_errors = reduce_to_z(pattern=sample_errors(dims=dims, channel=channel, seed=seed), dims=dims)
        for cell_class, errors in zip(CellClass, z_errors):
            syndrome = syndrome_from_errors(z_errors=errors, dims=dims, cell_class=cell_class)
            assert len(syndrome) % 2 == 0, f"seed {seed}, {cell_class}"


def test_boundary_error_flips_one_cell(open_dims):
    syndrome = syndrome_from_errors(z_errors=[QubitCoord(-1, 0, 0)], dims=open_dims, cell_class=CellClass.PRIMAL)
    assert syndrome.flips == {CellCoord(0, 0, 0)}


def test_closed_loop_is_silent(periodic_dims):
    # an X error acts as a loop of four Z errors around its bonded edges
    pattern = ErrorPattern.from_entries([(QubitCoord(1, 0, 0), Pauli.X)])
    primal_z, dual_z = reduce_to_z(pattern=pattern, dims=periodic_dims)
    primal, dual = _direct_syndromes(primal_z=primal_z, dual_z=dual_z, dims=periodic_dims)
    assert not primal
    assert not dual


def test_wrong_class_error_rejected(periodic_dims):
    with pytest.raises(LatticeParityError):
        syndrome_from_errors(z_errors=[QubitCoord(1, 1, 0)], dims=periodic_dims, cell_class=CellClass.PRIMAL)


@pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
def test_stream_syndrome_matches_direct(tests_params, boundary_mode):
    dims = LatticeDims(
        lx=tests_params["lx"], ly=tests_params["ly"], lt=tests_params["lt"], boundary_mode=boundary_mode
    )
    channel = NoiseChannel.from_rates(p_x=tests_params["p_z"], p_z=tests_params["p_z"], p_xz=0.0)

    for _seed in range(tests_params["patterns"]):
        pattern = sample_errors(dims=dims, channel=channel, seed=_seed)
        primal_z, dual_z = reduce_to_z(pattern=pattern, dims=dims)
        sheets = synthesize_detector_stream(z_errors=primal_z | dual_z, dims=dims, seed=_seed)
        assert syndromes_from_stream(sheets=sheets, dims=dims) == _direct_syndromes(
            primal_z=primal_z, dual_z=dual_z, dims=dims
        ), f"seed {_seed}"


@pytest.mark.parametrize("boundary_mode", [BoundaryMode.PERIODIC, BoundaryMode.OPEN], ids=["periodic", "open"])
def test_error_free_stream_has_no_flips(boundary_mode):
    dims = LatticeDims(lx=3, ly=4, lt=2, boundary_mode=boundary_mode)
    sheets = synthesize_detector_stream(z_errors=[], dims=dims, seed=9)
    primal, dual = syndromes_from_stream(sheets=sheets, dims=dims)
    assert not primal
    assert not dual


def test_misfires_read_as_errors(open_dims):
    z_errors = {QubitCoord(1, 0, 0), QubitCoord(1, 1, 2)}
    misfires = measurement_misfires(dims=open_dims, seed=4, measurement_error=0.05)
    assert misfires

    sheets = synthesize_detector_stream(z_errors=z_errors, dims=open_dims, seed=4, measurement_error=0.05)
    effective = z_errors ^ misfires
    assert syndromes_from_stream(sheets=sheets, dims=open_dims) == _direct_syndromes(
        primal_z={q for q in effective if q.face_class is CellClass.PRIMAL},
        dual_z={q for q in effective if q.face_class is CellClass.DUAL},
        dims=open_dims,
    )


def test_layout_geometry(periodic_dims, open_dims):
    assert DetectorLayout(dims=periodic_dims).shape == (8, 8)
    assert DetectorLayout(dims=periodic_dims).origin == (0, 0)
    _open = DetectorLayout(dims=open_dims)
    assert _open.shape == (8, 8)
    assert _open.origin == (-1, -1)
    assert _open.qubit_at(i=0, j=1, t=0) == QubitCoord(-1, 0, 0)
    # cell centers hold no qubit
    assert _open.qubit_at(i=1, j=1, t=0) is None


@pytest.mark.parametrize("wrap", [True, False], ids=["wrap", "no-wrap"])
def test_parity_grid_matches_compute_parity(rng, wrap):
    window = [DetectorSheet(t=t, bits=rng.integers(0, 2, size=(6, 8))) for t in range(3)]
    grid = parity_grid(window=window, wrap=wrap)
    for i in range(6):
        for j in range(8):
            assert grid[i, j] == compute_parity(window=window, i=i, j=j, wrap=wrap)


@pytest.mark.parametrize(
    "set_bits,expected",
    [
        pytest.param([], 0, id="empty"),
        pytest.param([(2, 1, 1)], 1, id="single-term"),
        pytest.param([(0, 1, 1), (1, 0, 1), (1, 1, 2), (2, 1, 1)], 0, id="four-terms"),
        pytest.param([(1, 1, 1)], 0, id="center-ignored"),
    ],
)
def test_compute_parity_terms(set_bits, expected):
    window = [DetectorSheet(t=t, bits=np.zeros((3, 3), dtype=np.uint8)) for t in range(3)]
    for sheet, i, j in set_bits:
        window[sheet].bits[i, j] = 1
    assert compute_parity(window=window, i=1, j=1) == expected


def test_compute_parity_needs_three_sheets():
    with pytest.raises(ValueError):
        compute_parity(window=[DetectorSheet(t=0, bits=np.zeros((2, 2)))], i=0, j=0)


class TestParityFilter:
    def test_out_of_order_sheet(self, periodic_dims):
        layout = DetectorLayout(dims=periodic_dims)
        _filter = ParityFilter(dims=periodic_dims)
        with pytest.raises(StreamOrderError) as exc_info:
            _filter.push(sheet=DetectorSheet(t=0, bits=np.zeros(layout.shape)))
        assert exc_info.value.expected_t == -1
        assert exc_info.value.position == 0

    def test_wrong_shape(self, periodic_dims):
        with pytest.raises(ValueError):
            ParityFilter(dims=periodic_dims).push(sheet=DetectorSheet(t=-1, bits=np.zeros((3, 3))))

    def test_layers_emitted_in_order(self, periodic_dims):
        _filter = ParityFilter(dims=periodic_dims)
        layers = []
        for sheet in synthesize_detector_stream(z_errors=[QubitCoord(3, 0, 4)], dims=periodic_dims, seed=1):
            completed = _filter.push(sheet=sheet)
            if completed is not None:
                layers.append(completed)

        assert [layer for layer, _ in layers] == list(range(periodic_dims.extent(axis=2)))
        assert [flips for _, flips in layers if flips] == [[CellCoord(2, 0, 4), CellCoord(4, 0, 4)]]
        assert _filter.flips_emitted == 2
        assert _filter.reduction_ratio == _filter.raw_bits / 2

    def test_flip_density(self, tests_params):
        # a cell flips when an odd number of its six faces carries a Z error
        size, p_z = tests_params["size"], tests_params["p_z"]
        dims = LatticeDims(lx=size, ly=size, lt=size, boundary_mode=BoundaryMode.PERIODIC)
        channel = NoiseChannel.z_only(p_z=p_z)

        flips = cells = 0
        for seed in range(tests_params["patterns"]):
            primal_z, dual_z = reduce_to_z(pattern=sample_errors(dims=dims, channel=channel, seed=seed), dims=dims)
            parity = ParityFilter(dims=dims)
            for sheet in synthesize_detector_stream(z_errors=primal_z | dual_z, dims=dims, seed=seed):
                parity.push(sheet=sheet)
            flips += parity.flips_emitted
            cells += 2 * size**3

        assert flips / cells == pytest.approx(6 * p_z * (1 - p_z) ** 5, rel=tests_params["rel"])

