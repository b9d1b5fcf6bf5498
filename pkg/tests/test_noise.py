import math

import pytest

from exceptions.exceptions import InvalidNoiseChannelError
from libs.lattice import BoundaryMode, CellClass, LatticeDims, QubitCoord, all_qubits
from libs.noise import (
    ErrorPattern,
    NoiseChannel,
    Pauli,
    reduce_to_z,
    sample_errors,
    sample_sheet_errors,
    sheet_rng,
)

pytestmark = pytest.mark.tier0


class TestNoiseChannel:
    def test_from_p(self):
        channel = NoiseChannel.from_p(p=0.1)
        assert channel.p_x == channel.p_z == 0.1
        assert math.isclose(channel.p_xz, 0.01)
        assert math.isclose(channel.p_i, 0.79)

    def test_from_rates_fills_identity(self):
        channel = NoiseChannel.from_rates(p_x=0.0, p_z=0.25, p_xz=0.0)
        assert channel == NoiseChannel.z_only(p_z=0.25)

    @pytest.mark.parametrize(
        "rates",
        [
            pytest.param({"p_i": 0.5, "p_x": 0.5, "p_z": 0.5, "p_xz": 0.0}, id="sum-above-one"),
            pytest.param({"p_i": 1.1, "p_x": -0.1, "p_z": 0.0, "p_xz": 0.0}, id="negative"),
            pytest.param({"p_i": math.nan, "p_x": 0.0, "p_z": 0.0, "p_xz": 0.0}, id="nan"),
        ],
    )
    def test_invalid_channel(self, rates):
        with pytest.raises(InvalidNoiseChannelError):
            NoiseChannel(**rates)

    def test_from_rates_rejects_overflow(self):
        with pytest.raises(InvalidNoiseChannelError):
            NoiseChannel.from_rates(p_x=0.6, p_z=0.6, p_xz=0.0)


class TestErrorPattern:
    def test_repeated_pauli_cancels(self):
        q = QubitCoord(1, 0, 0)
        pattern = ErrorPattern()
        pattern.add(q=q, pauli=Pauli.X)
        pattern.add(q=q, pauli=Pauli.Z)
        assert pattern.entries[q] is Pauli.XZ

        pattern.add(q=q, pauli=Pauli.XZ)
        assert q not in pattern
        assert len(pattern) == 0

    def test_items_ordered_by_sheet(self):
        pattern = ErrorPattern.z_errors(qubits=[QubitCoord(1, 0, 4), QubitCoord(3, 0, 0), QubitCoord(0, 1, 0)])
        assert [q for q, _ in pattern.items()] == [QubitCoord(3, 0, 0), QubitCoord(0, 1, 0), QubitCoord(1, 0, 4)]


class TestSampling:
    def test_zero_noise_draws_nothing(self, periodic_dims):
        assert len(sample_errors(dims=periodic_dims, channel=NoiseChannel.z_only(p_z=0.0), seed=7)) == 0

    def test_certain_noise_hits_every_qubit(self, open_dims):
        pattern = sample_errors(dims=open_dims, channel=NoiseChannel.z_only(p_z=1.0), seed=7)
        assert len(pattern) == len(all_qubits(dims=open_dims))
        assert pattern.count(pauli=Pauli.Z) == len(pattern)

    def test_same_seed_same_pattern(self, periodic_dims):
        channel = NoiseChannel.from_p(p=0.05)
        assert sample_errors(dims=periodic_dims, channel=channel, seed=11) == sample_errors(
            dims=periodic_dims, channel=channel, seed=11
        )

    def test_sheet_sampling_matches_batch(self, periodic_dims):
        # streamed generation draws sheet by sheet from the same substreams
        channel = NoiseChannel.from_p(p=0.1)
        batch = sample_errors(dims=periodic_dims, channel=channel, seed=3)
        sheets = {
            q: pauli
            for t in range(periodic_dims.extent(axis=2))
            for q, pauli in sample_sheet_errors(dims=periodic_dims, channel=channel, seed=3, t=t)
        }
        assert sheets == batch.entries

    def test_sheet_rng_accepts_outer_sheet(self):
        assert 0.0 <= sheet_rng(seed=1, t=-1).random() < 1.0

    def test_error_rate_close_to_p(self):
        dims = LatticeDims(lx=10, ly=10, lt=10, boundary_mode=BoundaryMode.PERIODIC)
        pattern = sample_errors(dims=dims, channel=NoiseChannel.z_only(p_z=0.1), seed=5)
        _qubits = len(all_qubits(dims=dims))
        # 6000 qubits, five standard deviations
        assert abs(len(pattern) / _qubits - 0.1) < 5 * math.sqrt(0.09 / _qubits)


class TestReduceToZ:
    def test_z_errors_split_by_class(self, periodic_dims):
        primal, dual = QubitCoord(1, 0, 0), QubitCoord(1, 1, 0)
        assert reduce_to_z(pattern=ErrorPattern.z_errors(qubits=[primal, dual]), dims=periodic_dims) == (
            frozenset({primal}),
            frozenset({dual}),
        )

    def test_x_error_moves_to_opposite_class(self, periodic_dims):
        pattern = ErrorPattern.from_entries([(QubitCoord(1, 0, 0), Pauli.X)])
        primal_z, dual_z = reduce_to_z(pattern=pattern, dims=periodic_dims)
        assert not primal_z
        assert len(dual_z) == 4
        assert all(q.face_class is CellClass.DUAL for q in dual_z)

    def test_shared_bond_neighbor_cancels(self, periodic_dims):
        pattern = ErrorPattern.from_entries([(QubitCoord(1, 0, 0), Pauli.X), (QubitCoord(1, 2, 0), Pauli.X)])
        _, dual_z = reduce_to_z(pattern=pattern, dims=periodic_dims)
        assert len(dual_z) == 6
        assert QubitCoord(1, 1, 0) not in dual_z

    def test_xz_error_carries_both(self, periodic_dims):
        q = QubitCoord(1, 0, 0)
        primal_z, dual_z = reduce_to_z(pattern=ErrorPattern.from_entries([(q, Pauli.XZ)]), dims=periodic_dims)
        assert primal_z == frozenset({q})
        assert len(dual_z) == 4
