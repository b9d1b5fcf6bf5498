global config

seed: int = 20240611
lattice: dict = {
    "periodic_size": 4,
    "open_size": 3,
}

tests_params: dict = {
    "test_single_error_localization": {
        "lx": 4,
        "ly": 4,
        "lt": 4,
    },
    "test_chain_endpoints": {
        "size": 6,
        "max_length": 4,
    },
    "test_syndrome_is_linear": {
        "patterns": 200,
        "size": 4,
        "p": 0.03,
    },
    "test_periodic_syndrome_size_is_even": {
        "patterns": 200,
        "size": 4,
        "p": 0.03,
    },
    "test_flip_density": {
        "patterns": 200,
        "size": 6,
        "p_z": 0.01,
        "rel": 0.1,
    },
    "test_cell_distance_is_metric": {
        "triples": 500,
        "lx": 5,
        "ly": 4,
        "lt": 3,
    },
    "test_scaled_weights_keep_matching": {
        "instances": 100,
        "size": 5,
        "max_flips": 12,
        "scales": [2, 7],
    },
    "test_not_heavier_than_greedy": {
        "instances": 200,
        "size": 6,
        "max_flips": 20,
    },
    "test_mwpm_matches_brute_force": {
        "instances": 1000,
        "max_flips": 10,
        "size": 5,
    },
    "test_mwpm_matches_networkx": {
        "instances": 50,
        "min_flips": 14,
        "max_flips": 30,
        "size": 8,
    },
    "test_stream_syndrome_matches_direct": {
        "patterns": 500,
        "lx": 4,
        "ly": 4,
        "lt": 8,
        "p_z": 0.01,
    },
    "test_residual_syndrome_always_empty": {
        "patterns": 10000,
        "ps": [0.001, 0.01, 0.05],
        "size": 4,
    },
    "test_error_suppression_below_threshold": {
        "p_z": 0.005,
        "sizes": [3, 5],
        "trials": 100000,
        "workers": 4,
    },
    "test_throughput_curve_shape": {
        "sizes": [13, 18, 26, 37, 52, 74, 104, 130],
        "ps": [0.001, 0.005, 0.01],
        "lt": 1,
        "repeats": 5,
        "max_slope": 3.5,
    },
    "test_stream_matches_batch": {
        "patterns": 200,
        "lx": 5,
        "ly": 5,
        "lt": 6,
        "window": 8,
        "lag": 4,
    },
    "test_commit_after_lag": {
        "size": 4,
        "lt": 8,
        "window": 8,
        "lag": 4,
        "error_sheet": 10,
        "emitted_after_sheet": 14,
    },
    "test_simulate_zero_noise": {
        "lx": 3,
        "ly": 3,
        "lt": 3,
        "trials": 20,
    },
}
