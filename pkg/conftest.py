from __future__ import annotations

import logging
import os
import pickle
import shutil
from pathlib import Path
from shutil import rmtree

import numpy as np
import pytest
from pytest_harvest import get_session_results_df, is_main_process
from pytest_testconfig import config as py_config

import report
from libs.lattice import BoundaryMode, CellClass, LatticeDims, all_qubits, cell_distance, incident_cells
from libs.noise import ErrorPattern
from utilities.logger import separator, setup_logging

RESULTS_PATH = Path("./.xdist_results/")
RESULTS_PATH.mkdir(exist_ok=True)
LOGGER = logging.getLogger(__name__)
BASIC_LOGGER = logging.getLogger("basic")


# Pytest start


def pytest_addoption(parser):
    acceptance_group = parser.getgroup(name="Acceptance")
    acceptance_group.addoption(
        "--skip-acceptance", action="store_true", help="Skip long Monte-Carlo and benchmark acceptance tests"
    )
    acceptance_group.addoption(
        "--results-csv", help="Write the harvested per-test results (status, duration, results_bag) to this CSV"
    )


def pytest_sessionstart(session):
    if not py_config.get("tests_params"):
        pytest.exit(reason="tests_params missing from the test config, check --tc-file", returncode=1)

    tests_log_file = session.config.getoption("log_file") or "pytest-tests.log"
    if os.path.exists(tests_log_file):
        Path(tests_log_file).unlink(missing_ok=True)

    log_level: int | str = session.config.getoption("log_cli_level") or logging.INFO

    if isinstance(log_level, str):
        log_level = logging.getLevelNamesMapping()[log_level]

    session.config.option.log_listener = setup_logging(
        log_file=tests_log_file,
        log_level=log_level,
    )


def pytest_fixture_setup(fixturedef, request):
    LOGGER.debug(f"Executing {fixturedef.scope} fixture: {fixturedef.argname}")


def pytest_runtest_setup(item):
    BASIC_LOGGER.info(f"\n{separator(symbol_='-', val=item.name)}")
    BASIC_LOGGER.info(f"{separator(symbol_='-', val='SETUP')}")


def pytest_runtest_call(item):
    BASIC_LOGGER.info(f"{separator(symbol_='-', val='CALL')}")


def pytest_runtest_teardown(item):
    BASIC_LOGGER.info(f"{separator(symbol_='-', val='TEARDOWN')}")


def pytest_report_teststatus(report, config):
    test_name = report.head_line
    when = report.when
    call_str = "call"

    if report.passed:
        if when == call_str:
            BASIC_LOGGER.info(f"\nTEST: {test_name} STATUS: \033[0;32mPASSED\033[0m")

    elif report.skipped:
        BASIC_LOGGER.info(f"\nTEST: {test_name} STATUS: \033[1;33mSKIPPED\033[0m")

    elif report.failed:
        if when != call_str:
            BASIC_LOGGER.info(f"\nTEST: {test_name} [{when}] STATUS: \033[0;31mERROR\033[0m")
        else:
            BASIC_LOGGER.info(f"\nTEST: {test_name} STATUS: \033[0;31mFAILED\033[0m")


def pytest_collection_modifyitems(session, config, items):
    if not config.getoption("skip_acceptance"):
        return

    _skip = pytest.mark.skip(reason="--skip-acceptance was given")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(_skip)


def pytest_sessionfinish(session, exitstatus):
    if session.config.option.setupplan or session.config.option.collectonly:
        return

    results_csv = session.config.getoption("results_csv")
    if results_csv and is_main_process(session):
        results = get_session_results_df(session, flatten=True)
        report.write_csv(frame=report.harvest_frame(results=results), path=results_csv)

    LOGGER.info(f"Session finished with status {exitstatus}")

    shutil.rmtree(path=session.config.option.basetemp, ignore_errors=True)
    reporter = session.config.pluginmanager.get_plugin("terminalreporter")
    reporter.summary_stats()


# https://smarie.github.io/python-pytest-harvest/#pytest-x-dist
def pytest_harvest_xdist_init():
    # reset the recipient folder
    if RESULTS_PATH.exists():
        rmtree(RESULTS_PATH)

    RESULTS_PATH.mkdir(exist_ok=False)
    return True


def pytest_harvest_xdist_worker_dump(worker_id, session_items, fixture_store):
    # persist session_items and fixture_store in the file system
    with open(RESULTS_PATH / (f"{worker_id}.pkl"), "wb") as f:
        try:
            pickle.dump((session_items, fixture_store), f)
        except Exception as exp:
            LOGGER.warning(f"Error while pickling worker {worker_id}'s harvested results: [{exp.__class__}] {exp}")

    return True


def pytest_harvest_xdist_load():
    # restore the saved objects from file system
    workers_saved_material = {}

    for pkl_file in RESULTS_PATH.glob("*.pkl"):
        wid = pkl_file.stem

        with pkl_file.open("rb") as f:
            workers_saved_material[wid] = pickle.load(f)

    return workers_saved_material


def pytest_harvest_xdist_cleanup():
    # delete all temporary pickle files
    rmtree(RESULTS_PATH)
    return True


# Pytest end


@pytest.fixture(scope="session")
def periodic_dims() -> LatticeDims:
    _l = py_config["lattice"]["periodic_size"]
    return LatticeDims(lx=_l, ly=_l, lt=_l, boundary_mode=BoundaryMode.PERIODIC)


@pytest.fixture(scope="session")
def open_dims() -> LatticeDims:
    _l = py_config["lattice"]["open_size"]
    return LatticeDims(lx=_l, ly=_l, lt=_l, boundary_mode=BoundaryMode.OPEN)


@pytest.fixture()
def rng(request) -> np.random.Generator:
    # one reproducible stream per test
    return np.random.default_rng(seed=[py_config["seed"], sum(request.node.nodeid.encode())])


@pytest.fixture()
def tests_params(request) -> dict:
    return py_config["tests_params"].get(request.node.originalname, {})


@pytest.fixture()
def isolated_errors(rng):
    """
    Sampler of Z error patterns whose flips sit at least min_spacing cell steps apart per class,
    each error on a face with two cells, so every chain is a single qubit.
    """

    def _sample(dims: LatticeDims, max_errors: int, min_spacing: int = 3) -> ErrorPattern:
        qubits = [
            q
            for q in all_qubits(dims=dims)
            if len(incident_cells(q=q, dims=dims, cell_class=q.face_class)) == 2
        ]
        taken: dict[CellClass, list] = {CellClass.PRIMAL: [], CellClass.DUAL: []}
        errors = []
        for idx in rng.permutation(len(qubits)):
            q = qubits[idx]
            _cells = incident_cells(q=q, dims=dims, cell_class=q.face_class)
            if all(
                cell_distance(a=_cell, b=other, dims=dims) >= min_spacing
                for _cell in _cells
                for other in taken[q.face_class]
            ):
                taken[q.face_class].extend(_cells)
                errors.append(q)
            if len(errors) == max_errors:
                break
        return ErrorPattern.z_errors(qubits=errors)

    return _sample
