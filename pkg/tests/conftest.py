"""
conftest.py - pytest wiring for the script-style test drivers

Each test function takes (env, results) as in harness.run_suite; a test
fails under pytest if it recorded any failure in `results`.
"""

import pytest

from harness import TestEnvironment, TestResults


def pytest_addoption(parser):
    parser.addoption('--full', action='store_true', default=False,
                     help='Also run long acceptance-scale tests')
    parser.addoption('--keep-files', action='store_true', default=False,
                     help='Keep test files after completion')


@pytest.fixture
def env(request):
    e = TestEnvironment(keep_files=request.config.getoption('--keep-files'),
                        verbose=request.config.getoption('verbose') > 0,
                        full=request.config.getoption('--full'))
    yield e
    e.cleanup()


@pytest.fixture
def results():
    r = TestResults()
    yield r
    if r.failed:
        pytest.fail("; ".join(f"{name}: {reason}" for name, reason in r.errors),
                    pytrace=False)
