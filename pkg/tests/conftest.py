import time

import pytest

from qmk.verify import run_suite


class SuiteCache:
    """Run each verification suite at most once per session and keep timings."""

    def __init__(self):
        self.rows = {}
        self.elapsed = {}

    def __call__(self, name, seed=0):
        key = (name, seed)
        if key not in self.rows:
            t0 = time.perf_counter()
            self.rows[key] = run_suite(name, seed=seed)
            self.elapsed[key] = time.perf_counter() - t0
        return self.rows[key]

    def time_of(self, name, seed=0):
        return self.elapsed[(name, seed)]


@pytest.fixture(scope="session")
def suites():
    return SuiteCache()
