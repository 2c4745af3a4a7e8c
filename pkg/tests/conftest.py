import os

# keep test runs from writing qcodegrad.log into the working tree
os.environ.setdefault("QCODEGRAD_LOG_FILE", "")

import pytest

from testkit import SeededGenerator, load_derived_values


@pytest.fixture(scope="session")
def derived():
    return load_derived_values()


@pytest.fixture
def gen():
    return SeededGenerator(1234)
