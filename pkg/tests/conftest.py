"""Shared instances for the test suite."""

import pytest

from boxot import fixtures as fx


@pytest.fixture
def symmetric_interval():
    return fx.symmetric_interval()


@pytest.fixture
def single_sink():
    return fx.single_sink()


@pytest.fixture
def asymmetric_demands():
    return fx.asymmetric_demands()


@pytest.fixture
def symmetric_square():
    return fx.symmetric_square()


@pytest.fixture
def named_instances():
    return fx.named_instances()
