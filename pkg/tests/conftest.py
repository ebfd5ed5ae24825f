from __future__ import annotations

import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from arffml.arff import AttributeSpec, Dataset

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def make_dataset(columns: dict, relation: str = "t") -> Dataset:
    """Build a dataset from {name: values} or {name: (labels, codes)}."""
    attrs, cols = [], []
    for name, col in columns.items():
        if isinstance(col, tuple):
            labels, codes = col
            attrs.append(AttributeSpec.nominal(name, labels))
            cols.append(np.asarray(codes, dtype=float))
        else:
            attrs.append(AttributeSpec.numeric(name))
            cols.append(np.asarray(col, dtype=float))
    return Dataset(relation, attrs, np.column_stack(cols) if cols else None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)
