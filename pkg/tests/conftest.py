import pytest

from dmy import build_counterexample


@pytest.fixture(scope="session")
def bundle():
    """The default construction, built once for the whole run."""
    return build_counterexample(1.01, 0.005, 0.05)
