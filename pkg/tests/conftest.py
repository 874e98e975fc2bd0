import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long sweeps, run on demand")


def pytest_collection_modifyitems(config, items):
    if config.getoption("-m"):
        return
    skip = pytest.mark.skip(reason="slow tier; run with -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
