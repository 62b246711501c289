"""共通フィクスチャと oracle マーカーの制御."""
import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-oracle",
        action="store_true",
        default=False,
        help="求積・離散化オラクルのテストも実行する",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-oracle"):
        return
    skip = pytest.mark.skip(reason="--run-oracle を指定したときのみ実行")
    for item in items:
        if "oracle" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
