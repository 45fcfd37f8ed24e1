import os
import pathlib

import pytest

DATA = pathlib.Path(os.environ.get(
    "SYNTHPARSE_TEST_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture
def data():
    return DATA


@pytest.fixture(scope="session")
def grammar():
    import synthparse
    return synthparse.Grammar.from_file(str(DATA / "demo.grammar"))
