import importlib
import pathlib
import random
import sys
import types

import numpy as np
import pytest

# --------------------------------------------------------------------------------------
# Load the engine sources as the `cobordism` package so that relative imports
# (e.g. `from .gf2 import BitVector`) inside the modules work during the test run.
# --------------------------------------------------------------------------------------
SERVICE_SRC = pathlib.Path(__file__).resolve().parents[1] / "src"
PACKAGE_NAME = "cobordism"

if PACKAGE_NAME not in sys.modules:
    pkg = types.ModuleType(PACKAGE_NAME)
    pkg.__path__ = [str(SERVICE_SRC)]
    sys.modules[PACKAGE_NAME] = pkg

dependencies = importlib.import_module(f"{PACKAGE_NAME}.dependencies")
triangulation = importlib.import_module(f"{PACKAGE_NAME}.triangulation")

NONORIENTABLE_MANIFOLDS = ("S2twS1", "RP2xS1", "KxS1")
ORIENTABLE_MANIFOLDS = ("S3", "S2xS1", "T3")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Every test starts from the default configuration."""
    for name in (
        "COBORDISM_EXHAUSTIVE_BOUND",
        "COBORDISM_STRUCTURE_BOUND",
        "COBORDISM_SAMPLE_COUNT",
        "COBORDISM_SAMPLE_SEED",
        "COBORDISM_CAYLEY_CSV_BOUND",
        "COBORDISM_CONTEXT_CACHE_SIZE",
        "COBORDISM_LOG_LEVEL",
        "OTLP_ENDPOINT",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("OTEL_SDK_DISABLED", "true")
    yield


@pytest.fixture(scope="session")
def catalog():
    """Built-in triangulation by name"""
    return triangulation.catalog


@pytest.fixture(scope="session")
def context():
    """Cached homology context of a catalog manifold"""
    def _context(name):
        return dependencies.get_context(triangulation.catalog(name))
    return _context


@pytest.fixture
def rng():
    return random.Random(20240917)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path as a string."""
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="ascii")
        return str(path)
    return _write
