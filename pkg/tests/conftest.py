"""Shared pytest fixtures."""
import math
import os
import tempfile

import pytest

import cache
from app import app as flask_app

CANTOR_ALPHA = math.log(2) / math.log(3)
ALPHA_SWEEP = (0.3, 0.5, CANTOR_ALPHA, 0.9, 1.0)


@pytest.fixture
def temp_db():
    """Use a temporary database file for testing."""
    with tempfile.NamedTemporaryFile(suffix=".db", delete=False) as f:
        temp_path = f.name

    original_db = cache.DB_PATH
    cache.DB_PATH = temp_path
    cache.init_db()

    yield temp_path

    cache.DB_PATH = original_db
    if os.path.exists(temp_path):
        os.remove(temp_path)


@pytest.fixture
def client(temp_db):
    flask_app.config["TESTING"] = True
    with flask_app.test_client() as c:
        yield c


@pytest.fixture(params=ALPHA_SWEEP, ids=lambda a: f"alpha={a:.4g}")
def alpha(request):
    return request.param
