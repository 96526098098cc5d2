import json

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from database import Base
from numkernel import Operator

# Use in-memory SQLite for tests
TEST_DB_URL = "sqlite:///:memory:"

@pytest.fixture(scope="session")
def engine():
    return create_engine(TEST_DB_URL)

@pytest.fixture(scope="session")
def tables(engine):
    Base.metadata.create_all(engine)
    yield
    Base.metadata.drop_all(engine)

@pytest.fixture
def db_session(engine, tables):
    """Returns a sqlalchemy session, and after the test tears down everything properly."""
    connection = engine.connect()
    transaction = connection.begin()
    Session = sessionmaker(bind=connection, expire_on_commit=False)
    session = Session()

    yield session

    session.close()
    transaction.rollback()
    connection.close()

@pytest.fixture
def make_operator():
    def _create(entries, p=2.0):
        return Operator(np.asarray(entries, dtype=np.complex128), p)
    return _create

@pytest.fixture
def diag_operator(make_operator):
    def _create(*eigenvalues, p=2.0):
        return make_operator(np.diag(eigenvalues), p)
    return _create

@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")

@pytest.fixture
def json_file(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)
    return _write
