"""Shared pytest fixtures; living at the repository root also puts it on sys.path."""

import pytest

import config


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size tree and grid runs (minutes); deselect with -m "not slow"')


@pytest.fixture
def temp_db(tmp_path, monkeypatch):
    """Point the sqlite store at a fresh file for one test."""
    path = tmp_path / 'liftgap-test.db'
    monkeypatch.setattr(config, 'DATABASE', str(path))
    return path


@pytest.fixture(scope='session')
def ls20():
    from services.instance_service import build_ls_instance
    return build_ls_instance(20, 20, 10)
