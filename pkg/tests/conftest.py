import importlib

import pytest

from kmvcount import _backend, _kernels_py

ACCEPTANCE_LINES: list[str] = []


def _available_kernels():
    mods = [_kernels_py]
    try:
        mods.append(importlib.import_module("kmvcount._kernels"))
    except ImportError:
        pass
    return mods


KERNELS = _available_kernels()


@pytest.fixture(params=KERNELS, ids=lambda mod: mod.BACKEND)
def kernels(request):
    return request.param


@pytest.fixture(params=KERNELS, ids=lambda mod: mod.BACKEND)
def backend(request, monkeypatch):
    """Route Sketch through each available kernel implementation."""
    mod = request.param
    monkeypatch.setattr(_backend, "insert_value", mod.insert_value)
    monkeypatch.setattr(_backend, "insert_values", mod.insert_values)
    return mod.BACKEND


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


from contextlib import contextmanager


@contextmanager
def use_kernels(mod):
    saved = _backend.insert_value, _backend.insert_values
    _backend.insert_value, _backend.insert_values = mod.insert_value, mod.insert_values
    try:
        yield
    finally:
        _backend.insert_value, _backend.insert_values = saved
