import pytest

import quasiproj as qp


@pytest.fixture(scope="session")
def basis():
    return qp.make_basis()


@pytest.fixture(scope="session")
def P(basis):
    return qp.build_polytope_P(basis)


@pytest.fixture(scope="session")
def Q(basis):
    return qp.build_decagon_Q(basis)


_window_cache = {}


@pytest.fixture(scope="session")
def windows_for(P):
    """Shared slice-window builder, cached per c."""

    def build(c):
        key = round(float(c), 15)
        if key not in _window_cache:
            _window_cache[key] = qp.build_windows(P, float(c))
        return _window_cache[key]

    return build
