import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fbvar import spectral

_basis_cache = {}
_grid_cache = {}


@pytest.fixture
def basis_for():
    """Memoized basis factory shared across the whole session."""
    def make(nu, n_modes=64):
        key = (float(nu), int(n_modes))
        if key not in _basis_cache:
            _basis_cache[key] = spectral.make_basis(nu, n_modes)
        return _basis_cache[key]
    return make


@pytest.fixture
def grid_for():
    def make(nu, n_modes=64, points_per_cell=8):
        key = (float(nu), int(n_modes), int(points_per_cell))
        if key not in _grid_cache:
            _grid_cache[key] = spectral.reference_grid(nu, n_modes,
                                                       points_per_cell)
        return _grid_cache[key]
    return make
