import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure local package is importable without installation
_REPO_ROOT = Path(__file__).resolve().parents[1]
_SRC = _REPO_ROOT / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))

from graph_pressure.catalog import EXAMPLES, catalog_graph  # noqa: E402
from graph_pressure.moduli import make_chart  # noqa: E402


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def catalog():
    """``{id: (graph, system, closed forms)}`` for the four examples."""
    return {eid: catalog_graph(eid) for eid in EXAMPLES}


@pytest.fixture(scope="session")
def charts(catalog):
    return {eid: make_chart(sys, forms.dependent) for eid, (_, sys, forms) in catalog.items()}


@pytest.fixture()
def graph_file(tmp_path: Path):
    def write(text: str, name: str = "g.graph") -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return write
