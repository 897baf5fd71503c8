from __future__ import annotations

from pathlib import Path
from types import SimpleNamespace

import pytest

from mtmorph import fixtures as fixture_pkg
from mtmorph.model import load_metamodel, load_model
from mtmorph.mtl import load_transformation


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return fixture_pkg.fixture_dir("class2relational")


@pytest.fixture(scope="session")
def c2r(fixture_dir: Path) -> SimpleNamespace:
    """The bundled Class2Relational fixture, fully loaded."""
    src_mm = load_metamodel(fixture_dir / "class.mm.json")
    tgt_mm = load_metamodel(fixture_dir / "relational.mm.json")
    return SimpleNamespace(
        dir=fixture_dir,
        src_mm=src_mm,
        tgt_mm=tgt_mm,
        program=load_transformation(fixture_dir / "class2relational.mtl"),
        model=load_model(fixture_dir / "model.json", src_mm),
    )
