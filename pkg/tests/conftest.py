import json
from pathlib import Path

import pytest

from vibroscene import CorpusManifest, MockBackend
from vibroscene.pipeline import EngineState, build_engine

REPO = Path(__file__).resolve().parent.parent
SCENES = REPO / "scenes"
SCRIPTS = REPO / "scripts"
CORPUS = REPO / "corpus" / "manifest.json"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

BUNDLED_SCENES = ["study2_smartphone", "study2_speaker", "study2_washing_machine"]


def scene_bytes(name: str) -> bytes:
    return (SCENES / f"{name}.json").read_bytes()


def script_bytes(name: str) -> bytes:
    return (SCRIPTS / f"{name}.json").read_bytes()


def golden_bytes(name: str) -> bytes:
    return (FIXTURES / f"{name}.inferred.json").read_bytes()


def probe_points(name: str) -> list[tuple[str, tuple[float, float, float]]]:
    """The designated touch probes: the touch events of the bundled script."""
    doc = json.loads(script_bytes(name))
    return [(e["object"], tuple(e["point"]))
            for e in doc["events"] if e["type"] == "touch"]


def make_engine(name: str) -> EngineState:
    return build_engine(scene_bytes(name), MockBackend(), CorpusManifest.load(CORPUS))


@pytest.fixture(scope="session")
def corpus() -> CorpusManifest:
    return CorpusManifest.load(CORPUS)


@pytest.fixture(scope="session")
def smartphone_engine() -> EngineState:
    return make_engine("study2_smartphone")


@pytest.fixture(scope="session")
def bundled_engines() -> dict[str, EngineState]:
    return {name: make_engine(name) for name in BUNDLED_SCENES}
