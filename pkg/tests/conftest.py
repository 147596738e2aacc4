from pathlib import Path

import numpy as np
import pytest

from ppiaudit import kernels
from ppiaudit._accel import HAS_NUMBA
from ppiaudit.annotations import AnnotationStore
from ppiaudit.embeddings import EmbeddingMatrix
from ppiaudit.graph_io import WeightedGraph

DATA = Path(__file__).parent / "data"
SYNTH30 = DATA / "synth30"


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PPIAUDIT_CACHE_DIR", str(tmp_path / "emb_cache"))


BACKENDS = ["numpy", "numba"] if HAS_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the kernel dispatchers through one backend for the test."""
    monkeypatch.setattr(kernels, "_active", kernels.IMPLS[request.param])
    return request.param


def five_node_graph() -> WeightedGraph:
    """Triangle a-b-c with a tail c-d-e."""
    return WeightedGraph({
        ("a", "b"): 1.0, ("a", "c"): 0.8, ("b", "c"): 0.6, ("c", "d"): 0.4, ("d", "e"): 0.2,
    })


def five_node_annotations() -> AnnotationStore:
    return AnnotationStore.from_mapping(
        {"a": {"T1", "T2"}, "b": {"T1"}, "c": {"T1", "T3"}, "d": {"T3"}},
        {"T1": "ribosome", "T2": "translation", "T3": "nucleus"},
    )


def five_node_embeddings() -> EmbeddingMatrix:
    vecs = {"a": (1.0, 0.0), "b": (1.0, 0.0), "c": (1.0, 1.0), "d": (0.0, 1.0), "e": (0.0, 0.0)}
    nodes = tuple(sorted(vecs))
    return EmbeddingMatrix(nodes, np.array([vecs[n] for n in nodes]))


def barbell(bridge: float = 0.05) -> WeightedGraph:
    """Two unit-weight triangles joined by one weak edge c-d."""
    e = {("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0,
         ("d", "e"): 1.0, ("d", "f"): 1.0, ("e", "f"): 1.0, ("c", "d"): bridge}
    return WeightedGraph(e)


def three_module_graph() -> WeightedGraph:
    """p weakly held in {p,a,b}, with two links into the triangle {x,y,z}; {u,v} separate."""
    return WeightedGraph({
        ("p", "a"): 1.0, ("a", "b"): 1.0,
        ("x", "y"): 1.0, ("y", "z"): 1.0, ("x", "z"): 1.0,
        ("p", "x"): 1.0, ("p", "y"): 1.0,
        ("u", "v"): 1.0,
    })


def three_module_annotations() -> AnnotationStore:
    return AnnotationStore.from_mapping(
        {"p": {"T"}, "x": {"T"}, "y": {"T"}, "z": {"T"}, "a": {"S"}, "b": {"S"}, "u": {"R"}, "v": {"R"}}
    )


@pytest.fixture
def synth30_config(tmp_path):
    from ppiaudit.config import load_config

    return load_config(SYNTH30 / "pipeline.cfg", {"out": str(tmp_path / "out")})
