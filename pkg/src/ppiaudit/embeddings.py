"""Text profiles and TF-IDF + truncated-SVD node embeddings."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.utils.extmath import randomized_svd

from .annotations import GENERIC_ROOTS, AnnotationStore
from .graph_io import WeightedGraph

logger = logging.getLogger(__name__)

CACHE_ENV = "PPIAUDIT_CACHE_DIR"
_TOKEN = re.compile(r"[a-z0-9]+")
_CACHE_VERSION = "1"


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


@dataclass
class EmbeddingMatrix:
    nodes: tuple[str, ...]
    vectors: np.ndarray  # (n_nodes, dimension)
    components: np.ndarray | None = None  # (dimension, vocab) when freshly fitted

    def __post_init__(self):
        self.index = {n: i for i, n in enumerate(self.nodes)}
        norms = np.linalg.norm(self.vectors, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        self.unit = self.vectors / safe[:, None]
        self.unit[norms == 0] = 0.0

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def vector(self, node: str) -> np.ndarray:
        return self.vectors[self.index[node]]

    def unit_rows(self, nodes) -> np.ndarray:
        return self.unit[[self.index[n] for n in nodes]]

    def aligned_unit(self, nodes: tuple[str, ...]) -> np.ndarray:
        """Unit rows in ``nodes`` order, cached for the last order requested."""
        key = getattr(self, "_aligned_key", None)
        if key is not nodes and key != nodes:
            self._aligned = self.unit if nodes == self.nodes else self.unit_rows(nodes)
            self._aligned_key = nodes
        return self._aligned

    def similarity(self, a: str, b: str) -> float:
        """Cosine similarity clipped at 0."""
        return max(0.0, float(self.unit[self.index[a]] @ self.unit[self.index[b]]))


def build_text_profiles(graph: WeightedGraph, ann: AnnotationStore) -> dict[str, str]:
    profiles = {}
    for node in graph.nodes:
        terms = sorted(t for t in ann.terms(node) if t not in GENERIC_ROOTS)
        profiles[node] = " ".join([node, *(ann.label(t) for t in terms)])
    return profiles


def fit_embeddings(profiles: Mapping[str, str], d: int = 64, seed: int = 0) -> EmbeddingMatrix:
    """TF-IDF (smoothed IDF, L2 rows) followed by seeded randomized SVD.

    Row ``i`` of the result is ``U_i * S``; dimensions beyond the attainable
    rank are zero. Identical profiles map to identical vectors.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not profiles:
        raise ValueError("need at least one profile")
    nodes = tuple(profiles)
    docs = [profiles[n] for n in nodes]
    vec = TfidfVectorizer(
        tokenizer=tokenize, token_pattern=None, lowercase=False, smooth_idf=True, norm="l2"
    )
    try:
        x = vec.fit_transform(docs)
    except ValueError:
        warnings.warn("empty vocabulary; returning all-zero embeddings", RuntimeWarning, stacklevel=2)
        return EmbeddingMatrix(nodes, np.zeros((len(nodes), d)), np.zeros((d, 0)))
    rank = min(d, x.shape[0], x.shape[1])
    u, s, vt = randomized_svd(x, n_components=rank, n_iter=7, random_state=seed)
    # X V^T equals U S; projecting one canonical row per distinct document
    # keeps identical profiles bit-identical
    first = {}
    canon = np.array([first.setdefault(doc, i) for i, doc in enumerate(docs)])
    out = np.zeros((len(nodes), d))
    out[:, :rank] = (x @ vt.T)[canon]
    comps = np.zeros((d, x.shape[1]))
    comps[:rank] = vt
    return EmbeddingMatrix(nodes, out, comps)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ppiaudit"


def profile_hash(profiles: Mapping[str, str], d: int, seed: int) -> str:
    h = hashlib.sha256()
    h.update(json.dumps([_CACHE_VERSION, d, seed], separators=(",", ":")).encode())
    for node in profiles:
        h.update(node.encode())
        h.update(b"\x00")
        h.update(profiles[node].encode())
        h.update(b"\x01")
    return h.hexdigest()


def cached_embeddings(
    profiles: Mapping[str, str],
    d: int = 64,
    seed: int = 0,
    cache_dir: str | Path | None = None,
    rebuild: bool = False,
) -> tuple[EmbeddingMatrix, bool]:
    """Fit or load embeddings keyed by profile content; returns ``(matrix, hit)``."""
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    key = profile_hash(profiles, d, seed)
    path = cache_dir / f"emb_{key[:32]}.npz"
    if path.exists() and not rebuild:
        try:
            with np.load(path, allow_pickle=False) as z:
                nodes = tuple(str(x) for x in z["nodes"])
                if nodes == tuple(profiles):
                    return EmbeddingMatrix(nodes, z["vectors"]), True
        except (OSError, KeyError, ValueError):
            logger.warning("ignoring unreadable embedding cache %s", path)
    emb = fit_embeddings(profiles, d=d, seed=seed)
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, nodes=np.array(emb.nodes, dtype=str), vectors=emb.vectors)
        os.replace(tmp, path)
    except OSError as exc:
        logger.warning("could not write embedding cache: %s", exc)
    return emb, False


def clear_cache(cache_dir: str | Path | None = None) -> int:
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    n = 0
    if cache_dir.is_dir():
        for p in cache_dir.glob("emb_*.npz"):
            p.unlink()
            n += 1
    return n
