"""Per-line embeddings with a pluggable backend.

The local backend hashes token features into a fixed number of buckets with
a seeded keyed hash: deterministic, offline, and cheap. The remote backend
speaks a small HTTP contract (POST /embed) so any transformer service can be
dropped in; which one produced a run is recorded as backend_id, never
inferred.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import httpx
import numpy as np

from . import lexer
from .config import EmbedConfig
from .errors import DimMismatch, RemoteUnavailable
from .normalize import NormalizedLine

LOCAL_BACKEND_ID = "local"
REMOTE_BACKEND_ID = "remote"


@dataclass(frozen=True)
class LineVector:
    submission_id: str
    index: int
    values: np.ndarray  # unit L2 norm, shape (dim,)
    backend_id: str
    dim: int


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec = vec.copy()
        vec[0] = 1.0
        return vec
    return vec / norm


def _line_tokens(text: str) -> List[str]:
    return [
        tok.text
        for tok in lexer.scan(text).tokens
        if tok.kind not in ("indent", "ws", "comment", "newline")
    ]


class LocalHashBackend:
    """Feature-hash embedding: unigrams, bigrams, statement kind, and
    decay-weighted unigrams of the two neighboring lines."""

    kind = "local-hash"

    def __init__(self, dim: int = 256, seed: int = 42, decay: float = 0.3):
        self.id = LOCAL_BACKEND_ID
        self.dim = dim
        self.seed = seed
        self.decay = decay
        self._key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
        self._feature_cache: Dict[str, Tuple[int, float]] = {}
        self._line_cache: Dict[Tuple[str, str, str, str], np.ndarray] = {}

    def _slot(self, feature: str) -> Tuple[int, float]:
        hit = self._feature_cache.get(feature)
        if hit is None:
            digest = hashlib.blake2b(
                feature.encode("utf-8"), digest_size=8, key=self._key
            ).digest()
            value = int.from_bytes(digest, "little")
            hit = (value % self.dim, 1.0 if value >> 63 == 0 else -1.0)
            self._feature_cache[feature] = hit
        return hit

    def embed_one(
        self, text: str, stmt_kind: str, prev_text: str, next_text: str
    ) -> np.ndarray:
        cache_key = (text, stmt_kind, prev_text, next_text)
        hit = self._line_cache.get(cache_key)
        if hit is not None:
            return hit
        vec = np.zeros(self.dim, dtype=np.float64)

        def add(feature: str, weight: float) -> None:
            bucket, sign = self._slot(feature)
            vec[bucket] += sign * weight

        tokens = _line_tokens(text)
        for tok in tokens:
            add("u:" + tok, 1.0)
        for left, right in zip(tokens, tokens[1:]):
            add("b:" + left + "\x00" + right, 1.0)
        add("k:" + stmt_kind, 1.0)
        if prev_text:
            for tok in _line_tokens(prev_text):
                add("p:" + tok, self.decay)
        if next_text:
            for tok in _line_tokens(next_text):
                add("n:" + tok, self.decay)

        vec = _unit(vec)
        vec.setflags(write=False)
        self._line_cache[cache_key] = vec
        return vec


class RemoteEmbedBackend:
    """Client for the /embed wire contract, with retry and backoff."""

    kind = "remote"

    def __init__(
        self,
        url: str,
        dim: int = 768,
        max_retries: int = 3,
        base_delay: float = 0.5,
        client: Optional[httpx.Client] = None,
    ):
        self.id = REMOTE_BACKEND_ID
        self.url = url.rstrip("/") + "/embed"
        self.dim = dim
        self.max_retries = max_retries
        self.base_delay = base_delay
        self._client = client or httpx.Client(timeout=30.0)

    def embed_batch(
        self, texts: Sequence[str], contexts: Sequence[Sequence[str]]
    ) -> List[np.ndarray]:
        payload = {"texts": list(texts), "contexts": [list(c) for c in contexts]}
        last_error = "no attempts made"
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.base_delay * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                last_error = str(exc)
                continue
            if resp.status_code != 200:
                last_error = f"HTTP {resp.status_code}"
                continue
            body = resp.json()
            vectors = body.get("vectors")
            dim = body.get("dim")
            if not isinstance(vectors, list) or len(vectors) != len(texts):
                raise RemoteUnavailable(self.id, "malformed /embed response")
            if dim != self.dim:
                raise DimMismatch(self.dim, dim if isinstance(dim, int) else -1)
            out = []
            for row in vectors:
                arr = np.asarray(row, dtype=np.float64)
                if arr.shape != (self.dim,):
                    raise DimMismatch(self.dim, int(arr.shape[-1]) if arr.ndim else 0)
                out.append(_unit(arr))
            return out
        raise RemoteUnavailable(self.id, last_error)


def build_backend(cfg: EmbedConfig):
    if cfg.remote_url:
        return RemoteEmbedBackend(
            cfg.remote_url, dim=cfg.effective_dim(), max_retries=cfg.max_retries
        )
    return LocalHashBackend(
        dim=cfg.effective_dim(), seed=cfg.seed, decay=cfg.context_decay
    )


def _neighbor_texts(
    context: Sequence[NormalizedLine], index: int
) -> Tuple[str, str]:
    prev_text = context[index - 1].text if index > 0 else ""
    next_text = context[index + 1].text if index + 1 < len(context) else ""
    return prev_text, next_text


def embed_line(line: NormalizedLine, context: Sequence[NormalizedLine], backend) -> LineVector:
    """Embed one line given its submission's full normalized line list."""
    prev_text, next_text = _neighbor_texts(context, line.index)
    if isinstance(backend, LocalHashBackend):
        values = backend.embed_one(line.text, line.kind, prev_text, next_text)
    else:
        values = backend.embed_batch([line.text], [[prev_text, next_text]])[0]
    return LineVector(line.submission_id, line.index, values, backend.id, backend.dim)


def embed_corpus(
    lines: Sequence[NormalizedLine],
    backend,
    batch_size: int = 64,
    max_in_flight: int = 4,
) -> List[LineVector]:
    """One vector per line, in input order.

    Lines must arrive grouped by submission with per-submission indexes
    0..n-1 (the normalizer's output shape); neighbors for context are taken
    within each submission only.
    """
    groups: List[List[NormalizedLine]] = []
    for line in lines:
        if line.index == 0 or not groups:
            groups.append([])
        groups[-1].append(line)

    if isinstance(backend, LocalHashBackend):
        out: List[LineVector] = []
        for group in groups:
            for line in group:
                out.append(embed_line(line, group, backend))
        return out

    flat: List[Tuple[NormalizedLine, str, str]] = []
    for group in groups:
        for line in group:
            prev_text, next_text = _neighbor_texts(group, line.index)
            flat.append((line, prev_text, next_text))

    batches = [flat[i : i + batch_size] for i in range(0, len(flat), batch_size)]

    def run(batch: List[Tuple[NormalizedLine, str, str]]) -> List[np.ndarray]:
        return backend.embed_batch(
            [item[0].text for item in batch],
            [[item[1], item[2]] for item in batch],
        )

    results: List[List[np.ndarray]] = [[] for _ in batches]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = {pool.submit(run, batch): k for k, batch in enumerate(batches)}
        for future, k in futures.items():
            results[k] = future.result()

    out = []
    for batch, vectors in zip(batches, results):
        for (line, _prev, _next), values in zip(batch, vectors):
            out.append(
                LineVector(line.submission_id, line.index, values, backend.id, backend.dim)
            )
    return out


def embed_with_fallback(
    lines: Sequence[NormalizedLine], cfg: EmbedConfig
) -> Tuple[List[LineVector], str]:
    """Embed per config; on remote failure fall back to local if allowed.

    Returns (vectors, backend_id). Raises RemoteUnavailable or DimMismatch
    when the remote fails and no fallback is configured.
    """
    backend = build_backend(cfg)
    if isinstance(backend, LocalHashBackend):
        return embed_corpus(lines, backend), backend.id
    try:
        vectors = embed_corpus(
            lines, backend, batch_size=cfg.batch_size, max_in_flight=cfg.max_in_flight
        )
        return vectors, backend.id
    except (RemoteUnavailable, DimMismatch):
        if not cfg.fallback_local:
            raise
        local = LocalHashBackend(
            dim=cfg.dim or 256, seed=cfg.seed, decay=cfg.context_decay
        )
        return embed_corpus(lines, local), local.id
