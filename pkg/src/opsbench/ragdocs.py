"""Lexical search over the bundled platform documentation.

Documents are markdown files split into heading-delimited chunks; ranking is
cosine similarity of term-frequency vectors over lowercased word tokens.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


@dataclass(frozen=True)
class DocChunk:
    chunk_id: str
    text: str


@dataclass(frozen=True)
class ScoredChunk:
    chunk_id: str
    score: float
    text: str


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _split_chunks(doc_id: str, text: str) -> list[DocChunk]:
    # Split on H2 headings; the preamble (title + intro) is chunk 0.
    parts = re.split(r"(?m)^## ", text)
    chunks = []
    for i, part in enumerate(parts):
        body = part.strip()
        if not body:
            continue
        if i > 0:
            body = "## " + body
        chunks.append(DocChunk(chunk_id=f"{doc_id}#{i}", text=body))
    return chunks


def load_corpus(doc_dir: str | Path | None = None) -> list[DocChunk]:
    """Load the documentation corpus, bundled by default."""
    chunks: list[DocChunk] = []
    if doc_dir is not None:
        paths = sorted(Path(doc_dir).glob("*.md"))
        for path in paths:
            chunks.extend(_split_chunks(path.stem, path.read_text(encoding="utf-8")))
        return chunks
    root = importlib_resources.files("opsbench.resources").joinpath("docs")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".md"):
            stem = entry.name[: -len(".md")]
            chunks.extend(_split_chunks(stem, entry.read_text(encoding="utf-8")))
    return chunks


def _cosine(query_tf: Counter, chunk_tf: Counter) -> float:
    common = set(query_tf) & set(chunk_tf)
    dot = sum(query_tf[t] * chunk_tf[t] for t in common)
    if dot == 0:
        return 0.0
    qnorm = math.sqrt(sum(v * v for v in query_tf.values()))
    cnorm = math.sqrt(sum(v * v for v in chunk_tf.values()))
    return dot / (qnorm * cnorm)


def search(query: str, corpus: list[DocChunk], k: int = 3) -> list[ScoredChunk]:
    """Top-k chunks by cosine score, ties broken by chunk id."""
    if not corpus:
        raise ValueError("corpus is empty")
    query_tf = Counter(tokenize(query))
    scored = [
        ScoredChunk(
            chunk_id=chunk.chunk_id,
            score=_cosine(query_tf, Counter(tokenize(chunk.text))),
            text=chunk.text,
        )
        for chunk in corpus
    ]
    scored.sort(key=lambda s: (-s.score, s.chunk_id))
    return scored[: max(0, min(k, len(scored)))]
