"""Text file formats and content hashing.

Embeddings travel in the word2vec text format: a header line ``n d``
followed by one ``node_id v_1 ... v_d`` line per node, values printed with
six significant digits.  Label files carry ``node_id label [label ...]``
per line.  Both formats treat ``#``-prefixed lines as comments and ignore
blank lines; node ids are single whitespace-free tokens.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .errors import ParseError


def file_sha256(path: str | Path) -> str:
    """Hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def save_embedding(
    path: str | Path, node_ids: tuple[str, ...], matrix: np.ndarray
) -> None:
    """Write an embedding in word2vec text format."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(node_ids):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match {len(node_ids)} ids"
        )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for name, row in zip(node_ids, matrix):
            values = " ".join(format(v, ".6g") for v in row)
            handle.write(f"{name} {values}\n")


def load_embedding(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a word2vec text embedding back as (node ids, dense matrix)."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.readlines()
    header: tuple[int, int] | None = None
    names: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if header is None:
            if len(parts) != 2:
                raise ParseError(
                    f"{path}: expected 'n d' header, got {text!r}", number
                )
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ParseError(
                    f"{path}: non-integer header {text!r}", number
                ) from None
            if header[0] < 0 or header[1] < 1:
                raise ParseError(f"{path}: invalid header {text!r}", number)
            continue
        name = parts[0]
        if name in seen:
            raise ParseError(f"{path}: duplicate node id {name!r}", number)
        seen.add(name)
        if len(parts) - 1 != header[1]:
            raise ParseError(
                f"{path}: node {name!r} has {len(parts) - 1} values, "
                f"expected {header[1]}",
                number,
            )
        try:
            rows.append(np.array(parts[1:], dtype=np.float64))
        except ValueError:
            raise ParseError(
                f"{path}: non-numeric value in row for node {name!r}", number
            ) from None
        names.append(name)
    if header is None:
        raise ParseError(f"{path}: empty embedding file")
    if len(names) != header[0]:
        raise ParseError(
            f"{path}: header promises {header[0]} rows, found {len(names)}"
        )
    matrix = (
        np.vstack(rows) if rows else np.zeros((0, header[1]), dtype=np.float64)
    )
    return tuple(names), matrix


def load_labels(source) -> list[tuple[str, tuple[str, ...]]]:
    """Read a label file as (node id, label tokens) records, in file order.

    ``source`` is a path or an open text iterable.  Every non-comment line
    needs an id and at least one label token.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return load_labels(handle)
    records: list[tuple[str, tuple[str, ...]]] = []
    for number, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) < 2:
            raise ParseError(
                f"label line needs 'node_id label [label ...]', got {text!r}",
                number,
            )
        records.append((parts[0], tuple(parts[1:])))
    return records
