"""Extended edge-list reading and writing for multi-layer networks.

The on-disk format is header-free and whitespace-separated, one record
per line: ``layer src dst [weight]``, all indices 1-based.  Lines whose
first non-blank character is ``#`` are comments.  A record with a
positive (or absent) weight marks an edge; non-positive weights mark
explicit non-edges.  Directed records are symmetrized by OR, self-loops
are dropped, and duplicates are idempotent.
"""

from __future__ import annotations

from typing import IO, Optional, Union

import numpy as np

from .model import CommunityLabels, MultiLayerNetwork

__all__ = [
    "EdgeListError",
    "load_multilayer_edgelist",
    "write_multilayer_edgelist",
    "write_labels",
]


class EdgeListError(ValueError):
    """Malformed record or index outside the declared dimensions."""


def _parse_index(token: str, what: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise EdgeListError(f"line {lineno}: {what} {token!r} is not an integer") from None
    if value < 1:
        raise EdgeListError(f"line {lineno}: {what} must be a positive 1-based index, got {value}")
    return value


def load_multilayer_edgelist(
    path: Union[str, IO[str]],
    n: Optional[int] = None,
    L: Optional[int] = None,
) -> MultiLayerNetwork:
    """Read a multi-layer network from an extended edge-list file.

    ``n`` and ``L`` default to the maximum observed indices (observed
    means any well-formed record, including explicit non-edges).  When
    declared, records beyond them are errors reported with their line
    number.
    """
    if isinstance(path, str):
        with open(path, "r", encoding="utf-8") as fh:
            return load_multilayer_edgelist(fh, n=n, L=L)
    records = []
    max_node = 0
    max_layer = 0
    for lineno, raw in enumerate(path, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (3, 4):
            raise EdgeListError(
                f"line {lineno}: expected 'layer src dst [weight]', got {len(tokens)} fields"
            )
        layer = _parse_index(tokens[0], "layer", lineno)
        src = _parse_index(tokens[1], "src", lineno)
        dst = _parse_index(tokens[2], "dst", lineno)
        weight = 1.0
        if len(tokens) == 4:
            try:
                weight = float(tokens[3])
            except ValueError:
                raise EdgeListError(
                    f"line {lineno}: weight {tokens[3]!r} is not a number"
                ) from None
        if L is not None and layer > L:
            raise EdgeListError(f"line {lineno}: layer {layer} exceeds declared L={L}")
        if n is not None and max(src, dst) > n:
            raise EdgeListError(
                f"line {lineno}: node {max(src, dst)} exceeds declared n={n}"
            )
        max_layer = max(max_layer, layer)
        max_node = max(max_node, src, dst)
        records.append((layer, src, dst, weight))
    n_eff = n if n is not None else max_node
    L_eff = L if L is not None else max_layer
    if n_eff <= 0 or L_eff <= 0:
        raise EdgeListError("empty edge list and no n/L declared")
    layers = [np.zeros((n_eff, n_eff), dtype=np.uint8) for _ in range(L_eff)]
    for layer, src, dst, weight in records:
        if weight <= 0.0 or src == dst:
            continue
        A = layers[layer - 1]
        A[src - 1, dst - 1] = 1
        A[dst - 1, src - 1] = 1
    return MultiLayerNetwork(n=n_eff, L=L_eff, layers=layers)


def write_multilayer_edgelist(net: MultiLayerNetwork, target: Union[str, IO[str]]) -> None:
    """Write one ``layer src dst`` line per undirected edge, 1-based, sorted."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            write_multilayer_edgelist(net, fh)
        return
    for ell, A in enumerate(net.layers, start=1):
        rows, cols = np.nonzero(np.triu(A, 1))
        for i, j in zip(rows, cols):
            target.write(f"{ell} {i + 1} {j + 1}\n")


def write_labels(labels: CommunityLabels, target: Union[str, IO[str]]) -> None:
    """Write ``node,label`` CSV rows, both 1-based."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            write_labels(labels, fh)
        return
    target.write("node,label\n")
    for i, lab in enumerate(labels.labels, start=1):
        target.write(f"{i},{int(lab)}\n")
