"""Atom featurization and disjoint-union graph batching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chemgraph import MolGraph, ValenceTable, aromatic_flags, perceive_rings

RING_SIZES = (3, 4, 5, 6, 7, 8)


def base_feature_dim(num_elements: int) -> int:
    # one-hot element + charge + mass + max valence + isotope + aromatic + ring flags
    return num_elements + 5 + len(RING_SIZES)


def atom_features(
    mol: MolGraph,
    elements: tuple[str, ...],
    table: ValenceTable,
    dtype=np.float64,
) -> np.ndarray:
    """Per-atom chemical feature rows (without the motif embedding).

    Raises KeyError for elements outside the configured list.
    """
    element_index = {symbol: i for i, symbol in enumerate(elements)}
    info = perceive_rings(mol)
    aromatic = aromatic_flags(mol)
    out = np.zeros((mol.num_atoms, base_feature_dim(len(elements))), dtype=dtype)
    n_el = len(elements)
    for i, atom in enumerate(mol.atoms):
        try:
            out[i, element_index[atom.symbol]] = 1.0
        except KeyError:
            raise KeyError(f"element {atom.symbol!r} outside configured classes") from None
        out[i, n_el] = atom.charge
        out[i, n_el + 1] = table.mass(atom.symbol) / 100.0
        out[i, n_el + 2] = table.max_valence(atom.symbol, atom.charge)
        out[i, n_el + 3] = 1.0 if atom.isotope is not None else 0.0
        out[i, n_el + 4] = 1.0 if aromatic[i] else 0.0
        for k, size in enumerate(RING_SIZES):
            if size in info.ring_sizes[i]:
                out[i, n_el + 5 + k] = 1.0
    return out


@dataclass
class GraphBatch:
    """Disjoint union of graphs with per-node graph ids and typed edge lists."""

    features: np.ndarray  # (N, base_dim)
    motif_ids: np.ndarray  # (N,) vocabulary index, or vocab_size for "no motif"
    node_graph: np.ndarray  # (N,) graph id per node
    edges: dict[int, tuple[np.ndarray, np.ndarray]]  # order -> (src, dst), directed
    offsets: np.ndarray  # (G,) node offset of each graph
    n_nodes: int
    n_graphs: int


def build_graph_batch(
    items: list[tuple[MolGraph, list[int | None]]],
    elements: tuple[str, ...],
    vocab_size: int,
    table: ValenceTable,
    dtype=np.float64,
) -> GraphBatch:
    """Batch (graph, per-atom motif index) pairs into one disjoint union.

    Empty graphs are allowed; they contribute no nodes but keep a graph id
    (their pooled representation is substituted downstream).
    """
    feats = []
    motif_ids = []
    node_graph = []
    srcs: dict[int, list[int]] = {1: [], 2: [], 3: []}
    dsts: dict[int, list[int]] = {1: [], 2: [], 3: []}
    offsets = []
    offset = 0
    for gid, (mol, motif_of) in enumerate(items):
        offsets.append(offset)
        if mol.num_atoms == 0:
            continue
        feats.append(atom_features(mol, elements, table, dtype))
        motif_ids.extend(
            vocab_size if motif_of[i] is None else motif_of[i]
            for i in range(mol.num_atoms)
        )
        node_graph.extend([gid] * mol.num_atoms)
        for bond in mol.bonds:
            srcs[bond.order].extend((offset + bond.a, offset + bond.b))
            dsts[bond.order].extend((offset + bond.b, offset + bond.a))
        offset += mol.num_atoms
    features = (
        np.concatenate(feats, axis=0)
        if feats
        else np.zeros((0, base_feature_dim(len(elements))), dtype=dtype)
    )
    return GraphBatch(
        features=features,
        motif_ids=np.asarray(motif_ids, dtype=np.int64),
        node_graph=np.asarray(node_graph, dtype=np.int64),
        edges={
            order: (
                np.asarray(srcs[order], dtype=np.int64),
                np.asarray(dsts[order], dtype=np.int64),
            )
            for order in (1, 2, 3)
        },
        offsets=np.asarray(offsets, dtype=np.int64),
        n_nodes=offset,
        n_graphs=len(items),
    )
