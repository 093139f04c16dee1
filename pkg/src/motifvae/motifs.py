"""Fragment mining and the motif vocabulary.

Fragmentation rule: delete every acyclic bond with at least one endpoint on
a cycle. The connected components left over are the fragments; the most
common fragments across a corpus form the vocabulary.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .chemgraph import (
    MolGraph,
    has_automorphism_mapping,
    canonical_ranks,
    parse_smiles,
    perceive_rings,
    refined_ranks,
    write_smiles,
)

log = logging.getLogger(__name__)

VOCAB_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Fragment:
    """A connected fragment with provenance into the source molecule.

    ``graph`` atom k corresponds to source atom ``source_atoms[k]``.
    """

    graph: MolGraph
    source_atoms: tuple[int, ...]


@dataclass
class Motif:
    """A vocabulary entry: canonical fragment graph plus corpus statistics."""

    graph: MolGraph
    key: str
    count: int
    vocab_index: int | None = None

    def __eq__(self, other):
        if not isinstance(other, Motif):
            return NotImplemented
        return (
            self.key == other.key
            and self.count == other.count
            and self.vocab_index == other.vocab_index
            and self.graph == other.graph
        )


class MotifVocabulary:
    """Top-n fragments ordered by (count desc, canonical key asc)."""

    def __init__(self, motifs: Iterable[Motif], n: int):
        self.motifs = list(motifs)
        self.n = n
        self._by_key = {m.key: m for m in self.motifs}
        if len(self._by_key) != len(self.motifs):
            raise ValueError("duplicate motif keys")
        for i, m in enumerate(self.motifs):
            if m.vocab_index != i:
                raise ValueError("vocab_index must equal list position")

    def __len__(self) -> int:
        return len(self.motifs)

    def __iter__(self) -> Iterator[Motif]:
        return iter(self.motifs)

    def __getitem__(self, index: int) -> Motif:
        return self.motifs[index]

    def get(self, key: str) -> Motif | None:
        return self._by_key.get(key)

    def __eq__(self, other):
        if not isinstance(other, MotifVocabulary):
            return NotImplemented
        return self.n == other.n and self.motifs == other.motifs

    def to_json(self) -> dict:
        return {
            "version": VOCAB_FORMAT_VERSION,
            "n": self.n,
            "motifs": [
                {"smiles": m.key, "count": m.count, "index": m.vocab_index}
                for m in self.motifs
            ],
        }

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def from_json(cls, data: dict) -> "MotifVocabulary":
        if data.get("version") != VOCAB_FORMAT_VERSION:
            raise ValueError(f"unsupported vocabulary version {data.get('version')!r}")
        motifs = [
            Motif(
                graph=parse_smiles(entry["smiles"]),
                key=entry["smiles"],
                count=entry["count"],
                vocab_index=entry["index"],
            )
            for entry in data["motifs"]
        ]
        return cls(motifs, data["n"])

    @classmethod
    def load(cls, path: str | Path) -> "MotifVocabulary":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MotifOccurrence:
    """One vocabulary motif found in a molecule.

    ``atoms[k]`` is the source atom playing the role of atom k in the
    motif's canonical graph.
    """

    vocab_index: int
    atoms: tuple[int, ...]


class MotifAnnotation:
    """Atom-disjoint motif occurrences of a molecule."""

    def __init__(self, mol: MolGraph, occurrences: Iterable[MotifOccurrence]):
        self.occurrences = tuple(occurrences)
        self._atom_info: dict[int, tuple[int, int, int]] = {}
        for occ_id, occ in enumerate(self.occurrences):
            for position, atom in enumerate(occ.atoms):
                if atom in self._atom_info:
                    raise ValueError(f"atom {atom} in two occurrences")
                self._atom_info[atom] = (occ.vocab_index, position, occ_id)

    def atom_motif(self, atom: int) -> tuple[int, int] | None:
        """(vocab_index, position within motif) or None for uncovered atoms."""
        info = self._atom_info.get(atom)
        return None if info is None else info[:2]

    def occurrence_of(self, atom: int) -> int | None:
        info = self._atom_info.get(atom)
        return None if info is None else info[2]

    @property
    def covered_atoms(self) -> frozenset[int]:
        return frozenset(self._atom_info)


def fragment(mol: MolGraph) -> list[Fragment]:
    """Break all acyclic bonds adjacent to a cycle; return the components.

    Molecules without ring-adjacent acyclic bonds come back whole.
    """
    info = perceive_rings(mol)
    keep = []
    for idx, bond in enumerate(mol.bonds):
        cut = (
            idx not in info.ring_bonds
            and (info.atom_on_ring[bond.a] or info.atom_on_ring[bond.b])
        )
        if not cut:
            keep.append(bond)
    pruned = MolGraph(mol.atoms, keep)
    return [
        Fragment(*pruned.subgraph(component))
        for component in pruned.connected_components()
    ]


def mine_vocabulary(corpus: Iterable[MolGraph], n: int) -> MotifVocabulary:
    """Count canonical fragment keys over a corpus and keep the n most common.

    Ties on count are broken by ascending canonical key. ``n = 0`` yields an
    empty vocabulary.
    """
    if n < 0:
        raise ValueError("vocabulary size must be non-negative")
    counts: Counter[str] = Counter()
    for mol in corpus:
        for frag in fragment(mol):
            counts[write_smiles(frag.graph)] += 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:n]
    motifs = [
        Motif(graph=parse_smiles(key), key=key, count=count, vocab_index=i)
        for i, (key, count) in enumerate(ranked)
    ]
    return MotifVocabulary(motifs, n)


def annotate(mol: MolGraph, vocab: MotifVocabulary) -> MotifAnnotation:
    """Mark which atoms are covered by vocabulary motifs.

    Each fragment whose canonical key is in the vocabulary becomes one
    occurrence; its atoms map to motif positions through the canonical
    isomorphism.
    """
    occurrences = []
    for frag in fragment(mol):
        key = write_smiles(frag.graph)
        motif = vocab.get(key)
        if motif is None:
            continue
        mapping = _canonical_isomorphism(frag.graph, motif.graph)
        atoms = [0] * frag.graph.num_atoms
        for frag_idx, motif_idx in mapping.items():
            atoms[motif_idx] = frag.source_atoms[frag_idx]
        occurrences.append(MotifOccurrence(motif.vocab_index, tuple(atoms)))
    return MotifAnnotation(mol, occurrences)


def _canonical_isomorphism(frag: MolGraph, motif: MolGraph) -> dict[int, int]:
    """fragment atom -> motif atom, matching canonical ranks on both sides.

    Both graphs share a canonical SMILES, so equal canonical ranks identify
    an isomorphism; this is verified before returning.
    """
    frag_ranks = canonical_ranks(frag)
    motif_ranks = canonical_ranks(motif)
    motif_by_rank = {r: i for i, r in enumerate(motif_ranks)}
    mapping = {i: motif_by_rank[r] for i, r in enumerate(frag_ranks)}
    for bond in frag.bonds:
        image = motif.bond_between(mapping[bond.a], mapping[bond.b])
        if image is None or image.order != bond.order:
            raise AssertionError("canonical rank mapping is not an isomorphism")
    if frag.num_bonds != motif.num_bonds:
        raise AssertionError("fragment/motif bond counts differ")
    return mapping


def symmetry_classes(graph: MolGraph) -> list[tuple[int, ...]]:
    """Partition atoms into automorphism orbits.

    Refinement signatures give candidate classes; members are then verified
    against a class representative by exact automorphism search, so classes
    are true orbits at any size.
    """
    if graph.num_atoms == 0:
        return []
    ranks = refined_ranks(graph)
    by_rank: dict[int, list[int]] = {}
    for atom, rank in enumerate(ranks):
        by_rank.setdefault(rank, []).append(atom)
    orbits: list[list[int]] = []
    for rank in sorted(by_rank):
        reps: list[list[int]] = []
        for atom in sorted(by_rank[rank]):
            for members in reps:
                if has_automorphism_mapping(graph, atom, members[0]):
                    members.append(atom)
                    break
            else:
                reps.append([atom])
        orbits.extend(reps)
    orbits.sort(key=lambda members: members[0])
    return [tuple(members) for members in orbits]


def reassemble(mol: MolGraph, fragments: list[Fragment]) -> MolGraph:
    """Rebuild the molecule from fragments plus the bonds that were cut.

    Used to check the fragmentation partition property.
    """
    n = sum(f.graph.num_atoms for f in fragments)
    if n != mol.num_atoms:
        raise ValueError("fragments do not partition the molecule")
    atoms: list = [None] * n
    bonds = []
    covered_pairs = set()
    for frag in fragments:
        for k, src in enumerate(frag.source_atoms):
            atoms[src] = frag.graph.atoms[k]
        for bond in frag.graph.bonds:
            a, b = frag.source_atoms[bond.a], frag.source_atoms[bond.b]
            bonds.append(type(bond)(min(a, b), max(a, b), bond.order))
            covered_pairs.add((min(a, b), max(a, b)))
    for bond in mol.bonds:
        if (bond.a, bond.b) not in covered_pairs:
            bonds.append(bond)
    return MolGraph(atoms, bonds)
