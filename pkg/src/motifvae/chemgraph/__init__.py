"""Molecular graphs: SMILES I/O, rings, valence, canonical form, matching."""

from .elements import Element, HYDROGEN_MASS, ValenceTable
from .graph import (
    Atom,
    Bond,
    MolGraph,
    RingInfo,
    aromatic_flags,
    free_valence,
    implicit_hydrogens,
    molecular_weight,
    perceive_rings,
    ring_count,
    validate_molecule,
)
from .canon import canonical_ranks, refined_ranks, write_smiles
from .match import (
    contains_subgraph,
    enumerate_automorphisms,
    find_monomorphism,
    has_automorphism_mapping,
)
from .io import iter_smiles_file, read_molecules
from .smiles import SmilesError, parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "Element",
    "HYDROGEN_MASS",
    "MolGraph",
    "RingInfo",
    "SmilesError",
    "ValenceTable",
    "aromatic_flags",
    "canonical_ranks",
    "contains_subgraph",
    "enumerate_automorphisms",
    "find_monomorphism",
    "free_valence",
    "has_automorphism_mapping",
    "implicit_hydrogens",
    "iter_smiles_file",
    "molecular_weight",
    "parse_smiles",
    "perceive_rings",
    "read_molecules",
    "refined_ranks",
    "ring_count",
    "validate_molecule",
    "write_smiles",
]
