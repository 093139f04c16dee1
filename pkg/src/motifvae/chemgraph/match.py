"""Subgraph monomorphism and automorphism search.

Matching semantics: an injective atom mapping that preserves element,
formal charge, and every needle bond (with equal order). Extra haystack
bonds between mapped atoms are allowed, so this is edge-subgraph
(monomorphism) matching, not induced matching.
"""

from __future__ import annotations

from .graph import MolGraph


def _label(mol: MolGraph, i: int) -> tuple[str, int]:
    a = mol.atoms[i]
    return (a.symbol, a.charge)


def _match_order(needle: MolGraph) -> list[int]:
    """Atom order where each atom after a component root touches a prior atom."""
    order: list[int] = []
    placed: set[int] = set()
    for comp in needle.connected_components():
        # Root at the highest-degree atom: more constrained first.
        root = max(comp, key=lambda v: (needle.degree(v), -v))
        queue = [root]
        placed.add(root)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u, _ in sorted(needle.neighbors(v), key=lambda t: -needle.degree(t[0])):
                if u not in placed:
                    placed.add(u)
                    queue.append(u)
    return order


def find_monomorphism(
    haystack: MolGraph,
    needle: MolGraph,
    fixed: dict[int, int] | None = None,
) -> dict[int, int] | None:
    """First needle->haystack monomorphism found, or None.

    ``fixed`` pre-assigns needle atoms to haystack atoms; the search only
    returns mappings extending it.
    """
    if needle.num_atoms > haystack.num_atoms or needle.num_bonds > haystack.num_bonds:
        return None
    order = _match_order(needle)
    mapping: dict[int, int] = {}
    used: set[int] = set()
    fixed = fixed or {}

    for n_atom, h_atom in fixed.items():
        if _label(needle, n_atom) != _label(haystack, h_atom):
            return None

    def candidates(n_atom: int):
        anchors = [
            (u, order_)
            for u, order_ in needle.neighbors(n_atom)
            if u in mapping
        ]
        if anchors:
            u, bond_order = anchors[0]
            return [
                h
                for h, h_order in haystack.neighbors(mapping[u])
                if h_order == bond_order
            ]
        return range(haystack.num_atoms)

    def feasible(n_atom: int, h_atom: int) -> bool:
        if h_atom in used:
            return False
        if _label(needle, n_atom) != _label(haystack, h_atom):
            return False
        if haystack.degree(h_atom) < needle.degree(n_atom):
            return False
        for u, bond_order in needle.neighbors(n_atom):
            if u in mapping:
                h_bond = haystack.bond_between(h_atom, mapping[u])
                if h_bond is None or h_bond.order != bond_order:
                    return False
        return True

    def search(depth: int) -> bool:
        if depth == len(order):
            return True
        n_atom = order[depth]
        if n_atom in fixed:
            h_atom = fixed[n_atom]
            if feasible(n_atom, h_atom):
                mapping[n_atom] = h_atom
                used.add(h_atom)
                if search(depth + 1):
                    return True
                del mapping[n_atom]
                used.discard(h_atom)
            return False
        for h_atom in candidates(n_atom):
            if feasible(n_atom, h_atom):
                mapping[n_atom] = h_atom
                used.add(h_atom)
                if search(depth + 1):
                    return True
                del mapping[n_atom]
                used.discard(h_atom)
        return False

    return dict(mapping) if search(0) else None


def contains_subgraph(haystack: MolGraph, needle: MolGraph) -> bool:
    """True iff needle embeds into haystack preserving labels and bond orders."""
    return find_monomorphism(haystack, needle) is not None


def has_automorphism_mapping(mol: MolGraph, a: int, b: int) -> bool:
    """True iff some automorphism of mol maps atom a to atom b."""
    if a == b:
        return True
    return find_monomorphism(mol, mol, fixed={a: b}) is not None


def enumerate_automorphisms(mol: MolGraph, limit: int | None = None):
    """Yield automorphisms of mol as tuples (image of each atom).

    A self-monomorphism over all atoms is bijective and preserves bond
    count, hence is an automorphism.
    """
    order = _match_order(mol)
    mapping: dict[int, int] = {}
    used: set[int] = set()
    found = 0

    def feasible(n_atom: int, h_atom: int) -> bool:
        if h_atom in used:
            return False
        if _label(mol, n_atom) != _label(mol, h_atom):
            return False
        if mol.degree(h_atom) != mol.degree(n_atom):
            return False
        for u, bond_order in mol.neighbors(n_atom):
            if u in mapping:
                h_bond = mol.bond_between(h_atom, mapping[u])
                if h_bond is None or h_bond.order != bond_order:
                    return False
        return True

    def search(depth: int):
        nonlocal found
        if limit is not None and found >= limit:
            return
        if depth == len(order):
            found += 1
            yield tuple(mapping[v] for v in range(mol.num_atoms))
            return
        n_atom = order[depth]
        for h_atom in range(mol.num_atoms):
            if feasible(n_atom, h_atom):
                mapping[n_atom] = h_atom
                used.add(h_atom)
                yield from search(depth + 1)
                del mapping[n_atom]
                used.discard(h_atom)

    yield from search(0)
