"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from motifvae.chemgraph import (
    Atom,
    Bond,
    MolGraph,
    ValenceTable,
    parse_smiles,
    write_smiles,
)

TABLE = ValenceTable.default()


def random_molecule(
    rng: random.Random,
    n_atoms: int,
    elements: tuple[str, ...] = ("C", "C", "C", "N", "O"),
    extra_bond_tries: int = 2,
) -> MolGraph:
    """A random valid connected molecule built tree-first with ring closures.

    Valence is respected by construction, so the result always passes
    molecule validation.
    """
    atoms = [Atom(rng.choice(elements)) for _ in range(n_atoms)]
    mol = MolGraph(atoms[:1])
    for i in range(1, n_atoms):
        partners = [j for j in range(i) if _free(mol, j) >= 1]
        if not partners:
            break  # everything saturated; settle for a smaller molecule
        mol = mol.with_atom(atoms[i])
        j = rng.choice(partners)
        max_order = min(3, _free(mol, j), TABLE.max_valence(atoms[i].symbol))
        order = 1 if max_order == 1 else rng.choice([1] * 3 + [2, min(2, max_order)])
        order = min(order, max_order)
        mol = mol.with_bond(i, j, order)
    for _ in range(extra_bond_tries):
        candidates = [
            (a, b)
            for a in range(mol.num_atoms)
            for b in range(a + 1, mol.num_atoms)
            if mol.bond_between(a, b) is None
            and _free(mol, a) >= 1
            and _free(mol, b) >= 1
        ]
        if not candidates:
            break
        a, b = rng.choice(candidates)
        mol = mol.with_bond(a, b, 1)
    return mol


def _free(mol: MolGraph, i: int) -> int:
    a = mol.atoms[i]
    return TABLE.max_valence(a.symbol, a.charge) - mol.bond_order_sum(i)


_CORES = (
    "c1ccccc1",
    "c1ccncc1",
    "C1CCCCC1",
    "C1CCNCC1",
    "C1CCOCC1",
    "C1CCCC1",
    "c1ccc2ccccc2c1",
    "C1=CC=CN1",
)

_SIDES = ("C", "CC", "O", "N", "CO", "CN", "C(C)C", "Cl", "F", "CC(C)O", "C=O")


def toy_corpus(rng: random.Random, size: int) -> list[str]:
    """Ring-rich SMILES corpus: decorated ring cores plus random molecules."""
    out = []
    for _ in range(size):
        if rng.random() < 0.8:
            mol = parse_smiles(rng.choice(_CORES))
            for _ in range(rng.randint(0, 3)):
                side = parse_smiles(rng.choice(_SIDES))
                hosts = [i for i in range(mol.num_atoms) if _free(mol, i) >= 1]
                if not hosts:
                    break
                host = rng.choice(hosts)
                offset = mol.num_atoms
                mol = mol.with_atoms(side.atoms).with_bonds(
                    Bond(b.a + offset, b.b + offset, b.order) for b in side.bonds
                )
                anchors = [
                    k + offset
                    for k in range(side.num_atoms)
                    if _free(mol, k + offset) >= 1
                ]
                mol = mol.with_bond(host, rng.choice(anchors), 1)
        else:
            mol = random_molecule(rng, rng.randint(3, 12))
        out.append(write_smiles(mol))
    return out


def permute_molecule(mol: MolGraph, perm: list[int]) -> MolGraph:
    """Relabel atoms: atom i moves to position perm[i]."""
    atoms = [None] * mol.num_atoms
    for i, a in enumerate(mol.atoms):
        atoms[perm[i]] = a
    bonds = [Bond(perm[b.a], perm[b.b], b.order) for b in mol.bonds]
    return MolGraph(atoms, bonds)


def brute_force_ring_bonds(mol: MolGraph) -> frozenset[int]:
    """Bond ids on at least one simple cycle, by exhaustive DFS."""
    bond_id = {}
    for idx, b in enumerate(mol.bonds):
        bond_id[(b.a, b.b)] = idx
        bond_id[(b.b, b.a)] = idx
    on_cycle: set[int] = set()

    def dfs(start, v, visited, path_bonds):
        for u, _ in mol.neighbors(v):
            eid = bond_id[(v, u)]
            if path_bonds and eid == path_bonds[-1]:
                continue
            if u == start and len(path_bonds) >= 2:
                on_cycle.update(path_bonds)
                on_cycle.add(eid)
            elif u not in visited and u > start:
                dfs(start, u, visited | {u}, path_bonds + [eid])

    for start in range(mol.num_atoms):
        dfs(start, start, {start}, [])
    return frozenset(on_cycle)


def brute_force_contains(haystack: MolGraph, needle: MolGraph) -> bool:
    """Exhaustive injective-mapping subgraph check (small graphs only)."""
    if needle.num_atoms > haystack.num_atoms:
        return False
    h_atoms = range(haystack.num_atoms)
    for image in itertools.permutations(h_atoms, needle.num_atoms):
        ok = True
        for i, a in enumerate(needle.atoms):
            b = haystack.atoms[image[i]]
            if (a.symbol, a.charge) != (b.symbol, b.charge):
                ok = False
                break
        if not ok:
            continue
        for bond in needle.bonds:
            h_bond = haystack.bond_between(image[bond.a], image[bond.b])
            if h_bond is None or h_bond.order != bond.order:
                ok = False
                break
        if ok:
            return True
    return False


def brute_force_orbits(mol: MolGraph) -> list[frozenset[int]]:
    """Automorphism orbits via full permutation enumeration (n <= 8)."""
    n = mol.num_atoms
    bond_set = {(b.a, b.b): b.order for b in mol.bonds}

    def is_automorphism(perm):
        for i, a in enumerate(mol.atoms):
            b = mol.atoms[perm[i]]
            if (a.symbol, a.charge) != (b.symbol, b.charge):
                return False
        for (a, b), order in bond_set.items():
            x, y = perm[a], perm[b]
            key = (x, y) if x < y else (y, x)
            if bond_set.get(key) != order:
                return False
        return True

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in itertools.permutations(range(n)):
        if is_automorphism(perm):
            for i in range(n):
                ra, rb = find(i), find(perm[i])
                if ra != rb:
                    parent[ra] = rb
    groups: dict[int, set[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return [frozenset(g) for g in groups.values()]
