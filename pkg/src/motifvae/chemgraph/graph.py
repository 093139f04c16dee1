"""Immutable molecular graph plus ring perception and valence accounting.

Hydrogens are implicit everywhere: an atom's hydrogen count is whatever free
valence remains after its explicit bonds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .elements import HYDROGEN_MASS, ValenceTable

BOND_ORDERS = (1, 2, 3)


@dataclass(frozen=True)
class Atom:
    symbol: str
    charge: int = 0
    isotope: int | None = None


@dataclass(frozen=True, order=True)
class Bond:
    """Undirected bond; endpoints are normalized so a < b."""

    a: int
    b: int
    order: int


class MolGraph:
    """A simple undirected graph of atoms with typed bonds.

    Instances are immutable; ``with_atom``/``with_bond`` return new graphs.
    Bonds are stored sorted by endpoints so that equal graphs have equal
    bond tuples regardless of construction order.
    """

    __slots__ = ("atoms", "bonds", "_adj")

    def __init__(self, atoms=(), bonds=()):
        atoms = tuple(atoms)
        norm = []
        for bond in bonds:
            a, b = (bond.a, bond.b) if bond.a < bond.b else (bond.b, bond.a)
            if a == b:
                raise ValueError(f"self-bond on atom {a}")
            if not (0 <= a < len(atoms) and 0 <= b < len(atoms)):
                raise ValueError(f"bond ({a},{b}) references missing atom")
            if bond.order not in BOND_ORDERS:
                raise ValueError(f"bad bond order {bond.order}")
            norm.append(Bond(a, b, bond.order))
        norm.sort()
        for prev, cur in zip(norm, norm[1:]):
            if (prev.a, prev.b) == (cur.a, cur.b):
                raise ValueError(f"duplicate bond ({cur.a},{cur.b})")
        adj: list[list[tuple[int, int]]] = [[] for _ in atoms]
        for bond in norm:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        super().__setattr__("atoms", atoms)
        super().__setattr__("bonds", tuple(norm))
        super().__setattr__("_adj", tuple(tuple(n) for n in adj))

    def __setattr__(self, name, value):
        raise AttributeError("MolGraph is immutable")

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """(neighbor index, bond order) pairs of atom i."""
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_order_sum(self, i: int) -> int:
        return sum(order for _, order in self._adj[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        for k, order in self._adj[i]:
            if k == j:
                a, b = (i, j) if i < j else (j, i)
                return Bond(a, b, order)
        return None

    def with_atom(self, atom: Atom) -> "MolGraph":
        return MolGraph(self.atoms + (atom,), self.bonds)

    def with_atoms(self, atoms) -> "MolGraph":
        return MolGraph(self.atoms + tuple(atoms), self.bonds)

    def with_bond(self, a: int, b: int, order: int) -> "MolGraph":
        return MolGraph(self.atoms, self.bonds + (Bond(a, b, order),))

    def with_bonds(self, bonds) -> "MolGraph":
        return MolGraph(self.atoms, self.bonds + tuple(bonds))

    def subgraph(self, atom_indices) -> tuple["MolGraph", tuple[int, ...]]:
        """Induced subgraph on the given atoms.

        Returns the subgraph and the tuple of original indices, where
        position k in the subgraph corresponds to ``original[k]``.
        """
        keep = tuple(atom_indices)
        pos = {orig: k for k, orig in enumerate(keep)}
        atoms = tuple(self.atoms[i] for i in keep)
        bonds = [
            Bond(pos[b.a], pos[b.b], b.order)
            for b in self.bonds
            if b.a in pos and b.b in pos
        ]
        return MolGraph(atoms, bonds), keep

    def is_connected(self) -> bool:
        if self.num_atoms == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            for j, _ in self._adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.num_atoms

    def connected_components(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        comps = []
        for start in range(self.num_atoms):
            if start in seen:
                continue
            comp = [start]
            seen.add(start)
            stack = [start]
            while stack:
                for j, _ in self._adj[stack.pop()]:
                    if j not in seen:
                        seen.add(j)
                        comp.append(j)
                        stack.append(j)
            comps.append(tuple(sorted(comp)))
        return comps

    def _key(self):
        return (self.atoms, self.bonds)

    def __eq__(self, other):
        return isinstance(other, MolGraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"MolGraph(atoms={self.num_atoms}, bonds={self.num_bonds})"


@dataclass(frozen=True)
class RingInfo:
    """Cycle membership: bond ids on any cycle plus per-atom ring sizes."""

    ring_bonds: frozenset[int]
    ring_sizes: tuple[frozenset[int], ...]
    atom_on_ring: tuple[bool, ...]

    def bond_in_ring(self, bond_id: int) -> bool:
        return bond_id in self.ring_bonds

    def atom_in_ring(self, i: int) -> bool:
        return self.atom_on_ring[i]


def _bridges(mol: MolGraph) -> set[int]:
    """Bond ids that are bridges (lie on no cycle), via iterative DFS."""
    n = mol.num_atoms
    bond_id = {}
    for idx, b in enumerate(mol.bonds):
        bond_id[(b.a, b.b)] = idx
        bond_id[(b.b, b.a)] = idx
    disc = [-1] * n
    low = [0] * n
    parent_of = [-1] * n  # parent node in DFS tree
    bridges: set[int] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]  # (node, parent bond id, next ptr)
        while stack:
            v, pbond, ptr = stack.pop()
            if ptr == 0:
                disc[v] = low[v] = timer
                timer += 1
            adj = mol.neighbors(v)
            descended = False
            while ptr < len(adj):
                u, _ = adj[ptr]
                eid = bond_id[(v, u)]
                ptr += 1
                if eid == pbond:
                    continue
                if disc[u] == -1:
                    parent_of[u] = v
                    stack.append((v, pbond, ptr))
                    stack.append((u, eid, 0))
                    descended = True
                    break
                low[v] = min(low[v], disc[u])
            if descended:
                continue
            if pbond != -1:
                p = parent_of[v]
                low[p] = min(low[p], low[v])
                if low[v] > disc[p]:
                    bridges.add(pbond)
    return bridges


def _min_cycle_basis(mol: MolGraph) -> list[tuple[int, ...]]:
    """Minimum cycle basis as atom tuples, Horton-style.

    Candidate cycles come from BFS trees rooted at every vertex; a greedy
    GF(2) elimination over bond incidence bit vectors keeps an independent
    set, shortest cycles first.
    """
    dim = mol.num_bonds - mol.num_atoms + len(mol.connected_components())
    if dim <= 0:
        return []
    bond_id = {}
    for idx, b in enumerate(mol.bonds):
        bond_id[(b.a, b.b)] = idx
        bond_id[(b.b, b.a)] = idx

    candidates: list[tuple[int, tuple[int, ...], int]] = []
    seen: set[frozenset[int]] = set()
    for root in range(mol.num_atoms):
        parent = {root: -1}
        order = [root]
        qi = 0
        while qi < len(order):
            v = order[qi]
            qi += 1
            for u, _ in mol.neighbors(v):
                if u not in parent:
                    parent[u] = v
                    order.append(u)

        def path_to_root(v):
            out = []
            while v != -1:
                out.append(v)
                v = parent[v]
            return out

        for b in mol.bonds:
            if b.a not in parent or b.b not in parent:
                continue
            if parent[b.a] == b.b or parent[b.b] == b.a:
                continue  # tree edge
            pa = path_to_root(b.a)
            pb = path_to_root(b.b)
            cyc = pa[:-1] + list(reversed(pb))  # b.a .. just below root, root, .. b.b
            if len(set(cyc)) != len(cyc):
                continue  # paths overlap: not a simple cycle through root
            key = frozenset(cyc)
            if key in seen:
                continue
            seen.add(key)
            vec = 0
            ok = True
            for x, y in zip(cyc, cyc[1:] + cyc[:1]):
                eid = bond_id.get((x, y))
                if eid is None:
                    ok = False
                    break
                vec |= 1 << eid
            if ok:
                candidates.append((len(cyc), tuple(cyc), vec))

    candidates.sort(key=lambda c: (c[0], c[1]))
    basis: list[tuple[int, ...]] = []
    pivots: dict[int, int] = {}  # highest set bit -> reduced vector
    for _, cyc, vec in candidates:
        v = vec
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                basis.append(cyc)
                break
            v ^= pivots[top]
        if len(basis) == dim:
            break
    return basis


def perceive_rings(mol: MolGraph) -> RingInfo:
    """Classify bonds by cycle membership and record per-atom ring sizes.

    Ring sizes come from a minimum cycle basis; sizes above 8 are clamped
    to 8 (the downstream feature flags only distinguish 3..8).
    """
    bridges = _bridges(mol)
    ring_bonds = frozenset(i for i in range(mol.num_bonds) if i not in bridges)
    sizes: list[set[int]] = [set() for _ in range(mol.num_atoms)]
    for cyc in _min_cycle_basis(mol):
        size = min(len(cyc), 8)
        for atom in cyc:
            sizes[atom].add(size)
    on_ring = [False] * mol.num_atoms
    for bid in ring_bonds:
        on_ring[mol.bonds[bid].a] = True
        on_ring[mol.bonds[bid].b] = True
    return RingInfo(ring_bonds, tuple(frozenset(s) for s in sizes), tuple(on_ring))


def aromatic_flags(mol: MolGraph) -> tuple[bool, ...]:
    """Atoms on a six-cycle of strictly alternating single/double bonds.

    A deliberate simplification of aromaticity, sufficient for kekulized
    six-membered rings.
    """
    flags = [False] * mol.num_atoms
    for start in range(mol.num_atoms):
        # DFS over paths of length <= 6 starting at `start`; only visit
        # atoms >= start so each cycle is found from its smallest atom.
        stack = [(start, (start,), ())]
        while stack:
            v, path, orders = stack.pop()
            for u, order in mol.neighbors(v):
                if order == 3:
                    continue
                if orders and order == orders[-1]:
                    continue  # must alternate single/double
                if u == start and len(path) == 6:
                    if orders[0] != order:  # closing bond alternates at both ends
                        for atom in path:
                            flags[atom] = True
                    continue
                if u < start or u in path or len(path) >= 6:
                    continue
                stack.append((u, path + (u,), orders + (order,)))
    return tuple(flags)


def free_valence(mol: MolGraph, atom: int, table: ValenceTable) -> int:
    """Remaining bonding capacity: charge-adjusted max valence minus bond orders."""
    a = mol.atoms[atom]
    cap = table.max_valence(a.symbol, a.charge)
    used = mol.bond_order_sum(atom)
    if used > cap:
        raise ValueError(
            f"atom {atom} ({a.symbol}, charge {a.charge}) has bond order sum "
            f"{used} above its maximum valence {cap}"
        )
    return cap - used


def implicit_hydrogens(mol: MolGraph, atom: int, table: ValenceTable) -> int:
    """Hydrogens implied by the smallest allowed valence that fits the bonds."""
    a = mol.atoms[atom]
    used = mol.bond_order_sum(atom)
    for v in table.allowed_valences(a.symbol, a.charge):
        if v >= used:
            return v - used
    return 0


def molecular_weight(mol: MolGraph, table: ValenceTable) -> float:
    """Sum of atomic masses plus implicit hydrogen mass."""
    total = 0.0
    for i, a in enumerate(mol.atoms):
        total += table.mass(a.symbol)
        total += HYDROGEN_MASS * implicit_hydrogens(mol, i, table)
    return total


def ring_count(mol: MolGraph) -> int:
    """Cyclomatic number (number of independent cycles)."""
    return mol.num_bonds - mol.num_atoms + len(mol.connected_components())


def validate_molecule(mol: MolGraph, table: ValenceTable) -> None:
    """Raise if the graph is not a valid terminal molecule.

    Checks: non-empty, connected, all elements known, charges in range,
    and every atom within its charge-adjusted maximum valence.
    """
    if mol.num_atoms == 0:
        raise ValueError("empty molecule")
    if not mol.is_connected():
        raise ValueError("molecule is disconnected")
    for i, a in enumerate(mol.atoms):
        if not table.knows(a.symbol):
            raise ValueError(f"unknown element {a.symbol!r}")
        if abs(a.charge) > 2:
            raise ValueError(f"atom {i}: charge {a.charge} out of range")
        free_valence(mol, i, table)  # raises on overflow
