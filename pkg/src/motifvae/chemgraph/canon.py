"""Canonical atom ranking and canonical SMILES output.

Ranking is iterative neighborhood refinement seeded by (element, charge,
degree, ring membership, isotope); remaining ties are broken by exploring
each tied atom and keeping the branch whose fully-resolved ranks produce
the lexicographically smallest SMILES string. The result is invariant
under atom permutations.
"""

from __future__ import annotations

from .graph import MolGraph, perceive_rings

_BARE_SYMBOLS = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_BOND_TOKEN = {1: "", 2: "=", 3: "#"}


def _dense(keys: list) -> list[int]:
    """Map arbitrary sortable keys to dense ranks 0..k-1."""
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _refine(mol: MolGraph, ranks: list[int]) -> list[int]:
    """Iterate neighborhood refinement until the partition stops splitting."""
    n_classes = len(set(ranks))
    while True:
        sigs = [
            (
                ranks[v],
                tuple(sorted((order, ranks[u]) for u, order in mol.neighbors(v))),
            )
            for v in range(mol.num_atoms)
        ]
        new_ranks = _dense(sigs)
        new_classes = len(set(new_ranks))
        if new_classes == n_classes:
            return new_ranks
        ranks = new_ranks
        n_classes = new_classes


def refined_ranks(mol: MolGraph) -> list[int]:
    """Refinement-only ranks (no tie breaking); equal ranks may remain."""
    if mol.num_atoms == 0:
        return []
    info = perceive_rings(mol)
    seed = [
        (
            mol.atoms[v].symbol,
            mol.atoms[v].charge,
            mol.degree(v),
            info.atom_on_ring[v],
            mol.atoms[v].isotope or 0,
        )
        for v in range(mol.num_atoms)
    ]
    return _refine(mol, _dense(seed))


def canonical_ranks(mol: MolGraph) -> list[int]:
    """A canonical permutation 0..n-1 of atom ranks.

    Isomorphic graphs get identical rank-induced structure; symmetric atoms
    are separated by the minimal-SMILES tie break.
    """
    ranks, _ = _canonical(mol)
    return ranks


def write_smiles(mol: MolGraph) -> str:
    """Canonical SMILES; equal for isomorphic inputs, re-parses to the input."""
    if mol.num_atoms == 0:
        raise ValueError("cannot write SMILES for an empty graph")
    if not mol.is_connected():
        raise ValueError("cannot write SMILES for a disconnected graph")
    _, smiles = _canonical(mol)
    return smiles


def _canonical(mol: MolGraph) -> tuple[list[int], str]:
    if mol.num_atoms == 0:
        return [], ""
    return _disambiguate(mol, refined_ranks(mol))


def _disambiguate(mol: MolGraph, ranks: list[int]) -> tuple[list[int], str]:
    by_rank: dict[int, list[int]] = {}
    for v, r in enumerate(ranks):
        by_rank.setdefault(r, []).append(v)
    tied = [atoms for atoms in by_rank.values() if len(atoms) > 1]
    if not tied:
        return ranks, _emit(mol, ranks)
    # Fewest branches first; rank breaks ties deterministically.
    cls = min(tied, key=lambda atoms: (len(atoms), ranks[atoms[0]]))
    best: tuple[list[int], str] | None = None
    for a in cls:
        bumped = _dense([(r, 0 if v == a else 1) for v, r in enumerate(ranks)])
        candidate = _disambiguate(mol, _refine(mol, bumped))
        if best is None or candidate[1] < best[1]:
            best = candidate
    return best


def _atom_token(mol: MolGraph, v: int) -> str:
    a = mol.atoms[v]
    if a.charge == 0 and a.isotope is None and a.symbol in _BARE_SYMBOLS:
        return a.symbol
    if a.charge == 0:
        charge = ""
    elif abs(a.charge) == 1:
        charge = "+" if a.charge > 0 else "-"
    else:
        charge = f"{'+' if a.charge > 0 else '-'}{abs(a.charge)}"
    isotope = str(a.isotope) if a.isotope is not None else ""
    return f"[{isotope}{a.symbol}{charge}]"


def _emit(mol: MolGraph, ranks: list[int]) -> str:
    """Generate the SMILES string for fully discrete ranks."""
    n = mol.num_atoms
    root = ranks.index(0)

    # DFS visiting neighbors in ascending rank; collect tree and back edges.
    # In an undirected DFS every non-tree edge joins an ancestor/descendant
    # pair, so the endpoint with the smaller preorder opens the ring closure.
    parent = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    preorder = [-1] * n
    back_edges: list[tuple[int, int, int]] = []  # (opener, closer, order)
    seen_back: set[tuple[int, int]] = set()
    visited = [False] * n
    visited[root] = True
    preorder[root] = 0
    counter = 1

    def ranked_neighbors(v):
        return iter(sorted(mol.neighbors(v), key=lambda t: ranks[t[0]]))

    stack = [(root, ranked_neighbors(root))]
    while stack:
        v, it = stack[-1]
        descended = False
        for u, order in it:
            if not visited[u]:
                visited[u] = True
                parent[u] = v
                children[v].append(u)
                preorder[u] = counter
                counter += 1
                stack.append((u, ranked_neighbors(u)))
                descended = True
                break
            if u != parent[v]:
                key = (u, v) if u < v else (v, u)
                if key not in seen_back:
                    seen_back.add(key)
                    opener, closer = (u, v) if preorder[u] < preorder[v] else (v, u)
                    back_edges.append((opener, closer, order))
        if not descended:
            stack.pop()

    opens: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # at opener: (closer, order)
    closes: list[list[int]] = [[] for _ in range(n)]  # at closer: indices into back_edges
    for idx, (u, v, order) in enumerate(back_edges):
        opens[u].append((idx, v))
        closes[v].append(idx)
    for u in range(n):
        opens[u].sort(key=lambda t: preorder[t[1]])

    digit_of: dict[int, int] = {}
    free_digits = list(range(1, 100))

    def digit_str(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    out: list[str] = []

    def emit_atom(v: int):
        out.append(_atom_token(mol, v))
        # Close digits first (ascending digit), then open new ones.
        for idx in sorted(closes[v], key=lambda i: digit_of[i]):
            d = digit_of.pop(idx)
            out.append(digit_str(d))
            free_digits.append(d)
            free_digits.sort()
        for idx, _closer in opens[v]:
            d = free_digits.pop(0)
            digit_of[idx] = d
            out.append(_BOND_TOKEN[back_edges[idx][2]])
            out.append(digit_str(d))
        kids = children[v]
        for k, u in enumerate(kids):
            bond = mol.bond_between(v, u)
            token = _BOND_TOKEN[bond.order]
            if k < len(kids) - 1:
                out.append("(")
                out.append(token)
                emit_atom(u)
                out.append(")")
            else:
                out.append(token)
                emit_atom(u)

    emit_atom(root)
    return "".join(out)
