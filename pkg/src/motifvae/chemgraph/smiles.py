"""SMILES parsing for the supported subset.

Supported: organic-subset atoms, bracket atoms with isotope/charge/H-count,
bond symbols ``- = #``, ring closures (digits and ``%nn``), branches, and
lowercase aromatic ``c n o s``. Aromatic systems are kekulized at parse time
via perfect matching, so the resulting graph only ever contains single,
double and triple bonds. Hydrogens are never materialized as atoms.
"""

from __future__ import annotations

from .elements import MAX_ABS_CHARGE, ValenceTable
from .graph import Atom, Bond, MolGraph, implicit_hydrogens

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = ("B", "C", "N", "O", "P", "S", "F", "I")
_AROMATIC = ("c", "n", "o", "s")
_BOND_SYMBOLS = {"-": 1, "=": 2, "#": 3}

# sentinel order for bonds whose order is decided by kekulization
_AROMATIC_BOND = 0


class SmilesError(ValueError):
    """Syntax or chemistry error in a SMILES string, with position."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} (column {position} in {text!r})")
        self.text = text
        self.position = position


class _ParsedAtom:
    __slots__ = ("symbol", "charge", "isotope", "aromatic", "hcount", "position")

    def __init__(self, symbol, charge, isotope, aromatic, hcount, position):
        self.symbol = symbol
        self.charge = charge
        self.isotope = isotope
        self.aromatic = aromatic
        self.hcount = hcount  # None unless explicitly given in brackets
        self.position = position


def parse_smiles(text: str, table: ValenceTable | None = None) -> MolGraph:
    """Parse a SMILES string into a kekulized molecular graph.

    Raises SmilesError on syntax errors, unknown elements, unkekulizable
    aromatic systems, valence overflow, or hydrogen counts inconsistent
    with the implicit-hydrogen model.
    """
    table = table or ValenceTable.default()
    if not text or text != text.strip():
        raise SmilesError("empty or whitespace-padded SMILES", text, 0)

    atoms: list[_ParsedAtom] = []
    bonds: dict[tuple[int, int], int] = {}  # (a<b) -> order or _AROMATIC_BOND
    stack: list[int] = []
    prev: int | None = None
    pending_bond: int | None = None
    pending_pos = 0
    ring_open: dict[int, tuple[int, int | None, int]] = {}  # num -> (atom, bond, pos)

    def add_bond(a: int, b: int, order: int | None, pos: int):
        if a == b:
            raise SmilesError("ring closure bonds an atom to itself", text, pos)
        key = (a, b) if a < b else (b, a)
        if key in bonds:
            raise SmilesError("duplicate bond between atoms", text, pos)
        if order is None:
            if atoms[a].aromatic and atoms[b].aromatic:
                order = _AROMATIC_BOND
            else:
                order = 1
        bonds[key] = order

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                raise SmilesError("branch before any atom", text, i)
            if pending_bond is not None:
                raise SmilesError("bond symbol before branch open", text, pending_pos)
            stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise SmilesError("unmatched ')'", text, i)
            if pending_bond is not None:
                raise SmilesError("dangling bond symbol before ')'", text, pending_pos)
            prev = stack.pop()
            i += 1
            continue
        if ch in _BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesError("two consecutive bond symbols", text, i)
            if prev is None:
                raise SmilesError("bond symbol before any atom", text, i)
            pending_bond = _BOND_SYMBOLS[ch]
            pending_pos = i
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesError("ring closure before any atom", text, i)
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    raise SmilesError("'%' needs two digits", text, i)
                num = int(text[i + 1 : i + 3])
                width = 3
            else:
                num = int(ch)
                width = 1
            if num in ring_open:
                a, first_bond, first_pos = ring_open.pop(num)
                order = pending_bond
                if first_bond is not None and order is not None and first_bond != order:
                    raise SmilesError("ring closure bond symbols disagree", text, i)
                add_bond(a, prev, order if order is not None else first_bond, i)
            else:
                ring_open[num] = (prev, pending_bond, i)
            pending_bond = None
            i += width
            continue
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesError("unterminated bracket atom", text, i)
            atom = _parse_bracket(text, i, end, table)
            i = end + 1
        else:
            atom = _parse_organic(text, i, table)
            i += len(atom.symbol) if not atom.aromatic else 1
        idx = len(atoms)
        atoms.append(atom)
        if prev is not None:
            add_bond(prev, idx, pending_bond, atom.position)
        elif pending_bond is not None:
            raise SmilesError("bond symbol before first atom", text, pending_pos)
        pending_bond = None
        prev = idx

    if prev is None:
        raise SmilesError("no atoms", text, 0)
    if stack:
        raise SmilesError("unclosed '('", text, n - 1)
    if pending_bond is not None:
        raise SmilesError("dangling bond symbol at end", text, pending_pos)
    if ring_open:
        num, (_, _, pos) = next(iter(ring_open.items()))
        raise SmilesError(f"unclosed ring closure {num}", text, pos)

    _kekulize(text, atoms, bonds)

    mol = MolGraph(
        tuple(Atom(a.symbol, a.charge, a.isotope) for a in atoms),
        tuple(Bond(a, b, order) for (a, b), order in bonds.items()),
    )
    _validate_parsed(text, mol, atoms, table)
    return mol


def _parse_organic(text: str, i: int, table: ValenceTable) -> _ParsedAtom:
    for sym in _ORGANIC_TWO:
        if text.startswith(sym, i):
            return _ParsedAtom(sym, 0, None, False, None, i)
    ch = text[i]
    if ch in _ORGANIC_ONE:
        return _ParsedAtom(ch, 0, None, False, None, i)
    if ch in _AROMATIC:
        return _ParsedAtom(ch.upper(), 0, None, True, None, i)
    raise SmilesError(f"unexpected character {ch!r}", text, i)


def _parse_bracket(text: str, start: int, end: int, table: ValenceTable) -> _ParsedAtom:
    body = text[start + 1 : end]
    pos = start + 1
    j = 0
    isotope = None
    if j < len(body) and body[j].isdigit():
        k = j
        while k < len(body) and body[k].isdigit():
            k += 1
        isotope = int(body[j:k])
        j = k
    if j >= len(body):
        raise SmilesError("bracket atom lacks an element", text, pos + j)
    aromatic = False
    if body[j] in _AROMATIC:
        symbol = body[j].upper()
        aromatic = True
        j += 1
    elif body[j].isupper():
        k = j + 1
        if k < len(body) and body[k].islower() and table.knows(body[j : k + 1]):
            k += 1
        symbol = body[j:k]
        j = k
    else:
        raise SmilesError(f"bad element in brackets: {body[j]!r}", text, pos + j)
    if not table.knows(symbol):
        raise SmilesError(f"unknown element {symbol!r}", text, pos)
    hcount = None
    if j < len(body) and body[j] == "H":
        j += 1
        k = j
        while k < len(body) and body[k].isdigit():
            k += 1
        hcount = int(body[j:k]) if k > j else 1
        j = k
    charge = 0
    if j < len(body) and body[j] in "+-":
        sign = 1 if body[j] == "+" else -1
        j += 1
        if j < len(body) and body[j].isdigit():
            k = j
            while k < len(body) and body[k].isdigit():
                k += 1
            charge = sign * int(body[j:k])
            j = k
        else:
            charge = sign
            while j < len(body) and body[j] == body[j - 1]:
                charge += sign
                j += 1
    if j != len(body):
        raise SmilesError(f"unsupported bracket content {body[j:]!r}", text, pos + j)
    if abs(charge) > MAX_ABS_CHARGE:
        raise SmilesError(f"charge {charge} out of supported range", text, pos)
    return _ParsedAtom(symbol, charge, isotope, aromatic, hcount, start)


def _kekulize(text: str, atoms: list[_ParsedAtom], bonds: dict[tuple[int, int], int]):
    """Resolve aromatic bonds to alternating single/double via perfect matching.

    Every aromatic atom must receive exactly one double bond among the
    aromatic bonds; matched bonds become double, the rest single.
    """
    arom_atoms = [i for i, a in enumerate(atoms) if a.aromatic]
    if not arom_atoms:
        return
    adj: dict[int, list[int]] = {i: [] for i in arom_atoms}
    arom_bonds = [key for key, order in bonds.items() if order == _AROMATIC_BOND]
    for a, b in arom_bonds:
        adj[a].append(b)
        adj[b].append(a)
    for i in arom_atoms:
        if not adj[i]:
            raise SmilesError(
                "aromatic atom has no aromatic bonds", text, atoms[i].position
            )

    matching = _perfect_matching(set(arom_atoms), adj)
    if matching is None:
        raise SmilesError(
            "unkekulizable aromatic system", text, atoms[arom_atoms[0]].position
        )
    for key in arom_bonds:
        a, b = key
        bonds[key] = 2 if matching.get(a) == b else 1


def _perfect_matching(nodes: set[int], adj: dict[int, list[int]]) -> dict[int, int] | None:
    """Exact perfect matching by backtracking with a dead-state memo.

    Aromatic systems are small, so exponential worst case is acceptable.
    """
    matching: dict[int, int] = {}
    dead: set[frozenset[int]] = set()

    def solve(unmatched: set[int]) -> bool:
        if not unmatched:
            return True
        key = frozenset(unmatched)
        if key in dead:
            return False
        u = min(unmatched)
        for v in sorted(adj[u]):
            if v not in unmatched:
                continue
            matching[u] = v
            matching[v] = u
            if solve(unmatched - {u, v}):
                return True
            del matching[u], matching[v]
        dead.add(key)
        return False

    return matching if solve(set(nodes)) else None


def _validate_parsed(text: str, mol: MolGraph, atoms: list[_ParsedAtom], table: ValenceTable):
    for i, parsed in enumerate(atoms):
        a = mol.atoms[i]
        cap = table.max_valence(a.symbol, a.charge)
        used = mol.bond_order_sum(i)
        if used > cap:
            raise SmilesError(
                f"valence overflow on {a.symbol} (bond order sum {used} > {cap})",
                text,
                parsed.position,
            )
        if parsed.hcount is not None:
            implied = implicit_hydrogens(mol, i, table)
            if parsed.hcount != implied:
                raise SmilesError(
                    f"explicit H{parsed.hcount} inconsistent with implicit "
                    f"hydrogen count {implied}",
                    text,
                    parsed.position,
                )
