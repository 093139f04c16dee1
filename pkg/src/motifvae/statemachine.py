"""History-free decoder environment with hard validity guarantees.

A generation state is just (partial graph, focus atom); legal actions are
derived from the state alone, never from how it was reached. Valence and
chord masks make every reachable terminal state a valid connected molecule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .chemgraph import Atom, Bond, MolGraph, ValenceTable
from .motifs import MotifAnnotation, MotifVocabulary, annotate, symmetry_classes


@dataclass(frozen=True)
class AddAtom:
    symbol: str
    charge: int = 0


@dataclass(frozen=True)
class AddMotif:
    vocab_index: int


@dataclass(frozen=True)
class SelectAttachment:
    position: int  # atom position within the just-added motif


@dataclass(frozen=True)
class AddBond:
    partner: int  # graph atom index
    order: int


@dataclass(frozen=True)
class StopBonds:
    pass


@dataclass(frozen=True)
class EndGeneration:
    pass


Action = Union[AddAtom, AddMotif, SelectAttachment, AddBond, StopBonds, EndGeneration]

NODE_PHASE = "node"
ATTACH_PHASE = "attach"
BOND_PHASE = "bond"


class IllegalAction(RuntimeError):
    """An action was applied that the current state does not allow."""


DEFAULT_ATOM_CLASSES: tuple[tuple[str, int], ...] = (
    ("Br", 0),
    ("C", 0),
    ("Cl", 0),
    ("F", 0),
    ("I", 0),
    ("N", 0),
    ("N", 1),
    ("O", -1),
    ("O", 0),
    ("P", 0),
    ("S", 0),
)


def mine_atom_classes(corpus: Iterable[MolGraph]) -> tuple[tuple[str, int], ...]:
    """Sorted (symbol, charge) pairs occurring in a corpus."""
    classes = {(a.symbol, a.charge) for mol in corpus for a in mol.atoms}
    return tuple(sorted(classes))


class GenEnv:
    """Shared read-only context for decoding: vocabulary, valences, classes.

    Also owns the class-id layout used by the prediction head:
    atom classes first, then motifs, then the end-generation class.
    """

    def __init__(
        self,
        vocab: MotifVocabulary,
        table: ValenceTable | None = None,
        atom_classes: tuple[tuple[str, int], ...] = DEFAULT_ATOM_CLASSES,
    ):
        self.vocab = vocab
        self.table = table or ValenceTable.default()
        self.atom_classes = tuple(atom_classes)
        for symbol, charge in self.atom_classes:
            if self.table.max_valence(symbol, charge) < 1:
                raise ValueError(f"atom class {(symbol, charge)} cannot bond")
        self._class_of_atom = {pair: i for i, pair in enumerate(self.atom_classes)}
        self._motif_offset = len(self.atom_classes)
        # Per-motif caches used by masking.
        self._motif_classes = [symmetry_classes(m.graph) for m in vocab]
        self._motif_free = [
            tuple(
                self.table.max_valence(m.graph.atoms[i].symbol, m.graph.atoms[i].charge)
                - m.graph.bond_order_sum(i)
                for i in range(m.graph.num_atoms)
            )
            for m in vocab
        ]

    @property
    def num_node_classes(self) -> int:
        return len(self.atom_classes) + len(self.vocab) + 1

    @property
    def end_class(self) -> int:
        return self.num_node_classes - 1

    def motif_symmetry(self, vocab_index: int) -> list[tuple[int, ...]]:
        return self._motif_classes[vocab_index]

    def motif_attachable(self, vocab_index: int) -> bool:
        return any(f >= 1 for f in self._motif_free[vocab_index])

    def motif_free_valences(self, vocab_index: int) -> tuple[int, ...]:
        return self._motif_free[vocab_index]

    def node_class_of(self, action: Action) -> int:
        if isinstance(action, AddAtom):
            try:
                return self._class_of_atom[(action.symbol, action.charge)]
            except KeyError:
                raise KeyError(
                    f"atom class {(action.symbol, action.charge)} not configured"
                ) from None
        if isinstance(action, AddMotif):
            return self._motif_offset + action.vocab_index
        if isinstance(action, EndGeneration):
            return self.end_class
        raise TypeError(f"{action!r} is not a node-phase action")

    def node_action_of(self, class_id: int) -> Action:
        if class_id < 0 or class_id >= self.num_node_classes:
            raise IndexError(f"class id {class_id} out of range")
        if class_id < self._motif_offset:
            symbol, charge = self.atom_classes[class_id]
            return AddAtom(symbol, charge)
        if class_id == self.end_class:
            return EndGeneration()
        return AddMotif(class_id - self._motif_offset)


@dataclass(frozen=True)
class GenState:
    """Decoder state: the partial graph plus focus bookkeeping.

    ``graph`` includes pending atoms (a just added atom or motif not yet
    connected). ``occ_of`` tracks per-atom motif occurrence ids for chord
    masking and featurization; ``occ_vocab[occ_id]`` is the vocabulary index.
    """

    graph: MolGraph
    focus: int | None
    pending: frozenset[int]
    occ_of: tuple[int | None, ...]
    occ_vocab: tuple[int, ...]
    bonds_in_phase: int
    terminal: bool

    @property
    def phase(self) -> str:
        if self.focus is not None:
            return BOND_PHASE
        if self.pending:
            return ATTACH_PHASE
        return NODE_PHASE

    def motif_index_of(self, atom: int) -> int | None:
        occ = self.occ_of[atom]
        return None if occ is None else self.occ_vocab[occ]

    def partial_atom_count(self) -> int:
        return self.graph.num_atoms - len(self.pending)


@dataclass(frozen=True)
class ActionMask:
    """Legal actions of one state, grouped by phase."""

    phase: str
    node_actions: tuple[Action, ...] = ()
    end_legal: bool = False
    attach_actions: tuple[SelectAttachment, ...] = ()
    bond_actions: tuple[AddBond, ...] = ()
    stop_legal: bool = False

    def all_actions(self) -> tuple[Action, ...]:
        out: list[Action] = list(self.node_actions)
        if self.end_legal:
            out.append(EndGeneration())
        out.extend(self.attach_actions)
        out.extend(self.bond_actions)
        if self.stop_legal:
            out.append(StopBonds())
        return tuple(out)

    def is_legal(self, action: Action) -> bool:
        return action in self.all_actions()


def init_empty() -> GenState:
    return GenState(
        graph=MolGraph(),
        focus=None,
        pending=frozenset(),
        occ_of=(),
        occ_vocab=(),
        bonds_in_phase=0,
        terminal=False,
    )


def init_from_scaffold(
    scaffold: MolGraph,
    env: GenEnv,
    annotation: MotifAnnotation | None = None,
) -> GenState:
    """Start decoding from a scaffold as the initial partial graph.

    The scaffold is annotated against the vocabulary so featurization
    matches what the model saw during training.
    """
    if scaffold.num_atoms == 0:
        raise ValueError("scaffold is empty")
    if not scaffold.is_connected():
        raise ValueError("scaffold is disconnected")
    for i in range(scaffold.num_atoms):
        a = scaffold.atoms[i]
        cap = env.table.max_valence(a.symbol, a.charge)
        if scaffold.bond_order_sum(i) > cap:
            raise ValueError(f"scaffold atom {i} exceeds its valence")
    ann = annotation or annotate(scaffold, env.vocab)
    occ_of: list[int | None] = [None] * scaffold.num_atoms
    occ_vocab: list[int] = []
    for occ in ann.occurrences:
        occ_id = len(occ_vocab)
        occ_vocab.append(occ.vocab_index)
        for atom in occ.atoms:
            occ_of[atom] = occ_id
    return GenState(
        graph=scaffold,
        focus=None,
        pending=frozenset(),
        occ_of=tuple(occ_of),
        occ_vocab=tuple(occ_vocab),
        bonds_in_phase=0,
        terminal=False,
    )


def _free_valence(state: GenState, env: GenEnv, atom: int) -> int:
    a = state.graph.atoms[atom]
    return env.table.max_valence(a.symbol, a.charge) - state.graph.bond_order_sum(atom)


def legal_actions(state: GenState, env: GenEnv) -> ActionMask:
    """The full action mask of a non-terminal state.

    Node phase pre-filters insertions that could never bond (everything
    saturated), which keeps the machine deadlock free: attach and bond
    phases always retain at least one legal action.
    """
    if state.terminal:
        raise IllegalAction("terminal state has no legal actions")

    phase = state.phase
    if phase == NODE_PHASE:
        empty = state.graph.num_atoms == 0
        host_free = not empty and any(
            _free_valence(state, env, i) >= 1 for i in range(state.graph.num_atoms)
        )
        node_actions: list[Action] = []
        if empty or host_free:
            node_actions.extend(
                AddAtom(symbol, charge) for symbol, charge in env.atom_classes
            )
            node_actions.extend(
                AddMotif(i)
                for i in range(len(env.vocab))
                if empty or env.motif_attachable(i)
            )
        return ActionMask(
            phase=NODE_PHASE,
            node_actions=tuple(node_actions),
            end_legal=not empty,
        )

    if phase == ATTACH_PHASE:
        offset = min(state.pending)
        occ = state.occ_of[offset]
        vocab_index = state.occ_vocab[occ]
        free = env.motif_free_valences(vocab_index)
        attach = tuple(
            SelectAttachment(min(cls))
            for cls in env.motif_symmetry(vocab_index)
            if free[min(cls)] >= 1
        )
        return ActionMask(phase=ATTACH_PHASE, attach_actions=attach)

    focus = state.focus
    focus_free = _free_valence(state, env, focus)
    focus_occ = state.occ_of[focus]
    bonds: list[AddBond] = []
    if focus_free >= 1:
        for u in range(state.graph.num_atoms):
            if u == focus or u in state.pending:
                continue
            if focus_occ is not None and state.occ_of[u] == focus_occ:
                continue  # chord mask: no extra bonds inside one motif
            if state.graph.bond_between(focus, u) is not None:
                continue
            max_order = min(3, focus_free, _free_valence(state, env, u))
            bonds.extend(AddBond(u, o) for o in range(1, max_order + 1))
    return ActionMask(
        phase=BOND_PHASE,
        bond_actions=tuple(bonds),
        stop_legal=state.bonds_in_phase >= 1,
    )


def apply(state: GenState, action: Action, env: GenEnv) -> GenState:
    """Transition function; raises IllegalAction on contract violations.

    Structural legality is re-checked cheaply here; sampling should consult
    ``legal_actions`` so that this never fires.
    """
    if state.terminal:
        raise IllegalAction("cannot act on a terminal state")
    phase = state.phase

    if isinstance(action, AddAtom):
        if phase != NODE_PHASE:
            raise IllegalAction(f"AddAtom in {phase} phase")
        if env.table.max_valence(action.symbol, action.charge) < 1:
            raise IllegalAction(f"atom {action} cannot bond")
        new_graph = state.graph.with_atom(Atom(action.symbol, action.charge))
        idx = new_graph.num_atoms - 1
        if state.graph.num_atoms == 0:
            return GenState(new_graph, None, frozenset(), (None,), state.occ_vocab, 0, False)
        if not any(_free_valence(state, env, i) >= 1 for i in range(state.graph.num_atoms)):
            raise IllegalAction("no partial atom can host a new bond")
        return GenState(
            new_graph,
            focus=idx,
            pending=frozenset({idx}),
            occ_of=state.occ_of + (None,),
            occ_vocab=state.occ_vocab,
            bonds_in_phase=0,
            terminal=False,
        )

    if isinstance(action, AddMotif):
        if phase != NODE_PHASE:
            raise IllegalAction(f"AddMotif in {phase} phase")
        motif = env.vocab[action.vocab_index].graph
        offset = state.graph.num_atoms
        new_graph = state.graph.with_atoms(motif.atoms).with_bonds(
            Bond(b.a + offset, b.b + offset, b.order) for b in motif.bonds
        )
        occ_id = len(state.occ_vocab)
        occ_of = state.occ_of + (occ_id,) * motif.num_atoms
        occ_vocab = state.occ_vocab + (action.vocab_index,)
        if offset == 0:
            return GenState(new_graph, None, frozenset(), occ_of, occ_vocab, 0, False)
        if not env.motif_attachable(action.vocab_index):
            raise IllegalAction("motif has no attachable atom")
        if not any(_free_valence(state, env, i) >= 1 for i in range(offset)):
            raise IllegalAction("no partial atom can host a new bond")
        pending = frozenset(range(offset, offset + motif.num_atoms))
        if motif.num_atoms == 1:
            # one-atom motifs have exactly one attachment point: skip the
            # attachment phase and focus the new atom directly
            return GenState(new_graph, offset, pending, occ_of, occ_vocab, 0, False)
        return GenState(new_graph, None, pending, occ_of, occ_vocab, 0, False)

    if isinstance(action, SelectAttachment):
        if phase != ATTACH_PHASE:
            raise IllegalAction(f"SelectAttachment in {phase} phase")
        offset = min(state.pending)
        atom = offset + action.position
        if atom not in state.pending:
            raise IllegalAction(f"attachment position {action.position} out of motif")
        if _free_valence(state, env, atom) < 1:
            raise IllegalAction("attachment atom has no free valence")
        return GenState(
            state.graph,
            focus=atom,
            pending=state.pending,
            occ_of=state.occ_of,
            occ_vocab=state.occ_vocab,
            bonds_in_phase=0,
            terminal=False,
        )

    if isinstance(action, AddBond):
        if phase != BOND_PHASE:
            raise IllegalAction(f"AddBond in {phase} phase")
        focus, u = state.focus, action.partner
        if not (0 <= u < state.graph.num_atoms) or u == focus or u in state.pending:
            raise IllegalAction(f"bad bond partner {u}")
        focus_occ = state.occ_of[focus]
        if focus_occ is not None and state.occ_of[u] == focus_occ:
            raise IllegalAction("chord inside one motif occurrence")
        if state.graph.bond_between(focus, u) is not None:
            raise IllegalAction("bond already present")
        if action.order > min(
            _free_valence(state, env, focus), _free_valence(state, env, u)
        ):
            raise IllegalAction("bond order exceeds free valence")
        return GenState(
            state.graph.with_bond(focus, u, action.order),
            focus=focus,
            pending=frozenset(),  # first bond merges any pending atoms
            occ_of=state.occ_of,
            occ_vocab=state.occ_vocab,
            bonds_in_phase=state.bonds_in_phase + 1,
            terminal=False,
        )

    if isinstance(action, StopBonds):
        if phase != BOND_PHASE:
            raise IllegalAction(f"StopBonds in {phase} phase")
        if state.bonds_in_phase < 1:
            raise IllegalAction("new structure must receive at least one bond")
        return GenState(
            state.graph,
            focus=None,
            pending=frozenset(),
            occ_of=state.occ_of,
            occ_vocab=state.occ_vocab,
            bonds_in_phase=0,
            terminal=False,
        )

    if isinstance(action, EndGeneration):
        if phase != NODE_PHASE:
            raise IllegalAction(f"EndGeneration in {phase} phase")
        if state.graph.num_atoms == 0:
            raise IllegalAction("cannot end generation on an empty molecule")
        return GenState(
            state.graph,
            focus=None,
            pending=frozenset(),
            occ_of=state.occ_of,
            occ_vocab=state.occ_vocab,
            bonds_in_phase=0,
            terminal=True,
        )

    raise TypeError(f"unknown action {action!r}")


def is_terminal(state: GenState) -> bool:
    return state.terminal
