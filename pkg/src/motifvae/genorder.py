"""Generation orders and their expansion into supervision traces.

An order is a sequence of (atoms added, choice set) pairs produced by
repeatedly picking a frontier atom under one of four strategies; covered
atoms pull in their whole motif occurrence. A trace expands an order into
the exact decoder action sequence with multi-hot targets, replayable
through the state machine.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .chemgraph import MolGraph, canonical_ranks
from .motifs import MotifAnnotation
from .statemachine import (
    Action,
    AddAtom,
    AddBond,
    AddMotif,
    EndGeneration,
    GenEnv,
    GenState,
    SelectAttachment,
    StopBonds,
    apply,
    init_empty,
)


class OrderKind(str, Enum):
    RANDOM = "random"
    CANONICAL = "canonical"
    BFS_RANDOM = "bfs-random"
    BFS_CANONICAL = "bfs-canonical"


_BFS_KINDS = (OrderKind.BFS_RANDOM, OrderKind.BFS_CANONICAL)
_CANONICAL_START = (OrderKind.CANONICAL, OrderKind.BFS_CANONICAL)


@dataclass(frozen=True)
class OrderStrategy:
    kind: OrderKind
    seed: int = 0

    def rng_for(self, molecule_id) -> random.Random:
        # str seeding is content-based, hence reproducible across processes
        return random.Random(f"{self.seed}:{molecule_id}")


def valid_first_atoms(mol: MolGraph, strategy: OrderStrategy) -> frozenset[int]:
    """Atoms allowed to start the order: all, or the canonical minimum."""
    if mol.num_atoms == 0:
        raise ValueError("empty molecule")
    if strategy.kind in _CANONICAL_START:
        ranks = canonical_ranks(mol)
        return frozenset({ranks.index(0)})
    return frozenset(range(mol.num_atoms))


def valid_next_atoms(
    mol: MolGraph,
    partial: frozenset[int] | set[int],
    strategy: OrderStrategy,
    *,
    bfs_depths: dict[int, int] | None = None,
    ranks: list[int] | None = None,
) -> frozenset[int]:
    """Frontier atoms eligible as the next choice.

    BFS strategies need ``bfs_depths`` (distances from the start atom);
    the canonical strategy reuses precomputed ``ranks`` when given.
    """
    if not partial or len(partial) >= mol.num_atoms:
        raise ValueError("partial graph must be a proper non-empty subset")
    frontier = {
        u
        for v in partial
        for u, _ in mol.neighbors(v)
        if u not in partial
    }
    if not frontier:
        raise ValueError("partial graph is disconnected from the rest")
    if strategy.kind == OrderKind.RANDOM:
        return frozenset(frontier)
    if strategy.kind in _BFS_KINDS:
        if bfs_depths is None:
            raise ValueError("BFS strategies need bfs_depths")
        best = min(bfs_depths[u] for u in frontier)
        return frozenset(u for u in frontier if bfs_depths[u] == best)
    ranks = ranks if ranks is not None else canonical_ranks(mol)
    return frozenset({min(frontier, key=lambda u: ranks[u])})


def bfs_depths(mol: MolGraph, start: int) -> dict[int, int]:
    depths = {start: 0}
    queue = [start]
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for u, _ in mol.neighbors(v):
            if u not in depths:
                depths[u] = depths[v] + 1
                queue.append(u)
    return depths


@dataclass(frozen=True)
class OrderStep:
    """One iteration of the order loop: atoms entering the partial graph.

    For covered atoms, ``atoms`` is the whole occurrence in motif-position
    order and ``chosen`` is the frontier atom that triggered it.
    """

    atoms: tuple[int, ...]
    chosen: int
    choices: frozenset[int]


def compute_order(
    mol: MolGraph,
    annotation: MotifAnnotation,
    strategy: OrderStrategy,
    rng: random.Random,
) -> list[OrderStep]:
    """Run the order-sampling loop until every atom is placed."""
    if mol.num_atoms == 0:
        raise ValueError("empty molecule")
    ranks = (
        canonical_ranks(mol)
        if strategy.kind in (OrderKind.CANONICAL, OrderKind.BFS_CANONICAL)
        else None
    )

    def atoms_for(chosen: int) -> tuple[int, ...]:
        occ_id = annotation.occurrence_of(chosen)
        if occ_id is None:
            return (chosen,)
        return annotation.occurrences[occ_id].atoms

    first_choices = (
        frozenset({ranks.index(0)})
        if strategy.kind in _CANONICAL_START
        else frozenset(range(mol.num_atoms))
    )
    chosen = rng.choice(sorted(first_choices))
    steps = [OrderStep(atoms_for(chosen), chosen, first_choices)]
    partial = set(steps[0].atoms)
    depths = bfs_depths(mol, chosen) if strategy.kind in _BFS_KINDS else None

    while len(partial) < mol.num_atoms:
        choices = valid_next_atoms(
            mol, partial, strategy, bfs_depths=depths, ranks=ranks
        )
        chosen = rng.choice(sorted(choices))
        step = OrderStep(atoms_for(chosen), chosen, choices)
        steps.append(step)
        partial.update(step.atoms)
    return steps


@dataclass(frozen=True)
class TraceStep:
    """One supervised decoder step: the state seen, the teacher action, and
    every action that would have been equally correct."""

    state: GenState
    action: Action
    valid_targets: tuple[Action, ...]

    @property
    def fingerprint(self) -> int:
        return hash((self.state.graph, self.state.focus, self.state.pending))


@dataclass(frozen=True)
class GenerationTrace:
    steps: tuple[TraceStep, ...]
    source: str
    strategy: OrderStrategy
    final_state: GenState = field(compare=False)


def expand_trace(
    order: list[OrderStep],
    mol: MolGraph,
    annotation: MotifAnnotation,
    env: GenEnv,
    source: str = "",
    strategy: OrderStrategy = OrderStrategy(OrderKind.RANDOM),
) -> GenerationTrace:
    """Expand an order into the full action sequence with multi-hot targets.

    Emits, per order step: a next-node action; an attachment action for
    multi-atom motifs joining an existing graph; bond actions from the focus
    atom in ascending insertion order of the far endpoint; and a stop-bonds
    action. A final end-generation action closes the trace.
    """
    state = init_empty()
    steps: list[TraceStep] = []
    src2gen: dict[int, int] = {}
    placed: set[int] = set()

    def node_action(source_atom: int) -> Action:
        info = annotation.atom_motif(source_atom)
        if info is not None:
            return AddMotif(info[0])
        a = mol.atoms[source_atom]
        return AddAtom(a.symbol, a.charge)

    def emit(action: Action, valid: tuple[Action, ...]):
        nonlocal state
        steps.append(TraceStep(state, action, valid))
        state = apply(state, action, env)

    for t, step in enumerate(order):
        teacher = node_action(step.chosen)
        valid = tuple(
            sorted(
                {node_action(c) for c in step.choices},
                key=lambda a: env.node_class_of(a),
            )
        )
        emit(teacher, valid)

        offset = state.graph.num_atoms - len(step.atoms)
        for k, src in enumerate(step.atoms):
            src2gen[src] = offset + k

        occ_id = annotation.occurrence_of(step.chosen)
        external_bonds = [
            (src, u, bond_order)
            for src in step.atoms
            for u, bond_order in mol.neighbors(src)
            if u in placed
        ]
        if t == 0:
            focus_src = None
        elif occ_id is not None and len(step.atoms) > 1:
            # exactly one bond joins a motif occurrence to the partial graph
            assert len(external_bonds) == 1, "occurrence must attach via one bond"
            focus_src = external_bonds[0][0]
            true_position = step.atoms.index(focus_src)
            vocab_index = annotation.occurrences[occ_id].vocab_index
            positions_with_bond = {
                p
                for p, src in enumerate(step.atoms)
                if any(u not in step.atoms for u, _ in mol.neighbors(src))
            }
            valid_attach = []
            for cls in env.motif_symmetry(vocab_index):
                eligible = sorted(set(cls) & positions_with_bond)
                if not eligible:
                    continue
                rep = true_position if true_position in eligible else eligible[0]
                valid_attach.append(SelectAttachment(rep))
            valid_attach.sort(key=lambda a: a.position)
            emit(SelectAttachment(true_position), tuple(valid_attach))
        else:
            focus_src = step.atoms[0]

        if focus_src is not None:
            remaining = sorted(
                (
                    (src2gen[u], bond_order)
                    for src, u, bond_order in external_bonds
                    if src == focus_src
                ),
            )
            while remaining:
                valid = tuple(AddBond(u, o) for u, o in remaining)
                partner, bond_order = remaining.pop(0)
                emit(AddBond(partner, bond_order), valid)
            emit(StopBonds(), (StopBonds(),))

        placed.update(step.atoms)

    emit(EndGeneration(), (EndGeneration(),))
    return GenerationTrace(
        steps=tuple(steps),
        source=source,
        strategy=strategy,
        final_state=state,
    )


def replay(trace: GenerationTrace, env: GenEnv) -> GenState:
    """Apply the trace's actions from an empty state; returns the end state."""
    state = init_empty()
    for step in trace.steps:
        assert step.action in step.valid_targets, "teacher must be a valid target"
        state = apply(state, step.action, env)
    return state


def subsample_steps(
    trace: GenerationTrace, fraction: float, rng: random.Random
) -> list[TraceStep]:
    """Uniform sample without replacement of ceil(fraction * k) steps."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    k = len(trace.steps)
    m = math.ceil(fraction * k)
    idx = sorted(rng.sample(range(k), m))
    return [trace.steps[i] for i in idx]


def make_trace(
    mol: MolGraph,
    annotation: MotifAnnotation,
    strategy: OrderStrategy,
    env: GenEnv,
    rng: random.Random,
    source: str = "",
) -> GenerationTrace:
    """Convenience: compute an order and expand it in one call."""
    order = compute_order(mol, annotation, strategy, rng)
    return expand_trace(order, mol, annotation, env, source=source, strategy=strategy)


def _action_token(action: Action) -> str:
    if isinstance(action, AddAtom):
        return f"atom:{action.symbol}{action.charge:+d}" if action.charge else f"atom:{action.symbol}"
    if isinstance(action, AddMotif):
        return f"motif:{action.vocab_index}"
    if isinstance(action, SelectAttachment):
        return f"attach:{action.position}"
    if isinstance(action, AddBond):
        return f"bond:{action.partner}:{action.order}"
    if isinstance(action, StopBonds):
        return "stop"
    return "end"


def dump_trace(trace: GenerationTrace) -> str:
    """Line-oriented debug format: kind, target, valid-target list."""
    lines = []
    for step in trace.steps:
        kind = type(step.action).__name__
        valid = ",".join(_action_token(a) for a in step.valid_targets)
        lines.append(f"{kind}\t{_action_token(step.action)}\t{valid}")
    return "\n".join(lines) + "\n"
