"""Kekulization and aromatic ring perception.

Perception uses a bounded Huckel-style model: only 5- and 6-membered rings
are considered, every ring atom must hold a p orbital (a double bond, a
donatable lone pair, or an empty orbital on charged carbon / boron), and the
ring must collect exactly six pi electrons. Rings outside the model are left
in their kekulized form.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional, Sequence

from .graph import Atom, Bond, MolecularGraph, find_rings


def find_kekule_assignment(
    needing: Sequence[int], edges: Sequence[tuple[int, int]]
) -> Optional[set[int]]:
    """Pick edge positions forming a perfect matching over ``needing`` atoms.

    Every atom in ``needing`` must touch exactly one chosen edge; edges with
    an endpoint outside ``needing`` are unusable. Returns None when no
    assignment exists. Deterministic: atoms are processed in ascending order
    and edges in input order.
    """
    need = set(needing)
    usable: dict[int, list[tuple[int, int]]] = {atom: [] for atom in need}
    for pos, (a, b) in enumerate(edges):
        if a in need and b in need:
            usable[a].append((pos, b))
            usable[b].append((pos, a))

    order = sorted(need)
    covered: set[int] = set()
    chosen: set[int] = set()

    def extend(k: int) -> bool:
        while k < len(order) and order[k] in covered:
            k += 1
        if k == len(order):
            return True
        atom = order[k]
        for pos, partner in usable[atom]:
            if partner in covered:
                continue
            covered.add(atom)
            covered.add(partner)
            chosen.add(pos)
            if extend(k + 1):
                return True
            covered.discard(atom)
            covered.discard(partner)
            chosen.discard(pos)
        return False

    return chosen if extend(0) else None


def _pi_contribution(
    graph: MolecularGraph,
    idx: int,
    ring_atoms: frozenset[int],
    adj: list[list[tuple[int, Bond]]],
) -> Optional[int]:
    """Pi electrons atom idx donates to a candidate ring, or None if the atom
    cannot sit in an aromatic ring at all."""
    atom = graph.atoms[idx]
    doubles = [nbr for nbr, bond in adj[idx] if bond.order == 2]
    triples = [nbr for nbr, bond in adj[idx] if bond.order == 3]
    if triples:
        return None
    if doubles:
        return 1 if any(nbr in ring_atoms for nbr in doubles) else 0

    elem = atom.element
    q = atom.formal_charge
    sigma = len(adj[idx]) + atom.explicit_hydrogens
    if elem == "C":
        if q == -1 and sigma == 3:
            return 2
        if q == 1 and sigma == 3:
            return 0
        return None
    if elem == "B":
        return 0 if q == 0 else None
    if elem in ("N", "P", "As"):
        if q == 0 and sigma == 3:
            return 2
        if q == -1 and sigma == 2:
            return 2
        return None
    if elem in ("O", "S", "Se"):
        return 2 if q == 0 and sigma == 2 else None
    return None


def perceive_aromaticity(graph: MolecularGraph) -> MolecularGraph:
    """Recompute aromatic flags from the kekulized structure.

    Flags present on input atoms and bonds are discarded; only rings passing
    the six-electron count come back flagged. Stereo records on bonds that
    turn aromatic are dropped.
    """
    rings = find_rings(graph, max_size=6, min_size=5)
    if not rings:
        return _apply_flags(graph, frozenset(), frozenset())
    ring_atoms = frozenset(a for ring in rings for a in ring)
    adj = graph.adjacency()

    pi = {idx: _pi_contribution(graph, idx, ring_atoms, adj) for idx in ring_atoms}

    aromatic_atoms: set[int] = set()
    aromatic_bonds: set[tuple[int, int]] = set()
    for ring in rings:
        contributions = [pi[a] for a in ring]
        if any(c is None for c in contributions):
            continue
        if sum(contributions) != 6:  # type: ignore[arg-type]
            continue
        aromatic_atoms.update(ring)
        for k, a in enumerate(ring):
            b = ring[(k + 1) % len(ring)]
            aromatic_bonds.add((a, b) if a < b else (b, a))
    return _apply_flags(graph, frozenset(aromatic_atoms), frozenset(aromatic_bonds))


def _apply_flags(
    graph: MolecularGraph,
    aromatic_atoms: frozenset[int],
    aromatic_bonds: frozenset[tuple[int, int]],
) -> MolecularGraph:
    atoms = tuple(
        a if a.aromatic == (i in aromatic_atoms) else replace(a, aromatic=i in aromatic_atoms)
        for i, a in enumerate(graph.atoms)
    )
    bonds = tuple(
        b if b.aromatic == (b.key in aromatic_bonds) else replace(b, aromatic=b.key in aromatic_bonds)
        for b in graph.bonds
    )
    stereo = tuple(
        s
        for s in graph.bond_stereo
        if ((s.a, s.b) if s.a < s.b else (s.b, s.a)) not in aromatic_bonds
    )
    if atoms == graph.atoms and bonds == graph.bonds and stereo == graph.bond_stereo:
        return graph
    return MolecularGraph(
        atoms=atoms,
        bonds=bonds,
        attachment_points=graph.attachment_points,
        chiral_order=graph.chiral_order,
        bond_stereo=stereo,
    )
