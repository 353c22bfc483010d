"""Canonical SMILES output.

Ranking is iterative neighborhood refinement seeded from per-atom invariants
(element, charge, degree, hydrogen count, isotope, aromatic flag, attachment
label, chirality presence). Residual symmetry is resolved by individualizing
each member of the first tied cell and keeping the lexicographically smallest
result, so the output never depends on input atom order.

The writer starts at the lowest-ranked atom and walks neighbors in rank
order. Tetrahedral tags are re-oriented to the written neighbor sequence by
permutation parity; double-bond configurations are re-expressed by two-
coloring the adjacent single bonds, rooted at the lowest-ranked bond so the
choice of '/' versus '\\' is itself canonical.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Optional

from .graph import (
    CHI_CCW,
    CHI_CW,
    ORGANIC_SUBSET,
    H_SENTINEL,
    Bond,
    ChemError,
    MolecularGraph,
    allowed_valences,
    strip_stereo,
    validate,
)

_BARE_AROMATIC = {"B", "C", "N", "O", "P", "S"}


def _bond_label(bond: Bond) -> str:
    return "a" if bond.aromatic else str(bond.order)


def _dense(values: list) -> list[int]:
    order = {v: r for r, v in enumerate(sorted(set(values)))}
    return [order[v] for v in values]


def _initial_invariants(graph: MolecularGraph) -> list[tuple]:
    labels = {i: lab for i, lab in graph.attachment_points}
    degree = [0] * graph.atom_count()
    for bond in graph.bonds:
        degree[bond.a] += 1
        degree[bond.b] += 1
    out = []
    for i, atom in enumerate(graph.atoms):
        out.append(
            (
                atom.element,
                atom.formal_charge,
                degree[i],
                atom.explicit_hydrogens,
                atom.isotope or 0,
                atom.aromatic,
                labels.get(i, ""),
                bool(atom.chirality),
            )
        )
    return out


def _refine(adj: list[list[tuple[int, str]]], ranks: list[int]) -> list[int]:
    n = len(ranks)
    while True:
        sigs = [
            (ranks[i], tuple(sorted((lab, ranks[nbr]) for nbr, lab in adj[i])))
            for i in range(n)
        ]
        new = _dense(sigs)
        if new == ranks:
            return ranks
        ranks = new


def to_canonical_smiles(graph: MolecularGraph, include_stereo: bool = True) -> str:
    """Write the canonical SMILES for a validated molecular graph."""
    if graph.atom_count() == 0:
        raise ChemError("cannot write an empty graph")
    validate(graph)
    if not include_stereo:
        graph = strip_stereo(graph)
    adj: list[list[tuple[int, str]]] = [[] for _ in graph.atoms]
    for bond in graph.bonds:
        lab = _bond_label(bond)
        adj[bond.a].append((bond.b, lab))
        adj[bond.b].append((bond.a, lab))
    ranks = _refine(adj, _dense(_initial_invariants(graph)))
    return _resolve_ties(graph, adj, ranks)


def _resolve_ties(
    graph: MolecularGraph, adj: list[list[tuple[int, str]]], ranks: list[int]
) -> str:
    counts: dict[int, int] = defaultdict(int)
    for r in ranks:
        counts[r] += 1
    tied = sorted(r for r, c in counts.items() if c > 1)
    if not tied:
        return _write(graph, ranks)
    cell = [i for i, r in enumerate(ranks) if r == tied[0]]
    best: Optional[str] = None
    for chosen in cell:
        seeded = _dense(
            [(ranks[i], 0 if i == chosen else 1) for i in range(len(ranks))]
        )
        candidate = _resolve_ties(graph, adj, _refine(adj, seeded))
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


# -- writer ------------------------------------------------------------


def _write(graph: MolecularGraph, ranks: list[int]) -> str:
    n = graph.atom_count()
    adj: list[list[tuple[int, Bond]]] = [[] for _ in range(n)]
    for bond in graph.bonds:
        adj[bond.a].append((bond.b, bond))
        adj[bond.b].append((bond.a, bond))
    for lst in adj:
        lst.sort(key=lambda e: ranks[e[0]])

    start = ranks.index(0)
    parent: dict[int, Optional[int]] = {start: None}
    children: dict[int, list[tuple[int, Bond]]] = defaultdict(list)
    visit_index: dict[int, int] = {}
    visit_order: list[int] = []
    ring_bonds: list[tuple[int, int, Bond]] = []  # (opener, closer, bond)
    used: set[tuple[int, int]] = set()

    def visit(u: int) -> None:
        visit_index[u] = len(visit_order)
        visit_order.append(u)
        for v, bond in adj[u]:
            if bond.key in used:
                continue
            used.add(bond.key)
            if v not in visit_index:
                parent[v] = u
                children[u].append((v, bond))
                visit(v)
            else:
                ring_bonds.append((v, u, bond))

    visit(start)
    if len(visit_order) != n:
        raise ChemError("graph is disconnected; cannot write a single SMILES")

    tokens_at: dict[int, list[tuple[int, Bond, bool]]] = defaultdict(list)
    for opener, closer, bond in ring_bonds:
        tokens_at[opener].append((closer, bond, True))
        tokens_at[closer].append((opener, bond, False))
    for u in tokens_at:
        tokens_at[u].sort(key=lambda t: visit_index[t[0]])

    digit_of: dict[tuple[int, int], int] = {}
    in_use: set[int] = set()
    for u in visit_order:
        for partner, bond, opening in tokens_at.get(u, ()):
            if opening:
                digit = next(d for d in range(1, 100) if d not in in_use)
                digit_of[bond.key] = digit
                in_use.add(digit)
            else:
                in_use.discard(digit_of[bond.key])

    slashes = _assign_slashes(graph, ranks)
    attach_labels = {i: lab for i, lab in graph.attachment_points}
    chiral_map = graph.chiral_order_map()
    order_sum = [0] * n
    for bond in graph.bonds:
        order_sum[bond.a] += bond.order
        order_sum[bond.b] += bond.order

    def bond_text(u: int, v: int, bond: Bond) -> str:
        if bond.aromatic:
            return ""
        if bond.order == 1:
            if bond.key in slashes:
                s = slashes[bond.key] if u < v else -slashes[bond.key]
                return "/" if s > 0 else "\\"
            if graph.atoms[u].aromatic and graph.atoms[v].aromatic:
                return "-"
            return ""
        return "=" if bond.order == 2 else "#"

    def written_neighbors(u: int) -> list[int]:
        atom = graph.atoms[u]
        out: list[int] = []
        if parent[u] is not None:
            out.append(parent[u])  # type: ignore[arg-type]
        if atom.chirality and atom.explicit_hydrogens > 0:
            out.append(H_SENTINEL)
        out.extend(p for p, _, _ in tokens_at.get(u, ()))
        out.extend(v for v, _ in children[u])
        return out

    def atom_token(u: int) -> str:
        atom = graph.atoms[u]
        if u in attach_labels:
            label = attach_labels[u]
            return "*" if label.startswith("*") else f"[{label}]"
        elem = atom.element
        sym = elem.lower() if atom.aromatic else elem
        chir = ""
        if atom.chirality:
            stored = chiral_map.get(u)
            if stored is None:
                raise ChemError(f"atom {u} has a chirality tag but no neighbor order")
            parity = _parity(stored, written_neighbors(u))
            if parity == 0:
                chir = atom.chirality
            else:
                chir = CHI_CW if atom.chirality == CHI_CCW else CHI_CCW
        bracket = (
            elem not in ORGANIC_SUBSET
            or atom.formal_charge != 0
            or atom.isotope is not None
            or chir != ""
            or (atom.aromatic and elem not in _BARE_AROMATIC)
            or (atom.aromatic and elem in ("N", "P", "As") and atom.explicit_hydrogens > 0)
            or _bare_fill(elem, order_sum[u]) != atom.explicit_hydrogens
        )
        if not bracket:
            return sym
        iso = str(atom.isotope) if atom.isotope is not None else ""
        h = atom.explicit_hydrogens
        h_text = "" if h == 0 else ("H" if h == 1 else f"H{h}")
        q = atom.formal_charge
        charge = "" if q == 0 else ("+" if q == 1 else "-" if q == -1 else f"{q:+d}")
        return f"[{iso}{sym}{chir}{h_text}{charge}]"

    def emit(u: int) -> str:
        parts = [atom_token(u)]
        for partner, bond, opening in tokens_at.get(u, ()):
            digit = digit_of[bond.key]
            digit_text = str(digit) if digit < 10 else f"%{digit:02d}"
            if opening:
                parts.append(bond_text(u, partner, bond) + digit_text)
            else:
                parts.append(digit_text)
        kids = children[u]
        for v, bond in kids[:-1]:
            parts.append("(" + bond_text(u, v, bond) + emit(v) + ")")
        if kids:
            v, bond = kids[-1]
            parts.append(bond_text(u, v, bond) + emit(v))
        return "".join(parts)

    return emit(start)


def _bare_fill(element: str, order_sum: int) -> Optional[int]:
    allowed = allowed_valences(element, 0)
    if allowed is None:
        return 0
    fillable = [v for v in allowed if v >= order_sum]
    return (min(fillable) - order_sum) if fillable else None


def _parity(stored: tuple[int, ...], written: list[int]) -> int:
    if sorted(stored) != sorted(written):
        raise ChemError(
            f"chiral neighbor order {stored} does not match written neighbors {written}"
        )
    pos = {v: k for k, v in enumerate(stored)}
    perm = [pos[v] for v in written]
    inversions = sum(
        1
        for x in range(len(perm))
        for y in range(x + 1, len(perm))
        if perm[x] > perm[y]
    )
    return inversions % 2


def _assign_slashes(graph: MolecularGraph, ranks: list[int]) -> dict[tuple[int, int], int]:
    """Slash value per single bond adjacent to a configured double bond.

    The value is the sign of the bond read from its lower atom index to the
    higher ("/" is +1). Constraints: substituents on the same double-bond
    atom sit on opposite sides; the stored configuration fixes the relation
    across the double bond. Each connected constraint component is rooted at
    its lowest-ranked bond for order-independent output.
    """
    if not graph.bond_stereo:
        return {}
    singles: dict[int, list[tuple[int, tuple[int, int]]]] = defaultdict(list)
    for bond in graph.bonds:
        if bond.order == 1 and not bond.aromatic:
            singles[bond.a].append((bond.b, bond.key))
            singles[bond.b].append((bond.a, bond.key))

    def orient(u: int, center: int) -> int:
        # sign relating slash(u -> center) to the variable stored on key
        return 1 if u < center else -1

    edges: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = defaultdict(list)
    nodes: set[tuple[int, int]] = set()

    def add_constraint(k1: tuple[int, int], k2: tuple[int, int], product: int) -> None:
        nodes.add(k1)
        nodes.add(k2)
        edges[k1].append((k2, product))
        edges[k2].append((k1, product))

    for rec in graph.bond_stereo:
        key_a = (rec.ref_a, rec.a) if rec.ref_a < rec.a else (rec.a, rec.ref_a)
        key_b = (rec.b, rec.ref_b) if rec.b < rec.ref_b else (rec.ref_b, rec.b)
        s1 = orient(rec.ref_a, rec.a)
        s2 = orient(rec.ref_b, rec.b)
        product = (-1 if rec.same_side else 1) * s1 * s2
        add_constraint(key_a, key_b, product)
        for center in (rec.a, rec.b):
            nbrs = [e for e in singles.get(center, ()) if e[0] not in (rec.a, rec.b)]
            nbrs.sort()
            for (u1, k1), (u2, k2) in zip(nbrs, nbrs[1:]):
                add_constraint(k1, k2, -orient(u1, center) * orient(u2, center))

    def rank_key(key: tuple[int, int]) -> tuple[int, int]:
        ra, rb = ranks[key[0]], ranks[key[1]]
        return (min(ra, rb), max(ra, rb))

    assignment: dict[tuple[int, int], int] = {}
    for root in sorted(nodes, key=rank_key):
        if root in assignment:
            continue
        # root convention: the slash read from the lower-RANKED atom of the
        # root bond is +1
        a, b = root
        assignment[root] = 1 if ranks[a] < ranks[b] else -1
        queue = [root]
        while queue:
            current = queue.pop(0)
            for nxt, product in sorted(
                edges[current], key=lambda e: rank_key(e[0])
            ):
                want = assignment[current] * product
                if nxt in assignment:
                    if assignment[nxt] != want:
                        raise ChemError("inconsistent double-bond stereo constraints")
                    continue
                assignment[nxt] = want
                queue.append(nxt)
    return assignment
