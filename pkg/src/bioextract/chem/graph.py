"""Molecular graph model: atoms, bonds, attachment points, and validity checks.

All graphs produced by the SMILES parser store hydrogen counts explicitly on
each atom (implicit hydrogens are filled in during parsing), and aromatic
rings keep a kekulized bond order alongside the aromatic flags so valence
arithmetic always works on integer orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence


class ChemError(ValueError):
    """Base class for chemistry-kernel errors."""


class SmilesSyntaxError(ChemError):
    """Malformed SMILES text. Carries the offending position when known."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ValenceError(ChemError):
    """An atom's explicit valence exceeds what its element permits."""


class KekulizationError(ChemError):
    """An aromatic ring system admits no alternating single/double assignment."""


# Permitted valences per element at neutral charge. Elements absent from this
# table are unconstrained (metals, noble gases written in brackets, etc.).
VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "Si": (4,),
    "Se": (2, 4, 6),
    "As": (3, 5),
    "H": (1,),
}

# Elements of the SMILES organic subset (writable without brackets).
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}

# Elements that may carry the aromatic (lowercase) flag.
AROMATIC_ELEMENTS = {"B", "C", "N", "O", "P", "S", "Se", "As"}

_PERIODIC_TABLE = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm",
    "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn",
    "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu",
}

CHI_NONE = ""
CHI_CCW = "@"
CHI_CW = "@@"


def is_known_element(symbol: str) -> bool:
    return symbol == "*" or symbol in _PERIODIC_TABLE


def allowed_valences(element: str, charge: int) -> Optional[tuple[int, ...]]:
    """Permitted total valences for (element, charge), or None if unconstrained.

    Charge shifts follow the usual electron-counting conventions: N+ binds 4,
    O- binds 1, C+/C- bind 3, B- binds 4.
    """
    base = VALENCES.get(element)
    if base is None:
        return None
    if charge == 0:
        return base
    if element == "C":
        shifted = tuple(v - abs(charge) for v in base)
    elif element == "B":
        shifted = tuple(v - charge for v in base)
    else:
        # N, O, P, S, halogens and chalcogen-likes: valence tracks charge.
        shifted = tuple(v + charge for v in base)
    shifted = tuple(v for v in shifted if v >= 0)
    return shifted if shifted else None


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    explicit_hydrogens: int = 0
    isotope: Optional[int] = None
    # CHI_NONE / CHI_CCW ("@") / CHI_CW ("@@"); interpreted against
    # MolecularGraph.chiral_order for this atom's index.
    chirality: str = CHI_NONE
    aromatic: bool = False

    def __post_init__(self):
        if not is_known_element(self.element):
            raise ChemError(f"unknown element symbol {self.element!r}")
        if self.explicit_hydrogens < 0:
            raise ChemError("explicit_hydrogens must be >= 0")


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: int  # 1, 2 or 3; aromatic bonds keep their kekulized order
    aromatic: bool = False

    def other(self, idx: int) -> int:
        if idx == self.a:
            return self.b
        if idx == self.b:
            return self.a
        raise KeyError(idx)

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class DoubleBondStereo:
    """cis/trans configuration of one double bond.

    ``ref_a`` is a neighbor of ``a`` and ``ref_b`` a neighbor of ``b``;
    ``same_side`` says whether the two reference atoms lie on the same side
    of the a=b axis.
    """

    a: int
    b: int
    ref_a: int
    ref_b: int
    same_side: bool


# Sentinel used inside chiral_order for an implicit hydrogen written in a
# bracket atom ([C@H]): the H occupies a real neighbor position.
H_SENTINEL = -1


@dataclass(frozen=True)
class MolecularGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    # (atom_index, label) pairs; labels such as "R1" or "*" must be unique.
    attachment_points: tuple[tuple[int, str], ...] = ()
    # atom index -> ordered neighbor tuple fixing the meaning of its chirality
    # tag; entries are atom indices or H_SENTINEL.
    chiral_order: tuple[tuple[int, tuple[int, ...]], ...] = ()
    bond_stereo: tuple[DoubleBondStereo, ...] = ()

    def atom_count(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int) -> list[tuple[int, Bond]]:
        out = []
        for bond in self.bonds:
            if bond.a == idx:
                out.append((bond.b, bond))
            elif bond.b == idx:
                out.append((bond.a, bond))
        return out

    def degree(self, idx: int) -> int:
        return sum(1 for b in self.bonds if idx in (b.a, b.b))

    def adjacency(self) -> list[list[tuple[int, Bond]]]:
        adj: list[list[tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond))
            adj[bond.b].append((bond.a, bond))
        return adj

    def chiral_order_map(self) -> dict[int, tuple[int, ...]]:
        return dict(self.chiral_order)

    def attachment_labels(self) -> list[str]:
        return [label for _, label in self.attachment_points]

    def heavy_atom_count(self) -> int:
        """Atoms that are not placeholder attachment points."""
        placeholder = {i for i, _ in self.attachment_points}
        return sum(1 for i, a in enumerate(self.atoms) if i not in placeholder)


def validate(graph: MolecularGraph) -> None:
    """Check every MolecularGraph invariant; raise ChemError on violation."""
    n = graph.atom_count()
    seen_pairs: set[tuple[int, int]] = set()
    for bond in graph.bonds:
        if not (0 <= bond.a < n and 0 <= bond.b < n):
            raise ChemError(f"bond endpoint out of range: {bond}")
        if bond.a == bond.b:
            raise ChemError(f"self-bond on atom {bond.a}")
        if bond.key in seen_pairs:
            raise ChemError(f"duplicate bond between {bond.key}")
        seen_pairs.add(bond.key)
        if bond.order not in (1, 2, 3):
            raise ChemError(f"bond order must be 1, 2 or 3, got {bond.order}")

    placeholder_indices = set()
    labels_seen = set()
    for idx, label in graph.attachment_points:
        if not (0 <= idx < n):
            raise ChemError(f"attachment point index {idx} out of range")
        if graph.atoms[idx].element != "*":
            raise ChemError(f"attachment point {idx} is not a placeholder atom")
        if graph.degree(idx) != 1:
            raise ChemError(f"attachment point {idx} must have degree 1")
        if label in labels_seen:
            raise ChemError(f"duplicate attachment label {label!r}")
        labels_seen.add(label)
        placeholder_indices.add(idx)

    for idx, atom in enumerate(graph.atoms):
        if atom.element == "*":
            if idx not in placeholder_indices:
                raise ChemError(f"placeholder atom {idx} not registered as attachment point")
            continue
        check_valence(graph, idx)


def check_valence(graph: MolecularGraph, idx: int) -> None:
    atom = graph.atoms[idx]
    allowed = allowed_valences(atom.element, atom.formal_charge)
    if allowed is None:
        return
    total = atom.explicit_hydrogens
    for _, bond in graph.neighbors(idx):
        total += bond.order
    if total not in allowed and total > max(allowed):
        raise ValenceError(
            f"atom {idx} ({atom.element}, charge {atom.formal_charge:+d}) has valence "
            f"{total}, permitted {allowed}"
        )
    if total not in allowed:
        # Below-maximum but not an allowed value, e.g. S with 3 bonds: allow
        # only if some permitted valence is >= total (radicals / deficient
        # atoms are tolerated; over-valence is not).
        if all(v < total for v in allowed):
            raise ValenceError(
                f"atom {idx} ({atom.element}) has valence {total}, permitted {allowed}"
            )


def strip_stereo(graph: MolecularGraph) -> MolecularGraph:
    """Drop all chirality tags and double-bond configurations."""
    atoms = tuple(replace(a, chirality=CHI_NONE) for a in graph.atoms)
    return MolecularGraph(
        atoms=atoms,
        bonds=graph.bonds,
        attachment_points=graph.attachment_points,
        chiral_order=(),
        bond_stereo=(),
    )


def permute_atoms(graph: MolecularGraph, perm: Sequence[int]) -> MolecularGraph:
    """Relabel atoms so new index perm[i] holds old atom i.

    Used by tests to verify order-invariance of canonicalization and
    fingerprints. ``perm`` must be a permutation of range(n).
    """
    n = graph.atom_count()
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    atoms: list[Optional[Atom]] = [None] * n
    for old, new in enumerate(perm):
        atoms[new] = graph.atoms[old]

    def m(i: int) -> int:
        return i if i == H_SENTINEL else perm[i]

    bonds = tuple(
        Bond(a=m(b.a), b=m(b.b), order=b.order, aromatic=b.aromatic) for b in graph.bonds
    )
    attach = tuple((m(i), label) for i, label in graph.attachment_points)
    chiral = tuple(
        (m(i), tuple(m(x) for x in order)) for i, order in graph.chiral_order
    )
    stereo = tuple(
        DoubleBondStereo(m(s.a), m(s.b), m(s.ref_a), m(s.ref_b), s.same_side)
        for s in graph.bond_stereo
    )
    return MolecularGraph(
        atoms=tuple(atoms),  # type: ignore[arg-type]
        bonds=bonds,
        attachment_points=attach,
        chiral_order=chiral,
        bond_stereo=stereo,
    )


def find_rings(graph: MolecularGraph, max_size: int = 6, min_size: int = 3) -> list[tuple[int, ...]]:
    """All simple cycles of size min_size..max_size, each reported once.

    Bounded DFS is fine at molecule scale; rings are returned as atom-index
    tuples normalized to start at their smallest member.
    """
    adj = [[nbr for nbr, _ in lst] for lst in graph.adjacency()]
    rings: set[tuple[int, ...]] = set()

    def dfs(start: int, current: int, path: list[int], visited: set[int]):
        for nbr in adj[current]:
            if nbr == start and len(path) >= min_size:
                rings.add(_normalize_ring(path))
            elif nbr not in visited and nbr > start and len(path) < max_size:
                visited.add(nbr)
                path.append(nbr)
                dfs(start, nbr, path, visited)
                path.pop()
                visited.remove(nbr)

    for start in range(graph.atom_count()):
        dfs(start, start, [start], {start})
    return sorted(rings)


def _normalize_ring(path: Iterable[int]) -> tuple[int, ...]:
    path = list(path)
    k = path.index(min(path))
    rotated = path[k:] + path[:k]
    if len(rotated) > 2 and rotated[1] > rotated[-1]:
        rotated = [rotated[0]] + rotated[:0:-1]
    return tuple(rotated)
