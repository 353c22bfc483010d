"""Circular fingerprints and Tanimoto similarity.

Environment codes follow the usual extended-connectivity construction: every
atom starts from a local invariant, then absorbs its neighbors' previous
codes for each radius step. Codes are combined with fixed 64-bit integer
mixing (FNV-1a for element symbols, a splitmix64-style finalizer for the
rest), so bit sets are reproducible across processes and platforms; builtin
hash() would not be.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import ChemError, MolecularGraph

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


_ELEMENT_CODES: dict[str, int] = {}


def _element_code(element: str) -> int:
    code = _ELEMENT_CODES.get(element)
    if code is None:
        code = _ELEMENT_CODES[element] = _fnv1a(element.encode("utf-8"))
    return code


def _combine(h: int, values) -> int:
    for v in values:
        h = ((h ^ v) * _FNV_PRIME + _GOLD) & _MASK64
    # splitmix64 finalizer: the fold onto `width` keeps only low bits, so
    # they must carry the whole state
    h ^= h >> 30
    h = (h * 0xBF58476D1CE4E5B9) & _MASK64
    h ^= h >> 27
    h = (h * 0x94D049BB133111EB) & _MASK64
    return h ^ (h >> 31)


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int
    radius: int

    def popcount(self) -> int:
        return self.bits.bit_count()

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise ChemError("fingerprint bits exceed the declared width")


def strip_attachments(graph: MolecularGraph) -> MolecularGraph:
    """Remove placeholder atoms, reindexing the remaining graph."""
    dropped = {i for i, _ in graph.attachment_points}
    if not dropped:
        return graph
    remap: dict[int, int] = {}
    atoms = []
    for i, atom in enumerate(graph.atoms):
        if i in dropped:
            continue
        remap[i] = len(atoms)
        atoms.append(atom)
    bonds = tuple(
        type(b)(a=remap[b.a], b=remap[b.b], order=b.order, aromatic=b.aromatic)
        for b in graph.bonds
        if b.a not in dropped and b.b not in dropped
    )
    chiral = tuple(
        (remap[i], tuple(remap.get(x, x) for x in order))
        for i, order in graph.chiral_order
        if i not in dropped and not any(x in dropped for x in order)
    )
    stereo = tuple(
        type(s)(remap[s.a], remap[s.b], remap[s.ref_a], remap[s.ref_b], s.same_side)
        for s in graph.bond_stereo
        if not {s.a, s.b, s.ref_a, s.ref_b} & dropped
    )
    return MolecularGraph(
        atoms=tuple(atoms),
        bonds=bonds,
        attachment_points=(),
        chiral_order=chiral,
        bond_stereo=stereo,
    )


def circular_fingerprint(
    graph: MolecularGraph,
    radius: int = 2,
    width: int = 2048,
    strip_placeholders: bool = False,
) -> Fingerprint:
    """Extended-connectivity fingerprint over atom environments.

    Attachment points must be stripped first; pass strip_placeholders=True to
    have that done here.
    """
    if graph.attachment_points:
        if not strip_placeholders:
            raise ChemError(
                "fingerprint input has attachment points; strip them first"
            )
        graph = strip_attachments(graph)
    if radius < 0 or width <= 0:
        raise ChemError("radius must be >= 0 and width positive")

    # bond labels as small ints: 0 aromatic, else the order
    adj: list[list[tuple[int, int]]] = [[] for _ in graph.atoms]
    for bond in graph.bonds:
        lab = 0 if bond.aromatic else bond.order
        adj[bond.a].append((bond.b, lab))
        adj[bond.b].append((bond.a, lab))

    codes = [
        _combine(
            1,
            (
                _element_code(atom.element),
                atom.formal_charge + 16,
                atom.explicit_hydrogens,
                atom.isotope or 0,
                int(atom.aromatic),
                len(adj[i]),
            ),
        )
        for i, atom in enumerate(graph.atoms)
    ]
    bits = 0
    for c in codes:
        bits |= 1 << (c % width)
    for _ in range(radius):
        codes = [
            _combine(
                2,
                (codes[i], *(
                    v
                    for lab, code in sorted((lab, codes[nbr]) for nbr, lab in adj[i])
                    for v in (lab, code)
                )),
            )
            for i in range(len(codes))
        ]
        for c in codes:
            bits |= 1 << (c % width)
    return Fingerprint(bits=bits, width=width, radius=radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; defined as 1.0 when both sets are empty."""
    if a.width != b.width or a.radius != b.radius:
        raise ChemError(
            f"fingerprint parameters differ: ({a.width},{a.radius}) vs ({b.width},{b.radius})"
        )
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
