"""R-group resolution and deterministic scaffold zipping.

A scaffold carries labeled attachment points ([R1], [R2], ...); each table
row assigns every label a substituent given as a SMILES fragment, a table
abbreviation, a formula, an IUPAC name (resolved through a client), a
pointer to a drawn fragment, or hydrogen. Zipping merges fragment and
scaffold at their placeholder pair into one single bond; the hydrogen
sentinel (an empty graph) deletes the placeholder and adds one implicit H.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Union

from ..chem import (
    Atom,
    Bond,
    ChemError,
    DoubleBondStereo,
    MolecularGraph,
    ValenceError,
    parse_smiles,
    to_canonical_smiles,
    validate,
)
from ..chem.graph import CHI_NONE, H_SENTINEL
from ..join.join import StructureRecord
from .abbreviations import AbbreviationError, AbbreviationTable, default_abbreviations

SUBSTITUENT_KINDS = (
    "fragment_smiles",
    "visual_index",
    "iupac_name",
    "abbreviation",
    "formula",
    "hydrogen",
)

FAILURE_CAUSES = (
    "unknown_abbreviation",
    "name_resolution_failed",
    "missing_visual_detection",
    "invalid_fragment",
    "missing_label",
    "valence_violation",
    "unsupported_markush",
)

# The empty graph is the hydrogen sentinel: zipping it deletes the
# placeholder and increments the neighbor's hydrogen count.
HYDROGEN_FRAGMENT = MolecularGraph(atoms=(), bonds=())

# Payload spellings that mean "this cell is a hydrogen", seen in real tables
_HYDROGEN_SPELLINGS = {"h", "-h", "hydrogen"}


class MarkushError(Exception):
    """Base class; carries a RowFailure cause."""

    def __init__(self, cause: str, message: str):
        if cause not in FAILURE_CAUSES:
            raise ValueError(f"unknown failure cause {cause!r}")
        self.cause = cause
        super().__init__(message)


class ResolutionError(MarkushError):
    """A substituent could not be turned into a fragment graph."""


class ZipError(MarkushError):
    """Merging resolved fragments onto the scaffold failed."""


@dataclass(frozen=True)
class Substituent:
    kind: str
    payload: str = ""

    def __post_init__(self):
        if self.kind not in SUBSTITUENT_KINDS:
            raise ValueError(f"unknown substituent kind {self.kind!r}")
        if self.kind != "hydrogen" and not self.payload:
            raise ValueError(f"substituent of kind {self.kind!r} needs a payload")


@dataclass(frozen=True)
class MarkushScaffold:
    graph: MolecularGraph
    labels: frozenset[str]

    def __post_init__(self):
        validate(self.graph)
        graph_labels = set(self.graph.attachment_labels())
        if not graph_labels:
            raise ValueError("a Markush scaffold needs at least one attachment point")
        if graph_labels != set(self.labels):
            raise ValueError(
                f"label set {sorted(self.labels)} does not match the graph's "
                f"attachment points {sorted(graph_labels)}"
            )


def scaffold_from_smiles(text: str) -> MarkushScaffold:
    try:
        graph = parse_smiles(text)
    except ChemError as exc:
        raise MarkushError("unsupported_markush", f"scaffold does not parse: {exc}") from exc
    if not graph.attachment_points:
        raise MarkushError("unsupported_markush", "scaffold has no attachment points")
    return MarkushScaffold(graph=graph, labels=frozenset(graph.attachment_labels()))


@dataclass(frozen=True)
class RGroupRow:
    coreference: str
    assignment: tuple[tuple[str, Substituent], ...]

    def __post_init__(self):
        if not self.coreference:
            raise ValueError("row needs a compound coreference")
        labels = [label for label, _ in self.assignment]
        if len(labels) != len(set(labels)):
            raise ValueError("row assigns one label twice")

    def as_mapping(self) -> dict[str, Substituent]:
        return dict(self.assignment)


@dataclass(frozen=True)
class RGroupTable:
    rows: tuple[RGroupRow, ...]
    # labels the depiction marks with an "R = H unless stated" footnote;
    # omission of any other label is a row failure, not silent hydrogen
    hydrogen_default_labels: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RowFailure:
    coreference: str
    cause: str
    detail: str


def resolve_substituent(
    s: Substituent,
    abbrevs: AbbreviationTable,
    name_client=None,
    detections: Optional[Mapping[str, str]] = None,
) -> MolecularGraph:
    """Turn one substituent into a fragment graph with one attachment point.

    ``detections`` maps detection id to the recognized fragment SMILES for
    kind=visual_index. ``name_client`` is anything with .resolve(name) or a
    plain callable returning SMILES text.
    """
    if s.kind == "hydrogen":
        return HYDROGEN_FRAGMENT

    if s.kind in ("abbreviation", "formula"):
        token = s.payload.strip()
        if token.casefold() in _HYDROGEN_SPELLINGS:
            return HYDROGEN_FRAGMENT
        try:
            smiles = abbrevs.lookup(token)
        except AbbreviationError as exc:
            raise ResolutionError("unknown_abbreviation", str(exc)) from exc
        return _parse_fragment(smiles, f"abbreviation {token!r}")

    if s.kind == "fragment_smiles":
        return _parse_fragment(s.payload, f"fragment {s.payload!r}")

    if s.kind == "iupac_name":
        if name_client is None:
            raise ResolutionError(
                "name_resolution_failed", f"no name client to resolve {s.payload!r}"
            )
        resolve = getattr(name_client, "resolve", name_client)
        try:
            smiles = resolve(s.payload)
        except Exception as exc:
            raise ResolutionError(
                "name_resolution_failed", f"name client failed on {s.payload!r}: {exc}"
            ) from exc
        return _parse_fragment(smiles, f"name {s.payload!r}")

    # visual_index
    if detections is None or s.payload not in detections:
        raise ResolutionError(
            "missing_visual_detection", f"no detection with id {s.payload!r}"
        )
    return _parse_fragment(detections[s.payload], f"detection {s.payload!r}")


def _parse_fragment(smiles: str, described_as: str) -> MolecularGraph:
    try:
        graph = parse_smiles(smiles)
    except ChemError as exc:
        raise ResolutionError("invalid_fragment", f"{described_as} does not parse: {exc}") from exc
    if len(graph.attachment_points) != 1:
        raise ResolutionError(
            "invalid_fragment",
            f"{described_as} must carry exactly one attachment point, "
            f"found {len(graph.attachment_points)}",
        )
    return graph


def zip_assignment(
    scaffold: MarkushScaffold, assignment: Mapping[str, MolecularGraph]
) -> MolecularGraph:
    """Merge resolved fragments onto the scaffold; result has no placeholders.

    Conserves atoms: |product| = |scaffold| + sum(|fragment|) - 2 * labels
    (each zip consumes the scaffold placeholder and the fragment placeholder;
    hydrogen rows consume only the scaffold one and add an implicit H).
    """
    missing = set(scaffold.labels) - set(assignment)
    if missing:
        raise ZipError("missing_label", f"no fragment for labels {sorted(missing)}")
    extra = set(assignment) - set(scaffold.labels)
    if extra:
        raise ValueError(f"assignment covers labels absent from the scaffold: {sorted(extra)}")

    atoms: list[Atom] = list(scaffold.graph.atoms)
    bonds: list[Bond] = list(scaffold.graph.bonds)
    chiral: dict[int, list[int]] = {i: list(o) for i, o in scaffold.graph.chiral_order}
    stereo: list[DoubleBondStereo] = list(scaffold.graph.bond_stereo)
    placeholder_of = {label: idx for idx, label in scaffold.graph.attachment_points}
    neighbor_of = {
        idx: scaffold.graph.neighbors(idx)[0][0] for idx in placeholder_of.values()
    }
    deleted: set[int] = set()

    for label in sorted(scaffold.labels):
        p_s = placeholder_of[label]
        n_s = neighbor_of[p_s]
        fragment = assignment[label]
        deleted.add(p_s)
        if fragment.atom_count() == 0:
            atoms[n_s] = replace(
                atoms[n_s], explicit_hydrogens=atoms[n_s].explicit_hydrogens + 1
            )
            _retarget_chiral(chiral, atoms, n_s, p_s, H_SENTINEL)
            stereo = _retarget_stereo_hydrogen(stereo, bonds, p_s, n_s)
            continue

        offset = len(atoms)
        f_attach = fragment.attachment_points[0][0]
        f_neighbor = fragment.neighbors(f_attach)[0][0]
        atoms.extend(fragment.atoms)
        bonds.extend(
            Bond(a=b.a + offset, b=b.b + offset, order=b.order, aromatic=b.aromatic)
            for b in fragment.bonds
        )
        for i, order in fragment.chiral_order:
            chiral[i + offset] = [
                x if x == H_SENTINEL else x + offset for x in order
            ]
        stereo.extend(
            DoubleBondStereo(
                s.a + offset, s.b + offset, s.ref_a + offset, s.ref_b + offset, s.same_side
            )
            for s in fragment.bond_stereo
        )
        p_f = f_attach + offset
        n_f = f_neighbor + offset
        deleted.add(p_f)
        bonds.append(Bond(a=n_s, b=n_f, order=1))
        _retarget_chiral(chiral, atoms, n_s, p_s, n_f)
        _retarget_chiral(chiral, atoms, n_f, p_f, n_s)
        stereo = [_retarget_stereo(s, p_s, n_f) for s in stereo]
        stereo = [_retarget_stereo(s, p_f, n_s) for s in stereo]

    remap: dict[int, int] = {}
    final_atoms: list[Atom] = []
    for idx, atom in enumerate(atoms):
        if idx in deleted:
            continue
        remap[idx] = len(final_atoms)
        final_atoms.append(atom)
    final_bonds = tuple(
        Bond(a=remap[b.a], b=remap[b.b], order=b.order, aromatic=b.aromatic)
        for b in bonds
        if b.a not in deleted and b.b not in deleted
    )
    final_chiral = tuple(
        (remap[i], tuple(x if x == H_SENTINEL else remap[x] for x in order))
        for i, order in sorted(chiral.items())
        if i not in deleted
    )
    final_stereo = tuple(
        DoubleBondStereo(remap[s.a], remap[s.b], remap[s.ref_a], remap[s.ref_b], s.same_side)
        for s in stereo
        if not {s.a, s.b, s.ref_a, s.ref_b} & deleted
    )
    result = MolecularGraph(
        atoms=tuple(final_atoms),
        bonds=final_bonds,
        attachment_points=(),
        chiral_order=final_chiral,
        bond_stereo=final_stereo,
    )
    try:
        validate(result)
    except ValenceError as exc:
        raise ZipError("valence_violation", str(exc)) from exc
    return result


def _retarget_chiral(
    chiral: dict[int, list[int]], atoms: list[Atom], center: int, old: int, new: int
) -> None:
    order = chiral.get(center)
    if order is None or old not in order:
        return
    if new == H_SENTINEL and H_SENTINEL in order:
        # two indistinguishable hydrogens: the center is no stereocenter
        atoms[center] = replace(atoms[center], chirality=CHI_NONE)
        del chiral[center]
        return
    order[order.index(old)] = new


def _retarget_stereo(s: DoubleBondStereo, old: int, new: int) -> DoubleBondStereo:
    if s.ref_a == old:
        return DoubleBondStereo(s.a, s.b, new, s.ref_b, s.same_side)
    if s.ref_b == old:
        return DoubleBondStereo(s.a, s.b, s.ref_a, new, s.same_side)
    return s


def _retarget_stereo_hydrogen(
    stereo: list[DoubleBondStereo], bonds: list[Bond], placeholder: int, center: int
) -> list[DoubleBondStereo]:
    """A stereo reference replaced by hydrogen moves to the center's other
    substituent with a flipped side; with no other substituent it is lost."""
    out = []
    for s in stereo:
        if placeholder not in (s.ref_a, s.ref_b):
            out.append(s)
            continue
        other_end = s.b if s.ref_a == placeholder else s.a
        partner = s.a if s.ref_a == placeholder else s.b
        candidates = [
            b.other(center)
            for b in bonds
            if center in (b.a, b.b)
            and b.order == 1
            and b.other(center) not in (placeholder, partner, other_end)
        ]
        if not candidates:
            continue
        new_ref = min(candidates)
        if s.ref_a == placeholder:
            out.append(DoubleBondStereo(s.a, s.b, new_ref, s.ref_b, not s.same_side))
        else:
            out.append(DoubleBondStereo(s.a, s.b, s.ref_a, new_ref, not s.same_side))
    return out


def enumerate_rows(
    scaffold: MarkushScaffold,
    table: RGroupTable,
    abbrevs: Optional[AbbreviationTable] = None,
    name_client=None,
    detections: Optional[Mapping[str, str]] = None,
    base_provenance: Sequence[str] = (),
) -> tuple[list[StructureRecord], list[RowFailure]]:
    """One StructureRecord per resolvable row, one RowFailure otherwise.

    Total: |records| + |failures| = |rows|. A label omitted by a row turns
    into hydrogen only when listed in table.hydrogen_default_labels.
    """
    if abbrevs is None:
        abbrevs = default_abbreviations()
    records: list[StructureRecord] = []
    failures: list[RowFailure] = []
    for row in table.rows:
        outcome = _enumerate_one(
            scaffold, row, table.hydrogen_default_labels, abbrevs, name_client,
            detections, tuple(base_provenance),
        )
        if isinstance(outcome, RowFailure):
            failures.append(outcome)
        else:
            records.append(outcome)
    return records, failures


def _enumerate_one(
    scaffold: MarkushScaffold,
    row: RGroupRow,
    hydrogen_defaults: frozenset[str],
    abbrevs: AbbreviationTable,
    name_client,
    detections: Optional[Mapping[str, str]],
    base_provenance: tuple[str, ...],
) -> Union[StructureRecord, RowFailure]:
    assignment = row.as_mapping()
    unknown = set(assignment) - set(scaffold.labels)
    if unknown:
        return RowFailure(
            coreference=row.coreference,
            cause="unsupported_markush",
            detail=f"row assigns labels absent from the scaffold: {sorted(unknown)}",
        )
    for label in sorted(set(scaffold.labels) - set(assignment)):
        if label in hydrogen_defaults:
            assignment[label] = Substituent(kind="hydrogen")
        else:
            return RowFailure(
                coreference=row.coreference,
                cause="missing_label",
                detail=f"row gives no substituent for {label}",
            )

    fragments: dict[str, MolecularGraph] = {}
    provenance = list(base_provenance)
    try:
        for label in sorted(assignment):
            sub = assignment[label]
            fragments[label] = resolve_substituent(sub, abbrevs, name_client, detections)
            if sub.kind == "visual_index":
                provenance.append(sub.payload)
        product = zip_assignment(scaffold, fragments)
    except MarkushError as exc:
        return RowFailure(coreference=row.coreference, cause=exc.cause, detail=str(exc))
    return StructureRecord(
        coreference=row.coreference,
        smiles=to_canonical_smiles(product),
        origin="markush_row",
        provenance=tuple(provenance),
    )
