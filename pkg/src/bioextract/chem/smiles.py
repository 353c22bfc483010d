"""SMILES reader for the dialect used across the extraction pipeline.

Supported: organic subset, bracket atoms, ring closures (including %nn),
branches, charges, isotopes, tetrahedral chirality (@/@@), directional
bonds (/ and \\), and the placeholders "*" and [R<n>] which become
attachment points. Reactions (">"), multi-component dots, and query
features are rejected.

Parsing pipeline: structural parse -> kekulization of lowercase atoms ->
implicit hydrogen fill -> valence check -> aromatic re-perception. The
re-perception step means Kekule and lowercase spellings of the same ring
land on identical graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .aromatic import find_kekule_assignment, perceive_aromaticity
from .graph import (
    AROMATIC_ELEMENTS,
    CHI_CCW,
    CHI_CW,
    CHI_NONE,
    H_SENTINEL,
    Atom,
    Bond,
    ChemError,
    DoubleBondStereo,
    KekulizationError,
    MolecularGraph,
    SmilesSyntaxError,
    ValenceError,
    allowed_valences,
    is_known_element,
    validate,
)

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = frozenset("BCNOPSFI")
_AROMATIC_ONE = frozenset("bcnops")
_AROMATIC_TWO = ("se", "as")
_BOND_CHARS = frozenset("-=#:/\\")
_BOND_ORDER = {"-": 1, "=": 2, "#": 3, ":": 1}


@dataclass
class _DraftAtom:
    element: str
    aromatic: bool = False
    charge: int = 0
    h_count: Optional[int] = None  # None: fill from valence after kekulization
    isotope: Optional[int] = None
    chirality: str = CHI_NONE
    bracket: bool = False
    r_label: Optional[str] = None


@dataclass
class _DraftBond:
    a: int
    b: int
    order: int
    aromatic: bool = False

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


class _RingOpen:
    __slots__ = ("atom", "symbol", "pos", "slot")

    def __init__(self, atom: int, symbol: Optional[str], pos: int, slot: Optional[list]):
        self.atom = atom
        self.symbol = symbol
        self.pos = pos
        self.slot = slot


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.atoms: list[_DraftAtom] = []
        self.bonds: list[_DraftBond] = []
        self.prev: Optional[int] = None
        self.stack: list[tuple[int, int]] = []  # (prev atom, atom count at push)
        self.pending: Optional[str] = None
        self.rings: dict[int, _RingOpen] = {}
        # atom index -> encounter-ordered neighbor list; entries are atom
        # indices, H_SENTINEL, or single-element lists filled at ring closure
        self.chiral_orders: dict[int, list] = {}
        # directional single bonds in written orientation (a, b, "/" or "\\")
        self.directional: list[tuple[int, int, str]] = []

    def error(self, message: str) -> SmilesSyntaxError:
        return SmilesSyntaxError(message, self.i)

    # -- scanning helpers ----------------------------------------------

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.i]
        self.i += 1
        return ch

    def take_digits(self, max_len: Optional[int] = None) -> str:
        out = []
        while self.peek().isdigit() and (max_len is None or len(out) < max_len):
            out.append(self.take())
        return "".join(out)

    # -- structure assembly --------------------------------------------

    def add_atom(self, draft: _DraftAtom) -> int:
        idx = len(self.atoms)
        self.atoms.append(draft)
        if self.pending is not None and self.prev is None:
            raise self.error("bond symbol with no preceding atom")
        if self.prev is not None:
            self.make_bond(self.prev, idx, self.pending)
            if self.prev in self.chiral_orders:
                self.chiral_orders[self.prev].append(idx)
        self.pending = None
        if draft.chirality:
            order: list = []
            if self.prev is not None:
                order.append(self.prev)
            if draft.h_count and draft.h_count >= 1:
                if draft.h_count > 1:
                    raise self.error("chiral atom with more than one hydrogen")
                order.append(H_SENTINEL)
            self.chiral_orders[idx] = order
        self.prev = idx
        return idx

    def make_bond(self, a: int, b: int, symbol: Optional[str]) -> None:
        """Create the a-b bond; directional symbols are oriented a -> b."""
        if a == b:
            raise self.error("ring bond closes onto its own atom")
        aromatic = False
        if symbol is None:
            aromatic = self.atoms[a].aromatic and self.atoms[b].aromatic
            order = 1
        elif symbol == ":":
            if not (self.atoms[a].aromatic and self.atoms[b].aromatic):
                raise self.error("':' bond requires aromatic atoms on both ends")
            aromatic = True
            order = 1
        elif symbol in ("/", "\\"):
            order = 1
            self.directional.append((a, b, symbol))
        else:
            order = _BOND_ORDER[symbol]
        for bond in self.bonds:
            if {bond.a, bond.b} == {a, b}:
                raise self.error(f"duplicate bond between atoms {a} and {b}")
        self.bonds.append(_DraftBond(a, b, order, aromatic))

    # -- token handlers ------------------------------------------------

    def run(self) -> MolecularGraph:
        text = self.text
        if not text:
            raise SmilesSyntaxError("empty SMILES")
        while self.i < len(text):
            ch = self.peek()
            if ch.isspace():
                raise self.error("whitespace inside SMILES")
            if ch == ".":
                raise self.error("multi-component input not supported ('.' separator)")
            if ch in ">~{}$":
                raise self.error(f"unsupported notation {ch!r}")
            if ch == "(":
                self.take()
                if self.prev is None:
                    raise self.error("branch with no preceding atom")
                self.stack.append((self.prev, len(self.atoms)))
                continue
            if ch == ")":
                self.take()
                if not self.stack:
                    raise self.error("unmatched ')'")
                if self.pending is not None:
                    raise self.error("branch ends after bond symbol")
                prev, count = self.stack.pop()
                if len(self.atoms) == count:
                    raise self.error("empty branch")
                self.prev = prev
                continue
            if ch in _BOND_CHARS:
                self.take()
                if self.pending is not None:
                    raise self.error("two bond symbols in a row")
                self.pending = ch
                continue
            if ch.isdigit() or ch == "%":
                self.ring_token()
                continue
            if ch == "[":
                self.bracket_atom()
                continue
            if ch == "*":
                self.take()
                self.add_atom(_DraftAtom(element="*", h_count=0))
                continue
            if ch.isalpha():
                self.organic_atom()
                continue
            raise self.error(f"unexpected character {ch!r}")

        if self.stack:
            raise self.error("unclosed branch")
        if self.pending is not None:
            raise self.error("dangling bond symbol")
        if self.rings:
            digits = ", ".join(str(d) for d in sorted(self.rings))
            raise SmilesSyntaxError(
                f"unclosed ring bond {digits}", self.rings[min(self.rings)].pos
            )
        return self.finalize()

    def organic_atom(self) -> None:
        for sym in _ORGANIC_TWO:
            if self.text.startswith(sym, self.i):
                self.i += 2
                self.add_atom(_DraftAtom(element=sym))
                return
        ch = self.take()
        if ch in _ORGANIC_ONE:
            self.add_atom(_DraftAtom(element=ch))
        elif ch in _AROMATIC_ONE:
            self.add_atom(_DraftAtom(element=ch.upper(), aromatic=True))
        else:
            self.i -= 1
            raise self.error(f"element {ch!r} requires brackets")

    def ring_token(self) -> None:
        pos = self.i
        if self.peek() == "%":
            self.take()
            digits = self.take_digits(max_len=2)
            if len(digits) != 2:
                raise self.error("'%' ring bond needs two digits")
            num = int(digits)
        else:
            num = int(self.take())
        if self.prev is None:
            raise self.error("ring bond digit with no preceding atom")
        symbol = self.pending
        self.pending = None
        if num in self.rings:
            open_ = self.rings.pop(num)
            self.make_ring_bond(open_, self.prev, symbol)
        else:
            slot = None
            if self.prev in self.chiral_orders:
                slot = [None]
                self.chiral_orders[self.prev].append(slot)
            self.rings[num] = _RingOpen(self.prev, symbol, pos, slot)

    def make_ring_bond(self, open_: _RingOpen, closer: int, close_sym: Optional[str]) -> None:
        """Close a ring bond; a opened it, closer finishes it.

        The symbol at the opening site is written a -> closer; the one at the
        closing site closer -> a, so a directional pair must carry opposite
        characters and a lone closing-site symbol is flipped before use.
        """
        a = open_.atom
        open_sym = open_.symbol
        directional = {"/", "\\"}
        if open_sym in directional or close_sym in directional:
            if open_sym is not None and close_sym is not None:
                if not (open_sym in directional and close_sym in directional):
                    raise self.error("ring bond order mismatch")
                if open_sym == close_sym:
                    raise self.error("conflicting directional ring bond")
            merged = open_sym if open_sym is not None else _flip_slash(close_sym)
        elif open_sym is not None and close_sym is not None and open_sym != close_sym:
            raise self.error("ring bond order mismatch")
        else:
            merged = open_sym if open_sym is not None else close_sym
        self.make_bond(a, closer, merged)
        if open_.slot is not None:
            open_.slot[0] = closer
        if closer in self.chiral_orders:
            self.chiral_orders[closer].append(a)

    def bracket_atom(self) -> None:
        start = self.i
        self.take()  # consume '['
        isotope = None
        digits = self.take_digits()
        if digits:
            isotope = int(digits)

        element, aromatic, r_label = self.bracket_symbol()

        chirality = CHI_NONE
        if self.peek() == "@":
            self.take()
            if self.peek() == "@":
                self.take()
                chirality = CHI_CW
            else:
                chirality = CHI_CCW

        h_count = 0
        if self.peek() == "H":
            self.take()
            digits = self.take_digits()
            h_count = int(digits) if digits else 1

        charge = 0
        if self.peek() in "+-":
            sign = 1 if self.take() == "+" else -1
            digits = self.take_digits()
            if digits:
                charge = sign * int(digits)
            else:
                charge = sign
                while self.peek() == ("+" if sign > 0 else "-"):
                    self.take()
                    charge += sign

        if self.peek() == ":":
            raise self.error("atom class labels not supported")
        if self.peek() != "]":
            raise self.error("malformed bracket atom")
        self.take()

        if r_label is not None or element == "*":
            if isotope is not None or chirality or h_count or charge:
                self.i = start
                raise self.error("placeholder atoms take no decorations")
            self.add_atom(_DraftAtom(element="*", h_count=0, r_label=r_label))
            return

        if aromatic and element not in AROMATIC_ELEMENTS:
            self.i = start
            raise self.error(f"element {element} cannot be aromatic")
        self.add_atom(
            _DraftAtom(
                element=element,
                aromatic=aromatic,
                charge=charge,
                h_count=h_count,
                isotope=isotope,
                chirality=chirality,
                bracket=True,
            )
        )

    def bracket_symbol(self) -> tuple[str, bool, Optional[str]]:
        ch = self.peek()
        if ch == "*":
            self.take()
            return "*", False, None
        for sym in _AROMATIC_TWO:
            if self.text.startswith(sym, self.i):
                self.i += 2
                return sym.capitalize(), True, None
        if ch in _AROMATIC_ONE:
            self.take()
            return ch.upper(), True, None
        if ch == "R":
            nxt = self.text[self.i + 1 : self.i + 2]
            if not (nxt.isalpha() and nxt.islower()):
                self.take()
                label = "R" + self.take_digits()
                return "*", False, label
        if ch.isupper():
            two = self.text[self.i : self.i + 2]
            if len(two) == 2 and two[1].isalpha() and two[1].islower() and is_known_element(two):
                self.i += 2
                return two, False, None
            self.take()
            if not is_known_element(ch):
                self.i -= 1
                raise self.error(f"unknown element symbol {ch!r}")
            return ch, False, None
        raise self.error(f"unexpected symbol {ch!r} in bracket atom")

    # -- finalization --------------------------------------------------

    def finalize(self) -> MolecularGraph:
        self.kekulize()
        self.fill_hydrogens()
        graph = self.build_graph()
        validate(graph)
        return perceive_aromaticity(graph)

    def kekulize(self) -> None:
        degree = [0] * len(self.atoms)
        exo_multiple = [False] * len(self.atoms)
        for bond in self.bonds:
            degree[bond.a] += 1
            degree[bond.b] += 1
            if bond.order >= 2 and not bond.aromatic:
                exo_multiple[bond.a] = True
                exo_multiple[bond.b] = True

        needing = [
            i
            for i, atom in enumerate(self.atoms)
            if atom.aromatic and _needs_ring_double(atom, degree[i], exo_multiple[i])
        ]
        edges = [
            (k, bond)
            for k, bond in enumerate(self.bonds)
            if bond.aromatic
        ]
        matched = find_kekule_assignment(needing, [(b.a, b.b) for _, b in edges])
        if matched is None:
            raise KekulizationError("aromatic system admits no alternating bond assignment")
        for pos in matched:
            edges[pos][1].order = 2

    def fill_hydrogens(self) -> None:
        order_sum = [0] * len(self.atoms)
        for bond in self.bonds:
            order_sum[bond.a] += bond.order
            order_sum[bond.b] += bond.order
        for i, atom in enumerate(self.atoms):
            if atom.h_count is not None:
                continue
            allowed = allowed_valences(atom.element, atom.charge)
            if allowed is None:
                atom.h_count = 0
                continue
            total = order_sum[i]
            fillable = [v for v in allowed if v >= total]
            if not fillable:
                raise ValenceError(
                    f"atom {i} ({atom.element}) exceeds permitted valence: "
                    f"{total} > {max(allowed)}"
                )
            atom.h_count = min(fillable) - total

    def build_graph(self) -> MolecularGraph:
        atoms = tuple(
            Atom(
                element=d.element,
                formal_charge=d.charge,
                explicit_hydrogens=d.h_count or 0,
                isotope=d.isotope,
                chirality=d.chirality,
                aromatic=d.aromatic,
            )
            for d in self.atoms
        )
        bonds = tuple(
            Bond(a=b.a, b=b.b, order=b.order, aromatic=b.aromatic) for b in self.bonds
        )
        attachment = self.collect_attachments()
        chiral_order = []
        for idx in sorted(self.chiral_orders):
            entries = []
            for e in self.chiral_orders[idx]:
                if isinstance(e, list):
                    e = e[0]
                if e is None:
                    raise SmilesSyntaxError("chiral neighbor never materialized")
                entries.append(e)
            if len(entries) not in (3, 4):
                raise SmilesSyntaxError(
                    f"chiral atom {idx} has {len(entries)} neighbors, expected 3 or 4"
                )
            chiral_order.append((idx, tuple(entries)))
        stereo = self.collect_bond_stereo()
        return MolecularGraph(
            atoms=atoms,
            bonds=bonds,
            attachment_points=tuple(attachment),
            chiral_order=tuple(chiral_order),
            bond_stereo=tuple(stereo),
        )

    def collect_attachments(self) -> list[tuple[int, str]]:
        bare = [i for i, d in enumerate(self.atoms) if d.element == "*" and d.r_label is None]
        labeled = [(i, d.r_label) for i, d in enumerate(self.atoms) if d.r_label is not None]
        out: list[tuple[int, str]] = []
        if len(bare) == 1:
            out.append((bare[0], "*"))
        else:
            out.extend((idx, f"*{k + 1}") for k, idx in enumerate(bare))
        seen = set()
        for idx, label in labeled:
            if label in seen:
                raise ChemError(f"duplicate attachment label {label!r}")
            seen.add(label)
            out.append((idx, label))
        out.sort()
        return out

    def collect_bond_stereo(self) -> list[DoubleBondStereo]:
        if not self.directional:
            return []
        # slash oriented u -> w: +1 for "/", -1 for "\"; reversing the written
        # direction flips the sign
        toward: dict[tuple[int, int], int] = {}
        for a, b, sym in self.directional:
            s = 1 if sym == "/" else -1
            if toward.get((a, b), s) != s or toward.get((b, a), -s) != -s:
                raise SmilesSyntaxError("conflicting stereo markers on one bond")
            toward[(a, b)] = s
            toward[(b, a)] = -s

        out = []
        for bond in self.bonds:
            if bond.order != 2 or bond.aromatic:
                continue
            i, j = bond.a, bond.b
            refs_i = self.marked_neighbors(i, j, toward)
            refs_j = self.marked_neighbors(j, i, toward)
            if not refs_i or not refs_j:
                continue
            for refs, center in ((refs_i, i), (refs_j, j)):
                if len(refs) == 2 and refs[0][1] == refs[1][1]:
                    raise SmilesSyntaxError(
                        f"both substituents of atom {center} marked on the same side"
                    )
            ref_a, slash_a = refs_i[0]
            ref_b, slash_b = refs_j[0]
            a, b = i, j
            if a > b:
                a, b = b, a
                ref_a, ref_b = ref_b, ref_a
                slash_a, slash_b = slash_b, slash_a
            out.append(
                DoubleBondStereo(a, b, ref_a, ref_b, same_side=slash_a != slash_b)
            )
        return out

    def marked_neighbors(
        self, center: int, other: int, toward: dict[tuple[int, int], int]
    ) -> list[tuple[int, int]]:
        found = []
        for bond in self.bonds:
            if bond.order != 1 or center not in (bond.a, bond.b):
                continue
            nbr = bond.other(center)
            if nbr == other:
                continue
            slash = toward.get((nbr, center))
            if slash is not None:
                found.append((nbr, slash))
        found.sort()
        return found


def _flip_slash(sym: str) -> str:
    return "\\" if sym == "/" else "/"


def _needs_ring_double(atom: _DraftAtom, degree: int, exo_multiple: bool) -> bool:
    """Whether an aromatic atom must receive one in-ring double bond.

    Atoms donating a lone pair (pyrrole N-H, furan O, thiophene S) and atoms
    with an empty p orbital (tropylium-type C+, boron) take none.
    """
    if exo_multiple:
        return False
    elem = atom.element
    q = atom.charge
    h = atom.h_count or 0
    if elem == "C":
        return q == 0
    if elem in ("N", "P", "As"):
        if q > 0:
            return True
        if q < 0:
            return False
        return not (h > 0 or degree == 3)
    if elem in ("O", "S", "Se"):
        return q > 0
    if elem == "B":
        return q < 0
    return True


def parse_smiles(text: str) -> MolecularGraph:
    """Parse SMILES text into a validated MolecularGraph.

    Raises SmilesSyntaxError, ValenceError or KekulizationError with the
    failure position where one is known.
    """
    if not isinstance(text, str):
        raise SmilesSyntaxError("SMILES must be a string")
    return _Parser(text.strip()).run()
