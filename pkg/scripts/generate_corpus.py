#!/usr/bin/env python3
"""Regenerate tests/data/corpus.smi.

The corpus mixes three sources: a hand-picked block of known molecules
and parser edge cases, stereo-bearing strings stamped out of templates,
and random valence-correct graphs serialized canonically. Every line is
checked for the parse -> canonicalize -> re-parse fixpoint before it is
written, and canonical duplicates are dropped, so the committed file is
exactly the corpus the round-trip suite expects.

Deterministic: fixed seed, no environment input. Run from the repo root:

    python3 scripts/generate_corpus.py
"""

from __future__ import annotations

import random
import sys
from collections import deque
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bioextract.chem import (  # noqa: E402
    Atom,
    Bond,
    MolecularGraph,
    parse_smiles,
    to_canonical_smiles,
    validate,
)
from bioextract.chem.graph import allowed_valences  # noqa: E402

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus.smi"
TARGET = 1000
SEED = 20250822

# Written in deliberately non-canonical spellings where possible so the
# parser sees something other than its own output.
HAND_PICKED = [
    "CC(=O)Oc1ccccc1C(=O)O",            # aspirin
    "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",     # caffeine, kekulized spelling
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",       # ibuprofen
    "C1=CC=CC=C1",                      # benzene, kekulized
    "c1ccc2ccccc2c1",                   # naphthalene
    "c1ccc2c(c1)cccc2",                 # naphthalene, alternate ring walk
    "C1CCCCC1",                         # cyclohexane
    "C1CC1",                            # cyclopropane
    "OCC(O)CO",                         # glycerol
    "NCCO",                             # ethanolamine
    "C(C(=O)O)N",                       # glycine
    "C[C@@H](C(=O)O)N",                 # L-alanine
    "C[C@H](N)C(=O)O",                  # L-alanine, implicit-H bracket
    "N[C@@H](Cc1ccccc1)C(=O)O",         # phenylalanine
    "C/C=C/Cl",                         # trans-1-chloropropene
    "C/C=C\\F",                         # cis-1-fluoropropene
    "F/C=C/F",                          # trans-difluoroethene
    "F/C=C\\F",                         # cis-difluoroethene
    "CC(=O)[O-]",                       # acetate
    "C[N+](C)(C)C",                     # tetramethylammonium
    "[NH4+]",                           # ammonium
    "[13CH4]",                          # carbon-13 methane
    "[2H]C([2H])([2H])O[2H]",           # d4-methanol
    "[15NH3]",                          # nitrogen-15 ammonia
    "O=C(N)c1ccccc1",                   # benzamide
    "O=S(=O)(O)c1ccccc1",               # benzenesulfonic acid
    "OP(=O)(O)O",                       # phosphoric acid
    "C#N",                              # hydrogen cyanide
    "CC#CC",                            # 2-butyne
    "N#Cc1ccccc1",                      # benzonitrile
    "c1ccncc1",                         # pyridine
    "c1cc[nH]c1",                       # pyrrole
    "c1ccoc1",                          # furan
    "c1ccsc1",                          # thiophene
    "c1cnc[nH]1",                       # imidazole
    "c1ccc(cc1)c1ccccc1",               # biphenyl
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",       # caffeine, aromatic spelling
    "CCOC(=O)C",                        # ethyl acetate
    "CSC",                              # dimethyl sulfide
    "BrCCBr",                           # 1,2-dibromoethane
]

AROMATIC_TEMPLATES = [
    "c1ccccc1",
    "c1ccncc1",
    "c1cc[nH]c1",
    "c1ccoc1",
    "c1ccsc1",
    "c1cnc[nH]1",
    "c1ccc2ccccc2c1",
]

# Substituent slots with their concatenation direction: a leading slot
# bonds through its last written atom, a trailing slot through its first.
STEREO_TEMPLATES = [
    ("C[C@H]({0})C(=O)O", ("tail",)),
    ("C[C@@H]({0})C(=O)O", ("tail",)),
    ("{0}[C@H](O)C{1}", ("lead", "tail")),
    ("{0}[C@@H](N)C(=O)O", ("lead",)),
    ("{0}/C=C/{1}", ("lead", "tail")),
    ("{0}/C=C\\{1}", ("lead", "tail")),
    ("C[C@H](O)[C@@H](N){0}", ("tail",)),
    ("{0}C(=O)N[C@@H](C)C(=O)O", ("lead",)),
]

STEREO_GROUPS = {
    "lead": ["CC", "CCC", "ClC", "BrC", "OC", "NC", "FC", "OCC", "SC", "NCC"],
    "tail": ["CC", "CCC", "CCl", "CBr", "CO", "CN", "CF", "CCO", "CS", "CCN"],
}

ELEMENTS = [
    ("C", 62),
    ("N", 11),
    ("O", 12),
    ("S", 4),
    ("F", 4),
    ("Cl", 4),
    ("P", 1),
    ("Br", 1.5),
    ("I", 0.5),
]


def _min_fill(element: str, charge: int, bond_sum: int) -> int:
    """Hydrogens to the smallest permitted valence >= bond_sum."""
    allowed = allowed_valences(element, charge)
    if allowed is None:
        return 0
    for v in sorted(allowed):
        if v >= bond_sum:
            return v - bond_sum
    return 0


class GraphBuilder:
    """Mutable scratch graph; capacities tracked through hydrogen counts."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []

    def seed_from(self, smiles: str) -> None:
        g = parse_smiles(smiles)
        self.atoms = list(g.atoms)
        self.bonds = list(g.bonds)

    def seed_atom(self) -> None:
        element = self._pick_element(allow_terminal=False)
        self.atoms.append(
            Atom(element=element, explicit_hydrogens=_min_fill(element, 0, 0))
        )

    def _pick_element(self, allow_terminal: bool = True) -> str:
        while True:
            r = self.rng.uniform(0, sum(w for _, w in ELEMENTS))
            acc = 0.0
            for element, w in ELEMENTS:
                acc += w
                if r <= acc:
                    if not allow_terminal and element in ("F", "Cl", "Br", "I"):
                        break
                    return element
            # terminal element rejected; draw again

    def _bond_sum(self, idx: int) -> int:
        return sum(b.order for b in self.bonds if idx in (b.a, b.b))

    def grow(self, n_target: int) -> None:
        while len(self.atoms) < n_target:
            hosts = [
                i for i, a in enumerate(self.atoms) if a.explicit_hydrogens >= 1
            ]
            if not hosts:
                return
            host = self.rng.choice(hosts)
            order = 1
            roll = self.rng.random()
            if roll < 0.03 and self.atoms[host].explicit_hydrogens >= 3:
                order = 3
            elif roll < 0.18 and self.atoms[host].explicit_hydrogens >= 2:
                order = 2
            element = self._pick_element(allow_terminal=order == 1)
            allowed = allowed_valences(element, 0)
            if allowed is not None and min(allowed) < order:
                # e.g. O cannot take a triple bond
                order = 1
            new_idx = len(self.atoms)
            self.atoms.append(
                Atom(
                    element=element,
                    explicit_hydrogens=_min_fill(element, 0, order),
                )
            )
            self._take_hydrogens(host, order)
            self.bonds.append(Bond(a=host, b=new_idx, order=order))

    def _take_hydrogens(self, idx: int, count: int) -> None:
        a = self.atoms[idx]
        self.atoms[idx] = Atom(
            element=a.element,
            formal_charge=a.formal_charge,
            explicit_hydrogens=a.explicit_hydrogens - count,
            isotope=a.isotope,
            chirality=a.chirality,
            aromatic=a.aromatic,
        )

    def close_rings(self, attempts: int) -> None:
        for _ in range(attempts):
            candidates = [
                i
                for i, a in enumerate(self.atoms)
                if a.explicit_hydrogens >= 1 and not a.aromatic
            ]
            if len(candidates) < 2:
                return
            a = self.rng.choice(candidates)
            partners = [
                b
                for b in candidates
                if b != a and not self._bonded(a, b) and 2 < self._distance(a, b) <= 6
            ]
            if not partners:
                continue
            b = self.rng.choice(partners)
            self._take_hydrogens(a, 1)
            self._take_hydrogens(b, 1)
            self.bonds.append(Bond(a=a, b=b, order=1))

    def _bonded(self, a: int, b: int) -> bool:
        return any({x.a, x.b} == {a, b} for x in self.bonds)

    def _distance(self, start: int, goal: int) -> int:
        adj: dict[int, list[int]] = {}
        for b in self.bonds:
            adj.setdefault(b.a, []).append(b.b)
            adj.setdefault(b.b, []).append(b.a)
        seen = {start}
        queue = deque([(start, 0)])
        while queue:
            node, dist = queue.popleft()
            if node == goal:
                return dist
            for nbr in adj.get(node, ()):
                if nbr not in seen:
                    seen.add(nbr)
                    queue.append((nbr, dist + 1))
        return 10**9

    def decorate(self) -> None:
        # occasional charges on plausible sites, keeping valence legal
        if self.rng.random() < 0.08:
            ns = [
                i
                for i, a in enumerate(self.atoms)
                if a.element == "N" and a.formal_charge == 0 and not a.aromatic
            ]
            if ns:
                i = self.rng.choice(ns)
                a = self.atoms[i]
                self.atoms[i] = Atom(
                    element="N",
                    formal_charge=1,
                    explicit_hydrogens=a.explicit_hydrogens + 1,
                    isotope=a.isotope,
                )
        if self.rng.random() < 0.06:
            os_ = [
                i
                for i, a in enumerate(self.atoms)
                if a.element == "O"
                and a.formal_charge == 0
                and a.explicit_hydrogens >= 1
                and not a.aromatic
            ]
            if os_:
                i = self.rng.choice(os_)
                a = self.atoms[i]
                self.atoms[i] = Atom(
                    element="O",
                    formal_charge=-1,
                    explicit_hydrogens=a.explicit_hydrogens - 1,
                    isotope=a.isotope,
                )
        if self.rng.random() < 0.05:
            cs = [
                i
                for i, a in enumerate(self.atoms)
                if a.element == "C" and a.isotope is None and not a.aromatic
            ]
            if cs:
                i = self.rng.choice(cs)
                a = self.atoms[i]
                self.atoms[i] = Atom(
                    element="C",
                    formal_charge=a.formal_charge,
                    explicit_hydrogens=a.explicit_hydrogens,
                    isotope=13,
                )

    def build(self) -> MolecularGraph:
        g = MolecularGraph(atoms=tuple(self.atoms), bonds=tuple(self.bonds))
        validate(g)
        return g


def random_graph_smiles(rng: random.Random) -> str:
    builder = GraphBuilder(rng)
    n_target = rng.randint(5, 28)
    if rng.random() < 0.35:
        builder.seed_from(rng.choice(AROMATIC_TEMPLATES))
    else:
        builder.seed_atom()
    builder.grow(n_target)
    builder.close_rings(rng.randint(0, 2))
    builder.decorate()
    return to_canonical_smiles(builder.build())


def stereo_template_smiles(rng: random.Random) -> str:
    template, slot_kinds = rng.choice(STEREO_TEMPLATES)
    groups = [rng.choice(STEREO_GROUPS[kind]) for kind in slot_kinds]
    return template.format(*groups)


def fixpoint_ok(smiles: str) -> tuple[bool, str]:
    graph = parse_smiles(smiles)
    canonical = to_canonical_smiles(graph)
    again = to_canonical_smiles(parse_smiles(canonical))
    return again == canonical, canonical


def main() -> int:
    rng = random.Random(SEED)
    lines: list[str] = []
    seen: set[str] = set()

    def admit(smiles: str) -> bool:
        ok, canonical = fixpoint_ok(smiles)
        if not ok:
            raise AssertionError(f"fixpoint violated for {smiles}")
        if parse_smiles(smiles).atom_count() > 32:
            return False
        if canonical in seen:
            return False
        seen.add(canonical)
        lines.append(smiles)
        return True

    for s in HAND_PICKED:
        admit(s)

    stereo_quota = 220
    for _ in range(5000):
        if stereo_quota <= 0 or len(lines) >= TARGET:
            break
        if admit(stereo_template_smiles(rng)):
            stereo_quota -= 1

    while len(lines) < TARGET:
        admit(random_graph_smiles(rng))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    print(f"wrote {len(lines)} molecules to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
