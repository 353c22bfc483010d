"""Structure handling: SMILES parsing, canonical output, fingerprints."""

from .canon import to_canonical_smiles
from .fingerprint import Fingerprint, circular_fingerprint, strip_attachments, tanimoto
from .graph import (
    Atom,
    Bond,
    ChemError,
    DoubleBondStereo,
    KekulizationError,
    MolecularGraph,
    SmilesSyntaxError,
    ValenceError,
    permute_atoms,
    strip_stereo,
    validate,
)
from .smiles import parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "ChemError",
    "DoubleBondStereo",
    "Fingerprint",
    "KekulizationError",
    "MolecularGraph",
    "SmilesSyntaxError",
    "ValenceError",
    "canonical_smiles",
    "circular_fingerprint",
    "molecules_equal",
    "parse_smiles",
    "permute_atoms",
    "strip_attachments",
    "strip_stereo",
    "to_canonical_smiles",
    "validate",
]


def canonical_smiles(text: str) -> str:
    """Parse SMILES text and return its canonical form."""
    return to_canonical_smiles(parse_smiles(text))


def molecules_equal(
    a: "MolecularGraph | str", b: "MolecularGraph | str", chirality_sensitive: bool = True
) -> bool:
    """Identity by canonical-string comparison; accepts graphs or SMILES.

    The insensitive mode drops tetrahedral tags and double-bond
    configurations from both sides before comparing.
    """
    if isinstance(a, str):
        a = parse_smiles(a)
    if isinstance(b, str):
        b = parse_smiles(b)
    return to_canonical_smiles(a, include_stereo=chirality_sensitive) == to_canonical_smiles(
        b, include_stereo=chirality_sensitive
    )
