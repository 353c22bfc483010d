from .abbreviations import (
    AbbreviationError,
    AbbreviationTable,
    default_abbreviations,
    load_abbreviations,
)
from .engine import (
    FAILURE_CAUSES,
    HYDROGEN_FRAGMENT,
    MarkushError,
    MarkushScaffold,
    ResolutionError,
    RGroupRow,
    RGroupTable,
    RowFailure,
    SUBSTITUENT_KINDS,
    Substituent,
    ZipError,
    enumerate_rows,
    resolve_substituent,
    scaffold_from_smiles,
    zip_assignment,
)

__all__ = [
    "AbbreviationError",
    "AbbreviationTable",
    "default_abbreviations",
    "load_abbreviations",
    "FAILURE_CAUSES",
    "HYDROGEN_FRAGMENT",
    "MarkushError",
    "MarkushScaffold",
    "ResolutionError",
    "RGroupRow",
    "RGroupTable",
    "RowFailure",
    "SUBSTITUENT_KINDS",
    "Substituent",
    "ZipError",
    "enumerate_rows",
    "resolve_substituent",
    "scaffold_from_smiles",
    "zip_assignment",
]
