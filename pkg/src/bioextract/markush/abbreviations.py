"""Substituent abbreviation table: versioned TSV data plus lookup rules."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from ..chem import ChemError, parse_smiles


class AbbreviationError(KeyError):
    """Lookup failed: unknown abbreviation or ambiguous case-folded match."""

    def __str__(self) -> str:
        # KeyError would repr() the message
        return self.args[0] if self.args else ""


@dataclass(frozen=True)
class AbbreviationTable:
    entries: tuple[tuple[str, str], ...]  # (abbreviation, fragment SMILES)

    def __post_init__(self):
        seen = set()
        for abbrev, fragment in self.entries:
            if abbrev in seen:
                raise ValueError(f"abbreviation {abbrev!r} defined twice")
            seen.add(abbrev)
            try:
                graph = parse_smiles(fragment)
            except ChemError as exc:
                raise ValueError(
                    f"abbreviation {abbrev!r} has an unparseable fragment {fragment!r}: {exc}"
                ) from exc
            if len(graph.attachment_points) != 1:
                raise ValueError(
                    f"abbreviation {abbrev!r} fragment must have exactly one "
                    f"attachment point, found {len(graph.attachment_points)}"
                )

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)

    def lookup(self, abbreviation: str) -> str:
        """Case-sensitive first; falls back to a unique case-insensitive hit."""
        table = self.as_dict()
        if abbreviation in table:
            return table[abbreviation]
        folded = abbreviation.casefold()
        hits = {smiles for key, smiles in self.entries if key.casefold() == folded}
        if len(hits) == 1:
            return next(iter(hits))
        if len(hits) > 1:
            raise AbbreviationError(
                f"abbreviation {abbreviation!r} is ambiguous case-insensitively"
            )
        raise AbbreviationError(f"unknown abbreviation {abbreviation!r}")

    def __contains__(self, abbreviation: str) -> bool:
        try:
            self.lookup(abbreviation)
        except AbbreviationError:
            return False
        return True


def load_abbreviations(path: Union[str, Path]) -> AbbreviationTable:
    """Read a two-column tab-separated table; '#' lines are comments."""
    entries: list[tuple[str, str]] = []
    text = Path(path).read_text("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two tab-separated columns")
        entries.append((parts[0].strip(), parts[1].strip()))
    return AbbreviationTable(entries=tuple(entries))


@lru_cache(maxsize=1)
def default_abbreviations() -> AbbreviationTable:
    """The packaged table, loaded once."""
    source = resources.files("bioextract.markush") / "data" / "abbreviations.tsv"
    with resources.as_file(source) as path:
        return load_abbreviations(path)
