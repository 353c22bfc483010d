"""Bioactivity measurement parsing, normalization, and cross-modality merge.

Values are decimal.Decimal throughout: unit conversion multiplies by exact
decade factors, so nM -> M -> nM round trips bit-exact and evaluation
tolerances never fight binary float noise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Iterable, Optional, Union

CONCENTRATION_FACTORS = {
    "nM": Decimal(1),
    "µM": Decimal(10) ** 3,
    "mM": Decimal(10) ** 6,
    "M": Decimal(10) ** 9,
}

STANDARD_ASSAYS = ("IC50", "EC50", "Ki", "Kd")
RELATIONS = ("=", "<", ">", "≤", "≥", "~")
MODALITIES = ("text", "table", "figure")

# survivor preference when duplicates are merged across modalities
_MODALITY_PRIORITY = {"table": 0, "text": 1, "figure": 2}


class MeasurementError(ValueError):
    """Base error for measurement handling."""


class NoValueFound(MeasurementError):
    """The text carries no numeric activity value."""


class AmbiguousUnit(MeasurementError):
    """The unit is missing or conflicting."""


class NonConcentrationUnit(MeasurementError):
    """Normalization asked for a unit outside the concentration scale."""


@dataclass(frozen=True)
class Measurement:
    protein: str
    ligand_coreference: str
    assay_type: str
    value: Decimal
    unit: str
    modality: str
    provenance: tuple[tuple[int, str], ...]
    relation: str = "="
    uncertainty: Optional[Decimal] = None
    range_low: bool = False
    range_high: bool = False

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise MeasurementError(f"unknown relation {self.relation!r}")
        if self.modality not in MODALITIES:
            raise MeasurementError(f"unknown modality {self.modality!r}")
        if not isinstance(self.value, Decimal):
            raise MeasurementError("value must be a Decimal")
        if not self.value.is_finite():
            raise MeasurementError("value must be finite")
        if self.unit in CONCENTRATION_FACTORS and self.value <= 0:
            raise MeasurementError("concentration values must be positive")
        if self.range_low and self.range_high:
            raise MeasurementError("a measurement is one end of a range, not both")

    @property
    def is_concentration(self) -> bool:
        return self.unit in CONCENTRATION_FACTORS


@dataclass(frozen=True)
class NormalizedMeasurement(Measurement):
    value_nM: Decimal = Decimal(0)
    p_value: Optional[Decimal] = None


@dataclass(frozen=True)
class ParsedActivity:
    """Fields recovered from one activity phrase."""

    assay_type: str
    relation: str
    value: Decimal
    unit: str
    uncertainty: Optional[Decimal] = None
    range_low: bool = False
    range_high: bool = False


_SUBSCRIPT_DIGITS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")
_MU_VARIANTS = {"µ": "µ", "μ": "µ"}

_NUMBER = r"(?:\d{1,3}(?:,\d{3})+|\d+(?:\.\d+)?|\.\d+)(?:[eE][-+]?\d+)?"
_ASSAY = r"[A-Za-z]{1,6}\d{0,3}"
_RELATION_PATTERN = (
    r"(?P<rel><=|>=|≤|≥|<|>|~|≈|=|:|\bca\.?\s|\babout\s|\bapprox\.?\s|\bapproximately\s|\bof\s)"
)
_UNIT = r"(?P<unit>[nµm]?M\b|%\s*(?:inhibition|inhib\.?|inh\.?)?|[A-Za-z/%]+)"

_PATTERN = re.compile(
    rf"^\s*(?P<assay>{_ASSAY})\b"
    rf"(?:\s*\(\s*(?P<header_unit>[^)]+?)\s*\))?"
    rf"\s*(?:{_RELATION_PATTERN}\s*)*"
    rf"(?P<num>{_NUMBER})"
    rf"(?:\s*(?:±|\+/-|\+-)\s*(?P<err>{_NUMBER}))?"
    rf"(?:\s*(?:-|–|—|\bto\b)\s*(?P<num2>{_NUMBER})"
    rf"(?:\s*(?:±|\+/-|\+-)\s*(?P<err2>{_NUMBER}))?)?"
    rf"\s*{_UNIT}?"
    r"\s*(?P<rest>.*)$"
)

_RELATION_MAP = {
    "<": "<",
    ">": ">",
    "<=": "≤",
    "≤": "≤",
    ">=": "≥",
    "≥": "≥",
    "~": "~",
    "≈": "~",
    "=": "=",
    ":": "=",
    "of": "=",
}


def _clean(raw: str) -> str:
    out = raw.translate(_SUBSCRIPT_DIGITS)
    for variant, target in _MU_VARIANTS.items():
        out = out.replace(variant, target)
    return out.strip()


def _to_decimal(token: str) -> Decimal:
    return Decimal(token.replace(",", ""))


def _normalize_unit(token: str) -> str:
    token = token.strip()
    if token.startswith("%"):
        return "%inhibition"
    if token in ("nM", "mM", "M", "µM"):
        return token
    if token in ("uM", "um"):
        return "µM"
    if token == "nm":
        return "nM"
    return token


def _normalize_relation(token: Optional[str]) -> str:
    if token is None:
        return "="
    token = token.strip().rstrip(".").lower()
    mapped = _RELATION_MAP.get(token)
    if mapped is None:
        mapped = {"ca": "~", "about": "~", "approx": "~", "approximately": "~"}.get(token)
    return mapped or "="


def _normalize_assay(token: str) -> str:
    for name in STANDARD_ASSAYS:
        if token.lower() == name.lower():
            return name
    return token


def parse_measurement_text(raw: str) -> tuple[ParsedActivity, ...]:
    """Recover (assay_type, relation, value, unit) from an activity phrase.

    Handles inline forms ("IC50 = 12.5 nM", "Ki > 10 µM"), table-header
    forms ("IC50 (nM): 3.4"), ranges ("10–20 nM", two entries flagged
    range_low/range_high), and "±" uncertainties. Raises NoValueFound or
    AmbiguousUnit rather than guessing.
    """
    if not raw or not raw.strip():
        raise NoValueFound("empty measurement text")
    text = _clean(raw)
    match = _PATTERN.match(text)
    if match is None or match.group("num") is None:
        raise NoValueFound(f"no numeric value in {raw!r}")

    assay = _normalize_assay(match.group("assay"))
    # relations chain left to right; the last qualifier wins ("IC50: ~5 nM")
    relation = "="
    rel_span = text[match.end("assay") : match.start("num")]
    for token in re.findall(r"<=|>=|≤|≥|<|>|~|≈|=|:|\bca\.?|\babout\b|\bapprox\.?|\bapproximately\b", rel_span):
        mapped = _normalize_relation(token)
        if mapped != "=" or token in ("=", ":"):
            relation = mapped if mapped != "=" else relation

    header_unit = match.group("header_unit")
    trailing_unit = match.group("unit")
    units = []
    if header_unit is not None:
        units.append(_normalize_unit(header_unit))
    if trailing_unit is not None:
        units.append(_normalize_unit(trailing_unit))
    units = [u for u in units if u]
    if not units:
        raise AmbiguousUnit(f"no unit found in {raw!r}")
    if len(units) == 2 and units[0] != units[1]:
        raise AmbiguousUnit(f"conflicting units {units[0]!r} and {units[1]!r} in {raw!r}")
    unit = units[-1]

    value = _to_decimal(match.group("num"))
    err = match.group("err")
    uncertainty = _to_decimal(err) if err else None
    second = match.group("num2")
    if second is None:
        return (
            ParsedActivity(
                assay_type=assay,
                relation=relation,
                value=value,
                unit=unit,
                uncertainty=uncertainty,
            ),
        )
    err2 = match.group("err2")
    return (
        ParsedActivity(
            assay_type=assay,
            relation=relation,
            value=value,
            unit=unit,
            uncertainty=uncertainty,
            range_low=True,
        ),
        ParsedActivity(
            assay_type=assay,
            relation=relation,
            value=_to_decimal(second),
            unit=unit,
            uncertainty=_to_decimal(err2) if err2 else None,
            range_high=True,
        ),
    )


def normalize(m: Measurement) -> NormalizedMeasurement:
    """Attach value_nM and p_value; concentration units only.

    value_nM uses exact decade factors; p_value = 9 - log10(value_nM), the
    negative base-10 log of the molar value.
    """
    factor = CONCENTRATION_FACTORS.get(m.unit)
    if factor is None:
        raise NonConcentrationUnit(f"cannot normalize unit {m.unit!r}")
    value_nm = m.value * factor
    p_value = Decimal(9) - value_nm.log10()
    return NormalizedMeasurement(
        protein=m.protein,
        ligand_coreference=m.ligand_coreference,
        assay_type=m.assay_type,
        value=m.value,
        unit=m.unit,
        modality=m.modality,
        provenance=m.provenance,
        relation=m.relation,
        uncertainty=m.uncertainty,
        range_low=m.range_low,
        range_high=m.range_high,
        value_nM=value_nm,
        p_value=p_value,
    )


def _comparable_value(m: Measurement) -> tuple[str, Decimal]:
    """(scale marker, magnitude) used for duplicate detection."""
    factor = CONCENTRATION_FACTORS.get(m.unit)
    if factor is not None:
        return ("conc", m.value * factor)
    return (m.unit, m.value)


def _values_close(a: Decimal, b: Decimal, rel_tol: Decimal = Decimal("1e-6")) -> bool:
    if a == b:
        return True
    return abs(a - b) <= rel_tol * max(abs(a), abs(b))


def merge_modalities(
    text_list: Iterable[Measurement],
    table_list: Iterable[Measurement],
    figure_list: Iterable[Measurement],
) -> list[Measurement]:
    """Deduplicate measurements reported by more than one modality.

    Two entries are duplicates when the protein (casefolded), normalized
    ligand coreference, assay type, and relation all match and their values
    agree within 1e-6 relative after unit normalization. The survivor comes
    from the highest-priority modality (table > text > figure) and keeps
    every member's provenance, so the provenance multiset is conserved.
    """
    from .join.keys import normalize_coreference

    entries: list[Measurement] = []
    for expected, group in (
        ("text", text_list),
        ("table", table_list),
        ("figure", figure_list),
    ):
        for m in group:
            if m.modality != expected:
                raise MeasurementError(
                    f"measurement with modality {m.modality!r} passed in the {expected} list"
                )
            entries.append(m)

    # group index -> member list; grouping key excludes the value, which is
    # then clustered by closeness inside each group
    groups: dict[tuple, list[tuple[int, Measurement]]] = {}
    for idx, m in enumerate(entries):
        key = (
            m.protein.casefold(),
            normalize_coreference(m.ligand_coreference),
            m.assay_type,
            m.relation,
            _comparable_value(m)[0],
            m.range_low,
            m.range_high,
        )
        groups.setdefault(key, []).append((idx, m))

    survivors: list[tuple[int, Measurement]] = []
    for members in groups.values():
        clusters: list[list[tuple[int, Measurement]]] = []
        for idx, m in members:
            magnitude = _comparable_value(m)[1]
            for cluster in clusters:
                rep = _comparable_value(cluster[0][1])[1]
                if _values_close(rep, magnitude):
                    cluster.append((idx, m))
                    break
            else:
                clusters.append([(idx, m)])
        for cluster in clusters:
            winner_idx, winner = min(
                cluster, key=lambda im: (_MODALITY_PRIORITY[im[1].modality], im[0])
            )
            provenance = winner.provenance + tuple(
                entry
                for idx, m in sorted(cluster)
                if idx != winner_idx
                for entry in m.provenance
            )
            survivors.append((min(idx for idx, _ in cluster), replace(winner, provenance=provenance)))

    survivors.sort(key=lambda im: im[0])
    return [m for _, m in survivors]


def to_record(m: Union[Measurement, NormalizedMeasurement]) -> dict:
    """JSONL-ready dict; exact decimals are serialized as strings."""
    value_nm = getattr(m, "value_nM", None)
    p_value = getattr(m, "p_value", None)
    return {
        "protein": m.protein,
        "ligand_coreference": m.ligand_coreference,
        "assay_type": m.assay_type,
        "relation": m.relation,
        "value": str(m.value),
        "unit": m.unit,
        "value_nM": str(value_nm) if value_nm is not None else None,
        "p_value": str(p_value) if p_value is not None else None,
        "modality": m.modality,
        "provenance": [[page, region] for page, region in m.provenance],
    }


def from_record(record: dict) -> Measurement:
    """Inverse of to_record for the base fields; normalization not re-derived."""
    return Measurement(
        protein=record["protein"],
        ligand_coreference=record["ligand_coreference"],
        assay_type=record["assay_type"],
        value=Decimal(record["value"]),
        unit=record["unit"],
        modality=record["modality"],
        provenance=tuple((int(p), str(r)) for p, r in record["provenance"]),
        relation=record.get("relation", "="),
    )
