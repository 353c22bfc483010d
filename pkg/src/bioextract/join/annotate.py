"""Similarity ranking of triplets against a query structure, and the
abstention-first selection used for automated annotation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from ..chem import circular_fingerprint, parse_smiles, tanimoto, to_canonical_smiles
from .join import BioactivityTriplet


@dataclass(frozen=True)
class AnnotationCandidate:
    triplet: BioactivityTriplet
    similarity: float
    rank: int
    perfect_match: bool
    exact_match: bool


@dataclass(frozen=True)
class SelectionResult:
    candidate: Optional[AnnotationCandidate]
    reason: str


# Called with (context, perfect-match candidates); returns an index into the
# candidate list or None to abstain. Transport details live with the caller.
PickerClient = Callable[[tuple[str, str], Sequence[AnnotationCandidate]], Optional[int]]


def rank_for_annotation(
    triplets: Sequence[BioactivityTriplet],
    query_smiles: str,
    radius: int = 2,
    width: int = 2048,
) -> list[AnnotationCandidate]:
    """Order triplets by Tanimoto similarity to the query.

    Ties break exact-canonical matches first, then ascending join key.
    Candidates at similarity 1.0 are marked perfect_match.
    """
    query_graph = parse_smiles(query_smiles)
    query_canonical = to_canonical_smiles(query_graph)
    query_fp = circular_fingerprint(query_graph, radius=radius, width=width)

    scored = []
    for pos, t in enumerate(triplets):
        graph = parse_smiles(t.smiles)
        similarity = tanimoto(
            query_fp, circular_fingerprint(graph, radius=radius, width=width)
        )
        exact = to_canonical_smiles(graph) == query_canonical
        scored.append((t, similarity, exact, pos))

    scored.sort(key=lambda e: (-e[1], not e[2], e[0].join_key, e[3]))
    return [
        AnnotationCandidate(
            triplet=t,
            similarity=similarity,
            rank=rank,
            perfect_match=similarity == 1.0,
            exact_match=exact,
        )
        for rank, (t, similarity, exact, _) in enumerate(scored, start=1)
    ]


def _tokens(text: str) -> set[str]:
    return {tok for tok in re.split(r"[^a-z0-9]+", text.casefold()) if len(tok) >= 2}


def select_annotation(
    ranked: Sequence[AnnotationCandidate],
    context: tuple[str, str],
    picker_client: Optional[PickerClient] = None,
) -> SelectionResult:
    """Pick one candidate or abstain; never fabricates.

    Automated policy: only perfect matches are eligible, and the candidate's
    protein mention must share a token with the context (protein name plus
    structure title). A picker client, when given, chooses among the perfect
    matches; its failure means abstention.
    """
    perfect = [c for c in ranked if c.perfect_match]
    if not perfect:
        return SelectionResult(None, "no perfect-match candidate")

    if picker_client is not None:
        try:
            choice = picker_client(context, perfect)
        except Exception as exc:
            return SelectionResult(None, f"picker failure: {exc}")
        if choice is None:
            return SelectionResult(None, "picker abstained")
        if not (0 <= choice < len(perfect)):
            return SelectionResult(None, f"picker returned invalid index {choice}")
        return SelectionResult(perfect[choice], "picker selection")

    context_tokens = _tokens(" ".join(context))
    for candidate in perfect:
        if _tokens(candidate.triplet.protein) & context_tokens:
            return SelectionResult(candidate, "perfect match with protein context overlap")
    return SelectionResult(None, "no perfect match overlaps the protein context")
