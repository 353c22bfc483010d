"""Coreference key normalization.

Join keys come from free-text compound mentions ("Compound 12", "**3a**",
"inhibitor 7"). Normalization is deliberately mechanical and idempotent;
fuzzy matching is out of scope.
"""

from __future__ import annotations

_LEADING_TOKENS = {"compound", "cmpd", "cmpd.", "cpd", "cpd.", "inhibitor", "ligand", "example", "no.", "no", "#"}
_TRAILING_PUNCT = ".,;:!?"


def normalize_coreference(text: str) -> str:
    """Lowercased, stop-token-stripped join key; may be empty."""
    out = text.replace("*", "")
    out = " ".join(out.split()).lower()
    out = " ".join(part.strip("_") for part in out.split())

    changed = True
    while changed and out:
        changed = False
        if out.startswith("(") and out.endswith(")"):
            inner = out[1:-1]
            if "(" not in inner and ")" not in inner:
                out = inner.strip()
                changed = True
        while out.startswith("#"):
            out = out[1:].lstrip()
            changed = True
        parts = out.split(" ", 1)
        if parts and parts[0] in _LEADING_TOKENS and len(parts) > 1:
            out = parts[1]
            changed = True
        elif parts and parts[0] in _LEADING_TOKENS:
            out = ""
            changed = True
        stripped = out.rstrip(_TRAILING_PUNCT)
        if stripped != out:
            out = stripped
            changed = True
    return out
