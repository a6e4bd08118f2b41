"""Map free-text material descriptions onto materials-dictionary records.

Two paths share one contract. The lexical path scores token-set overlap
and is fully deterministic, so it doubles as the offline oracle and the
fallback. The vision-language path asks a backend to pick a name from a
lexical shortlist; its answer is validated against the dataset index and
corrected once before falling back.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

from .errors import (
    BackendUnavailable,
    EmptyDataset,
    EmptyDescription,
    EmptyInput,
    ValidationError,
)
from .materials import MaterialDataset, MaterialRecord, normalize_name, strip_unit_parentheticals

METHOD_EXACT = "exact"
METHOD_LEXICAL = "lexical"
METHOD_VLM = "vlm"
METHOD_VLM_FALLBACK = "vlm_fallback_lexical"

#: Shortlist size handed to the vision-language matcher; mirrors the
#: ten-material scale of an extraction.
DEFAULT_SHORTLIST = 10


@dataclass(frozen=True)
class MaterialDescription:
    """One extracted material line and its position in the extractor output."""

    text: str
    source_rank: int = 1
    excluded_category_hits: tuple[str, ...] = ()


@dataclass(frozen=True)
class MatchResult:
    description: MaterialDescription
    record_id: int
    score: float
    method: str
    candidates: tuple[tuple[int, float], ...]
    #: set by match_all when an earlier description already chose this record
    duplicate: bool = False


@dataclass(frozen=True)
class MatchFailure:
    """Per-description failure entry produced by match_all."""

    description: MaterialDescription
    code: str
    message: str


class SupportsMaterialMatch(Protocol):
    """The slice of the VLM backend this module needs."""

    def match_material(
        self, description: str, shortlist: Sequence[str], corrective: bool = False
    ) -> str: ...


def tokenize(text: str) -> frozenset[str]:
    """Normalized token set: lowercase, unit parentheticals dropped,
    punctuation split, trailing-s plural fold (no stemming)."""
    cleaned = strip_unit_parentheticals(text).lower()
    tokens = set()
    for tok in re.findall(r"[a-z0-9]+", cleaned):
        if len(tok) > 1 and tok.endswith("s"):
            tok = tok[:-1]
        tokens.add(tok)
    return frozenset(tokens)


def record_tokens(record: MaterialRecord) -> frozenset[str]:
    return tokenize(
        " ".join(
            (
                record.material_name,
                record.material_type,
                record.product_type,
                record.material_type_family,
            )
        )
    )


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    union = len(a | b)
    return len(a & b) / union


def _require_text(desc: MaterialDescription) -> str:
    text = desc.text.strip()
    if not text:
        raise EmptyDescription("material description is empty")
    return text


def lexical_match(
    desc: MaterialDescription, dataset: MaterialDataset, k: int = 5
) -> MatchResult:
    """Deterministic token-set Jaccard scorer.

    A description that equals a catalog name verbatim (after name
    normalization) short-circuits to that record with score 1.0. Ties
    break on ascending record id, so record order never matters.
    """
    text = _require_text(desc)
    if not dataset.records:
        raise EmptyDataset("cannot match against an empty dataset")
    if k < 1:
        raise ValidationError("k must be >= 1")

    exact_id = dataset.name_index.get(normalize_name(text))
    if exact_id is not None:
        return MatchResult(
            description=desc,
            record_id=exact_id,
            score=1.0,
            method=METHOD_EXACT,
            candidates=((exact_id, 1.0),),
        )

    query = tokenize(text)
    scored = sorted(
        ((jaccard(query, record_tokens(r)), r.id) for r in dataset.records),
        key=lambda pair: (-pair[0], pair[1]),
    )
    top = scored[:k]
    best_score, best_id = top[0]
    return MatchResult(
        description=desc,
        record_id=best_id,
        score=best_score,
        method=METHOD_LEXICAL,
        candidates=tuple((rid, score) for score, rid in top),
    )


def vlm_match(
    desc: MaterialDescription,
    dataset: MaterialDataset,
    backend: SupportsMaterialMatch,
    k: int = DEFAULT_SHORTLIST,
) -> MatchResult:
    """Ask the vision-language backend to choose from a lexical shortlist.

    The backend must answer with one material_name from the shortlist;
    anything else gets one corrective retry, after which we fall back to
    the lexical result (method=vlm_fallback_lexical). A validated answer
    scores 1.0: it names a catalog record verbatim. Transport failures
    are retried once, then surfaced as BackendUnavailable so the caller
    owns the fallback policy.
    """
    text = _require_text(desc)
    lexical = lexical_match(desc, dataset, k=k)
    shortlist = [dataset.record(rid).material_name for rid, _ in lexical.candidates]

    answer: str | None = None
    corrective = False
    for attempt in range(2):
        try:
            answer = backend.match_material(text, shortlist, corrective=corrective)
        except BackendUnavailable:
            if attempt == 1:
                raise
            continue
        record_id = dataset.name_index.get(normalize_name(answer))
        if record_id is not None:
            return MatchResult(
                description=desc,
                record_id=record_id,
                score=1.0,
                method=METHOD_VLM,
                candidates=lexical.candidates,
            )
        corrective = True
    return replace(lexical, method=METHOD_VLM_FALLBACK)


def match_all(
    descs: Sequence[MaterialDescription],
    dataset: MaterialDataset,
    backend: SupportsMaterialMatch | None = None,
    k: int = DEFAULT_SHORTLIST,
) -> list[MatchResult | MatchFailure]:
    """Match every description, preserving source_rank order.

    Backend calls fan out across a small thread pool (the backend itself
    enforces the in-flight cap); results are reassembled in input order.
    Per-description errors become MatchFailure entries rather than
    aborting the batch. Descriptions that land on a record an earlier
    rank already claimed are flagged duplicate, not suppressed.
    """
    if not descs:
        raise EmptyInput("no descriptions to match")
    if len(descs) > 10:
        raise ValidationError(f"at most 10 descriptions per batch, got {len(descs)}")
    ranks = [d.source_rank for d in descs]
    if len(set(ranks)) != len(ranks):
        raise ValidationError(f"source_ranks must be unique, got {sorted(ranks)}")

    ordered = sorted(descs, key=lambda d: d.source_rank)

    def run_one(desc: MaterialDescription) -> MatchResult | MatchFailure:
        try:
            if backend is None:
                return lexical_match(desc, dataset, k=k)
            return vlm_match(desc, dataset, backend, k=k)
        except (EmptyDescription, EmptyDataset, BackendUnavailable, ValidationError) as e:
            return MatchFailure(description=desc, code=e.code, message=str(e))

    if backend is None or len(ordered) == 1:
        outcomes = [run_one(d) for d in ordered]
    else:
        with ThreadPoolExecutor(max_workers=min(4, len(ordered))) as pool:
            outcomes = list(pool.map(run_one, ordered))

    seen: set[int] = set()
    results: list[MatchResult | MatchFailure] = []
    for outcome in outcomes:
        if isinstance(outcome, MatchResult):
            if outcome.record_id in seen:
                outcome = replace(outcome, duplicate=True)
            seen.add(outcome.record_id)
        results.append(outcome)
    return results
