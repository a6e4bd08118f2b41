import itertools
import random
import string

import pytest
from hypothesis import given, strategies as st

from carbonsight.errors import (
    BackendUnavailable,
    EmptyDataset,
    EmptyDescription,
    EmptyInput,
    ValidationError,
)
from carbonsight.materials import MaterialDataset, normalize_name
from carbonsight.matching import (
    METHOD_EXACT,
    METHOD_LEXICAL,
    METHOD_VLM,
    METHOD_VLM_FALLBACK,
    MatchFailure,
    MatchResult,
    MaterialDescription,
    jaccard,
    lexical_match,
    match_all,
    record_tokens,
    tokenize,
    vlm_match,
)

D = MaterialDescription


class ScriptedMatcher:
    """Backend double that replays a fixed sequence of answers or errors."""

    def __init__(self, *answers):
        self.answers = list(answers)
        self.calls = []

    def match_material(self, description, shortlist, corrective=False):
        self.calls.append((description, tuple(shortlist), corrective))
        answer = self.answers.pop(0)
        if isinstance(answer, Exception):
            raise answer
        return answer


# ---------------------------------------------------------------------------
# tokenization


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Hardwood deck boards", {"hardwood", "deck", "board"}),
        ("Decking, Hardwood (per m3)", {"decking", "hardwood"}),
        ("glass-fiber panels!", {"glas", "fiber", "panel"}),
        ("s s s", {"s"}),
        ("2050 Materials", {"2050", "material"}),
        ("", set()),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == frozenset(expected)


def test_tokenize_folds_only_trailing_s():
    assert tokenize("grass") == {"gras"}  # one fold, no stemming
    assert tokenize("atlas atlases") == {"atla", "atlase"}


def test_record_tokens_cover_type_fields(decking):
    toks = record_tokens(decking)
    assert {"decking", "hardwood", "wood"} <= toks
    assert "per" not in toks and "m3" not in toks


def test_jaccard_bounds():
    a = frozenset({"x", "y"})
    assert jaccard(a, a) == 1.0
    assert jaccard(a, frozenset({"z"})) == 0.0
    assert jaccard(a, frozenset()) == 0.0
    assert jaccard(frozenset(), frozenset()) == 0.0


@given(
    st.frozensets(st.text(string.ascii_lowercase, min_size=1, max_size=4), max_size=8),
    st.frozensets(st.text(string.ascii_lowercase, min_size=1, max_size=4), max_size=8),
)
def test_jaccard_symmetric_and_bounded(a, b):
    score = jaccard(a, b)
    assert 0.0 <= score <= 1.0
    assert score == jaccard(b, a)


# ---------------------------------------------------------------------------
# lexical path: frozen reference scores on the three-record fixture


def test_descriptive_phrase_picks_decking(trio):
    result = lexical_match(D("hardwood deck boards across the terrace"), trio)
    assert result.record_id == 9
    assert result.method == METHOD_LEXICAL
    assert result.score == pytest.approx(0.125, rel=1e-12)


def test_exact_name_short_circuits(trio):
    result = lexical_match(D("Decking, Hardwood (per m3)"), trio)
    assert result.record_id == 9
    assert result.method == METHOD_EXACT
    assert result.score == 1.0
    assert result.candidates == ((9, 1.0),)


def test_exact_match_survives_case_and_spacing(trio):
    result = lexical_match(D("  decking,  HARDWOOD (per M3)"), trio)
    assert result.method == METHOD_EXACT
    assert result.record_id == 9


def test_near_name_scores_half(trio):
    result = lexical_match(D("Hardwood decking panels"), trio)
    assert result.record_id == 9
    assert result.score == pytest.approx(0.5, rel=1e-12)


def test_candidates_sorted_by_score_then_id(trio):
    result = lexical_match(D("hardwood deck boards across the terrace"), trio, k=3)
    assert len(result.candidates) == 3
    scores = [s for _, s in result.candidates]
    assert scores == sorted(scores, reverse=True)
    ids_at_tied_scores = [
        [rid for rid, s in group]
        for _, group in itertools.groupby(result.candidates, key=lambda c: c[1])
    ]
    for ids in ids_at_tied_scores:
        assert ids == sorted(ids)


def test_no_overlap_still_returns_best_of_k(trio):
    result = lexical_match(D("zzz qqq"), trio, k=2)
    assert result.score == 0.0
    assert result.record_id == 9  # lowest id wins a full tie
    assert len(result.candidates) == 2


def test_empty_description_refused(trio):
    with pytest.raises(EmptyDescription):
        lexical_match(D("   "), trio)


def test_empty_dataset_refused():
    empty = MaterialDataset(records=(), name_index={})
    with pytest.raises(EmptyDataset):
        lexical_match(D("anything"), empty)


def test_bad_k_refused(trio):
    with pytest.raises(ValidationError):
        lexical_match(D("wood"), trio, k=0)


def test_dataset_order_never_matters(dataset):
    reordered = MaterialDataset(
        records=tuple(reversed(dataset.records)),
        name_index=dict(dataset.name_index),
    )
    for text in ("bamboo floor", "steel bars", "stone cladding", "zzz"):
        a = lexical_match(D(text), dataset)
        b = lexical_match(D(text), reordered)
        assert (a.record_id, a.score, a.candidates) == (b.record_id, b.score, b.candidates)


# ---------------------------------------------------------------------------
# vision-language path


def test_vlm_valid_answer_scores_one(trio, decking):
    backend = ScriptedMatcher(decking.material_name)
    result = vlm_match(D("hardwood deck boards"), trio, backend)
    assert result.record_id == 9
    assert result.method == METHOD_VLM
    assert result.score == 1.0
    assert len(backend.calls) == 1
    description, shortlist, corrective = backend.calls[0]
    assert decking.material_name in shortlist
    assert corrective is False


def test_vlm_shortlist_comes_from_lexical_candidates(trio):
    backend = ScriptedMatcher("Cladding, Limestone (per kg)")
    vlm_match(D("limestone facade"), trio, backend, k=2)
    _, shortlist, _ = backend.calls[0]
    lexical = lexical_match(D("limestone facade"), trio, k=2)
    assert list(shortlist) == [trio.record(rid).material_name for rid, _ in lexical.candidates]


def test_vlm_invalid_answer_gets_one_corrective_retry(trio, decking):
    backend = ScriptedMatcher("Unobtainium", decking.material_name)
    result = vlm_match(D("hardwood deck boards"), trio, backend)
    assert result.method == METHOD_VLM
    assert result.record_id == 9
    assert [c for _, _, c in backend.calls] == [False, True]


def test_vlm_two_invalid_answers_fall_back_to_lexical(trio):
    backend = ScriptedMatcher("Unobtainium", "Adamantium")
    result = vlm_match(D("hardwood deck boards across the terrace"), trio, backend)
    assert result.method == METHOD_VLM_FALLBACK
    assert result.record_id == 9
    assert result.score == pytest.approx(0.125, rel=1e-12)
    assert len(backend.calls) == 2


def test_vlm_answer_validated_with_name_normalization(trio, decking):
    backend = ScriptedMatcher("  DECKING, hardwood (PER m3)  ")
    result = vlm_match(D("deck"), trio, backend)
    assert result.method == METHOD_VLM
    assert result.record_id == 9
    assert backend.answers == []  # single call consumed the script


def test_vlm_transport_error_retried_once(trio, decking):
    backend = ScriptedMatcher(BackendUnavailable("503"), decking.material_name)
    result = vlm_match(D("deck"), trio, backend)
    assert result.method == METHOD_VLM
    assert len(backend.calls) == 2


def test_vlm_two_transport_errors_surface(trio):
    backend = ScriptedMatcher(BackendUnavailable("503"), BackendUnavailable("503"))
    with pytest.raises(BackendUnavailable):
        vlm_match(D("deck"), trio, backend)
    assert len(backend.calls) == 2  # never a third call


# ---------------------------------------------------------------------------
# batch


def test_match_all_preserves_rank_order(trio):
    descs = [D("limestone cladding", 2), D("hardwood deck", 1), D("wood fiber floor", 3)]
    results = match_all(descs, trio)
    assert [r.description.source_rank for r in results] == [1, 2, 3]
    assert all(isinstance(r, MatchResult) for r in results)


def test_match_all_flags_duplicates(trio):
    descs = [D("hardwood decking", 1), D("hardwood deck boards", 2)]
    first, second = match_all(descs, trio)
    assert first.record_id == second.record_id == 9
    assert first.duplicate is False
    assert second.duplicate is True


def test_match_all_isolates_per_item_failures(trio):
    descs = [D("hardwood deck", 1), D("   ", 2)]
    ok, failed = match_all(descs, trio)
    assert isinstance(ok, MatchResult)
    assert isinstance(failed, MatchFailure)
    assert failed.code == "empty_description"


def test_match_all_backend_failure_becomes_entry(trio):
    backend = ScriptedMatcher(BackendUnavailable("x"), BackendUnavailable("x"))
    (outcome,) = match_all([D("deck", 1)], trio, backend=backend)
    assert isinstance(outcome, MatchFailure)
    assert outcome.code == "backend_unavailable"


def test_match_all_empty_refused(trio):
    with pytest.raises(EmptyInput):
        match_all([], trio)


def test_match_all_caps_batch_at_ten(trio):
    descs = [D(f"item {i}", i) for i in range(1, 12)]
    with pytest.raises(ValidationError, match="at most 10"):
        match_all(descs, trio)


def test_match_all_duplicate_ranks_refused(trio):
    with pytest.raises(ValidationError, match="unique"):
        match_all([D("a", 1), D("b", 1)], trio)


def test_match_all_with_backend_matches_serial_run(trio):
    # thread fan-out must not change outcomes: scripted per-description backend
    class ByDescription:
        def match_material(self, description, shortlist, corrective=False):
            return shortlist[0]

    descs = [D("hardwood deck", 1), D("limestone", 2), D("fiber board", 3)]
    parallel = match_all(descs, trio, backend=ByDescription())
    serial = [vlm_match(d, trio, ByDescription()) for d in sorted(descs, key=lambda d: d.source_rank)]
    assert [(r.record_id, r.method) for r in parallel] == [
        (r.record_id, r.method) for r in serial
    ]


# ---------------------------------------------------------------------------
# oracle agreement on randomized datasets (small-scale; the acceptance
# suite runs the full 100-dataset sweep)


WORDS = (
    "oak pine steel glass stone clay brick board panel beam tile sheet "
    "plaster timber concrete slab block membrane batten strip liner core"
).split()


def random_dataset(rng: random.Random, n_records: int) -> MaterialDataset:
    records = []
    names = set()
    while len(records) < n_records:
        words = rng.sample(WORDS, k=rng.randint(1, 4))
        name = f"{' '.join(words).title()} (per kg)"
        key = normalize_name(name)
        if key in names:
            continue
        names.add(key)
        rid = len(records) + 1
        from carbonsight.materials import FunctionalUnit, MaterialRecord

        records.append(
            MaterialRecord(
                id=rid,
                material_name=name,
                material_type=rng.choice(WORDS).title(),
                functional_unit_unit=FunctionalUnit.KG,
            )
        )
    return MaterialDataset(
        records=tuple(records),
        name_index={normalize_name(r.material_name): r.id for r in records},
    )


def oracle_best(text: str, dataset: MaterialDataset) -> tuple[int, float, str]:
    """Independent brute-force reference: exhaust every record."""
    exact = dataset.name_index.get(normalize_name(text.strip()))
    if exact is not None:
        return exact, 1.0, METHOD_EXACT
    query = tokenize(text)
    best_id, best_score = None, -1.0
    for record in dataset.records:
        score = jaccard(query, record_tokens(record))
        if score > best_score or (score == best_score and record.id < best_id):
            best_id, best_score = record.id, score
    return best_id, best_score, METHOD_LEXICAL


def test_lexical_agrees_with_brute_force_oracle():
    rng = random.Random(20240817)
    for _ in range(10):
        dataset = random_dataset(rng, rng.randint(3, 40))
        for _ in range(20):
            if rng.random() < 0.2:
                text = rng.choice(dataset.records).material_name
            else:
                text = " ".join(rng.sample(WORDS, k=rng.randint(1, 5)))
            want_id, want_score, want_method = oracle_best(text, dataset)
            got = lexical_match(D(text), dataset)
            assert (got.record_id, got.method) == (want_id, want_method), text
            assert got.score == pytest.approx(want_score, rel=1e-12)
            assert 0.0 <= got.score <= 1.0
            assert lexical_match(D(text), dataset) == got  # bit-stable repeat
