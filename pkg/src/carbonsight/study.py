"""Three-condition study protocol: sessions, iterations, coding, aggregation.

A session belongs to one condition (T1 no sustainability framing, T2
sustainability goal only, T3 goal plus carbon metrics), holds at most
five successful design iterations, collects per-iteration reflections as
raw text, and closes with a coded final survey. Aggregation reports the
per-condition percentage table over complete sessions only.

Persistence is an append-only event log per session plus a compacted
snapshot, both written atomically, so a crash mid-iteration can lose at
most the in-flight event and never corrupts a stored session.
"""

from __future__ import annotations

import calendar
import enum
import importlib.resources
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, BinaryIO

from .canonical import canonical_bytes, canonical_dumps
from .errors import (
    AttemptLimitExceeded,
    ConditionMismatch,
    IncompleteStudy,
    NothingToFinalize,
    PipelineStageError,
    SessionClosed,
    SessionNotFound,
    StorageError,
    UncodableAnswer,
    ValidationError,
)
from .materials import MaterialDataset, load_dataset
from .pipeline import (
    CONDITION_T2I_INSIGHTS,
    CONDITION_T2I_ONLY,
    PipelineConfig,
    VISIBILITY_HIDDEN,
    VISIBILITY_SHOWN,
    report_to_json,
    run_pipeline,
)

MAX_ITERATIONS = 5

SUSTAINABILITY_GOAL_ID = "sustainability-goal/v1"
SUSTAINABILITY_GOAL_TEXT = (
    "Treat sustainability as an explicit design goal: alongside your "
    "aesthetic intent, try to reduce the embodied carbon of the materials "
    "your space is made of."
)

STATUS_OPEN = "open"
STATUS_COMPLETE = "complete"


class Condition(enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"

    @property
    def goal_text(self) -> str | None:
        return None if self is Condition.T1 else SUSTAINABILITY_GOAL_TEXT

    @property
    def metrics_shown(self) -> bool:
        return self is Condition.T3

    @property
    def pipeline_condition(self) -> str:
        return CONDITION_T2I_INSIGHTS if self is Condition.T3 else CONDITION_T2I_ONLY


def parse_condition(value: Condition | str) -> Condition:
    if isinstance(value, Condition):
        return value
    try:
        return Condition(str(value).strip().upper())
    except ValueError:
        raise ValidationError(f"condition must be T1, T2 or T3, got {value!r}")


def utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


class TickClock:
    """Deterministic clock: fixed start, fixed step per reading.

    Used wherever reproducible timestamps matter (the bundled reference
    study is built with one).
    """

    def __init__(self, start: str = "2025-03-10T09:00:00Z", step_s: int = 60):
        self._t = calendar.timegm(time.strptime(start, "%Y-%m-%dT%H:%M:%SZ"))
        self._step = step_s

    def __call__(self) -> str:
        out = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(self._t))
        self._t += self._step
        return out


# ---------------------------------------------------------------------------
# domain types


_CODE_SCALE = {"yes": 1.0, "somewhat": 0.5, "no": 0.0}
_LABEL_FOR_SCORE = {1.0: "Yes", 0.5: "Somewhat", 0.0: "No"}


@dataclass(frozen=True)
class CodedAnswer:
    label: str
    score: float

    def __post_init__(self):
        expected = _CODE_SCALE.get(self.label.lower())
        if expected is None or expected != self.score:
            raise ValidationError(
                f"coded answer {self.label!r}/{self.score!r} is not on the scale"
            )


def code_reflection(label_text: str) -> CodedAnswer:
    """Strict manual coding: Yes=1.0, Somewhat=0.5, No=0.0.

    Case-insensitive exact label match only; this is a coder's data-entry
    aid, not a language model.
    """
    key = label_text.strip().lower()
    score = _CODE_SCALE.get(key)
    if score is None:
        raise UncodableAnswer(f"answer {label_text!r} is not Yes/Somewhat/No")
    return CodedAnswer(label=_LABEL_FOR_SCORE[score], score=score)


@dataclass(frozen=True)
class SurveyResponse:
    satisfaction: CodedAnswer
    sustainability_considered: CodedAnswer
    insights_useful: CodedAnswer | None = None
    free_text: str = ""


@dataclass(frozen=True)
class IterationRecord:
    index: int
    prompt: str
    report: dict[str, Any]
    submitted_at: str


@dataclass(frozen=True)
class Reflection:
    iteration: int
    text: str
    recorded_at: str


@dataclass(frozen=True)
class FailedAttempt:
    prompt: str
    code: str
    message: str
    occurred_at: str


@dataclass
class Session:
    session_id: str
    participant_label: str
    condition: Condition
    created_at: str
    intake: dict[str, Any] = field(default_factory=dict)
    iterations: list[IterationRecord] = field(default_factory=list)
    reflections: list[Reflection] = field(default_factory=list)
    failed_attempts: list[FailedAttempt] = field(default_factory=list)
    final_survey: SurveyResponse | None = None
    status: str = STATUS_OPEN
    finalized_at: str | None = None

    @property
    def goal_text(self) -> str | None:
        return self.condition.goal_text


# ---------------------------------------------------------------------------
# serialization


def _answer_dict(a: CodedAnswer | None) -> dict[str, Any] | None:
    return None if a is None else {"label": a.label, "score": a.score}


def _answer_from(d: dict[str, Any] | None) -> CodedAnswer | None:
    return None if d is None else CodedAnswer(label=d["label"], score=d["score"])


def survey_to_dict(survey: SurveyResponse) -> dict[str, Any]:
    return {
        "satisfaction": _answer_dict(survey.satisfaction),
        "sustainability_considered": _answer_dict(survey.sustainability_considered),
        "insights_useful": _answer_dict(survey.insights_useful),
        "free_text": survey.free_text,
    }


def survey_from_dict(d: dict[str, Any]) -> SurveyResponse:
    return SurveyResponse(
        satisfaction=_answer_from(d["satisfaction"]),
        sustainability_considered=_answer_from(d["sustainability_considered"]),
        insights_useful=_answer_from(d.get("insights_useful")),
        free_text=d.get("free_text", ""),
    )


def session_to_dict(session: Session) -> dict[str, Any]:
    return {
        "session_id": session.session_id,
        "participant_label": session.participant_label,
        "condition": session.condition.value,
        "status": session.status,
        "created_at": session.created_at,
        "finalized_at": session.finalized_at,
        "goal_text": session.goal_text,
        "intake": session.intake,
        "iterations": [
            {
                "index": it.index,
                "prompt": it.prompt,
                "report": it.report,
                "submitted_at": it.submitted_at,
            }
            for it in session.iterations
        ],
        "reflections": [
            {"iteration": r.iteration, "text": r.text, "recorded_at": r.recorded_at}
            for r in session.reflections
        ],
        "failed_attempts": [
            {
                "prompt": f.prompt,
                "code": f.code,
                "message": f.message,
                "occurred_at": f.occurred_at,
            }
            for f in session.failed_attempts
        ],
        "final_survey": None
        if session.final_survey is None
        else survey_to_dict(session.final_survey),
    }


def session_from_dict(d: dict[str, Any]) -> Session:
    return Session(
        session_id=d["session_id"],
        participant_label=d["participant_label"],
        condition=parse_condition(d["condition"]),
        created_at=d["created_at"],
        intake=dict(d.get("intake", {})),
        iterations=[
            IterationRecord(
                index=it["index"],
                prompt=it["prompt"],
                report=it["report"],
                submitted_at=it["submitted_at"],
            )
            for it in d.get("iterations", [])
        ],
        reflections=[
            Reflection(r["iteration"], r["text"], r["recorded_at"])
            for r in d.get("reflections", [])
        ],
        failed_attempts=[
            FailedAttempt(f["prompt"], f["code"], f["message"], f["occurred_at"])
            for f in d.get("failed_attempts", [])
        ],
        final_survey=None
        if d.get("final_survey") is None
        else survey_from_dict(d["final_survey"]),
        status=d.get("status", STATUS_OPEN),
        finalized_at=d.get("finalized_at"),
    )


# ---------------------------------------------------------------------------
# persistence


_SESSION_ID = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]{0,63}")


class SessionStore:
    """Per-session event log (<id>.jsonl) plus compacted snapshot (<id>.json).

    Events are appended with fsync; snapshots go through tmp+rename. The
    snapshot is authoritative for reads; if only the log survives a
    crash, the session is rebuilt by replaying it.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _check_id(self, session_id: str) -> str:
        if not _SESSION_ID.fullmatch(session_id):
            raise ValidationError(f"unusable session id {session_id!r}")
        return session_id

    def _event_path(self, session_id: str) -> Path:
        return self.root / f"{self._check_id(session_id)}.jsonl"

    def _snapshot_path(self, session_id: str) -> Path:
        return self.root / f"{self._check_id(session_id)}.json"

    def exists(self, session_id: str) -> bool:
        return (
            self._snapshot_path(session_id).exists()
            or self._event_path(session_id).exists()
        )

    def append_event(self, session_id: str, event: dict[str, Any]) -> None:
        import os

        try:
            self.root.mkdir(parents=True, exist_ok=True)
            with open(self._event_path(session_id), "ab") as fh:
                fh.write(canonical_bytes(event) + b"\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as e:
            raise StorageError(f"cannot append session event: {e}") from e

    def write_snapshot(self, session: Session) -> None:
        import os

        target = self._snapshot_path(session.session_id)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            tmp = target.with_suffix(".json.tmp")
            tmp.write_bytes(canonical_bytes(session_to_dict(session)))
            os.replace(tmp, target)
        except OSError as e:
            raise StorageError(f"cannot write session snapshot: {e}") from e

    def persist(self, session: Session, event: dict[str, Any]) -> None:
        self.append_event(session.session_id, event)
        self.write_snapshot(session)

    def load(self, session_id: str) -> Session:
        snapshot = self._snapshot_path(session_id)
        if snapshot.exists():
            return session_from_dict(json.loads(snapshot.read_text("utf-8")))
        events_path = self._event_path(session_id)
        if events_path.exists():
            return self._replay(events_path)
        raise SessionNotFound(f"no session {session_id!r}")

    def _replay(self, events_path: Path) -> Session:
        session: Session | None = None
        with open(events_path, "rb") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line.decode("utf-8"))
                kind = event.get("event")
                if kind == "created":
                    session = session_from_dict(event["session"])
                elif session is None:
                    raise StorageError(f"event log {events_path} missing creation event")
                elif kind == "iteration":
                    it = event["record"]
                    session.iterations.append(
                        IterationRecord(
                            it["index"], it["prompt"], it["report"], it["submitted_at"]
                        )
                    )
                elif kind == "reflection":
                    r = event["reflection"]
                    session.reflections.append(
                        Reflection(r["iteration"], r["text"], r["recorded_at"])
                    )
                elif kind == "failed_attempt":
                    f = event["attempt"]
                    session.failed_attempts.append(
                        FailedAttempt(
                            f["prompt"], f["code"], f["message"], f["occurred_at"]
                        )
                    )
                elif kind == "finalized":
                    session.final_survey = survey_from_dict(event["survey"])
                    session.status = STATUS_COMPLETE
                    session.finalized_at = event["finalized_at"]
        if session is None:
            raise StorageError(f"event log {events_path} is empty")
        return session

    def list_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        ids = {
            p.stem
            for p in self.root.iterdir()
            if p.suffix in (".json", ".jsonl") and not p.name.endswith(".tmp")
        }
        return sorted(ids)


# ---------------------------------------------------------------------------
# protocol operations


def create_session(
    participant_label: str,
    condition: Condition | str,
    store: SessionStore | None = None,
    session_id: str | None = None,
    intake: dict[str, Any] | None = None,
    clock=utc_now,
) -> Session:
    if not participant_label.strip():
        raise ValidationError("participant_label must not be blank")
    cond = parse_condition(condition)
    sid = session_id or uuid.uuid4().hex[:12]
    if store is not None and store.exists(sid):
        raise ValidationError(f"session {sid!r} already exists")
    session = Session(
        session_id=sid,
        participant_label=participant_label.strip(),
        condition=cond,
        created_at=clock(),
        intake=dict(intake or {}),
    )
    if store is not None:
        store.persist(session, {"event": "created", "session": session_to_dict(session)})
    return session


def _require_open(session: Session) -> None:
    if session.status != STATUS_OPEN:
        raise SessionClosed(f"session {session.session_id} is complete")


def submit_iteration(
    session: Session,
    prompt: str,
    config: PipelineConfig,
    dataset: MaterialDataset | None = None,
    t2i=None,
    vlm=None,
    store: SessionStore | None = None,
    image_sink=None,
    clock=utc_now,
) -> IterationRecord:
    """Run one design iteration under the session's condition.

    The sixth attempt on a session fails before touching any backend. A
    pipeline abort is persisted as a failed-attempt stub that does not
    consume one of the five design attempts, then re-raised. image_sink,
    when given, receives the GeneratedImage so callers can persist the
    bytes (the stored record keeps only the image id).
    """
    _require_open(session)
    if len(session.iterations) >= MAX_ITERATIONS:
        raise AttemptLimitExceeded(
            f"session {session.session_id} already has {MAX_ITERATIONS} iterations"
        )

    run_config = replace(config, condition=session.condition.pipeline_condition)
    try:
        report = run_pipeline(prompt, run_config, dataset=dataset, t2i=t2i, vlm=vlm)
    except PipelineStageError as e:
        stub = FailedAttempt(
            prompt=prompt, code=e.code, message=str(e), occurred_at=clock()
        )
        session.failed_attempts.append(stub)
        if store is not None:
            store.persist(
                session,
                {
                    "event": "failed_attempt",
                    "attempt": {
                        "prompt": stub.prompt,
                        "code": stub.code,
                        "message": stub.message,
                        "occurred_at": stub.occurred_at,
                    },
                },
            )
        raise

    if image_sink is not None:
        image_sink(report.image)
    report_dict = report_to_json(report)
    expected = VISIBILITY_SHOWN if session.condition.metrics_shown else VISIBILITY_HIDDEN
    if report_dict["condition_visibility"] != expected:
        raise ValidationError(
            f"report visibility {report_dict['condition_visibility']} does not "
            f"match condition {session.condition.value}"
        )

    record = IterationRecord(
        index=len(session.iterations) + 1,
        prompt=prompt,
        report=report_dict,
        submitted_at=clock(),
    )
    session.iterations.append(record)
    if store is not None:
        store.persist(
            session,
            {
                "event": "iteration",
                "record": {
                    "index": record.index,
                    "prompt": record.prompt,
                    "report": record.report,
                    "submitted_at": record.submitted_at,
                },
            },
        )
    return record


def add_reflection(
    session: Session,
    iteration: int,
    text: str,
    store: SessionStore | None = None,
    clock=utc_now,
) -> Reflection:
    """Attach the participant's raw reflection text to one iteration.

    Reflections are stored verbatim and never coded; only the final
    survey is coded.
    """
    _require_open(session)
    if not text.strip():
        raise ValidationError("reflection text must not be blank")
    if not any(it.index == iteration for it in session.iterations):
        raise ValidationError(f"no iteration {iteration} to reflect on")
    if any(r.iteration == iteration for r in session.reflections):
        raise ValidationError(f"iteration {iteration} already has a reflection")
    reflection = Reflection(iteration=iteration, text=text, recorded_at=clock())
    session.reflections.append(reflection)
    if store is not None:
        store.persist(
            session,
            {
                "event": "reflection",
                "reflection": {
                    "iteration": reflection.iteration,
                    "text": reflection.text,
                    "recorded_at": reflection.recorded_at,
                },
            },
        )
    return reflection


def finalize_session(
    session: Session,
    survey: SurveyResponse,
    store: SessionStore | None = None,
    clock=utc_now,
) -> Session:
    _require_open(session)
    if not session.iterations:
        raise NothingToFinalize(
            f"session {session.session_id} has no iterations to finalize"
        )
    if session.condition is Condition.T3:
        if survey.insights_useful is None:
            raise ConditionMismatch("T3 survey requires an insights_useful answer")
    elif survey.insights_useful is not None:
        raise ConditionMismatch(
            f"insights_useful is not collected for {session.condition.value}"
        )
    session.final_survey = survey
    session.status = STATUS_COMPLETE
    session.finalized_at = clock()
    if store is not None:
        store.persist(
            session,
            {
                "event": "finalized",
                "survey": survey_to_dict(survey),
                "finalized_at": session.finalized_at,
            },
        )
    return session


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class ConditionSummary:
    condition: str
    n_participants: int
    sustainability_considered_pct: float
    satisfaction_pct: float
    insights_useful_pct: float | None


@dataclass(frozen=True)
class StudySummary:
    conditions: tuple[ConditionSummary, ...]

    def by_condition(self, condition: str) -> ConditionSummary:
        for c in self.conditions:
            if c.condition == condition:
                return c
        raise KeyError(condition)


def _pct(scores: list[float]) -> float:
    return 100.0 * (sum(scores) / len(scores))


def summarize_study(sessions: list[Session]) -> StudySummary:
    """Table-shaped aggregation: 100 x mean coded score per condition.

    Conditions nobody ran are absent from the output rather than
    reported as zero. Any open session is a protocol violation here.
    """
    for s in sessions:
        if s.status != STATUS_COMPLETE:
            raise IncompleteStudy(f"session {s.session_id} is still open")
    grouped: dict[str, list[Session]] = {}
    for s in sessions:
        grouped.setdefault(s.condition.value, []).append(s)

    out = []
    for condition in (Condition.T1, Condition.T2, Condition.T3):
        members = grouped.get(condition.value)
        if not members:
            continue
        surveys = [s.final_survey for s in members]
        insights_pct = None
        if condition is Condition.T3:
            insights_pct = _pct([v.insights_useful.score for v in surveys])
        out.append(
            ConditionSummary(
                condition=condition.value,
                n_participants=len(members),
                sustainability_considered_pct=_pct(
                    [v.sustainability_considered.score for v in surveys]
                ),
                satisfaction_pct=_pct([v.satisfaction.score for v in surveys]),
                insights_useful_pct=insights_pct,
            )
        )
    return StudySummary(conditions=tuple(out))


def summary_to_json(summary: StudySummary) -> dict[str, Any]:
    """Presentation form: percentages rounded to one decimal place."""
    conditions: dict[str, Any] = {}
    for c in summary.conditions:
        entry: dict[str, Any] = {
            "n_participants": c.n_participants,
            "sustainability_considered_pct": round(c.sustainability_considered_pct, 1),
            "satisfaction_pct": round(c.satisfaction_pct, 1),
        }
        if c.insights_useful_pct is not None:
            entry["insights_useful_pct"] = round(c.insights_useful_pct, 1)
        conditions[c.condition] = entry
    return {"conditions": conditions}


def render_summary(summary: StudySummary, fmt: str = "json") -> str:
    if fmt == "json":
        return canonical_dumps(summary_to_json(summary))
    if fmt != "text":
        raise ValidationError(f"unknown summary format {fmt!r}")
    if not summary.conditions:
        return "no sessions\n"
    header = ["condition", "n", "sustainability %", "satisfaction %", "insights useful %"]
    rows = []
    for c in summary.conditions:
        rows.append(
            [
                c.condition,
                str(c.n_participants),
                f"{c.sustainability_considered_pct:.1f}",
                f"{c.satisfaction_pct:.1f}",
                "-" if c.insights_useful_pct is None else f"{c.insights_useful_pct:.1f}",
            ]
        )
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.extend(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# export / import


def export_sessions(sessions: list[Session], sink: BinaryIO | Path | str) -> None:
    """One canonical JSON object per line; import(export(x)) == x."""
    payload = b"".join(
        canonical_bytes(session_to_dict(s)) + b"\n" for s in sessions
    )
    if hasattr(sink, "write"):
        sink.write(payload)
        return
    try:
        Path(sink).write_bytes(payload)
    except OSError as e:
        raise StorageError(f"cannot write export: {e}") from e


def import_sessions(source: bytes | BinaryIO | Path | str) -> list[Session]:
    if isinstance(source, bytes):
        data = source
    elif hasattr(source, "read"):
        data = source.read()
    else:
        try:
            data = Path(source).read_bytes()
        except OSError as e:
            raise StorageError(f"cannot read export: {e}") from e
    sessions = []
    for line in data.splitlines():
        if line.strip():
            sessions.append(session_from_dict(json.loads(line.decode("utf-8"))))
    return sessions


def load_sessions(path: Path | str) -> list[Session]:
    """Sessions from a store directory, an export .jsonl, or one snapshot."""
    p = Path(path)
    if p.is_dir():
        store = SessionStore(p)
        return [store.load(sid) for sid in store.list_ids()]
    if p.suffix == ".jsonl":
        return import_sessions(p)
    if p.suffix == ".json":
        return [session_from_dict(json.loads(p.read_text("utf-8")))]
    raise ValidationError(f"cannot load sessions from {p}")


# ---------------------------------------------------------------------------
# bundled reference study


_REFERENCE_PROMPTS = (
    "sunlit reading corner with timber shelving",
    "compact studio kitchen with stone worktops",
    "open-plan lounge with an exposed brick wall",
    "minimalist bedroom with cork flooring",
    "cafe corner with terrazzo counters",
    "home office with birch plywood joinery",
    "entry hall with natural slate tiles",
    "bathroom with ceramic subway tiles",
    "attic studio with bamboo parquet",
)

_REFERENCE_SCORES: dict[str, dict[str, tuple[float, ...] | None]] = {
    "T1": {
        "sustainability": (0, 0, 0, 0, 0, 0, 0, 0, 0),
        "satisfaction": (1, 1, 1, 1, 1, 1, 0.5, 0, 0),
        "insights": None,
    },
    "T2": {
        "sustainability": (1, 1, 1, 1, 1, 1, 1, 0.5, 0),
        "satisfaction": (1, 1, 1, 1, 1, 1, 1, 0, 0),
        "insights": None,
    },
    "T3": {
        "sustainability": (1, 1, 1, 1, 1, 1, 1, 1, 1),
        "satisfaction": (1, 1, 1, 1, 0.5, 0, 0, 0, 0),
        "insights": (1, 1, 1, 1, 1, 1, 0, 0, 0),
    },
}


def _coded(score: float) -> CodedAnswer:
    return CodedAnswer(label=_LABEL_FOR_SCORE[float(score)], score=float(score))


def bundled_dataset() -> MaterialDataset:
    """The packaged 12-record materials fixture (one record per unit branch)."""
    data = (
        importlib.resources.files("carbonsight")
        .joinpath("data/materials_fixture.json")
        .read_bytes()
    )
    return load_dataset(data, source_label="bundled:materials_fixture")


def reference_sessions_bytes() -> bytes:
    """The frozen 27-session export shipped with the package."""
    return (
        importlib.resources.files("carbonsight")
        .joinpath("data/reference_sessions.jsonl")
        .read_bytes()
    )


def build_reference_sessions(
    dataset: MaterialDataset | None = None,
    store: SessionStore | None = None,
) -> list[Session]:
    """Rebuild the bundled reference study from scratch, deterministically.

    Nine participants run each condition once with a single iteration;
    survey score vectors are fixed so the aggregate lands on the
    published percentages. Everything downstream of the fixed TickClock
    and the mock backends is reproducible byte for byte, which is what
    lets the shipped export be asserted against this function.
    """
    dataset = dataset or bundled_dataset()
    clock = TickClock()
    config = PipelineConfig(gateway_mode="mock")
    sessions: list[Session] = []
    for condition in (Condition.T1, Condition.T2, Condition.T3):
        scores = _REFERENCE_SCORES[condition.value]
        for i in range(9):
            participant = f"p{i + 1}"
            session = create_session(
                participant,
                condition,
                store=store,
                session_id=f"{participant}-{condition.value}",
                intake={"background": "design professional", "consent": True},
                clock=clock,
            )
            submit_iteration(
                session,
                _REFERENCE_PROMPTS[i],
                config,
                dataset=dataset,
                store=store,
                clock=clock,
            )
            add_reflection(
                session,
                1,
                "Adjusted the palette after seeing the result.",
                store=store,
                clock=clock,
            )
            insights_scores = scores["insights"]
            survey = SurveyResponse(
                satisfaction=_coded(scores["satisfaction"][i]),
                sustainability_considered=_coded(scores["sustainability"][i]),
                insights_useful=None
                if insights_scores is None
                else _coded(insights_scores[i]),
                free_text="",
            )
            finalize_session(session, survey, store=store, clock=clock)
            sessions.append(session)
    return sessions
