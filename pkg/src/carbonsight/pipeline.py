"""One call from prompt to insight report.

Orchestrates the full chain: generate an image, extract material
descriptions from it, match each description to a dictionary record,
attach carbon metrics, assemble the report. The t2i_only condition stops
after the image: the later stages are skipped outright (zero
vision-language calls), not merely hidden at render time.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol

from .canonical import canonical_dumps
from .errors import (
    CarbonsightError,
    ConfigError,
    NormalizationUnsupported,
    PipelineStageError,
    UnknownMaterial,
    ValidationError,
)
from .gateway import (
    ExtractionResult,
    GatewayConfig,
    GeneratedImage,
    T2IBackend,
    VlmBackend,
    build_backends,
    extract_materials,
)
from .matching import MatchFailure, MatchResult, match_all
from .materials import (
    FOSSIL_STAGES,
    CarbonQuantity,
    MaterialDataset,
    MaterialRecord,
    Stage,
    embodied_carbon,
    load_dataset,
    normalize_per_kg,
    parse_record,
)

CONDITION_T2I_ONLY = "t2i_only"
CONDITION_T2I_INSIGHTS = "t2i_insights"
_CONDITIONS = (CONDITION_T2I_ONLY, CONDITION_T2I_INSIGHTS)

VISIBILITY_SHOWN = "metrics_shown"
VISIBILITY_HIDDEN = "metrics_hidden"

NOTE_LINEAR_SCALING = "approximate, linear scaling"
NOTE_NOT_NORMALIZABLE = "n/a (unit not normalizable)"
NOTE_NORMALIZATION_OFF = "n/a (normalization disabled)"


@dataclass(frozen=True)
class MaterialInsight:
    match: MatchResult
    raw_carbon: CarbonQuantity
    biogenic: float
    per_kg_carbon: CarbonQuantity | None
    normalization_note: str
    freshness_note: str = ""

    @property
    def description(self):
        return self.match.description


@dataclass(frozen=True)
class FailedMaterial:
    """A per-material soft failure kept in the report instead of aborting."""

    rank: int
    text: str
    code: str
    message: str


@dataclass(frozen=True)
class StageTrace:
    stage: str
    mode: str
    calls: int
    duration_ms: float


@dataclass(frozen=True)
class InsightReport:
    image: GeneratedImage
    insights: tuple[MaterialInsight, ...]
    condition_visibility: str
    shortfall: bool
    pipeline_trace: tuple[StageTrace, ...]
    failed: tuple[FailedMaterial, ...] = ()


@dataclass(frozen=True)
class PipelineConfig:
    dataset_path: Path | None = None
    gateway_mode: str = "mock"
    fixture_dir: Path | None = None
    condition: str = CONDITION_T2I_INSIGHTS
    blocklist: tuple[str, ...] | None = None
    shortlist_k: int = 10
    normalize: bool = True
    max_in_flight: int = 4

    def __post_init__(self):
        if self.condition not in _CONDITIONS:
            raise ConfigError(
                f"condition must be one of {_CONDITIONS}, got {self.condition!r}"
            )
        if self.shortlist_k < 1:
            raise ConfigError("shortlist_k must be >= 1")

    def gateway_config(self) -> GatewayConfig:
        kwargs: dict[str, Any] = {
            "mode": self.gateway_mode,
            "fixture_dir": self.fixture_dir,
            "max_in_flight": self.max_in_flight,
        }
        if self.blocklist is not None:
            kwargs["blocklist"] = frozenset(self.blocklist)
        return GatewayConfig(**kwargs)


_CONFIG_KEYS = {
    "dataset_path": "dataset_path",
    "gateway_mode": "gateway_mode",
    "fixture_dir": "fixture_dir",
    "condition": "condition",
    "blocklist": "blocklist",
    "shortlist_k": "shortlist_k",
    "normalization": "normalize",
    "max_in_flight": "max_in_flight",
}


def load_pipeline_config(path: Path | str) -> PipelineConfig:
    """Read a JSON config file; unknown keys are an error, not a shrug."""
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read pipeline config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"pipeline config {path} is not valid JSON: {e.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("pipeline config must be a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown pipeline config keys: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {}
    for key, attr in _CONFIG_KEYS.items():
        if key not in raw:
            continue
        value = raw[key]
        if attr in ("dataset_path", "fixture_dir") and value is not None:
            value = Path(value)
        if attr == "blocklist" and value is not None:
            value = tuple(str(v) for v in value)
        kwargs[attr] = value
    return PipelineConfig(**kwargs)


# ---------------------------------------------------------------------------
# metrics


class SupportsRecordFetch(Protocol):
    """Remote materials-database connector: one record by id."""

    def fetch_record(self, record_id: int) -> dict[str, Any]: ...


class RemoteRefresher:
    """TTL-cached wrapper over a remote connector (default 24h).

    Thread-safe; remote hiccups surface as exceptions so the caller can
    decide whether a local snapshot makes them survivable.
    """

    def __init__(
        self,
        connector: SupportsRecordFetch,
        ttl_s: float = 86400.0,
        clock=time.monotonic,
    ):
        self._connector = connector
        self._ttl = ttl_s
        self._clock = clock
        self._cache: dict[int, tuple[float, MaterialRecord]] = {}
        self._lock = threading.Lock()

    def record(self, record_id: int) -> MaterialRecord:
        now = self._clock()
        with self._lock:
            hit = self._cache.get(record_id)
            if hit is not None and hit[0] > now:
                return hit[1]
        raw = self._connector.fetch_record(record_id)
        record, reasons = parse_record(raw)
        if record is None:
            raise ValidationError(
                f"remote record {record_id} invalid: {'; '.join(reasons)}"
            )
        with self._lock:
            self._cache[record_id] = (now + self._ttl, record)
        return record


def fetch_metrics(
    match: MatchResult,
    dataset: MaterialDataset,
    remote: RemoteRefresher | None = None,
    normalize: bool = True,
) -> MaterialInsight:
    """Attach carbon figures to a match.

    The local dataset snapshot is the source of truth; a configured
    remote connector refreshes the record first, and a remote failure
    with a local copy present degrades to the snapshot with a staleness
    note rather than erroring.
    """
    record_id = match.record_id
    record = dataset.record(record_id) if dataset.has(record_id) else None
    freshness = ""
    if remote is not None:
        try:
            record = remote.record(record_id)
        except Exception:
            if record is None:
                raise UnknownMaterial(
                    f"record {record_id} unavailable locally and remotely"
                )
            freshness = "remote refresh failed; values from local snapshot"
    if record is None:
        raise UnknownMaterial(f"record {record_id} is not in the dataset")

    raw = embodied_carbon(record, FOSSIL_STAGES)
    biogenic = embodied_carbon(record, Stage.BIOGENIC).value
    per_kg = None
    if not normalize:
        note = NOTE_NORMALIZATION_OFF
    else:
        try:
            per_kg = normalize_per_kg(record, raw)
            note = NOTE_LINEAR_SCALING
        except NormalizationUnsupported:
            note = NOTE_NOT_NORMALIZABLE
    return MaterialInsight(
        match=match,
        raw_carbon=raw,
        biogenic=biogenic,
        per_kg_carbon=per_kg,
        normalization_note=note,
        freshness_note=freshness,
    )


# ---------------------------------------------------------------------------
# orchestration


class _Tracer:
    def __init__(self):
        self.entries: list[StageTrace] = []

    def add(self, stage: str, mode: str, calls: int, duration_ms: float = 0.0):
        self.entries.append(StageTrace(stage, mode, calls, duration_ms))

    def run(self, stage: str, mode: str, call_counter, fn):
        """Execute one stage; wrap any domain error with the stage name."""
        before = call_counter() if call_counter else 0
        start = time.perf_counter()
        try:
            result = fn()
        except CarbonsightError as e:
            raise PipelineStageError(stage, e) from e
        duration = (time.perf_counter() - start) * 1000.0
        calls = (call_counter() - before) if call_counter else 0
        self.add(stage, mode, calls, duration)
        return result


def run_pipeline(
    prompt: str,
    config: PipelineConfig,
    dataset: MaterialDataset | None = None,
    t2i: T2IBackend | None = None,
    vlm: VlmBackend | None = None,
    remote: RemoteRefresher | None = None,
) -> InsightReport:
    """Execute image -> descriptions -> matches -> metrics -> report.

    Preloaded datasets and backends may be injected (the service reuses
    them across requests); otherwise they are built from config. Hard
    stage failures abort with the stage named; per-material problems
    become flagged entries.
    """
    if dataset is None:
        if config.dataset_path is None:
            raise ConfigError("pipeline config names no dataset")
        try:
            with open(config.dataset_path, "rb") as fh:
                dataset = load_dataset(fh, source_label=str(config.dataset_path))
        except OSError as e:
            raise ConfigError(f"cannot read dataset {config.dataset_path}: {e}")
    if t2i is None or vlm is None:
        built_t2i, built_vlm = build_backends(config.gateway_config())
        t2i = t2i or built_t2i
        vlm = vlm or built_vlm

    mode = config.gateway_mode
    tracer = _Tracer()

    image: GeneratedImage = tracer.run(
        "t2i", mode, lambda: t2i.call_count, lambda: t2i.generate(prompt)
    )

    if config.condition == CONDITION_T2I_ONLY:
        for stage in ("vlm_extract", "match", "metrics"):
            tracer.add(stage, "skipped", 0)
        return InsightReport(
            image=image,
            insights=(),
            condition_visibility=VISIBILITY_HIDDEN,
            shortfall=False,
            pipeline_trace=tuple(tracer.entries),
        )

    extraction: ExtractionResult = tracer.run(
        "vlm_extract",
        mode,
        lambda: vlm.call_count,
        lambda: extract_materials(
            image,
            vlm,
            blocklist=frozenset(config.blocklist) if config.blocklist is not None else None,
        ),
    )

    outcomes = tracer.run(
        "match",
        mode,
        lambda: vlm.call_count,
        lambda: match_all(
            extraction.descriptions, dataset, backend=vlm, k=config.shortlist_k
        )
        if extraction.descriptions
        else [],
    )

    insights: list[MaterialInsight] = []
    failed: list[FailedMaterial] = []

    def attach_metrics():
        for outcome in outcomes:
            if isinstance(outcome, MatchFailure):
                failed.append(
                    FailedMaterial(
                        rank=outcome.description.source_rank,
                        text=outcome.description.text,
                        code=outcome.code,
                        message=outcome.message,
                    )
                )
                continue
            try:
                insights.append(
                    fetch_metrics(outcome, dataset, remote=remote, normalize=config.normalize)
                )
            except UnknownMaterial as e:
                failed.append(
                    FailedMaterial(
                        rank=outcome.description.source_rank,
                        text=outcome.description.text,
                        code=e.code,
                        message=str(e),
                    )
                )

    tracer.run("metrics", "local", None, attach_metrics)

    return InsightReport(
        image=image,
        insights=tuple(insights),
        condition_visibility=VISIBILITY_SHOWN,
        shortfall=extraction.shortfall,
        pipeline_trace=tuple(tracer.entries),
        failed=tuple(failed),
    )


# ---------------------------------------------------------------------------
# rendering


def _quantity_json(q: CarbonQuantity) -> dict[str, Any]:
    return {"value": q.value, "basis": q.basis.value, "unit_label": q.unit_label}


def report_to_json(report: InsightReport) -> dict[str, Any]:
    """User-facing dict form. For metrics_hidden reports the carbon keys
    are omitted entirely; the leak-freedom tests scan for this.

    Durations are deliberately excluded from the trace so replayed runs
    serialize byte-identically.
    """
    out: dict[str, Any] = {
        "condition_visibility": report.condition_visibility,
        "image": {
            "image_id": report.image.image_id,
            "media_type": report.image.media_type,
            "prompt_text": report.image.prompt_text,
            "created_at": report.image.created_at,
            "backend_label": report.image.backend_label,
        },
        "pipeline_trace": [
            {"stage": t.stage, "mode": t.mode, "calls": t.calls}
            for t in report.pipeline_trace
        ],
        "shortfall": report.shortfall,
    }
    if report.condition_visibility != VISIBILITY_SHOWN:
        return out

    out["insights"] = [
        {
            "rank": ins.match.description.source_rank,
            "description": ins.match.description.text,
            "match": {
                "record_id": ins.match.record_id,
                "score": ins.match.score,
                "method": ins.match.method,
                "duplicate": ins.match.duplicate,
            },
            "carbon": {
                "raw": _quantity_json(ins.raw_carbon),
                "biogenic": ins.biogenic,
                "per_kg": _quantity_json(ins.per_kg_carbon)
                if ins.per_kg_carbon is not None
                else None,
                "normalization_note": ins.normalization_note,
            },
            "freshness_note": ins.freshness_note,
        }
        for ins in report.insights
    ]
    out["failed"] = [
        {"rank": f.rank, "description": f.text, "code": f.code, "message": f.message}
        for f in report.failed
    ]
    return out


def _table_row(cells: list[str], widths: list[int]) -> str:
    return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()


def render_report(report: InsightReport, fmt: str = "json") -> str:
    """json: canonical key-sorted serialization. text_table: one aligned
    row per material with headline, biogenic, and per-kg columns."""
    if fmt == "json":
        return canonical_dumps(report_to_json(report))
    if fmt != "text_table":
        raise ValidationError(f"unknown report format {fmt!r}")

    lines = [
        f"image {report.image.image_id} ({report.image.media_type})",
        f"prompt: {report.image.prompt_text}",
    ]
    if report.condition_visibility != VISIBILITY_SHOWN:
        lines.append("material insights: not shown in this condition")
        return "\n".join(lines) + "\n"

    header = ["#", "description", "matched", "headline", "biogenic", "per kg"]
    rows = []
    for ins in report.insights:
        raw = ins.raw_carbon
        per_kg = (
            f"{ins.per_kg_carbon.value:.4f} ({ins.normalization_note})"
            if ins.per_kg_carbon is not None
            else ins.normalization_note
        )
        rows.append(
            [
                str(ins.match.description.source_rank),
                ins.match.description.text,
                f"id {ins.match.record_id} [{ins.match.method}]",
                f"{raw.value:.2f} {raw.unit_label}",
                f"{ins.biogenic:+.2f}",
                per_kg,
            ]
        )
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines.append(_table_row(header, widths))
    lines.append(_table_row(["-" * w for w in widths], widths))
    lines.extend(_table_row(row, widths) for row in rows)
    if report.shortfall:
        lines.append("note: fewer than ten materials were identified")
    for f in report.failed:
        lines.append(f"failed #{f.rank}: {f.text} ({f.code})")
    return "\n".join(lines) + "\n"
