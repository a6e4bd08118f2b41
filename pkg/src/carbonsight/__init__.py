"""Text-to-image generation enriched with embodied-carbon material insights.

The library turns a design prompt into an image, reads the ten most
prominent material finishes out of it, maps each onto a materials
dictionary, and reports stage-wise CO2e per material. A study harness
runs the three-condition protocol around that loop, and an HTTP service
plus CLI expose both.
"""

from .canonical import canonical_bytes, canonical_dumps, canonical_hash, sha256_hex
from .errors import (
    AttemptLimitExceeded,
    BackendUnavailable,
    CarbonsightError,
    ConditionMismatch,
    ConfigError,
    EmptyDataset,
    EmptyDescription,
    EmptyInput,
    EmptyPrompt,
    ExtractionParseError,
    IncompleteStudy,
    NormalizationUnsupported,
    NothingToFinalize,
    ParseError,
    PipelineStageError,
    ReplayMiss,
    SessionClosed,
    SessionNotFound,
    StorageError,
    UncodableAnswer,
    UnknownMaterial,
    ValidationError,
    exit_code_for,
)
from .gateway import (
    ExtractionResult,
    FixtureStore,
    GatewayConfig,
    GeneratedImage,
    T2IBackend,
    VlmBackend,
    build_backends,
    encode_base64,
    extract_materials,
    generate_image,
    record_fixture,
    request_key,
)
from .matching import (
    MatchFailure,
    MatchResult,
    MaterialDescription,
    lexical_match,
    match_all,
    vlm_match,
)
from .materials import (
    FOSSIL_STAGES,
    CarbonBasis,
    CarbonQuantity,
    FunctionalUnit,
    MaterialDataset,
    MaterialRecord,
    Stage,
    embodied_carbon,
    load_dataset,
    normalize_per_kg,
    rank_by_carbon,
    serialize_dataset,
)
from .pipeline import (
    InsightReport,
    MaterialInsight,
    PipelineConfig,
    fetch_metrics,
    load_pipeline_config,
    render_report,
    report_to_json,
    run_pipeline,
)
from .study import (
    CodedAnswer,
    Condition,
    Session,
    SessionStore,
    StudySummary,
    SurveyResponse,
    add_reflection,
    build_reference_sessions,
    bundled_dataset,
    code_reflection,
    create_session,
    export_sessions,
    finalize_session,
    import_sessions,
    load_sessions,
    submit_iteration,
    summarize_study,
)

__version__ = "0.1.0"
