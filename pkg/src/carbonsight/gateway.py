"""Access to the two generative backends: text-to-image and vision-language.

Every call goes through one of three modes. ``live`` talks HTTPS+JSON to
the configured endpoints (credentials from environment variables only)
and records fixtures as it goes; ``replay`` answers from recorded
fixtures keyed by the hash of the canonical request; ``mock`` fabricates
deterministic responses from the request hash alone. Replay and mock
make every downstream behavior testable offline, byte for byte.
"""

from __future__ import annotations

import base64
import json
import os
import random
import re
import struct
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .canonical import canonical_bytes, canonical_hash, sha256_hex
from .errors import (
    BackendUnavailable,
    ConfigError,
    EmptyPrompt,
    ExtractionParseError,
    ReplayMiss,
    StorageError,
    ValidationError,
)
from .matching import MaterialDescription, tokenize

MODE_LIVE = "live"
MODE_REPLAY = "replay"
MODE_MOCK = "mock"
_MODES = (MODE_LIVE, MODE_REPLAY, MODE_MOCK)

#: Fixed timestamp stamped on every mock response so mock runs are
#: reproducible down to the byte.
MOCK_CREATED_AT = "2025-01-01T00:00:00Z"

# Prompt templates are versioned and embedded in the request payload, so
# any wording change produces new request hashes and stale fixtures miss
# loudly instead of replaying silently wrong.
EXTRACT_TEMPLATE_ID = "extract-finishes/v1"
EXTRACT_INSTRUCTION = (
    "List exactly ten interior material finishes visible in this image, "
    "one per line, numbered 1-10. Name architectural and construction "
    "finishes only: floors, walls, ceilings, joinery, built-in fixtures. "
    "Exclude furniture and decorative elements. Each line is a short "
    "one-line description of a single material finish."
)
EXTRACT_REFORMAT_NOTE = (
    "Your previous answer was not a numbered list. Respond again with "
    "only a plain numbered list, one material per line, nothing else."
)
MATCH_TEMPLATE_ID = "match-material/v1"
MATCH_INSTRUCTION = (
    "Choose the catalog material that best matches this description. "
    "Answer with exactly one material_name from the candidate list, "
    "copied verbatim, and nothing else."
)
MATCH_CORRECTIVE_NOTE = (
    "Your previous answer was not one of the candidates. Answer with one "
    "candidate name exactly as written in the list."
)

DEFAULT_BLOCKLIST = frozenset(
    {"sofa", "chair", "table", "lamp", "rug", "cushion", "artwork", "plant", "curtain"}
)


@dataclass(frozen=True)
class GatewayConfig:
    mode: str = MODE_MOCK
    fixture_dir: Path | None = None
    t2i_endpoint: str = ""
    vlm_endpoint: str = ""
    max_in_flight: int = 4
    min_interval_s: float = 0.0
    max_prompt_chars: int = 4000
    timeout_s: float = 60.0
    t2i_params: tuple[tuple[str, Any], ...] = ()
    blocklist: frozenset[str] = DEFAULT_BLOCKLIST

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"gateway mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == MODE_REPLAY and self.fixture_dir is None:
            raise ConfigError("replay mode needs a fixture directory")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")

    @classmethod
    def from_env(cls, **overrides: Any) -> GatewayConfig:
        mode = overrides.pop("mode", None) or os.environ.get("GATEWAY_MODE", MODE_MOCK)
        return cls(mode=mode, **overrides)


@dataclass(frozen=True)
class GeneratedImage:
    image_id: str
    data: bytes
    media_type: str
    prompt_text: str
    created_at: str
    backend_label: str

    def __post_init__(self):
        if not self.data:
            raise ValidationError("image payload is empty")
        if self.image_id != sha256_hex(self.data):
            raise ValidationError("image_id does not hash the payload")
        if self.media_type not in ("png", "jpeg"):
            raise ValidationError(f"unsupported media type {self.media_type!r}")


def new_image(
    data: bytes, media_type: str, prompt_text: str, created_at: str, backend_label: str
) -> GeneratedImage:
    return GeneratedImage(
        image_id=sha256_hex(data),
        data=data,
        media_type=media_type,
        prompt_text=prompt_text,
        created_at=created_at,
        backend_label=backend_label,
    )


@dataclass(frozen=True)
class ExtractionResult:
    descriptions: tuple[MaterialDescription, ...]
    raw_response: str
    filtered_out: tuple[tuple[str, str], ...]
    shortfall: bool


def encode_base64(data: bytes) -> str:
    """Standard padded base64; decode(encode(x)) == x."""
    return base64.b64encode(data).decode("ascii")


def request_key(kind: str, payload: dict[str, Any]) -> str:
    """Stable fixture key: SHA-256 of the key-sorted request JSON."""
    return canonical_hash({"kind": kind, "payload": payload})


# ---------------------------------------------------------------------------
# fixture store


class FixtureStore:
    """Request-hash keyed store: payload verbatim plus a JSON sidecar.

    Reads are lock-free (files are immutable once named); writes go
    through a temp file and an atomic rename, so a reader never sees a
    half-written fixture.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def _paths(self, key: str) -> tuple[Path, Path]:
        if not re.fullmatch(r"[0-9a-f]{64}", key):
            raise ValidationError(f"bad fixture key {key!r}")
        return self.root / f"{key}.bin", self.root / f"{key}.meta.json"

    def exists(self, key: str) -> bool:
        payload_path, meta_path = self._paths(key)
        return payload_path.exists() and meta_path.exists()

    def load(self, key: str) -> tuple[bytes, dict[str, Any]]:
        payload_path, meta_path = self._paths(key)
        try:
            payload = payload_path.read_bytes()
            meta = json.loads(meta_path.read_text("utf-8"))
        except FileNotFoundError:
            raise ReplayMiss(
                f"no recorded fixture for request {key}", request_hash=key
            ) from None
        except OSError as e:
            raise StorageError(f"fixture store unreadable: {e}") from e
        return payload, meta

    def save(self, key: str, payload: bytes, meta: dict[str, Any]) -> str:
        payload_path, meta_path = self._paths(key)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            for target, data in (
                (payload_path, payload),
                (meta_path, canonical_bytes(meta)),
            ):
                tmp = target.with_suffix(target.suffix + ".tmp")
                tmp.write_bytes(data)
                os.replace(tmp, target)
        except OSError as e:
            raise StorageError(f"fixture store unwritable: {e}") from e
        return key


def record_fixture(
    request: dict[str, Any], payload: bytes, meta: dict[str, Any], store: FixtureStore
) -> str:
    """Persist a live response under its request hash for later replay."""
    return store.save(canonical_hash(request), payload, meta)


# ---------------------------------------------------------------------------
# deterministic mock payloads


def _png_chunk(tag: bytes, body: bytes) -> bytes:
    return (
        struct.pack(">I", len(body))
        + tag
        + body
        + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF)
    )


def solid_png(rgb: tuple[int, int, int], size: int = 8) -> bytes:
    """A tiny valid single-color PNG, no imaging library required."""
    ihdr = struct.pack(">IIBBBBB", size, size, 8, 2, 0, 0, 0)
    row = b"\x00" + bytes(rgb) * size
    idat = zlib.compress(row * size, 9)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", idat)
        + _png_chunk(b"IEND", b"")
    )


#: Pool the mock extractor samples from; all architectural finishes so the
#: default blocklist never fires on mock output.
_MOCK_FINISH_POOL = (
    "wide-plank oak flooring",
    "polished concrete floor slab",
    "exposed brick feature wall",
    "painted gypsum plasterboard walls",
    "limestone cladding panels",
    "brushed steel door hardware",
    "clear double-glazed window units",
    "solid hardwood ceiling beams",
    "terrazzo kitchen countertop",
    "ceramic subway wall tiles",
    "cork acoustic wall paneling",
    "anodized aluminium window frames",
    "natural slate floor tiles",
    "birch plywood cabinetry fronts",
    "lime plaster accent wall",
    "granite hearth surround",
    "bamboo parquet flooring",
    "stainless steel splashback",
)


def _mock_extraction_text(key: str) -> str:
    rng = random.Random(int(key[:16], 16))
    picks = rng.sample(_MOCK_FINISH_POOL, 10)
    return "\n".join(f"{i}. {line}" for i, line in enumerate(picks, start=1))


# ---------------------------------------------------------------------------
# backends


def _api_key(var: str) -> str:
    key = os.environ.get(var, "")
    if not key:
        raise ConfigError(f"{var} is not set; live mode needs it")
    return key


class _Throttle:
    """In-flight cap plus optional minimum spacing between live calls."""

    def __init__(self, max_in_flight: int, min_interval_s: float):
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._interval = min_interval_s
        self._lock = threading.Lock()
        self._last = 0.0

    def __enter__(self):
        self._gate.acquire()
        if self._interval > 0:
            with self._lock:
                wait = self._last + self._interval - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
                self._last = time.monotonic()
        return self

    def __exit__(self, *exc):
        self._gate.release()
        return False


def _live_post(endpoint: str, body: dict[str, Any], key_var: str, timeout_s: float) -> dict[str, Any]:
    import httpx

    headers = {"Authorization": f"Bearer {_api_key(key_var)}"}
    try:
        resp = httpx.post(endpoint, json=body, headers=headers, timeout=timeout_s)
    except httpx.HTTPError as e:
        # deliberately terse: transport errors must never echo headers
        raise BackendUnavailable(f"backend unreachable: {type(e).__name__}")
    if resp.status_code >= 400:
        retry_after = None
        try:
            retry_after = float(resp.headers.get("retry-after", ""))
        except ValueError:
            pass
        raise BackendUnavailable(
            f"backend returned HTTP {resp.status_code}", retry_after_s=retry_after
        )
    return resp.json()


def _utcnow() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


class T2IBackend:
    """Text-to-image client with live/replay/mock dispatch."""

    label = "t2i"

    def __init__(self, config: GatewayConfig, store: FixtureStore | None = None):
        self.config = config
        self.store = store or (
            FixtureStore(config.fixture_dir) if config.fixture_dir else None
        )
        self._throttle = _Throttle(config.max_in_flight, config.min_interval_s)
        self._calls = 0
        self._count_lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def _tick(self) -> None:
        with self._count_lock:
            self._calls += 1

    def request_for(self, prompt: str) -> dict[str, Any]:
        return {
            "kind": "t2i",
            "payload": {"prompt": prompt, "params": dict(self.config.t2i_params)},
        }

    def generate(self, prompt: str) -> GeneratedImage:
        if not prompt.strip():
            raise EmptyPrompt("prompt is empty")
        if len(prompt) > self.config.max_prompt_chars:
            raise ValidationError(
                f"prompt exceeds {self.config.max_prompt_chars} characters"
            )
        request = self.request_for(prompt)
        key = canonical_hash(request)
        self._tick()

        if self.config.mode == MODE_MOCK:
            rgb = tuple(bytes.fromhex(key[:6]))
            data = solid_png(rgb)
            # a configured store turns mock runs into fixture seeders, so
            # replay suites and demos never need a live credential
            if self.store is not None:
                record_fixture(
                    request,
                    data,
                    {
                        "kind": "t2i",
                        "media_type": "png",
                        "created_at": MOCK_CREATED_AT,
                        "backend_label": "mock-t2i",
                    },
                    self.store,
                )
            return new_image(data, "png", prompt, MOCK_CREATED_AT, "mock-t2i")

        if self.config.mode == MODE_REPLAY:
            assert self.store is not None
            payload, meta = self.store.load(key)
            return new_image(
                payload,
                meta.get("media_type", "png"),
                prompt,
                meta.get("created_at", MOCK_CREATED_AT),
                meta.get("backend_label", "replay-t2i"),
            )

        with self._throttle:
            body = _live_post(
                self.config.t2i_endpoint,
                {"prompt": prompt, **dict(self.config.t2i_params)},
                "T2I_API_KEY",
                self.config.timeout_s,
            )
        try:
            data = base64.b64decode(body["image_b64"])
            media_type = body.get("media_type", "png")
        except (KeyError, ValueError) as e:
            raise BackendUnavailable(f"malformed backend response: {e}")
        created_at = _utcnow()
        if self.store is not None:
            record_fixture(
                request,
                data,
                {
                    "kind": "t2i",
                    "media_type": media_type,
                    "created_at": created_at,
                    "backend_label": "live-t2i",
                },
                self.store,
            )
        return new_image(data, media_type, prompt, created_at, "live-t2i")


class VlmBackend:
    """Vision-language client: material extraction and shortlist matching."""

    label = "vlm"

    def __init__(self, config: GatewayConfig, store: FixtureStore | None = None):
        self.config = config
        self.store = store or (
            FixtureStore(config.fixture_dir) if config.fixture_dir else None
        )
        self._throttle = _Throttle(config.max_in_flight, config.min_interval_s)
        self._calls = 0
        self._count_lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def _tick(self) -> None:
        with self._count_lock:
            self._calls += 1

    def _text_response(self, request: dict[str, Any], mock_text: str) -> str:
        key = canonical_hash(request)
        self._tick()
        if self.config.mode == MODE_MOCK:
            if self.store is not None:
                self.store.save(
                    key,
                    mock_text.encode("utf-8"),
                    {
                        "kind": request["kind"],
                        "created_at": MOCK_CREATED_AT,
                        "backend_label": "mock-vlm",
                        "template": request["payload"].get("template", ""),
                    },
                )
            return mock_text
        if self.config.mode == MODE_REPLAY:
            assert self.store is not None
            payload, _meta = self.store.load(key)
            return payload.decode("utf-8")
        with self._throttle:
            body = _live_post(
                self.config.vlm_endpoint,
                request["payload"],
                "VLM_API_KEY",
                self.config.timeout_s,
            )
        try:
            text = str(body["text"])
        except KeyError as e:
            raise BackendUnavailable(f"malformed backend response: missing {e}")
        if self.store is not None:
            record_fixture(
                request,
                text.encode("utf-8"),
                {
                    "kind": request["kind"],
                    "created_at": _utcnow(),
                    "backend_label": "live-vlm",
                    "template": request["payload"].get("template", ""),
                },
                self.store,
            )
        return text

    def extract_request(self, image: GeneratedImage, reformat: bool = False) -> dict[str, Any]:
        instruction = EXTRACT_INSTRUCTION + (" " + EXTRACT_REFORMAT_NOTE if reformat else "")
        return {
            "kind": "vlm_extract",
            "payload": {
                "template": EXTRACT_TEMPLATE_ID,
                "instruction": instruction,
                "image_b64": encode_base64(image.data),
                "media_type": image.media_type,
            },
        }

    def extract(self, image: GeneratedImage, reformat: bool = False) -> str:
        request = self.extract_request(image, reformat)
        return self._text_response(
            request, _mock_extraction_text(canonical_hash(request))
        )

    def match_request(
        self, description: str, shortlist: list[str], corrective: bool = False
    ) -> dict[str, Any]:
        instruction = MATCH_INSTRUCTION + (" " + MATCH_CORRECTIVE_NOTE if corrective else "")
        return {
            "kind": "vlm_match",
            "payload": {
                "template": MATCH_TEMPLATE_ID,
                "instruction": instruction,
                "description": description,
                "candidates": list(shortlist),
            },
        }

    def match_material(
        self, description: str, shortlist: list[str], corrective: bool = False
    ) -> str:
        request = self.match_request(description, list(shortlist), corrective)
        mock_answer = shortlist[0] if shortlist else ""
        return self._text_response(request, mock_answer)


def build_backends(config: GatewayConfig) -> tuple[T2IBackend, VlmBackend]:
    store = FixtureStore(config.fixture_dir) if config.fixture_dir else None
    return T2IBackend(config, store), VlmBackend(config, store)


# ---------------------------------------------------------------------------
# operations over backends


def generate_image(prompt: str, backend: T2IBackend) -> GeneratedImage:
    return backend.generate(prompt)


_LINE_MARKER = re.compile(r"^\s*(?:\d{1,3}[.)]\s+|[-*•]\s+)(.*\S)\s*$")


def parse_material_lines(raw: str) -> list[str]:
    """Pull one-line items out of a numbered or bulleted response."""
    items = []
    for line in raw.splitlines():
        m = _LINE_MARKER.match(line)
        if m:
            items.append(m.group(1))
    return items


def extract_materials(
    image: GeneratedImage,
    backend: VlmBackend,
    blocklist: frozenset[str] | None = None,
    target: int = 10,
) -> ExtractionResult:
    """Ask the VLM for the ten most prominent material finishes.

    The response is parsed as a numbered list (one reformat retry if it
    is not one), then post-filtered: any line whose tokens hit the
    furniture/decor blocklist moves to filtered_out with the offending
    tokens named. Survivors are renumbered 1..n; fewer than ``target``
    raises nothing and simply flags a shortfall, because sparse scenes
    are legal prompts.
    """
    configured = blocklist if blocklist is not None else backend.config.blocklist
    # match each entry both folded like a line token ("Curtains" catches
    # "curtain") and spelled literally, since an entry may already be in
    # folded form and the trailing-s fold is not idempotent
    blocked: frozenset[str] = frozenset()
    for entry in configured:
        blocked |= tokenize(entry)
        blocked |= frozenset(re.findall(r"[a-z0-9]+", entry.lower()))
    raw = backend.extract(image, reformat=False)
    lines = parse_material_lines(raw)
    if not lines:
        raw = backend.extract(image, reformat=True)
        lines = parse_material_lines(raw)
        if not lines:
            raise ExtractionParseError(
                "backend response is not a material list", raw_text=raw
            )

    descriptions: list[MaterialDescription] = []
    filtered: list[tuple[str, str]] = []
    for line in lines:
        hits = sorted(tokenize(line) & blocked)
        if hits:
            filtered.append((line, "blocklist: " + ", ".join(hits)))
            continue
        if len(descriptions) < target:
            descriptions.append(
                MaterialDescription(text=line, source_rank=len(descriptions) + 1)
            )
    return ExtractionResult(
        descriptions=tuple(descriptions),
        raw_response=raw,
        filtered_out=tuple(filtered),
        shortfall=len(descriptions) < target,
    )
