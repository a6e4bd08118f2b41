"""
Deterministic backends: mock generation and fixture replay
==========================================================

Three gateway modes share one request-hashing scheme. Mock mode
computes answers locally (and records them when a fixture directory is
configured); replay mode serves only recorded fixtures; live mode talks
to real endpoints and needs API keys in the environment.
"""

import tempfile
from pathlib import Path

from carbonsight.gateway import (
    GatewayConfig,
    build_backends,
    extract_materials,
    generate_image,
)

workdir = Path(tempfile.mkdtemp(prefix="carbonsight-demo-"))
fixtures = workdir / "fixtures"

# Mock mode with a fixture directory: every backend call is answered
# deterministically and written down as <request-hash>.bin plus
# <request-hash>.meta.json.
t2i, vlm = build_backends(GatewayConfig(mode="mock", fixture_dir=fixtures))

image = generate_image("a cork-floored reading nook", t2i)
print(f"image id {image.image_id}")
print(f"  {image.media_type}, {len(image.data)} bytes, created {image.created_at}")

# The same prompt always produces the same image in mock mode.
again = generate_image("a cork-floored reading nook", t2i)
print(f"repeatable: {again.data == image.data}")

# Extraction asks the vision backend for exactly ten material lines,
# filters furnishing words through a blocklist, and renumbers survivors.
extraction = extract_materials(image, vlm)
print(f"extracted {len(extraction.descriptions)} materials"
      f" (shortfall: {extraction.shortfall})")
for desc in extraction.descriptions[:3]:
    print(f"  {desc.source_rank}. {desc.text}")

print(f"fixtures on disk: {sorted(p.name for p in fixtures.iterdir())[:4]} ...")

# Replay mode answers the same requests byte-for-byte from those files,
# with no computation and no keys. Unseen requests fail fast instead of
# silently regenerating.
replay_t2i, replay_vlm = build_backends(
    GatewayConfig(mode="replay", fixture_dir=fixtures)
)
replayed = generate_image("a cork-floored reading nook", replay_t2i)
print(f"replayed == mock: {replayed.data == image.data}")

from carbonsight.errors import ReplayMiss

try:
    generate_image("a prompt nobody recorded", replay_t2i)
except ReplayMiss as exc:
    print(f"unseen request refused: {str(exc)[:50]}...")
