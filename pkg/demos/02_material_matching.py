"""
Matching free-text material descriptions to dataset records
===========================================================

The matcher is a token-set similarity ranking with an exact-name
short circuit; a vision-language backend can override the top pick
from a lexical shortlist.
"""

from carbonsight.gateway import GatewayConfig, build_backends
from carbonsight.matching import (
    MaterialDescription,
    jaccard,
    lexical_match,
    match_all,
    record_tokens,
    tokenize,
)
from carbonsight.study import bundled_dataset

dataset = bundled_dataset()

# Tokenization lowercases, splits on non-alphanumerics, strips unit
# parentheticals like "(per m3)", and folds plural s.
print(sorted(tokenize("Hardwood deck boards (per m3)")))
print(sorted(record_tokens(dataset.record(9)))[:8], "...")

# Similarity is Jaccard overlap between the two token sets.
a = tokenize("hardwood deck boards")
b = record_tokens(dataset.record(9))
print(f"jaccard: {jaccard(a, b):.3f}")

# lexical_match returns the best record plus a scored candidate list.
result = lexical_match(MaterialDescription("hardwood deck boards"), dataset)
print(f"chose record {result.record_id} via {result.method}, score {result.score:.3f}")
for rid, score in result.candidates:
    print(f"  candidate {rid}: {score:.3f}")

# An exact normalized-name hit skips the ranking entirely.
exact = lexical_match(MaterialDescription("Decking, Hardwood (per m3)"), dataset)
print(f"exact name: record {exact.record_id}, method {exact.method}")

# With a backend configured, the lexical top-k becomes a shortlist the
# model picks from. The mock backend always answers with the first
# shortlist entry, which makes it deterministic and key-free.
_, vlm = build_backends(GatewayConfig(mode="mock"))
picked = match_all(
    [
        MaterialDescription("hardwood deck boards", source_rank=1),
        MaterialDescription("woven carpet floor tiles", source_rank=2),
        MaterialDescription("hardwood decking again", source_rank=3),
    ],
    dataset,
    backend=vlm,
)
for entry in picked:
    dup = " (duplicate)" if entry.duplicate else ""
    print(f"rank {entry.description.source_rank}: record {entry.record_id}"
          f" via {entry.method}{dup}")
