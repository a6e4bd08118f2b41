"""
The full pipeline: prompt to image to carbon insight report
===========================================================

One call chains image generation, material extraction, matching, and
metric lookup, and traces each stage. Visibility conditions control how
much of the result a participant gets to see.
"""

from carbonsight.pipeline import PipelineConfig, render_report, run_pipeline
from carbonsight.study import bundled_dataset

dataset = bundled_dataset()
prompt = "a sunlit timber pavilion with a stone floor"

# Default condition: image plus insights, metrics shown.
report = run_pipeline(prompt, PipelineConfig(gateway_mode="mock"), dataset=dataset)
print(f"image {report.image.image_id}")
print(f"visibility: {report.condition_visibility}")
print(f"insights: {len(report.insights)}, failed: {len(report.failed)}")

for insight in report.insights[:3]:
    per_kg = (
        f"{insight.per_kg_carbon.value:.3f} {insight.per_kg_carbon.unit_label}"
        if insight.per_kg_carbon is not None
        else insight.normalization_note
    )
    print(f"  {insight.match.description.source_rank}."
          f" {insight.match.description.text}")
    print(f"     record {insight.match.record_id},"
          f" {insight.raw_carbon.value:.1f} {insight.raw_carbon.unit_label},"
          f" per kg: {per_kg}")

# Every stage reports its mode and how many backend calls it made.
for trace in report.pipeline_trace:
    print(f"  stage {trace.stage}: mode={trace.mode} calls={trace.calls}")

# The image-only condition skips extraction, matching, and metrics
# entirely; skipped stages appear in the trace with zero calls.
bare = run_pipeline(
    prompt,
    PipelineConfig(gateway_mode="mock", condition="t2i_only"),
    dataset=dataset,
)
print(f"t2i_only visibility: {bare.condition_visibility},"
      f" insights: {len(bare.insights)}")
print("skipped:", [t.stage for t in bare.pipeline_trace if t.mode == "skipped"])

# Reports render as canonical JSON (stable bytes, key-sorted) or as an
# aligned text table for terminals.
print()
print(render_report(report, "text_table"))
