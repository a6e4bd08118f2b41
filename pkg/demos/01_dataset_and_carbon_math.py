"""
Loading the material dataset and computing embodied carbon
==========================================================

Everything here runs offline against the bundled dataset snapshot.
"""

from carbonsight.materials import (
    FOSSIL_STAGES,
    Stage,
    embodied_carbon,
    normalize_per_kg,
)
from carbonsight.study import bundled_dataset

# The package ships a small validated snapshot of material records.
# load_dataset() accepts any JSON array in the same shape; the bundled
# copy is convenient for demos and tests.
dataset = bundled_dataset()
print(f"loaded {len(dataset.records)} records from {dataset.source_label}")

# Records are looked up by integer id. Record 9 is a hardwood decking
# product declared per cubic metre, with a known density.
record = dataset.record(9)
print(record.material_name)
print(f"  unit: {record.functional_unit_quantity:g} {record.functional_unit_unit.value}")
print(f"  density: {record.density} kg/m3")

# Embodied carbon is a sum over explicitly selected life cycle stages.
# The fossil stages cover production (A1-A3), installation (A5), and
# end of life (C1-C4). Biogenic storage is kept out of the headline
# figure and reported separately, signed.
headline = embodied_carbon(record, FOSSIL_STAGES)
print(f"  fossil total: {headline.value:.2f} {headline.unit_label}")

production_only = embodied_carbon(record, Stage.A1A3)
print(f"  production only: {production_only.value:.2f} {production_only.unit_label}")

with_biogenic = embodied_carbon(record, FOSSIL_STAGES | Stage.BIOGENIC)
print(f"  net of biogenic storage: {with_biogenic.value:.2f}")

# Values declared per m3 or per several kg are hard to compare, so a
# per-kg normalization exists. It needs a mass model: kg units divide
# by the declared quantity, volumetric units additionally need density.
per_kg = normalize_per_kg(record, headline)
print(f"  normalized: {per_kg.value:.4f} {per_kg.unit_label}")

# Area and piece units carry no mass model and are refused rather than
# silently guessed. The pipeline reports these as not normalizable.
from carbonsight.errors import NormalizationUnsupported

carpet = dataset.record(30)  # declared per m2
try:
    normalize_per_kg(carpet, embodied_carbon(carpet, FOSSIL_STAGES))
except NormalizationUnsupported as exc:
    print(f"refused as expected: {exc}")
