"""Materials dictionary: loading, validation, and embodied-carbon math.

A dataset is a JSON array of material records carrying stage-wise carbon
figures per declared functional unit (kg, m2, m3, or piece). This module
loads and validates such files, sums life-cycle stages, and normalizes
values to a per-kilogram basis where the declared unit allows it.

Datasets are immutable once loaded and safe to share across threads;
every operation here is a pure function of its inputs.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, BinaryIO, Iterable, Sequence

from .errors import (
    EmptyDataset,
    EmptyInput,
    NormalizationUnsupported,
    ParseError,
    ValidationError,
)


class FunctionalUnit(enum.Enum):
    """Quantity basis a record's metrics are declared against."""

    KG = "kg"
    M2 = "m2"
    M3 = "m3"
    PIECE = "piece"


_UNIT_DISPLAY = {
    FunctionalUnit.KG: "kg",
    FunctionalUnit.M2: "m²",
    FunctionalUnit.M3: "m³",
    FunctionalUnit.PIECE: "piece",
}


class Stage(enum.Flag):
    """Life-cycle stage selector for carbon sums.

    A1A3 covers product manufacture, A5 construction installation, C1C4
    end of life. BIOGENIC is an explicit opt-in: it adds the signed
    sequestered-carbon figure and is never implied by the other flags.
    """

    NONE = 0
    A1A3 = enum.auto()
    A5 = enum.auto()
    C1C4 = enum.auto()
    BIOGENIC = enum.auto()


#: The non-biogenic whole-life selection used for headline figures.
FOSSIL_STAGES = Stage.A1A3 | Stage.A5 | Stage.C1C4


class CarbonBasis(enum.Enum):
    PER_FUNCTIONAL_UNIT = "per_functional_unit"
    PER_KG = "per_kg"


@dataclass(frozen=True)
class CarbonQuantity:
    """A CO2e value tied to the basis it was computed on."""

    value: float
    basis: CarbonBasis
    unit_label: str


@dataclass(frozen=True)
class MaterialRecord:
    """One materials-dictionary entry.

    Field names mirror the upstream database schema. ``extra`` preserves
    any keys this code does not model, so re-serialized datasets keep
    pace with upstream schema additions.
    """

    id: int
    material_name: str
    product_type: str = ""
    product_type_family: tuple[str, ...] = ()
    material_type: str = ""
    material_type_family: str = ""
    group_elements_nrm_1: tuple[str, ...] = ()
    elements_nrm_1: tuple[str, ...] = ()
    uniclass_systems: tuple[str, ...] = ()
    uniclass_products: tuple[str, ...] = ()
    functional_unit_quantity: float = 1.0
    functional_unit_unit: FunctionalUnit = FunctionalUnit.KG
    carbon_a1a3: float = 0.0
    carbon_a5: float = 0.0
    carbon_c1c4: float = 0.0
    total_biogenic_co2e: float = 0.0
    freshwater_use_a1a3: float | None = None
    reuse_potential: float | None = None
    odp: float | None = None
    density: float | None = None
    data_source: str = ""
    created: str = ""
    updated: str = ""
    extra: tuple[tuple[str, Any], ...] = ()

    @property
    def unit_display(self) -> str:
        return _UNIT_DISPLAY[self.functional_unit_unit]


@dataclass(frozen=True)
class RejectedRecord:
    """A source entry that failed validation, with the reasons why."""

    index: int
    record_id: Any
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class MaterialDataset:
    """Validated, immutable collection of records with name and id indexes."""

    records: tuple[MaterialRecord, ...]
    name_index: dict[str, int]
    source_label: str = ""
    rejected: tuple[RejectedRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "_by_id", {r.id: r for r in self.records}
        )

    def record(self, record_id: int) -> MaterialRecord:
        try:
            return self._by_id[record_id]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"no record with id {record_id}") from None

    def has(self, record_id: int) -> bool:
        return record_id in self._by_id  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.records)


def normalize_name(name: str) -> str:
    """Index key for exact lookup: casefold, trim, collapse whitespace.

    The trailing unit parenthetical is kept; exact lookups must match
    the catalog nomenclature verbatim.
    """
    return re.sub(r"\s+", " ", name.strip()).casefold()


_UNIT_PARENTHETICAL = re.compile(r"\(\s*per\b[^)]*\)", re.IGNORECASE)


def strip_unit_parentheticals(text: str) -> str:
    """Drop "(per ...)" unit tags; used on the fuzzy matching path only."""
    return _UNIT_PARENTHETICAL.sub(" ", text)


# ---------------------------------------------------------------------------
# loading


_REQUIRED_NUMBERS = ("carbon_a1a3", "carbon_a5", "carbon_c1c4", "total_biogenic_co2e")

_MODELED_FIELDS = frozenset(
    [
        "id",
        "material_name",
        "product_type",
        "product_type_family",
        "material_type",
        "material_type_family",
        "group_elements_nrm_1",
        "elements_nrm_1",
        "uniclass_systems",
        "uniclass_products",
        "functional_unit_quantity",
        "functional_unit_unit",
        "freshwater_use_a1a3",
        "reuse_potential",
        "odp",
        "density",
        "data_source",
        "created",
        "updated",
        *_REQUIRED_NUMBERS,
    ]
)


def _as_float(value: Any) -> float:
    # upstream stores some numerics as quoted strings ("1", "3.63e-10")
    if isinstance(value, bool):
        raise ValueError("boolean is not a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.strip())
    raise ValueError(f"not a number: {value!r}")


def _str_list(value: Any) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    return tuple(str(v) for v in value)


def parse_record(raw: dict[str, Any]) -> tuple[MaterialRecord | None, list[str]]:
    """Validate one raw entry; returns (record, reasons). record is None
    when any reason was collected."""
    reasons: list[str] = []

    record_id: int | None = None
    try:
        record_id = int(raw["id"])
    except (KeyError, TypeError, ValueError):
        reasons.append("id: missing or not an integer")

    name = str(raw.get("material_name", "")).strip()
    if not name:
        reasons.append("material_name: missing or blank")

    try:
        quantity = _as_float(raw.get("functional_unit_quantity", 1))
        if not (quantity > 0):
            reasons.append("functional_unit_quantity: must be > 0")
    except ValueError:
        quantity = 1.0
        reasons.append("functional_unit_quantity: not a number")

    unit_raw = str(raw.get("functional_unit_unit", "")).strip().lower()
    try:
        unit = FunctionalUnit(unit_raw)
    except ValueError:
        unit = FunctionalUnit.KG
        reasons.append(
            f"functional_unit_unit: {unit_raw!r} is not one of kg/m2/m3/piece"
        )

    numbers: dict[str, float] = {}
    for key in _REQUIRED_NUMBERS:
        try:
            v = _as_float(raw[key])
        except (KeyError, TypeError, ValueError):
            reasons.append(f"{key}: missing or not a number")
            continue
        if not math.isfinite(v):
            reasons.append(f"{key}: not finite")
        elif key != "total_biogenic_co2e" and v < 0:
            reasons.append(f"{key}: must be >= 0")
        else:
            numbers[key] = v

    optionals: dict[str, float | None] = {}
    for key in ("freshwater_use_a1a3", "reuse_potential", "odp", "density"):
        if raw.get(key) is None:
            optionals[key] = None
            continue
        try:
            optionals[key] = _as_float(raw[key])
        except ValueError:
            optionals[key] = None
            reasons.append(f"{key}: not a number")
    density = optionals["density"]
    if density is not None and not (density > 0):
        reasons.append("density: must be > 0 when present")

    if reasons:
        return None, reasons

    extra = tuple(
        (k, v) for k, v in sorted(raw.items()) if k not in _MODELED_FIELDS
    )
    assert record_id is not None
    return (
        MaterialRecord(
            id=record_id,
            material_name=name,
            product_type=str(raw.get("product_type", "")),
            product_type_family=_str_list(raw.get("product_type_family")),
            material_type=str(raw.get("material_type", "")),
            material_type_family=str(raw.get("material_type_family", "")),
            group_elements_nrm_1=_str_list(raw.get("group_elements_nrm_1")),
            elements_nrm_1=_str_list(raw.get("elements_nrm_1")),
            uniclass_systems=_str_list(raw.get("uniclass_systems")),
            uniclass_products=_str_list(raw.get("uniclass_products")),
            functional_unit_quantity=quantity,
            functional_unit_unit=unit,
            carbon_a1a3=numbers["carbon_a1a3"],
            carbon_a5=numbers["carbon_a5"],
            carbon_c1c4=numbers["carbon_c1c4"],
            total_biogenic_co2e=numbers["total_biogenic_co2e"],
            freshwater_use_a1a3=optionals["freshwater_use_a1a3"],
            reuse_potential=optionals["reuse_potential"],
            odp=optionals["odp"],
            density=density,
            data_source=str(raw.get("data_source", "")),
            created=str(raw.get("created", "")),
            updated=str(raw.get("updated", "")),
            extra=extra,
        ),
        [],
    )


def collect_violations(source: bytes | BinaryIO) -> list[str]:
    """Every invariant violation in the file, one message per line.

    Unlike :func:`load_dataset` this never raises on content problems;
    it is the engine behind ``dataset validate``.
    """
    data = source if isinstance(source, bytes) else source.read()
    try:
        raw = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        return [f"parse: not valid UTF-8 at byte {e.start}"]
    except json.JSONDecodeError as e:
        return [f"parse: {e.msg} at offset {e.pos}"]
    if not isinstance(raw, list):
        return ["parse: top-level value is not an array"]
    if not raw:
        return ["empty dataset"]

    violations: list[str] = []
    seen_ids: dict[int, int] = {}
    seen_names: dict[str, int] = {}
    for index, entry in enumerate(raw):
        if not isinstance(entry, dict):
            violations.append(f"record[{index}]: not an object")
            continue
        record, reasons = parse_record(entry)
        for reason in reasons:
            violations.append(f"record[{index}] id={entry.get('id')!r}: {reason}")
        if record is None:
            continue
        if record.id in seen_ids:
            violations.append(
                f"record[{index}]: duplicate id {record.id} "
                f"(first seen at record[{seen_ids[record.id]}])"
            )
        else:
            seen_ids[record.id] = index
        key = normalize_name(record.material_name)
        if key in seen_names:
            violations.append(
                f"record[{index}]: duplicate material_name {record.material_name!r} "
                f"(first seen at record[{seen_names[key]}])"
            )
        else:
            seen_names[key] = index
    return violations


def load_dataset(
    source: bytes | BinaryIO,
    source_label: str = "",
    fmt: str = "json_array",
) -> MaterialDataset:
    """Parse and validate a JSON-array materials file.

    Records failing field-level invariants are dropped and reported on
    ``dataset.rejected``; duplicate ids, duplicate names, an empty array,
    or a malformed container are hard errors.
    """
    if fmt != "json_array":
        raise ValidationError(f"unsupported dataset format: {fmt!r}")
    data = source if isinstance(source, bytes) else source.read()
    try:
        raw = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8 at byte {e.start}", offset=e.start)
    except json.JSONDecodeError as e:
        raise ParseError(f"{e.msg} at offset {e.pos}", offset=e.pos)
    if not isinstance(raw, list):
        raise ParseError("top-level value is not an array")
    if not raw:
        raise EmptyDataset("empty dataset")

    records: list[MaterialRecord] = []
    rejected: list[RejectedRecord] = []
    seen_ids: dict[int, int] = {}
    name_index: dict[str, int] = {}
    for index, entry in enumerate(raw):
        if not isinstance(entry, dict):
            rejected.append(RejectedRecord(index, None, ("not an object",)))
            continue
        record, reasons = parse_record(entry)
        if record is None:
            rejected.append(RejectedRecord(index, entry.get("id"), tuple(reasons)))
            continue
        if record.id in seen_ids:
            raise ValidationError(
                f"duplicate id {record.id}: record[{seen_ids[record.id]}] "
                f"and record[{index}] ({record.material_name!r})"
            )
        key = normalize_name(record.material_name)
        if key in name_index:
            raise ValidationError(
                f"duplicate material_name {record.material_name!r} at record[{index}]"
            )
        seen_ids[record.id] = index
        name_index[key] = record.id
        records.append(record)

    if not records:
        raise EmptyDataset("empty dataset (all records rejected)")
    return MaterialDataset(
        records=tuple(records),
        name_index=name_index,
        source_label=source_label,
        rejected=tuple(rejected),
    )


def record_to_raw(record: MaterialRecord) -> dict[str, Any]:
    """Back to the upstream wire shape (odp as its string form)."""
    raw: dict[str, Any] = {
        "id": record.id,
        "material_name": record.material_name,
        "product_type": record.product_type,
        "product_type_family": list(record.product_type_family),
        "material_type": record.material_type,
        "material_type_family": record.material_type_family,
        "group_elements_nrm_1": list(record.group_elements_nrm_1),
        "elements_nrm_1": list(record.elements_nrm_1),
        "uniclass_systems": list(record.uniclass_systems),
        "uniclass_products": list(record.uniclass_products),
        "functional_unit_quantity": record.functional_unit_quantity,
        "functional_unit_unit": record.functional_unit_unit.value,
        "carbon_a1a3": record.carbon_a1a3,
        "carbon_a5": record.carbon_a5,
        "carbon_c1c4": record.carbon_c1c4,
        "total_biogenic_co2e": record.total_biogenic_co2e,
        "data_source": record.data_source,
        "created": record.created,
        "updated": record.updated,
    }
    if record.freshwater_use_a1a3 is not None:
        raw["freshwater_use_a1a3"] = record.freshwater_use_a1a3
    if record.reuse_potential is not None:
        raw["reuse_potential"] = record.reuse_potential
    if record.odp is not None:
        raw["odp"] = repr(record.odp)
    if record.density is not None:
        raw["density"] = record.density
    raw.update(dict(record.extra))
    return raw


def serialize_dataset(dataset: MaterialDataset) -> bytes:
    """UTF-8 JSON array; loading it back yields an equal dataset."""
    payload = [record_to_raw(r) for r in dataset.records]
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1).encode(
        "utf-8"
    )


# ---------------------------------------------------------------------------
# carbon arithmetic


def _fu_label(record: MaterialRecord) -> str:
    quantity = record.functional_unit_quantity
    if quantity == 1:
        return f"kg CO₂e / {record.unit_display}"
    return f"kg CO₂e / {quantity:g} {record.unit_display}"


def embodied_carbon(record: MaterialRecord, stages: Stage) -> CarbonQuantity:
    """Sum the selected stage fields, per declared functional unit.

    BIOGENIC contributes the signed sequestration figure; an empty
    selection sums to zero.
    """
    value = 0.0
    if stages & Stage.A1A3:
        value += record.carbon_a1a3
    if stages & Stage.A5:
        value += record.carbon_a5
    if stages & Stage.C1C4:
        value += record.carbon_c1c4
    if stages & Stage.BIOGENIC:
        value += record.total_biogenic_co2e
    return CarbonQuantity(
        value=value,
        basis=CarbonBasis.PER_FUNCTIONAL_UNIT,
        unit_label=_fu_label(record),
    )


def normalize_per_kg(record: MaterialRecord, q: CarbonQuantity) -> CarbonQuantity:
    """Convert a per-functional-unit quantity to a per-kg basis.

    Supported: kg units (divide by the declared quantity) and m3 units
    with a known density (divide by quantity * density). Area and piece
    units carry no mass model and are refused; callers should show the
    raw value instead. The conversion assumes linear mass scaling, which
    real production processes only approximate.
    """
    if q.basis is not CarbonBasis.PER_FUNCTIONAL_UNIT:
        raise ValidationError("quantity is already per-kg")
    quantity = record.functional_unit_quantity
    unit = record.functional_unit_unit
    if unit is FunctionalUnit.KG:
        value = q.value / quantity
    elif unit is FunctionalUnit.M3:
        if record.density is None:
            raise NormalizationUnsupported(
                f"record {record.id}: volumetric unit but density is absent"
            )
        value = q.value / (quantity * record.density)
    else:
        raise NormalizationUnsupported(
            f"record {record.id}: no mass model for unit {unit.value!r}"
        )
    return CarbonQuantity(value=value, basis=CarbonBasis.PER_KG, unit_label="kg CO₂e / kg")


def rank_by_carbon(insights: Sequence[Any], basis: str = "per_kg_preferred") -> list[Any]:
    """Stable descending sort of insight entries by carbon intensity.

    ``basis="per_kg_preferred"`` sorts normalized entries (those with a
    ``per_kg_carbon``) first, by per-kg value; entries without one follow,
    by raw value. ``basis="raw"`` sorts everyone by the raw
    per-functional-unit value. Ties break on ascending matched record id,
    so dataset order can never influence the result.

    Accepts any objects with ``raw_carbon``, ``per_kg_carbon`` and
    ``match.record_id`` attributes (see the pipeline's MaterialInsight).
    """
    if basis not in ("per_kg_preferred", "raw"):
        raise ValidationError(f"unknown ranking basis: {basis!r}")
    if not insights:
        raise EmptyInput("no insights to rank")

    def key(insight: Any):
        record_id = insight.match.record_id
        if basis == "raw":
            return (0, -insight.raw_carbon.value, record_id)
        per_kg = insight.per_kg_carbon
        if per_kg is None:
            return (1, -insight.raw_carbon.value, record_id)
        return (0, -per_kg.value, record_id)

    return sorted(insights, key=key)
