"""Name-independent feature registry: typed feature tags, presets, scene entities.

Feature types are registered once at startup under a category (Experiment,
Environment, Vision, Locomotion, or any new label). Presets are serialized
parameter bundles addressed purely by feature type, never by entity display
names, so renaming scene objects can never invalidate a preset. A feature
type may extend another registered type, in which case it is offered for
every entity carrying the extended type.
"""

from __future__ import annotations

import json
import keyword
import warnings
from dataclasses import dataclass, field

DEFAULT_CATEGORIES = ("Experiment", "Environment", "Vision", "Locomotion")

SEMANTIC_TYPES = ("boolean", "integer", "real", "string", "enum", "vec3", "quat", "preset_ref")


class RegistryError(Exception):
    """Base class for registry failures."""


class DuplicateTypeError(RegistryError):
    pass


class UnknownTypeError(RegistryError):
    pass


class FieldValidationError(RegistryError):
    pass


class SchemaVersionError(RegistryError):
    pass


class MissingAttachmentError(RegistryError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    """One schema field: name, semantic type, unit label, and default value."""

    name: str
    semantic: str
    default: object
    unit: str = ""
    choices: tuple[str, ...] = ()

    def __post_init__(self):
        if self.semantic not in SEMANTIC_TYPES:
            raise FieldValidationError(f"unknown semantic type {self.semantic!r}")
        if self.semantic == "enum" and not self.choices:
            raise FieldValidationError(f"enum field {self.name!r} needs choices")


@dataclass(frozen=True)
class TypeTag:
    """A registered feature type: stable identifier, category, ordered field schema."""

    identifier: str
    category: str
    field_schema: tuple[FieldSpec, ...]
    extended_tag: str | None = None
    schema_version: int = 1

    def __post_init__(self):
        names = [f.name for f in self.field_schema]
        if len(names) != len(set(names)):
            raise FieldValidationError(f"{self.identifier}: duplicate schema field names")

    def field(self, name: str) -> FieldSpec:
        for f in self.field_schema:
            if f.name == name:
                return f
        raise FieldValidationError(f"{self.identifier} has no field {name!r}")

    def defaults(self) -> dict:
        return {f.name: _copy_value(f.default) for f in self.field_schema}


@dataclass
class PresetDoc:
    """Serialized parameter bundle for one feature type. Carries no entity names."""

    preset_name: str
    target_type: str
    schema_version: int
    values: dict

    def to_json(self) -> str:
        doc = {
            "preset_name": self.preset_name,
            "target_type": self.target_type,
            "schema_version": self.schema_version,
            "values": self.values,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PresetDoc":
        doc = json.loads(text)
        return cls(
            preset_name=doc["preset_name"],
            target_type=doc["target_type"],
            schema_version=int(doc["schema_version"]),
            values=dict(doc["values"]),
        )

    def filename(self) -> str:
        return f"{self.target_type}.{self.preset_name}.preset.json"


@dataclass
class Attachment:
    """A feature instance on an entity: current values plus enabled flag."""

    type_id: str
    values: dict
    enabled: bool = True


@dataclass
class SceneEntity:
    """Scene-graph node addressed by an opaque stable id; the display name is free."""

    entity_id: str
    display_name: str
    attached: dict = field(default_factory=dict)  # type_id -> Attachment

    def attachment(self, type_id: str) -> Attachment:
        try:
            return self.attached[type_id]
        except KeyError:
            raise MissingAttachmentError(
                f"entity {self.entity_id} has no attachment of type {type_id!r}"
            ) from None

    def has(self, type_id: str) -> bool:
        return type_id in self.attached

    def enabled_types(self) -> list[str]:
        return [t for t, a in self.attached.items() if a.enabled]


@dataclass(frozen=True)
class RegistrationReceipt:
    identifier: str
    category: str
    index: int


def _copy_value(v):
    return list(v) if isinstance(v, list) else v


def _validate_value(spec: FieldSpec, value):
    """Check value against the field's semantic type; returns the stored form."""
    kind = spec.semantic
    if kind == "boolean":
        if not isinstance(value, bool):
            raise FieldValidationError(f"field {spec.name!r} expects boolean, got {value!r}")
        return value
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise FieldValidationError(f"field {spec.name!r} expects integer, got {value!r}")
        return value
    if kind == "real":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FieldValidationError(f"field {spec.name!r} expects real, got {value!r}")
        return float(value)
    if kind in ("string", "preset_ref"):
        if not isinstance(value, str):
            raise FieldValidationError(f"field {spec.name!r} expects {kind}, got {value!r}")
        return value
    if kind == "enum":
        if value not in spec.choices:
            raise FieldValidationError(
                f"field {spec.name!r} expects one of {spec.choices}, got {value!r}"
            )
        return value
    if kind == "vec3":
        return _validate_numbers(spec, value, 3)
    if kind == "quat":
        q = _validate_numbers(spec, value, 4)
        n = sum(c * c for c in q) ** 0.5
        if abs(n - 1.0) > 1e-6:
            raise FieldValidationError(f"field {spec.name!r} expects a unit quaternion")
        return q
    raise FieldValidationError(f"unhandled semantic type {kind}")


def _validate_numbers(spec: FieldSpec, value, n: int) -> list:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != n
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)
    ):
        raise FieldValidationError(f"field {spec.name!r} expects {n} numbers, got {value!r}")
    return [float(c) for c in value]


class Registry:
    """Feature-type registry with category auto-detection and preset validation."""

    def __init__(self):
        self._types: dict[str, TypeTag] = {}
        self._categories: list[str] = []

    # -- type registration -------------------------------------------------

    def register_type(self, tag: TypeTag) -> RegistrationReceipt:
        status = self.validate_feature_name(tag.identifier)
        if status == "duplicate":
            raise DuplicateTypeError(f"type {tag.identifier!r} already registered")
        if status == "invalid_identifier":
            raise FieldValidationError(f"{tag.identifier!r} is not a valid identifier")
        if tag.extended_tag is not None and tag.extended_tag not in self._types:
            raise UnknownTypeError(
                f"{tag.identifier} extends unregistered type {tag.extended_tag!r}"
            )
        self._types[tag.identifier] = tag
        if tag.category not in self._categories:
            self._categories.append(tag.category)
        return RegistrationReceipt(tag.identifier, tag.category, len(self._types) - 1)

    def validate_feature_name(self, name: str) -> str:
        if not isinstance(name, str) or not name.isidentifier() or keyword.iskeyword(name):
            return "invalid_identifier"
        if name in self._types:
            return "duplicate"
        return "ok"

    def get_type(self, identifier: str) -> TypeTag:
        try:
            return self._types[identifier]
        except KeyError:
            raise UnknownTypeError(f"unknown feature type {identifier!r}") from None

    def list_categories(self) -> list[str]:
        return list(self._categories)

    def list_types(self, category: str | None = None) -> list[TypeTag]:
        tags = list(self._types.values())
        if category is not None:
            tags = [t for t in tags if t.category == category]
        return tags

    # -- presets -----------------------------------------------------------

    def create_preset(self, type_id: str, name: str, values: dict | None = None) -> PresetDoc:
        tag = self.get_type(type_id)
        filled = tag.defaults()
        for key, value in (values or {}).items():
            spec = tag.field(key)  # raises on unknown field
            filled[key] = _validate_value(spec, value)
        return PresetDoc(
            preset_name=name,
            target_type=tag.identifier,
            schema_version=tag.schema_version,
            values=filled,
        )

    def apply_preset(self, entity: SceneEntity, preset: PresetDoc) -> SceneEntity:
        tag = self.get_type(preset.target_type)
        if preset.schema_version > tag.schema_version:
            raise SchemaVersionError(
                f"preset {preset.preset_name!r} has schema v{preset.schema_version}, "
                f"registry supports v{tag.schema_version}"
            )
        att = entity.attachment(tag.identifier)
        known = {f.name for f in tag.field_schema}
        for key, value in preset.values.items():
            if key not in known:
                # Older presets may carry fields dropped since; keep applying the rest.
                warnings.warn(
                    f"preset {preset.preset_name!r}: dropping unknown field {key!r} "
                    f"(schema v{preset.schema_version})",
                    stacklevel=2,
                )
                continue
            att.values[key] = _validate_value(tag.field(key), value)
        return entity

    def extract_preset(self, entity: SceneEntity, type_id: str,
                       name: str = "extracted") -> PresetDoc:
        tag = self.get_type(type_id)
        att = entity.attachment(tag.identifier)
        return PresetDoc(
            preset_name=name,
            target_type=tag.identifier,
            schema_version=tag.schema_version,
            values={k: _copy_value(v) for k, v in att.values.items()},
        )

    # -- entities ----------------------------------------------------------

    def attach(self, entity: SceneEntity, type_id: str, enabled: bool = True) -> Attachment:
        tag = self.get_type(type_id)
        if entity.has(type_id):
            raise DuplicateTypeError(
                f"entity {entity.entity_id} already has an attachment of {type_id!r}"
            )
        if tag.extended_tag is not None and not entity.has(tag.extended_tag):
            raise MissingAttachmentError(
                f"{type_id} extends {tag.extended_tag}, which entity "
                f"{entity.entity_id} does not carry"
            )
        att = Attachment(type_id=type_id, values=tag.defaults(), enabled=enabled)
        entity.attached[type_id] = att
        return att

    def available_extensions(self, entity: SceneEntity) -> list[TypeTag]:
        return [
            tag for tag in self._types.values()
            if tag.extended_tag is not None and entity.has(tag.extended_tag)
        ]

    def toggle_feature(self, entity: SceneEntity, type_id: str, on: bool) -> SceneEntity:
        tag = self.get_type(type_id)
        if entity.has(type_id):
            entity.attachment(type_id).enabled = on
        elif on:
            # Enabling a type the entity does not carry yet attaches it with defaults.
            self.attach(entity, tag.identifier, enabled=True)
        return entity


class Scene:
    """Ordered collection of entities with deterministic opaque ids."""

    def __init__(self, name: str = "scene"):
        self.name = name
        self.entities: dict[str, SceneEntity] = {}
        self._counter = 0

    def new_entity(self, display_name: str, entity_id: str | None = None) -> SceneEntity:
        if entity_id is None:
            self._counter += 1
            entity_id = f"e{self._counter:03d}"
        if entity_id in self.entities:
            raise DuplicateTypeError(f"entity id {entity_id!r} already in scene")
        ent = SceneEntity(entity_id=entity_id, display_name=display_name)
        self.entities[entity_id] = ent
        return ent

    def get(self, entity_id: str) -> SceneEntity:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise UnknownTypeError(f"no entity with id {entity_id!r}") from None

    def rename(self, entity_id: str, display_name: str) -> SceneEntity:
        ent = self.get(entity_id)
        ent.display_name = display_name
        return ent

    def find_enabled(self, type_id: str) -> list[SceneEntity]:
        return [e for e in self.entities.values()
                if e.has(type_id) and e.attached[type_id].enabled]
