"""Domain types shared across the conversion pipeline.

A ModelSnapshot is an immutable, versioned container of all building
entities plus the ledger of user decisions; any mutation produces a new
snapshot with version + 1.
"""
from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass, field, replace
from typing import Optional

from .geometry import PlanarPolygon, Tolerances, DEFAULT_TOLERANCES
from .mesh import TriangleMesh

Identifier = str


def new_identifier(prefix: str = "id") -> Identifier:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class ElementKind(str, enum.Enum):
    WALL = "wall"
    SLAB = "slab"
    WINDOW = "window"
    DOOR = "door"
    OTHER = "other"


class SpaceClass(str, enum.Enum):
    INTERNAL = "internal"
    AIR = "air"
    EARTH = "earth"
    UNCLASSIFIED = "unclassified"


class SBType(str, enum.Enum):
    TYPE_A = "a"   # full-face contact between a space and an element
    TYPE_B = "b"   # edge-strip contact (element end face against a space)


class EditOp(str, enum.Enum):
    RECESS_REMOVED = "recess_removed"
    ENLARGED = "enlarged"
    IGNORED = "ignored"


@dataclass(frozen=True)
class EditRecord:
    op: EditOp
    area_before: float
    area_after: float
    opening_ids: tuple[Identifier, ...] = ()
    reason: str = ""

    def __post_init__(self):
        if self.op is EditOp.RECESS_REMOVED and not self.area_after < self.area_before:
            raise ValueError("recess removal must shrink the boundary")
        if self.op is EditOp.ENLARGED and self.area_after < self.area_before - 1e-12:
            raise ValueError("enlargement must not shrink the boundary")
        if self.op is EditOp.IGNORED and abs(self.area_after - self.area_before) > 1e-12:
            raise ValueError("ignoring a boundary must not change its area")


@dataclass(frozen=True)
class Element:
    id: Identifier
    kind: ElementKind
    solid: TriangleMesh
    layers: tuple[tuple[str, float], ...]  # (material, thickness m) along reference_normal
    reference_normal: tuple[float, float, float]
    storey: str = ""

    def thickness(self) -> float:
        if self.layers:
            return sum(t for _, t in self.layers)
        lo, hi = self.solid.bbox()
        import numpy as np
        n = np.abs(np.asarray(self.reference_normal))
        return float((hi - lo) @ n)


@dataclass(frozen=True)
class Space:
    id: Identifier
    volume: TriangleMesh
    classification: SpaceClass = SpaceClass.UNCLASSIFIED
    storey: str = ""


@dataclass(frozen=True)
class SpaceBoundary:
    id: Identifier
    space: Identifier
    element: Identifier
    sb_type: SBType
    raw: PlanarPolygon
    enhanced: Optional[PlanarPolygon] = None
    edits: tuple[EditRecord, ...] = ()
    normal_into_element: tuple[float, float, float] = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Connection:
    id: Identifier
    boundaries: tuple[Identifier, Identifier]
    element: Identifier
    spaces: tuple[Identifier, Identifier]
    category: tuple[str, tuple[str, str]]  # (element kind, sorted space-class pair)
    composition_label: str
    area: float


@dataclass(frozen=True)
class Room:
    id: Identifier
    space: Identifier
    connections: tuple[Identifier, ...]
    coverage_ratio: float


@dataclass(frozen=True)
class RoomNetwork:
    rooms: tuple[Room, ...]
    connections: tuple[Connection, ...]
    adjacency: dict[Identifier, tuple[tuple[Identifier, Identifier], ...]]
    warnings: tuple[str, ...] = ()
    snapshot_version: int = 0

    def room_by_space(self, space_id: Identifier) -> Optional[Room]:
        for r in self.rooms:
            if r.space == space_id:
                return r
        return None


class ConflictKind(str, enum.Enum):
    DUPLICATE_BOUNDARY = "duplicate_boundary"
    OVERLAPPING_BOUNDARIES = "overlapping_boundaries"
    UNMATCHED_BOUNDARY = "unmatched_boundary"
    TOO_SMALL_BOUNDARY = "too_small_boundary"
    BOUNDARY_INSIDE_ELEMENT = "boundary_inside_element"
    MULTIPLE_EXTERNAL_ADJACENCY = "multiple_external_adjacency"
    ELEMENT_OVERLAP = "element_overlap"


CONFLICT_KIND_ORDER = {k: i for i, k in enumerate(ConflictKind)}

# conflict kinds that block a conversion until a user decides
BLOCKING_CONFLICT_KINDS = frozenset({
    ConflictKind.DUPLICATE_BOUNDARY,
    ConflictKind.OVERLAPPING_BOUNDARIES,
    ConflictKind.BOUNDARY_INSIDE_ELEMENT,
    ConflictKind.MULTIPLE_EXTERNAL_ADJACENCY,
    ConflictKind.ELEMENT_OVERLAP,
})


class ResolutionKind(str, enum.Enum):
    IGNORE_BOUNDARY = "ignore_boundary"
    IGNORE_SPACE = "ignore_space"
    IGNORE_ELEMENT = "ignore_element"
    KEEP_BOUNDARY_OF_PAIR = "keep_boundary_of_pair"


@dataclass(frozen=True)
class Resolution:
    kind: ResolutionKind
    target: Identifier = ""          # entity to ignore / boundary to keep
    drop: Identifier = ""            # only for keep_boundary_of_pair
    note: str = ""

    def key(self) -> tuple:
        return (self.kind.value, self.target, self.drop)


@dataclass(frozen=True)
class Conflict:
    id: Identifier
    kind: ConflictKind
    involved_elements: tuple[Identifier, ...]
    involved_spaces: tuple[Identifier, ...]
    involved_boundaries: tuple[Identifier, ...]
    description: str
    resolutions: tuple[Resolution, ...]
    resolved_with: Optional[Resolution] = None

    @property
    def status(self) -> str:
        return "resolved" if self.resolved_with is not None else "open"


@dataclass(frozen=True)
class ModelSnapshot:
    version: int = 0
    elements: dict[Identifier, Element] = field(default_factory=dict)
    spaces: dict[Identifier, Space] = field(default_factory=dict)
    boundaries: dict[Identifier, SpaceBoundary] = field(default_factory=dict)
    resolution_ledger: tuple[tuple[Identifier, Resolution], ...] = ()
    classification_overrides: dict[Identifier, SpaceClass] = field(default_factory=dict)

    def bump(self, **changes) -> "ModelSnapshot":
        return replace(self, version=self.version + 1, **changes)

    # --- derived views of the resolution ledger ---------------------------

    def ignored_boundaries(self) -> frozenset[Identifier]:
        out = set()
        for _, res in self.resolution_ledger:
            if res.kind is ResolutionKind.IGNORE_BOUNDARY:
                out.add(res.target)
            elif res.kind is ResolutionKind.KEEP_BOUNDARY_OF_PAIR:
                out.add(res.drop)
            elif res.kind is ResolutionKind.IGNORE_ELEMENT:
                out.update(b.id for b in self.boundaries.values()
                           if b.element == res.target)
            elif res.kind is ResolutionKind.IGNORE_SPACE:
                out.update(b.id for b in self.boundaries.values()
                           if b.space == res.target)
        return frozenset(out)

    def ignored_elements(self) -> frozenset[Identifier]:
        return frozenset(res.target for _, res in self.resolution_ledger
                         if res.kind is ResolutionKind.IGNORE_ELEMENT)

    def ignored_spaces(self) -> frozenset[Identifier]:
        return frozenset(res.target for _, res in self.resolution_ledger
                         if res.kind is ResolutionKind.IGNORE_SPACE)

    def active_boundaries(self) -> list[SpaceBoundary]:
        ignored_b = self.ignored_boundaries()
        ignored_e = self.ignored_elements()
        ignored_s = self.ignored_spaces()
        return [b for bid, b in sorted(self.boundaries.items())
                if bid not in ignored_b and b.element not in ignored_e
                and b.space not in ignored_s]

    def resolved_conflict_ids(self) -> frozenset[Identifier]:
        return frozenset(cid for cid, _ in self.resolution_ledger)


@dataclass(frozen=True)
class Violation:
    entity_id: Identifier
    rule: str
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_snapshot(snapshot: ModelSnapshot,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Referential-integrity and geometric sanity walk; never mutates."""
    v: list[Violation] = []

    seen_ids: set[str] = set()
    for coll in (snapshot.elements, snapshot.spaces, snapshot.boundaries):
        for eid, entity in coll.items():
            if not eid:
                v.append(Violation(eid, "empty identifier"))
            if eid != entity.id:
                v.append(Violation(eid, "key/id mismatch"))
            if entity.id in seen_ids:
                v.append(Violation(eid, "duplicate identifier"))
            seen_ids.add(entity.id)

    for eid, el in sorted(snapshot.elements.items()):
        if not el.solid.is_closed():
            v.append(Violation(eid, "non-manifold solid",
                               "an edge is not shared by exactly 2 triangles"))
        elif el.solid.volume() <= 0:
            v.append(Violation(eid, "non-positive solid volume"))
        for name, thickness in el.layers:
            if thickness <= 0:
                v.append(Violation(eid, "non-positive layer thickness", name))

    for sid, sp in sorted(snapshot.spaces.items()):
        if not sp.volume.is_closed():
            v.append(Violation(sid, "non-manifold volume"))
        elif sp.volume.volume() <= 0:
            v.append(Violation(sid, "non-positive space volume"))

    for bid, b in sorted(snapshot.boundaries.items()):
        if b.space not in snapshot.spaces:
            v.append(Violation(bid, "dangling space reference", b.space))
        if b.element not in snapshot.elements:
            v.append(Violation(bid, "dangling element reference", b.element))
        dev = b.raw.max_plane_deviation()
        if dev > tol.coplanar_tol:
            v.append(Violation(bid, "boundary not planar", f"deviation {dev:.2e} m"))
        if b.edits:
            if b.enhanced is not None:
                if abs(b.raw.area(tol) - b.edits[0].area_before) > 1e-9 * max(1.0, b.raw.area(tol)):
                    v.append(Violation(bid, "edit log inconsistent with raw area"))
                enhanced_area = b.enhanced.area(tol)
                if abs(enhanced_area - b.edits[-1].area_after) > 1e-9 * max(1.0, enhanced_area):
                    v.append(Violation(bid, "edit log inconsistent with enhanced area"))

    for sid in sorted(snapshot.classification_overrides):
        if sid not in snapshot.spaces:
            v.append(Violation(sid, "override for unknown space"))

    for cid, res in snapshot.resolution_ledger:
        if res.kind in (ResolutionKind.IGNORE_BOUNDARY,):
            if res.target not in snapshot.boundaries:
                v.append(Violation(cid, "resolution targets unknown boundary", res.target))
        elif res.kind is ResolutionKind.IGNORE_SPACE:
            if res.target not in snapshot.spaces:
                v.append(Violation(cid, "resolution targets unknown space", res.target))
        elif res.kind is ResolutionKind.IGNORE_ELEMENT:
            if res.target not in snapshot.elements:
                v.append(Violation(cid, "resolution targets unknown element", res.target))
        elif res.kind is ResolutionKind.KEEP_BOUNDARY_OF_PAIR:
            for bid in (res.target, res.drop):
                if bid not in snapshot.boundaries:
                    v.append(Violation(cid, "resolution targets unknown boundary", bid))

    return ValidationReport(tuple(v))
