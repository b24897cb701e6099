"""Data model for NSP-style mobile telemetry traces.

A trace document is UTF-8 JSON with four top-level collections
("ue_logs", "iot_logs", "event_logs", "scenario_settings"). Parsing is
lenient towards unknown keys so exports carrying extra fields still load;
validation reports every invariant violation together with the offending
record path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

EVENT_TYPES = frozenset(
    {"attach", "detach", "handoff", "tracking-area-update", "migration"}
)

MOBILITY_MODES = frozenset({"walking", "biking", "driving", "static"})


class TraceError(Exception):
    """Base class for trace document failures."""


class TraceParseError(TraceError):
    """Document is malformed; the message names the offending path."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class TraceValidationError(TraceError):
    """A value violates a model invariant."""


class ServiceFamily(Enum):
    """The five simulated mobile-service families."""

    VIDEO_STREAMING = "video-streaming"
    SOCIAL_NETWORK = "social-network"
    INSTANT_MESSAGING = "instant-messaging"
    UAV_DELIVERY = "uav-delivery"
    IOT_SENSOR = "iot-sensor"


@dataclass(frozen=True)
class GeoPosition:
    """WGS84 coordinate pair in degrees; validated on construction."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.latitude) and -90.0 <= self.latitude <= 90.0):
            raise TraceValidationError(
                f"latitude {self.latitude!r} out of range [-90, 90]"
            )
        if not (math.isfinite(self.longitude) and -180.0 <= self.longitude <= 180.0):
            raise TraceValidationError(
                f"longitude {self.longitude!r} out of range [-180, 180]"
            )


@dataclass(frozen=True)
class Enodeb:
    enb_id: int
    position: GeoPosition
    radius_m: float
    tracking_area_id: int


@dataclass(frozen=True)
class ResourceSample:
    """Edge-cloud resource usage: RAM/storage in MB, CPU as normalized share."""

    ram_mb: float = 0.0
    cpu_units: float = 0.0
    storage_mb: float = 0.0


@dataclass(frozen=True)
class UeLogRecord:
    time: float
    user_equipment_id: int
    service_name: str
    data_uplink_kb: float
    data_downlink_kb: float
    position: GeoPosition
    current_enodeb: Enodeb
    previous_enodeb: Enodeb
    tracking_area_id: int
    previous_tracking_area: int
    edge_cloud_id: int = 0
    resources: ResourceSample = field(default_factory=ResourceSample)


@dataclass(frozen=True)
class EventRecord:
    event_type: str
    time: float
    user_equipment_id: int


@dataclass(frozen=True)
class UserProfile:
    """A population of identical users: mobility mode plus per-family demand.

    ``session_rates`` holds Poisson arrival rates in sessions/hour,
    ``session_size_kb`` mean (uplink, downlink) payloads per session, and
    ``resource_draw`` mean edge-resource usage per session.
    """

    profile_name: str
    count: int
    mobility_mode: str
    session_rates: dict[ServiceFamily, float] = field(default_factory=dict)
    session_size_kb: dict[ServiceFamily, tuple[float, float]] = field(
        default_factory=dict
    )
    resource_draw: dict[ServiceFamily, ResourceSample] = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioSettings:
    area_center: GeoPosition = GeoPosition(0.0, 0.0)
    area_radius_m: float = 0.0
    enodebs: list[Enodeb] = field(default_factory=list)
    service_catalog: dict[str, ServiceFamily] = field(default_factory=dict)
    user_profiles: list[UserProfile] = field(default_factory=list)
    horizon_s: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class Trace:
    ue_logs: list[UeLogRecord] = field(default_factory=list)
    iot_logs: list[UeLogRecord] = field(default_factory=list)
    event_logs: list[EventRecord] = field(default_factory=list)
    scenario_settings: ScenarioSettings = field(default_factory=ScenarioSettings)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self, limit: int = 5) -> str:
        head = "; ".join(f"{v.path}: {v.message}" for v in self.violations[:limit])
        extra = len(self.violations) - limit
        return head + (f" (+{extra} more)" if extra > 0 else "")


# --------------------------------------------------------------------------
# parsing


def _as_obj(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise TraceParseError(path, f"expected object, got {type(value).__name__}")
    return value


def _as_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise TraceParseError(path, f"expected array, got {type(value).__name__}")
    return value


def _req(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise TraceParseError(f"{path}.{key}" if path else key, "missing key")
    return obj[key]


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceParseError(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool):
        raise TraceParseError(path, "expected integer, got bool")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise TraceParseError(path, f"expected integer, got {value!r}")


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise TraceParseError(path, f"expected string, got {type(value).__name__}")
    return value


def _position(obj: dict, path: str) -> GeoPosition:
    # Record-level positions are flat latitude/longitude keys, mirroring the
    # NSP log layout; a nested "position" object is also accepted.
    if "latitude" in obj and "longitude" in obj:
        lat = _num(obj["latitude"], f"{path}.latitude")
        lon = _num(obj["longitude"], f"{path}.longitude")
    elif "position" in obj:
        nested = _as_obj(obj["position"], f"{path}.position")
        lat = _num(_req(nested, "latitude", f"{path}.position"), f"{path}.position.latitude")
        lon = _num(_req(nested, "longitude", f"{path}.position"), f"{path}.position.longitude")
    else:
        raise TraceParseError(path, "missing position (latitude/longitude)")
    try:
        return GeoPosition(lat, lon)
    except TraceValidationError as exc:
        raise TraceValidationError(f"{path}: {exc}") from None


def _parse_enodeb(value: Any, path: str) -> Enodeb:
    obj = _as_obj(value, path)
    position = _position(obj, path)
    radius = obj.get("radius", obj.get("radius_m"))
    if radius is None:
        raise TraceParseError(f"{path}.radius", "missing key")
    return Enodeb(
        enb_id=_int(obj.get("enb_id", 0), f"{path}.enb_id"),
        position=position,
        radius_m=_num(radius, f"{path}.radius"),
        tracking_area_id=_int(obj.get("tracking_area_id", 0), f"{path}.tracking_area_id"),
    )


def _parse_resources(value: Any, path: str) -> ResourceSample:
    obj = _as_obj(value, path)
    return ResourceSample(
        ram_mb=_num(obj.get("ram_mb", 0.0), f"{path}.ram_mb"),
        cpu_units=_num(obj.get("cpu_units", 0.0), f"{path}.cpu_units"),
        storage_mb=_num(obj.get("storage_mb", 0.0), f"{path}.storage_mb"),
    )


def _parse_ue_record(value: Any, path: str) -> UeLogRecord:
    obj = _as_obj(value, path)
    current = _parse_enodeb(_req(obj, "current_enodeb", path), f"{path}.current_enodeb")
    previous = (
        _parse_enodeb(obj["previous_enodeb"], f"{path}.previous_enodeb")
        if "previous_enodeb" in obj
        else current
    )
    tracking_area = _int(_req(obj, "tracking_area_id", path), f"{path}.tracking_area_id")
    # Legacy documents carry a single scalar usage field ("datasource");
    # it is read as downlink with uplink zero.
    if "data_uplink_kb" in obj or "data_downlink_kb" in obj:
        uplink = _num(obj.get("data_uplink_kb", 0.0), f"{path}.data_uplink_kb")
        downlink = _num(obj.get("data_downlink_kb", 0.0), f"{path}.data_downlink_kb")
    elif "datasource" in obj:
        uplink = 0.0
        downlink = _num(obj["datasource"], f"{path}.datasource")
    else:
        uplink = downlink = 0.0
    return UeLogRecord(
        time=_num(_req(obj, "time", path), f"{path}.time"),
        user_equipment_id=_int(
            _req(obj, "user_equipment_id", path), f"{path}.user_equipment_id"
        ),
        service_name=_str(_req(obj, "service_name", path), f"{path}.service_name"),
        data_uplink_kb=uplink,
        data_downlink_kb=downlink,
        position=_position(obj, path),
        current_enodeb=current,
        previous_enodeb=previous,
        tracking_area_id=tracking_area,
        previous_tracking_area=_int(
            obj.get("previous_tracking_area", tracking_area),
            f"{path}.previous_tracking_area",
        ),
        edge_cloud_id=_int(obj.get("edge_cloud_id", 0), f"{path}.edge_cloud_id"),
        resources=_parse_resources(obj.get("resources", {}), f"{path}.resources"),
    )


def _parse_event(value: Any, path: str) -> EventRecord:
    obj = _as_obj(value, path)
    return EventRecord(
        event_type=_str(_req(obj, "event_type", path), f"{path}.event_type"),
        time=_num(_req(obj, "time", path), f"{path}.time"),
        user_equipment_id=_int(
            _req(obj, "user_equipment_id", path), f"{path}.user_equipment_id"
        ),
    )


def _parse_family(value: Any, path: str) -> ServiceFamily:
    name = _str(value, path)
    try:
        return ServiceFamily(name)
    except ValueError:
        raise TraceParseError(path, f"unknown service family {name!r}") from None


def _parse_profile(value: Any, path: str) -> UserProfile:
    obj = _as_obj(value, path)
    mode = _str(obj.get("mobility_mode", "static"), f"{path}.mobility_mode")
    if mode not in MOBILITY_MODES:
        raise TraceParseError(f"{path}.mobility_mode", f"unknown mode {mode!r}")
    rates = {}
    for name, rate in _as_obj(obj.get("session_rates", {}), f"{path}.session_rates").items():
        fam = _parse_family(name, f"{path}.session_rates.{name}")
        rates[fam] = _num(rate, f"{path}.session_rates.{name}")
    sizes = {}
    for name, pair in _as_obj(
        obj.get("session_size_kb", {}), f"{path}.session_size_kb"
    ).items():
        fam = _parse_family(name, f"{path}.session_size_kb.{name}")
        arr = _as_list(pair, f"{path}.session_size_kb.{name}")
        if len(arr) != 2:
            raise TraceParseError(
                f"{path}.session_size_kb.{name}", "expected [uplink, downlink] pair"
            )
        sizes[fam] = (
            _num(arr[0], f"{path}.session_size_kb.{name}[0]"),
            _num(arr[1], f"{path}.session_size_kb.{name}[1]"),
        )
    draws = {}
    for name, res in _as_obj(
        obj.get("resource_draw", {}), f"{path}.resource_draw"
    ).items():
        fam = _parse_family(name, f"{path}.resource_draw.{name}")
        draws[fam] = _parse_resources(res, f"{path}.resource_draw.{name}")
    return UserProfile(
        profile_name=_str(_req(obj, "profile_name", path), f"{path}.profile_name"),
        count=_int(obj.get("count", 0), f"{path}.count"),
        mobility_mode=mode,
        session_rates=rates,
        session_size_kb=sizes,
        resource_draw=draws,
    )


def parse_settings(value: Any, path: str = "scenario_settings") -> ScenarioSettings:
    obj = _as_obj(value, path)
    if "area_center" in obj:
        center_obj = _as_obj(obj["area_center"], f"{path}.area_center")
        center = _position(center_obj, f"{path}.area_center")
    else:
        center = GeoPosition(0.0, 0.0)
    catalog = {}
    for name, fam in _as_obj(
        obj.get("service_catalog", {}), f"{path}.service_catalog"
    ).items():
        catalog[name] = _parse_family(fam, f"{path}.service_catalog.{name}")
    return ScenarioSettings(
        area_center=center,
        area_radius_m=_num(obj.get("area_radius_m", 0.0), f"{path}.area_radius_m"),
        enodebs=[
            _parse_enodeb(e, f"{path}.enodebs[{i}]")
            for i, e in enumerate(_as_list(obj.get("enodebs", []), f"{path}.enodebs"))
        ],
        service_catalog=catalog,
        user_profiles=[
            _parse_profile(p, f"{path}.user_profiles[{i}]")
            for i, p in enumerate(
                _as_list(obj.get("user_profiles", []), f"{path}.user_profiles")
            )
        ],
        horizon_s=_num(obj.get("horizon_s", 0.0), f"{path}.horizon_s"),
        seed=_int(obj.get("seed", 0), f"{path}.seed"),
    )


def parse_scenario(document: bytes | str) -> ScenarioSettings:
    """Parse a standalone scenario configuration file."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TraceParseError("document", f"invalid JSON: {exc}") from None
    return parse_settings(raw, path="")


def parse_trace(document: bytes | str) -> Trace:
    """Parse a serialized trace document.

    Unknown keys are ignored; log lists are re-sorted by time. Structural
    problems raise :class:`TraceParseError` naming the offending path;
    out-of-range coordinates raise :class:`TraceValidationError`.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TraceParseError("document", f"invalid JSON: {exc}") from None
    obj = _as_obj(raw, "document")
    for key in ("ue_logs", "iot_logs", "event_logs", "scenario_settings"):
        if key not in obj:
            raise TraceParseError(key, "missing key")
    ue_logs = [
        _parse_ue_record(r, f"ue_logs[{i}]")
        for i, r in enumerate(_as_list(obj["ue_logs"], "ue_logs"))
    ]
    iot_logs = [
        _parse_ue_record(r, f"iot_logs[{i}]")
        for i, r in enumerate(_as_list(obj["iot_logs"], "iot_logs"))
    ]
    event_logs = [
        _parse_event(r, f"event_logs[{i}]")
        for i, r in enumerate(_as_list(obj["event_logs"], "event_logs"))
    ]
    return Trace(
        ue_logs=sorted(ue_logs, key=lambda r: r.time),
        iot_logs=sorted(iot_logs, key=lambda r: r.time),
        event_logs=sorted(event_logs, key=lambda r: r.time),
        scenario_settings=parse_settings(obj["scenario_settings"]),
    )


# --------------------------------------------------------------------------
# serialization


def _enodeb_doc(enb: Enodeb) -> dict:
    return {
        "enb_id": enb.enb_id,
        "latitude": enb.position.latitude,
        "longitude": enb.position.longitude,
        "radius": enb.radius_m,
        "tracking_area_id": enb.tracking_area_id,
    }


def _resources_doc(res: ResourceSample) -> dict:
    return {
        "ram_mb": res.ram_mb,
        "cpu_units": res.cpu_units,
        "storage_mb": res.storage_mb,
    }


def _record_doc(rec: UeLogRecord) -> dict:
    return {
        "time": rec.time,
        "user_equipment_id": rec.user_equipment_id,
        "service_name": rec.service_name,
        "data_uplink_kb": rec.data_uplink_kb,
        "data_downlink_kb": rec.data_downlink_kb,
        "latitude": rec.position.latitude,
        "longitude": rec.position.longitude,
        "current_enodeb": _enodeb_doc(rec.current_enodeb),
        "previous_enodeb": _enodeb_doc(rec.previous_enodeb),
        "tracking_area_id": rec.tracking_area_id,
        "previous_tracking_area": rec.previous_tracking_area,
        "edge_cloud_id": rec.edge_cloud_id,
        "resources": _resources_doc(rec.resources),
    }


def settings_to_document(settings: ScenarioSettings) -> dict:
    return {
        "area_center": {
            "latitude": settings.area_center.latitude,
            "longitude": settings.area_center.longitude,
        },
        "area_radius_m": settings.area_radius_m,
        "enodebs": [_enodeb_doc(e) for e in settings.enodebs],
        "service_catalog": {
            name: fam.value for name, fam in settings.service_catalog.items()
        },
        "user_profiles": [
            {
                "profile_name": p.profile_name,
                "count": p.count,
                "mobility_mode": p.mobility_mode,
                "session_rates": {f.value: r for f, r in p.session_rates.items()},
                "session_size_kb": {
                    f.value: [up, dn] for f, (up, dn) in p.session_size_kb.items()
                },
                "resource_draw": {
                    f.value: _resources_doc(r) for f, r in p.resource_draw.items()
                },
            }
            for p in settings.user_profiles
        ],
        "horizon_s": settings.horizon_s,
        "seed": settings.seed,
    }


def trace_to_document(trace: Trace) -> dict:
    return {
        "ue_logs": [_record_doc(r) for r in trace.ue_logs],
        "iot_logs": [_record_doc(r) for r in trace.iot_logs],
        "event_logs": [
            {
                "event_type": e.event_type,
                "time": e.time,
                "user_equipment_id": e.user_equipment_id,
            }
            for e in trace.event_logs
        ],
        "scenario_settings": settings_to_document(trace.scenario_settings),
    }


def _dump(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n").encode()


def write_scenario(settings: ScenarioSettings) -> bytes:
    return _dump(settings_to_document(settings))


def write_trace(trace: Trace) -> bytes:
    """Serialize a trace; refuses traces violating any model invariant.

    Round-trip stable: ``parse_trace(write_trace(t)) == t``.
    """
    report = validate_trace(trace)
    if not report.ok:
        raise TraceValidationError(f"refusing to serialize: {report.summary()}")
    return _dump(trace_to_document(trace))


# --------------------------------------------------------------------------
# validation


def _check_nonneg(value: float, path: str, out: list[Violation]) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        out.append(Violation(path, f"must be finite and >= 0, got {value!r}"))


def _check_enodeb(enb: Enodeb, path: str, out: list[Violation]) -> None:
    if not (math.isfinite(enb.radius_m) and enb.radius_m > 0):
        out.append(Violation(f"{path}.radius", f"must be > 0, got {enb.radius_m!r}"))
    if enb.enb_id < 0:
        out.append(Violation(f"{path}.enb_id", f"must be >= 0, got {enb.enb_id}"))


def _check_record(
    rec: UeLogRecord,
    path: str,
    catalog: Mapping[str, ServiceFamily],
    out: list[Violation],
    iot_only: bool,
) -> None:
    _check_nonneg(rec.time, f"{path}.time", out)
    _check_nonneg(rec.data_uplink_kb, f"{path}.data_uplink_kb", out)
    _check_nonneg(rec.data_downlink_kb, f"{path}.data_downlink_kb", out)
    _check_nonneg(rec.resources.ram_mb, f"{path}.resources.ram_mb", out)
    _check_nonneg(rec.resources.cpu_units, f"{path}.resources.cpu_units", out)
    _check_nonneg(rec.resources.storage_mb, f"{path}.resources.storage_mb", out)
    if rec.user_equipment_id < 0:
        out.append(Violation(f"{path}.user_equipment_id", "must be >= 0"))
    if rec.edge_cloud_id < 0:
        out.append(Violation(f"{path}.edge_cloud_id", "must be >= 0"))
    _check_enodeb(rec.current_enodeb, f"{path}.current_enodeb", out)
    _check_enodeb(rec.previous_enodeb, f"{path}.previous_enodeb", out)
    family = catalog.get(rec.service_name)
    if family is None:
        out.append(
            Violation(
                f"{path}.service_name",
                f"{rec.service_name!r} not in scenario service_catalog",
            )
        )
    elif iot_only and family is not ServiceFamily.IOT_SENSOR:
        out.append(
            Violation(
                f"{path}.service_name",
                f"family {family.value!r} not allowed in iot_logs",
            )
        )


def _check_sorted(times: list[float], path: str, out: list[Violation]) -> None:
    for i in range(1, len(times)):
        if times[i] < times[i - 1]:
            out.append(Violation(f"{path}[{i}].time", "log not sorted by time"))
            return


def validate_trace(trace: Trace) -> ValidationReport:
    """Check every model invariant; the report is empty iff the trace is valid."""
    out: list[Violation] = []
    catalog = trace.scenario_settings.service_catalog
    for i, rec in enumerate(trace.ue_logs):
        _check_record(rec, f"ue_logs[{i}]", catalog, out, iot_only=False)
    for i, rec in enumerate(trace.iot_logs):
        _check_record(rec, f"iot_logs[{i}]", catalog, out, iot_only=True)
    for i, ev in enumerate(trace.event_logs):
        if ev.event_type not in EVENT_TYPES:
            out.append(
                Violation(
                    f"event_logs[{i}].event_type",
                    f"{ev.event_type!r} not one of {sorted(EVENT_TYPES)}",
                )
            )
        _check_nonneg(ev.time, f"event_logs[{i}].time", out)
        if ev.user_equipment_id < 0:
            out.append(Violation(f"event_logs[{i}].user_equipment_id", "must be >= 0"))
    _check_sorted([r.time for r in trace.ue_logs], "ue_logs", out)
    _check_sorted([r.time for r in trace.iot_logs], "iot_logs", out)
    _check_sorted([e.time for e in trace.event_logs], "event_logs", out)

    s = trace.scenario_settings
    if not (math.isfinite(s.horizon_s) and s.horizon_s >= 0):
        out.append(Violation("scenario_settings.horizon_s", "must be finite and >= 0"))
    if s.horizon_s > 0 and not s.enodebs:
        out.append(
            Violation("scenario_settings.enodebs", "must be non-empty when horizon_s > 0")
        )
    if not (math.isfinite(s.area_radius_m) and s.area_radius_m >= 0):
        out.append(Violation("scenario_settings.area_radius_m", "must be >= 0"))
    if s.seed < 0:
        out.append(Violation("scenario_settings.seed", "must be >= 0"))
    seen_ids: set[int] = set()
    for i, enb in enumerate(s.enodebs):
        _check_enodeb(enb, f"scenario_settings.enodebs[{i}]", out)
        if enb.enb_id in seen_ids:
            out.append(
                Violation(
                    f"scenario_settings.enodebs[{i}].enb_id",
                    f"duplicate id {enb.enb_id}",
                )
            )
        seen_ids.add(enb.enb_id)
    for i, prof in enumerate(s.user_profiles):
        ppath = f"scenario_settings.user_profiles[{i}]"
        if prof.count < 0:
            out.append(Violation(f"{ppath}.count", "must be >= 0"))
        if prof.mobility_mode not in MOBILITY_MODES:
            out.append(
                Violation(f"{ppath}.mobility_mode", f"unknown mode {prof.mobility_mode!r}")
            )
        for fam, rate in prof.session_rates.items():
            _check_nonneg(rate, f"{ppath}.session_rates.{fam.value}", out)
        for fam, (up, dn) in prof.session_size_kb.items():
            _check_nonneg(up, f"{ppath}.session_size_kb.{fam.value}[0]", out)
            _check_nonneg(dn, f"{ppath}.session_size_kb.{fam.value}[1]", out)
        for fam, res in prof.resource_draw.items():
            _check_nonneg(res.ram_mb, f"{ppath}.resource_draw.{fam.value}.ram_mb", out)
            _check_nonneg(res.cpu_units, f"{ppath}.resource_draw.{fam.value}.cpu_units", out)
            _check_nonneg(res.storage_mb, f"{ppath}.resource_draw.{fam.value}.storage_mb", out)
        if prof.count > 0 and not any(r > 0 for r in prof.session_rates.values()):
            out.append(
                Violation(
                    f"{ppath}.session_rates",
                    "profile with count > 0 needs at least one positive rate",
                )
            )
    return ValidationReport(out)
