"""Deterministic scenario generator producing NSP-style telemetry traces.

Reproducibility scheme: the scenario seed feeds one ``numpy`` SeedSequence;
users get one spawned child each (in user-id order), and every child is
split again into an itinerary stream and a session stream. Identical
settings therefore yield byte-identical serialized traces, and any user's
draws can be re-derived independently via :func:`user_streams`.

Draw order, itinerary stream: start position (disc radius u, bearing), then
one (u, bearing) pair per waypoint. Session stream, per family in
:class:`ServiceFamily` order: exponential inter-arrival gaps, and per
accepted arrival one service-name index plus exponential uplink, downlink,
ram, cpu and storage draws.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .trace import (
    Enodeb,
    EventRecord,
    GeoPosition,
    ResourceSample,
    ScenarioSettings,
    ServiceFamily,
    Trace,
    UeLogRecord,
    UserProfile,
    validate_trace,
)

EARTH_RADIUS_M = 6_371_000.0

MODE_SPEED_MPS = {"walking": 1.5, "biking": 4.5, "driving": 13.9, "static": 0.0}

ITINERARY_SAMPLE_PERIOD_S = 10.0

# Usage and resource draws are quantized to this granularity so that
# aggregate totals are exact in float64 regardless of summation order.
USAGE_QUANTUM = 1.0 / 1024.0


class ScenarioError(ValueError):
    """Scenario settings cannot be simulated."""


@dataclass(frozen=True)
class SessionEvent:
    ue_id: int
    start_time_s: float
    service_name: str
    uplink_kb: float
    downlink_kb: float
    resources: ResourceSample


def user_streams(seed: int, n_users: int) -> list[tuple[np.random.Generator, np.random.Generator]]:
    """Per-user (itinerary, sessions) RNG pairs for the documented scheme."""
    root = np.random.SeedSequence(seed)
    pairs = []
    for child in root.spawn(n_users):
        iti_seq, sess_seq = child.spawn(2)
        pairs.append(
            (
                np.random.Generator(np.random.PCG64(iti_seq)),
                np.random.Generator(np.random.PCG64(sess_seq)),
            )
        )
    return pairs


# --------------------------------------------------------------------------
# spherical geometry


def _unit(lat_deg: float, lon_deg: float) -> np.ndarray:
    lat = math.radians(lat_deg)
    lon = math.radians(lon_deg)
    return np.array(
        [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
    )


def _latlon(v: np.ndarray) -> GeoPosition:
    lat = math.degrees(math.atan2(v[2], math.hypot(v[0], v[1])))
    lon = math.degrees(math.atan2(v[1], v[0]))
    return GeoPosition(lat, lon)


def _arc_m(u: np.ndarray, v: np.ndarray) -> float:
    cross = np.cross(u, v)
    return EARTH_RADIUS_M * math.atan2(float(np.linalg.norm(cross)), float(np.dot(u, v)))


def great_circle_m(a: GeoPosition, b: GeoPosition) -> float:
    """Great-circle distance in meters."""
    return float(
        _haversine_m(
            np.array(a.latitude), np.array(a.longitude),
            np.array(b.latitude), np.array(b.longitude),
        )
    )


def _haversine_m(lat1, lon1, lat2, lon2):
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dp = np.radians(lat2 - lat1)
    dl = np.radians(lon2 - lon1)
    a = np.sin(dp / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(a)))


def _destination(origin: GeoPosition, bearing_rad: float, dist_m: float) -> GeoPosition:
    delta = dist_m / EARTH_RADIUS_M
    p1 = math.radians(origin.latitude)
    l1 = math.radians(origin.longitude)
    sin_p2 = math.sin(p1) * math.cos(delta) + math.cos(p1) * math.sin(delta) * math.cos(bearing_rad)
    sin_p2 = max(-1.0, min(1.0, sin_p2))
    p2 = math.asin(sin_p2)
    l2 = l1 + math.atan2(
        math.sin(bearing_rad) * math.sin(delta) * math.cos(p1),
        math.cos(delta) - math.sin(p1) * sin_p2,
    )
    lon = (math.degrees(l2) + 180.0) % 360.0 - 180.0
    return GeoPosition(math.degrees(p2), lon)


def _sample_point_in_disc(
    center: GeoPosition, radius_m: float, rng: np.random.Generator
) -> GeoPosition:
    u = rng.random()
    bearing = rng.random() * 2.0 * math.pi
    return _destination(center, bearing, radius_m * math.sqrt(u))


class _Path:
    """Piecewise-geodesic path through timed anchor points.

    Between anchors the position follows the great circle at constant speed,
    so consecutive samples never exceed the anchor-to-anchor speed.
    """

    def __init__(self, times: list[float], points: list[GeoPosition]) -> None:
        self.times = times
        self.points = points
        self.units = np.array([_unit(p.latitude, p.longitude) for p in points])

    def _interp(self, seg: int, frac: float) -> np.ndarray:
        u = self.units[seg]
        v = self.units[seg + 1]
        dot = max(-1.0, min(1.0, float(np.dot(u, v))))
        omega = math.atan2(float(np.linalg.norm(np.cross(u, v))), dot)
        if omega < 1e-15:
            return u
        s = math.sin(omega)
        w = (math.sin((1.0 - frac) * omega) * u + math.sin(frac * omega) * v) / s
        return w / np.linalg.norm(w)

    def at(self, t: float) -> GeoPosition:
        if len(self.points) == 1 or t <= self.times[0]:
            return self.points[0]
        if t >= self.times[-1]:
            return self.points[-1]
        seg = bisect_right(self.times, t) - 1
        frac = (t - self.times[seg]) / (self.times[seg + 1] - self.times[seg])
        return _latlon(self._interp(seg, frac))

    def at_many(self, ts: np.ndarray) -> list[GeoPosition]:
        return [self.at(float(t)) for t in ts]


def _build_path(
    start: GeoPosition,
    mode: str,
    horizon_s: float,
    rng: np.random.Generator,
    area_center: GeoPosition,
    area_radius_m: float,
) -> _Path:
    speed = MODE_SPEED_MPS[mode]
    times = [0.0]
    points = [start]
    if speed > 0.0 and horizon_s > 0.0:
        t = 0.0
        here = start
        while t < horizon_s:
            waypoint = _sample_point_in_disc(area_center, area_radius_m, rng)
            dist = _arc_m(
                _unit(here.latitude, here.longitude),
                _unit(waypoint.latitude, waypoint.longitude),
            )
            if dist == 0.0:
                continue
            t += dist / speed
            times.append(t)
            points.append(waypoint)
            here = waypoint
    return _Path(times, points)


def _sample_times(horizon_s: float) -> np.ndarray:
    if horizon_s <= 0.0:
        return np.array([0.0])
    ts = np.arange(0.0, horizon_s, ITINERARY_SAMPLE_PERIOD_S)
    if ts.size == 0 or ts[-1] < horizon_s:
        ts = np.append(ts, horizon_s)
    return ts


def sample_itinerary(
    profile: UserProfile,
    start: GeoPosition,
    horizon_s: float,
    rng: np.random.Generator,
    area_center: GeoPosition,
    area_radius_m: float,
) -> list[tuple[float, GeoPosition]]:
    """Timed position samples every 10 s along a waypoint path.

    The path travels great-circle legs between waypoints drawn uniformly in
    the scenario disc, at the profile's mobility-mode speed; static users
    never move. ``start`` must lie within the disc.
    """
    path = _build_path(start, profile.mobility_mode, horizon_s, rng, area_center, area_radius_m)
    ts = _sample_times(horizon_s)
    return [(float(t), p) for t, p in zip(ts, path.at_many(ts))]


# --------------------------------------------------------------------------
# sessions


def _quantize(x: float) -> float:
    return round(x / USAGE_QUANTUM) * USAGE_QUANTUM


def service_names_by_family(
    catalog: dict[str, ServiceFamily],
) -> dict[ServiceFamily, list[str]]:
    """Catalog names per family, sorted for draw-order stability."""
    out: dict[ServiceFamily, list[str]] = {fam: [] for fam in ServiceFamily}
    for name in sorted(catalog):
        out[catalog[name]].append(name)
    return out


def sample_sessions(
    profile: UserProfile,
    horizon_s: float,
    rng: np.random.Generator,
    *,
    ue_id: int = 0,
    names_by_family: dict[ServiceFamily, list[str]] | None = None,
) -> list[SessionEvent]:
    """Homogeneous-Poisson session arrivals over [0, horizon_s].

    Per family, arrivals follow exponential inter-arrival gaps at the
    profile rate; payload sizes and resource draws are exponential with the
    profile means, quantized to :data:`USAGE_QUANTUM`.
    """
    sessions: list[SessionEvent] = []
    for family in ServiceFamily:
        rate_per_h = profile.session_rates.get(family, 0.0)
        if rate_per_h <= 0.0 or horizon_s <= 0.0:
            continue
        names = (names_by_family or {}).get(family) or [family.value]
        mean_up, mean_dn = profile.session_size_kb.get(family, (0.0, 0.0))
        draw = profile.resource_draw.get(family, ResourceSample())
        scale_s = 3600.0 / rate_per_h
        t = 0.0
        while True:
            t += float(rng.exponential(scale_s))
            if t > horizon_s:
                break
            name = names[int(rng.integers(0, len(names)))]
            uplink = _quantize(float(rng.exponential(mean_up)))
            downlink = _quantize(float(rng.exponential(mean_dn)))
            resources = ResourceSample(
                ram_mb=_quantize(float(rng.exponential(draw.ram_mb))),
                cpu_units=_quantize(float(rng.exponential(draw.cpu_units))),
                storage_mb=_quantize(float(rng.exponential(draw.storage_mb))),
            )
            sessions.append(
                SessionEvent(ue_id, t, name, uplink, downlink, resources)
            )
    sessions.sort(key=lambda s: s.start_time_s)
    return sessions


# --------------------------------------------------------------------------
# eNodeB assignment


def assign_enodeb(position: GeoPosition, enodebs: list[Enodeb]) -> Enodeb:
    """Great-circle-nearest eNodeB; ties break towards the lowest enb_id."""
    if not enodebs:
        raise ScenarioError("no eNodeBs to assign")
    ordered = sorted(enodebs, key=lambda e: e.enb_id)
    idx = _nearest_indices(
        np.array([position.latitude]), np.array([position.longitude]), ordered
    )[0]
    return ordered[int(idx)]


def _nearest_indices(
    lats: np.ndarray, lons: np.ndarray, ordered_enbs: list[Enodeb]
) -> np.ndarray:
    enb_lats = np.array([e.position.latitude for e in ordered_enbs])
    enb_lons = np.array([e.position.longitude for e in ordered_enbs])
    d = _haversine_m(lats[:, None], lons[:, None], enb_lats[None, :], enb_lons[None, :])
    return np.argmin(d, axis=1)


# --------------------------------------------------------------------------
# trace generation


@dataclass
class _UserOutput:
    ue_records: list[UeLogRecord] = field(default_factory=list)
    iot_records: list[UeLogRecord] = field(default_factory=list)
    events: list[EventRecord] = field(default_factory=list)


def _simulate_user(
    ue_id: int,
    profile: UserProfile,
    settings: ScenarioSettings,
    ordered_enbs: list[Enodeb],
    names: dict[ServiceFamily, list[str]],
    iti_rng: np.random.Generator,
    sess_rng: np.random.Generator,
) -> _UserOutput:
    out = _UserOutput()
    center = settings.area_center
    start = _sample_point_in_disc(center, settings.area_radius_m, iti_rng)
    path = _build_path(
        start, profile.mobility_mode, settings.horizon_s, iti_rng, center, settings.area_radius_m
    )

    out.events.append(EventRecord("attach", 0.0, ue_id))

    ts = _sample_times(settings.horizon_s)
    positions = path.at_many(ts)
    near = _nearest_indices(
        np.array([p.latitude for p in positions]),
        np.array([p.longitude for p in positions]),
        ordered_enbs,
    )
    for i in range(1, len(ts)):
        if near[i] != near[i - 1]:
            out.events.append(EventRecord("handoff", float(ts[i]), ue_id))
            prev_ta = ordered_enbs[int(near[i - 1])].tracking_area_id
            cur_ta = ordered_enbs[int(near[i])].tracking_area_id
            if cur_ta != prev_ta:
                out.events.append(EventRecord("tracking-area-update", float(ts[i]), ue_id))

    sessions = sample_sessions(
        profile, settings.horizon_s, sess_rng, ue_id=ue_id, names_by_family=names
    )
    if sessions:
        sess_pos = [path.at(s.start_time_s) for s in sessions]
        sess_near = _nearest_indices(
            np.array([p.latitude for p in sess_pos]),
            np.array([p.longitude for p in sess_pos]),
            ordered_enbs,
        )
        prev_enb: Enodeb | None = None
        for session, pos, ni in zip(sessions, sess_pos, sess_near):
            current = ordered_enbs[int(ni)]
            previous = prev_enb if prev_enb is not None else current
            if prev_enb is not None and current.enb_id != prev_enb.enb_id:
                out.events.append(
                    EventRecord("migration", session.start_time_s, ue_id)
                )
            record = UeLogRecord(
                time=session.start_time_s,
                user_equipment_id=ue_id,
                service_name=session.service_name,
                data_uplink_kb=session.uplink_kb,
                data_downlink_kb=session.downlink_kb,
                position=pos,
                current_enodeb=current,
                previous_enodeb=previous,
                tracking_area_id=current.tracking_area_id,
                previous_tracking_area=previous.tracking_area_id,
                edge_cloud_id=current.enb_id,
                resources=session.resources,
            )
            family = settings.service_catalog[session.service_name]
            if family is ServiceFamily.IOT_SENSOR:
                out.iot_records.append(record)
            else:
                out.ue_records.append(record)
            prev_enb = current
    return out


def generate(settings: ScenarioSettings) -> Trace:
    """Generate a full trace for a scenario; pure function of the settings.

    Every session becomes exactly one log record. Per user, an attach event
    fires at simulation start, a handoff whenever the nearest eNodeB changes
    between consecutive 10 s position samples (plus a tracking-area update
    when the serving tracking area changes), and a migration whenever the
    serving edge cloud changes between consecutive session records. Edge
    clouds are co-located with eNodeBs one-to-one.
    """
    report = validate_trace(Trace(scenario_settings=settings))
    if not report.ok:
        raise ScenarioError(f"invalid scenario: {report.summary()}")
    if settings.horizon_s <= 0.0:
        return Trace(scenario_settings=settings)

    names = service_names_by_family(settings.service_catalog)
    for profile in settings.user_profiles:
        for family, rate in profile.session_rates.items():
            if profile.count > 0 and rate > 0 and not names[family]:
                raise ScenarioError(
                    f"service_catalog has no name for family {family.value!r}"
                )

    ordered_enbs = sorted(settings.enodebs, key=lambda e: e.enb_id)
    total_users = sum(p.count for p in settings.user_profiles)
    streams = user_streams(settings.seed, total_users)

    ue_logs: list[UeLogRecord] = []
    iot_logs: list[UeLogRecord] = []
    events: list[EventRecord] = []
    ue_id = 0
    for profile in settings.user_profiles:
        for _ in range(profile.count):
            iti_rng, sess_rng = streams[ue_id]
            out = _simulate_user(
                ue_id, profile, settings, ordered_enbs, names, iti_rng, sess_rng
            )
            ue_logs.extend(out.ue_records)
            iot_logs.extend(out.iot_records)
            events.extend(out.events)
            ue_id += 1

    return Trace(
        ue_logs=sorted(ue_logs, key=lambda r: r.time),
        iot_logs=sorted(iot_logs, key=lambda r: r.time),
        event_logs=sorted(events, key=lambda e: e.time),
        scenario_settings=settings,
    )


# --------------------------------------------------------------------------
# built-in scenario


def default_scenario(
    seed: int = 0,
    heavy_count: int = 12,
    light_count: int = 18,
    horizon_s: float = 3600.0,
) -> ScenarioSettings:
    """Two-population scenario: heavy broadband users vs light IoT sensors.

    Seven eNodeBs (one central, six on a ring) split across two tracking
    areas inside an 8 km disc.
    """
    center = GeoPosition(60.22, 24.76)
    enodebs = [Enodeb(0, center, 2600.0, 0)]
    for i in range(6):
        pos = _destination(center, math.radians(60.0 * i), 4500.0)
        enodebs.append(Enodeb(i + 1, pos, 2600.0, 0 if i < 3 else 1))
    catalog = {
        "720p Video Stream": ServiceFamily.VIDEO_STREAMING,
        "4K Video Stream": ServiceFamily.VIDEO_STREAMING,
        "Social Feed Refresh": ServiceFamily.SOCIAL_NETWORK,
        "Photo Upload": ServiceFamily.SOCIAL_NETWORK,
        "Chat Message": ServiceFamily.INSTANT_MESSAGING,
        "Voice Note": ServiceFamily.INSTANT_MESSAGING,
        "Parcel Drone Dispatch": ServiceFamily.UAV_DELIVERY,
        "Air Pollution Service Request": ServiceFamily.IOT_SENSOR,
        "Temperature Report": ServiceFamily.IOT_SENSOR,
    }
    heavy = UserProfile(
        profile_name="heavy-embb",
        count=heavy_count,
        mobility_mode="driving",
        session_rates={
            ServiceFamily.VIDEO_STREAMING: 4.0,
            ServiceFamily.SOCIAL_NETWORK: 6.0,
            ServiceFamily.INSTANT_MESSAGING: 8.0,
        },
        session_size_kb={
            ServiceFamily.VIDEO_STREAMING: (200.0, 40000.0),
            ServiceFamily.SOCIAL_NETWORK: (150.0, 2500.0),
            ServiceFamily.INSTANT_MESSAGING: (30.0, 60.0),
        },
        resource_draw={
            ServiceFamily.VIDEO_STREAMING: ResourceSample(512.0, 0.8, 256.0),
            ServiceFamily.SOCIAL_NETWORK: ResourceSample(128.0, 0.2, 64.0),
            ServiceFamily.INSTANT_MESSAGING: ResourceSample(32.0, 0.05, 16.0),
        },
    )
    light = UserProfile(
        profile_name="light-iot",
        count=light_count,
        mobility_mode="static",
        session_rates={ServiceFamily.IOT_SENSOR: 2.0},
        session_size_kb={ServiceFamily.IOT_SENSOR: (15.0, 5.0)},
        resource_draw={ServiceFamily.IOT_SENSOR: ResourceSample(8.0, 0.01, 4.0)},
    )
    return ScenarioSettings(
        area_center=center,
        area_radius_m=8000.0,
        enodebs=enodebs,
        service_catalog=catalog,
        user_profiles=[heavy, light],
        horizon_s=horizon_s,
        seed=seed,
    )
