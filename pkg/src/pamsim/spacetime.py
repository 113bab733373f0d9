"""Causal geometry checks for an experiment's event schedule.

Units are meters and nanoseconds (c = 0.299792458 m/ns).  A schedule
holds labelled events plus "media": named signal links, each with a
physical path length and a propagation speed as a fraction of c.  Path
lengths are explicit because a fiber is generally longer than the
straight-line distance between its endpoints.

The bundled `reference_schedule` is a synthetic but feasible timing
assignment for the published geometry (stations 46 m apart, source
13 m from the preparer, fiber runs of 28 m and 33 m at 0.68 c); the
actual run's event times were never published.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

C_M_PER_NS = 0.299792458

SPACE_LIKE = "space-like"
TIME_LIKE = "time-like"
LIGHT_LIKE = "light-like"

LIGHT_LIKE_REL_TOL = 1e-6

REQUIRED_EVENTS = (
    "pair_emission",
    "alice_choice",
    "alice_measurement",
    "bob_choice",
    "bob_measurement",
)

# Numerical slack (ns) for the arrival-time inequality.
_ARRIVAL_SLACK_NS = 1e-9


@dataclass(frozen=True)
class Event:
    label: str
    position: tuple[float, float, float]
    time: float

    def __post_init__(self):
        coords = (*self.position, self.time)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"event {self.label!r} has non-finite coordinates")


@dataclass(frozen=True)
class Link:
    """Signal path between two events: length in meters, speed in units of c."""

    source: str
    target: str
    speed: float
    length_m: float

    def __post_init__(self):
        if not 0.0 < self.speed <= 1.0:
            raise ValueError(f"link speed must be in (0, 1], got {self.speed}")
        if self.length_m < 0.0:
            raise ValueError(f"link length must be non-negative, got {self.length_m}")

    def transit_ns(self) -> float:
        return self.length_m / (self.speed * C_M_PER_NS)


@dataclass(frozen=True)
class Schedule:
    events: dict[str, Event]
    media: dict[str, Link]

    def __post_init__(self):
        missing = [label for label in REQUIRED_EVENTS if label not in self.events]
        if missing:
            raise ValueError(f"schedule is missing required events: {missing}")
        for name, link in self.media.items():
            for endpoint in (link.source, link.target):
                if endpoint not in self.events:
                    raise ValueError(f"link {name!r} references unknown event {endpoint!r}")

    def to_json_dict(self) -> dict:
        return {
            "events": [
                {"label": e.label, "position_m": list(e.position), "time_ns": e.time}
                for e in self.events.values()
            ],
            "media": {
                name: {
                    "from": link.source,
                    "to": link.target,
                    "speed_c": link.speed,
                    "length_m": link.length_m,
                }
                for name, link in self.media.items()
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Schedule":
        try:
            events = {}
            for entry in d["events"]:
                ev = Event(
                    label=str(entry["label"]),
                    position=tuple(float(x) for x in entry["position_m"]),
                    time=float(entry["time_ns"]),
                )
                events[ev.label] = ev
            media = {
                str(name): Link(
                    source=str(entry["from"]),
                    target=str(entry["to"]),
                    speed=float(entry["speed_c"]),
                    length_m=float(entry["length_m"]),
                )
                for name, entry in d.get("media", {}).items()
            }
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed schedule: {exc}") from exc
        return cls(events=events, media=media)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "Schedule":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def interval(a: Event, b: Event, rel_tol: float = LIGHT_LIKE_REL_TOL) -> str:
    """Classify the Minkowski interval between two events."""
    dt = (b.time - a.time) * C_M_PER_NS
    dx = math.dist(a.position, b.position)
    s2 = dt * dt - dx * dx
    scale = dt * dt + dx * dx
    if abs(s2) <= rel_tol * scale:
        return LIGHT_LIKE
    return TIME_LIKE if s2 > 0.0 else SPACE_LIKE


@dataclass(frozen=True)
class ConditionResult:
    name: str
    description: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    conditions: tuple[ConditionResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "conditions": [
                {
                    "name": c.name,
                    "description": c.description,
                    "passed": c.passed,
                    "detail": c.detail,
                }
                for c in self.conditions
            ],
        }


def _spacelike_check(s: Schedule, label_a: str, label_b: str) -> tuple[bool, str]:
    kind = interval(s.events[label_a], s.events[label_b])
    return kind == SPACE_LIKE, f"{label_a} vs {label_b}: {kind}"


def validate(s: Schedule) -> ValidationReport:
    """Check the causal-structure conditions of the schedule.

    C1  the measurement-setting choice at the measuring station is
        space-like separated from both the preparer's choice and the
        preparer's measurement;
    C2  the two station measurements are space-like separated;
    C3  both setting choices are space-like separated from the pair
        emission;
    C4  lab-frame delayed-choice ordering: the preparer's setting
        choice precedes the measuring station's setting choice;
    C5  no measurement fires before its photon can have arrived
        through its link.
    """
    results = []

    checks_c1 = [
        _spacelike_check(s, "bob_choice", "alice_choice"),
        _spacelike_check(s, "bob_choice", "alice_measurement"),
    ]
    results.append(
        ConditionResult(
            name="C1",
            description="measurer's choice space-like from preparer's choice and measurement",
            passed=all(ok for ok, _ in checks_c1),
            detail="; ".join(msg for _, msg in checks_c1),
        )
    )

    ok, msg = _spacelike_check(s, "alice_measurement", "bob_measurement")
    results.append(
        ConditionResult(
            name="C2",
            description="the two measurements are space-like separated",
            passed=ok,
            detail=msg,
        )
    )

    checks_c3 = [
        _spacelike_check(s, "alice_choice", "pair_emission"),
        _spacelike_check(s, "bob_choice", "pair_emission"),
    ]
    results.append(
        ConditionResult(
            name="C3",
            description="both setting choices space-like from the pair emission",
            passed=all(ok for ok, _ in checks_c3),
            detail="; ".join(msg for _, msg in checks_c3),
        )
    )

    t_ac = s.events["alice_choice"].time
    t_bc = s.events["bob_choice"].time
    results.append(
        ConditionResult(
            name="C4",
            description="preparer's setting choice precedes measurer's setting choice",
            passed=t_ac < t_bc,
            detail=f"alice_choice at {t_ac} ns, bob_choice at {t_bc} ns",
        )
    )

    c5_ok = True
    c5_details = []
    for name, link in s.media.items():
        arrival = s.events[link.source].time + link.transit_ns()
        actual = s.events[link.target].time
        ok = actual >= arrival - _ARRIVAL_SLACK_NS
        c5_ok &= ok
        c5_details.append(
            f"{name}: {link.target} at {actual} ns vs earliest arrival {arrival:.3f} ns"
        )
    results.append(
        ConditionResult(
            name="C5",
            description="no measurement precedes its photon's earliest arrival",
            passed=c5_ok,
            detail="; ".join(c5_details) if c5_details else "no links declared",
        )
    )

    return ValidationReport(conditions=tuple(results))


def reference_schedule() -> Schedule:
    """Synthetic feasible timing for the published station geometry."""
    alice = (0.0, 0.0, 0.0)
    bob = (46.0, 0.0, 0.0)
    charlie = (13.0, 0.0, 0.0)
    events = {
        "pair_emission": Event("pair_emission", charlie, 0.0),
        "alice_choice": Event("alice_choice", alice, 10.0),
        "bob_choice": Event("bob_choice", bob, 70.0),
        "alice_measurement": Event("alice_measurement", alice, 140.0),
        "bob_measurement": Event("bob_measurement", bob, 165.0),
    }
    media = {
        "charlie_alice": Link("pair_emission", "alice_measurement", 0.68, 28.0),
        "charlie_bob": Link("pair_emission", "bob_measurement", 0.68, 33.0),
    }
    return Schedule(events=events, media=media)
