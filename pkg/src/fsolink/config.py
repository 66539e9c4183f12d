"""Scenario configuration: JSON schema, validation, canonical scenarios.

Config files are JSON with a top-level "schema_version": 1.  The two
canonical scenarios mirror the demo's channel-emulator settings: low
turbulence with 1 m/s wind and high turbulence with 6 m/s wind, both over
a 1 km, 1550 nm link carrying a desk-scale 192x108 @ 60 fps raw-frame
source for 10 seconds.
"""

import dataclasses
import json
from dataclasses import dataclass, field

from .channel import ChannelParams
from .fec import FecScheme, Interleaver
from .phy import PhyParams

SCHEMA_VERSION = 1

SOURCE_MODES = ("pgm", "opaque")

# Practical tuning ranges for the live-adjustable parameters.  The
# dashboard's slider bounds are generated from this table
# (frontend/scripts/gen_bounds.py) so client and engine cannot drift.
TUNING_RANGES = {
    "cn2": (1e-17, 1e-12),
    "wind_speed": (0.1, 20.0),
    "attenuation_db_per_km": (0.0, 20.0),
    "pointing_jitter_sigma": (0.0, 0.1),
    "noise_sigma": (0.0, 1.0),
}


@dataclass
class SourceConfig:
    mode: str = "pgm"
    path: str = ""
    fps: float = 60.0
    payload_size: int = 1024

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in SOURCE_MODES:
            raise ValueError(f"source mode must be one of {SOURCE_MODES}")
        if not self.path:
            raise ValueError("source path is required")
        if not self.fps > 0:
            raise ValueError("fps must be > 0")
        if not 64 <= self.payload_size <= 8192:
            raise ValueError("payload_size must be in [64, 8192]")


@dataclass
class ScheduledUpdate:
    """A scripted parameter update applied at the first tick boundary >= t."""

    t: float
    fields: dict

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("update time must be >= 0")
        if not self.fields:
            raise ValueError("update carries no fields")
        unknown = set(self.fields) - set(TUNING_RANGES)
        if unknown:
            raise ValueError(f"unknown update fields: {sorted(unknown)}")


@dataclass
class ScenarioConfig:
    channel: ChannelParams = field(default_factory=ChannelParams)
    phy: PhyParams = field(default_factory=PhyParams)
    fec: FecScheme = field(default_factory=FecScheme)
    interleaver: Interleaver = field(default_factory=Interleaver)
    source: SourceConfig = field(default_factory=SourceConfig)
    duration: float = 10.0
    report_interval: float = 0.5
    seed: int = 42
    updates: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.channel.validate()
        self.phy.validate()
        self.source.validate()
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not 0 < self.report_interval <= self.duration:
            raise ValueError("report_interval must be in (0, duration]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        for upd in self.updates:
            if not isinstance(upd, ScheduledUpdate):
                raise ValueError("updates must be ScheduledUpdate entries")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "channel": dataclasses.asdict(self.channel),
            "phy": dataclasses.asdict(self.phy),
            "fec": {
                "scheme": self.fec.kind,
                "repeat": self.fec.repeat,
                "interleaver": {"rows": self.interleaver.rows, "cols": self.interleaver.cols},
            },
            "source": dataclasses.asdict(self.source),
            "duration": self.duration,
            "report_interval": self.report_interval,
            "seed": self.seed,
            "updates": [dict({"t": u.t}, **u.fields) for u in self.updates],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _build_section(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ValueError(f"config section {section!r} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown keys in {section!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid {section!r} section: {exc}") from exc


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    allowed = {
        "schema_version", "channel", "phy", "fec", "source",
        "duration", "report_interval", "seed", "updates",
    }
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown top-level keys: {sorted(unknown)}")

    channel = _build_section(ChannelParams, data.get("channel", {}), "channel")
    phy = _build_section(PhyParams, data.get("phy", {}), "phy")

    fec_data = dict(data.get("fec", {}))
    il_data = fec_data.pop("interleaver", {})
    if "scheme" in fec_data:
        fec_data["kind"] = fec_data.pop("scheme")
    fec = _build_section(FecScheme, fec_data, "fec")
    interleaver = _build_section(Interleaver, il_data, "fec.interleaver")

    source = _build_section(SourceConfig, data.get("source", {}), "source")

    updates = []
    for i, entry in enumerate(data.get("updates", [])):
        if not isinstance(entry, dict) or "t" not in entry:
            raise ValueError(f"updates[{i}] must be an object with a 't' key")
        fields = {k: v for k, v in entry.items() if k != "t"}
        updates.append(ScheduledUpdate(t=float(entry["t"]), fields=fields))

    try:
        return ScenarioConfig(
            channel=channel,
            phy=phy,
            fec=fec,
            interleaver=interleaver,
            source=source,
            duration=float(data.get("duration", 10.0)),
            report_interval=float(data.get("report_interval", 0.5)),
            seed=int(data.get("seed", 42)),
            updates=updates,
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid config: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return config_from_dict(data)


# Qualitative knobs of the demo mapped to numbers: Cn2 chosen so the Rytov
# variance lands near 0.02 (weak) and just under 1.0 (strong) at 1550 nm
# over 1 km.
LOW_CN2 = 1e-15
HIGH_CN2 = 5e-14
LOW_WIND = 1.0
HIGH_WIND = 6.0

# Desk-scale source: UHD/20 per axis at the demo's 60 fps.
DESK_WIDTH = 192
DESK_HEIGHT = 108
DESK_FPS = 60.0

# Line rate able to carry the desk-scale raw source (~10 Mb/s before FEC)
# with headroom; the demo's own 200+48 kb/s figure remains the PhyParams
# default for opaque sources.
DESK_BIT_RATE = 24_000_000.0


def canonical_scenario(name: str, source_path: str = "source") -> ScenarioConfig:
    """The demo's two channel-emulator settings as full scenario configs."""
    if name == "low":
        cn2, wind = LOW_CN2, LOW_WIND
    elif name == "high":
        cn2, wind = HIGH_CN2, HIGH_WIND
    else:
        raise ValueError("scenario name must be 'low' or 'high'")
    return ScenarioConfig(
        channel=ChannelParams(cn2=cn2, wind_speed=wind),
        phy=PhyParams(amplitude=1.0, noise_sigma=0.02, bit_rate=DESK_BIT_RATE),
        fec=FecScheme(kind="hamming74"),
        interleaver=Interleaver(rows=64, cols=7),
        source=SourceConfig(mode="pgm", path=source_path, fps=DESK_FPS, payload_size=1024),
        duration=10.0,
        report_interval=0.5,
        seed=42,
    )
