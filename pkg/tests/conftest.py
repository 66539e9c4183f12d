import numpy as np
import pytest

from fsolink import video
from fsolink.channel import ChannelParams
from fsolink.config import ScenarioConfig, SourceConfig
from fsolink.phy import PhyParams


@pytest.fixture
def rng():
    return np.random.default_rng(0xFEED)


@pytest.fixture
def tiny_source(tmp_path):
    """12 deterministic 48x27 frames on disk; returns the directory."""
    src = tmp_path / "source"
    video.save_frame_sequence(src, video.make_gradient_frames(12, 48, 27))
    return str(src)


def make_tiny_config(source_path, **overrides) -> ScenarioConfig:
    """A fast, fully-clean scenario: unity fading, no noise, no jitter."""
    defaults = dict(
        channel=ChannelParams(
            cn2=0.0,
            attenuation_db_per_km=0.0,
            pointing_jitter_sigma=0.0,
            beam_waist=0.025,
            aperture_radius=0.5,
        ),
        phy=PhyParams(amplitude=1.0, noise_sigma=0.0, bit_rate=2_000_000.0),
        source=SourceConfig(mode="pgm", path=source_path, fps=60, payload_size=256),
        duration=0.5,
        report_interval=0.1,
        seed=42,
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)
