"""Tick-driven end-to-end link engine.

Per tick (default 1 ms) the engine draws one composite channel gain, pushes
the tick's bit budget through modulation, fading + noise, and detection,
and routes recovered bits through deinterleaving, FEC decoding and frame
validation into the video sink.  Gains are held constant within a tick
(block fading: the tick is much shorter than the worst-case coherence
time).  Everything is derived from (config, seed): two runs with the same
pair produce byte-identical reports and output artifacts, including under
scripted parameter updates.

Live parameter updates are queued from any thread and applied atomically
at the next tick boundary; the latent fading state survives updates so the
gain trajectory stays continuous.
"""

import dataclasses
import json
import math
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import seeds
from .channel import (
    GAIN_FLOOR,
    FadingProcess,
    PointingGeometry,
    path_loss,
)
from .config import TUNING_RANGES, ScenarioConfig
from .fec import deinterleave, fec_decode, fec_encode, interleave, pad_to_block
from .framing import FLAG_RAW_FRAMES, IntegrityError, frame_pack, frame_unpack, frame_wire_length
from .phy import apply_channel, demodulate_fixed, demodulate_ook
from .video import (
    OpaqueReassembler,
    Reassembler,
    build_opaque_stream,
    build_stream,
    load_frame_sequence,
    psnr,
    save_frame_sequence,
    segment,
)

TUNABLE_CHANNEL_FIELDS = ("cn2", "wind_speed", "attenuation_db_per_km", "pointing_jitter_sigma")
TUNABLE_PHY_FIELDS = ("noise_sigma",)


@dataclass(frozen=True)
class ParamUpdate:
    """A validated live-update request; applies at the next tick boundary."""

    fields: dict

    @classmethod
    def from_json_dict(cls, data) -> "ParamUpdate":
        if not isinstance(data, dict) or not data:
            raise ValueError("update must be a non-empty JSON object")
        unknown = set(data) - set(TUNING_RANGES)
        if unknown:
            raise ValueError(f"unknown update fields: {sorted(unknown)}")
        fields = {}
        for key, value in data.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{key} must be a number")
            fields[key] = float(value)
        return cls(fields=fields)


@dataclass
class MetricsRecord:
    """One report-interval snapshot of link state and quality.

    packets_ok/packets_lost count the interval; frames_delivered and
    frames_concealed are cumulative so a dashboard joining mid-run still
    shows correct totals.
    """

    t: float
    h_mean: float
    h_min: float
    ber_pre_fec: float
    ber_post_fec: float
    packets_ok: int
    packets_lost: int
    frames_delivered: int
    frames_concealed: int
    psnr_db: float | None
    params_in_effect: dict

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "h_mean": self.h_mean,
            "h_min": self.h_min,
            "ber_pre_fec": self.ber_pre_fec,
            "ber_post_fec": self.ber_post_fec,
            "packets_ok": self.packets_ok,
            "packets_lost": self.packets_lost,
            "frames_delivered": self.frames_delivered,
            "frames_concealed": self.frames_concealed,
            "psnr_db": _json_psnr(self.psnr_db),
            "params_in_effect": dict(self.params_in_effect),
        }


def _json_psnr(value):
    if value is None:
        return None
    if math.isinf(value):
        return "inf"
    return value


class _TxRxPipeline:
    """Shared TX/RX bookkeeping for the packet stream.

    The air stream is all packets back to back, then idle.  Packet air
    lengths are pure arithmetic on payload sizes, so both ends share the
    layout without any in-band synchronization.
    """

    def __init__(self, config: ScenarioConfig, stream: bytes, flags: int):
        self.fec = config.fec
        self.interleaver = config.interleaver
        self.flags = flags
        self.payloads = segment(stream, config.source.payload_size)
        self.air_len = []
        for payload in self.payloads:
            coded = self.fec.coded_length(frame_wire_length(len(payload)) * 8)
            pad = (-coded) % self.interleaver.block
            self.air_len.append(coded + pad)
        self.air_offset = np.concatenate([[0], np.cumsum(self.air_len)]).astype(np.int64)
        self.total_air_bits = int(self.air_offset[-1])

        # transmit cursor
        self.tx_pkt = 0
        self.tx_off = 0
        self._tx_air: np.ndarray | None = None
        self._tx_wire: bytes | None = None
        # receive cursor (advances in lockstep within each tick)
        self.rx_pkt = 0
        self.rx_off = 0
        self._rx_buf: np.ndarray | None = None
        self._pending_tx: dict[int, tuple[np.ndarray, bytes]] = {}

    def _materialize(self, pkt: int) -> tuple[np.ndarray, bytes]:
        wire = frame_pack(seq=pkt, flags=self.flags, payload=self.payloads[pkt])
        bits = np.unpackbits(np.frombuffer(wire, dtype=np.uint8))
        coded = fec_encode(self.fec, bits)
        padded, _ = pad_to_block(coded, self.interleaver.block)
        return interleave(self.interleaver, padded), wire

    def tx_fill(self, out: np.ndarray) -> int:
        """Write upcoming air bits into `out`; returns the data-bit count."""
        n = len(out)
        filled = 0
        while filled < n and self.tx_pkt < len(self.payloads):
            if self._tx_air is None:
                self._tx_air, self._tx_wire = self._materialize(self.tx_pkt)
                self._pending_tx[self.tx_pkt] = (self._tx_air, self._tx_wire)
            take = min(n - filled, len(self._tx_air) - self.tx_off)
            out[filled : filled + take] = self._tx_air[self.tx_off : self.tx_off + take]
            filled += take
            self.tx_off += take
            if self.tx_off == len(self._tx_air):
                self.tx_pkt += 1
                self.tx_off = 0
                self._tx_air = None
                self._tx_wire = None
        return filled

    def rx_route(self, bits: np.ndarray):
        """Route decided bits into packet buffers; yield completed packets.

        Yields (pkt_index, rx_air, tx_air, tx_wire) tuples.
        """
        pos = 0
        n = len(bits)
        while pos < n and self.rx_pkt < len(self.payloads):
            plen = self.air_len[self.rx_pkt]
            if self._rx_buf is None:
                self._rx_buf = np.empty(plen, dtype=np.uint8)
            take = min(n - pos, plen - self.rx_off)
            self._rx_buf[self.rx_off : self.rx_off + take] = bits[pos : pos + take]
            pos += take
            self.rx_off += take
            if self.rx_off == plen:
                pkt = self.rx_pkt
                tx_air, tx_wire = self._pending_tx.pop(pkt)
                rx_air = self._rx_buf
                self.rx_pkt += 1
                self.rx_off = 0
                self._rx_buf = None
                yield pkt, rx_air, tx_air, tx_wire


class LinkEngine:
    """Single-owner simulation engine; see module docstring."""

    def __init__(self, config: ScenarioConfig, table_cache_dir=None):
        self.config = config
        self.channel = config.channel
        self.phy = config.phy
        self._table_cache_dir = table_cache_dir

        tick = self.channel.tick_interval
        self.n_ticks = max(1, round(config.duration / tick))
        self.ticks_per_report = max(1, round(config.report_interval / tick))

        self.fading = FadingProcess.from_params(self.channel, config.seed, table_cache_dir)
        self._pointing_rng = seeds.make_stream(config.seed, seeds.STREAM_POINTING)
        self._noise_rng = seeds.make_stream(config.seed, seeds.STREAM_NOISE)
        self._geometry = PointingGeometry.from_params(self.channel)
        self._h_l = path_loss(self.channel.attenuation_db_per_km, self.channel.distance)

        self._load_source()

        # scripted updates -> (boundary tick, fields), stable order
        self._scripted = deque(
            (max(0, math.ceil(round(upd.t / tick, 9))), upd.fields)
            for upd in sorted(config.updates, key=lambda u: u.t)
        )
        self._validate_scripted()
        self._live: deque[dict] = deque()
        self._live_lock = threading.Lock()

        self.records: list[MetricsRecord] = []
        self.summary: dict | None = None
        self.on_record = None
        self.latest_frame_pgm: bytes | None = None
        self.running = False
        self.finished = False

        # run totals
        self._phy_symbols = 0
        self._bits_pre = 0
        self._errs_pre = 0
        self._bits_post = 0
        self._errs_post = 0
        self._corrected = 0
        self._packets_ok = 0
        self._packets_lost = 0
        self._updates_applied = 0
        self._psnr_all: list[float] = []

    # -- setup -----------------------------------------------------------

    def _load_source(self):
        src = self.config.source
        if src.mode == "pgm":
            self.source_frames = load_frame_sequence(src.path)
            stream = build_stream(self.source_frames)
            self._flags = FLAG_RAW_FRAMES
            self.reassembler = Reassembler(
                [len(f.pixels) for f in self.source_frames],
                self.source_frames[0].width,
                self.source_frames[0].height,
                src.payload_size,
            )
        else:
            with open(src.path, "rb") as fh:
                data = fh.read()
            self.source_frames = []
            stream = build_opaque_stream(data)
            self._flags = 0
            self.reassembler = OpaqueReassembler(len(data), src.payload_size)
        self.pipeline = _TxRxPipeline(self.config, stream, self._flags)

    def _validate_scripted(self):
        channel, phy = self.channel, self.phy
        for _, fields in self._scripted:
            channel, phy = self._updated_params(channel, phy, fields)

    @staticmethod
    def _updated_params(channel, phy, fields):
        chan_fields = {k: v for k, v in fields.items() if k in TUNABLE_CHANNEL_FIELDS}
        phy_fields = {k: v for k, v in fields.items() if k in TUNABLE_PHY_FIELDS}
        new_channel = dataclasses.replace(channel, **chan_fields) if chan_fields else channel
        new_phy = dataclasses.replace(phy, **phy_fields) if phy_fields else phy
        return new_channel, new_phy

    # -- live control ----------------------------------------------------

    def queue_update(self, update: ParamUpdate) -> dict:
        """Validate against current params and queue for the next boundary."""
        with self._live_lock:
            self._updated_params(self.channel, self.phy, update.fields)  # raises if invalid
            if self.finished:
                raise ValueError("engine has finished; updates no longer apply")
            self._live.append(dict(update.fields))
        return dict(update.fields)

    def params_in_effect(self) -> dict:
        return {
            "cn2": self.channel.cn2,
            "wind_speed": self.channel.wind_speed,
            "attenuation_db_per_km": self.channel.attenuation_db_per_km,
            "pointing_jitter_sigma": self.channel.pointing_jitter_sigma,
            "noise_sigma": self.phy.noise_sigma,
        }

    def effective_config_dict(self) -> dict:
        cfg = dataclasses.replace(self.config, channel=self.channel, phy=self.phy)
        return cfg.to_dict()

    def _apply_fields(self, fields: dict):
        new_channel, new_phy = self._updated_params(self.channel, self.phy, fields)
        retune = (
            new_channel.cn2 != self.channel.cn2
            or new_channel.wind_speed != self.channel.wind_speed
        )
        if new_channel.attenuation_db_per_km != self.channel.attenuation_db_per_km:
            self._h_l = path_loss(new_channel.attenuation_db_per_km, new_channel.distance)
        self.channel = new_channel
        self.phy = new_phy
        if retune:
            self.fading.retune(new_channel, self._table_cache_dir)
        self._updates_applied += 1

    def _apply_due_updates(self, tick: int):
        while self._scripted and self._scripted[0][0] <= tick:
            _, fields = self._scripted.popleft()
            self._apply_fields(fields)
        with self._live_lock:
            pending = list(self._live)
            self._live.clear()
        for fields in pending:
            try:
                self._apply_fields(fields)
            except ValueError:
                pass  # pre-validated at queue time; combination conflicts are dropped

    # -- main loop -------------------------------------------------------

    def run(self, pace: bool = False):
        if self.finished:
            raise RuntimeError("engine already ran")
        self.running = True
        tick_len = self.channel.tick_interval
        budget_acc = 0.0
        tick = 0
        next_report = min(self.ticks_per_report, self.n_ticks)
        iv = _IntervalAccumulator()
        wall_start = time.monotonic()

        while tick < self.n_ticks:
            self._apply_due_updates(tick)
            chunk_end = next_report
            if self._scripted:
                chunk_end = min(chunk_end, self._scripted[0][0])
            if pace:
                chunk_end = min(chunk_end, tick + 1)
            m = chunk_end - tick

            h_arr = self._gains_for(m)
            iv.add_gains(h_arr)
            for j in range(m):
                budget_acc += self.phy.bit_rate * tick_len
                budget = int(budget_acc)
                budget_acc -= budget
                self._process_tick(h_arr[j], budget, iv)
                if pace:
                    target = wall_start + (tick + j + 1) * tick_len
                    delay = target - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
            tick = chunk_end

            if tick == next_report:
                if tick == self.n_ticks:
                    # flush the sink first so end-of-run concealments land
                    # in the final record, never after the summary
                    self._finalize_stream(iv)
                t = round(tick * tick_len, 9)
                self._emit_record(t, iv)
                iv = _IntervalAccumulator()
                next_report = min(next_report + self.ticks_per_report, self.n_ticks)

        self.running = False
        self.finished = True
        self._pacing_drift = time.monotonic() - wall_start - self.config.duration if pace else None
        self.summary = self._build_summary()
        return self

    def _gains_for(self, m: int) -> np.ndarray:
        h_a = self.fading.next_gains(m)
        r = self._pointing_rng.rayleigh(self.channel.pointing_jitter_sigma, m)
        h_p = self._geometry.a0 * np.exp(-2.0 * r * r / self._geometry.w_eq_sq)
        return np.maximum(self._h_l * h_a * h_p, GAIN_FLOOR)

    def _process_tick(self, h: float, budget: int, iv: "_IntervalAccumulator"):
        if budget <= 0:
            return
        self._phy_symbols += budget
        pipe = self.pipeline
        bit_buf = np.zeros(budget, dtype=np.uint8)
        n_data = pipe.tx_fill(bit_buf)
        x = bit_buf * self.phy.amplitude
        y = apply_channel(x, h, self.phy.noise_sigma, self._noise_rng)
        if self.phy.csi:
            decided = demodulate_ook(y, h, self.phy.amplitude)
        else:
            decided = demodulate_fixed(y, self.phy.amplitude)
        if n_data == 0:
            return
        for pkt, rx_air, tx_air, tx_wire in pipe.rx_route(decided[:n_data]):
            self._complete_packet(pkt, rx_air, tx_air, tx_wire, iv)

    def _complete_packet(self, pkt, rx_air, tx_air, tx_wire, iv):
        pre_errs = int(np.count_nonzero(rx_air != tx_air))
        self._bits_pre += len(tx_air)
        self._errs_pre += pre_errs
        iv.bits_pre += len(tx_air)
        iv.errs_pre += pre_errs

        coded_len = self.config.fec.coded_length(len(tx_wire) * 8)
        padded = deinterleave(self.config.interleaver, rx_air)
        data_bits, corrected = fec_decode(self.config.fec, padded[:coded_len])
        self._corrected += corrected

        tx_bits = np.unpackbits(np.frombuffer(tx_wire, dtype=np.uint8))
        post_errs = int(np.count_nonzero(data_bits != tx_bits))
        self._bits_post += len(tx_bits)
        self._errs_post += post_errs
        iv.bits_post += len(tx_bits)
        iv.errs_post += post_errs

        payload = None
        try:
            frame = frame_unpack(np.packbits(data_bits).tobytes())
            if frame.seq == pkt:
                payload = frame.payload
        except IntegrityError:
            payload = None

        if payload is None:
            self._packets_lost += 1
            iv.packets_lost += 1
        else:
            self._packets_ok += 1
            iv.packets_ok += 1

        if self.config.source.mode == "pgm":
            for idx, vframe, _concealed in self.reassembler.feed(payload):
                self._frame_finalized(idx, vframe, iv)
        else:
            self.reassembler.feed(payload)

    def _frame_finalized(self, idx, vframe, iv):
        value = psnr(self.source_frames[idx], vframe)
        self._psnr_all.append(value)
        iv.psnr.append(value)
        self.latest_frame_pgm = (
            b"P5\n%d %d\n255\n" % (vframe.width, vframe.height) + vframe.pixels
        )

    def _finalize_stream(self, iv):
        if self.config.source.mode == "pgm":
            for idx, vframe, _concealed in self.reassembler.finish():
                self._frame_finalized(idx, vframe, iv)
        else:
            self.received_bytes = self.reassembler.finish()

    def _emit_record(self, t: float, iv: "_IntervalAccumulator"):
        metrics = self.reassembler.metrics
        record = MetricsRecord(
            t=t,
            h_mean=iv.h_sum / iv.ticks if iv.ticks else 0.0,
            h_min=iv.h_min if iv.ticks else 0.0,
            ber_pre_fec=iv.errs_pre / iv.bits_pre if iv.bits_pre else 0.0,
            ber_post_fec=iv.errs_post / iv.bits_post if iv.bits_post else 0.0,
            packets_ok=iv.packets_ok,
            packets_lost=iv.packets_lost,
            frames_delivered=metrics.frames_delivered,
            frames_concealed=metrics.frames_concealed,
            psnr_db=_aggregate_psnr(iv.psnr),
            params_in_effect=self.params_in_effect(),
        )
        self.records.append(record)
        if self.on_record is not None:
            self.on_record(record)

    # -- results ---------------------------------------------------------

    def _build_summary(self) -> dict:
        metrics = self.reassembler.metrics
        finite = [v for v in self._psnr_all if not math.isinf(v)]
        summary = {
            "ticks": self.n_ticks,
            "duration": self.config.duration,
            "phy_symbols": self._phy_symbols,
            "bits_sent": self._bits_pre,
            "bit_errors_pre_fec": self._errs_pre,
            "ber_pre_fec": self._errs_pre / self._bits_pre if self._bits_pre else 0.0,
            "data_bits": self._bits_post,
            "bit_errors_post_fec": self._errs_post,
            "ber_post_fec": self._errs_post / self._bits_post if self._bits_post else 0.0,
            "corrected_codewords": self._corrected,
            "packets_sent": metrics.packets_sent,
            "packets_ok": self._packets_ok,
            "packets_lost": metrics.packets_lost,
            "frames_source": len(self.source_frames),
            "frames_delivered": metrics.frames_delivered,
            "frames_concealed": metrics.frames_concealed,
            "psnr_per_frame": [_json_psnr(v) for v in self._psnr_all],
            "psnr_mean_db": _json_psnr(_aggregate_psnr(self._psnr_all)),
            "psnr_min_db": _json_psnr(min(self._psnr_all)) if self._psnr_all else None,
            "lossless_frames": len(self._psnr_all) - len(finite),
            "updates_applied": self._updates_applied,
        }
        return summary


@dataclass
class _IntervalAccumulator:
    ticks: int = 0
    h_sum: float = 0.0
    h_min: float = math.inf
    bits_pre: int = 0
    errs_pre: int = 0
    bits_post: int = 0
    errs_post: int = 0
    packets_ok: int = 0
    packets_lost: int = 0
    psnr: list = field(default_factory=list)

    def add_gains(self, h_arr: np.ndarray):
        if len(h_arr):
            self.ticks += len(h_arr)
            self.h_sum += float(h_arr.sum())
            self.h_min = min(self.h_min, float(h_arr.min()))


def _aggregate_psnr(values) -> float | None:
    """Interval PSNR: mean of finite values, inf if all lossless, None if empty."""
    if not values:
        return None
    finite = [v for v in values if not math.isinf(v)]
    if not finite:
        return math.inf
    return sum(finite) / len(finite)


def write_report(path, records, summary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict(), separators=(",", ":")) + "\n")
        fh.write(json.dumps({"summary": summary}, separators=(",", ":")) + "\n")


def run_scenario(
    config: ScenarioConfig,
    out_dir=None,
    pace: bool = False,
    on_record=None,
    table_cache_dir=None,
) -> LinkEngine:
    """Run a scenario to completion; optionally write report and artifacts.

    Outputs under `out_dir`: report.jsonl (one MetricsRecord per line plus
    a final summary object), frames/ with the received PGM sequence (pgm
    mode) or received.bin (opaque mode).
    """
    engine = LinkEngine(config, table_cache_dir=table_cache_dir)
    engine.on_record = on_record
    engine.run(pace=pace)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_report(os.path.join(out_dir, "report.jsonl"), engine.records, engine.summary)
        if config.source.mode == "pgm":
            save_frame_sequence(os.path.join(out_dir, "frames"), engine.reassembler.frames)
        else:
            with open(os.path.join(out_dir, "received.bin"), "wb") as fh:
                fh.write(engine.received_bytes)
    return engine
