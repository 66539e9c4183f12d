#!/usr/bin/env python3
"""Compare the pure-Python and compiled kernel backends.

Times each hot kernel on both backends, verifies the outputs agree bit for
bit, then times a full desk-scale scenario under each backend in a
subprocess (backend choice is an import-time decision).

    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fsolink._kernels import get_backend  # noqa: E402


def timeit(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_kernels(quick: bool):
    pure = get_backend("pure")
    try:
        compiled = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")
        return False

    n = 200_000 if quick else 2_000_000
    rng = np.random.default_rng(42)
    z = rng.standard_normal(n)
    data = bytes(rng.integers(0, 256, n, dtype=np.uint8))
    bits = rng.integers(0, 2, 4 * (n // 4)).astype(np.uint8)
    coded = pure.hamming74_encode(bits)
    noisy = coded.copy()
    noisy[rng.integers(0, len(noisy), n // 10)] ^= 1

    cases = [
        ("ar1_path", lambda b: b.ar1_path(0.0, 0.9, z), lambda r: r[0]),
        ("crc32_update", lambda b: b.crc32_update(data, 0xFFFFFFFF), lambda r: r),
        ("hamming74_encode", lambda b: b.hamming74_encode(bits), lambda r: r),
        ("hamming74_decode", lambda b: b.hamming74_decode(noisy), lambda r: r[0]),
    ]
    print(f"kernel benchmark, n={n}")
    print(f"{'kernel':<20}{'pure':>12}{'compiled':>12}{'speedup':>10}")
    for name, call, extract in cases:
        t_pure, r_pure = timeit(call, pure)
        t_comp, r_comp = timeit(call, compiled)
        a, b = extract(r_pure), extract(r_comp)
        same = np.array_equal(a, b) if isinstance(a, np.ndarray) else a == b
        flag = "" if same else "  MISMATCH!"
        print(f"{name:<20}{t_pure * 1e3:>10.1f}ms{t_comp * 1e3:>10.1f}ms"
              f"{t_pure / t_comp:>9.1f}x{flag}")
    return True


def bench_scenario(quick: bool):
    from fsolink import video
    from fsolink.config import canonical_scenario

    with tempfile.TemporaryDirectory() as td:
        source = os.path.join(td, "source")
        frames = 60 if quick else 600
        video.save_frame_sequence(source, video.make_gradient_frames(frames, 192, 108))
        cfg = canonical_scenario("high", source_path=source)
        if quick:
            import dataclasses

            cfg = dataclasses.replace(cfg, duration=1.0)
        cfg_path = os.path.join(td, "high.json")
        with open(cfg_path, "w") as fh:
            fh.write(cfg.to_json())

        print(f"\nend-to-end high scenario ({cfg.duration:.0f}s simulated)")
        for backend in ("pure", "compiled"):
            env = dict(os.environ, FSOLINK_BACKEND=backend,
                       PYTHONPATH=os.pathsep.join(sys.path))
            start = time.perf_counter()
            proc = subprocess.run(
                [sys.executable, "-m", "fsolink", "run", "--config", cfg_path,
                 "--out", os.path.join(td, f"out_{backend}")],
                env=env, capture_output=True, text=True,
            )
            wall = time.perf_counter() - start
            if proc.returncode != 0:
                print(f"  {backend}: FAILED\n{proc.stderr}")
                continue
            print(f"  {backend:<10} {wall:6.1f}s wall")
        a = open(os.path.join(td, "out_pure", "report.jsonl"), "rb").read()
        b = open(os.path.join(td, "out_compiled", "report.jsonl"), "rb").read()
        print(f"  reports byte-identical across backends: {a == b}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes for a fast pass")
    args = parser.parse_args()
    if bench_kernels(args.quick):
        bench_scenario(args.quick)


if __name__ == "__main__":
    main()
