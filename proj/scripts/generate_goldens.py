#!/usr/bin/env python3
# Copyright 2026 The emopack Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the featurizer golden fixtures.

Every waveform is built from a fixed recipe, written as float32 WAV, run
through the reference Whisper feature extractor (no padding) and stored in
the EPK1 layout with zero member records. index.json lists recipes and
SHA-256 checksums.

Usage: generate_goldens.py [OUT_DIR] [--compare PRIMARY_DIR]
"""

import argparse
import hashlib
import json
import pathlib
import struct
import sys

import numpy as np
from scipy.io import wavfile
from scipy.signal import lfilter

SR = 16000

RECIPES = [
    {"name": "tone_440", "kind": "tone", "freqs": [440.0], "amp": 0.5, "samples": 16037},
    {"name": "tone_1000_quiet", "kind": "tone", "freqs": [1000.0], "amp": 0.3, "samples": 8123},
    {"name": "tone_3000_loud", "kind": "tone", "freqs": [3000.0], "amp": 0.8, "samples": 24011},
    {"name": "tone_7900", "kind": "tone", "freqs": [7900.0], "amp": 0.5, "samples": 12345},
    {"name": "tone_100", "kind": "tone", "freqs": [100.0], "amp": 0.9, "samples": 20001},
    {"name": "tone_pair", "kind": "tone", "freqs": [300.0, 2500.0], "amp": 0.4, "samples": 18999},
    {"name": "tone_faint", "kind": "tone", "freqs": [660.0], "amp": 1e-3, "samples": 9999},
    {"name": "chirp_up", "kind": "chirp", "f0": 50.0, "f1": 7000.0, "method": "linear", "amp": 0.5, "samples": 32003},
    {"name": "chirp_log", "kind": "chirp", "f0": 100.0, "f1": 6000.0, "method": "log", "amp": 0.5, "samples": 24577},
    {"name": "chirp_down", "kind": "chirp", "f0": 7000.0, "f1": 200.0, "method": "linear", "amp": 0.7, "samples": 16111},
    {"name": "noise_white", "kind": "noise", "color": "white", "std": 0.1, "seed": 1, "samples": 16421},
    {"name": "noise_uniform", "kind": "noise", "color": "uniform", "std": 0.3, "seed": 2, "samples": 7001},
    {"name": "noise_brown", "kind": "noise", "color": "brown", "std": 0.2, "seed": 3, "samples": 20011},
    {"name": "noise_speechlike_a", "kind": "noise", "color": "speechlike", "std": 0.2, "seed": 4,
     "formants": [700.0, 1200.0], "syllable_hz": 4.0, "samples": 40003},
    {"name": "noise_speechlike_b", "kind": "noise", "color": "speechlike", "std": 0.15, "seed": 5,
     "formants": [400.0, 2000.0], "syllable_hz": 5.5, "samples": 33331},
    {"name": "silence_30s", "kind": "silence", "samples": 480000},
    {"name": "silence_short", "kind": "silence", "samples": 4801},
    {"name": "click_train", "kind": "click", "period": 160, "offset": 37, "amp": 0.9, "samples": 16019},
    {"name": "click_single", "kind": "click", "positions": [4005], "amp": 1.0, "samples": 8011},
    {"name": "click_irregular", "kind": "click", "positions": [211, 1777, 5003, 9120, 15000, 23999], "amp": 0.6,
     "samples": 24007},
    {"name": "tone_noise_30s", "kind": "tone", "freqs": [440.0], "amp": 0.3, "noise_std": 0.02, "seed": 6,
     "samples": 480000},
    {"name": "dc_offset", "kind": "dc", "level": 0.25, "samples": 5003},
    {"name": "square_200", "kind": "square", "freq": 200.0, "amp": 0.5, "samples": 12007},
    {"name": "tone_minimal", "kind": "tone", "freqs": [1500.0], "amp": 0.5, "samples": 401},
    {"name": "tone_clipped", "kind": "clipped", "freq": 250.0, "amp": 3.0, "samples": 15013},
]


def synthesize(r):
    n = r["samples"]
    t = np.arange(n, dtype=np.float64) / SR
    kind = r["kind"]
    if kind == "tone":
        x = sum(np.sin(2 * np.pi * f * t) for f in r["freqs"]) * r["amp"] / len(r["freqs"])
        if "noise_std" in r:
            x = x + np.random.default_rng(r["seed"]).normal(0.0, r["noise_std"], n)
    elif kind == "chirp":
        duration = n / SR
        if r["method"] == "linear":
            k = (r["f1"] - r["f0"]) / duration
            phase = 2 * np.pi * (r["f0"] * t + 0.5 * k * t * t)
        else:
            ratio = r["f1"] / r["f0"]
            phase = 2 * np.pi * r["f0"] * duration / np.log(ratio) * (ratio ** (t / duration) - 1.0)
        x = r["amp"] * np.sin(phase)
    elif kind == "noise":
        rng = np.random.default_rng(r["seed"])
        color = r["color"]
        if color == "white":
            x = rng.normal(0.0, r["std"], n)
        elif color == "uniform":
            x = rng.uniform(-r["std"], r["std"], n)
        elif color == "brown":
            x = lfilter([1.0], [1.0, -0.995], rng.normal(0.0, 1.0, n))
            x = r["std"] * x / np.max(np.abs(x))
        else:
            x = rng.normal(0.0, 1.0, n)
            for f in r["formants"]:
                w = 2 * np.pi * f / SR
                rad = 0.97
                x = lfilter([1.0 - rad], [1.0, -2 * rad * np.cos(w), rad * rad], x)
            envelope = 0.5 * (1.0 - np.cos(2 * np.pi * r["syllable_hz"] * t))
            x = x * envelope
            x = r["std"] * x / np.std(x)
    elif kind == "silence":
        x = np.zeros(n)
    elif kind == "click":
        x = np.zeros(n)
        positions = r.get("positions") or list(range(r["offset"], n, r["period"]))
        x[positions] = r["amp"]
    elif kind == "dc":
        x = np.full(n, r["level"])
    elif kind == "square":
        x = r["amp"] * np.sign(np.sin(2 * np.pi * r["freq"] * t + 0.1))
    elif kind == "clipped":
        x = np.clip(r["amp"] * np.sin(2 * np.pi * r["freq"] * t), -1.0, 1.0)
    else:
        raise ValueError(f"unknown recipe kind {kind}")
    return np.asarray(x, dtype=np.float32)


def reference_extractor():
    try:
        from transformers import WhisperFeatureExtractor
    except ImportError as e:
        sys.exit(f"reference extractor unavailable: {e}")
    return WhisperFeatureExtractor(feature_size=80, sampling_rate=SR, hop_length=160, n_fft=400)


def log_mel(extractor, x):
    mel = extractor._np_extract_fbank_features(x[None, :], "cpu")
    return np.asarray(mel[0], dtype=np.float32)


def encode_epk(mel, total_s):
    n_mels, n_frames = mel.shape
    head = b"EPK1" + struct.pack("<IIIIf", 1, n_mels, n_frames, 0, total_s)
    return head + np.ascontiguousarray(mel, dtype="<f4").tobytes()


def decode_epk(data):
    if data[:4] != b"EPK1":
        raise ValueError("bad magic")
    _, n_mels, n_frames, _, _ = struct.unpack("<IIIIf", data[4:24])
    values = np.frombuffer(data, dtype="<f4", count=n_mels * n_frames, offset=24)
    return values.reshape(n_mels, n_frames)


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def generate(out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    extractor = reference_extractor()
    fixtures = []
    for r in RECIPES:
        x = synthesize(r)
        wav = out_dir / f"{r['name']}.wav"
        golden = out_dir / f"{r['name']}.epk"
        wavfile.write(wav, SR, x)
        golden.write_bytes(encode_epk(log_mel(extractor, x), len(x) / SR))
        recipe = {k: v for k, v in r.items() if k != "name"}
        fixtures.append({"name": r["name"], "recipe": recipe, "wav": wav.name, "golden": golden.name,
                         "wav_sha256": sha256(wav), "golden_sha256": sha256(golden)})
    import transformers
    index = {"reference": f"transformers {transformers.__version__} WhisperFeatureExtractor (numpy path)",
             "sample_rate": SR, "fixtures": fixtures}
    (out_dir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    return index


def compare(primary_dir, golden_dir, tolerance=1e-4):
    index = json.loads((golden_dir / "index.json").read_text())
    failed = 0
    for f in index["fixtures"]:
        expected = decode_epk((golden_dir / f["golden"]).read_bytes())
        actual = decode_epk((primary_dir / f["golden"]).read_bytes())
        if expected.shape != actual.shape:
            print(f"{f['name']}: shape mismatch {actual.shape} vs {expected.shape}")
            failed += 1
            continue
        diff = float(np.max(np.abs(expected - actual))) if expected.size else 0.0
        ok = diff <= tolerance
        failed += not ok
        print(f"{f['name']}: max_abs_diff={diff:.3e} {'pass' if ok else 'FAIL'}")
    return failed


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden"
    parser.add_argument("out_dir", nargs="?", type=pathlib.Path, default=default_out)
    parser.add_argument("--compare", type=pathlib.Path, help="directory of primary EPK1 outputs")
    args = parser.parse_args()
    if args.compare:
        sys.exit(1 if compare(args.compare, args.out_dir) else 0)
    index = generate(args.out_dir)
    print(f"wrote {len(index['fixtures'])} fixtures to {args.out_dir}")


if __name__ == "__main__":
    main()
