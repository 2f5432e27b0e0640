"""Synthetic reverberation: exponentially decaying noise RIRs, reverberant
pair generation and numeric probes of the sub-band envelope model."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import qmf
from .exceptions import InvalidArgumentError, UnsupportedFormatError
from .sigproc import DEFAULT_SAMPLE_RATE, AudioSignal, convolve, hilbert_envelope

logger = logging.getLogger(__name__)

DEFAULT_T60_SET = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
MANIFEST_FIELDS = ("clean_path", "reverb_path", "t60", "snr_db", "seed")
# Noise is drawn from a separate stream so it never repeats the RIR draw of the same seed.
_NOISE_STREAM = 1


@dataclass(frozen=True)
class ReverbSpec:
    t60: float
    snr_db: float | None = 20.0
    seed: int = 0
    rir_length: float = 1.0
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if not self.t60 > 0:
            raise InvalidArgumentError(f"t60 must be positive, got {self.t60}")
        if self.rir_length < self.t60 / 2:
            raise InvalidArgumentError("rir_length must be at least t60 / 2")


@dataclass(frozen=True)
class RoomImpulseResponse:
    samples: np.ndarray
    sample_rate: int
    t60: float
    early_late_boundary: int

    def __post_init__(self):
        if not self.t60 > 0:
            raise InvalidArgumentError("t60 must be positive")
        if not 0 <= self.early_late_boundary <= len(self.samples):
            raise InvalidArgumentError("early/late boundary outside the RIR")

    def __len__(self):
        return len(self.samples)


def rir_generate(spec: ReverbSpec, boundary_ms: float = 50.0) -> RoomImpulseResponse:
    """Direct path of 1 followed by Gaussian noise decaying 60 dB over ``t60``."""
    fs = spec.sample_rate
    n = int(round(spec.rir_length * fs))
    rng = np.random.default_rng(spec.seed)
    idx = np.arange(n)
    r = rng.standard_normal(n) * 10.0 ** (-3.0 * idx / (spec.t60 * fs))
    r[0] = 1.0
    boundary = min(n, int(round(boundary_ms * 1e-3 * fs)))
    return RoomImpulseResponse(r, fs, spec.t60, boundary)


def delta_rir(length: int = 1, delay: int = 0, sample_rate: int = DEFAULT_SAMPLE_RATE,
              t60: float = 1e-3) -> RoomImpulseResponse:
    """Unit impulse at ``delay``; the identity room."""
    r = np.zeros(max(length, delay + 1))
    r[delay] = 1.0
    return RoomImpulseResponse(r, sample_rate, t60, 0)


def split_early_late(rir: RoomImpulseResponse, boundary_ms: float = 50.0):
    """Partition the RIR into zero-padded early and late parts.

    Both parts have the full RIR length so that ``early + late == rir``.
    """
    boundary = int(round(boundary_ms * 1e-3 * rir.sample_rate))
    if boundary_ms < 0 or boundary > len(rir):
        raise InvalidArgumentError(f"boundary {boundary_ms} ms outside RIR of {len(rir)} samples")
    early = np.zeros_like(rir.samples)
    late = np.zeros_like(rir.samples)
    early[:boundary] = rir.samples[:boundary]
    late[boundary:] = rir.samples[boundary:]
    return early, late


def schroeder_decay_db(rir) -> np.ndarray:
    """Backward-integrated energy decay curve in dB (0 dB at n = 0)."""
    r = rir.samples if isinstance(rir, RoomImpulseResponse) else np.asarray(rir, float)
    edc = np.cumsum(r[::-1] ** 2)[::-1]
    return 10 * np.log10(np.maximum(edc / edc[0], 1e-300))


def decay_slope_db_per_s(rir: RoomImpulseResponse, start_db: float = -5.0,
                         stop_db: float = -35.0) -> float:
    """Least-squares slope of the Schroeder curve between two levels."""
    edc = schroeder_decay_db(rir)
    sel = np.flatnonzero((edc <= start_db) & (edc >= stop_db))
    if sel.size < 2:
        raise InvalidArgumentError("decay curve does not span the fit range")
    t = sel / rir.sample_rate
    return float(np.polyfit(t, edc[sel], 1)[0])


def estimate_t60(rir: RoomImpulseResponse) -> float:
    return -60.0 / decay_slope_db_per_s(rir)


def apply_reverb(clean: AudioSignal, rir: RoomImpulseResponse, snr_db: float | None = None,
                 seed: int = 0, return_scale: bool = False):
    """Convolve with the RIR, truncate to the clean length and add noise.

    Noise is seeded white Gaussian scaled so the realised SNR equals
    ``snr_db``. If the result clips it is scaled to a peak of 1; the applied
    factor is returned when ``return_scale`` is set.
    """
    if clean.sample_rate != rir.sample_rate:
        raise InvalidArgumentError(
            f"sample rate mismatch: signal {clean.sample_rate} Hz, RIR {rir.sample_rate} Hz")
    y = convolve(clean.samples, rir.samples)[:len(clean)]
    if snr_db is not None:
        rng = np.random.default_rng([seed, _NOISE_STREAM])
        noise = rng.standard_normal(y.size)
        sig_power = np.mean(y * y)
        noise *= np.sqrt(sig_power / (np.mean(noise * noise) * 10 ** (snr_db / 10)))
        y = y + noise
    scale = 1.0
    peak = np.max(np.abs(y))
    if peak > 1.0:
        scale = 1.0 / peak
        y = y * scale
    out = AudioSignal(y, clean.sample_rate)
    return (out, scale) if return_scale else out


def _rir_envelope(r: np.ndarray, n_frames: int, decimation: int) -> np.ndarray:
    # Broadband RIR energy per sub-band sample period; a unit impulse maps to a
    # unit impulse. The factor 2 undoes the 1/2 of the analytic convolution.
    total = n_frames * decimation
    padded = np.zeros(total)
    m = min(total, r.size)
    padded[:m] = r[:m]
    return 2.0 * np.sum(padded.reshape(n_frames, decimation) ** 2, axis=1)


def envelope_model_error(clean: AudioSignal, rir: RoomImpulseResponse, band_index: int,
                         proto: qmf.QmfPrototype | None = None) -> float:
    """Relative L2 error of the sub-band envelope convolution model.

    Compares the Hilbert envelope of band ``band_index`` of the reverberant
    signal against ``0.5 * (clean band envelope * RIR envelope)``; both are
    normalised to unit sum first. Only probes the model, it is not part of the
    processing chain.
    """
    x = clean.samples
    if x.size % qmf.N_BANDS:
        raise InvalidArgumentError("clean segment length must be a multiple of 64")
    if not 0 <= band_index < qmf.N_BANDS:
        raise InvalidArgumentError(f"band_index must be in [0, 64), got {band_index}")
    y = convolve(x, rir.samples)[:x.size]
    e_x = hilbert_envelope(qmf.analyze(x, proto)[band_index])
    e_y = hilbert_envelope(qmf.analyze(y, proto)[band_index])
    n_frames = e_x.size
    e_r = _rir_envelope(rir.samples, n_frames, x.size // n_frames)
    model = 0.5 * convolve(e_x, e_r)[:n_frames]
    e_y = e_y / np.sum(e_y)
    model = model / np.sum(model)
    return float(np.linalg.norm(e_y - model) / np.linalg.norm(e_y))


def envelope_additivity_error(clean: AudioSignal, rir: RoomImpulseResponse, band_index: int,
                              boundary_ms: float = 50.0,
                              proto: qmf.QmfPrototype | None = None) -> float:
    """Relative error of ``env(x*r_e) + env(x*r_l)`` against ``env(x*r)``."""
    x = clean.samples
    early, late = split_early_late(rir, boundary_ms)

    def band_env(h):
        y = convolve(x, h)[:x.size] if np.any(h) else np.zeros_like(x)
        return hilbert_envelope(qmf.analyze(y, proto)[band_index])

    full = band_env(rir.samples)
    approx = band_env(early) + band_env(late)
    return float(np.linalg.norm(full - approx) / np.linalg.norm(full))


@dataclass(frozen=True)
class ManifestRecord:
    clean_path: str
    reverb_path: str
    t60: float
    snr_db: float | None
    seed: int


def write_manifest(path, records) -> Path:
    """Tab-separated manifest, one pair per line, fixed field order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("# " + "\t".join(MANIFEST_FIELDS) + "\n")
        for rec in records:
            snr = "none" if rec.snr_db is None else repr(float(rec.snr_db))
            fh.write(f"{rec.clean_path}\t{rec.reverb_path}\t{float(rec.t60)!r}\t{snr}\t{rec.seed}\n")
    return path


def read_manifest(path) -> list[ManifestRecord]:
    path = Path(path)
    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != len(MANIFEST_FIELDS):
                raise InvalidArgumentError(
                    f"{path}:{lineno}: expected {len(MANIFEST_FIELDS)} fields, got {len(row)}")
            clean, reverb, t60, snr, seed = row
            records.append(ManifestRecord(
                _resolve(path, clean), _resolve(path, reverb), float(t60),
                None if snr == "none" else float(snr), int(seed)))
    return records


def _resolve(manifest_path: Path, entry: str) -> str:
    p = Path(entry)
    return str(p if p.is_absolute() else manifest_path.parent / p)


def build_corpus(clean_dir, spec_list, out_dir, pairing: str = "cross",
                 manifest_name: str = "manifest.tsv") -> list[ManifestRecord]:
    """Write clean/reverberant WAV pairs plus a manifest.

    ``pairing="cross"`` applies every spec to every clean file;
    ``pairing="zip"`` pairs the i-th clean file with the i-th spec (specs are
    cycled if there are fewer of them). Files with the wrong sample rate or
    format are skipped with a logged reason. Paths in the manifest are
    relative to ``out_dir``.
    """
    from .wavio import read_wav, write_wav

    clean_dir, out_dir = Path(clean_dir), Path(out_dir)
    spec_list = list(spec_list)
    if not spec_list:
        raise InvalidArgumentError("spec_list is empty")
    files = sorted(clean_dir.glob("*.wav"))
    if pairing == "cross":
        jobs = [(f, s) for f in files for s in spec_list]
    elif pairing == "zip":
        jobs = [(f, spec_list[i % len(spec_list)]) for i, f in enumerate(files)]
    else:
        raise InvalidArgumentError(f"unknown pairing {pairing!r}")

    records = []
    clean_cache: dict[Path, AudioSignal | None] = {}
    for path, spec in jobs:
        if path not in clean_cache:
            try:
                clean_cache[path] = read_wav(path)
            except UnsupportedFormatError as exc:
                logger.warning("skipping %s: %s", path, exc)
                clean_cache[path] = None
            else:
                write_wav(out_dir / "clean" / path.name, clean_cache[path])
        clean = clean_cache[path]
        if clean is None:
            continue
        rir = rir_generate(spec)
        reverb = apply_reverb(clean, rir, spec.snr_db, seed=spec.seed)
        name = f"{path.stem}_t60-{spec.t60:.2f}_seed-{spec.seed}.wav"
        write_wav(out_dir / "reverb" / name, reverb)
        records.append(ManifestRecord(f"clean/{path.name}", f"reverb/{name}",
                                      spec.t60, spec.snr_db, spec.seed))
    write_manifest(out_dir / manifest_name, records)
    return records
