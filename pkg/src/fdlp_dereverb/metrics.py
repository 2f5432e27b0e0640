"""Objective quality metrics.

``srmr`` is a simplified speech-to-reverberation modulation energy ratio:
the acoustic filter bank is the package's 64-band QMF rather than a gammatone
bank and every acoustic band's modulation spectrum is normalised to unit
energy before pooling. Only comparisons between signals are meaningful, not
absolute values from other SRMR implementations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import qmf
from .exceptions import DegenerateInputError, InvalidArgumentError, ShapeMismatchError
from .sigproc import AudioSignal, SegmentGrid, analytic_signal, segment


@dataclass(frozen=True)
class SrmrConfig:
    modulation_band_centers: tuple = tuple(np.geomspace(4.0, 128.0, 8))
    low_band_count: int = 4
    q_factor: float = 2.0

    def __post_init__(self):
        centers = np.asarray(self.modulation_band_centers, dtype=float)
        if centers.ndim != 1 or np.any(np.diff(centers) <= 0):
            raise InvalidArgumentError("modulation band centres must be strictly increasing")
        if not 0 < self.low_band_count < centers.size:
            raise InvalidArgumentError("low_band_count must be in (0, number of bands)")


def modulation_energies(signal: AudioSignal, cfg: SrmrConfig | None = None,
                        proto: qmf.QmfPrototype | None = None) -> np.ndarray:
    """``(64, n_mod)`` modulation-band energies of the QMF band envelopes.

    Envelopes are Hilbert magnitudes of the concatenated sub-band signals.
    """
    cfg = cfg or SrmrConfig()
    if signal.sample_rate != 16000:
        raise InvalidArgumentError("srmr expects 16 kHz audio")
    if len(signal) < signal.sample_rate:
        raise InvalidArgumentError("srmr needs at least 1 s of audio")
    segs = segment(signal, SegmentGrid(signal.sample_rate))
    bands = np.concatenate(list(qmf.analyze(segs, proto)), axis=-1)
    env = np.abs(analytic_signal(bands))
    env_rate = signal.sample_rate / qmf.N_BANDS
    power = np.abs(np.fft.rfft(env, axis=-1)) ** 2
    freqs = np.fft.rfftfreq(env.shape[-1], 1.0 / env_rate)
    centers = np.asarray(cfg.modulation_band_centers, dtype=float)
    f = np.maximum(freqs, 1e-12)[None, :]
    response = 1.0 / (1.0 + cfg.q_factor ** 2 * (f / centers[:, None] - centers[:, None] / f) ** 2)
    response[:, freqs == 0] = 0.0
    return power @ response.T


def srmr(signal: AudioSignal, cfg: SrmrConfig | None = None,
         proto: qmf.QmfPrototype | None = None) -> float:
    """Low (first ``low_band_count``) over high modulation-band energy.

    Higher means less reverberant. Raises ``DegenerateInputError`` on silence.
    """
    cfg = cfg or SrmrConfig()
    per_band = modulation_energies(signal, cfg, proto)
    totals = per_band.sum(axis=1)
    live = totals > 0
    if not np.any(live):
        raise DegenerateInputError("no modulation energy (silent input)")
    energy = (per_band[live] / totals[live, None]).sum(axis=0)
    high = energy[cfg.low_band_count:].sum()
    if not high > 0:
        raise DegenerateInputError("no high modulation energy")
    return float(energy[:cfg.low_band_count].sum() / high)


def segmental_snr(reference, test, frame_ms: float = 32.0, sample_rate: int = 16000,
                  floor_db: float = -10.0, ceil_db: float = 35.0) -> float:
    """Mean per-frame SNR in dB, each frame clamped to ``[floor_db, ceil_db]``.

    Frames where the reference is exactly zero are skipped.
    """
    ref = reference.samples if isinstance(reference, AudioSignal) else np.asarray(reference, float)
    tst = test.samples if isinstance(test, AudioSignal) else np.asarray(test, float)
    if ref.shape != tst.shape:
        raise ShapeMismatchError(f"length mismatch {ref.shape} vs {tst.shape}")
    frame = max(1, int(round(frame_ms * 1e-3 * sample_rate)))
    n_frames = ref.size // frame
    if n_frames == 0:
        raise InvalidArgumentError("signal shorter than one frame")
    r = ref[:n_frames * frame].reshape(n_frames, frame)
    e = r - tst[:n_frames * frame].reshape(n_frames, frame)
    sig_pow = np.sum(r * r, axis=1)
    err_pow = np.sum(e * e, axis=1)
    keep = sig_pow > 0
    if not np.any(keep):
        raise DegenerateInputError("reference is silent")
    with np.errstate(divide="ignore"):
        snr = 10 * np.log10(sig_pow[keep] / err_pow[keep])
    return float(np.mean(np.clip(snr, floor_db, ceil_db)))


def log_spectral_distance(env_a, env_b) -> float:
    """RMS difference of natural-log envelopes."""
    a = np.asarray(env_a, dtype=np.float64)
    b = np.asarray(env_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    if not (np.all(a > 0) and np.all(b > 0)):
        raise InvalidArgumentError("envelopes must be strictly positive")
    return float(np.sqrt(np.mean((np.log(a) - np.log(b)) ** 2)))


@dataclass
class MetricReport:
    """Per-item scores and their means.

    ``rows`` holds ``(item_name, {metric: value})`` in insertion order.
    """

    rows: list = field(default_factory=list)

    def add(self, name: str, scores: dict):
        for key, value in scores.items():
            if not np.isfinite(value):
                raise InvalidArgumentError(f"{name}: non-finite {key} = {value}")
        self.rows.append((name, dict(scores)))

    @property
    def metrics(self) -> list:
        names = []
        for _, scores in self.rows:
            names += [k for k in scores if k not in names]
        return names

    def means(self) -> dict:
        return {m: float(np.mean([s[m] for _, s in self.rows if m in s])) for m in self.metrics}

    def to_lines(self) -> list:
        metrics = self.metrics
        lines = ["item\t" + "\t".join(metrics)]
        for name, scores in self.rows:
            lines.append(name + "\t" + "\t".join(
                f"{scores[m]:.6f}" if m in scores else "nan" for m in metrics))
        return lines

    def write(self, path, summary_path=None):
        """Write the per-item table and a ``key = value`` summary of means."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.to_lines()) + "\n")
        summary_path = Path(summary_path) if summary_path else path.with_suffix(".summary")
        means = self.means()
        summary = [f"count = {len(self.rows)}"] + [f"mean.{k} = {v!r}" for k, v in means.items()]
        summary_path.write_text("\n".join(summary) + "\n")
        return path, summary_path
