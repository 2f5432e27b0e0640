"""Command-line interface.

Every failure exits non-zero with one line on stderr of the form
``error: <kind>: <message>``, where ``kind`` is one of ``missing-file``,
``unsupported-format``, ``malformed-header``, ``shape-mismatch``, ``config``,
``degenerate-input``, ``invalid-argument``, ``training`` or ``io``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import fdlp, metrics, roomsim
from .container import ContainerFormatError, read_container, write_container
from .dplstm import DplstmParams, TrainConfig, enhance, gradient_check, init_params, train
from .exceptions import (DegenerateInputError, InvalidArgumentError, NonFiniteLossError, ShapeMismatchError,
                         UnsupportedFormatError)
from .sigproc import AudioSignal, SegmentGrid, desegment, segment
from .wavio import read_wav, write_wav

logger = logging.getLogger("fdlp_dereverb")

GRADCHECK_TOLERANCE = 1e-4


def _write_audio(path, signal, args):
    write_wav(path, signal, pcm16=getattr(args, "pcm16", False),
              dither=getattr(args, "pcm16", False), seed=getattr(args, "seed", 0) or 0)


def cmd_rir_gen(args):
    spec = roomsim.ReverbSpec(args.t60, None, args.seed, args.length)
    rir = roomsim.rir_generate(spec, args.boundary_ms)
    out = Path(args.out)
    write_wav(out, AudioSignal(rir.samples, rir.sample_rate))
    meta = {"t60": args.t60, "seed": args.seed, "length_s": args.length,
            "sample_rate": rir.sample_rate, "early_late_boundary": rir.early_late_boundary,
            "estimated_t60": roomsim.estimate_t60(rir)}
    out.with_name(out.name + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} (t60 {args.t60} s, seed {args.seed})")


def cmd_corpus(args):
    cfg = cfgmod.load_config(args.config, {
        "roomsim.t60_set": tuple(args.t60) if args.t60 else None,
        "roomsim.snr_db": args.snr, "roomsim.seed": args.seed})
    t60_set = cfg["roomsim.t60_set"]
    snr = None if args.no_noise else cfg["roomsim.snr_db"]
    base = cfg["roomsim.seed"]
    if args.pairing == "zip":
        n_files = len(sorted(Path(args.clean_dir).glob("*.wav")))
        specs = [roomsim.ReverbSpec(t60_set[i % len(t60_set)], snr, base + i,
                                    cfg["roomsim.rir_length"]) for i in range(n_files)]
    else:
        specs = [roomsim.ReverbSpec(t60, snr, base + j, cfg["roomsim.rir_length"])
                 for j, t60 in enumerate(t60_set)]
    records = roomsim.build_corpus(args.clean_dir, specs, args.out_dir, args.pairing)
    print(f"wrote {len(records)} pairs to {Path(args.out_dir) / 'manifest.tsv'}")


def cmd_decompose(args):
    cfg = cfgmod.load_config(args.config, {"fdlp.lp_order": args.lp_order})
    signal = read_wav(args.input)
    fcfg = fdlp.FdlpConfig(cfg["fdlp.lp_order"])
    parts = [fdlp.decompose(s, cfg=fcfg) for s in segment(signal, SegmentGrid(signal.sample_rate))]
    tensors = {
        "log_env": np.stack([p.log_env for p in parts], axis=-1),
        "carrier": np.stack([p.carrier for p in parts], axis=-1),
        "degenerate": np.stack([p.degenerate for p in parts], axis=-1).astype(np.float32),
    }
    meta = {"length": len(signal), "sample_rate": signal.sample_rate,
            "lp_order": fcfg.lp_order, "n_segments": len(parts)}
    write_container(args.output, tensors, meta, kind="subband-dump")
    print(f"wrote {args.output} ({len(parts)} segments)")


def cmd_synthesize(args):
    tensors, meta, kind = read_container(args.input)
    if kind != "subband-dump":
        raise ContainerFormatError(f"{args.input}: container kind {kind!r} is not a sub-band dump")
    log_env, carrier = tensors.get("log_env"), tensors.get("carrier")
    if log_env is None or carrier is None or log_env.shape != carrier.shape or log_env.ndim != 3:
        raise ShapeMismatchError(f"{args.input}: needs matching 3-D log_env and carrier tensors")
    segs = [fdlp.recompose(fdlp.EnvelopeCarrier(log_env[..., k].astype(np.float64),
                                                carrier[..., k].astype(np.float64),
                                                np.zeros(log_env.shape[0], bool)))
            for k in range(log_env.shape[-1])]
    length = int(meta.get("length", len(segs) * segs[0].size))
    signal = AudioSignal(desegment(np.stack(segs), length), int(meta.get("sample_rate", 16000)))
    _write_audio(args.output, signal, args)
    print(f"wrote {args.output}")


def _train_config(args) -> TrainConfig:
    cfg = cfgmod.load_config(args.config, {
        "train.lambda": args.lam, "train.seed": args.seed, "train.epochs": args.epochs,
        "train.learning_rate": args.learning_rate, "train.batch_size": args.batch_size,
        "dplstm.hidden_size": args.hidden_size, "fdlp.lp_order": args.lp_order})
    return TrainConfig(lam=cfg["train.lambda"], learning_rate=cfg["train.learning_rate"],
                       epochs=cfg["train.epochs"], batch_size=cfg["train.batch_size"],
                       seed=cfg["train.seed"], hidden_size=cfg["dplstm.hidden_size"],
                       lp_order=cfg["fdlp.lp_order"], clip_norm=cfg["train.clip_norm"],
                       checkpoint_path=args.out)


def cmd_train(args):
    tcfg = _train_config(args)
    params, history = train(tcfg, manifest=args.manifest)
    params.save(args.out)
    hist = Path(args.history) if args.history else Path(args.out).with_suffix(".history.tsv")
    history.write(hist)
    print(f"wrote {args.out} and {hist}; final loss {history.loss[-1]:.6f}")


def cmd_init_checkpoint(args):
    cfg = cfgmod.load_config(args.config, {"dplstm.hidden_size": args.hidden_size,
                                           "fdlp.lp_order": args.lp_order})
    params = init_params(cfg["dplstm.hidden_size"], seed=args.seed, zero_output=True)
    params.meta["lp_order"] = cfg["fdlp.lp_order"]
    params.save(args.out)
    print(f"wrote identity checkpoint {args.out}")


def cmd_dereverb(args):
    params = DplstmParams.load(args.checkpoint, dtype=np.float32)
    signal = read_wav(args.input)
    out = enhance(params, signal)
    _write_audio(args.output, out, args)
    print(f"wrote {args.output}")


def _pair_scores(clean, test, names, lp_order):
    scores = {}
    if "srmr" in names:
        scores["srmr"] = metrics.srmr(test)
    if "segsnr" in names:
        scores["segsnr"] = metrics.segmental_snr(clean, test)
    if "lsd" in names:
        cfg = fdlp.FdlpConfig(lp_order)
        grid = SegmentGrid(clean.sample_rate)
        env_c = [fdlp.decompose(s, cfg=cfg).envelope for s in segment(clean, grid)]
        env_t = [fdlp.decompose(s, cfg=cfg).envelope for s in segment(test, grid)]
        scores["lsd"] = metrics.log_spectral_distance(np.stack(env_c), np.stack(env_t))
    return scores


def cmd_eval(args):
    names = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(names) - {"srmr", "segsnr", "lsd"}
    if unknown:
        raise InvalidArgumentError(f"unknown metrics {sorted(unknown)}")
    params = DplstmParams.load(args.checkpoint, np.float32) if args.checkpoint else None
    report = metrics.MetricReport()
    if args.manifest:
        pairs = [(r.clean_path, r.reverb_path) for r in roomsim.read_manifest(args.manifest)]
    elif args.ref and args.test:
        pairs = [(args.ref, args.test)]
    else:
        raise InvalidArgumentError("give --manifest or both --ref and --test")

    def score(pair):
        clean_path, test_path = pair
        clean, test = read_wav(clean_path), read_wav(test_path)
        if len(clean) != len(test):
            raise ShapeMismatchError(f"{clean_path} and {test_path} differ in length")
        if params is not None:
            test = enhance(params, test)
        return Path(test_path).name, _pair_scores(clean, test, names, args.lp_order)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for name, scores in pool.map(score, pairs):
            report.add(name, scores)
    for line in report.to_lines():
        print(line)
    for key, value in report.means().items():
        print(f"mean.{key} = {value:.6f}")
    if args.report:
        report.write(args.report)


def cmd_gradcheck(args):
    errors = gradient_check(seed=args.seed)
    ok = True
    for group, err in errors.items():
        passed = err <= GRADCHECK_TOLERANCE
        ok &= passed
        print(f"{group}\t{err:.3e}\t{'PASS' if passed else 'FAIL'}")
    print("gradcheck " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdlp-dereverb",
        description="Sub-band envelope/carrier speech dereverberation.",
        epilog="configuration keys and defaults:\n" + cfgmod.describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rir-gen", help="generate a synthetic room impulse response")
    p.add_argument("--t60", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=float, default=1.0, help="seconds (default 1.0)")
    p.add_argument("--boundary-ms", type=float, default=50.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rir_gen)

    p = sub.add_parser("corpus", help="build clean/reverberant pairs and a manifest")
    p.add_argument("--clean-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--t60", type=float, nargs="+", help="default 0.2 ... 0.8")
    p.add_argument("--snr", type=float, help="additive noise SNR in dB (default 20)")
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--pairing", choices=("cross", "zip"), default="cross")
    p.add_argument("--config")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("decompose", help="WAV -> envelope/carrier tensor dump")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--lp-order", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synthesize", help="envelope/carrier tensor dump -> WAV")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--pcm16", action="store_true", help="write dithered 16-bit PCM")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("train", help="train the dual-path model from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="checkpoint path (rewritten every epoch)")
    p.add_argument("--history")
    p.add_argument("--config")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--hidden-size", type=int)
    p.add_argument("--lp-order", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("init-checkpoint", help="write an untrained identity checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden-size", type=int)
    p.add_argument("--lp-order", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_init_checkpoint)

    p = sub.add_parser("dereverb", help="enhance a WAV with a trained checkpoint")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pcm16", action="store_true", help="write dithered 16-bit PCM")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dereverb)

    p = sub.add_parser("eval", help="score a manifest or a reference/test pair")
    p.add_argument("--manifest")
    p.add_argument("--ref")
    p.add_argument("--test")
    p.add_argument("--checkpoint", help="enhance the test signals first")
    p.add_argument("--metrics", default="srmr,segsnr,lsd")
    p.add_argument("--lp-order", type=int, default=30)
    p.add_argument("--report", help="write a table here plus a .summary file")
    p.add_argument("--jobs", type=int, default=1, help="files scored concurrently (default 1)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of the model gradients")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def _error_kind(exc) -> str:
    if isinstance(exc, FileNotFoundError):
        return "missing-file"
    if isinstance(exc, UnsupportedFormatError):
        return "unsupported-format"
    if isinstance(exc, ContainerFormatError):
        return "malformed-header"
    if isinstance(exc, cfgmod.ConfigError):
        return "config"
    if isinstance(exc, NonFiniteLossError):
        return "training"
    if isinstance(exc, DegenerateInputError):
        return "degenerate-input"
    if isinstance(exc, OSError):
        return "io"
    if isinstance(exc, ShapeMismatchError):
        return "shape-mismatch"
    return "invalid-argument"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        code = args.func(args)
    except (OSError, ValueError, NonFiniteLossError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {_error_kind(exc)}: {message}", file=sys.stderr)
        return 1
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
