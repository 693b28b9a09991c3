"""Command-line entry points: `rvad vad`, `rvad denoise`, `rvad eval`.

Exit codes: 0 on full success, 1 when any per-file step failed, 2 on usage
errors (bad flags, unknown config keys, unpairable inputs).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .audio_io import FrameLabels, read_labels, read_wav, write_labels, write_wav
from .metrics import aggregate, count_errors, rates_from_counts
from .vad import ENHANCERS, MODES, THRESHOLD_BASES, RvadConfig, run_batch, run_denoise, run_rvad

_CHOICES = {
    "mode": MODES,
    "enhance": ENHANCERS,
    "he_threshold_basis": THRESHOLD_BASES,
}

# accepted config-file spellings for awkward keys
_KEY_ALIASES = {"he_threshold": "he_threshold_basis"}

_CONFIG_FIELDS = {f.name: type(f.default) for f in fields(RvadConfig)}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline configuration overrides")
    group.add_argument("--config", metavar="PATH", help="key = value file applied before flags")
    for name, ftype in _CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        if name in _CHOICES:
            group.add_argument(flag, choices=_CHOICES[name], default=None)
        else:
            group.add_argument(flag, type=ftype, default=None, metavar=ftype.__name__.upper())


def _parse_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        key = _KEY_ALIASES.get(key, key)
        values[key] = value.strip("\"'")
    return values


def _build_config(args, parser: argparse.ArgumentParser) -> RvadConfig:
    values = {}
    if args.config:
        try:
            raw = _parse_config_file(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for key, text in raw.items():
            if key not in _CONFIG_FIELDS:
                parser.error(f"unknown config key: {key}")
            try:
                values[key] = _CONFIG_FIELDS[key](text) if key not in _CHOICES else text
            except ValueError:
                parser.error(f"bad value for config key {key}: {text!r}")
    for name in _CONFIG_FIELDS:
        flag_value = getattr(args, name)
        if flag_value is not None:
            values[name] = flag_value
    try:
        return RvadConfig(**values)
    except ValueError as exc:
        parser.error(str(exc))


def _input_wavs(spec: str, parser: argparse.ArgumentParser) -> list[str]:
    path = Path(spec)
    if path.suffix.lower() == ".wav":
        return [str(path)]
    try:
        lines = [line.strip() for line in path.read_text().splitlines()]
    except OSError as exc:
        parser.error(f"cannot read input list: {exc}")
    files = [line for line in lines if line and not line.startswith("#")]
    if not files:
        parser.error(f"input list {spec} names no files")
    return files


def _cmd_vad(args, parser) -> int:
    cfg = _build_config(args, parser)
    paths = _input_wavs(args.input, parser)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    voicing = None
    if args.voicing_file:
        if len(paths) != 1:
            parser.error("--voicing-file requires a single wav input")
        voicing = read_labels(args.voicing_file, cfg.frame_shift_ms, cfg.frame_len_ms).labels

    failures = 0
    if voicing is not None:
        try:
            results = [(paths[0], run_rvad(read_wav(paths[0]), cfg, voicing), None)]
        except Exception as exc:
            results = [(paths[0], None, f"{type(exc).__name__}: {exc}")]
    else:
        results = [(item.path, item.result, item.error) for item in run_batch(paths, cfg, args.workers)]

    for path, result, error in results:
        if error is not None:
            print(f"rvad: {path}: {error}", file=sys.stderr)
            failures += 1
            continue
        target = out_dir / (Path(path).stem + ".vad")
        labels = FrameLabels(result.labels, cfg.frame_shift_ms, cfg.frame_len_ms)
        write_labels(target, labels, fmt=args.labels)
    print(f"rvad: processed {len(results) - failures}/{len(results)} file(s)", file=sys.stderr)
    return 1 if failures else 0


def _cmd_denoise(args, parser) -> int:
    cfg = _build_config(args, parser)
    if args.dump_noise_floor and cfg.enhance == "none":
        parser.error("--dump-noise-floor needs --enhance msne or msne-mod")
    paths = _input_wavs(args.input, parser)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    failures = 0
    for path in paths:
        try:
            enhanced, noise = run_denoise(read_wav(path), cfg)
            stem = Path(path).stem
            write_wav(out_dir / (stem + ".wav"), enhanced)
            if args.dump_noise_floor and noise is not None:
                np.savetxt(out_dir / (stem + ".noisefloor.csv"), noise, delimiter=",")
        except Exception as exc:
            print(f"rvad: {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failures += 1
    print(f"rvad: denoised {len(paths) - failures}/{len(paths)} file(s)", file=sys.stderr)
    return 1 if failures else 0


def _label_files(spec: str, parser) -> list[Path]:
    path = Path(spec)
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.is_file())
    try:
        lines = [line.strip() for line in path.read_text().splitlines()]
    except OSError as exc:
        parser.error(f"cannot read label list: {exc}")
    return [Path(line) for line in lines if line and not line.startswith("#")]


def _pair_labels(ref_spec: str, hyp_spec: str, parser) -> list[tuple[str, Path, Path]]:
    refs = _label_files(ref_spec, parser)
    hyps = _label_files(hyp_spec, parser)
    if Path(ref_spec).is_dir() and Path(hyp_spec).is_dir():
        hyp_by_stem = {p.stem: p for p in hyps}
        pairs = []
        for ref in refs:
            if ref.stem not in hyp_by_stem:
                parser.error(f"no hypothesis labels for {ref.stem}")
            pairs.append((ref.stem, ref, hyp_by_stem[ref.stem]))
        return pairs
    if len(refs) != len(hyps):
        parser.error(f"ref and hyp lists differ in length ({len(refs)} vs {len(hyps)})")
    return [(ref.stem, ref, hyp) for ref, hyp in zip(refs, hyps)]


def _emit_report(rows: list[dict], fmt: str, stream) -> None:
    if fmt == "json-lines":
        for row in rows:
            stream.write(json.dumps(row) + "\n")
        return
    sep = "," if fmt == "csv" else "\t"
    columns = ["file", "n_frames", "p_miss", "p_fa", "fer", "dcf"]
    stream.write(sep.join(columns) + "\n")
    for row in rows:
        stream.write(
            sep.join(
                [
                    str(row["file"]),
                    str(row["n_frames"]),
                    f"{row['p_miss']:.4f}",
                    f"{row['p_fa']:.4f}",
                    f"{row['fer']:.4f}",
                    f"{row['dcf']:.6f}",
                ]
            )
            + "\n"
        )


def _cmd_eval(args, parser) -> int:
    pairs = _pair_labels(args.ref, args.hyp, parser)
    rows = []
    pooled = []
    failures = 0
    for file_id, ref_path, hyp_path in pairs:
        try:
            ref = read_labels(ref_path)
            hyp = read_labels(hyp_path)
            counts = count_errors(ref, hyp)
            rates = rates_from_counts(counts, args.gamma)
        except Exception as exc:
            print(f"rvad: {file_id}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failures += 1
            continue
        pooled.append((counts, file_id))
        rows.append(
            {
                "file": file_id,
                "n_frames": rates.n_frames,
                "p_miss": rates.p_miss,
                "p_fa": rates.p_fa,
                "fer": rates.fer,
                "dcf": rates.dcf,
            }
        )
    if pooled:
        overall = aggregate(pooled, args.gamma)
        rates = overall.pooled
        rows.append(
            {
                "file": "OVERALL",
                "n_frames": rates.n_frames,
                "p_miss": rates.p_miss,
                "p_fa": rates.p_fa,
                "fer": rates.fer,
                "dcf": rates.dcf,
            }
        )
        print(
            f"rvad: scored {len(pooled)} file(s), macro-average FER {overall.macro_fer:.2f}%",
            file=sys.stderr,
        )
    _emit_report(rows, args.report, sys.stdout)
    return 1 if failures else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rvad", description="Segment-based robust voice activity detection")
    sub = parser.add_subparsers(dest="command", required=True)

    vad = sub.add_parser("vad", help="run VAD and write per-file label files")
    vad.add_argument("--in", dest="input", required=True, metavar="WAV|LIST")
    vad.add_argument("--out", required=True, metavar="DIR")
    vad.add_argument("--labels", choices=("frames", "segments"), default="frames")
    vad.add_argument("--voicing-file", metavar="PATH", help="externally computed 0/1 voicing mask")
    vad.add_argument("--workers", type=int, default=1)
    _add_config_flags(vad)
    vad.set_defaults(func=_cmd_vad)

    den = sub.add_parser("denoise", help="write two-pass denoised wavs")
    den.add_argument("--in", dest="input", required=True, metavar="WAV|LIST")
    den.add_argument("--out", required=True, metavar="DIR")
    den.add_argument("--dump-noise-floor", action="store_true", help="also write per-frame/bin noise power CSVs")
    _add_config_flags(den)
    den.set_defaults(func=_cmd_denoise)

    ev = sub.add_parser("eval", help="score hypothesis labels against references")
    ev.add_argument("--ref", required=True, metavar="DIR|LIST")
    ev.add_argument("--hyp", required=True, metavar="DIR|LIST")
    ev.add_argument("--gamma", type=float, default=0.25)
    ev.add_argument("--report", choices=("csv", "tsv", "json-lines"), default="csv")
    ev.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    raise SystemExit(main())
