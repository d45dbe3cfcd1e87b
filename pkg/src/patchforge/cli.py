"""Command-line surface.

Verbs: augment, sweep, stats, metrics, subsample, validate. A JSON config
file is the source of truth for augmentation parameters; ``--set key=value``
entries override config values and dedicated flags override both. Exit codes
are stable for scripting: 0 success, 1 configuration or usage error,
2 partial data failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from patchforge import pipeline, quality
from patchforge.augments import AugmentConfig
from patchforge.maskgen import ConfigError
from patchforge.pipeline import SweepGrid


class UsageError(ValueError):
    """Bad flags or config; maps to exit code 1."""


def _default_workers() -> int:
    env = os.environ.get("PATCHFORGE_WORKERS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"PATCHFORGE_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _parse_overrides(pairs) -> dict:
    """Turn k=v strings (dotted keys, JSON-ish values) into a nested dict."""
    merged: dict = {}
    for raw in pairs or ():
        if "=" not in raw:
            raise UsageError(f"override must look like key=value, got {raw!r}")
        key, value = raw.split("=", 1)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = merged
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = parsed
    return merged


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _load_config(args) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                cfg = json.load(f)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} line {exc.lineno}: {exc.msg}")
        if not isinstance(cfg, dict):
            raise UsageError(f"config {path} must be a JSON object")
    return _merge(cfg, _parse_overrides(getattr(args, "set", None)))


_CONFIG_KEYS = {"strategy", "mask", "direction", "fill_value", "mixup_alpha",
                "noise_sigma", "apply_probability", "copies_per_sample", "seed"}
_MASK_KEYS = {"mp_max", "beta_max", "n_patches", "shape", "intensity_mode"}


def _check_config_fields(cfg: dict) -> None:
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    mask = cfg.get("mask")
    if isinstance(mask, dict):
        unknown = set(mask) - _MASK_KEYS
        if unknown:
            raise UsageError(
                f"unknown mask field(s): {', '.join(sorted(unknown))}")


def _resolve_manifest(args) -> pipeline.DatasetManifest:
    if getattr(args, "manifest", None):
        return pipeline.load_manifest(args.manifest)
    if getattr(args, "input_dir", None) and getattr(args, "gt_dir", None):
        return pipeline.scan(args.input_dir, args.gt_dir,
                             pairing_rule=getattr(args, "pairing", "same_filename"))
    raise UsageError("provide --manifest or both --in and --gt")


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _cmd_augment(args) -> int:
    cfg_dict = _load_config(args)
    _check_config_fields(cfg_dict)
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.copies is not None:
        cfg_dict["copies_per_sample"] = args.copies
    if "seed" not in cfg_dict:
        raise UsageError("augment needs a seed (--seed or config)")
    seed = int(cfg_dict.pop("seed"))
    copies = int(cfg_dict.pop("copies_per_sample", 1))
    try:
        cfg = AugmentConfig.from_dict(cfg_dict)
    except (ConfigError, KeyError, ValueError) as exc:
        raise UsageError(f"bad augment config: {exc}")
    manifest = _resolve_manifest(args)
    summary = pipeline.run_augmentation(
        manifest, cfg, copies_per_sample=copies, master_seed=seed,
        out_dir=args.out, workers=args.workers)
    payload = summary.to_dict()
    payload["warnings"] = list(manifest.warnings)
    text = (f"augmented {summary.outputs} samples "
            f"({summary.entries} entries x {copies} copies, "
            f"{summary.failures} failures) -> {args.out}\n"
            f"mean coverage {summary.mean_coverage:.4f}, "
            f"{summary.elapsed_seconds:.2f}s")
    _emit(args, payload, text)
    return 2 if summary.failures else 0


def _cmd_sweep(args) -> int:
    try:
        scales = tuple(float(s) for s in args.scales.split(",") if s)
    except ValueError:
        raise UsageError(f"malformed --scales list: {args.scales!r}")
    strategies = tuple(s for s in args.strategies.split(",") if s)
    try:
        grid = SweepGrid(scales=scales, strategies=strategies,
                         samples_per_cell=args.samples_per_cell)
    except ValueError as exc:
        raise UsageError(str(exc))
    manifest = _resolve_manifest(args)
    report = pipeline.sweep(manifest, grid, master_seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.csv").write_text(report.to_csv(), encoding="utf-8")
    with open(out_dir / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    failed = [c for c in report.cells if c.error]
    _emit(args, report.to_dict(), report.to_csv().rstrip("\n"))
    return 2 if failed else 0


def _cmd_stats(args) -> int:
    manifest = _resolve_manifest(args)
    stats = pipeline.dataset_stats(manifest, name=args.name, workers=args.workers)
    text = stats.header() + "\n" + stats.render_row()
    _emit(args, stats.to_dict(), text)
    return 0


def _cmd_metrics(args) -> int:
    manifest = pipeline.scan(args.input_dir, args.gt_dir,
                             pairing_rule=getattr(args, "pairing", "same_filename"))
    if manifest.warnings:
        for w in manifest.warnings:
            print(f"error: {w}", file=sys.stderr)
        raise UsageError(f"{len(manifest.warnings)} unpaired or invalid files")

    def stream_pairs():
        for entry in manifest.entries:
            sample = pipeline.load_pair(manifest, entry)
            yield sample.input, sample.target

    report = quality.batch_report(stream_pairs(),
                                  ids=[e.id for e in manifest.entries])
    _emit(args, report.to_dict(), report.render())
    return 0


def _cmd_subsample(args) -> int:
    manifest = _resolve_manifest(args)
    try:
        selected = pipeline.subsample(manifest, args.fraction, args.seed)
    except pipeline.EmptySelectionError as exc:
        raise UsageError(str(exc))
    pipeline.save_manifest(selected, args.out)
    payload = {
        "selected": len(selected.entries),
        "total": len(manifest.entries),
        "fingerprint": selected.fingerprint,
        "out": str(args.out),
    }
    _emit(args, payload,
          f"selected {len(selected.entries)}/{len(manifest.entries)} entries "
          f"-> {args.out}")
    return 0


def _cmd_validate(args) -> int:
    manifest = _resolve_manifest(args)
    violations = {}
    for w in manifest.warnings:
        violations.setdefault("(scan)", []).append(w)
    for entry in manifest.entries:
        try:
            pipeline.load_pair(manifest, entry)
        except Exception as exc:
            violations[entry.id] = getattr(exc, "violations", [str(exc)])
    payload = {
        "entries": len(manifest.entries),
        "invalid": len(violations),
        "violations": violations,
    }
    if violations:
        lines = [f"{k}: {'; '.join(v)}" for k, v in sorted(violations.items())]
        _emit(args, payload, "\n".join(lines))
        return 2
    _emit(args, payload, f"all {len(manifest.entries)} pairs valid")
    return 0


def _add_dataset_flags(sub, manifest_ok: bool = True) -> None:
    sub.add_argument("--in", dest="input_dir", help="degraded input directory")
    sub.add_argument("--gt", dest="gt_dir", help="clean ground-truth directory")
    if manifest_ok:
        sub.add_argument("--manifest", help="manifest JSON instead of directories")
    sub.add_argument("--pairing", choices=("same_filename", "sorted_order"),
                     default="same_filename")
    sub.add_argument("--json", action="store_true",
                     help="emit a JSON report on stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchforge",
        description="Paired-image augmentation, metrics, and sweep harness")
    subs = parser.add_subparsers(dest="verb", required=True)

    p = subs.add_parser("augment", help="materialize an augmented dataset")
    _add_dataset_flags(p)
    p.add_argument("--config", help="augmentation config JSON")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config value (dotted keys, e.g. mask.mp_max=0.1)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="master seed (required here or in config)")
    p.add_argument("--copies", type=int, help="augmented copies per entry")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_augment)

    p = subs.add_parser("sweep", help="statistics over a strategy/scale grid")
    _add_dataset_flags(p)
    p.add_argument("--scales", required=True, help="comma list, e.g. 0.05,0.1,0.2")
    p.add_argument("--strategies", required=True,
                   help="comma list, e.g. copy_blend,cut_blur")
    p.add_argument("--samples-per-cell", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="directory for sweep.csv/sweep.json")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("stats", help="dataset property report")
    _add_dataset_flags(p)
    p.add_argument("--name", default="dataset")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_stats)

    p = subs.add_parser("metrics", help="PSNR/SSIM between two image directories")
    p.add_argument("--in", dest="input_dir", required=True)
    p.add_argument("--gt", dest="gt_dir", required=True)
    p.add_argument("--pairing", choices=("same_filename", "sorted_order"),
                   default="same_filename")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_metrics)

    p = subs.add_parser("subsample", help="deterministic nested subsampling")
    _add_dataset_flags(p)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output manifest path")
    p.set_defaults(func=_cmd_subsample)

    p = subs.add_parser("validate", help="check pair dimensions and ranges")
    _add_dataset_flags(p)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; our contract reserves 2 for
        # partial data failures, so remap.
        return 0 if exc.code in (0, None) else 1
    try:
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = _default_workers()
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, pipeline.EmptyDatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
