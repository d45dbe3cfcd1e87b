"""Dataset ingestion, deterministic subsampling, batch augmentation, sweeps.

A dataset is a manifest of (id, input, target) path pairs. Every randomized
step hashes its stream id from stable identifiers (entry id, copy index), so
re-runs, worker counts, and unrelated dataset edits never change what a given
sample gets. Augmented outputs are PNG plus a JSON provenance sidecar per
sample; reports serialize to JSON, plain text, and CSV.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from patchforge import augments, imgcore, maskgen, quality
from patchforge.augments import AugmentConfig
from patchforge.imgcore import PairedSample
from patchforge.rng import SeededRng, derive_stream_id, uniform_int

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class EmptyDatasetError(ValueError):
    """No valid pairs to work with."""


class EmptySelectionError(ValueError):
    """Subsample fraction outside (0, 1]."""


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    input_path: str  # POSIX-style, relative to the manifest root
    target_path: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    root: Path
    fingerprint: str
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def input_path(self, entry: ManifestEntry) -> Path:
        return self.root / entry.input_path

    def target_path(self, entry: ManifestEntry) -> Path:
        return self.root / entry.target_path


def _fingerprint(entries) -> str:
    canon = [{"id": e.id, "input": e.input_path, "target": e.target_path}
             for e in entries]
    data = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def _make_manifest(entries, root: Path, warnings) -> DatasetManifest:
    entries = tuple(sorted(entries, key=lambda e: e.id))
    return DatasetManifest(
        entries=entries,
        root=root,
        fingerprint=_fingerprint(entries),
        warnings=tuple(warnings),
    )


def _list_images(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES)


def _probe(path: Path):
    """(width, height, channels) from the header; None if unreadable."""
    from PIL import Image as PILImage
    try:
        with PILImage.open(path) as im:
            w, h = im.size
            channels = 1 if im.mode == "L" else 3
        return w, h, channels
    except Exception:
        return None


def scan(input_dir, target_dir, pairing_rule: str = "same_filename") -> DatasetManifest:
    """Build a validated manifest from two image directories.

    same_filename pairs files by name (extension-insensitive); sorted_order
    pairs the i-th input with the i-th target after lexicographic sort.
    Orphans, ambiguous names, and dimension-mismatched pairs are excluded
    and reported in the manifest warnings.
    """
    input_dir = Path(input_dir)
    target_dir = Path(target_dir)
    for d in (input_dir, target_dir):
        if not d.is_dir():
            raise EmptyDatasetError(f"not a directory: {d}")
    if pairing_rule not in ("same_filename", "sorted_order"):
        raise ValueError(f"unknown pairing rule {pairing_rule!r}")

    inputs = _list_images(input_dir)
    targets = _list_images(target_dir)
    warnings: list[str] = []
    candidates: list[tuple[str, Path, Path]] = []

    if pairing_rule == "same_filename":
        by_stem_in = _unique_by_stem(inputs, "input", warnings)
        by_stem_tgt = _unique_by_stem(targets, "target", warnings)
        for stem, ipath in sorted(by_stem_in.items()):
            tpath = by_stem_tgt.get(stem)
            if tpath is None:
                warnings.append(f"orphan input without target: {ipath.name}")
                continue
            candidates.append((stem, ipath, tpath))
        for stem, tpath in sorted(by_stem_tgt.items()):
            if stem not in by_stem_in:
                warnings.append(f"orphan target without input: {tpath.name}")
    else:
        for i, (ipath, tpath) in enumerate(zip(inputs, targets)):
            candidates.append((f"{i:05d}_{ipath.stem}", ipath, tpath))
        for extra in inputs[len(targets):]:
            warnings.append(f"orphan input without target: {extra.name}")
        for extra in targets[len(inputs):]:
            warnings.append(f"orphan target without input: {extra.name}")

    root = Path(os.path.commonpath([input_dir.resolve(), target_dir.resolve()]))
    entries = []
    for entry_id, ipath, tpath in candidates:
        in_probe = _probe(ipath)
        tgt_probe = _probe(tpath)
        if in_probe is None or tgt_probe is None:
            warnings.append(f"unreadable pair excluded: {entry_id}")
            continue
        if in_probe != tgt_probe:
            warnings.append(
                f"dimension mismatch excluded: {entry_id} "
                f"(input {in_probe[0]}x{in_probe[1]}x{in_probe[2]}, "
                f"target {tgt_probe[0]}x{tgt_probe[1]}x{tgt_probe[2]})")
            continue
        entries.append(ManifestEntry(
            id=entry_id,
            input_path=ipath.resolve().relative_to(root).as_posix(),
            target_path=tpath.resolve().relative_to(root).as_posix(),
        ))
    if not entries:
        raise EmptyDatasetError(
            f"no valid pairs between {input_dir} and {target_dir}")
    return _make_manifest(entries, root, warnings)


def _unique_by_stem(paths, side: str, warnings: list[str]) -> dict[str, Path]:
    by_stem: dict[str, Path] = {}
    dupes = set()
    for p in paths:
        if p.stem in by_stem:
            dupes.add(p.stem)
        else:
            by_stem[p.stem] = p
    for stem in sorted(dupes):
        warnings.append(f"ambiguous {side} name excluded: {stem}")
        by_stem.pop(stem, None)
    return by_stem


def load_manifest(path) -> DatasetManifest:
    """Read a manifest JSON file; paths are resolved relative to its directory."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    root = path.parent.resolve()
    entries = [ManifestEntry(id=e["id"], input_path=e["input"],
                             target_path=e["target"]) for e in raw]
    if not entries:
        raise EmptyDatasetError(f"manifest {path} is empty")
    missing = [e.id for e in entries
               if not (root / e.input_path).exists()
               or not (root / e.target_path).exists()]
    if missing:
        raise imgcore.ValidationError(
            [f"manifest path missing for entry {i}" for i in missing])
    return _make_manifest(entries, root, ())


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Write a manifest as a JSON array of {id, input, target}."""
    path = Path(path)
    base = path.parent.resolve()
    rows = []
    for e in manifest.entries:
        rows.append({
            "id": e.id,
            "input": Path(os.path.relpath(manifest.input_path(e).resolve(), base)).as_posix(),
            "target": Path(os.path.relpath(manifest.target_path(e).resolve(), base)).as_posix(),
        })
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, indent=2, sort_keys=True)
        f.write("\n")


def subsample(manifest: DatasetManifest, fraction: float, seed: int) -> DatasetManifest:
    """Keep ceil(fraction * N) entries chosen by a seeded permutation prefix.

    Prefix selection makes the fraction ladder nested: the 20% subset is
    contained in the 30% subset for the same seed, and so on.
    """
    if not 0.0 < fraction <= 1.0:
        raise EmptySelectionError(f"fraction must be in (0, 1], got {fraction}")
    n = len(manifest.entries)
    # snap float fuzz from decimal fractions (0.3 * N style) off the ceiling
    k = math.ceil(round(fraction * n, 9))
    gen = SeededRng(master_seed=seed, stream_id=0).generator()
    order = gen.permutation(n)
    chosen = [manifest.entries[i] for i in order[:k]]
    return _make_manifest(chosen, manifest.root, ())


@lru_cache(maxsize=8)
def _read_cached(path_str: str, mtime_ns: int, size: int) -> np.ndarray:
    return imgcore.read_image(path_str)


def load_pair(manifest: DatasetManifest, entry: ManifestEntry) -> PairedSample:
    """Load and range-validate one manifest entry as a PairedSample."""
    def read(p: Path) -> np.ndarray:
        st = os.stat(p)
        return _read_cached(str(p), st.st_mtime_ns, st.st_size)

    sample = PairedSample(
        input=read(manifest.input_path(entry)),
        target=read(manifest.target_path(entry)),
        id=entry.id,
    )
    imgcore.validate_pair(sample)
    return sample


def _donor_source(manifest: DatasetManifest) -> augments.DonorSource:
    entries = manifest.entries  # snapshot: same donor pool for every worker

    def pick(gen: np.random.Generator) -> PairedSample:
        j = uniform_int(gen, 0, len(entries) - 1)
        return load_pair(manifest, entries[j])

    return pick


@dataclass
class RunSummary:
    entries: int
    copies_per_sample: int
    outputs: int
    failures: int
    failure_messages: list = field(default_factory=list)
    mean_coverage: float = 0.0
    elapsed_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "copies_per_sample": self.copies_per_sample,
            "outputs": self.outputs,
            "failures": self.failures,
            "failure_messages": self.failure_messages,
            "mean_coverage": self.mean_coverage,
            "elapsed_seconds": self.elapsed_seconds,
        }


def run_augmentation(manifest: DatasetManifest, cfg: AugmentConfig,
                     copies_per_sample: int, master_seed: int, out_dir,
                     workers: int = 1) -> RunSummary:
    """Materialize an augmented dataset on disk.

    Per entry and copy index writes <id>_<copy>.png, <id>_<copy>_mask.png and
    <id>_<copy>.json (provenance). The per-sample stream id is a stable hash
    of (entry id, copy index), so the output tree is bit-identical across
    re-runs and worker counts. I/O failures are recorded and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    donor = _donor_source(manifest) if cfg.strategy in ("cut_mix", "mixup") else None
    start = time.perf_counter()

    tasks = [(entry, copy) for entry in manifest.entries
             for copy in range(copies_per_sample)]

    def materialize(task):
        entry, copy = task
        sample_id = f"{entry.id}_{copy:03d}"
        stream = derive_stream_id(entry.id, copy)
        pair = load_pair(manifest, entry)
        aug = augments.apply(pair, cfg, donor, SeededRng(master_seed, stream))
        imgcore.write_png(out_dir / f"{sample_id}.png", aug.input)
        maskgen.write_mask_png(out_dir / maskgen.mask_filename(sample_id), aug.mask)
        provenance = {
            "sample_id": sample_id,
            "entry_id": entry.id,
            "copy_index": copy,
            "master_seed": master_seed,
            "stream_id": stream,
            "config": cfg.to_dict(),
            **aug.provenance,
        }
        with open(out_dir / f"{sample_id}.json", "w", encoding="utf-8") as f:
            json.dump(provenance, f, indent=2, sort_keys=True)
            f.write("\n")
        return sample_id, maskgen.coverage(aug.mask)

    results = []
    failure_messages = []
    if workers <= 1:
        for task in tasks:
            try:
                results.append(materialize(task))
            except Exception as exc:
                failure_messages.append(f"{task[0].id}_{task[1]:03d}: {exc}")
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(materialize, t): t for t in tasks}
            for fut in concurrent.futures.as_completed(futures):
                entry, copy = futures[fut]
                try:
                    results.append(fut.result())
                except Exception as exc:
                    failure_messages.append(f"{entry.id}_{copy:03d}: {exc}")

    # aggregate in id order so the summary is identical for any worker count
    results.sort()
    coverages = [cov for _, cov in results]
    failure_messages.sort()
    return RunSummary(
        entries=len(manifest.entries),
        copies_per_sample=copies_per_sample,
        outputs=len(coverages),
        failures=len(failure_messages),
        failure_messages=failure_messages,
        mean_coverage=float(np.mean(coverages)) if coverages else 0.0,
        elapsed_seconds=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class SweepGrid:
    scales: tuple[float, ...]
    strategies: tuple[str, ...]
    samples_per_cell: int = 100

    def __post_init__(self):
        if not self.scales or not self.strategies:
            raise ValueError("sweep grid needs at least one scale and one strategy")
        for s in self.scales:
            if not 0.0 < s <= 1.0:
                raise ValueError(f"scale must be in (0, 1], got {s}")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must be strictly increasing: {self.scales}")
        for name in self.strategies:
            if name not in augments.STRATEGIES:
                raise ValueError(f"unknown strategy {name!r}")
        if self.samples_per_cell < 1:
            raise ValueError("samples_per_cell must be >= 1")


@dataclass
class SweepCell:
    strategy: str
    scale: float
    samples: int = 0
    coverage_mean: float = 0.0
    coverage_std: float = 0.0
    psnr_delta: float | None = None
    ssim_delta: float | None = None
    intensity_hist: list = field(default_factory=lambda: [0] * 10)
    intensity_min: float | None = None
    intensity_max: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "scale": self.scale,
            "samples": self.samples,
            "coverage_mean": self.coverage_mean,
            "coverage_std": self.coverage_std,
            "psnr_delta": self.psnr_delta,
            "ssim_delta": self.ssim_delta,
            "intensity_hist": self.intensity_hist,
            "intensity_min": self.intensity_min,
            "intensity_max": self.intensity_max,
            "error": self.error,
        }


@dataclass
class SweepReport:
    cells: list

    CSV_HEADER = "strategy,scale,coverage_mean,coverage_std,psnr_delta,ssim_delta"

    def to_dict(self) -> dict:
        return {"cells": [c.to_dict() for c in self.cells]}

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for c in self.cells:
            psnr_d = "" if c.psnr_delta is None else f"{c.psnr_delta:.6f}"
            ssim_d = "" if c.ssim_delta is None else f"{c.ssim_delta:.6f}"
            lines.append(f"{c.strategy},{c.scale:g},{c.coverage_mean:.6f},"
                         f"{c.coverage_std:.6f},{psnr_d},{ssim_d}")
        return "\n".join(lines) + "\n"


def _cell_config(strategy: str, scale: float) -> AugmentConfig:
    return AugmentConfig(
        strategy=strategy,
        mask_cfg=maskgen.MaskConfig(mp_max=scale),
    )


def sweep(manifest: DatasetManifest, grid: SweepGrid, master_seed: int) -> SweepReport:
    """Generate per-(strategy, scale) augmentation statistics in memory.

    Stream ids depend only on (entry id, sample index), never on the cell,
    so the same underlying draws are reused across scales (common random
    numbers) and mean coverage grows monotonically with scale by
    construction. Metric deltas are measured against the clean target:
    delta = metric(augmented, target) - metric(original, target).
    """
    if not manifest.entries:
        raise EmptyDatasetError("sweep needs a non-empty manifest")
    donor = _donor_source(manifest)
    entries = manifest.entries
    cells = []
    for strategy in grid.strategies:
        for scale in grid.scales:
            cell = SweepCell(strategy=strategy, scale=scale)
            try:
                _run_cell(cell, manifest, entries, grid, master_seed, donor)
            except Exception as exc:
                cell.error = str(exc)
            cells.append(cell)
    return SweepReport(cells=cells)


def _run_cell(cell: SweepCell, manifest, entries, grid: SweepGrid,
              master_seed: int, donor) -> None:
    cfg = _cell_config(cell.strategy, cell.scale)
    needs_donor = cell.strategy in ("cut_mix", "mixup")
    coverages = []
    psnr_deltas = []
    ssim_deltas = []
    intensities = []
    for i in range(grid.samples_per_cell):
        entry = entries[i % len(entries)]
        stream = derive_stream_id("sweep", entry.id, i)
        pair = load_pair(manifest, entry)
        aug = augments.apply(pair, cfg, donor if needs_donor else None,
                             SeededRng(master_seed, stream))
        coverages.append(maskgen.coverage(aug.mask))
        intensities.extend(p["intensity"] for p in aug.provenance.get("patches", []))
        base_psnr = quality.psnr(pair.input, pair.target)
        aug_psnr = quality.psnr(aug.input, aug.target)
        if math.isfinite(base_psnr) and math.isfinite(aug_psnr):
            psnr_deltas.append(aug_psnr - base_psnr)
        base_ssim = quality.ssim(pair.input, pair.target)
        aug_ssim = quality.ssim(aug.input, aug.target)
        ssim_deltas.append(aug_ssim - base_ssim)
    cell.samples = len(coverages)
    cell.coverage_mean = float(np.mean(coverages))
    cell.coverage_std = float(np.std(coverages))
    cell.psnr_delta = float(np.mean(psnr_deltas)) if psnr_deltas else None
    cell.ssim_delta = float(np.mean(ssim_deltas)) if ssim_deltas else None
    if intensities:
        hist, _ = np.histogram(intensities, bins=10, range=(0.0, 1.0))
        cell.intensity_hist = hist.tolist()
        cell.intensity_min = float(min(intensities))
        cell.intensity_max = float(max(intensities))


@dataclass
class DatasetStats:
    """The augmentation-relevant dataset properties: input-vs-target metric
    means, the modal resolution, and the pair count."""

    name: str
    count: int
    psnr_db: float
    ssim: float
    psnr_excluded: int
    modal_resolution: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "count": self.count,
            "psnr_db": "inf" if math.isinf(self.psnr_db) else self.psnr_db,
            "ssim": self.ssim,
            "psnr_excluded": self.psnr_excluded,
            "resolution": f"{self.modal_resolution[0]}x{self.modal_resolution[1]}",
        }

    def render_row(self) -> str:
        psnr_s = "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.2f}"
        res = f"{self.modal_resolution[0]} x {self.modal_resolution[1]}"
        return (f"{self.name:<12} {psnr_s} / {self.ssim:.2f} / n/a  "
                f"{res:>12}  {self.count:>6}")

    @staticmethod
    def header() -> str:
        return (f"{'Dataset Name':<12} {'PSNR / SSIM / NIQE':<20} "
                f"{'Resolution':>10}  {'# Images':>8}")


def dataset_stats(manifest: DatasetManifest, name: str = "dataset",
                  workers: int = 1) -> DatasetStats:
    """Mean input-vs-target PSNR/SSIM, modal resolution, and pair count."""
    if not manifest.entries:
        raise EmptyDatasetError("dataset_stats needs a non-empty manifest")

    def evaluate(entry):
        pair = load_pair(manifest, entry)
        h, w = pair.input.shape[:2]
        return (quality.psnr(pair.input, pair.target),
                quality.ssim(pair.input, pair.target), (w, h))

    if workers <= 1:
        results = [evaluate(e) for e in manifest.entries]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, manifest.entries))

    psnrs = [p for p, _, _ in results]
    finite = [p for p in psnrs if math.isfinite(p)]
    resolutions = Counter(r for _, _, r in results)
    return DatasetStats(
        name=name,
        count=len(results),
        psnr_db=float(np.mean(finite)) if finite else math.inf,
        ssim=float(np.mean([s for _, s, _ in results])),
        psnr_excluded=len(psnrs) - len(finite),
        modal_resolution=resolutions.most_common(1)[0][0],
    )
