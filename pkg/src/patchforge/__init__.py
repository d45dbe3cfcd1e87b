"""patchforge: paired-image augmentation with alpha-mask patch blending.

The core operation blends patches between a degraded image and its clean
counterpart through a float alpha mask, alongside the classic
region-modification baselines, plus PSNR/SSIM metrics, deterministic
dataset tooling, and a sweep harness.
"""

from patchforge.augments import (AugmentConfig, AugmentedSample, Direction,
                                 apply, copy_blend, cut_blur, cut_mix,
                                 cut_out, mixup, patch_gaussian)
from patchforge.imgcore import (PairedSample, ShapeError, ValidationError,
                                blend, dequantize, quantize, read_image,
                                validate_image, validate_pair, write_png)
from patchforge.kernels import backend_name
from patchforge.maskgen import (ConfigError, GeometryError, MaskConfig,
                                PatchShape, PatchSpec, coverage, rasterize,
                                sample_patches)
from patchforge.pipeline import (DatasetManifest, SweepGrid, dataset_stats,
                                 load_manifest, run_augmentation,
                                 save_manifest, scan, subsample, sweep)
from patchforge.quality import MetricReport, SsimParams, batch_report, psnr, ssim
from patchforge.rng import SeededRng, derive_stream_id

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "AugmentedSample", "Direction", "apply", "copy_blend",
    "cut_blur", "cut_mix", "cut_out", "mixup", "patch_gaussian",
    "PairedSample", "ShapeError", "ValidationError", "blend", "dequantize",
    "quantize", "read_image", "validate_image", "validate_pair", "write_png",
    "backend_name", "ConfigError", "GeometryError", "MaskConfig",
    "PatchShape", "PatchSpec", "coverage", "rasterize", "sample_patches",
    "DatasetManifest", "SweepGrid", "dataset_stats", "load_manifest",
    "run_augmentation", "save_manifest", "scan", "subsample", "sweep",
    "MetricReport", "SsimParams", "batch_report", "psnr", "ssim",
    "SeededRng", "derive_stream_id",
    "__version__",
]
