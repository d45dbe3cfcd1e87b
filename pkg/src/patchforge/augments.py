"""Paired-sample augmentation strategies.

The central strategy blends patches between the degraded input and the clean
target through a float alpha mask, producing partially restored (or partially
degraded) network inputs while the training target stays the clean image.
The classic region-modification baselines (hard patch paste, constant-fill
erasure, donor patch mixing, global convex mixing, Gaussian-noise patches)
share the same mask machinery so they are directly comparable in sweeps.

Everything is a pure function of (sample, config, rng); a batch can be
augmented concurrently by giving each sample its own stream id.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from patchforge import imgcore, maskgen
from patchforge.imgcore import PairedSample, ShapeError
from patchforge.maskgen import ConfigError, MaskConfig
from patchforge.rng import as_generator

STRATEGIES = ("copy_blend", "cut_blur", "cut_out", "cut_mix", "mixup",
              "patch_gaussian", "none")

DonorSource = Callable[[np.random.Generator], PairedSample]


class Direction(str, enum.Enum):
    """Which image serves as the base and which contributes the patches."""

    CLEAN_ONTO_NOISY = "clean_onto_noisy"
    NOISY_ONTO_CLEAN = "noisy_onto_clean"
    RANDOM = "random"


@dataclass(frozen=True)
class AugmentConfig:
    """Strategy selector plus every strategy's knobs.

    Only the fields the selected strategy reads are validated strictly;
    the rest keep their defaults so one config object can drive a sweep
    across strategies.
    """

    strategy: str = "copy_blend"
    mask_cfg: MaskConfig = field(default_factory=MaskConfig)
    direction: Direction = Direction.RANDOM
    fill_value: float = 0.0
    mixup_alpha: float = 1.0
    noise_sigma: float = 0.05
    apply_probability: float = 1.0

    def __post_init__(self):
        problems = []
        if self.strategy not in STRATEGIES:
            problems.append(f"unknown strategy {self.strategy!r}")
        if not isinstance(self.direction, Direction):
            problems.append(f"direction must be a Direction, got {self.direction!r}")
        if not 0.0 <= self.apply_probability <= 1.0:
            problems.append(
                f"apply_probability must be in [0, 1], got {self.apply_probability}")
        if not 0.0 <= self.fill_value <= 1.0:
            problems.append(f"fill_value must be in [0, 1], got {self.fill_value}")
        if self.mixup_alpha <= 0.0:
            problems.append(f"mixup_alpha must be > 0, got {self.mixup_alpha}")
        if not 0.0 <= self.noise_sigma <= 1.0:
            problems.append(f"noise_sigma must be in [0, 1], got {self.noise_sigma}")
        if self.strategy == "patch_gaussian" and self.noise_sigma == 0.0:
            problems.append("patch_gaussian requires noise_sigma > 0")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "mask": self.mask_cfg.to_dict(),
            "direction": self.direction.value,
            "fill_value": self.fill_value,
            "mixup_alpha": self.mixup_alpha,
            "noise_sigma": self.noise_sigma,
            "apply_probability": self.apply_probability,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        kwargs = {}
        for key in ("strategy", "fill_value", "mixup_alpha", "noise_sigma",
                    "apply_probability"):
            if key in d:
                kwargs[key] = d[key]
        if "mask" in d:
            kwargs["mask_cfg"] = MaskConfig.from_dict(d["mask"])
        if "direction" in d:
            kwargs["direction"] = Direction(d["direction"])
        return cls(**kwargs)


@dataclass(frozen=True)
class AugmentedSample:
    """Result of one augmentation: new input, untouched-or-mixed target, the
    alpha mask actually applied, and enough provenance to regenerate it."""

    input: np.ndarray
    target: np.ndarray
    mask: np.ndarray
    provenance: dict


def _zero_mask(pair: PairedSample) -> np.ndarray:
    h, w = pair.input.shape[:2]
    return np.zeros((h, w), dtype=np.float64)


def _identity(pair: PairedSample, strategy: str, applied: bool) -> AugmentedSample:
    return AugmentedSample(
        input=pair.input,
        target=pair.target,
        mask=_zero_mask(pair),
        provenance={"strategy": strategy, "applied": applied, "patches": []},
    )


def _resolve_direction(direction: Direction, gen: np.random.Generator) -> Direction:
    if direction is not Direction.RANDOM:
        return direction
    if gen.random() < 0.5:
        return Direction.CLEAN_ONTO_NOISY
    return Direction.NOISY_ONTO_CLEAN


def _sampled_mask(cfg: AugmentConfig, pair: PairedSample, gen,
                  force_intensity: Optional[float]):
    h, w = pair.input.shape[:2]
    patches = maskgen.sample_patches(cfg.mask_cfg, w, h, gen)
    if force_intensity is not None:
        patches = [replace(p, intensity=force_intensity) for p in patches]
    return patches, maskgen.rasterize(patches, w, h)


def _blend_strategy(pair: PairedSample, cfg: AugmentConfig, rng, strategy: str,
                    force_intensity: Optional[float]) -> AugmentedSample:
    gen = as_generator(rng)
    direction = _resolve_direction(cfg.direction, gen)
    patches, mask = _sampled_mask(cfg, pair, gen, force_intensity)
    if direction is Direction.CLEAN_ONTO_NOISY:
        new_input = imgcore.blend(pair.input, pair.target, mask)
    else:
        new_input = imgcore.blend(pair.target, pair.input, mask)
    return AugmentedSample(
        input=new_input,
        target=pair.target,
        mask=mask,
        provenance={
            "strategy": strategy,
            "applied": True,
            "direction": direction.value,
            "patches": [p.to_dict() for p in patches],
        },
    )


def copy_blend(pair: PairedSample, cfg: AugmentConfig, rng) -> AugmentedSample:
    """Blend patches between input and target at varying intensities.

    clean_onto_noisy blends clean patches into the degraded input;
    noisy_onto_clean uses the clean image as the base and blends degraded
    patches into it. Either way the target stays the clean ground truth.
    """
    return _blend_strategy(pair, cfg, rng, "copy_blend", force_intensity=None)


def cut_blur(pair: PairedSample, cfg: AugmentConfig, rng) -> AugmentedSample:
    """Hard patch paste: like copy_blend but every patch intensity is 1."""
    return _blend_strategy(pair, cfg, rng, "cut_blur", force_intensity=1.0)


def cut_out(pair: PairedSample, cfg: AugmentConfig, rng) -> AugmentedSample:
    """Set patch regions of the input to a constant fill value."""
    gen = as_generator(rng)
    patches, mask = _sampled_mask(cfg, pair, gen, force_intensity=1.0)
    new_input = np.where(mask[:, :, None] > 0.0, cfg.fill_value, pair.input)
    return AugmentedSample(
        input=new_input,
        target=pair.target,
        mask=mask,
        provenance={
            "strategy": "cut_out",
            "applied": True,
            "fill_value": cfg.fill_value,
            "patches": [p.to_dict() for p in patches],
        },
    )


def cut_mix(pair: PairedSample, donor: PairedSample, cfg: AugmentConfig,
            rng) -> AugmentedSample:
    """Paste donor patches into the input AND the target at the same spot.

    Restoration pairs carry no labels to mix, so the donor's input and target
    regions are pasted coherently to keep the pair registered.
    """
    _check_donor_shapes(pair, donor)
    gen = as_generator(rng)
    patches, mask = _sampled_mask(cfg, pair, gen, force_intensity=1.0)
    inside = mask[:, :, None] > 0.0
    return AugmentedSample(
        input=np.where(inside, donor.input, pair.input),
        target=np.where(inside, donor.target, pair.target),
        mask=mask,
        provenance={
            "strategy": "cut_mix",
            "applied": True,
            "donor_id": donor.id,
            "patches": [p.to_dict() for p in patches],
        },
    )


def mixup(pair: PairedSample, donor: PairedSample, cfg: AugmentConfig,
          rng) -> AugmentedSample:
    """Global convex mix of pair and donor, same lambda for input and target."""
    _check_donor_shapes(pair, donor)
    gen = as_generator(rng)
    lam = float(gen.beta(cfg.mixup_alpha, cfg.mixup_alpha))
    return AugmentedSample(
        input=_mix_images(pair.input, donor.input, lam),
        target=_mix_images(pair.target, donor.target, lam),
        mask=_zero_mask(pair),
        provenance={
            "strategy": "mixup",
            "applied": True,
            "donor_id": donor.id,
            "lambda": lam,
            "patches": [],
        },
    )


def _mix_images(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    # lam*a + (1-lam)*b, written so that lam=1 and b==a are bit-exact
    # identities instead of off by an ulp.
    out = a + (1.0 - lam) * (b - a)
    np.clip(out, 0.0, 1.0, out=out)
    return out


def patch_gaussian(pair: PairedSample, cfg: AugmentConfig, rng) -> AugmentedSample:
    """Add i.i.d. Gaussian noise inside patch regions, clamped to [0, 1]."""
    if cfg.noise_sigma <= 0.0:
        raise ConfigError("patch_gaussian requires noise_sigma > 0")
    gen = as_generator(rng)
    patches, mask = _sampled_mask(cfg, pair, gen, force_intensity=1.0)
    noise = gen.normal(0.0, cfg.noise_sigma, size=pair.input.shape)
    noisy = np.clip(pair.input + noise, 0.0, 1.0)
    new_input = np.where(mask[:, :, None] > 0.0, noisy, pair.input)
    return AugmentedSample(
        input=new_input,
        target=pair.target,
        mask=mask,
        provenance={
            "strategy": "patch_gaussian",
            "applied": True,
            "noise_sigma": cfg.noise_sigma,
            "patches": [p.to_dict() for p in patches],
        },
    )


def _check_donor_shapes(pair: PairedSample, donor: PairedSample) -> None:
    for axis, name in enumerate(("height", "width", "channels")):
        if pair.input.shape[axis] != donor.input.shape[axis]:
            raise ShapeError(
                f"{name} mismatch: pair {pair.input.shape[axis]} != "
                f"donor {donor.input.shape[axis]}")


def apply(pair: PairedSample, cfg: AugmentConfig,
          donor_source: Optional[DonorSource], rng) -> AugmentedSample:
    """Gate on apply_probability, resolve a donor if needed, and dispatch.

    Draw order is fixed: gate, donor selection, then the strategy's own
    draws, all from the one stream, so results are bit-reproducible.
    """
    gen = as_generator(rng)
    if cfg.strategy == "none":
        return _identity(pair, "none", applied=False)
    gate = gen.random()
    if gate >= cfg.apply_probability:
        return _identity(pair, cfg.strategy, applied=False)
    if cfg.strategy in ("cut_mix", "mixup"):
        if donor_source is None:
            raise ConfigError(f"strategy {cfg.strategy} requires a donor source")
        donor = donor_source(gen)
        if cfg.strategy == "cut_mix":
            return cut_mix(pair, donor, cfg, gen)
        return mixup(pair, donor, cfg, gen)
    if cfg.strategy == "copy_blend":
        return copy_blend(pair, cfg, gen)
    if cfg.strategy == "cut_blur":
        return cut_blur(pair, cfg, gen)
    if cfg.strategy == "cut_out":
        return cut_out(pair, cfg, gen)
    return patch_gaussian(pair, cfg, gen)
