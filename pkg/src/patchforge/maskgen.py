"""Random patch sampling and alpha-mask rasterization.

A mask is built in two steps: ``sample_patches`` draws patch geometry and
intensity under the configured bounds, ``rasterize`` burns the patches into
a float mask, combining overlaps by per-pixel maximum. Patch centers are
sampled from the shrunk valid region, so patches never clip image borders.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from patchforge import imgcore, kernels
from patchforge.rng import as_generator, uniform_int


class ConfigError(ValueError):
    """Mask configuration cannot produce a valid patch for the given geometry."""


class GeometryError(ValueError):
    """A patch does not fit inside the target image bounds."""


class PatchShape(str, enum.Enum):
    SQUARE = "square"
    RECTANGLE = "rectangle"
    CIRCLE = "circle"


@dataclass(frozen=True)
class PatchSpec:
    """One patch: center and extents in pixels, plus its blend intensity.

    Centers are stored as floats (corner + extent/2, exactly representable)
    so rasterization recovers the integer corner bit-exactly. For circles the
    extents are equal and give the diameter.
    """

    center_x: float
    center_y: float
    extent_x: int
    extent_y: int
    shape: PatchShape
    intensity: float

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.value,
            "center_x": self.center_x,
            "center_y": self.center_y,
            "extent_x": self.extent_x,
            "extent_y": self.extent_y,
            "intensity": self.intensity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PatchSpec":
        return cls(
            center_x=float(d["center_x"]),
            center_y=float(d["center_y"]),
            extent_x=int(d["extent_x"]),
            extent_y=int(d["extent_y"]),
            shape=PatchShape(d["shape"]),
            intensity=float(d["intensity"]),
        )


@dataclass(frozen=True)
class MaskConfig:
    """Controls for patch sampling.

    mp_max bounds each patch extent as a fraction of the matching image
    dimension; beta_max bounds the blend intensity. With uniform_random
    intensities are drawn from (0, beta_max], with fixed every patch gets
    exactly beta_max. n_patches=0 is the explicit degenerate no-op config.
    """

    mp_max: float = 0.2
    beta_max: float = 1.0
    n_patches: int = 1
    shape: PatchShape = PatchShape.SQUARE
    intensity_mode: str = "uniform_random"

    def __post_init__(self):
        problems = []
        if not 0.0 < self.mp_max <= 1.0:
            problems.append(f"mp_max must be in (0, 1], got {self.mp_max}")
        if not 0.0 < self.beta_max <= 1.0:
            problems.append(f"beta_max must be in (0, 1], got {self.beta_max}")
        if self.n_patches < 0:
            problems.append(f"n_patches must be >= 0, got {self.n_patches}")
        if not isinstance(self.shape, PatchShape):
            problems.append(f"shape must be a PatchShape, got {self.shape!r}")
        if self.intensity_mode not in ("uniform_random", "fixed"):
            problems.append(
                f"intensity_mode must be uniform_random or fixed, "
                f"got {self.intensity_mode!r}")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "mp_max": self.mp_max,
            "beta_max": self.beta_max,
            "n_patches": self.n_patches,
            "shape": self.shape.value,
            "intensity_mode": self.intensity_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MaskConfig":
        cfg = cls()
        kwargs = {}
        for key in ("mp_max", "beta_max", "n_patches", "intensity_mode"):
            if key in d:
                kwargs[key] = d[key]
        if "shape" in d:
            kwargs["shape"] = PatchShape(d["shape"])
        return replace(cfg, **kwargs)


def sample_patches(cfg: MaskConfig, width: int, height: int, rng) -> list[PatchSpec]:
    """Draw cfg.n_patches patch specs for a width-by-height image.

    Draw order per patch is fixed (extents, corner x, corner y, intensity)
    so a given (master_seed, stream_id) always yields the same specs.
    """
    min_dim = min(width, height)
    if cfg.mp_max * min_dim < 1.0:
        raise ConfigError(
            f"mp_max {cfg.mp_max} admits no 1-pixel patch on "
            f"{width}x{height} (mp_max * {min_dim} < 1)")
    gen = as_generator(rng)
    max_side = int(cfg.mp_max * min_dim)
    max_ex = int(cfg.mp_max * width)
    max_ey = int(cfg.mp_max * height)
    patches = []
    for _ in range(cfg.n_patches):
        if cfg.shape is PatchShape.RECTANGLE:
            ex = uniform_int(gen, 1, max_ex)
            ey = uniform_int(gen, 1, max_ey)
        else:  # square side or circle diameter, bounded by both dimensions
            ex = ey = uniform_int(gen, 1, max_side)
        x0 = uniform_int(gen, 0, width - ex)
        y0 = uniform_int(gen, 0, height - ey)
        if cfg.intensity_mode == "uniform_random":
            intensity = cfg.beta_max * (1.0 - gen.random())  # (0, beta_max]
        else:
            intensity = cfg.beta_max
        patches.append(PatchSpec(
            center_x=x0 + ex / 2.0,
            center_y=y0 + ey / 2.0,
            extent_x=ex,
            extent_y=ey,
            shape=cfg.shape,
            intensity=intensity,
        ))
    return patches


def rasterize(patches: list[PatchSpec], width: int, height: int) -> np.ndarray:
    """Burn patches into a float mask; overlaps keep the maximum intensity."""
    mask = np.zeros((height, width), dtype=np.float64)
    for i, p in enumerate(patches):
        if p.shape is PatchShape.CIRCLE:
            radius = p.extent_x / 2.0
            if (p.center_x - radius < 0.0 or p.center_x + radius > width
                    or p.center_y - radius < 0.0 or p.center_y + radius > height):
                raise GeometryError(
                    f"patch {i}: circle (center ({p.center_x}, {p.center_y}), "
                    f"diameter {p.extent_x}) exceeds {width}x{height}")
            kernels.fill_circle_max(mask, p.center_x, p.center_y, radius,
                                    p.intensity)
        else:
            x0 = int(round(p.center_x - p.extent_x / 2.0))
            y0 = int(round(p.center_y - p.extent_y / 2.0))
            if (x0 < 0 or y0 < 0 or x0 + p.extent_x > width
                    or y0 + p.extent_y > height):
                raise GeometryError(
                    f"patch {i}: rect {p.extent_x}x{p.extent_y} at "
                    f"({x0}, {y0}) exceeds {width}x{height}")
            kernels.fill_rect_max(mask, x0, y0, p.extent_x, p.extent_y,
                                  p.intensity)
    return mask


def coverage(mask: np.ndarray) -> float:
    """Fraction of pixels with nonzero alpha."""
    return float(np.count_nonzero(mask)) / mask.size


def mask_filename(sample_id: str) -> str:
    """Deterministic debug-export name for a sample's mask."""
    return f"{sample_id}_mask.png"


def write_mask_png(path, mask: np.ndarray) -> None:
    """Export a mask as single-channel 8-bit PNG."""
    imgcore.write_png(path, mask[:, :, None])
