import numpy as np
import pytest

from patchforge import imgcore
from patchforge.imgcore import PairedSample


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_image(gen, height, width, channels=3):
    return gen.random((height, width, channels))


def random_pair(gen, height, width, channels=3, sample_id="s"):
    return PairedSample(
        input=gen.random((height, width, channels)),
        target=gen.random((height, width, channels)),
        id=sample_id,
    )


def write_dataset(root, n, width=48, height=32, channels=3, seed=0,
                  input_name="low", target_name="high"):
    """Write n paired PNGs under root/<input_name> and root/<target_name>."""
    gen = np.random.default_rng(seed)
    input_dir = root / input_name
    target_dir = root / target_name
    input_dir.mkdir(parents=True, exist_ok=True)
    target_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        target = gen.random((height, width, channels))
        degraded = np.clip(target * 0.35 + 0.05 * gen.random((height, width, channels)),
                           0.0, 1.0)
        imgcore.write_png(input_dir / f"img{i:03d}.png", degraded)
        imgcore.write_png(target_dir / f"img{i:03d}.png", target)
    return input_dir, target_dir


def kernel_backends():
    """All importable kernel backends as (name, module) pairs."""
    from patchforge import _kernels_py
    backends = [("python", _kernels_py)]
    try:
        from patchforge import _kernels
        backends.append(("compiled", _kernels))
    except ImportError:
        pass
    return backends
