#!/usr/bin/env python3
"""Renders the bundled 28x28 handwritten-style '0' used by the test suite.

The stroke is a slightly tilted elliptical ring, supersampled 8x and softened
with a small Gaussian blur so the edges look like a scanned pen stroke.
"""
import argparse

import numpy as np
from scipy.ndimage import gaussian_filter


def render(side: int = 28, oversample: int = 8) -> np.ndarray:
    n = side * oversample
    coords = (np.arange(n) + 0.5) / oversample
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    cy, cx = 14.0, 14.2
    tilt = np.deg2rad(12.0)
    dy, dx = yy - cy, xx - cx
    u = dx * np.cos(tilt) + dy * np.sin(tilt)
    v = -dx * np.sin(tilt) + dy * np.cos(tilt)
    ry, rx = 8.6, 5.9
    radial = np.sqrt((u / rx) ** 2 + (v / ry) ** 2)
    # Stroke a bit thicker at the sides than at top and bottom.
    half_width = 0.20 + 0.05 * np.abs(np.cos(np.arctan2(v, u)))
    ink = (np.abs(radial - 1.0) < half_width).astype(float)
    img = ink.reshape(side, oversample, side, oversample).mean(axis=(1, 3))
    img = gaussian_filter(img, sigma=0.6)
    return np.clip(img / img.max(), 0.0, 1.0)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    args = parser.parse_args()
    pixels = np.round(render() * 255).astype(np.uint8)
    with open(args.output, "wb") as f:
        f.write(b"P5\n28 28\n255\n")
        f.write(pixels.tobytes())


if __name__ == "__main__":
    main()
