#!/usr/bin/env python3
"""Write the 64x64 natural test crops used by the test suites.

Crops come from the sample images bundled with scikit-image and are
area-downsampled so they keep real texture at a small size.
"""
import argparse
import pathlib

import numpy as np
from PIL import Image
from skimage import data

SOURCES = [
    "astronaut", "camera", "chelsea", "coffee", "rocket", "brick", "grass", "gravel",
    "coins", "clock", "retina", "hubble_deep_field", "immunohistochemistry",
    "moon", "page", "text", "horse", "cell", "colorwheel", "logo",
]
SIZE = 64


def crop(name):
    img = np.asarray(getattr(data, name)())
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    if img.ndim == 3:
        img = img[..., :3]
    h, w = img.shape[:2]
    side = min(h, w)
    y0, x0 = (h - side) // 2, (w - side) // 2
    square = Image.fromarray(img[y0:y0 + side, x0:x0 + side].astype(np.uint8))
    return square.resize((SIZE, SIZE), Image.BOX)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(SOURCES):
        crop(name).save(args.out / f"{i:02d}_{name}.png")


if __name__ == "__main__":
    main()
