"""Regenerates the bundled test images in data/."""

import pathlib

import numpy as np
from matplotlib import colormaps
from PIL import Image

N = 512
OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def visualization():
    y, x = np.mgrid[0:N, 0:N] / N
    field = (np.exp(-((x - 0.3) ** 2 + (y - 0.35) ** 2) / 0.02)
             + 0.8 * np.exp(-((x - 0.7) ** 2 + (y - 0.6) ** 2) / 0.05)
             - 0.5 * np.exp(-((x - 0.55) ** 2 + (y - 0.2) ** 2) / 0.01)
             + 0.15 * np.sin(14 * x) * np.cos(11 * y))
    field = (field - field.min()) / (field.max() - field.min())
    rgb = colormaps["viridis"](field)[..., :3]
    # Contour lines and a fine grid give the card edges at several scales.
    contours = np.abs(((field * 12) % 1) - 0.5) > 0.47
    rgb[contours] = 0.95
    rgb[(np.arange(N) % 64 == 0)[None, :].repeat(N, 0)] = 0.1
    rgb[(np.arange(N) % 64 == 0)[:, None].repeat(N, 1)] = 0.1
    return (rgb * 255 + 0.5).astype(np.uint8)


def step_card():
    img = np.full((N, N, 3), 0.5)
    img[:, N // 2:] = 0.75
    for i, width in enumerate([1, 2, 4, 8, 16]):
        top = 40 + i * 40
        for k in range(0, 200, 2 * width):
            img[top:top + 24, 40 + k:40 + k + width] = (0.2, 0.3, 0.6)
    img[300:460, 60:200] = (0.8, 0.25, 0.2)
    img[300:460, 320:460] = (0.2, 0.6, 0.3)
    return (img * 255 + 0.5).astype(np.uint8)


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    Image.fromarray(visualization(), "RGB").save(OUT / "test_card.png", optimize=False)
    Image.fromarray(step_card(), "RGB").save(OUT / "step_card.png", optimize=False)
