"""Seeded synthetic datasets: 2-D point clouds and tiny blob images."""

from __future__ import annotations

import enum

import numpy as np

from .core import seeded_rng

BLOB_MARGIN = 0.25


class Kind2D(str, enum.Enum):
    TWO_MOONS = "two_moons"
    CHECKERBOARD = "checkerboard"
    GAUSS_MIX8 = "gauss_mix8"
    SPIRAL = "spiral"


def _standardize(pts):
    pts = pts - pts.mean(axis=0)
    std = pts.std(axis=0)
    std[std == 0] = 1.0
    pts = pts / std
    # second pass removes the residual mean left by rounding in the division
    return pts - pts.mean(axis=0)


def make_2d(kind, n, noise=0.05, seed=0) -> np.ndarray:
    """``n`` points in R^2 standardized to zero mean and unit per-axis variance."""
    kind = Kind2D(kind)
    if n < 1:
        raise ValueError("n must be >= 1")
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = seeded_rng(seed)
    if kind is Kind2D.TWO_MOONS:
        upper = rng.random(n) < 0.5
        theta = rng.uniform(0.0, np.pi, n)
        pts = np.where(
            upper[:, None],
            np.stack([np.cos(theta), np.sin(theta)], axis=1),
            np.stack([1.0 - np.cos(theta), 0.5 - np.sin(theta)], axis=1),
        )
    elif kind is Kind2D.CHECKERBOARD:
        x = rng.uniform(-2.0, 2.0, n)
        # shifting y by one cell on odd columns yields the alternating pattern
        y = rng.uniform(0.0, 1.0, n) - 2.0 * rng.integers(0, 2, n) + np.floor(x) % 2
        pts = np.stack([x, y], axis=1)
    elif kind is Kind2D.GAUSS_MIX8:
        angles = 2.0 * np.pi * rng.integers(0, 8, n) / 8.0
        pts = 2.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        r = np.sqrt(rng.random(n)) * 3.0 * np.pi
        pts = np.stack([r * np.cos(r), r * np.sin(r)], axis=1) / (3.0 * np.pi)
    pts = pts + noise * rng.standard_normal((n, 2))
    return _standardize(pts)


def make_blob_images(n, side=8, seed=0) -> np.ndarray:
    """Flattened ``side x side`` images in [-1, 1].

    Each image is a gentle linear background ramp (easy to predict) plus one
    sharp-edged disc of random radius and brightness whose center is uniform
    over the central region (hard to predict).
    """
    if not 2 <= side <= 16:
        raise ValueError(f"side must be in [2, 16], got {side}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seeded_rng(seed)
    coords = (np.arange(side) + 0.5) / side
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    slope = rng.uniform(0.1, 0.3, n)
    offset = rng.uniform(-0.7, -0.5, n)
    lo, hi = BLOB_MARGIN, 1.0 - BLOB_MARGIN
    cx = rng.uniform(lo, hi, n)
    cy = rng.uniform(lo, hi, n)
    radius = rng.uniform(0.10, 0.18, n)
    bright = rng.uniform(1.0, 1.8, n)
    ramp = (np.cos(angle)[:, None, None] * (xx - 0.5) + np.sin(angle)[:, None, None] * (yy - 0.5))
    img = offset[:, None, None] + slope[:, None, None] * ramp
    dist2 = (xx - cx[:, None, None]) ** 2 + (yy - cy[:, None, None]) ** 2
    img = img + bright[:, None, None] * (dist2 <= radius[:, None, None] ** 2)
    return np.clip(img, -1.0, 1.0).reshape(n, side * side)


def blob_region_mask(side) -> np.ndarray:
    """Boolean mask over pixels whose centers fall inside the blob-center region."""
    coords = (np.arange(side) + 0.5) / side
    inside = (coords >= BLOB_MARGIN) & (coords <= 1.0 - BLOB_MARGIN)
    return (inside[:, None] & inside[None, :]).reshape(-1)


def corner_indices(side) -> np.ndarray:
    return np.array([0, side - 1, side * (side - 1), side * side - 1])
