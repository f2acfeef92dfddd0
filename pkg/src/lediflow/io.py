"""Artifact writers: point CSVs, binary PGM images, loss histories, manifests."""

from __future__ import annotations

import csv
import json
import os

import numpy as np


def write_points_csv(path, points, header=("x", "y")):
    points = np.asarray(points, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in points:
            writer.writerow([repr(float(v)) for v in row])


def read_points_csv(path) -> np.ndarray:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)


def to_gray8(image) -> np.ndarray:
    """Map values in [-1, 1] to 0..255 (clipping outside values)."""
    img = np.clip((np.asarray(image, dtype=np.float64) + 1.0) * 127.5, 0, 255)
    return np.rint(img).astype(np.uint8)


def write_pgm(path, image, side=None):
    """Write a binary (P5) 8-bit grayscale PGM from a flat or 2-D array in [-1, 1]."""
    img = np.asarray(image)
    if img.ndim == 1:
        side = side or int(round(np.sqrt(img.size)))
        img = img.reshape(side, -1)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(to_gray8(img).tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM and return values rescaled to [-1, 1] as a 2-D array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(t) for t in tokens[1:])
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos + 1)
    return pixels.reshape(h, w).astype(np.float64) / maxval * 2.0 - 1.0


def write_images(out_dir, images, side, prefix="sample"):
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for i, img in enumerate(images):
        name = f"{prefix}_{i:05d}.pgm"
        write_pgm(os.path.join(out_dir, name), img, side)
        names.append(name)
    return names


def write_history_csv(path, history, columns=("step", "loss")):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in history:
            writer.writerow([row[0], *(repr(float(v)) for v in row[1:])])


def write_manifest(path, manifest: dict):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_mask(path) -> np.ndarray:
    """Whitespace/comma separated 0/1 values, or a PGM where nonzero means generate."""
    if str(path).endswith(".pgm"):
        return (read_pgm(path).reshape(-1) > -1.0).astype(np.int64)
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    return np.array([int(float(v)) for v in text.split()], dtype=np.int64)
